"""The symbolic input data: supports and coefficients of f, P, G, H.

A LaurentFamily bundles the x-support of f (with its fiber coordinates
t-bar), the deformation terms of P, and the derived polytopes: the Newton
polytope of f, the relative polytope of the deformation, and, when the
joint dimension allows, the polytope of the total family in the (lambda, x)
variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import geometry
from .ffield import FqField, field
from .padic import TowerConfig


@dataclass
class LaurentFamily:
    cfg: TowerConfig
    n: int
    s: int
    f_exps: tuple                 # u-tuples, the x-support of f
    t_codes: tuple                # F_q residue codes, one per f monomial
    P_terms: tuple                # (gamma, v, A_code) triples

    def __post_init__(self):
        if len(self.f_exps) != len(self.t_codes):
            raise ValueError("f support and t-bar length mismatch")
        if any(len(u) != self.n for u in self.f_exps):
            raise ValueError("f exponent dimension mismatch")
        for g, v, _ in self.P_terms:
            if len(g) != self.s or len(v) != self.n:
                raise ValueError("P exponent dimension mismatch")
            if all(c == 0 for c in v):
                raise ValueError("P monomial with constant x-part")
        if any(all(c == 0 for c in u) for u in self.f_exps):
            raise ValueError("f has a constant term")
        if any(c == 0 for c in self.t_codes):
            raise ValueError("zero coordinate in t-bar")
        if any(A == 0 for _, _, A in self.P_terms):
            raise ValueError("zero coefficient in P")
        self.geom_x = geometry.build_newton(self.f_exps)
        for u in self.f_exps:
            if self.geom_x.weight(u) != 1:
                raise ValueError(
                    f"f monomial {u} has weight {self.geom_x.weight(u)}; "
                    "the support must lie on the Newton boundary at infinity")
        for _, v, _ in self.P_terms:
            wv = self.geom_x.weight(v)
            if not (0 < wv < 1):
                raise ValueError(
                    f"P monomial x-exponent {v} has weight {wv}, not in (0,1)")
        if self.P_terms:
            self.geom_gamma = geometry.relative_polytope(
                [(g, v) for g, v, _ in self.P_terms], self.geom_x)
        else:
            # no deformation: the relative polytope is the origin
            self.geom_gamma = geometry.WeightedGeometry(
                (), ((Fraction(0),) * self.s,), (), (), 1, self.s, trivial=True)
        self.geom_h = None
        if self.P_terms and self.s + self.n <= 2:
            joint = [tuple(g) + tuple(v) for g, v, _ in self.P_terms]
            joint += [(0,) * self.s + tuple(u) for u in self.f_exps]
            self.geom_h = geometry.build_newton(joint)

    # -- fields and degrees ---------------------------------------------------

    @property
    def base_field(self) -> FqField:
        return field(self.cfg.p, self.cfg.a)

    @property
    def d_t(self) -> int:
        """[F_q(t-bar) : F_q]; coordinates here live in F_q itself."""
        return 1

    @property
    def m0(self) -> int:
        """a * d(t-bar), the Frobenius power of the relative operators."""
        return self.cfg.a * self.d_t

    @property
    def q_t(self) -> int:
        return self.cfg.p ** self.m0

    def fiber_field(self, d_lambda: int) -> FqField:
        return field(self.cfg.p, self.m0 * d_lambda)

    # -- weights ----------------------------------------------------------------

    def wx(self, u) -> Fraction:
        return self.geom_x.weight(u)

    def wg(self, g) -> Fraction:
        return self.geom_gamma.weight(g)

    def degree_bound(self) -> int:
        """n! times the normalized volume of the Newton polytope of f."""
        return self.geom_x.normalized_volume()

    def vertex_nondegenerate(self) -> bool:
        """Nondegeneracy at the vertices of a 1-dimensional Newton polytope.

        For n = 1 the boundary faces are single vertices u, and the face
        polynomial t_u x^u is nondegenerate iff p does not divide u.
        """
        if self.n != 1:
            return False
        return all(v[0] % self.cfg.p != 0 for v in self.geom_x.vertices
                   if v[0] != 0)

    # -- p-adic lifts -----------------------------------------------------------

    def lifted_monomials(self, ring):
        """(exponent-(gamma,u), Teichmuller coefficient) pairs for G's support.

        The f part carries gamma = 0 and the t-hat lifts; the P part carries
        its own exponents and the A-hat lifts.  Coefficients are raw elements
        of `ring`, whose residue field must contain F_q.
        """
        emb = ring.resfield.embed_from(self.base_field)
        out = []
        for u, tc in zip(self.f_exps, self.t_codes):
            out.append((((0,) * self.s, tuple(u)), ring.teichmuller(emb(tc))))
        for g, v, A in self.P_terms:
            out.append(((tuple(g), tuple(v)), ring.teichmuller(emb(A))))
        return out

    def fiber_monomials(self, lam_codes, ext: FqField):
        """Monomials (exponent u, coefficient code) of G at a torus point.

        lam_codes are coordinates of lambda-bar in `ext`; the t-bar and A
        residues embed along the canonical subfield embedding.
        """
        if any(c == 0 for c in lam_codes):
            raise ValueError("zero coordinate in lambda-bar")
        emb = ext.embed_from(self.base_field)
        mono: dict[tuple, int] = {}
        for u, tc in zip(self.f_exps, self.t_codes):
            key = tuple(u)
            mono[key] = ext.add(mono.get(key, 0), emb(tc))
        for g, v, A in self.P_terms:
            c = emb(A)
            for gi, li in zip(g, lam_codes):
                c = ext.mul(c, ext.pow(li, gi))
            key = tuple(v)
            mono[key] = ext.add(mono.get(key, 0), c)
        return [(u, c) for u, c in mono.items() if c != 0]
