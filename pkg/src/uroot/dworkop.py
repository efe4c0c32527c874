"""The splitting function, Frobenius series, Dwork operators, and their
Fredholm determinants, plus the trace-formula cross-check against brute force.

Matrices act on the unnormalized monomial basis {x^u}: conjugating away the
pi-tilde^w(u) normalization leaves every Fredholm determinant and trace
unchanged while keeping all entries in Z_q[pi].  The normalized valuation
floors are carried separately as rational bookkeeping.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rmatrix
from .charsum import LSeriesReport, delta_q, exp_sum, _embed_cyc
from .cyclo import CycInt
from .family import LaurentFamily
from .ffield import field
from .geometry import enumerate_monoid
from .padic import PadicRing, PadicScalar, TowerConfig
from .rmatrix import FredholmSeries, RingMatrix, fredholm, power_traces


@dataclass
class SplittingSeries:
    """Truncated coefficients of exp(pi(T - T^p)) over Z_p[pi]."""

    ring: PadicRing
    coeffs: list            # raw ring elements theta_0..theta_imax
    imax: int

    def floor(self, i: int) -> Fraction:
        return Fraction(self.ring.p - 1, self.ring.p ** 2) * i


def theta(cfg: TowerConfig, imax: int) -> SplittingSeries:
    """The splitting series coefficients, exactly reduced mod p^N."""
    ring = cfg.compact if hasattr(cfg, "compact") else cfg
    p, pN = ring.p, ring.pN
    if imax < p:
        raise ValueError("imax must be at least p")
    coeffs = []
    for i in range(imax + 1):
        # theta_i = sum over j + p k = i of (-1)^k pi^(j+k) / (j! k!)
        vec = [Fraction(0)] * (p - 1)
        for k in range(i // p + 1):
            j = i - p * k
            t = j + k
            r, q = t % (p - 1), t // (p - 1)
            c = Fraction((-1) ** k * (-p) ** q,
                         math.factorial(j) * math.factorial(k))
            vec[r] += c
        raw = ring.zero()
        for r, c in enumerate(vec):
            if c == 0:
                continue
            if c.denominator % p == 0:
                raise ArithmeticError("splitting coefficient not p-integral")
            raw[r, 0] = c.numerator * pow(c.denominator, -1, pN) % pN
        coeffs.append(raw)
    return SplittingSeries(ring, coeffs, imax)


_ZETA_CACHE: dict = {}


def zeta_embed_raw(cfg) -> np.ndarray:
    """zeta_p := theta(1) in the compact ring (raw element)."""
    ring = cfg.compact
    key = (ring.p, ring.a, ring.N)
    if key not in _ZETA_CACHE:
        p = ring.p
        imax = math.ceil(ring.N * p * p / (p - 1)) + p
        th = theta(ring, imax)
        z = ring.zero()
        for c in th.coeffs:
            z = ring.add(z, c)
        if ring.ord_pi(ring.sub(ring.pow(z, p), ring.one())) < ring.e * ring.N:
            raise AssertionError("theta(1)^p != 1")
        if ring.ord_pi(ring.sub(z, ring.one())) < 1:
            raise AssertionError("theta(1) == 1: not a primitive root")
        # zeta = 1 + pi mod pi^2
        d = ring.sub(ring.sub(z, ring.one()), ring.basis(1 % ring.e, 0)
                     if ring.e > 1 else ring.from_int(-p))
        if ring.e > 1 and ring.ord_pi(d) < 2:
            raise AssertionError("theta(1) != 1 + pi mod pi^2")
        _ZETA_CACHE[key] = z
    return _ZETA_CACHE[key]


def zeta_embed(cfg: TowerConfig) -> PadicScalar:
    """The fixed embedding zeta_p -> theta(1), as a tower scalar."""
    return cfg.to_tower(zeta_embed_raw(cfg))


def embed_cyclotomic(c: CycInt, cfg) -> np.ndarray:
    """Image of an exact cyclotomic integer under zeta -> theta(1)."""
    return _embed_cyc(cfg.compact, zeta_embed_raw(cfg), c)


# ---------------------------------------------------------------------------

@dataclass
class FrobeniusSeries:
    """Weight-truncated coefficients of the m-fold Frobenius product.

    terms maps (gamma, u) exponent pairs (or u alone, for specialized fibers)
    to raw ring elements; floors carries certified ord_p lower bounds per
    term.  Terms with floor >= cutoff are dropped: every downstream product
    through them vanishes mod p^cutoff.
    """

    ring: PadicRing
    m: int
    terms: dict
    floors: dict
    cutoff: float


def _theta_factor(th: SplittingSeries, scalar, exps, scale: int, cutoff: float):
    """Terms of theta(scalar * monomial) with exponents scaled by p^i."""
    ring = th.ring
    out = {}
    flo = {}
    j = 0
    pw = ring.one()
    while float(th.floor(j)) < cutoff and j <= th.imax:
        key = tuple(c * j * scale for c in exps)
        out[key] = ring.mul(th.coeffs[j], pw)
        flo[key] = float(th.floor(j))
        j += 1
        pw = ring.mul(pw, scalar)
    return out, flo


def _dict_product(ring, parts, cutoff: float):
    """Convolution product of exponent->coefficient dicts with floor pruning."""
    acc = {(): None}
    cur = None
    cur_f = None
    for terms, floors in parts:
        if cur is None:
            cur = dict(terms)
            cur_f = dict(floors)
            continue
        nxt: dict = {}
        nxt_f: dict = {}
        for k1, c1 in cur.items():
            f1 = cur_f[k1]
            for k2, c2 in terms.items():
                f = f1 + floors[k2]
                if f >= cutoff:
                    continue
                key = tuple(a + b for a, b in zip(k1, k2))
                prod = ring.mul(c1, c2)
                if key in nxt:
                    nxt[key] = ring.add(nxt[key], prod)
                    nxt_f[key] = min(nxt_f[key], f)
                else:
                    nxt[key] = prod
                    nxt_f[key] = f
        cur, cur_f = nxt, nxt_f
    # drop exact zeros
    keys = [k for k, v in cur.items() if not v.any()]
    for k in keys:
        del cur[k]
        del cur_f[k]
    return cur, cur_f


def frobenius_series(fam: LaurentFamily, m: int, cutoff: float,
                     ring: PadicRing, th: SplittingSeries | None = None) -> FrobeniusSeries:
    """F_m with lambda kept as a variable: keys are (gamma, u) joint tuples."""
    if th is None:
        th = theta(ring, _theta_imax(ring, cutoff))
    monos = fam.lifted_monomials(ring)
    parts = []
    for i in range(m):
        for (g, u), coeff in monos:
            sc = ring.frobenius(coeff, i % ring.a) if ring.a > 1 else coeff
            parts.append(_theta_factor(th, sc, tuple(g) + tuple(u),
                                       fam.cfg.p ** i, cutoff))
    terms, floors = _dict_product(ring, parts, cutoff)
    return FrobeniusSeries(ring, m, terms, floors, cutoff)


def fiber_frobenius_series(fam: LaurentFamily, lam_codes, d_lambda: int,
                           cutoff: float) -> FrobeniusSeries:
    """F_m specialized at the Teichmuller lift of a fiber: keys are u tuples."""
    ring = fam.cfg.fiber_ring(fam.d_t * d_lambda)
    m = fam.m0 * d_lambda
    th = theta(ring, _theta_imax(ring, cutoff))
    ext = fam.fiber_field(d_lambda)
    emb = ring.resfield.embed_from(ext)
    embq = ring.resfield.embed_from(fam.base_field)
    lam_hat = [ring.teichmuller(emb(c)) for c in lam_codes]
    parts = []
    for i in range(m):
        for (g, u), coeff_code in _fiber_coeff_codes(fam, embq):
            sc = ring.teichmuller(coeff_code)
            for gi, lh in zip(g, lam_hat):
                sc = ring.mul(sc, ring.pow(lh, gi))
            sc = ring.frobenius(sc, i % ring.a) if ring.a > 1 else sc
            parts.append(_theta_factor(th, sc, tuple(u), fam.cfg.p ** i, cutoff))
    terms, floors = _dict_product(ring, parts, cutoff)
    return FrobeniusSeries(ring, m, terms, floors, cutoff)


def _fiber_coeff_codes(fam: LaurentFamily, embq):
    out = []
    for u, tc in zip(fam.f_exps, fam.t_codes):
        out.append((((), tuple(u)), embq(tc)))
    for g, v, A in fam.P_terms:
        out.append(((tuple(g), tuple(v)), embq(A)))
    return out


def _theta_imax(ring, cutoff: float) -> int:
    p = ring.p
    return max(p, math.ceil(cutoff * p * p / (p - 1)) + 1)


# ---------------------------------------------------------------------------

_ORD_TILDE = None


def _ord_tilde(p: int) -> Fraction:
    return Fraction(p - 1, p * p)


def fiber_matrix(fam: LaurentFamily, point, W_x, cfg: TowerConfig,
                 cutoff: float | None = None) -> RingMatrix:
    """Matrix of the fiber operator psi_x^m . F_m(t-hat, lambda-hat, x).

    Unnormalized basis {x^u} over the weight-W_x slice; entry (v, u) is the
    (p^m v - u) coefficient of the specialized Frobenius series.  Row floors
    are the normalized-basis bounds.
    """
    if cutoff is None:
        cutoff = float(cfg.N)
    d_lambda = point.degree if hasattr(point, "degree") else 1
    lam_codes = point.orbit_rep if hasattr(point, "orbit_rep") else point
    fro = fiber_frobenius_series(fam, lam_codes, d_lambda, cutoff)
    ring = fro.ring
    m = fam.m0 * d_lambda
    pm = fam.cfg.p ** m
    sl = enumerate_monoid(fam.geom_x, W_x)
    npts = len(sl)
    data = np.zeros((npts, npts, ring.ea), dtype=np.int64)
    ot = _ord_tilde(fam.cfg.p)
    stored_min = np.full(npts, float(cutoff))
    for vi, (v, wv) in enumerate(sl.points):
        for ui, (u, wu) in enumerate(sl.points):
            key = tuple(pm * a - b for a, b in zip(v, u))
            raw = fro.terms.get(key)
            if raw is None:
                continue
            f = fro.floors[key] + float((wu - wv) * ot)
            if f >= cutoff:
                continue
            data[vi, ui] = raw.reshape(-1)
            stored_min[vi] = min(stored_min[vi], f)
    # two certified per-row lower bounds: the formula (p^m-1)/p^(m-1) w(v)
    # ord(pi-tilde), and the minimum tracked entry floor (absent entries are
    # >= cutoff); take the better one
    scale = float(ot * Fraction(pm - 1, fam.cfg.p ** (m - 1)))
    formula = np.array([scale * float(wv) for _, wv in sl.points])
    row_floors = np.maximum(formula, np.minimum(stored_min, float(cutoff)))
    tail = scale * float(W_x + Fraction(1, fam.geom_x.D))
    return RingMatrix(ring, data, row_floors=row_floors,
                      tail_floor=tail, prune_cutoff=cutoff,
                      labels=tuple(pt for pt, _ in sl.points))


def trace_formula_check(fam: LaurentFamily, point, m_power: int,
                        cfg: TowerConfig, W_x) -> dict:
    """(q^m - 1)^n Tr(alpha^m) against the zeta-embedded exponential sum."""
    mat = fiber_matrix(fam, point, W_x, cfg)
    ring = mat.ring
    traces = power_traces(mat, m_power)
    d_lambda = point.degree if hasattr(point, "degree") else 1
    q_fib = fam.cfg.p ** (fam.m0 * d_lambda)
    lhs = ring.mul_int(traces[m_power - 1].copy(),
                       pow(pow(q_fib, m_power, ring.pN) - 1, fam.n, ring.pN))
    s_m = exp_sum(fam, point.orbit_rep if hasattr(point, "orbit_rep") else point,
                  d_lambda, m_power)
    rhs = _embed_cyc(ring, _zeta_in_ring(cfg, ring), s_m)
    diff_ord = ring.ord_p(ring.sub(lhs, rhs))
    certified = int(min(mat.prune_cutoff, ring.N))
    return {"lhs": lhs, "rhs": rhs, "sum": s_m, "agreement_ord": diff_ord,
            "certified": certified, "ok": diff_ord >= certified}


def _zeta_in_ring(cfg, ring) -> np.ndarray:
    """theta(1) computed directly in an extension ring."""
    key = (ring.p, ring.a, ring.N)
    if key not in _ZETA_CACHE:
        class _C:
            compact = ring
        zeta_embed_raw(_C())
    return _ZETA_CACHE[key]


def fiber_l_via_dwork(fam: LaurentFamily, point, d_T: int,
                      cfg: TowerConfig, W_x) -> LSeriesReport:
    """L(t-bar, lambda-bar, T)^((-1)^(n+1)) as det(1 - alpha T)^(delta^n)."""
    mat = fiber_matrix(fam, point, W_x, cfg)
    fred = fredholm(mat, d_T)
    ring = mat.ring
    d_lambda = point.degree if hasattr(point, "degree") else 1
    q_fib = fam.cfg.p ** (fam.m0 * d_lambda)
    rep = LSeriesReport(kind="padic", series=list(fred.coeffs), d_T=d_T,
                        ring=ring, certified=list(fred.certified))
    for _ in range(fam.n):
        rep = delta_q(rep, q_fib)
    return rep


def fredholm_det(fam: LaurentFamily, point, d_T: int, cfg: TowerConfig,
                 W_x) -> FredholmSeries:
    mat = fiber_matrix(fam, point, W_x, cfg)
    return fredholm(mat, d_T)


# ---------------------------------------------------------------------------

def total_family_matrix(fam: LaurentFamily, cfg: TowerConfig,
                        cutoff: float | None = None) -> RingMatrix:
    """Dwork operator of the total family in the joint (lambda, x) variables.

    Basis: the product slice of M(Gamma) x M(f) points whose certified row
    floor stays below the cutoff; contains the joint-polytope monoid.  Its
    Fredholm determinant's unique unit root is the reference value for the
    coefficient-ratio formula.
    """
    if cutoff is None:
        cutoff = float(cfg.N)
    ring = cfg.compact
    m = fam.m0
    p = fam.cfg.p
    pm = p ** m
    fro = frobenius_series(fam, m, cutoff, ring)
    ot = _ord_tilde(p)
    scale = ot * Fraction(pm - 1, p ** (m - 1))
    wcap = Fraction(cutoff) / scale + 1
    slg = enumerate_monoid(fam.geom_gamma, wcap)
    slx = enumerate_monoid(fam.geom_x, wcap)
    basis = []
    for g, wg in slg.points:
        for u, wu in slx.points:
            if float(scale * (wg + wu)) < cutoff:
                basis.append((g, u, wg + wu))
    basis.sort(key=lambda t: (t[2], t[0], t[1]))
    npts = len(basis)
    data = np.zeros((npts, npts, ring.ea), dtype=np.int64)
    row_floors = np.array([float(scale * w) for _, _, w in basis])
    for vi, (dg, dv, wrow) in enumerate(basis):
        for ui, (g, u, wcol) in enumerate(basis):
            key = (tuple(pm * a - b for a, b in zip(dg, g)) +
                   tuple(pm * a - b for a, b in zip(dv, u)))
            raw = fro.terms.get(key)
            if raw is None:
                continue
            f = fro.floors[key] + float((wcol - wrow) * ot)
            if f >= cutoff:
                continue
            data[vi, ui] = raw.reshape(-1)
    return RingMatrix(ring, data, row_floors=row_floors, tail_floor=cutoff,
                      prune_cutoff=cutoff,
                      labels=tuple((g, u) for g, u, _ in basis))


def total_family_sum(fam: LaurentFamily, m: int) -> CycInt:
    """Brute-force exponential sum of H over the (s+n)-torus of F_(q_t^m)."""
    p = fam.cfg.p
    ext = field(p, fam.m0 * m)
    emb = ext.embed_from(fam.base_field)
    monos = []
    for u, tc in zip(fam.f_exps, fam.t_codes):
        monos.append(((0,) * fam.s + tuple(u), emb(tc)))
    for g, v, A in fam.P_terms:
        monos.append((tuple(g) + tuple(v), emb(A)))
    dim = fam.s + fam.n
    if (ext.q - 1) ** dim > 400_000:
        raise ValueError("torus too large")
    out = CycInt.zero(p)
    for xs in itertools.product(range(1, ext.q), repeat=dim):
        val = 0
        for e, c in monos:
            t = c
            for ei, xi in zip(e, xs):
                t = ext.mul(t, ext.pow(xi, ei))
            val = ext.add(val, t)
        out = out + CycInt.zeta_power(p, ext.trace_to_prime(val))
    return out
