"""Lattice polytopes at infinity, weight functions, and monoid enumeration.

Everything is exact: vertex coordinates are Fractions, weights are Fractions,
and the distinguished value INF encodes "outside the cone".  Ambient dimension
is 1 or 2 (enough for the torus factors and their product used here); higher
dimensions raise NotImplementedError.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

INF = math.inf

Point = tuple  # tuple of int/Fraction coordinates


def _as_point(u) -> tuple:
    return tuple(Fraction(c) for c in u)


def _is_zero(u) -> bool:
    return all(c == 0 for c in u)


def _primitive(v: Sequence[Fraction]) -> tuple:
    """Scale a nonzero rational vector to a primitive integer vector."""
    den = 1
    for c in v:
        den = den * c.denominator // gcd(den, c.denominator)
    w = [int(c * den) for c in v]
    g = 0
    for c in w:
        g = gcd(g, c)
    return tuple(c // g for c in w)


@dataclass(frozen=True)
class MonoidSlice:
    """All cone lattice points of weight <= weight_cap, weight-sorted.

    Ties are broken lexicographically on coordinates, so the ordering is a
    deterministic linear order refining the weight preorder.
    """

    points: tuple          # tuple of (point, weight) pairs
    weight_cap: Fraction

    def __len__(self):
        return len(self.points)

    def index_of(self, u) -> int:
        return self._index[tuple(u)]

    @property
    def _index(self):
        d = self.__dict__.get("_index_cache")
        if d is None:
            d = {tuple(pt): i for i, (pt, _) in enumerate(self.points)}
            self.__dict__["_index_cache"] = d
        return d

    def weights(self):
        return [w for _, w in self.points]


@dataclass(frozen=True)
class WeightedGeometry:
    """Newton polytope at infinity with its cone and weight function.

    facets: linear functionals (as coefficient tuples of Fractions) that are
    identically 1 on the Newton boundary at infinity; w(u) is their maximum
    (and 0 at the apex).  cone_constraints: functionals g with g <= 0 on the
    cone, coming from hull facets through the origin.
    """

    generators: tuple
    vertices: tuple
    facets: tuple              # tuples of Fractions, one per infinity-facet
    cone_constraints: tuple    # tuples of Fractions, g(u) <= 0 required
    D: int
    dim: int
    trivial: bool = False      # polytope == {0}

    def weight(self, u) -> Fraction | float:
        u = _as_point(u)
        if len(u) != self.dim:
            raise ValueError(f"point has dimension {len(u)}, expected {self.dim}")
        if self.trivial:
            return Fraction(0) if _is_zero(u) else INF
        for g in self.cone_constraints:
            if sum(gc * uc for gc, uc in zip(g, u)) > 0:
                return INF
        w = Fraction(0)
        for f in self.facets:
            val = sum(fc * uc for fc, uc in zip(f, u))
            if val > w:
                w = val
        return w

    def contains_cone(self, u) -> bool:
        return self.weight(u) is not INF and self.weight(u) != INF

    def coordinate_box(self, cap: Fraction):
        """Integer coordinate bounds of cap * polytope, per axis."""
        los, his = [], []
        for i in range(self.dim):
            coords = [v[i] for v in self.vertices] + [Fraction(0)]
            los.append(math.floor(min(coords) * cap))
            his.append(math.ceil(max(coords) * cap))
        return los, his

    def normalized_volume(self) -> int:
        """dim! times the Euclidean volume of the polytope (with 0 adjoined)."""
        if self.trivial:
            return 0
        if self.dim == 1:
            lo = min([v[0] for v in self.vertices] + [Fraction(0)])
            hi = max([v[0] for v in self.vertices] + [Fraction(0)])
            vol = hi - lo
        elif self.dim == 2:
            pts = _hull2d(list(self.vertices) + [(Fraction(0), Fraction(0))])
            vol = Fraction(0)
            for i in range(len(pts)):
                x1, y1 = pts[i]
                x2, y2 = pts[(i + 1) % len(pts)]
                vol += x1 * y2 - x2 * y1
            # shoelace gives 2*area = 2!*area
            vol = abs(vol)
        else:  # pragma: no cover
            raise NotImplementedError
        if vol.denominator != 1:
            raise ValueError("normalized volume is not integral")
        return int(vol)


def _hull2d(points):
    """Monotone-chain convex hull, exact, CCW order without repetition."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return lower[:-1] + upper[:-1]


def _on_segment(pt, a, b) -> bool:
    """Exact test: pt on the closed segment [a, b] (all collinear inputs)."""
    cross = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
    if cross != 0:
        return False
    dot = (pt[0] - a[0]) * (b[0] - a[0]) + (pt[1] - a[1]) * (b[1] - a[1])
    sq = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    return 0 <= dot <= sq


def _facet_data_1d(vertices):
    lo = min(v[0] for v in vertices)
    hi = max(v[0] for v in vertices)
    facets, cones, dens = [], [], []
    if hi > 0:
        facets.append((Fraction(1, 1) / hi,))
        dens.append(abs(Fraction(hi).numerator))
    else:
        cones.append((Fraction(1),))
    if lo < 0:
        facets.append((Fraction(1, 1) / lo,))
        dens.append(abs(Fraction(lo).numerator))
    else:
        cones.append((Fraction(-1),))
    return facets, cones, dens


def _facet_data_2d(vertices):
    """Facet functionals for a full-dimensional hull (contains 0)."""
    hull = _hull2d(vertices)
    zero = (Fraction(0), Fraction(0))
    facets, cones, dens = [], [], []
    k = len(hull)
    for i in range(k):
        a, b = hull[i], hull[(i + 1) % k]
        # edge functional n(x) with n(a) = n(b) = h; n is the inward normal
        # for CCW order, so n/h is orientation-independent
        n = (a[1] - b[1], b[0] - a[0])
        h = n[0] * a[0] + n[1] * a[1]
        if _on_segment(zero, a, b):
            # face through the origin: h == 0; the cone needs outward(u) <= 0,
            # i.e. -n(u) <= 0 with n the inward normal
            cones.append((Fraction(-n[0]), Fraction(-n[1])))
        else:
            nprim = _primitive((Fraction(n[0]), Fraction(n[1])))
            hprim = Fraction(nprim[0] * a[0] + nprim[1] * a[1])
            facets.append((Fraction(nprim[0]) / hprim, Fraction(nprim[1]) / hprim))
            dens.append(abs(hprim.numerator))
    return facets, cones, dens


def _collinear_through_zero(points) -> tuple | None:
    """If all points lie on one line through 0, return a primitive direction."""
    d = None
    for pt in points:
        if _is_zero(pt):
            continue
        if d is None:
            d = pt
        else:
            if pt[0] * d[1] - pt[1] * d[0] != 0:
                return None
    return None if d is None else _primitive(d)


def build_newton(generators: Iterable) -> WeightedGeometry:
    """Hull of generators together with 0, with its weight-function data.

    The generating set plays the role of a Laurent support; the origin is
    rejected as a generator (supports here never contain a constant term).
    """
    gens = [_as_point(u) for u in generators]
    if not gens:
        raise ValueError("empty generator set")
    dims = {len(u) for u in gens}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch among generators: {sorted(dims)}")
    dim = dims.pop()
    if all(_is_zero(u) for u in gens):
        raise ValueError("generators reduce to the origin only")
    return _build(gens, dim)


def _build(gens, dim) -> WeightedGeometry:
    nonzero = [u for u in gens if not _is_zero(u)]
    if not nonzero:
        return WeightedGeometry(tuple(gens), ((Fraction(0),) * dim,), (), (),
                                1, dim, trivial=True)
    if dim == 1:
        facets, cones, dens = _facet_data_1d(nonzero)
        verts = tuple({(min(u[0] for u in nonzero),), (max(u[0] for u in nonzero),)})
    elif dim == 2:
        d = _collinear_through_zero(nonzero)
        if d is not None:
            return _build_segment_2d(gens, nonzero, d)
        facets, cones, dens = _facet_data_2d(nonzero + [(Fraction(0), Fraction(0))])
        verts = tuple(_hull2d(nonzero + [(Fraction(0), Fraction(0))]))
    else:
        raise NotImplementedError(f"ambient dimension {dim} not supported")
    D = 1
    for den in dens:
        D = D * den // gcd(D, den)
    geom = WeightedGeometry(tuple(gens), verts, tuple(facets), tuple(cones),
                            D, dim)
    # sanity: generators lie in the cone
    for u in gens:
        if geom.weight(u) == INF:
            raise ValueError(f"generator {u} outside its own cone")
    return geom


def _build_segment_2d(gens, nonzero, d) -> WeightedGeometry:
    """Degenerate 2-d case: hull is a segment on a line through 0."""
    # parameterize points as t*d; weight of t*d is t/t_max (or |t/t_min|)
    def param(u):
        return u[0] / d[0] if d[0] != 0 else u[1] / d[1]

    ts = [param(u) for u in nonzero]
    lo, hi = min(ts + [Fraction(0)]), max(ts + [Fraction(0)])
    facets, dens = [], []
    dd = sum(c * c for c in d)
    if hi > 0:
        # functional u -> param(u)/hi realized as <d,u>/(dd*hi)
        facets.append(tuple(Fraction(c, 1) / (dd * hi) for c in d))
        dens.append(abs(Fraction(hi).numerator))
    if lo < 0:
        facets.append(tuple(Fraction(c, 1) / (dd * lo) for c in d))
        dens.append(abs(Fraction(lo).numerator))
    # cone constraints: u must be on the line (+-g both ways), and on the
    # correct side(s)
    perp = (Fraction(-d[1]), Fraction(d[0]))
    cones = [perp, tuple(-c for c in perp)]
    if hi <= 0:
        cones.append(tuple(Fraction(c) for c in d))
    if lo >= 0:
        cones.append(tuple(Fraction(-c) for c in d))
    D = 1
    for den in dens:
        D = D * den // gcd(D, den)
    verts = tuple({tuple(lo * Fraction(c) for c in d), tuple(hi * Fraction(c) for c in d)})
    return WeightedGeometry(tuple(gens), verts, tuple(facets), tuple(cones), D, 2)


def weight(geom: WeightedGeometry, u) -> Fraction | float:
    """w(u): the smallest c >= 0 with u in c*polytope; INF outside the cone."""
    return geom.weight(u)


def relative_polytope(suppP: Iterable, geomF: WeightedGeometry) -> WeightedGeometry:
    """Polytope of the rescaled deformation exponents gamma/(1 - w(v)).

    suppP entries are (gamma, v) pairs; every v must satisfy 0 < w(v) < 1.
    """
    supp = [( _as_point(g), _as_point(v)) for g, v in suppP]
    if not supp:
        return WeightedGeometry((), ((Fraction(0),),), (), (), 1, 1, trivial=True)
    sdim = len(supp[0][0])
    rescaled = []
    wvs = []
    for g, v in supp:
        wv = geomF.weight(v)
        if wv == INF or not (0 < wv < 1):
            raise ValueError(
                f"deformation monomial with x-exponent {v} has weight {wv}; "
                "lower deformations need 0 < w(v) < 1")
        rescaled.append(tuple(c / (1 - wv) for c in g))
        wvs.append(wv)
    geom = _build(rescaled, sdim)
    # each original lambda-exponent gamma = (1 - w(v)) * delta satisfies
    # w_Gamma(gamma) <= 1 - w(v) < 1, the decay the deformation terms need
    for (g, v), wv in zip(supp, wvs):
        wg = geom.weight(g)
        if not wg <= 1 - wv:
            raise AssertionError(
                f"lambda-exponent {g} has relative weight {wg} > 1 - w({v})")
    return geom


def enumerate_monoid(geom: WeightedGeometry, weight_cap) -> MonoidSlice:
    """All cone lattice points of weight <= weight_cap, weight-sorted."""
    cap = Fraction(weight_cap)
    if cap < 0:
        raise ValueError("weight_cap must be >= 0")
    if geom.trivial or cap == 0:
        return MonoidSlice((( (0,) * geom.dim, Fraction(0)),), cap)
    los, his = geom.coordinate_box(cap)
    found = []
    for coords in itertools.product(*[range(lo, hi + 1) for lo, hi in zip(los, his)]):
        w = geom.weight(coords)
        if w is not INF and w != INF and w <= cap:
            found.append((coords, w))
    found.sort(key=lambda t: (t[1], t[0]))
    return MonoidSlice(tuple(found), cap)
