"""Brute-force exponential sums, exact L-series, and unit-root extraction.

Everything on the counting side is exact: sums are cyclotomic integers,
L-series coefficients are cyclotomic rationals whose integrality is
asserted, and recurrence recovery runs over Q(zeta_p).  p-adic conversion
happens only at unit-root extraction.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field as dfield
from fractions import Fraction

import numpy as np

from .cyclo import CycInt, CycRat
from .family import LaurentFamily
from .ffield import FqField, closed_points, field
from .padic import KappaExponent, PadicRing, PadicScalar, TowerConfig, one_unit_power

# largest field we are willing to enumerate exhaustively
ENUM_LIMIT = 2_000_000


@dataclass
class LSeriesReport:
    """A T-series with optional recovered rational function and unit root."""

    kind: str                       # "cyclotomic" or "padic"
    series: list                    # CycRat coefficients, or raw ring elements
    d_T: int
    ring: PadicRing | None = None
    recovered: tuple | None = None  # (numerator, denominator) as CycInt lists
    unit_root: tuple | None = None  # (raw element, certified digits)
    newton_polygon: list | None = None
    power_sums: list | None = None  # exact log-derivative data, when available
    certified: list | None = None   # per-coefficient digits for padic kind
    slope_gap: Fraction | None = None


def exp_sum(fam: LaurentFamily, lam_codes, d_lambda: int, m: int) -> CycInt:
    """S_m at the fiber lambda-bar: the exact sum over the m-step torus."""
    p = fam.cfg.p
    ext = field(p, fam.m0 * d_lambda * m)
    fiber = fam.fiber_field(d_lambda)
    emb = ext.embed_from(fiber)
    lam_up = tuple(emb(c) for c in lam_codes)
    monomials = fam.fiber_monomials(lam_up, ext)
    if fam.n == 1:
        if ext.q > ENUM_LIMIT:
            raise ValueError(f"field of size {ext.q} too large to enumerate")
        counts = ext.torus1_trace_counts([(u[0], c) for u, c in monomials])
        out = CycInt.zero(p)
        for r, cnt in enumerate(counts):
            if cnt:
                out = out + int(cnt) * CycInt.zeta_power(p, r)
        return out
    # small-torus fallback for n >= 2
    if (ext.q - 1) ** fam.n > 400_000:
        raise ValueError("torus too large for the generic enumerator")
    out = CycInt.zero(p)
    for xs in itertools.product(range(1, ext.q), repeat=fam.n):
        val = 0
        for u, c in monomials:
            t = c
            for ui, xi in zip(u, xs):
                t = ext.mul(t, ext.pow(xi, ui))
            val = ext.add(val, t)
        out = out + CycInt.zeta_power(p, ext.trace_to_prime(val))
    return out


def l_series(sums: list[CycInt], d_T: int) -> LSeriesReport:
    """exp(sum S_m T^m / m) with exact coefficients, integrality enforced."""
    if len(sums) < d_T:
        raise ValueError("need at least d_T sums")
    p = sums[0].p
    coeffs = [CycRat.one(p)]
    for k in range(1, d_T + 1):
        acc = CycRat.zero(p)
        for m in range(1, k + 1):
            acc = acc + sums[m - 1].to_rat() * coeffs[k - m]
        coeffs.append(acc * Fraction(1, k))
    for k, c in enumerate(coeffs):
        if not c.is_integral():
            raise ArithmeticError(
                f"L-series coefficient {k} is not a cyclotomic integer: {c}")
    return LSeriesReport(kind="cyclotomic", series=coeffs, d_T=d_T)


def _cyc_solve(rows, rhs, p):
    """Solve a square CycRat system by Gaussian elimination; None if singular."""
    n = len(rows)
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not M[r][col].is_zero()), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inv()
        M[col] = [c * inv for c in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                f = M[r][col]
                M[r] = [c - f * d for c, d in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def rational_recover(report: LSeriesReport, max_degree: int) -> LSeriesReport:
    """Minimal linear recurrence of the coefficients over Q(zeta_p).

    Finds numerator/denominator of degree <= max_degree whose expansion
    round-trips the series; needs the series through degree 2*max_degree + 1.
    """
    a = report.series
    if len(a) - 1 < 2 * max_degree + 1:
        raise ValueError("series too short for this degree bound")
    p = a[0].p
    top = len(a) - 1
    for d in range(0, max_degree + 1):
        if d == 0:
            den = [CycRat.one(p)]
            cand_ok = all(a[k].is_zero() for k in range(max_degree + 1, top + 1))
            if not cand_ok:
                continue
        else:
            rows = [[a[k - i] for i in range(1, d + 1)]
                    for k in range(max_degree + 1, max_degree + d + 1)]
            rhs = [-a[k] for k in range(max_degree + 1, max_degree + d + 1)]
            sol = _cyc_solve(rows, rhs, p)
            if sol is None:
                continue
            den = [CycRat.one(p)] + sol
            ok = True
            for k in range(max_degree + 1, top + 1):
                acc = a[k]
                for i in range(1, d + 1):
                    if k - i >= 0:
                        acc = acc + den[i] * a[k - i]
                if not acc.is_zero():
                    ok = False
                    break
            if not ok:
                continue
        # numerator = den * series, truncated; must vanish above max_degree
        num = []
        for k in range(0, top + 1):
            acc = CycRat.zero(p)
            for i in range(0, min(k, len(den) - 1) + 1):
                acc = acc + den[i] * a[k - i]
            num.append(acc)
        if any(not c.is_zero() for c in num[max_degree + 1:]):
            continue
        num = num[: max_degree + 1]
        while len(num) > 1 and num[-1].is_zero():
            num.pop()
        den_trim = list(den)
        while len(den_trim) > 1 and den_trim[-1].is_zero():
            den_trim.pop()
        report.recovered = ([c.to_int() for c in num], [c.to_int() for c in den_trim])
        return report
    raise ValueError("insufficient degree bound: no recurrence of order "
                     f"<= {max_degree} found")


def poly_from_sums(sums: list[CycInt], degree: int) -> list[CycInt]:
    """The L-polynomial of known degree from its first `degree` sums.

    Truncates exp(sum S_m T^m/m) at T^degree; valid when the L-function is a
    polynomial of exactly that degree (toric degree bound, nondegenerate
    case).  Integrality of the coefficients is asserted.
    """
    rep = l_series(sums[:degree], degree)
    return [c.to_int() for c in rep.series]


def _poly_eval(ring: PadicRing, coeffs, x):
    acc = ring.zero()
    for c in reversed(coeffs):
        acc = ring.add(ring.mul(acc, x), c)
    return acc


def unit_root(report: LSeriesReport, cfg: TowerConfig) -> PadicScalar:
    """Hensel-lift the unique unit reciprocal root of the recovered polynomial."""
    from .dworkop import zeta_embed_raw  # local import; dworkop owns theta

    if report.recovered is None:
        raise ValueError("recovered polynomial required")
    num, den = report.recovered
    ring = cfg.compact
    emb = functools.partial(_embed_cyc, ring, zeta_embed_raw(cfg))
    bnum = [emb(c) for c in num]
    bden = [emb(c) for c in den]
    for j, b in enumerate(bden[1:], start=1):
        if ring.ord_pi(b) == 0:
            raise ValueError("denominator carries a unit root; ambiguous fiber")
    raw, cert = _hensel_unit_root(ring, bnum)
    report.unit_root = (raw, cert)
    report.newton_polygon = _poly_newton(ring, bnum)
    return PadicScalar(ring, raw)


def _embed_cyc(ring: PadicRing, zeta_raw, c: CycInt):
    acc = ring.zero()
    pw = ring.one()
    for coeff in c.coeffs:
        if coeff:
            acc = ring.add(acc, ring.mul_int(pw, coeff))
        pw = ring.mul(pw, zeta_raw)
    return acc


def _poly_newton(ring: PadicRing, coeffs):
    pts = []
    for j, c in enumerate(coeffs):
        o = ring.ord_p(c)
        pts.append((j, o))
    return pts


def _hensel_unit_root(ring: PadicRing, coeffs):
    """Unique slope-0 reciprocal root of sum coeffs[j] T^j, coeffs[0] = 1."""
    if ring.ord_pi(ring.sub(coeffs[0], ring.one())) < ring.e * ring.N:
        raise ValueError("constant term is not 1")
    if len(coeffs) < 2 or ring.ord_pi(coeffs[1]) != 0:
        raise ValueError("no unit reciprocal root (T-coefficient not a unit)")
    for j, c in enumerate(coeffs[2:], start=2):
        if ring.ord_pi(c) == 0:
            raise ValueError("multiple unit reciprocal roots; degenerate fiber")
    t = ring.one()
    for _ in range(ring.N.bit_length() + 2):
        val = _poly_eval(ring, coeffs, t)
        dcoeffs = [ring.mul_int(c, j) for j, c in enumerate(coeffs)][1:]
        dval = _poly_eval(ring, dcoeffs, t)
        t = ring.sub(t, ring.mul(val, ring.inv(dval)))
    root = ring.inv(t)
    if ring.ord_pi(ring.sub(root, ring.one())) < 1:
        raise ValueError("unit root is not a 1-unit")
    return root, ring.N


class _RingEmbed:
    """Unramified-part ring embeddings Z_{p^j}[pi] -> Z_{p^k}[pi], cached."""

    _cache: dict = {}

    @classmethod
    def get(cls, src: PadicRing, dst: PadicRing):
        key = (src.p, src.a, src.N, dst.a, dst.N)
        if key in cls._cache:
            return cls._cache[key]
        if src.a == dst.a:
            fn = lambda x: x
            cls._cache[key] = fn
            return fn
        if dst.a % src.a or src.e != dst.e or src.p != dst.p:
            raise ValueError("incompatible rings")
        femb = dst.resfield.embed_from(src.resfield)
        # image of src's unramified generator: Teichmuller-compatible root of
        # src.minpoly in dst, found by Hensel from the residue image
        gbar = src.resfield.code([0, 1]) if src.a > 1 else None
        images = []
        if src.a == 1:
            basis_img = [dst.one()]
        else:
            z = dst.zero()
            z[0] = np.array(dst.resfield.coords(femb(gbar)), dtype=np.int64)
            for _ in range(max(4, dst.N.bit_length() + 2)):
                f = dst.zero()
                fp = dst.zero()
                for c in reversed(src.minpoly):
                    fp = dst.add(dst.mul(fp, z), f)
                    f = dst.add(dst.mul(f, z), dst.from_int(c))
                z = dst.sub(z, dst.mul(f, dst.inv(fp)))
            basis_img = [dst.one()]
            acc = z
            for _ in range(src.a - 1):
                basis_img.append(acc)
                acc = dst.mul(acc, z)

        def fn(x):
            out = dst.zero()
            for i in range(src.e):
                for j in range(src.a):
                    c = int(x[i, j])
                    if c:
                        out = dst.add(out, dst.mul_int(
                            dst.mul_pi_power(basis_img[j], i), c))
            return out

        cls._cache[key] = fn
        return fn


def fiber_unit_root(fam: LaurentFamily, point, cfg: TowerConfig,
                    full_recovery: bool | None = None):
    """pi_0 at a closed fiber, from brute-force sums.

    Uses full recurrence recovery (2*deg+1 sums) when the fields stay
    enumerable, else the polynomial-mode reconstruction from deg sums under
    the toric degree bound, with one surplus-sum consistency check when
    affordable.  Returns (raw root in the fiber ring, certified digits,
    report).
    """
    d = point.degree
    deg_bound = fam.degree_bound()
    k_base = fam.m0 * d
    p = fam.cfg.p
    if full_recovery is None:
        full_recovery = p ** (k_base * (2 * deg_bound + 1)) <= ENUM_LIMIT
    nsums = 2 * deg_bound + 1 if full_recovery else deg_bound
    sums = [exp_sum(fam, point.orbit_rep, d, m) for m in range(1, nsums + 1)]
    sign = (-1) ** (fam.n + 1)
    if sign == -1:
        raise NotImplementedError("odd-n inversion not needed at desk scale")
    if full_recovery:
        rep = l_series(sums, nsums)
        rep = rational_recover(rep, deg_bound)
    else:
        if not fam.vertex_nondegenerate():
            raise ValueError(
                "cannot certify the polynomial degree bound for this fiber; "
                "enumeration limits prevent full recovery")
        coeffs = poly_from_sums(sums, deg_bound)
        # surplus-sum check when one more field is enumerable
        if p ** (k_base * (deg_bound + 1)) <= ENUM_LIMIT:
            extra = exp_sum(fam, point.orbit_rep, d, deg_bound + 1)
            srep = _poly_log_sums(coeffs, deg_bound + 1)
            if srep[deg_bound] != extra:
                raise ArithmeticError("surplus sum contradicts the degree bound")
        rep = LSeriesReport(kind="cyclotomic",
                            series=[c.to_rat() for c in coeffs], d_T=deg_bound,
                            recovered=(coeffs, [CycInt.from_int(p, 1)]))
    cfg_fiber = _fiber_cfg(fam, d, cfg)
    root_scalar = unit_root(rep, cfg_fiber)
    return rep.unit_root[0], rep.unit_root[1], rep


def _poly_log_sums(coeffs: list[CycInt], upto: int) -> list[CycInt]:
    """The log coefficients S_m of a polynomial P = exp(sum S_m T^m / m).

    These are minus the power sums of the reciprocal roots; the division-free
    Newton recursion computes the power sums, exactly.
    """
    p = coeffs[0].p
    c = [x.to_rat() for x in coeffs] + [CycRat.zero(p)] * max(0, upto + 1 - len(coeffs))
    s = []
    for m in range(1, upto + 1):
        acc = c[m] * Fraction(-m)
        for i in range(1, m):
            acc = acc - c[i] * s[m - i - 1]
        s.append(acc)
    return [(-x).to_int() for x in s]


class _FiberCfg:
    """Minimal TowerConfig stand-in whose compact ring has a larger residue field."""

    def __init__(self, cfg: TowerConfig, ring: PadicRing):
        self.base = cfg
        self.compact = ring
        self.p, self.N, self.M = cfg.p, cfg.N, cfg.M


def _fiber_cfg(fam: LaurentFamily, d: int, cfg: TowerConfig):
    if d == 1:
        return cfg
    return _FiberCfg(cfg, fam.cfg.fiber_ring(fam.d_t * d))


def unit_l_function(fam: LaurentFamily, kappa: KappaExponent, d_T: int,
                    cfg: TowerConfig, max_fiber_degree: int | None = None) -> LSeriesReport:
    """The unit-root L-function at the fiber t-bar, to T-degree d_T.

    Euler product over closed points of degree <= max_fiber_degree (default
    d_T) of (1 - pi_0^kappa T^deg)^(-1), with pi_0^kappa by the binomial
    series in each fiber's ring.  Also records the exact log power sums.
    """
    if d_T < 1:
        raise ValueError("d_T must be >= 1")
    maxdeg = max_fiber_degree or d_T
    base = field(fam.cfg.p, fam.m0)
    pts = closed_points(base, fam.s, maxdeg) if fam.s >= 1 else \
        [type("P", (), {"orbit_rep": (), "degree": 1})()]
    lcm = 1
    for dd in range(1, maxdeg + 1):
        lcm = lcm * dd // math.gcd(lcm, dd)
    big = fam.cfg.fiber_ring(fam.d_t * lcm)
    series = [big.one()] + [big.zero() for _ in range(d_T)]
    psums = [big.zero() for _ in range(d_T + 1)]
    # certified spectral gap: non-unit reciprocal roots of every fiber
    # polynomial have ord >= the smallest positive polytope weight (the toric
    # Hodge lower bound), so all non-unit zeros/poles of the unit-root
    # L-function sit at ord >= that weight
    from .geometry import enumerate_monoid
    wmin = None
    for ptw, w in enumerate_monoid(fam.geom_x, Fraction(1)).points:
        if w > 0:
            wmin = w if wmin is None else min(wmin, w)
    min_gap = wmin
    roots_by_deg: dict[int, list] = {}
    for pt in pts:
        raw, cert, rep = fiber_unit_root(fam, pt, cfg)
        src = _fiber_cfg(fam, pt.degree, cfg).compact
        rk = one_unit_power(PadicScalar(src, raw), kappa, fam.cfg, prec_check=False)
        emb = _RingEmbed.get(src, big)
        roots_by_deg.setdefault(pt.degree, []).append(emb(rk.coeffs))
        gap = _min_positive_slope(src, rep)
        if gap is not None and gap < min_gap:
            raise ArithmeticError(
                "fiber Newton slope below the polytope Hodge bound")
    # assemble Euler product and power sums
    for dd, roots in sorted(roots_by_deg.items()):
        for rr in roots:
            # multiply series by (1 - rr T^dd)^(-1) = sum rr^k T^(dd k)
            newser = [big.zero() for _ in range(d_T + 1)]
            powr = big.one()
            for k in range(0, d_T // dd + 1):
                for j in range(0, d_T + 1 - dd * k):
                    if not series[j].any() and j > 0:
                        continue
                    newser[j + dd * k] = big.add(newser[j + dd * k],
                                                 big.mul(powr, series[j]))
                powr = big.mul(powr, rr)
            series = newser
            for m in range(1, d_T + 1):
                if m % dd == 0:
                    psums[m] = big.add(psums[m], big.mul_int(
                        big.pow(rr, m // dd), dd))
    return LSeriesReport(kind="padic", series=series, d_T=d_T, ring=big,
                         power_sums=psums[1:], certified=[big.N] * (d_T + 1),
                         slope_gap=min_gap)


def _min_positive_slope(ring: PadicRing, rep: LSeriesReport) -> Fraction | None:
    """Smallest positive Newton slope of a recovered fiber polynomial."""
    if rep.newton_polygon is None:
        return None
    pts = [(j, o) for j, o in rep.newton_polygon if o < ring.N]
    best = None
    for j, o in pts:
        if j >= 2 and o > 0:
            slope = Fraction(o) / (j - 1)
            best = slope if best is None else min(best, slope)
    return best


def delta_q(report: LSeriesReport, q: int) -> LSeriesReport:
    """g(T) -> g(T)/g(qT), coefficientwise to the same degree."""
    if report.kind == "cyclotomic":
        g = report.series
        p = g[0].p
        if g[0].is_zero():
            raise ValueError("constant term must be invertible")
        inv0 = g[0].inv()
        qg = [c * (Fraction(q) ** j) for j, c in enumerate(g)]
        res = []
        for k in range(len(g)):
            acc = g[k]
            for i in range(1, k + 1):
                acc = acc - qg[i] * res[k - i]
            res.append(acc * inv0)
        return LSeriesReport(kind="cyclotomic", series=res, d_T=report.d_T)
    ring = report.ring
    g = report.series
    if not ring.is_unit(g[0]):
        raise ValueError("constant term must be a unit")
    inv0 = ring.inv(g[0])
    res = []
    cert = []
    run_cert = None
    for k in range(len(g)):
        acc = g[k]
        for i in range(1, k + 1):
            qgi = ring.mul_int(g[i], pow(q, i, ring.pN))
            acc = ring.sub(acc, ring.mul(qgi, res[k - i]))
        res.append(ring.mul(acc, inv0))
        if report.certified is not None:
            c = report.certified[k]
            run_cert = c if run_cert is None else min(run_cert, c)
            cert.append(run_cert)
    return LSeriesReport(kind="padic", series=res, d_T=report.d_T, ring=ring,
                         certified=cert or None, power_sums=None,
                         slope_gap=report.slope_gap)


def series_unit_root(report: LSeriesReport, cfg: TowerConfig,
                     q_correction: int | None = None):
    """Unit root of a truncated series by stabilized power-sum ratios.

    Uses the exact log power sums when the report carries them (Euler-product
    reports), else derives them from the coefficients by the division-free
    Newton recursion.  Certified digits: floor((m-1) * slope gap), the gap
    being the report's recorded fiber-slope bound or the polygon's second
    slope; never more than the ring precision.
    """
    ring = report.ring
    if ring is None:
        raise ValueError("padic series required")
    if report.power_sums is not None:
        s = report.power_sums
        qc = q_correction
    else:
        # division-free Newton recursion: s_m = -m c_m - sum c_i s_(m-i)
        c = report.series
        s = []
        for m in range(1, len(c)):
            acc = ring.mul_int(c[m], -m)
            for i in range(1, m):
                acc = ring.sub(acc, ring.mul(c[i], s[m - i - 1]))
            s.append(acc)
        qc = None
    m = len(s)
    if m < 2:
        raise ValueError("increase d_T: need at least two power sums")
    num, den = s[m - 1], s[m - 2]
    if not ring.is_unit(den):
        raise ValueError("increase d_T: slope-0 segment not separated yet")
    ratio = ring.mul(num, ring.inv(den))
    m = m - 1  # the ratio uses sums m and m+1 with this m
    if qc is not None:
        # log sums of the Euler product are (q^m - 1)^s (u^m + ...): correct
        # the ratio by ((q^m - 1)/(q^(m+1) - 1))^s
        q, s_dim = qc
        corr = (pow(q, m, ring.pN) - 1) % ring.pN
        corr2 = (pow(q, m + 1, ring.pN) - 1) % ring.pN
        fac = pow(corr * pow(corr2, -1, ring.pN), s_dim, ring.pN)
        ratio = ring.mul_int(ratio, fac)
    gap = report.slope_gap
    if gap is None:
        gap = _series_second_slope(ring, report)
    certified = 0 if gap is None else int(math.floor(m * float(gap)))
    certified = max(0, min(certified, ring.N))
    if ring.ord_pi(ring.sub(ratio, ring.one())) < 1:
        raise ValueError("extracted root is not a 1-unit")
    return ratio, certified


def _series_second_slope(ring: PadicRing, report: LSeriesReport) -> Fraction | None:
    ords = []
    for j, c in enumerate(report.series):
        o = ring.ord_p(c)
        ords.append((j, o))
    best = None
    for j, o in ords:
        if j >= 2 and o > 0:
            slope = Fraction(o) / (j - 1)
            best = slope if best is None else min(best, slope)
    if best is not None and best > 0:
        return best
    return None
