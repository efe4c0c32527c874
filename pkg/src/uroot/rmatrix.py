"""Dense matrices over a PadicRing, with certified-precision Fredholm data.

A matrix is stored as an (n, n, e*a) int64 array of ring coordinates.
Products decompose into coordinate-slice matmuls through the ring's
structure constants; slices are small enough mod p^N that float64 BLAS
multiplies them exactly (values < p^N, accumulations << 2^53).

row_floors are certified lower bounds for ord_p of the rows in the
weight-normalized basis; they justify truncations: any trace or principal
minor monomial through a row of floor >= c vanishes mod p^c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .padic import PadicRing, PrecisionError


def _struct_constants(ring: PadicRing):
    """(b1, b2) -> list of (b3, coeff) for products of coordinate basis elements."""
    table = {}
    e, a = ring.e, ring.a
    for i1 in range(e):
        for j1 in range(a):
            prod_row = []
            for i2 in range(e):
                for j2 in range(a):
                    z = ring.mul(ring.basis(i1, j1), ring.basis(i2, j2))
                    outs = [(int(i3) * a + int(j3), int(z[i3, j3]))
                            for i3, j3 in np.argwhere(z)]
                    prod_row.append(outs)
            table[i1 * a + j1] = prod_row
    return table


_STRUCT_CACHE: dict = {}


def struct_constants(ring: PadicRing):
    key = (ring.p, ring.a, ring.e, ring.N, ring.minpoly)
    if key not in _STRUCT_CACHE:
        _STRUCT_CACHE[key] = _struct_constants(ring)
    return _STRUCT_CACHE[key]


@dataclass
class RingMatrix:
    """Square matrix over a PadicRing with valuation bookkeeping.

    row_floors[i]: certified lower bound (ord_p, as float rounded down) for
    every entry of row i in the normalized basis.  tail_floor: the same bound
    for all rows excluded by the basis truncation.  prune_cutoff: entries
    with certified floor >= cutoff may have been zeroed; all derived traces
    and determinant coefficients are then valid mod p^cutoff only.
    """

    ring: PadicRing
    data: np.ndarray                      # (n, n, ea) int64
    row_floors: np.ndarray                # (n,) float64
    tail_floor: float = math.inf
    prune_cutoff: float = math.inf
    labels: tuple = ()                    # basis labels, for reports

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.data[i, j].reshape(self.ring.e, self.ring.a)

    def matmul(self, other: "RingMatrix") -> "RingMatrix":
        out = _slice_matmul(self.ring, self.data, other.data)
        return RingMatrix(self.ring, out,
                          row_floors=self.row_floors,
                          tail_floor=min(self.tail_floor, other.tail_floor),
                          prune_cutoff=min(self.prune_cutoff, other.prune_cutoff),
                          labels=self.labels)

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        """vec: (n, ea) -> (n, ea)."""
        return _slice_matmul(self.ring, self.data, vec[None, :, :],
                             vec_mode=True)

    def trace(self) -> np.ndarray:
        t = self.data.trace(axis1=0, axis2=1) % self.ring.pN
        return t.reshape(self.ring.e, self.ring.a)

    def trace_of_product(self, other: "RingMatrix") -> np.ndarray:
        """Tr(self @ other) without forming the product."""
        ring = self.ring
        table = struct_constants(ring)
        ea = ring.ea
        acc = np.zeros(ea, dtype=np.int64)
        for b1 in range(ea):
            A = self.data[:, :, b1]
            if not A.any():
                continue
            row = table[b1]
            for b2 in range(ea):
                B = other.data[:, :, b2]
                if not row[b2] or not B.any():
                    continue
                s = int(np.einsum('ij,ji->', A, B, dtype=np.int64) % ring.pN)
                if s:
                    for b3, coeff in row[b2]:
                        acc[b3] = (acc[b3] + coeff * s) % ring.pN
        return acc.reshape(ring.e, ring.a)


def _slice_matmul(ring: PadicRing, A: np.ndarray, B: np.ndarray,
                  vec_mode: bool = False) -> np.ndarray:
    """Coordinate-slice matrix product; exact mod p^N via float64 BLAS."""
    table = struct_constants(ring)
    ea = ring.ea
    pN = ring.pN
    if vec_mode:
        n = A.shape[0]
        out = np.zeros((n, ea), dtype=np.int64)
    else:
        n = A.shape[0]
        out = np.zeros((n, B.shape[1], ea), dtype=np.int64)
    # guard: float64 exactness needs pN^2 * n < 2^53
    if float(pN) * pN * max(n, 1) >= 2 ** 52:
        raise PrecisionError("matrix too large for exact float64 products")
    for b1 in range(ea):
        Af = A[:, :, b1]
        if not Af.any():
            continue
        Afl = Af.astype(np.float64)
        row = table[b1]
        for b2 in range(ea):
            outs = row[b2]
            if not outs:
                continue
            if vec_mode:
                Bf = B[0, :, b2]
                if not Bf.any():
                    continue
                prod = (Afl @ Bf.astype(np.float64))
            else:
                Bf = B[:, :, b2]
                if not Bf.any():
                    continue
                prod = (Afl @ Bf.astype(np.float64))
            prod = np.asarray(prod % pN, dtype=np.int64)
            for b3, coeff in outs:
                if vec_mode:
                    out[:, b3] = (out[:, b3] + coeff * prod) % pN
                else:
                    out[:, :, b3] = (out[:, :, b3] + coeff * prod) % pN
    return out


@dataclass
class FredholmSeries:
    """Truncated characteristic series det(1 - M T) with certified precision.

    coeffs[j] is the T^j coefficient as a raw ring element; certified[j] is
    the number of p-adic digits it is good for (Newton-identity divisions and
    entry pruning included).  floor_partial[j] is a certified lower bound for
    ord_p of the true coefficient (sums of the j smallest row floors), also
    valid for every truncated coefficient beyond the computed range.
    """

    ring: PadicRing
    coeffs: list
    certified: list
    floor_partial: list
    tail_floor: float

    def ords(self):
        out = []
        for c, cert in zip(self.coeffs, self.certified):
            o = self.ring.ord_p(c)
            out.append(min(o, Fraction(cert)))
        return out

    def newton_polygon(self):
        """Vertices (j, ord) of the lower hull of the coefficient valuations."""
        pts = [(0, Fraction(0))]
        for j, c in enumerate(self.coeffs[1:], start=1):
            o = self.ring.ord_p(c)
            pts.append((j, min(o, Fraction(self.certified[j]))))
        hull = [pts[0]]
        rest = pts[1:]
        while rest:
            best = None
            for idx, (j, o) in enumerate(rest):
                slope = (o - hull[-1][1]) / (j - hull[-1][0])
                if best is None or slope < best[0]:
                    best = (slope, idx)
            hull.append(rest[best[1]])
            rest = rest[best[1] + 1:]
        return hull

    def unit_slope_count(self) -> int:
        """Length of the slope-0 initial segment of the Newton polygon."""
        hull = self.newton_polygon()
        if len(hull) < 2:
            return 0
        (j0, o0), (j1, o1) = hull[0], hull[1]
        return j1 - j0 if o1 == o0 else 0


def power_traces(M: RingMatrix, kmax: int):
    """Traces of M^1..M^kmax via a squaring chain."""
    ring = M.ring
    traces = [None] * (kmax + 1)
    powers = {1: M}

    def get_power(k):
        if k in powers:
            return powers[k]
        half = 1 << (k.bit_length() - 1)
        if half == k:
            p2 = get_power(k // 2)
            powers[k] = p2.matmul(p2)
        else:
            powers[k] = get_power(half).matmul(get_power(k - half))
        return powers[k]

    for k in range(1, kmax + 1):
        if k == 1:
            traces[k] = M.trace()
        else:
            traces[k] = get_power(k // 2).trace_of_product(get_power(k - k // 2))
    return traces[1:]


def fredholm(M: RingMatrix, d_T: int) -> FredholmSeries:
    """det(1 - M T) through degree d_T by Newton's identities on traces."""
    ring = M.ring
    p = ring.p
    base_digits = int(min(ring.N, M.prune_cutoff))
    tr = power_traces(M, d_T)
    coeffs = [ring.one()]
    certified = [ring.N]
    es = [ring.one()]
    cert_e = [ring.N]
    for j in range(1, d_T + 1):
        acc = ring.zero()
        cert = base_digits
        for i in range(1, j + 1):
            term = ring.mul(es[j - i], tr[i - 1])
            cert = min(cert, cert_e[j - i], base_digits)
            if i % 2 == 1:
                acc = ring.add(acc, term)
            else:
                acc = ring.sub(acc, term)
        v = 0
        jj = j
        while jj % p == 0:
            jj //= p
            v += 1
        if v:
            # the true numerator j*e_j is divisible by p^v and agrees with acc
            # through at least v digits, so the stored value divides exactly
            acc = ring.divexact_p(acc, v)
            cert -= v
        if jj != 1:
            acc = ring.mul_int(acc, pow(jj, -1, ring.pN))
        ej = acc
        es.append(ej)
        cert_e.append(cert)
        coeffs.append(ring.neg(ej) if j % 2 else ej)
        certified.append(cert)
    # partial sums of sorted row floors: certified floor of coefficient j
    extra = np.array([M.tail_floor]) if M.tail_floor < math.inf else np.array([])
    floors = np.sort(np.concatenate([np.asarray(M.row_floors, dtype=float), extra]))
    partial = [0.0]
    run = 0.0
    for j in range(1, d_T + 2):
        if j - 1 < len(floors):
            run += float(floors[j - 1])
        else:
            run = math.inf
        partial.append(run)
    return FredholmSeries(ring, coeffs, certified, partial,
                          tail_floor=min(M.tail_floor, M.prune_cutoff))


def unit_eigenvalue_ratio(M: RingMatrix, steps: int = 18):
    """The unique unit eigenvalue via Tr(M^(m+1))/Tr(M^m).

    Requires a unique slope-0 eigenvalue, certified by the row floors: all
    other eigenvalues of the truncated matrix have ord >= gap, the smallest
    positive row floor, because the characteristic coefficients c_j have
    ord >= sum of the j smallest row floors.  Certified digits:
    min(N, prune_cutoff, floor(steps * gap), tail).
    """
    ring = M.ring
    pos = np.sort(M.row_floors[M.row_floors > 1e-12])
    if len(pos) == 0 or (M.row_floors <= 1e-12).sum() != 1:
        raise ValueError("row floors do not certify a unique unit eigenvalue")
    gap = float(pos[0])
    powers = {1: M}

    def get_power(k):
        if k in powers:
            return powers[k]
        half = 1 << (k.bit_length() - 1)
        if half == k:
            p2 = get_power(k // 2)
            powers[k] = p2.matmul(p2)
        else:
            powers[k] = get_power(half).matmul(get_power(k - half))
        return powers[k]

    tm = get_power(steps).trace()
    tm1 = get_power(steps // 2).trace_of_product(get_power(steps - steps // 2 + 1))
    if not ring.is_unit(tm):
        raise ValueError("trace of high power is not a unit; no unit eigenvalue")
    root = ring.mul(tm1, ring.inv(tm))
    certified = min(ring.N, int(min(M.prune_cutoff, M.tail_floor)),
                    int(math.floor(steps * gap)))
    return root, certified
