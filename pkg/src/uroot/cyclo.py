"""Exact arithmetic in Z[zeta_p] and Q(zeta_p).

Elements are coefficient vectors of length p-1 in the power basis
1, zeta, ..., zeta^(p-2), reduced modulo the p-th cyclotomic polynomial
(zeta^(p-1) = -1 - zeta - ... - zeta^(p-2)).  CycInt keeps exact integers,
CycRat exact Fractions; both are immutable.
"""

from __future__ import annotations

from fractions import Fraction


def _reduce(coeffs, p):
    """Reduce a raw power-expansion (length up to 2p-3) mod Phi_p."""
    out = list(coeffs[: p - 1]) + [0] * max(0, p - 1 - len(coeffs))
    for k in range(p - 1, len(coeffs)):
        c = coeffs[k]
        if not c:
            continue
        # zeta^k = zeta^(k mod p); zeta^(p-1) = -(1 + ... + zeta^(p-2))
        r = k % p
        if r == p - 1:
            for i in range(p - 1):
                out[i] -= c
        else:
            out[r] += c
    return tuple(out)


class CycInt:
    """An element of Z[zeta_p] with exact integer coordinates."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs):
        self.p = p
        coeffs = tuple(coeffs)
        if len(coeffs) != p - 1:
            raise ValueError("coefficient vector must have length p-1")
        self.coeffs = coeffs

    @classmethod
    def zero(cls, p):
        return cls(p, (0,) * (p - 1))

    @classmethod
    def from_int(cls, p, n):
        return cls(p, (n,) + (0,) * (p - 2))

    @classmethod
    def zeta_power(cls, p, k):
        k %= p
        if k == p - 1:
            return cls(p, (-1,) * (p - 1))
        v = [0] * (p - 1)
        v[k] = 1
        return cls(p, v)

    def __add__(self, other):
        return CycInt(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        return CycInt(self.p, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return CycInt(self.p, [-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, int):
            return CycInt(self.p, [a * other for a in self.coeffs])
        raw = [0] * (2 * (self.p - 1) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    raw[i + j] += a * b
        return CycInt(self.p, _reduce(raw, self.p))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, CycInt) and self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def galois(self, c: int) -> "CycInt":
        """Apply zeta -> zeta^c (c prime to p)."""
        raw = [0] * (2 * self.p)
        for i, a in enumerate(self.coeffs):
            raw[(i * c) % self.p] += a
        return CycInt(self.p, _reduce(raw, self.p))

    def to_rat(self) -> "CycRat":
        return CycRat(self.p, [Fraction(c) for c in self.coeffs])

    def __repr__(self):
        return f"CycInt(p={self.p}, {list(self.coeffs)})"

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                z = "z" if i == 1 else f"z^{i}"
                terms.append(z if c == 1 else (f"-{z}" if c == -1 else f"{c}*{z}"))
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


class CycRat:
    """An element of Q(zeta_p) with exact Fraction coordinates."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs):
        self.p = p
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != p - 1:
            raise ValueError("coefficient vector must have length p-1")
        self.coeffs = coeffs

    @classmethod
    def zero(cls, p):
        return cls(p, (0,) * (p - 1))

    @classmethod
    def one(cls, p):
        return cls(p, (1,) + (0,) * (p - 2))

    def __add__(self, other):
        return CycRat(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        return CycRat(self.p, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return CycRat(self.p, [-a for a in self.coeffs])

    def scale(self, r) -> "CycRat":
        r = Fraction(r)
        return CycRat(self.p, [a * r for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        raw = [Fraction(0)] * (2 * (self.p - 1) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    raw[i + j] += a * b
        return CycRat(self.p, _reduce(raw, self.p))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, CycRat) and self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coeffs)

    def to_int(self) -> CycInt:
        if not self.is_integral():
            raise ValueError(f"non-integral cyclotomic value: {self.coeffs}")
        return CycInt(self.p, [int(c) for c in self.coeffs])

    def inv(self) -> "CycRat":
        """Multiplicative inverse by solving the (p-1)x(p-1) linear system."""
        n = self.p - 1
        # columns: self * zeta^j expressed in the power basis
        cols = []
        for j in range(n):
            cols.append((self * CycRat(self.p, [Fraction(1) if i == j else Fraction(0)
                                                for i in range(n)])).coeffs)
        # solve M x = e_0 with M[i][j] = cols[j][i]
        M = [[cols[j][i] for j in range(n)] + [Fraction(1) if i == 0 else Fraction(0)]
             for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if M[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("not invertible")
            M[col], M[piv] = M[piv], M[col]
            pv = M[col][col]
            M[col] = [c / pv for c in M[col]]
            for r in range(n):
                if r != col and M[r][col] != 0:
                    f = M[r][col]
                    M[r] = [c - f * d for c, d in zip(M[r], M[col])]
        return CycRat(self.p, [M[i][n] for i in range(n)])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return self * other.inv()

    def __repr__(self):
        return f"CycRat(p={self.p}, {list(self.coeffs)})"
