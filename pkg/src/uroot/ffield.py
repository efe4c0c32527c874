"""Finite fields F_{p^k}, torus enumeration, traces, and the additive character.

Field elements are integer codes in [0, p^k): base-p digits give coordinates
in the polynomial basis of F_p[x]/(minpoly).  The minimal polynomial of each
field is the monic irreducible whose coefficient word, read as a base-p
integer (constant digit least significant), is smallest; this pins every
tower deterministically and lets the p-adic side reuse the same polynomial.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .cyclo import CycInt


# ---------------------------------------------------------------------------
# small exact polynomial arithmetic over F_p (tuples, little-endian)

def _ptrim(f):
    i = len(f)
    while i > 0 and f[i - 1] == 0:
        i -= 1
    return f[:i]


def _pmul(f, g, p):
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, c in enumerate(f):
        if c:
            for j, d in enumerate(g):
                out[i + j] = (out[i + j] + c * d) % p
    return _ptrim(tuple(out))


def _pmod(f, m, p):
    f = list(f)
    dm = len(m) - 1
    inv = pow(m[-1], -1, p)
    for i in range(len(f) - 1, dm - 1, -1):
        c = f[i] % p
        if c:
            c = (c * inv) % p
            for j in range(dm + 1):
                f[i - dm + j] = (f[i - dm + j] - c * m[j]) % p
    return _ptrim(tuple(f))


def _ppowmod(f, e, m, p):
    r = (1,)
    b = _pmod(f, m, p)
    while e:
        if e & 1:
            r = _pmod(_pmul(r, b, p), m, p)
        b = _pmod(_pmul(b, b, p), m, p)
        e >>= 1
    return r


def _pgcd(f, g, p):
    f, g = _ptrim(tuple(f)), _ptrim(tuple(g))
    while g:
        f, g = g, _pmod(f, g, p)
    return f


def _psub_x(f, p):
    """f - x as a trimmed tuple."""
    g = list(f) + [0] * (2 - len(f))
    g[1] = (g[1] - 1) % p
    return _ptrim(tuple(c % p for c in g))


def _is_irreducible(m, p):
    k = len(m) - 1
    if k <= 0:
        return False
    x = (0, 1)
    if _psub_x(_ppowmod(x, p ** k, m, p), p):
        return False
    for ell in _prime_divisors(k):
        diff = _psub_x(_ppowmod(x, p ** (k // ell), m, p), p)
        if not diff or len(_pgcd(diff, m, p)) > 1:
            return False
    return True


def _prime_divisors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _factorize(n):
    """Prime factorization by trial division (desk-scale inputs)."""
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@functools.lru_cache(maxsize=None)
def lex_least_irreducible(p: int, k: int) -> tuple:
    """Monic irreducible of degree k over F_p with the smallest code word."""
    if k == 1:
        return (0, 1)
    for code in range(p ** k):
        m = tuple((code // p ** i) % p for i in range(k)) + (1,)
        if _is_irreducible(m, p):
            return m
    raise RuntimeError("no irreducible polynomial found")  # pragma: no cover


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedPoint:
    """A Frobenius orbit on the torus: representative plus its degree."""
    orbit_rep: tuple      # s-tuple of element codes in the degree-d extension
    degree: int


class FqField:
    """F_{p^k}; k is the absolute degree over the prime field."""

    def __init__(self, p: int, k: int):
        self.p = p
        self.k = k
        self.q = p ** k
        self.minpoly = lex_least_irreducible(p, k)
        self._embed_cache = {}
        # trace-of-basis vector: tr(x^j) for j < k
        self._trvec = None
        self._gen = None
        self._exp_table = None

    # -- codes <-> coordinate tuples

    def coords(self, code: int) -> tuple:
        p = self.p
        return tuple((code // p ** i) % p for i in range(self.k))

    def code(self, coords) -> int:
        return sum(int(c) % self.p * self.p ** i for i, c in enumerate(coords))

    # -- scalar arithmetic on codes

    def add(self, a: int, b: int) -> int:
        p = self.p
        return self.code([x + y for x, y in zip(self.coords(a), self.coords(b))])

    def neg(self, a: int) -> int:
        return self.code([-x for x in self.coords(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        f = _pmod(_pmul(self.coords(a), self.coords(b), self.p), self.minpoly, self.p)
        return self.code(f + (0,) * (self.k - len(f)))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        r, b = 1, a
        while e:
            if e & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, self.q - 2)

    def frobenius(self, a: int, times: int = 1) -> int:
        return self.pow(a, self.p ** times)

    # -- structure

    @property
    def generator(self) -> int:
        """Smallest code generating the multiplicative group."""
        if self._gen is None:
            fac = _factorize(self.q - 1)
            for g in range(1, self.q):
                if all(self.pow(g, (self.q - 1) // ell) != 1 for ell in fac):
                    self._gen = g
                    break
        return self._gen

    def trace_to_prime(self, a: int) -> int:
        """Absolute trace to F_p, as an integer in [0, p)."""
        if self._trvec is None:
            tv = []
            for j in range(self.k):
                x = self.code([0] * j + [1])
                t = 0
                for i in range(self.k):
                    t = self.add(t, self.frobenius(x, i))
                tv.append(t % self.p)  # trace lands in F_p: code == value
            self._trvec = tuple(tv)
        c = self.coords(a)
        return sum(ci * ti for ci, ti in zip(c, self._trvec)) % self.p

    def relative_trace(self, a: int, sub_k: int) -> int:
        """Trace down to the subfield of absolute degree sub_k (code here)."""
        if self.k % sub_k:
            raise ValueError("not a subfield degree")
        t, x = 0, a
        for _ in range(self.k // sub_k):
            t = self.add(t, x)
            x = self.frobenius(x, sub_k)
        return t

    def embed_from(self, sub: "FqField"):
        """Ring embedding of a subfield, as a code -> code function."""
        if sub.k == self.k:
            return lambda c: c
        if self.k % sub.k or sub.p != self.p:
            raise ValueError("not a subfield")
        if sub.k == 1:
            # prime subfield: codes below p encode the same constants
            return lambda c: c % self.p
        key = sub.k
        if key not in self._embed_cache:
            # the images of sub's generator are the roots of sub.minpoly among
            # the elements of multiplicative order sub.q - 1; scan the powers
            # h^c of a fixed order-(sub.q-1) element and take the first root
            ratio = (self.q - 1) // (sub.q - 1)
            h = self.pow(self.generator, ratio)
            img = None
            for c in range(1, sub.q):
                hc = self.pow(h, c)
                val = 0
                powc = 1
                for coeff in sub.minpoly:
                    if coeff:
                        val = self.add(val, self.mul(coeff % self.p, powc))
                    powc = self.mul(powc, hc)
                if val == 0:
                    img = hc
                    break
            if img is None:  # pragma: no cover
                raise RuntimeError("no embedding found")
            # precompute images of sub's power basis
            basis_img = []
            acc = 1
            for _ in range(sub.k):
                basis_img.append(acc)
                acc = self.mul(acc, img)
            self._embed_cache[key] = (sub, tuple(basis_img))

        sub_, basis_img = self._embed_cache[key]

        def emb(code: int) -> int:
            out = 0
            for ci, bi in zip(sub_.coords(code), basis_img):
                if ci:
                    out = self.add(out, self.mul(ci, bi))
            return out

        return emb

    # -- bulk vectorized torus evaluation (1-dimensional torus)

    def _mulmat(self, a: int) -> np.ndarray:
        """k x k matrix of multiplication by a on coordinate columns."""
        cols = []
        for j in range(self.k):
            cols.append(self.coords(self.mul(a, self.code([0] * j + [1]))))
        return np.array(cols, dtype=np.int64).T  # M @ coords-column

    def exp_table(self) -> np.ndarray:
        """(q-1, k) uint8 array: coordinates of generator powers."""
        if self._exp_table is None:
            q, k, p = self.q, self.k, self.p
            tab = np.zeros((q - 1, k), dtype=np.uint8)
            block = min(q - 1, 2048)
            x = 1
            for i in range(block):
                tab[i] = self.coords(x)
                x = self.mul(x, self.generator)
            if q - 1 > block:
                mb = self._mulmat(self.pow(self.generator, block)).astype(np.int64)
                done = block
                while done < q - 1:
                    take = min(block, q - 1 - done)
                    prev = tab[done - block:done - block + take].astype(np.int64)
                    tab[done:done + take] = (prev @ mb.T) % p
                    done += take
            self._exp_table = tab
        return self._exp_table

    def torus1_trace_counts(self, monomials) -> np.ndarray:
        """Distribution of Tr(sum_j c_j x^(e_j)) over the 1-torus.

        monomials: list of (exponent int, coefficient code).  Returns a length-p
        integer array: counts of each trace value over x in F_q^*.
        """
        q, p, k = self.q, self.p, self.k
        tab = self.exp_table().astype(np.int64)
        if self._trvec is None:
            self.trace_to_prime(0)
        trvec = np.array(self._trvec, dtype=np.int64)
        idx = np.arange(q - 1, dtype=np.int64)
        acc = np.zeros((q - 1, k), dtype=np.int64)
        for e, c in monomials:
            if c == 0:
                continue
            rows = tab[(e % (q - 1)) * idx % (q - 1)]
            mc = self._mulmat(c)
            acc += rows @ mc.T
        tr = (acc % p) @ trvec % p
        return np.bincount(tr, minlength=p)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@functools.lru_cache(maxsize=None)
def field(p: int, k: int) -> FqField:
    return FqField(p, k)


def extension(fld: FqField, d: int) -> FqField:
    """The degree-d extension, presented over the prime field."""
    if d < 1:
        raise ValueError("extension degree must be >= 1")
    return field(fld.p, fld.k * d)


def closed_points(fld: FqField, s: int, max_degree: int) -> list[ClosedPoint]:
    """One representative per Frobenius orbit of (F_q-bar^*)^s, degree <= cap.

    The Frobenius here is x -> x^q for q = fld.q; representatives are the
    orbit-minimal code tuples, listed by (degree, representative).
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    out = []
    for d in range(1, max_degree + 1):
        ext = extension(fld, d)
        qd = ext.q
        seen = set()
        reps = []
        import itertools as _it
        for tup in _it.product(range(1, qd), repeat=s):
            if tup in seen:
                continue
            orbit = []
            cur = tup
            while True:
                orbit.append(cur)
                seen.add(cur)
                cur = tuple(ext.pow(c, fld.q) for c in cur)
                if cur == tup:
                    break
            if len(orbit) == d:
                reps.append(min(orbit))
        reps.sort()
        out.extend(ClosedPoint(r, d) for r in reps)
    return out


def additive_character(fld: FqField, a: int) -> CycInt:
    """Psi(a) = zeta_p ^ Tr(a), as an exact cyclotomic integer."""
    return CycInt.zeta_power(fld.p, fld.trace_to_prime(a))
