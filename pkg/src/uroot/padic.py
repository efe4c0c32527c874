"""Finite-precision arithmetic in Z_p < Z_q < R = integers of Q_q(pi-hat).

The ambient ring is Z_{p^a}[X]/(X^e + p) with coefficients mod p^N, i.e. the
ring of integers of the compositum of the unramified extension of degree a
and the Eisenstein extension pi-hat^e = -p, truncated at the ideal
(pi-hat^(e*N)) = (p^N).  Elements are (e, a) integer arrays.

Two ramification choices of the same shape are used: the full tower
e = (p-1) p^2 D from the configuration (every fractional power pi-tilde^w
with w in (1/D)Z is a monomial in pi-hat there), and the compact subring
e = p-1, whose uniformizer is pi itself (pi^(p-1) = -p).  All heavy
computation happens in the compact ring; pi = pi-hat^(e/(p-1)) embeds it
into the tower exactly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ffield import field as ffield_field, lex_least_irreducible


class PrecisionError(ArithmeticError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _solve_unit_system(M: np.ndarray, rhs: np.ndarray, p: int, pN: int) -> np.ndarray:
    """Solve M x = rhs mod p^N for M invertible mod p (Gaussian elimination)."""
    n = M.shape[0]
    A = np.concatenate([M % pN, rhs.reshape(n, -1) % pN], axis=1).astype(object)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r, col] % p != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix not invertible mod p")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
        inv = pow(int(A[col, col]), -1, pN)
        A[col] = (A[col] * inv) % pN
        for r in range(n):
            if r != col and A[r, col]:
                A[r] = (A[r] - A[r, col] * A[col]) % pN
    return A[:, n:].astype(np.int64)


class PadicRing:
    """Z_{p^a}[X]/(X^ram + p) with coefficients mod p^prec."""

    def __init__(self, p: int, a: int, ram: int, prec: int, minpoly=None):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        if a < 1 or ram < 1 or prec < 1:
            raise ValueError("a, ram, prec must be >= 1")
        self.p, self.a, self.e, self.N = p, a, ram, prec
        self.pN = p ** prec
        if minpoly is None:
            minpoly = lex_least_irreducible(p, a) if a > 1 else (0, 1)
        self.minpoly = tuple(int(c) for c in minpoly)
        self.ea = ram * a
        # reduction rows: coords of X_unram^(a+i) for i = 0..a-2
        if a > 1:
            rows = []
            r0 = np.array([(-c) % self.pN for c in self.minpoly[:a]], dtype=object)
            rows.append(r0)
            for _ in range(a - 2):
                prev = rows[-1]
                nxt = np.zeros(a, dtype=object)
                nxt[1:] = prev[:-1]
                nxt = (nxt + prev[a - 1] * r0) % self.pN
                rows.append(nxt)
            self._red = [r.astype(np.int64) for r in rows]
        else:
            self._red = []
        self._frobmat = None
        self._resfield = None

    # -- constructors -------------------------------------------------------

    def zero(self) -> np.ndarray:
        return np.zeros((self.e, self.a), dtype=np.int64)

    def one(self) -> np.ndarray:
        z = self.zero()
        z[0, 0] = 1
        return z

    def from_int(self, n: int) -> np.ndarray:
        z = self.zero()
        z[0, 0] = n % self.pN
        return z

    def basis(self, i: int, j: int = 0) -> np.ndarray:
        z = self.zero()
        z[i, j] = 1
        return z

    def copy(self, x) -> np.ndarray:
        return np.array(x, dtype=np.int64)

    # -- ring operations on raw arrays --------------------------------------

    def add(self, x, y) -> np.ndarray:
        return (x + y) % self.pN

    def sub(self, x, y) -> np.ndarray:
        return (x - y) % self.pN

    def neg(self, x) -> np.ndarray:
        return (-x) % self.pN

    def mul_int(self, x, n: int) -> np.ndarray:
        return (x * (n % self.pN)) % self.pN

    def mul(self, x, y) -> np.ndarray:
        e, a = self.e, self.a
        nz = np.argwhere(x)
        ny = np.argwhere(y)
        if len(ny) < len(nz):
            x, y, nz = y, x, ny
        z = np.zeros((2 * e - 1, 2 * a - 1), dtype=np.int64)
        for i, j in nz:
            z[i:i + e, j:j + a] += int(x[i, j]) * y
        # reduce the unramified axis
        for j in range(2 * a - 2, a - 1, -1):
            col = z[:, j]
            if col.any():
                z[:, :a] = (z[:, :a] + col[:, None] * self._red[j - a][None, :]) % self.pN
        z = z[:, :a] % self.pN
        # fold the Eisenstein axis: X^(e+k) = -p * X^k
        out = z[:e]
        out[: e - 1] = (out[: e - 1] - self.p * z[e:]) % self.pN
        return out % self.pN

    def mul_pi_power(self, x, k: int) -> np.ndarray:
        """Multiply by X^k (k >= 0)."""
        q, r = divmod(k, self.e)
        out = x
        if q:
            out = self.mul_int(out, pow(-self.p, q, self.pN))
        if r:
            z = self.zero()
            z[r:] = out[: self.e - r]
            z[: r] = (-self.p * out[self.e - r:]) % self.pN
            out = z % self.pN
        return out % self.pN

    def pow(self, x, n: int) -> np.ndarray:
        if n < 0:
            return self.pow(self.inv(x), -n)
        r, b = self.one(), x
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def is_unit(self, x) -> bool:
        # unit iff the residue (row 0 mod p) is nonzero in F_{p^a}
        return bool((x[0] % self.p).any())

    def inv(self, x) -> np.ndarray:
        if not self.is_unit(x):
            raise ZeroDivisionError("not a unit")
        n = self.ea
        cols = []
        for i in range(self.e):
            for j in range(self.a):
                cols.append(self.mul(x, self.basis(i, j)).reshape(-1))
        M = np.stack(cols, axis=1)
        rhs = self.one().reshape(-1)
        sol = _solve_unit_system(M.astype(object), rhs, self.p, self.pN)
        return sol.reshape(self.e, self.a) % self.pN

    def divexact_p(self, x, k: int = 1) -> np.ndarray:
        """Divide by p^k; requires exact divisibility.  Result valid mod p^(N-k)."""
        pk = self.p ** k
        if (x % pk).any():
            raise PrecisionError("element not divisible by p^k")
        return (x // pk) % (self.pN // pk)

    # -- valuations ----------------------------------------------------------

    def ord_pi(self, x) -> int:
        """pi-hat-adic valuation from the digits; e*N when indistinguishable from 0."""
        cap = self.e * self.N
        best = cap
        nz = np.argwhere(x % self.pN)
        for i, j in nz:
            c = int(x[i, j]) % self.pN
            v = 0
            while c % self.p == 0:
                c //= self.p
                v += 1
            best = min(best, i + self.e * v)
        return best

    def ord_p(self, x) -> Fraction:
        return Fraction(self.ord_pi(x), self.e)

    def eq_mod_p_power(self, x, y, k: int) -> bool:
        """x == y mod p^k (k <= N)."""
        return self.ord_pi(self.sub(x, y)) >= self.e * k

    # -- residues, Teichmuller, Frobenius ------------------------------------

    @property
    def resfield(self):
        if self._resfield is None:
            self._resfield = ffield_field(self.p, self.a)
            if self._resfield.minpoly != tuple(c % self.p for c in self.minpoly):
                raise AssertionError("residue field minpoly mismatch")
        return self._resfield

    def residue(self, x) -> int:
        """Reduction mod the maximal ideal, as an F_{p^a} code."""
        return self.resfield.code([int(c) % self.p for c in x[0]])

    def teichmuller(self, code: int) -> np.ndarray:
        """The unique lift with x^(p^a) = x reducing to the given residue."""
        z = self.zero()
        z[0] = np.array(self.resfield.coords(code), dtype=np.int64)
        q = self.p ** self.a
        for _ in range(self.N + 1):
            z = self.pow(z, q)
        if self.ord_pi(self.sub(self.pow(z, q), z)) < self.e * self.N:
            raise AssertionError("Teichmuller iteration did not converge")
        return z

    def frobenius_matrix(self) -> np.ndarray:
        """Matrix of sigma on the unramified coordinate row."""
        if self._frobmat is None:
            if self.a == 1:
                self._frobmat = np.eye(1, dtype=np.int64)
            else:
                g = self.zero()
                g[0, 1] = 1
                # Hensel-lift the root of minpoly congruent to g^p
                z = self.pow(g, self.p)
                for _ in range(max(4, self.N.bit_length() + 2)):
                    f = self.zero()
                    fp = self.zero()
                    for c in reversed(self.minpoly):
                        fp = self.add(self.mul(fp, z), f)
                        f = self.add(self.mul(f, z), self.from_int(c))
                    z = self.sub(z, self.mul(f, self.inv(fp)))
                cols = [self.one()[0]]
                acc = z
                for _ in range(self.a - 1):
                    cols.append(acc[0].copy())
                    acc = self.mul(acc, z)
                self._frobmat = np.stack(cols, axis=1) % self.pN
        return self._frobmat

    def frobenius(self, x, times: int = 1) -> np.ndarray:
        times %= self.a
        if times == 0:
            return self.copy(x)
        F = self.frobenius_matrix()
        out = x
        for _ in range(times):
            out = (out @ F.T) % self.pN
        return out

    # -- serialization --------------------------------------------------------

    def digits_flat(self, x, num_digits: int | None = None) -> list[int]:
        """Base-p digits, little-endian, of each coefficient in (i, j) order."""
        nd = self.N if num_digits is None else min(num_digits, self.N)
        out = []
        for i in range(self.e):
            for j in range(self.a):
                c = int(x[i, j]) % self.pN
                for _ in range(nd):
                    out.append(c % self.p)
                    c //= self.p
        return out


# ---------------------------------------------------------------------------

@dataclass
class PadicScalar:
    """A ring element together with a conservative valuation floor.

    val_floor is a lower bound on ord_p, carried for truncation decisions;
    it is never asserted equal to the true valuation.
    """

    ring: PadicRing
    coeffs: np.ndarray
    val_floor: Fraction = Fraction(0)

    def __post_init__(self):
        self.coeffs = self.coeffs % self.ring.pN

    def __add__(self, other):
        self._chk(other)
        return PadicScalar(self.ring, self.ring.add(self.coeffs, other.coeffs),
                           min(self.val_floor, other.val_floor))

    def __sub__(self, other):
        self._chk(other)
        return PadicScalar(self.ring, self.ring.sub(self.coeffs, other.coeffs),
                           min(self.val_floor, other.val_floor))

    def __mul__(self, other):
        if isinstance(other, int):
            return PadicScalar(self.ring, self.ring.mul_int(self.coeffs, other),
                               self.val_floor)
        self._chk(other)
        return PadicScalar(self.ring, self.ring.mul(self.coeffs, other.coeffs),
                           self.val_floor + other.val_floor)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicScalar(self.ring, self.ring.neg(self.coeffs), self.val_floor)

    def __pow__(self, n: int):
        return PadicScalar(self.ring, self.ring.pow(self.coeffs, n),
                           self.val_floor * n if n >= 0 else Fraction(0))

    def inv(self):
        return PadicScalar(self.ring, self.ring.inv(self.coeffs), Fraction(0))

    def _chk(self, other):
        if other.ring is not self.ring:
            raise ValueError("mixed rings")

    def ord_p(self) -> Fraction:
        return self.ring.ord_p(self.coeffs)

    def is_one_unit(self) -> bool:
        return self.ring.ord_pi(self.ring.sub(self.coeffs, self.ring.one())) >= 1

    def eq_mod(self, other, pk: int) -> bool:
        return self.ring.eq_mod_p_power(self.coeffs, other.coeffs, pk)

    def digits_flat(self, num_digits=None):
        return self.ring.digits_flat(self.coeffs, num_digits)

    def __repr__(self):
        return f"PadicScalar(ord>={self.ring.ord_p(self.coeffs)}, e={self.ring.e})"


# ---------------------------------------------------------------------------

@dataclass
class KappaExponent:
    """A p-adic integer exponent known through M base-p digits."""

    p: int
    digits: tuple
    M: int

    def __post_init__(self):
        if len(self.digits) != self.M:
            raise ValueError("digit list length must equal M")
        if any(not (0 <= d < self.p) for d in self.digits):
            raise ValueError("digits out of range")
        self.digits = tuple(int(d) for d in self.digits)

    @classmethod
    def from_int(cls, p: int, k: int, M: int) -> "KappaExponent":
        k %= p ** M
        return cls(p, tuple((k // p ** i) % p for i in range(M)), M)

    @classmethod
    def all_ones(cls, p: int, M: int) -> "KappaExponent":
        return cls(p, (1,) * M, M)

    @property
    def value(self) -> int:
        return sum(d * self.p ** i for i, d in enumerate(self.digits))

    def shift(self, r: int) -> "KappaExponent":
        """kappa - r with the same digit precision."""
        return KappaExponent.from_int(self.p, self.value - r, self.M)

    def binom(self, l: int) -> tuple[int, int]:
        """(lift of C(kappa, l), digits of validity).

        Returns an integer congruent to the binomial coefficient mod
        p^(M - v_p(l!)), together with that exponent.
        """
        if l == 0:
            return 1, self.M
        p, k0 = self.p, self.value
        num = 1
        for i in range(l):
            num *= (k0 - i)
        v = 0
        fact = math.factorial(l)
        while fact % p == 0:
            fact //= p
            v += 1
        if v >= self.M:
            raise PrecisionError("kappa digit precision exhausted in binomial")
        pm = p ** (self.M - v)
        if num % p ** v:
            raise PrecisionError("binomial numerator not divisible as required")
        c = (num // p ** v) * pow(fact % (pm * p ** v), -1, pm)
        return c % pm, self.M - v

# ---------------------------------------------------------------------------

@dataclass
class TowerConfig:
    """The ring tower Z_p < Z_q < R with its two ramification presentations."""

    p: int
    a: int
    D: int
    N: int
    e: int
    M: int
    unramified_minpoly: tuple
    ring: PadicRing          # full tower, uniformizer pi-hat with pi-hat^e = -p
    compact: PadicRing       # Z_q[pi], pi^(p-1) = -p
    pi_index: int            # ord_pi-hat(pi)
    pitilde_index: int       # ord_pi-hat(pi-tilde)

    def pi(self) -> PadicScalar:
        return PadicScalar(self.ring, self.ring.basis(self.pi_index),
                           Fraction(1, self.p - 1))

    def pitilde(self) -> PadicScalar:
        return PadicScalar(self.ring, self.ring.basis(self.pitilde_index),
                           Fraction(self.p - 1, self.p ** 2))

    def embed_compact(self, x_raw: np.ndarray) -> np.ndarray:
        """Coordinate embedding pi |-> pi-hat^(e/(p-1)) of the compact ring."""
        out = self.ring.zero()
        r = self.e // (self.p - 1)
        for i in range(self.p - 1):
            out[i * r] = x_raw[i]
        return out

    def to_tower(self, x) -> PadicScalar:
        if isinstance(x, PadicScalar):
            if x.ring is self.ring:
                return x
            return PadicScalar(self.ring, self.embed_compact(x.coeffs), x.val_floor)
        return PadicScalar(self.ring, self.embed_compact(x))

    def fiber_ring(self, d: int) -> PadicRing:
        """Compact ring with unramified part enlarged to degree a*d."""
        if d == 1:
            return self.compact
        return _fiber_ring_cached(self.p, self.a * d, self.N)

    def min_kappa_digits(self) -> int:
        return self.N + math.ceil(math.log(self.N * (self.p - 1) * self.e, self.p))

    def kappa(self, digits) -> KappaExponent:
        return KappaExponent(self.p, tuple(digits), len(digits))


@functools.lru_cache(maxsize=None)
def _fiber_ring_cached(p: int, k: int, N: int) -> PadicRing:
    return PadicRing(p, k, p - 1, N)


def make_tower(p: int, a: int, D: int, N: int) -> TowerConfig:
    """Set up the tower with e = (p-1) p^2 D, pi = pi-hat^(e/(p-1))."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if a < 1 or D < 1 or N < 1:
        raise ValueError("a, D, N must be >= 1")
    e = (p - 1) * p * p * D
    minpoly = lex_least_irreducible(p, a) if a > 1 else (0, 1)
    ring = PadicRing(p, a, e, N, minpoly=minpoly)
    compact = PadicRing(p, a, p - 1, N, minpoly=minpoly)
    M = N + math.ceil(math.log(N * (p - 1) * e, p))
    cfg = TowerConfig(p=p, a=a, D=D, N=N, e=e, M=M,
                      unramified_minpoly=minpoly, ring=ring, compact=compact,
                      pi_index=e // (p - 1),
                      pitilde_index=(p - 1) * (p - 1) * D)
    # pi^(p-1) = -p exactly, by the Eisenstein relation
    pi = cfg.pi()
    if not (pi ** (p - 1)).eq_mod(PadicScalar(ring, ring.from_int(-p)), N):
        raise AssertionError("pi^(p-1) != -p")
    return cfg


def teichmuller(residue_code: int, cfg: TowerConfig) -> PadicScalar:
    """Teichmuller lift of a residue in F_q, as a full-tower scalar."""
    raw = cfg.compact.teichmuller(residue_code)
    return cfg.to_tower(raw)


def frobenius_sigma(x: PadicScalar, cfg: TowerConfig) -> PadicScalar:
    """sigma: Frobenius on Z_q, identity on pi-hat."""
    return PadicScalar(x.ring, x.ring.frobenius(x.coeffs), x.val_floor)


def one_unit_power(u: PadicScalar, kappa: KappaExponent, cfg: TowerConfig | None = None,
                   prec_check: bool = True) -> PadicScalar:
    """u^kappa for a 1-unit u, via the binomial series sum C(kappa,l)(u-1)^l."""
    ring = u.ring
    d = ring.sub(u.coeffs, ring.one())
    v = ring.ord_pi(d)
    if v < 1:
        raise ValueError("not a 1-unit")
    if prec_check and cfg is not None and kappa.M < cfg.min_kappa_digits():
        raise PrecisionError(
            f"kappa needs at least {cfg.min_kappa_digits()} digits at N={cfg.N}")
    cap = ring.e * ring.N
    lmax = (cap - 1) // v
    acc = ring.zero()
    term = ring.one()
    for l in range(lmax + 1):
        c, valid = kappa.binom(l)
        # guard: truncated kappa digits must not perturb the result mod p^N
        if valid + math.floor(l * v / ring.e) < ring.N:
            raise PrecisionError("kappa digit precision exhausted in series")
        if c:
            acc = ring.add(acc, ring.mul_int(term, c))
        if l < lmax:
            term = ring.mul(term, d)
    return PadicScalar(ring, acc, Fraction(0))
