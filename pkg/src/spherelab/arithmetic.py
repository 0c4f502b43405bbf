"""Complete quadratic exponential sums and counts of |s|^2 = c in (Z/qZ)^n.

Notation: e(x) = exp(2 pi i x),

    G(a, b; q) = sum_{s mod q} e((a s^2 + b s) / q)
    F_q(a, avec) = q^{-n} prod_i G(a, avec_i; q).

Phases are reduced mod q in integer arithmetic before exponentiation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import RangeExceeded
from .seqfact import factorize, is_prime

TWO_PI = 2.0 * math.pi
DP_MODULUS_LIMIT = 4096


def units(q: int) -> np.ndarray:
    """Residues a mod q with gcd(a, q) = 1; U_1 = Z_1 = {0}."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    a = np.arange(q)
    return a[np.gcd(a, q) == 1]


def _phase(num: np.ndarray, q: int) -> np.ndarray:
    return np.exp(1j * TWO_PI * (np.asarray(num) % q) / q)


# ---------------------------------------------------------------------------
# one-dimensional sums
# ---------------------------------------------------------------------------

def quad_gauss_1d(a: int, b: int, q: int) -> complex:
    """G(a, b; q) by direct summation over s mod q."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    s = np.arange(q, dtype=np.int64)
    a, b = a % q, b % q
    return complex(_phase((a * s % q) * s + b * s, q).sum())


class GaussSumTable:
    """G(a, b; q) for all residues a, built one b-column at a time.

    For fixed b the column over a is a DFT of the weights
    w_b(r) = sum_{s^2 = r mod q} e(b s / q), so each column costs one FFT.
    Columns are cached and returned read-only.
    """

    def __init__(self, q: int):
        if q < 1:
            raise ValueError(f"q must be positive, got {q}")
        self.q = q
        s = np.arange(q, dtype=np.int64)
        self._s = s
        self._sq = (s * s) % q
        self._rows: dict[int, np.ndarray] = {}

    def row(self, b: int) -> np.ndarray:
        """Array of G(a, b; q) indexed by a = 0..q-1."""
        b %= self.q
        got = self._rows.get(b)
        if got is not None:
            return got
        q = self.q
        ph = TWO_PI * ((b * self._s) % q) / q
        w = (np.bincount(self._sq, weights=np.cos(ph), minlength=q)
             + 1j * np.bincount(self._sq, weights=np.sin(ph), minlength=q))
        g = q * np.fft.ifft(w)
        g.setflags(write=False)
        self._rows[b] = g
        return g

    def value(self, a: int, b: int) -> complex:
        return complex(self.row(b)[a % self.q])

    def F_row(self, avec) -> np.ndarray:
        """F_q(a, avec) for every a mod q."""
        out = np.ones(self.q, dtype=complex)
        for b in avec:
            out = out * (self.row(int(b)) / self.q)
        return out


@lru_cache(maxsize=256)
def gauss_table(q: int) -> GaussSumTable:
    return GaussSumTable(q)


def gauss_F(q: int, a: int, avec, n: int | None = None) -> complex:
    """F_q(a, avec) = q^{-n} prod_i G(a, avec_i; q)."""
    avec = [int(v) for v in avec]
    if n is not None and len(avec) != n:
        raise ValueError(f"avec has length {len(avec)}, expected {n}")
    t = gauss_table(q)
    out = complex(1.0)
    for b in avec:
        out *= t.value(a, b) / q
    return out


def gauss_F_direct(q: int, a: int, avec) -> complex:
    """F_q(a, avec) from the n-dimensional sum (oracle; q**n terms)."""
    avec = np.asarray(avec, dtype=np.int64) % q
    n = avec.size
    grids = np.meshgrid(*([np.arange(q, dtype=np.int64)] * n), indexing="ij")
    num = a * sum(g * g for g in grids) + sum(g * c for g, c in zip(grids, avec))
    return complex(_phase(num, q).sum() / q**n)


@dataclass
class GaussBoundReport:
    qmax: int
    n: int
    moduli: str
    max_scaled: float
    argmax: dict
    evaluated: int


def gauss_bound_check(qmax: int, n: int, moduli: str = "all", avecs: str = "random",
                      samples: int = 10, seed: int = 0) -> GaussBoundReport:
    """max of |F_q(a, avec)| q^{n/2} over q <= qmax, a in U_q and sampled avec.

    ``moduli`` is "all" (2 <= q <= qmax) or "odd_primes"; ``avecs`` is "zero"
    (only avec = 0) or "random" (``samples`` seeded draws per q, plus 0).
    """
    if qmax < 2:
        raise ValueError("qmax must be >= 2")
    rng = np.random.default_rng(seed)
    if moduli == "all":
        qs = range(2, qmax + 1)
    elif moduli == "odd_primes":
        qs = [q for q in range(3, qmax + 1) if is_prime(q)]
    else:
        raise ValueError(f"unknown moduli selection {moduli!r}")
    best, arg, count = -1.0, {}, 0
    for q in qs:
        vecs = [np.zeros(n, dtype=np.int64)]
        if avecs == "random":
            vecs += list(rng.integers(0, q, size=(samples, n)))
        elif avecs != "zero":
            raise ValueError(f"unknown avec selection {avecs!r}")
        u = units(q)
        t = gauss_table(q)
        for v in vecs:
            vals = np.abs(t.F_row(v)[u]) * q ** (n / 2)
            count += vals.size
            i = int(np.argmax(vals))
            if vals[i] > best:
                best = float(vals[i])
                arg = {"q": int(q), "a": int(u[i]), "avec": [int(x) for x in v]}
    return GaussBoundReport(qmax, n, moduli, best, arg, count)


# ---------------------------------------------------------------------------
# counting |s|^2 = c mod q
# ---------------------------------------------------------------------------

def square_distribution(q: int) -> np.ndarray:
    """counts[r] = #{s mod q : s^2 = r mod q}."""
    s = np.arange(q, dtype=np.int64)
    return np.bincount((s * s) % q, minlength=q)


def _cyclic_power(dist: np.ndarray, n: int, q: int) -> np.ndarray:
    """n-fold cyclic self-convolution of ``dist`` mod q, exact."""
    exact_int64 = n * math.log2(max(q, 2)) < 62
    base = dist.astype(np.int64 if exact_int64 else object)
    out = np.zeros(q, dtype=base.dtype)
    out[0] = 1
    for _ in range(n):
        full = np.convolve(out, base)
        folded = full[:q].copy()
        folded[: full.size - q] += full[q:]
        out = folded
    return out


def residue_count(q: int, c: int, n: int) -> int:
    """#{s in Z_q^n : |s|^2 = c mod q} by convolving the square distribution."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    return int(_cyclic_power(square_distribution(q), n, q)[c % q])


def _odd_prime_zero_count(p: int, n: int) -> int:
    if p <= DP_MODULUS_LIMIT:
        return residue_count(p, 0, n)
    if n % 2:
        return p ** (n - 1)
    sign = -1 if ((p - 1) // 2) * (n // 2) % 2 else 1
    return p ** (n - 1) + sign * (p - 1) * p ** (n // 2 - 1)


def _prime_power_zero_count(p: int, k: int, n: int) -> int:
    pk = p**k
    if pk <= DP_MODULUS_LIMIT:
        return residue_count(pk, 0, n)
    if p == 2:
        raise RangeExceeded(f"2-power modulus {pk} is beyond the DP limit {DP_MODULUS_LIMIT}")
    # Hensel: points with s != 0 mod p are nonsingular and each has
    # p^{n-1} lifts per step; points with p | s reduce to modulus p^{k-2}.
    n_p = _odd_prime_zero_count(p, n)
    singular = 1 if k == 1 else p**n * (_prime_power_zero_count(p, k - 2, n) if k > 2 else 1)
    return (n_p - 1) * p ** ((n - 1) * (k - 1)) + singular


@dataclass
class ZeroCountReport:
    Q: int
    n: int
    count: int
    normalized: Fraction
    local: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "Q": self.Q, "n": self.n, "count": self.count,
            "normalized": str(self.normalized), "normalized_float": float(self.normalized),
            "local": {str(k): v for k, v in self.local.items()},
        }


def zero_count(Q: int, n: int) -> ZeroCountReport:
    """N(Q, n) = #{s in Z_Q^n : |s|^2 = 0 mod Q} and Q^{1-n} N(Q, n).

    Computed per prime power p^k || Q and multiplied (CRT).
    """
    if Q < 1:
        raise ValueError(f"Q must be positive, got {Q}")
    if Q > 10**12:
        raise RangeExceeded(f"Q={Q} exceeds 10^12")
    local = {}
    total = 1
    for p, k in sorted(factorize(Q).items()):
        c = _prime_power_zero_count(p, k, n)
        local[p**k] = c
        total *= c
    return ZeroCountReport(Q, n, total, Fraction(total, Q ** (n - 1)), local)


def zero_count_bruteforce(Q: int, n: int) -> int:
    """Direct count over all of Z_Q^n (oracle; Q**n work)."""
    sq = (np.arange(Q, dtype=np.int64) ** 2) % Q
    acc = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        acc = (acc[:, None] + sq[None, :]).ravel() % Q
    return int(np.count_nonzero(acc == 0))


# ---------------------------------------------------------------------------
# completed sums
# ---------------------------------------------------------------------------

def completed_sum_sides(q: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of sum_{a in Z_q} F_q(a, 0) e(-c a / q) = q^{1-n} #{|s|^2 = c mod q}.

    Returned as arrays indexed by c = 0..q-1 (left from Gauss sums, right from
    the exact residue count).
    """
    t = gauss_table(q)
    F = t.F_row(np.zeros(n, dtype=np.int64))
    a = np.arange(q)
    c = np.arange(q)
    left = (F[None, :] * _phase(-np.outer(c, a), q)).sum(axis=1)
    counts = _cyclic_power(square_distribution(q), n, q)
    right = np.array([float(Fraction(int(v), q ** (n - 1))) for v in counts])
    return left, right


def completed_sum_identity(q: int, lam: int, n: int) -> float:
    """|left - right| of the completed-sum identity at lambda mod q."""
    t = gauss_table(q)
    F = t.F_row(np.zeros(n, dtype=np.int64))
    a = np.arange(q)
    left = complex((F * _phase(-(lam % q) * a, q)).sum())
    right = Fraction(residue_count(q, lam, n), q ** (n - 1))
    return abs(left - float(right))


def brute_residue_count(q: int, c: int, n: int) -> int:
    """#{s : |s|^2 = c mod q} by iterating over Z_q^n (small oracle)."""
    c %= q
    return sum(1 for s in itertools.product(range(q), repeat=n)
               if sum(v * v for v in s) % q == c)
