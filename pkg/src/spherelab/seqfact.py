"""Exact arithmetic for the factorial radius sequences.

The main sequence is ``lambda_l = (2**l)!``; the slower surrogate
``lambda_l = l!`` is also supported.  Values are only materialized when they
fit in a decimal digit budget; divisibility, residues and sparsity are decided
from prime valuations (Legendre's formula) otherwise, so every query stays
cheap for any ``l``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

from .errors import BudgetExceeded, FactorizationFailed, NotPrime

DEFAULT_DIGIT_BUDGET = 10_000
TRIAL_DIVISION_LIMIT = 10**6

SEQUENCE_KINDS = ("factorial2l", "factoriall")


# ---------------------------------------------------------------------------
# small number theory helpers
# ---------------------------------------------------------------------------

def factorize(q: int, limit: int = TRIAL_DIVISION_LIMIT) -> dict[int, int]:
    """Prime factorization of ``q >= 1`` by trial division up to ``limit``.

    Any cofactor left after dividing out primes below ``limit`` must be below
    ``limit**2`` (hence prime), otherwise FactorizationFailed is raised.
    """
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    out: dict[int, int] = {}
    n = q
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    step = 2
    while p * p <= n:
        if p > limit:
            raise FactorizationFailed(f"{q} has a cofactor {n} with no factor below {limit}")
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return factorize(p) == {p: 1}


def legendre_valuation(m: int, p: int) -> int:
    """v_p(m!) = sum_k floor(m / p**k)."""
    v = 0
    pk = p
    while pk <= m:
        v += m // pk
        pk *= p
    return v


def crt(residues: list[tuple[int, int]]) -> tuple[int, int]:
    """Combine ``[(r_i, m_i)]`` with pairwise coprime moduli into ``(r, M)``."""
    r, mod = 0, 1
    for ri, mi in residues:
        # r + mod * t = ri (mod mi)
        t = ((ri - r) * pow(mod, -1, mi)) % mi if mi > 1 else 0
        r += mod * t
        mod *= mi
        r %= mod
    return r, mod


def log_factorial_bounds(m: int) -> tuple[float, float]:
    """Robbins' bounds ``S + 1/(12m+1) < log m! < S + 1/(12m)``, S = Stirling."""
    if m <= 1:
        return 0.0, 0.0
    mf = float(m)
    s = mf * math.log(mf) - mf + 0.5 * math.log(2.0 * math.pi * mf)
    lo = s + 1.0 / (12.0 * mf + 1.0)
    hi = s + 1.0 / (12.0 * mf)
    # float slack for the m*log(m) product
    slack = 1e-12 * abs(s) + 1e-12
    return lo - slack, hi + slack


# ---------------------------------------------------------------------------
# sequence elements
# ---------------------------------------------------------------------------

def sequence_argument(l: int, kind: str = "factorial2l") -> int:
    """The ``m`` with ``lambda_l = m!`` for the given sequence kind."""
    if l < 1:
        raise ValueError(f"index l must be >= 1, got {l}")
    if kind == "factorial2l":
        return 1 << l
    if kind == "factoriall":
        return l
    raise ValueError(f"unknown sequence kind {kind!r}; expected one of {SEQUENCE_KINDS}")


@dataclass(frozen=True)
class FactorialIndex:
    """A sequence element ``lambda = m!`` carried by its index and argument."""

    l: int
    m: int
    digit_budget: int = DEFAULT_DIGIT_BUDGET

    @classmethod
    def of(cls, l: int, kind: str = "factorial2l",
           digit_budget: int = DEFAULT_DIGIT_BUDGET) -> "FactorialIndex":
        return cls(l, sequence_argument(l, kind), digit_budget)

    @property
    def log_value(self) -> float:
        """Natural log of m! (float; inf when not representable)."""
        try:
            return math.lgamma(self.m + 1)
        except OverflowError:
            return math.inf

    @property
    def digits(self) -> float:
        """Upper estimate of the number of decimal digits of m!."""
        return math.floor(self.log_value / math.log(10)) + 1 if self.m > 1 else 1

    @property
    def materializable(self) -> bool:
        return self.digits <= self.digit_budget

    @cached_property
    def value(self) -> int:
        if not self.materializable:
            raise BudgetExceeded(
                f"{self.m}! has about {self.digits:.0f} digits, budget is {self.digit_budget}"
            )
        return math.factorial(self.m)

    def valuation(self, p: int) -> int:
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        return legendre_valuation(self.m, p)

    def divisible_by(self, q: int) -> bool:
        if q < 1:
            raise ValueError(f"q must be positive, got {q}")
        return all(legendre_valuation(self.m, p) >= k for p, k in factorize(q).items())

    def residue(self, q: int) -> int:
        """lambda mod q, without materializing lambda when it is large."""
        if q < 1:
            raise ValueError(f"q must be positive, got {q}")
        if q == 1:
            return 0
        if self.materializable:
            return self.value % q
        parts = []
        for p, k in factorize(q).items():
            pk = p**k
            if legendre_valuation(self.m, p) >= k:
                parts.append((0, pk))
            else:
                # v_p(m!) >= m // p, so here m < p*k and the product is short
                r = 1
                for i in range(2, self.m + 1):
                    r = (r * i) % pk
                parts.append((r, pk))
        return crt(parts)[0]


def lambda_value(l: int, kind: str = "factorial2l",
                 digit_budget: int = DEFAULT_DIGIT_BUDGET) -> int:
    """lambda_l as an exact integer, e.g. ``lambda_value(3) == 40320``."""
    return FactorialIndex.of(l, kind, digit_budget).value


def lambda_valuation(l: int, p: int, kind: str = "factorial2l") -> int:
    return FactorialIndex.of(l, kind).valuation(p)


def divides_lambda(q: int, l: int, kind: str = "factorial2l") -> bool:
    return FactorialIndex.of(l, kind).divisible_by(q)


def check_sparsity(l: int, kind: str = "factorial2l",
                   digit_budget: int = DEFAULT_DIGIT_BUDGET) -> bool:
    """Whether lambda_l**2 < lambda_{l+1}."""
    a = FactorialIndex.of(l, kind, digit_budget)
    b = FactorialIndex.of(l + 1, kind, digit_budget)
    if a.materializable and b.materializable:
        return a.value * a.value < b.value
    a_lo, a_hi = log_factorial_bounds(a.m)
    b_lo, b_hi = log_factorial_bounds(b.m)
    if 2.0 * a_hi < b_lo:
        return True
    if 2.0 * a_lo >= b_hi:
        return False
    # bounds overlap only when the two sides are within rounding of each other
    return a.value * a.value < b.value


def e(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)


def character_value(l: int, a: int, q: int, kind: str = "factorial2l") -> complex:
    """e(-lambda_l * a / q); exactly 1 whenever q divides lambda_l."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    t = a % q
    if t == 0:
        return complex(1.0)
    idx = FactorialIndex.of(l, kind)
    if idx.divisible_by(q):
        return complex(1.0)
    r = (idx.residue(q) * t) % q
    if r == 0:
        return complex(1.0)
    return cmath.exp(-2j * math.pi * r / q)


# ---------------------------------------------------------------------------
# windows H_j = [2^(2^(c(j-1))), 2^(2^(cj)))
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowConfig:
    exponent: int = 16

    def __post_init__(self):
        if self.exponent < 1:
            raise ValueError("window exponent must be a positive integer")

    def log2_bounds(self, j: int) -> tuple[int, int]:
        """Window j as [2**lo, 2**hi) with exponents returned (values can be astronomically large)."""
        if j < 1:
            raise ValueError("window index starts at 1")
        c = self.exponent
        return 1 << (c * (j - 1)), 1 << (c * j)

    def bounds(self, j: int) -> tuple[int, int]:
        lo, hi = self.log2_bounds(j)
        return 1 << lo, 1 << hi

    def index(self, lam: int) -> int:
        if lam < 2:
            raise ValueError(f"windows cover [2, inf); got {lam}")
        # lam >= 2**(2**(c(j-1)))  <=>  floor(log2 lam) >= 2**(c(j-1))
        b = lam.bit_length() - 1
        return (b.bit_length() - 1) // self.exponent + 1


def j0_for(lam: int, window: WindowConfig | int = 16) -> int:
    w = window if isinstance(window, WindowConfig) else WindowConfig(int(window))
    return w.index(int(lam))
