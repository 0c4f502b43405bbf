"""Fourier-side objects: cutoff, sphere transform, exponential sums over the
lattice sphere, and the major-arc multipliers built from Gauss sums.

Frequencies live on the torus [0, 1)^n.  Every multiplier evaluated here is a
sum over rationals a/q of terms supported in a small cube around a/q; for one
modulus those cubes are disjoint, so each evaluation locates the nearest
vector avec/q (folding by integer shifts) and only sums over the residue a.

All evaluators accept a single frequency of shape (n,) (returning a complex
scalar) or a batch of shape (N, n) (returning an array).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .arithmetic import gauss_table, units
from .errors import DegenerateFit, EmptySphere, RangeExceeded, SupportOverlap, UnsupportedDimension
from .lattice import DEFAULT_MAX_LAMBDA, count_representations, sphere_slices
from .seqfact import FactorialIndex, factorize, lambda_value

TWO_PI = 2.0 * math.pi
INNER_HALF_WIDTH = 0.1
OUTER_HALF_WIDTH = 0.2
NORMALIZATIONS = ("count", "volume")
# below this z = 2 pi t the closed forms lose digits to cancellation
# (about 2e-10 at z = 1e-3, 5e-14 at z = 0.05); ten series terms are exact
# to rounding for z < 1/2
SERIES_SWITCH = 0.5


# ---------------------------------------------------------------------------
# cutoff
# ---------------------------------------------------------------------------

def _g(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def cutoff_1d(t):
    """Smooth even step: 1 on |t| <= 1/10, 0 on |t| >= 1/5."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    out[t <= INNER_HALF_WIDTH] = 1.0
    mid = (t > INNER_HALF_WIDTH) & (t < OUTER_HALF_WIDTH)
    if np.any(mid):
        u1 = (t[mid] - INNER_HALF_WIDTH) * 10.0
        u2 = (OUTER_HALF_WIDTH - t[mid]) * 10.0
        g1, g2 = _g(u1), _g(u2)
        out[mid] = g2 / (g1 + g2)
    return out


def zeta(x):
    """Product cutoff on R^n: exactly 1 on [-1/10, 1/10]^n, 0 off [-1/5, 1/5]^n."""
    x = np.asarray(x, dtype=float)
    vals = cutoff_1d(x).prod(axis=-1)
    return float(vals) if vals.ndim == 0 else vals


# ---------------------------------------------------------------------------
# Fourier transform of the normalized surface measure on S^{n-1}
# ---------------------------------------------------------------------------

def _ft_series(nu: float, z: np.ndarray, terms: int = 10) -> np.ndarray:
    # Gamma(nu+1) (z/2)^{-nu} J_nu(z) = sum_m (-1)^m (z/2)^{2m} / (m! (nu+1)_m)
    w = (z / 2.0) ** 2
    out = np.ones_like(z)
    term = np.ones_like(z)
    for m in range(1, terms):
        term = -term * w / (m * (nu + m))
        out = out + term
    return out


def sphere_ft(n: int, t):
    """Fourier transform of sigma on S^{n-1} at |xi| = t, normalized to 1 at 0.

    n = 5 uses 3 (sin z - z cos z) / z^3 with z = 2 pi t, other odd n the
    spherical-Bessel closed form, even n scipy's J_nu.
    """
    if n < 2:
        raise UnsupportedDimension(f"sphere transform needs n >= 2, got {n}")
    t = np.abs(np.asarray(t, dtype=float))
    z = TWO_PI * t
    out = np.empty_like(z)
    small = z < SERIES_SWITCH
    nu = n / 2.0 - 1.0
    out[small] = _ft_series(nu, z[small])
    zl = z[~small]
    if n == 5:
        out[~small] = 3.0 * (np.sin(zl) - zl * np.cos(zl)) / zl**3
    elif n % 2:
        k = (n - 3) // 2
        dfact = float(np.prod(np.arange(2 * k + 1, 0, -2))) if k > 0 else 1.0
        out[~small] = dfact * special.spherical_jn(k, zl) / zl**k
    else:
        out[~small] = math.gamma(nu + 1.0) * (zl / 2.0) ** (-nu) * special.jv(nu, zl)
    return float(out) if out.ndim == 0 else out


def sphere_ft_quadrature(n: int, t: float) -> float:
    """Same transform by adaptive quadrature of int cos(2 pi t u) d(marginal)."""
    if n < 2:
        raise UnsupportedDimension(f"sphere transform needs n >= 2, got {n}")
    alpha = (n - 3) / 2.0
    c = math.gamma(n / 2.0) / (math.sqrt(math.pi) * math.gamma((n - 1) / 2.0))
    val, _ = integrate.quad(lambda u: math.cos(TWO_PI * t * u), -1.0, 1.0,
                            weight="alg", wvar=(alpha, alpha), limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    return c * val


def fourier_decay_sup(n: int = 5, tmax: float = 1000.0, points: int = 2_000_001) -> float:
    """max over a dense grid of |sphere_ft(n, t)| (1 + t)^{(n-1)/2}."""
    t = np.linspace(0.0, tmax, points)
    return float(np.max(np.abs(sphere_ft(n, t)) * (1.0 + t) ** ((n - 1) / 2.0)))


def sphere_volume_factor(n: int) -> float:
    """pi^{n/2} / Gamma(n/2): r_n(lambda) ~ singular series * this * lambda^{n/2-1}."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _as_batch(xi):
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise ValueError("frequencies must have shape (n,) or (N, n)")
    return arr, False


def _ret(vals, single):
    return complex(vals[0]) if single else vals


def _lam_int(lam) -> int:
    return lam.value if isinstance(lam, FactorialIndex) else int(lam)


def _lam_residue(lam, q: int) -> int:
    return lam.residue(q) if isinstance(lam, FactorialIndex) else int(lam) % q


def _lam_sqrt(lam) -> float:
    if isinstance(lam, FactorialIndex):
        return math.exp(0.5 * lam.log_value)
    lam = int(lam)
    return math.sqrt(lam) if lam < 2**1000 else math.exp(0.5 * math.log(lam))


def _nearest(xi: np.ndarray, q: int):
    """Nearest avec in Z_q^n to q*xi and the folded offset xi - avec/q."""
    k = np.rint(xi * q)
    b = np.mod(k, q).astype(np.int64)
    d = xi - b / q
    d = d - np.rint(d)
    return b, d


def _check_disjoint(scale: float, q: int) -> None:
    if OUTER_HALF_WIDTH / scale >= 1.0 / (2 * q):
        raise SupportOverlap(
            f"cutoff half-width {OUTER_HALF_WIDTH / scale:g} is not below 1/(2q) = {1 / (2 * q):g}"
        )


def _arith_factor(q: int, b_rows: np.ndarray, a_set: np.ndarray, lam_res: int) -> np.ndarray:
    """sum_{a in a_set} e(-lam a / q) F_q(a, b) for each row b."""
    t = gauss_table(q)
    char = np.exp(-1j * TWO_PI * ((lam_res * a_set) % q) / q)
    out = np.empty(len(b_rows), dtype=complex)
    for i, b in enumerate(b_rows):
        out[i] = np.sum(char * t.F_row(b)[a_set])
    return out


def _piece(xi, q, lam, scales, a_set, lam_res, with_ft=True):
    """sum over avec of [sum_a e(-lam a/q) F_q(a, avec)] * W(xi - avec/q) * ft(...)

    where W = zeta(s0 .) - zeta(s1 .) - ... for ``scales = (s0, s1, ...)``
    with signs (+, -, -, ...), i.e. a single cutoff or a cutoff difference.
    """
    n = xi.shape[1]
    for s in scales:
        _check_disjoint(s, q)
    b, d = _nearest(xi, q)
    w = zeta(scales[0] * d)
    for s in scales[1:]:
        w = w - zeta(s * d)
    w = np.atleast_1d(w)
    out = np.zeros(xi.shape[0], dtype=complex)
    nz = np.nonzero(w)[0]
    if nz.size == 0:
        return out
    arith = _arith_factor(q, b[nz], a_set, lam_res)
    ft = sphere_ft(n, _lam_sqrt(lam) * np.linalg.norm(d[nz], axis=1)) if with_ft else 1.0
    out[nz] = arith * w[nz] * ft
    return out


# ---------------------------------------------------------------------------
# exact transform of the normalized sphere indicator
# ---------------------------------------------------------------------------

def _pair_index(lam: int):
    root = math.isqrt(lam)
    xs = np.arange(-root, root + 1)
    i, j = np.meshgrid(np.arange(xs.size), np.arange(xs.size), indexing="ij")
    norm = xs[i] ** 2 + xs[j] ** 2
    keep = norm <= lam
    return i[keep], j[keep], norm[keep]


def _sphere_sum_batch(lam: int, xi: np.ndarray) -> np.ndarray:
    """sum_{|x|^2 = lam} prod_k cos(2 pi x_k xi_k) for each row of xi.

    The sphere is closed under sign flips, so this is the full exponential
    sum.  Coordinates are grouped in pairs (norm histograms weighted by the
    cosine products) and singles; the groups are then convolved in the norm
    variable and read off at lam.
    """
    N, n = xi.shape
    root = math.isqrt(lam)
    xs = np.arange(-root, root + 1)
    sq = xs * xs
    cos = np.cos(TWO_PI * xi[:, :, None] * xs[None, None, :])  # N x n x (2R+1)
    pi_, pj_, pnorm = _pair_index(lam)
    size = lam + 1

    def pair_hist(k1, k2):
        out = np.empty((N, size))
        for r in range(N):
            out[r] = np.bincount(pnorm, weights=cos[r, k1, pi_] * cos[r, k2, pj_], minlength=size)
        return out

    pairs = [(2 * p, 2 * p + 1) for p in range(n // 2)]
    singles = [n - 1] if n % 2 else []

    if not pairs:  # n == 1
        hit = sq == lam
        return cos[:, 0, hit].sum(axis=1)

    acc = pair_hist(*pairs[0])
    for k1, k2 in pairs[1:-1]:
        nxt = pair_hist(k1, k2)
        acc = np.fft.irfft(np.fft.rfft(acc, 2 * size) * np.fft.rfft(nxt, 2 * size), 2 * size)[:, :size]
    if len(pairs) >= 2:
        if singles:
            # fold the single coordinate into acc by shifted adds (x and -x together)
            k = singles[0]
            folded = acc.copy()
            for x in range(1, root + 1):
                s = x * x
                folded[:, s:] += (2.0 * cos[:, k, root + x])[:, None] * acc[:, : size - s]
            acc = folded
        last = pair_hist(*pairs[-1])
        return np.einsum("ij,ij->i", acc, last[:, ::-1])
    # exactly one pair
    if singles:
        k = singles[0]
        return (cos[:, k, :] * acc[:, lam - sq]).sum(axis=1)
    return acc[:, lam]


def omega_hat(lam: int, n: int, xi, normalization: str = "count", chunk: int = 32,
              max_lambda: int = DEFAULT_MAX_LAMBDA):
    """(1/r(lam)) sum_{|x|^2 = lam} e(x . xi).

    ``normalization="volume"`` divides by pi^{n/2} lam^{n/2-1} / Gamma(n/2)
    instead of r(lam).  Work and memory are O(lam) per frequency, so the
    sphere is never enumerated.
    """
    lam = _lam_int(lam)
    if lam > max_lambda:
        raise RangeExceeded(f"lambda={lam} exceeds the configured maximum {max_lambda}")
    arr, single = _as_batch(xi)
    if arr.shape[1] != n:
        raise ValueError(f"frequency has dimension {arr.shape[1]}, expected {n}")
    r = count_representations(lam, n, max_lambda=max(lam, 1))
    if r == 0:
        raise EmptySphere(f"no x in Z^{n} with |x|^2 = {lam}")
    if normalization == "count":
        denom = float(r)
    elif normalization == "volume":
        denom = sphere_volume_factor(n) * lam ** (n / 2.0 - 1.0)
    else:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    vals = np.empty(arr.shape[0])
    for s in range(0, arr.shape[0], chunk):
        vals[s:s + chunk] = _sphere_sum_batch(lam, arr[s:s + chunk])
    return _ret(vals / denom + 0j, single)


def omega_hat_direct(lam: int, n: int, xi):
    """Same sum by enumerating the sphere and summing complex exponentials."""
    lam = _lam_int(lam)
    arr, single = _as_batch(xi)
    total = np.zeros(arr.shape[0], dtype=complex)
    count = 0
    for _, pts in sphere_slices(lam, n, sort=False):
        total += np.exp(1j * TWO_PI * (pts @ arr.T)).sum(axis=0)
        count += pts.shape[0]
    if count == 0:
        raise EmptySphere(f"no x in Z^{n} with |x|^2 = {lam}")
    return _ret(total / count, single)


# ---------------------------------------------------------------------------
# major-arc multipliers
# ---------------------------------------------------------------------------

def omega_eval(lam, q: int, xi):
    """Omega_{lam,q}: sum over a in Z_q and avec of e(-lam a/q) F_q(a, avec)
    zeta(q^2 (xi - avec/q)) ft(lam^{1/2} (xi - avec/q))."""
    arr, single = _as_batch(xi)
    vals = _piece(arr, q, lam, (float(q) ** 2,), np.arange(q), _lam_residue(lam, q))
    return _ret(vals, single)


def omega_eval_direct(lam, q: int, xi):
    """Omega_{lam,q} by summing every (a, avec) in Z_q x Z_q^n (oracle)."""
    arr, single = _as_batch(xi)
    n = arr.shape[1]
    sqrt_lam = _lam_sqrt(lam)
    r = _lam_residue(lam, q)
    t = gauss_table(q)
    out = np.zeros(arr.shape[0], dtype=complex)
    grid = np.stack(np.meshgrid(*([np.arange(q)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    for avec in grid:
        d = arr - avec / q
        d = d - np.rint(d)
        w = np.atleast_1d(zeta(q * q * d))
        ft = sphere_ft(n, sqrt_lam * np.linalg.norm(d, axis=1))
        for a in range(q):
            out += np.exp(-1j * TWO_PI * ((r * a) % q) / q) * t.F_row(avec)[a] * w * ft
    return _ret(out, single)


def dyadic_moduli(h: int) -> range:
    """I_h = [2^h, 2^{h+1})."""
    if h < 0:
        raise ValueError("dyadic level must be >= 0")
    return range(1 << h, 1 << (h + 1))


def m_eval(lam, h: int, xi):
    """M_{lam,h}: moduli q in I_h, reduced residues a, cutoff zeta(10^h .)."""
    arr, single = _as_batch(xi)
    out = np.zeros(arr.shape[0], dtype=complex)
    for q in dyadic_moduli(h):
        out += _piece(arr, q, lam, (10.0**h,), units(q), _lam_residue(lam, q))
    return _ret(out, single)


def m_eval_direct(lam, h: int, xi):
    """M_{lam,h} summed over every avec in Z_q^n without locating (oracle)."""
    arr, single = _as_batch(xi)
    n = arr.shape[1]
    sqrt_lam = _lam_sqrt(lam)
    out = np.zeros(arr.shape[0], dtype=complex)
    for q in dyadic_moduli(h):
        t = gauss_table(q)
        r = _lam_residue(lam, q)
        grid = np.stack(np.meshgrid(*([np.arange(q)] * n), indexing="ij"), axis=-1).reshape(-1, n)
        for avec in grid:
            d = arr - avec / q
            d = d - np.rint(d)
            w = np.atleast_1d(zeta(10.0**h * d))
            if not np.any(w):
                continue
            ft = sphere_ft(n, sqrt_lam * np.linalg.norm(d, axis=1))
            F = t.F_row(avec)
            for a in units(q):
                out += np.exp(-1j * TWO_PI * ((r * a) % q) / q) * F[a] * w * ft
    return _ret(out, single)


def _Q(j: int) -> int:
    if j < 1:
        raise ValueError("j must be >= 1")
    return lambda_value(j, "factorial2l")


def _seq_lambda(l: int, kind: str) -> FactorialIndex:
    return FactorialIndex.of(l, kind)


def omega_lj(l: int, j: int, xi, kind: str = "factorial2l"):
    """Omega_{l,j} = Omega_{lambda_l, Q_j} with Q_j = (2^j)!."""
    return omega_eval(_seq_lambda(l, kind), _Q(j), xi)


def e1_eval(l: int, j: int, xi, kind: str = "factorial2l"):
    """Cutoff-reconciliation error: moduli q < 2^j with zeta(Q_j^2 .) - zeta(10^h .)."""
    arr, single = _as_batch(xi)
    lam = _seq_lambda(l, kind)
    Qj2 = float(_Q(j)) ** 2
    out = np.zeros(arr.shape[0], dtype=complex)
    for h in range(j):
        for q in dyadic_moduli(h):
            out += _piece(arr, q, lam, (Qj2, 10.0**h), units(q), lam.residue(q))
    return _ret(out, single)


def e2_moduli(j: int) -> list[int]:
    """Divisors q of Q_j with q >= 2^j."""
    Q = _Q(j)
    divs = [1]
    for p, k in factorize(Q).items():
        divs = [d * p**e for d in divs for e in range(k + 1)]
    return sorted(d for d in divs if d >= 1 << j)


def e2_eval(l: int, j: int, xi, kind: str = "factorial2l"):
    """Large-divisor error: q | Q_j, q >= 2^j, cutoff zeta(Q_j^2 .)."""
    arr, single = _as_batch(xi)
    lam = _seq_lambda(l, kind)
    Qj2 = float(_Q(j)) ** 2
    out = np.zeros(arr.shape[0], dtype=complex)
    for q in e2_moduli(j):
        out += _piece(arr, q, lam, (Qj2,), units(q), lam.residue(q))
    return _ret(out, single)


def u_factor(i: int, xi):
    """U_i: sum over avec, a in Z_{Q_i} of F_{Q_i}(a, avec) zeta(Q_i^2 (xi - avec/Q_i))."""
    arr, single = _as_batch(xi)
    Q = _Q(i)
    vals = _piece(arr, Q, None, (float(Q) ** 2,), np.arange(Q), 0, with_ft=False)
    return _ret(vals, single)


def v_factor(lam, i: int, xi):
    """V_{lam,i}: sum over avec of zeta(Q_i (xi - avec/Q_i)) ft(lam^{1/2} (xi - avec/Q_i))."""
    arr, single = _as_batch(xi)
    n = arr.shape[1]
    Q = _Q(i)
    _check_disjoint(float(Q), Q)
    _, d = _nearest(arr, Q)
    w = np.atleast_1d(zeta(Q * d))
    vals = w * sphere_ft(n, _lam_sqrt(lam) * np.linalg.norm(d, axis=1)) + 0j
    return _ret(vals, single)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def adversarial_points(n: int, qmax: int, rng: np.random.Generator, reps: int = 2,
                       extra_distances: Sequence[float] = ()) -> np.ndarray:
    """Points at l-infinity distance {0, 1e-4, 1/(5q^2), 1/(2q), *extra}
    from random rationals avec/q, q <= qmax, along random sign directions."""
    pts = []
    for q in range(1, qmax + 1):
        for dist in (0.0, 1e-4, 1.0 / (5 * q * q), 1.0 / (2 * q), *extra_distances):
            for _ in range(reps):
                b = rng.integers(0, q, size=n)
                s = rng.choice([-1.0, 1.0], size=n)
                pts.append(np.mod(b / q + dist * s, 1.0))
    return np.array(pts)


def frequency_samples(count: int, seed: int, n: int = 5, qmax: int = 8, reps: int = 2,
                      extra_distances: Sequence[float] = ()) -> np.ndarray:
    """``count`` uniform points on [0,1)^n followed by the adversarial set."""
    rng = np.random.default_rng(seed)
    uni = rng.random((count, n))
    adv = adversarial_points(n, qmax, rng, reps, extra_distances)
    return np.vstack([uni, adv, np.zeros((1, n))])


def decay_grid(count: int = 500, seed: int = 20240601, n: int = 5, qmax: int = 8,
               reps: int = 3) -> np.ndarray:
    """Fixed frequency grid of exactly ``count`` points: adversarial points
    near rationals with q <= qmax (including 0), then uniform fill."""
    rng = np.random.default_rng(seed)
    adv = adversarial_points(n, qmax, rng, reps)
    if adv.shape[0] >= count:
        return adv[:count]
    return np.vstack([adv, rng.random((count - adv.shape[0], n))])


# ---------------------------------------------------------------------------
# decomposition identity
# ---------------------------------------------------------------------------

@dataclass
class DecompositionReport:
    l: int
    j: int
    kind: str
    samples: list = field(repr=False)
    max_residual: float = 0.0
    max_abs_omega: float = 0.0

    def as_dict(self) -> dict:
        return {
            "l": self.l, "j": self.j, "kind": self.kind,
            "max_residual": self.max_residual, "max_abs_omega": self.max_abs_omega,
            "samples": self.samples,
        }


def decomposition_terms(l: int, j: int, xi, kind: str = "factorial2l") -> dict:
    """All pieces of Omega_{l,j} = sum_{h<j} M + E1 + E2 at the given frequencies."""
    arr, _ = _as_batch(xi)
    lam = _seq_lambda(l, kind)
    M = np.zeros(arr.shape[0], dtype=complex)
    for h in range(j):
        M += m_eval(lam, h, arr)
    return {
        "omega": omega_lj(l, j, arr, kind),
        "m_sum": M,
        "e1": e1_eval(l, j, arr, kind),
        "e2": e2_eval(l, j, arr, kind),
    }


def decomposition_check(l: int, j: int, sample_count: int = 200, seed: int = 0,
                        n: int = 5, kind: str = "factorial2l", xi=None) -> DecompositionReport:
    """Residual of Omega_{l,j} - sum_{h<j} M_{lambda_l,h} - E1_{l,j} - E2_{l,j}.

    Frequencies: ``sample_count`` uniform points plus adversarial points near
    a/q (q <= 2^j) and at the transition scale of the Q_j^2 cutoff.
    """
    if not 1 <= j <= 3:
        raise ValueError("desk-scale decomposition supports j in {1, 2, 3}")
    if l < j:
        raise ValueError(f"decomposition needs l >= j, got l={l}, j={j}")
    if xi is None:
        Q = _Q(j)
        xi = frequency_samples(sample_count, seed, n, qmax=1 << j,
                               extra_distances=(1.5 / (10.0 * Q * Q),))
    arr, _ = _as_batch(xi)
    parts = decomposition_terms(l, j, arr, kind)
    res = np.abs(parts["omega"] - parts["m_sum"] - parts["e1"] - parts["e2"])
    samples = [{"xi": [float(v) for v in p], "residual": float(r)} for p, r in zip(arr, res)]
    return DecompositionReport(l, j, kind, samples, float(res.max()),
                               float(np.abs(parts["omega"]).max()))


# ---------------------------------------------------------------------------
# approximation error and its decay
# ---------------------------------------------------------------------------

def default_truncation(lam: int) -> int:
    """floor(log2(lam^{1/2}))."""
    lam = int(lam)
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    return (lam.bit_length() - 1) // 2


def approx_residuals(lam: int, grid, H: int | None = None, normalization: str = "volume",
                     n: int | None = None) -> np.ndarray:
    """|omega_hat(lam, xi) - sum_{h<=H} M_{lam,h}(xi)| at each grid point.

    With ``normalization="count"`` the exponential sum is divided by r(lam);
    with "volume" by pi^{n/2} lam^{n/2-1} / Gamma(n/2).  Only the volume form
    tends to zero at rational points: the M-sum at xi = 0 is the truncated
    singular series, while the count-normalized transform there is exactly 1.
    """
    arr, _ = _as_batch(grid)
    n = arr.shape[1] if n is None else n
    H = default_truncation(lam) if H is None else H
    w = omega_hat(lam, n, arr, normalization=normalization)
    M = np.zeros(arr.shape[0], dtype=complex)
    for h in range(H + 1):
        M += m_eval(int(lam), h, arr)
    return np.abs(w - M)


def approx_residual(lam: int, grid, H: int | None = None, normalization: str = "volume") -> float:
    return float(np.max(approx_residuals(lam, grid, H, normalization)))


@dataclass
class DecayFitReport:
    pairs: list
    fitted_delta: float | None
    window_h: list
    normalization: str = "volume"
    grid_size: int = 0
    excluded: list = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.excluded)

    def as_dict(self) -> dict:
        return {
            "pairs": [[int(a), float(b)] for a, b in self.pairs],
            "fitted_delta": self.fitted_delta,
            "window_h": self.window_h,
            "normalization": self.normalization,
            "grid_size": self.grid_size,
            "excluded": [int(a) for a in self.excluded],
            "flagged": self.flagged,
        }


def fit_decay_exponent(pairs) -> float:
    """delta = -slope of the least-squares line through (log lam, log residual)."""
    if len(pairs) < 3:
        raise DegenerateFit(f"need at least 3 (lambda, residual) pairs, got {len(pairs)}")
    x = np.log([float(a) for a, _ in pairs])
    y = np.log([float(b) for _, b in pairs])
    xc, yc = x - x.mean(), y - y.mean()
    slope = float(np.dot(xc, yc) / np.dot(xc, xc))
    return -slope + 0.0


def decay_fit(lams: Sequence[int], grid, H: int | None = None,
              normalization: str = "volume") -> DecayFitReport:
    """Sup residual of the approximation at each lambda and the fitted decay rate.

    Zero residuals cannot enter a log fit: they are flagged on the report,
    which is attached to the DegenerateFit raised as ``err.report``.
    """
    lams = [int(v) for v in lams]
    if len(lams) < 3:
        raise DegenerateFit(f"need at least 3 values of lambda, got {len(lams)}")
    arr, _ = _as_batch(grid)
    pairs, hs = [], []
    for lam in lams:
        h = default_truncation(lam) if H is None else H
        hs.append(h)
        pairs.append((lam, approx_residual(lam, arr, h, normalization)))
    excluded = [lam for lam, r in pairs if r == 0.0]
    report = DecayFitReport(pairs, None, hs, normalization, arr.shape[0], excluded)
    if excluded:
        err = DegenerateFit(f"zero residual at lambda in {excluded}; log fit undefined")
        err.report = report
        raise err
    report.fitted_delta = fit_decay_exponent(pairs)
    return report
