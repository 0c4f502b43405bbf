"""Spatial side: finitely supported functions on Z^n, spherical averages,
finite maximal functions over radius lists and l^p operator-norm estimates.

Small convolutions are materialized as sparse arrays.  When |supp f| r(lambda)
is too large to hold (lambda = 40320 in five dimensions has ~7.9e7 sphere
points), ``maximal_lp_norms`` streams the sphere instead: a point
y = z + x (|x|^2 = lambda, z in supp f) receives a contribution from another
pair (z'', lambda') only if 2 x.(z - z'') + |z - z''|^2 = lambda' - lambda, so
all multiply-covered points lie on a few hyperplane sections of the sphere.
Those are collected explicitly; every other point carries f(z)/r(lambda).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, EmptySphere
from .lattice import DEFAULT_MAX_LAMBDA, count_representations, enumerate_sphere, sphere_slices

DEFAULT_MATERIALIZE_BUDGET = 20_000_000
DEFAULT_STREAM_BUDGET = 10**11
_STREAM_CHUNK = 1 << 14


# ---------------------------------------------------------------------------
# sparse functions
# ---------------------------------------------------------------------------

def _row_keys(pts: np.ndarray):
    """Order-preserving int64 keys for integer rows, or None if they would overflow."""
    if pts.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    lo = pts.min(axis=0)
    width = pts.max(axis=0) - lo + 1
    if float(np.prod(width.astype(float))) >= 2.0**62:
        return None
    key = np.zeros(pts.shape[0], dtype=np.int64)
    for i in range(pts.shape[1]):
        key = key * int(width[i]) + (pts[:, i] - lo[i])
    return key


def _group(pts: np.ndarray):
    """(unique rows in lexicographic order, inverse index)."""
    keys = _row_keys(pts)
    if keys is None:
        return np.unique(pts, axis=0, return_inverse=True)
    _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    return pts[first], inv.ravel()


def _canonical(pts: np.ndarray, vals: np.ndarray, reduce: str = "sum"):
    pts = np.asarray(pts, dtype=np.int64)
    vals = np.asarray(vals)
    if pts.shape[0] == 0:
        return pts, vals.astype(complex)
    uniq, inv = _group(pts)
    if reduce == "sum":
        out = (np.bincount(inv, weights=vals.real, minlength=len(uniq))
               + 1j * np.bincount(inv, weights=vals.imag, minlength=len(uniq)))
    else:
        out = np.zeros(len(uniq))
        np.maximum.at(out, inv, vals.real)
        out = out + 0j
    keep = out != 0
    return uniq[keep], out[keep]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Finitely supported f: Z^n -> C stored as sorted unique points and nonzero values."""

    n: int
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, n: int, points, values, reduce: str = "sum") -> "GridFunction":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, n)
        vals = np.broadcast_to(np.asarray(values, dtype=complex), (pts.shape[0],))
        pts, vals = _canonical(pts, vals, reduce)
        pts.setflags(write=False)
        vals.setflags(write=False)
        return cls(n, pts, vals)

    @classmethod
    def from_dict(cls, n: int, mapping: dict) -> "GridFunction":
        keys = list(mapping)
        return cls.from_arrays(n, np.array(keys, dtype=np.int64).reshape(-1, n),
                               np.array([mapping[k] for k in keys], dtype=complex))

    @classmethod
    def delta(cls, n: int, at=None) -> "GridFunction":
        at = np.zeros(n, dtype=np.int64) if at is None else np.asarray(at, dtype=np.int64)
        return cls.from_arrays(n, at[None, :], [1.0])

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in p): complex(c) for p, c in zip(self.points, self.values)}

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def total(self) -> complex:
        return complex(self.values.sum())

    def __call__(self, pts) -> np.ndarray:
        """Values at the given points (0 off the support)."""
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, self.n)
        both = np.vstack([self.points, pts])
        _, inv = _group(both)
        lookup = np.zeros(inv.max() + 1 if inv.size else 0, dtype=complex)
        lookup[inv[: len(self)]] = self.values
        return lookup[inv[len(self):]]

    def fourier(self, xi) -> np.ndarray:
        """sum_y f(y) e(-y . xi) for xi of shape (n,) or (N, n)."""
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 1
        xi = np.atleast_2d(xi)
        out = np.exp(-2j * math.pi * (xi @ self.points.T.astype(float))) @ self.values
        return complex(out[0]) if single else out


# ---------------------------------------------------------------------------
# operators and norms
# ---------------------------------------------------------------------------

def _rep(lam: int, n: int) -> int:
    r = count_representations(lam, n, max_lambda=max(lam, DEFAULT_MAX_LAMBDA))
    if r == 0:
        raise EmptySphere(f"no x in Z^{n} with |x|^2 = {lam}")
    return r


def apply_average(f: GridFunction, lam: int,
                  budget: int = DEFAULT_MATERIALIZE_BUDGET) -> GridFunction:
    """A_lam f(y) = r(lam)^{-1} sum_{|x|^2 = lam} f(y - x), materialized."""
    r = _rep(lam, f.n)
    if len(f) * r > budget:
        raise BudgetExceeded(f"|supp f| r({lam}) = {len(f) * r} exceeds the budget {budget}")
    sphere = enumerate_sphere(lam, f.n, budget=budget).points
    pts = (f.points[:, None, :] + sphere[None, :, :]).reshape(-1, f.n)
    vals = np.repeat(f.values / r, r)
    return GridFunction.from_arrays(f.n, pts, vals)


def maximal_function(f: GridFunction, lams: Sequence[int],
                     budget: int = DEFAULT_MATERIALIZE_BUDGET) -> GridFunction:
    """Pointwise max over lams of |A_lam f| (nonnegative real values)."""
    if len(lams) == 0:
        raise ValueError("radius list must be nonempty")
    parts = [apply_average(f, lam, budget) for lam in lams]
    pts = np.vstack([g.points for g in parts])
    vals = np.concatenate([np.abs(g.values) for g in parts])
    return GridFunction.from_arrays(f.n, pts, vals, reduce="max")


def _norm_of_values(absvals: np.ndarray, p: float) -> float:
    if absvals.size == 0:
        return 0.0
    m = float(absvals.max())
    if math.isinf(p) or m == 0.0:
        return m
    return m * float(np.sum((absvals / m) ** p)) ** (1.0 / p)


def lp_norm(f: GridFunction, p: float) -> float:
    """(sum |f|^p)^{1/p}, or max |f| for p = inf."""
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    return _norm_of_values(np.abs(f.values), p)


def sup_window_count(lams: Sequence[int], n0: int) -> int:
    """Number of radii in [N0, N0^2]."""
    lams = [int(v) for v in lams]
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise ValueError("radius list must be sorted ascending")
    return sum(1 for v in lams if n0 <= v <= n0 * n0)


# ---------------------------------------------------------------------------
# norms of A_lam f and of the maximal function without materializing
# ---------------------------------------------------------------------------

def _values_at(f: GridFunction, ys: np.ndarray, lams: Sequence[int], rs: dict,
               chunk: int = 1 << 15) -> np.ndarray:
    """Matrix of A_lam f(y) for y in ys (rows) and lam in lams (columns)."""
    out = np.zeros((ys.shape[0], len(lams)), dtype=complex)
    # |y - z|^2 = |y|^2 - 2 y.z + |z|^2 is exact in float64 at these magnitudes
    Z, fz = f.points.astype(float), f.values
    zsq = (Z * Z).sum(axis=1)
    for s in range(0, ys.shape[0], chunk):
        Y = ys[s:s + chunk].astype(float)
        D = (Y * Y).sum(axis=1)[:, None] - 2.0 * (Y @ Z.T) + zsq[None, :]
        for k, lam in enumerate(lams):
            out[s:s + chunk, k] = (D == lam) @ fz / rs[lam]
    return out


def _canonical_offset(v: tuple) -> tuple[tuple, int]:
    """(representative of {v, -v}, sign) with the first nonzero entry positive."""
    for c in v:
        if c:
            return (v, 1) if c > 0 else (tuple(-x for x in v), -1)
    return v, 1


def _collision_hits(lam: int, n: int, offsets: np.ndarray, targets: Sequence[int],
                    budget: int) -> list[np.ndarray]:
    """For each offset v, all x with |x|^2 = lam and 2 x.v + |v|^2 in ``targets``.

    Since |2 x.v| <= 2 sqrt(lam) |v|, most (v, target) combinations are
    impossible (or ruled out by parity) and are dropped before the pass.
    """
    empty = np.zeros((0, n), dtype=np.int64)
    if len(offsets) == 0:
        return []
    vsq = (offsets**2).sum(axis=1)
    reach = 2.0 * math.sqrt(lam) * np.sqrt(vsq.astype(float))
    pairs = [(k, int(c)) for k in range(len(offsets)) for c in targets
             if (c - vsq[k]) % 2 == 0 and abs(c - vsq[k]) <= reach[k] + 0.5]
    if not pairs:
        return [empty] * len(offsets)
    r = count_representations(lam, n, max_lambda=max(lam, DEFAULT_MAX_LAMBDA))
    if r * len(pairs) > budget:
        raise BudgetExceeded(
            f"streaming r({lam}) = {r} against {len(pairs)} offset targets exceeds the budget {budget}")
    cols = np.array([k for k, _ in pairs])
    # x.v = (c - |v|^2) / 2; float32 is exact while every |x.v| < 2^24
    bound = math.isqrt(lam) * int(np.abs(offsets[cols]).sum(axis=1).max())
    dtype = np.float32 if bound < 2**23 else np.float64
    Vt = offsets[cols].T.astype(dtype)
    tvec = np.array([(c - int(vsq[k])) // 2 for k, c in pairs], dtype=dtype)
    hits: list[list[np.ndarray]] = [[] for _ in range(len(offsets))]
    pending, size = [], 0

    def flush():
        X = np.concatenate(pending)
        rows, cc = np.nonzero(X.astype(dtype) @ Vt == tvec)
        if rows.size == 0:
            return
        order = np.argsort(cc, kind="stable")
        rows, cc = rows[order], cc[order]
        bounds = np.flatnonzero(np.diff(cc)) + 1
        for grp_rows, grp_c in zip(np.split(rows, bounds), np.split(cc, bounds)):
            hits[cols[grp_c[0]]].append(X[grp_rows])

    for _, blk in sphere_slices(lam, n, sort=False):
        pending.append(blk)
        size += blk.shape[0]
        if size >= _STREAM_CHUNK:
            flush()
            pending, size = [], 0
    if pending:
        flush()
    return [np.concatenate(h) if h else empty for h in hits]


@dataclass
class NormSummary:
    maximal: dict
    per_lambda: dict
    streamed: list


def maximal_lp_norms(fs: Sequence[GridFunction], lams: Sequence[int], ps: Iterable[float],
                     materialize_budget: int = DEFAULT_MATERIALIZE_BUDGET,
                     stream_budget: int = DEFAULT_STREAM_BUDGET) -> list[NormSummary]:
    """||A_* f||_p and ||A_lam f||_p for every f, with A_* f = max_lam |A_lam f|.

    Radii whose image would exceed ``materialize_budget`` points are streamed
    (see the module docstring); the result is exact either way.
    """
    fs = list(fs)
    ps = [float(p) for p in ps]
    if not fs:
        return []
    n = fs[0].n
    lams = sorted({int(v) for v in lams})
    if not lams:
        raise ValueError("radius list must be nonempty")
    rs = {lam: _rep(lam, n) for lam in lams}
    kmax = max(len(f) for f in fs)
    streamed = [lam for lam in lams if kmax * rs[lam] > materialize_budget]
    materialized = [lam for lam in lams if lam not in streamed]

    spheres = {lam: enumerate_sphere(lam, n, budget=materialize_budget).points for lam in materialized}

    # offsets z - z'' across all functions, shared by one pass per streamed radius
    offset_index: dict[tuple, int] = {}
    for f in fs:
        Z = f.points
        for i in range(len(Z)):
            for j in range(len(Z)):
                if i != j:
                    v, _ = _canonical_offset(tuple(int(c) for c in Z[i] - Z[j]))
                    offset_index.setdefault(v, len(offset_index))
    offsets = np.array(list(offset_index), dtype=np.int64).reshape(-1, n)

    def hits_for(lam, v):
        rep, sign = _canonical_offset(v)
        return sign * hits[lam][offset_index[rep]]
    hits = {}
    for lam in streamed:
        targets = [lp - lam for lp in lams]
        hits[lam] = _collision_hits(lam, n, offsets, targets, stream_budget)

    results = []
    for f in fs:
        Z, fz = f.points, f.values
        explicit = [(Z[:, None, :] + spheres[lam][None]).reshape(-1, n) for lam in materialized]
        # points covered by a single pair (z, lam): count and value |f(z)| / r
        single = {lam: np.zeros(len(Z), dtype=np.int64) for lam in streamed}
        for lam in streamed:
            for i, z in enumerate(Z):
                parts = [hits_for(lam, tuple(int(v) for v in z - w))
                         for j, w in enumerate(Z) if j != i]
                special = (np.unique(np.concatenate(parts), axis=0) if parts
                           else np.zeros((0, n), dtype=np.int64))
                single[lam][i] = rs[lam] - special.shape[0]
                explicit.append(z + special)
        pts = np.vstack(explicit) if explicit else np.zeros((0, n), dtype=np.int64)
        ys = _group(pts)[0] if pts.shape[0] else pts
        A = _values_at(f, ys, lams, rs)
        absA = np.abs(A)
        M = absA.max(axis=1) if absA.size else np.zeros(0)

        def combine(explicit_vals, extra):
            # extra: list of (multiplicity, value) for singly covered points
            out = {}
            for p in ps:
                if math.isinf(p):
                    cand = [float(explicit_vals.max())] if explicit_vals.size else [0.0]
                    cand += [v for m, v in extra if m > 0]
                    out[p] = max(cand)
                else:
                    base = _norm_of_values(explicit_vals, p) ** p
                    out[p] = (base + sum(m * v**p for m, v in extra)) ** (1.0 / p)
            return out

        extra_all = [(int(single[lam][i]), abs(fz[i]) / rs[lam])
                     for lam in streamed for i in range(len(Z))]
        per = {}
        for k, lam in enumerate(lams):
            extra = ([(int(single[lam][i]), abs(fz[i]) / rs[lam]) for i in range(len(Z))]
                     if lam in streamed else [])
            per[lam] = combine(absA[:, k], extra)
        results.append(NormSummary(combine(M, extra_all), per, list(streamed)))
    return results


# ---------------------------------------------------------------------------
# test families and operator-norm estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFamilySpec:
    """``delta``, ``residue:q[:R]`` (indicator of a shifted residue class in
    [-R, R]^n) or ``random:R:density`` (random signs on a random subset)."""

    __test__ = False  # not a pytest class

    kind: str
    q: int = 2
    radius: int = 2
    density: float = 0.05

    @classmethod
    def parse(cls, text: str) -> "TestFamilySpec":
        parts = text.strip().split(":")
        try:
            if parts[0] == "delta" and len(parts) == 1:
                return cls("delta")
            if parts[0] == "residue" and len(parts) in (2, 3):
                q = int(parts[1])
                radius = int(parts[2]) if len(parts) == 3 else q
                if q < 1 or radius < 0:
                    raise ValueError
                return cls("residue", q=q, radius=radius)
            if parts[0] == "random" and len(parts) == 3:
                radius, density = int(parts[1]), float(parts[2])
                if radius < 0 or not 0 < density <= 1:
                    raise ValueError
                return cls("random", radius=radius, density=density)
        except ValueError:
            pass
        raise ValueError(f"bad family spec {text!r}; expected delta, residue:q[:R] or random:R:density")

    def label(self) -> str:
        if self.kind == "delta":
            return "delta"
        if self.kind == "residue":
            return f"residue:{self.q}:{self.radius}"
        return f"random:{self.radius}:{self.density:g}"

    def generate(self, count: int, seed: int, n: int) -> list[tuple[str, GridFunction]]:
        rng = np.random.default_rng(seed)
        out = []
        side = np.arange(-self.radius, self.radius + 1)
        for i in range(count):
            if self.kind == "delta":
                g = GridFunction.delta(n)
            elif self.kind == "residue":
                shift = np.zeros(n, dtype=np.int64) if i == 0 else rng.integers(0, self.q, size=n)
                axes = [side[(side - s) % self.q == 0] for s in shift]
                grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
                g = GridFunction.from_arrays(n, grid, np.ones(grid.shape[0]))
            else:
                box = side.size**n
                k = max(1, rng.binomial(box, self.density))
                flat = rng.choice(box, size=k, replace=False)
                pts = np.stack(np.unravel_index(flat, (side.size,) * n), axis=1) - self.radius
                g = GridFunction.from_arrays(n, pts, rng.choice([-1.0, 1.0], size=k))
            out.append((f"{self.label()}#{i}", g))
        return out


@dataclass
class OpNormReport:
    p: float
    family: str
    sequence: list
    per_function: list
    max_ratio: float
    dropped: list = field(default_factory=list)

    @property
    def ceiling_ok(self) -> bool:
        return self.max_ratio <= len(self.sequence) * (1 + 1e-12)

    def as_dict(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "family": self.family,
            "sequence": [int(v) for v in self.sequence],
            "dropped": [int(v) for v in self.dropped],
            "per_function": [[name, ratio] for name, ratio in self.per_function],
            "max_ratio": self.max_ratio,
            "ceiling": len(self.sequence),
            "ceiling_ok": self.ceiling_ok,
        }


def op_norm_estimate(p: float, lams: Sequence[int], family: TestFamilySpec, count: int,
                     seed: int, n: int = 5,
                     materialize_budget: int = DEFAULT_MATERIALIZE_BUDGET,
                     stream_budget: int = DEFAULT_STREAM_BUDGET) -> OpNormReport:
    """max over ``count`` family members of ||A_* f||_p / ||f||_p.

    Radii that would exceed both budgets for this family are dropped from the
    sequence and listed in ``dropped``.
    """
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p}")
    items = family.generate(count, seed, n)
    kmax = max(len(g) for _, g in items)
    used, dropped = [], []
    for lam in sorted({int(v) for v in lams}):
        r = _rep(lam, n)
        offsets = kmax * (kmax - 1) * len(items)
        if kmax * r <= materialize_budget or r * max(offsets, 1) <= stream_budget:
            used.append(lam)
        else:
            dropped.append(lam)
    if not used:
        raise BudgetExceeded("no radius in the sequence fits the budgets for this family")
    summaries = maximal_lp_norms([g for _, g in items], used, [p],
                                 materialize_budget, stream_budget)
    per = [(name, s.maximal[float(p)] / lp_norm(g, p)) for (name, g), s in zip(items, summaries)]
    return OpNormReport(float(p), family.label(), used, per, max(r for _, r in per), dropped)
