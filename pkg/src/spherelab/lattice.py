"""Lattice points on spheres |x|^2 = lambda in Z^n.

Counting uses the coordinate recurrence r_k(m) = sum_x r_{k-1}(m - x^2);
enumeration peels the first coordinate and joins two-dimensional norm tables
for the last four coordinates, so a five-dimensional sphere can also be
streamed one slab ``x_1 = const`` at a time.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, FormatError, RangeExceeded

DEFAULT_MAX_LAMBDA = 100_000
DEFAULT_POINT_BUDGET = 10**8
TABLE_MAGIC = "spherelab-rep-v1"


# ---------------------------------------------------------------------------
# representation numbers
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class RepCountTable:
    n: int
    max_lambda: int
    counts: np.ndarray

    def __getitem__(self, lam: int) -> int:
        return int(self.counts[lam])

    def __len__(self) -> int:
        return self.max_lambda + 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, RepCountTable):
            return NotImplemented
        return (self.n == other.n and self.max_lambda == other.max_lambda
                and np.array_equal(self.counts, other.counts))


def _needs_bigint(n: int, max_lambda: int) -> bool:
    # r_n(m) <= (2 sqrt(m) + 1)^n
    return n * math.log2(2 * math.isqrt(max_lambda) + 1) >= 62


def rep_count_table(n: int, max_lambda: int) -> RepCountTable:
    """r_n(m) for 0 <= m <= max_lambda."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if max_lambda < 0:
        raise ValueError(f"max_lambda must be >= 0, got {max_lambda}")
    counts = _rep_counts(n, max_lambda)
    return RepCountTable(n, max_lambda, counts)


@lru_cache(maxsize=32)
def _rep_counts(n: int, size: int) -> np.ndarray:
    dtype = object if _needs_bigint(n, size) else np.int64
    r = np.zeros(size + 1, dtype=dtype)
    r[0] = 1
    root = math.isqrt(size)
    for _ in range(n):
        nxt = np.zeros(size + 1, dtype=dtype)
        nxt[:] = r
        for x in range(1, root + 1):
            s = x * x
            nxt[s:] += 2 * r[: size + 1 - s]
        r = nxt
    r.setflags(write=False)
    return r


def count_representations(lam: int, n: int, max_lambda: int = DEFAULT_MAX_LAMBDA) -> int:
    """r_n(lambda) = #{x in Z^n : |x|^2 = lambda}."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam > max_lambda:
        raise RangeExceeded(f"lambda={lam} exceeds the configured maximum {max_lambda}")
    # round the table size up so nearby queries share one DP run
    size = min(max(lam, 1 << max(lam.bit_length(), 6)), max_lambda)
    return int(_rep_counts(n, size)[lam])


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@dataclass
class SpherePointSet:
    lam: int
    n: int
    points: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.count

    def as_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(v) for v in row) for row in self.points}


class _NormTable:
    """Points of a k-dimensional ball (k <= 2) sorted by squared norm."""

    def __init__(self, k: int, limit: int):
        root = math.isqrt(limit)
        xs = np.arange(-root, root + 1, dtype=np.int64)
        if k == 1:
            pts = xs[:, None]
        else:
            g1, g2 = np.meshgrid(xs, xs, indexing="ij")
            pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
        norms = (pts * pts).sum(axis=1)
        keep = norms <= limit
        pts, norms = pts[keep], norms[keep]
        order = np.lexsort(tuple(pts[:, i] for i in range(k - 1, -1, -1)) + (norms,))
        self.points = pts[order]
        self.norms = norms[order]
        self.limit = limit
        counts = np.bincount(self.norms, minlength=limit + 1)
        self.start = np.concatenate([[0], np.cumsum(counts)])
        self.count = counts


@lru_cache(maxsize=8)
def _norm_table(k: int, limit: int) -> _NormTable:
    return _NormTable(k, limit)


def _join(left: _NormTable, right: _NormTable, m: int) -> np.ndarray:
    """All (u, v) with |u|^2 + |v|^2 = m, u from ``left`` and v from ``right``."""
    end = left.start[m + 1]
    li = np.arange(end)
    need = m - left.norms[:end]
    cnt = right.count[need]
    ok = cnt > 0
    li, need, cnt = li[ok], need[ok], cnt[ok]
    total = int(cnt.sum())
    if total == 0:
        return np.zeros((0, left.points.shape[1] + right.points.shape[1]), dtype=np.int64)
    rep_l = np.repeat(li, cnt)
    first = np.repeat(np.cumsum(cnt) - cnt, cnt)
    ri = np.repeat(right.start[need], cnt) + (np.arange(total) - first)
    return np.hstack([left.points[rep_l], right.points[ri]])


def _lexsort_rows(pts: np.ndarray) -> np.ndarray:
    if pts.shape[0] <= 1:
        return pts
    order = np.lexsort(tuple(pts[:, i] for i in range(pts.shape[1] - 1, -1, -1)))
    return pts[order]


def _small_sphere(m: int, n: int, limit: int) -> np.ndarray:
    """Sphere points for n <= 4 via a norm-table join (unsorted)."""
    if n == 1:
        r = math.isqrt(m)
        if r * r != m:
            return np.zeros((0, 1), dtype=np.int64)
        return np.array([[0]] if r == 0 else [[-r], [r]], dtype=np.int64)
    k_left = 1 if n in (2, 3) else 2
    k_right = 1 if n == 2 else 2
    return _join(_norm_table(k_left, limit), _norm_table(k_right, limit), m)


def sphere_slices(lam: int, n: int, limit: int | None = None,
                  sort: bool = True) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(x1, points)`` for each first coordinate x1, ascending.

    Each block holds the full n-dimensional points with that first coordinate,
    in lexicographic order unless ``sort`` is False; empty slices are skipped.
    """
    if lam < 0 or n < 1:
        raise ValueError("need lambda >= 0 and n >= 1")
    limit = lam if limit is None else limit
    root = math.isqrt(lam)
    for x1 in range(-root, root + 1):
        m = lam - x1 * x1
        if n == 1:
            if m == 0:
                yield x1, np.array([[x1]], dtype=np.int64)
            continue
        if n - 1 <= 4:
            rest = _small_sphere(m, n - 1, limit)
            if sort:
                rest = _lexsort_rows(rest)
        else:
            rest = np.concatenate(
                [blk for _, blk in sphere_slices(m, n - 1, limit, sort)]
                or [np.zeros((0, n - 1), dtype=np.int64)]
            )
        if rest.shape[0] == 0:
            continue
        col = np.full((rest.shape[0], 1), x1, dtype=np.int64)
        yield x1, np.hstack([col, rest])


def enumerate_sphere(lam: int, n: int, budget: int = DEFAULT_POINT_BUDGET,
                     max_lambda: int = DEFAULT_MAX_LAMBDA) -> SpherePointSet:
    """All x in Z^n with |x|^2 = lambda, lexicographically sorted."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    count = count_representations(lam, n, max_lambda=max(max_lambda, lam))
    if count > budget:
        raise BudgetExceeded(f"r_{n}({lam}) = {count} exceeds the point budget {budget}")
    if count == 0:
        return SpherePointSet(lam, n, np.zeros((0, n), dtype=np.int64))
    blocks = [blk for _, blk in sphere_slices(lam, n)]
    pts = np.concatenate(blocks)
    assert pts.shape[0] == count
    return SpherePointSet(lam, n, pts)


# ---------------------------------------------------------------------------
# cache file
# ---------------------------------------------------------------------------

def save_table(table: RepCountTable, path: str | os.PathLike) -> None:
    """Write ``table`` as versioned CSV (temp file + rename)."""
    path = os.fspath(path)
    lines = [f"{TABLE_MAGIC},n={table.n},max={table.max_lambda}"]
    lines += [f"{lam},{int(c)}" for lam, c in enumerate(table.counts)]
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".rep-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_table(path: str | os.PathLike) -> RepCountTable:
    with open(path, encoding="ascii", newline="") as fh:
        text = fh.read()
    if not text.endswith("\n") or text.endswith("\n\n"):
        raise FormatError(f"{path}: file must end with exactly one newline")
    lines = text[:-1].split("\n")
    head = lines[0].split(",")
    if len(head) != 3 or head[0] != TABLE_MAGIC:
        raise FormatError(f"{path}: bad header {lines[0]!r}")
    try:
        if not (head[1].startswith("n=") and head[2].startswith("max=")):
            raise ValueError
        n = int(head[1][2:])
        max_lambda = int(head[2][4:])
    except ValueError:
        raise FormatError(f"{path}: bad header {lines[0]!r}") from None
    rows = lines[1:]
    if len(rows) != max_lambda + 1:
        raise FormatError(f"{path}: expected {max_lambda + 1} rows, found {len(rows)}")
    vals = []
    for expect, row in enumerate(rows):
        parts = row.split(",")
        try:
            lam, c = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise FormatError(f"{path}: bad row {row!r}") from None
        if len(parts) != 2 or lam != expect or c < 0:
            raise FormatError(f"{path}: bad row {row!r}")
        vals.append(c)
    dtype = object if _needs_bigint(n, max_lambda) else np.int64
    return RepCountTable(n, max_lambda, np.array(vals, dtype=dtype))
