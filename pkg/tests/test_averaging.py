import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spherelab.averaging import (
    GridFunction, TestFamilySpec, apply_average, lp_norm, maximal_function, maximal_lp_norms,
    op_norm_estimate, sup_window_count,
)
from spherelab.errors import BudgetExceeded, EmptySphere
from spherelab.lattice import enumerate_sphere
from spherelab.multipliers import omega_hat

PS = [1.0, 1.5, 2.0, 3.0, math.inf]


def random_sparse(seed, n=5, k=None, radius=4):
    rng = np.random.default_rng(seed)
    k = k or int(rng.integers(1, 12))
    pts = rng.integers(-radius, radius + 1, size=(k, n))
    vals = rng.normal(size=k) + 1j * rng.normal(size=k)
    return GridFunction.from_arrays(n, pts, vals)


# ---------------------------------------------------------------- GridFunction


def test_canonical_form():
    g = GridFunction.from_arrays(2, [[1, 0], [0, 0], [1, 0], [2, 2]], [1.0, 2.0, -1.0, 0.0])
    assert g.as_dict() == {(0, 0): 2.0}
    assert len(g) == 1
    g2 = GridFunction.from_dict(2, {(3, 1): 1.0, (-1, 4): 2.0})
    assert g2.points.tolist() == [[-1, 4], [3, 1]]
    with pytest.raises(ValueError):
        g2.values[0] = 5


def test_lookup_and_box():
    g = GridFunction.from_dict(3, {(0, 0, 0): 1.0, (1, -2, 3): 2j})
    assert g([[1, -2, 3], [5, 5, 5], [0, 0, 0]]).tolist() == [2j, 0, 1.0]
    lo, hi = g.bounding_box
    assert lo.tolist() == [0, -2, 0] and hi.tolist() == [1, 0, 3]


# ---------------------------------------------------------------- averages


def test_average_of_delta():
    g = apply_average(GridFunction.delta(5), 2)
    assert len(g) == 40
    assert np.all(g.values == 1 / 40)
    assert {tuple(p) for p in g.points} == enumerate_sphere(2, 5).as_set()


def test_average_of_constant_interior():
    side = np.arange(-6, 7)
    grid = np.stack(np.meshgrid(side, side, side, indexing="ij"), axis=-1).reshape(-1, 3)
    g = apply_average(GridFunction.from_arrays(3, grid, 1.0), 4)
    inner = grid[np.all(np.abs(grid) <= 4, axis=1)]
    assert np.allclose(g(inner), 1.0, atol=0, rtol=1e-15)


def test_empty_sphere():
    with pytest.raises(EmptySphere):
        apply_average(GridFunction.delta(2), 3)


def test_budget():
    with pytest.raises(BudgetExceeded):
        apply_average(GridFunction.delta(5), 24, budget=100)


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 4, 24]))
def test_support_and_mass(seed, lam):
    f = random_sparse(seed)
    g = apply_average(f, lam)
    assert abs(g.total() - f.total()) <= 1e-12 * max(1.0, np.abs(f.values).sum())
    sphere = enumerate_sphere(lam, 5).points
    allowed = {tuple(z + x) for z in f.points for x in sphere}
    assert {tuple(p) for p in g.points} <= allowed


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 4, 24]))
def test_contraction(seed, lam):
    f = random_sparse(seed)
    g = apply_average(f, lam)
    for p in PS:
        assert lp_norm(g, p) <= lp_norm(f, p) * (1 + 1e-12)


@pytest.mark.parametrize("lam", [2, 24])
def test_fourier_agreement(lam):
    xi = np.random.default_rng(lam).random((50, 5))
    g = apply_average(GridFunction.delta(5), lam)
    assert np.max(np.abs(g.fourier(xi) - omega_hat(lam, 5, xi))) < 1e-9


def test_convolution_theorem():
    f = random_sparse(11)
    xi = np.random.default_rng(0).random((20, 5))
    g = apply_average(f, 24)
    # the sphere is symmetric, so the multiplier is omega_hat at xi or -xi alike
    assert np.max(np.abs(g.fourier(xi) - f.fourier(xi) * omega_hat(24, 5, xi))) < 1e-9


# ---------------------------------------------------------------- maximal function


def test_maximal_examples():
    d = GridFunction.delta(5)
    assert np.array_equal(maximal_function(d, [2]).values, np.abs(apply_average(d, 2).values))
    m = maximal_function(d, [1, 2])
    vals = m.as_dict()
    assert len(vals) == 50
    assert vals[(1, 0, 0, 0, 0)] == 0.1
    assert vals[(1, 1, 0, 0, 0)] == 1 / 40
    assert maximal_function(d, [2, 1]).as_dict() == vals
    with pytest.raises(ValueError):
        maximal_function(d, [])


@given(st.integers(0, 10_000))
def test_maximal_ceiling(seed):
    f = random_sparse(seed)
    lams = [1, 2, 4, 24]
    m = maximal_function(f, lams)
    for p in PS:
        total = sum(lp_norm(apply_average(f, lam), p) for lam in lams)
        assert lp_norm(m, p) <= total * (1 + 1e-12)
        assert total <= len(lams) * lp_norm(f, p) * (1 + 1e-12)


def test_streamed_norms_match_materialized():
    fs = [random_sparse(s, k=6, radius=2) for s in range(4)]
    fs.append(GridFunction.from_arrays(5, [[0, 0, 0, 0, 0], [1, 1, 0, 0, 0], [2, 0, 0, 0, 0]],
                                       [1.0, -2.0, 1j]))
    lams = [1, 2, 3, 24, 120]
    a = maximal_lp_norms(fs, lams, PS)
    b = maximal_lp_norms(fs, lams, PS, materialize_budget=0)
    assert b[0].streamed == lams and a[0].streamed == []
    for f, x, y in zip(fs, a, b):
        for p in PS:
            ref = lp_norm(maximal_function(f, lams), p)
            assert math.isclose(x.maximal[p], ref, rel_tol=1e-12)
            assert math.isclose(y.maximal[p], ref, rel_tol=1e-12)
            for lam in lams:
                ref = lp_norm(apply_average(f, lam), p)
                assert math.isclose(y.per_lambda[lam][p], ref, rel_tol=1e-12)


def test_streamed_norms_with_collisions():
    # two points at distance sqrt(2) share many sphere neighbours at radius^2 = 5
    f = GridFunction.from_arrays(5, [[0, 0, 0, 0, 0], [1, 1, 0, 0, 0]], [1.0, 1.0])
    s = maximal_lp_norms([f], [5], [1.0, 2.0], materialize_budget=0)[0]
    assert math.isclose(s.maximal[2.0], lp_norm(apply_average(f, 5), 2.0), rel_tol=1e-13)


def test_lp_norm_examples():
    d = GridFunction.delta(5)
    for p in PS:
        assert lp_norm(d, p) == 1
    two = GridFunction.from_arrays(1, [[0], [1]], [1.0, 1.0])
    assert math.isclose(lp_norm(two, 2), math.sqrt(2))
    assert math.isclose(lp_norm(apply_average(d, 2), 1), 1.0)
    with pytest.raises(ValueError):
        lp_norm(d, 0.5)


# ---------------------------------------------------------------- sparse windows


def test_window_count_examples():
    assert sup_window_count([2, 24, 40320], 24) == 1
    assert sup_window_count([2, 24, 40320], 3) == 0
    assert sup_window_count([2, 4, 8, 16], 2) == 2
    with pytest.raises(ValueError):
        sup_window_count([24, 2], 3)


def test_window_count_factorial_at_most_one():
    lams = [2, 24, 40320, math.factorial(16)]
    counts = np.array([sup_window_count(lams, n0) for n0 in range(2, 10**6 + 1, 97)])
    assert counts.max() <= 1
    assert all(sup_window_count(lams, n0) <= 1 for n0 in (2, 4, 5, 24, 25, 201, 40320))


# ---------------------------------------------------------------- families and estimates


def test_family_parse():
    assert TestFamilySpec.parse("delta").kind == "delta"
    r = TestFamilySpec.parse("residue:3")
    assert (r.q, r.radius) == (3, 3)
    assert TestFamilySpec.parse("residue:2:4").radius == 4
    x = TestFamilySpec.parse("random:3:0.1")
    assert (x.radius, x.density) == (3, 0.1)
    for bad in ("", "residue", "random:3", "random:3:0", "residue:0", "box:2"):
        with pytest.raises(ValueError):
            TestFamilySpec.parse(bad)


@pytest.mark.parametrize("spec", ["delta", "residue:2:2", "random:2:0.01"])
def test_family_nonzero_and_deterministic(spec):
    fam = TestFamilySpec.parse(spec)
    a = fam.generate(5, 3, 5)
    b = fam.generate(5, 3, 5)
    for (na, fa), (nb, fb) in zip(a, b):
        assert na == nb and len(fa) > 0
        assert fa.as_dict() == fb.as_dict()


def test_residue_family_points():
    (_, g), = TestFamilySpec.parse("residue:2:2").generate(1, 0, 5)
    assert len(g) == 3**5
    assert np.all(g.points % 2 == 0)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, math.inf])
def test_opnorm_delta(p):
    rep = op_norm_estimate(p, [2], TestFamilySpec("delta"), 3, 0)
    expected = 40.0 ** (1 / p - 1) if not math.isinf(p) else 1 / 40
    assert math.isclose(rep.max_ratio, expected, rel_tol=1e-12)


def test_opnorm_l1_contraction_and_ceiling():
    rep = op_norm_estimate(1.0, [24], TestFamilySpec.parse("random:2:0.01"), 5, 1)
    assert rep.max_ratio <= 1 + 1e-12
    rep = op_norm_estimate(1.1, [2, 24, 40320], TestFamilySpec.parse("residue:2"), 3, 1)
    assert rep.dropped == [40320] and rep.sequence == [2, 24]
    assert 0 < rep.max_ratio <= len(rep.sequence)
    assert rep.ceiling_ok
    assert all(r > 0 for _, r in rep.per_function)
    d = rep.as_dict()
    assert d["ceiling"] == 2 and d["p"] == 1.1
