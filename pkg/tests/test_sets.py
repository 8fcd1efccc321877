import numpy as np
import pytest

from modelprox import (
    CappedSimplex,
    EuclideanBall,
    NonnegativeBall,
    ProductSet,
    Simplex,
    UnsupportedSet,
    as_point,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_as_point_rejects_non_finite():
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])
    with pytest.raises(ValueError):
        as_point([np.inf])


def test_simplex_lmo_lowest_index_tie_break():
    S = Simplex(3)
    assert np.array_equal(S.lmo(np.array([3.0, 1.0, 2.0])), [0.0, 1.0, 0.0])
    # tie between indices 0 and 2 resolves to 0
    assert np.array_equal(S.lmo(np.array([1.0, 5.0, 1.0])), [1.0, 0.0, 0.0])


def test_ball_lmo_and_zero_tie_break():
    B = EuclideanBall([1.0, -1.0], 2.0)
    out = B.lmo(np.array([3.0, 4.0]))
    assert np.allclose(out, B.center - 2.0 * np.array([0.6, 0.8]))
    assert np.array_equal(B.lmo(np.zeros(2)), B.center)


def test_nonneg_ball_lmo_and_support():
    Q = NonnegativeBall(2.0, 3)
    g = np.array([1.0, -3.0, -4.0])
    out = Q.lmo(g)
    assert np.allclose(out, [0.0, 1.2, 1.6])
    assert Q.lmo(np.array([1.0, 2.0, 0.0])) @ g == 0.0
    assert Q.support(np.array([-1.0, 3.0, 4.0])) == pytest.approx(10.0)


def test_capped_simplex_lmo_is_greedy_knapsack():
    Q = CappedSimplex([0.5, 0.5, 0.5, 0.5], 1.2)
    g = np.array([4.0, 1.0, 2.0, 3.0])
    out = Q.lmo(g)
    assert np.allclose(out, [0.0, 0.5, 0.5, 0.2])
    assert out.sum() == pytest.approx(1.2)


def test_projections_are_feasible_and_idempotent():
    r = rng(1)
    sets = [
        EuclideanBall(r.standard_normal(4), 1.5),
        Simplex(5, 2.0),
        NonnegativeBall(1.0, 4),
        CappedSimplex(np.full(6, 0.8), 2.0),
    ]
    for Q in sets:
        for x in r.standard_normal((20, Q.dim)):
            p = Q.project(x)
            assert Q.contains(p, 1e-8)
            assert np.allclose(Q.project(p), p, atol=1e-9)


def test_simplex_projection_matches_quadratic_oracle():
    # brute-force check: the projection minimizes ||x - y||^2 on a fine grid
    S = Simplex(2, 1.0)
    y = np.array([0.9, -0.3])
    p = S.project(y)
    ts = np.linspace(0.0, 1.0, 20001)
    cand = np.stack([ts, 1.0 - ts], axis=1)
    d2 = np.sum((cand - y) ** 2, axis=1)
    assert np.sum((p - y) ** 2) <= d2.min() + 1e-9


def test_support_function_dominates_samples():
    r = rng(2)
    sets = [
        EuclideanBall(r.standard_normal(3), 2.0),
        Simplex(4, 1.0),
        NonnegativeBall(1.5, 3),
        CappedSimplex(np.full(5, 0.9), 2.0),
    ]
    for Q in sets:
        pts = Q.sample(rng(3), 200)
        for s in r.standard_normal((10, Q.dim)):
            val = Q.support(s)
            assert val >= (pts @ s).max() - 1e-9
            # attained on the set
            assert Q.contains(Q.lmo(-s), 1e-8)
            assert Q.lmo(-s) @ s == pytest.approx(val, abs=1e-9)


def test_max_sq_dist_dominates_samples():
    r = rng(4)
    sets = [
        EuclideanBall(r.standard_normal(3), 1.0),
        Simplex(4, 1.0),
        NonnegativeBall(1.0, 3),
    ]
    for Q in sets:
        p = np.abs(r.standard_normal(Q.dim)) * 0.3
        bound = Q.max_sq_dist(p)
        pts = Q.sample(rng(5), 500)
        assert bound >= np.max(np.sum((pts - p) ** 2, axis=1)) - 1e-9


def test_product_set_blockwise():
    Q = ProductSet([EuclideanBall(np.zeros(2), 1.0), NonnegativeBall(1.0, 3)])
    assert Q.dim == 5
    x = Q.sample(rng(6), 10)
    assert x.shape == (10, 5)
    assert all(Q.contains(p) for p in x)
    g = np.array([1.0, 0.0, -1.0, 2.0, 0.5])
    out = Q.lmo(g)
    assert np.allclose(out[:2], [-1.0, 0.0])
    assert Q.support(g) == pytest.approx(
        Q.blocks[0].support(g[:2]) + Q.blocks[1].support(g[2:]))


def test_sampling_is_deterministic_per_seed():
    Q = Simplex(6, 1.0)
    a = Q.sample(rng(42), 50)
    b = Q.sample(rng(42), 50)
    assert np.array_equal(a, b)


def test_unsupported_oracles_raise():
    Q = CappedSimplex(np.full(3, 0.9), 1.0)
    with pytest.raises(UnsupportedSet):
        Q.max_sq_dist(np.zeros(3))
