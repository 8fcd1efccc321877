import json

import numpy as np
import pytest

import modelprox as mp
from modelprox import (
    EntropySetup,
    EuclideanBall,
    EuclideanSetup,
    GroundTruthRequired,
    Simplex,
    entropy_term,
    holder_smoothness_constant,
    model_composite,
    model_from_gradient,
    saddle_model_composite,
    validate_model,
    vi_model_from_operator,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def spd_matrix(n, seed=0, lo=1.0, hi=4.0):
    Qm, _ = np.linalg.qr(rng(seed).standard_normal((n, n)))
    eigs = np.linspace(lo, hi, n)
    return (Qm * eigs) @ Qm.T, eigs


def test_gradient_model_basics():
    f = lambda x: 0.5 * float(x @ x)
    model = model_from_gradient(f, lambda x: x)
    y = np.zeros(2)
    x = np.array([1.0, 0.0])
    assert model.psi(x, y) == 0.0
    assert f(x) - model.f_delta(y) - model.psi(x, y) == 0.5
    for p in rng(1).standard_normal((20, 2)):
        assert model.psi(p, p) == 0.0


def test_quadratic_sandwich_with_eigenvalue_constants():
    # oracle: eigendecomposition gives the exact L and mu for a quadratic
    A, eigs = spd_matrix(4, seed=2)
    f = lambda x: 0.5 * float(x @ (A @ x))
    model = model_from_gradient(f, lambda x: A @ x, mu=eigs[0])
    Q = EuclideanBall(np.zeros(4), 3.0)
    rep = validate_model(model, Q, EuclideanSetup(), ground_truth=f,
                         L_candidate=eigs[-1], samples=500)
    assert rep.passed, rep.to_json()


def test_validate_flags_too_small_L():
    # x along the top eigenvector violates the upper sandwich at L_max/2
    A, eigs = spd_matrix(4, seed=3)
    f = lambda x: 0.5 * float(x @ (A @ x))
    model = model_from_gradient(f, lambda x: A @ x)
    Q = EuclideanBall(np.zeros(4), 3.0)
    rep = validate_model(model, Q, EuclideanSetup(), ground_truth=f,
                         L_candidate=eigs[-1] / 2.0, samples=800)
    upper = next(c for c in rep.checks if c.name == "sandwich_upper")
    assert not upper.passed and upper.max_violation > 0


def test_sandwich_requires_ground_truth():
    model = model_from_gradient(lambda x: 0.0, lambda x: np.zeros(2))
    Q = EuclideanBall(np.zeros(2), 1.0)
    with pytest.raises(GroundTruthRequired):
        validate_model(model, Q, EuclideanSetup(), checks=("sandwich_upper",),
                       L_candidate=1.0, samples=10)


def test_composite_model_reduces_to_gradient_model_when_h_zero():
    A = rng(4).standard_normal((6, 4))
    b = rng(5).standard_normal(6)
    g = lambda x: 0.5 * float(np.sum((A @ x - b) ** 2))
    dg = lambda x: A.T @ (A @ x - b)
    zero = lambda x: 0.0
    comp = model_composite(g, dg, zero, lambda x: np.zeros(4), m_h=0.0)
    grad = model_from_gradient(g, dg)
    xs = rng(6).standard_normal((50, 4))
    ys = rng(7).standard_normal((50, 4))
    for x, y in zip(xs, ys):
        assert comp.psi(x, y) == pytest.approx(grad.psi(x, y), abs=1e-12)


def test_traffic_composite_sandwich_and_strong_convexity():
    inst = mp.make_traffic_composite(20, 11)
    # declared L equals the max squared column norm, computed directly
    A = inst.arrays["A"]
    assert inst.params["L"] == pytest.approx(max(np.sum(A[:, k] ** 2) for k in range(20)))
    rep = inst.validate(samples=800)
    assert rep.passed, rep.to_json()
    names = {c.name for c in rep.checks}
    assert "psi_relative_strong_convexity" in names  # m > 0 path exercised


def test_entropy_term_matches_manual_values():
    h, hs = entropy_term(0.3)
    x = np.array([0.2, 0.8])
    assert h(x) == pytest.approx(0.3 * (0.2 * np.log(0.2), 0.8 * np.log(0.8))[0]
                                 + 0.3 * 0.8 * np.log(0.8))
    assert np.allclose(hs(x), 0.3 * (1.0 + np.log(x)))


def test_vi_identity_operator_monotonicity():
    model = vi_model_from_operator(lambda x: x)
    xs = rng(8).standard_normal((100, 3))
    ys = rng(9).standard_normal((100, 3))
    for x, y in zip(xs, ys):
        s = model.psi(x, y) + model.psi(y, x)
        assert s == pytest.approx(-float((x - y) @ (x - y)), abs=1e-12)


def test_holder_constant_formula():
    # nu = 1 is independent of delta; nu = 0 gives L0^2/(2 delta)
    assert holder_smoothness_constant(1e-3, 1.0, 7.0) == 7.0
    assert holder_smoothness_constant(0.1, 0.0, 3.0) == pytest.approx(9.0 / 0.2)


def test_holder_interpolation_chain_on_power_function():
    # f(x) = ||x||^(1+nu)/(1+nu) has a nu-Hoelder gradient; the norm-model
    # upper bound must hold with L(delta) for each delta in the grid
    nu = 0.5
    L_nu = 2.0 ** (1.0 - nu)  # valid Hoelder constant for the radial power map

    def f(x):
        return float(np.linalg.norm(x) ** (1 + nu)) / (1 + nu)

    def df(x):
        n = np.linalg.norm(x)
        return x * n ** (nu - 1.0) if n > 0 else np.zeros_like(x)

    # empirical sanity for the constant on the sampled pairs
    xs = rng(10).standard_normal((400, 3))
    ys = rng(11).standard_normal((400, 3))
    ratios = [np.linalg.norm(df(x) - df(y)) / np.linalg.norm(x - y) ** nu
              for x, y in zip(xs, ys)]
    assert max(ratios) <= L_nu + 1e-9

    model = model_from_gradient(f, df, variant="norm")
    for delta in (1e-1, 1e-2, 1e-3):
        L = holder_smoothness_constant(delta, nu, L_nu)
        worst = -np.inf
        for x, y in zip(xs, ys):
            gap = f(x) - f(y) - model.psi(x, y)
            worst = max(worst, gap - 0.5 * L * np.linalg.norm(x - y) ** 2 - delta)
        assert worst <= 1e-10, delta


def test_relatively_smooth_operator_triple_inequality():
    # gradient operator of a relatively smooth f: <g(y)-g(z), x-z> <= L(V+V)
    inst = mp.make_quartic_relative(8, 5)
    g = lambda x: inst.model.psi_subgrad(x, x)
    setup = inst.setup
    L = inst.params["L"]
    Q = EuclideanBall(np.zeros(8), 1.0)
    xs, ys, zs = (Q.sample(rng(s), 300) for s in (12, 13, 14))
    for x, y, z in zip(xs, ys, zs):
        lhs = float((g(y) - g(z)) @ (x - z))
        rhs = L * (setup.bregman(z, x) + setup.bregman(y, z))
        assert lhs <= rhs + 1e-8


def test_saddle_bilinear_skew_symmetry_and_gap_link():
    n1 = n2 = 3
    B = rng(15).standard_normal((n1, n2))

    def grad_tilde(z):
        u, v = z[:n1], z[n1:]
        return np.concatenate([B @ v, -(B.T @ u)])

    def f_saddle(u, v):
        return float(u @ (B @ v))

    model = saddle_model_composite(grad_tilde, f_saddle, (n1, n2))
    xs = rng(16).standard_normal((200, 6))
    ys = rng(17).standard_normal((200, 6))
    for x, y in zip(xs, ys):
        assert model.psi(x, y) + model.psi(y, x) == pytest.approx(0.0, abs=1e-10)
        assert model.psi(x, x) == 0.0
        # gap link holds with equality for bilinear saddles
        lhs = f_saddle(y[:n1], x[n1:]) - f_saddle(x[:n1], y[n1:])
        assert lhs <= -model.psi(x, y) + 1e-10


def test_lagrangian_saddle_gap_link_sampled():
    inst = mp.make_covering_circle(6, 3, 4, 21)
    rep = validate_model(inst.model, inst.Q, inst.setup,
                         L_candidate=inst.validation["L_candidate"],
                         delta_check=inst.validation["delta_check"],
                         samples=1000)
    gap = next(c for c in rep.checks if c.name == "saddle_gap_link")
    assert gap.passed, gap.max_violation


def test_trivial_diagonal_sampling_passes():
    model = vi_model_from_operator(lambda x: np.exp(x))
    Q = EuclideanBall(np.zeros(2), 1.0)
    pts = Q.sample(rng(18), 50)
    for p in pts:
        assert model.psi(p, p) == 0.0


def test_validation_report_serializes_to_json():
    inst = mp.make_resource_sharing(10)
    rep = inst.validate(samples=100)
    blob = json.loads(rep.to_json())
    assert blob["passed"] is True
    assert {c["check"] for c in blob["checks"]} >= {
        "psi_zero_diag", "delta_monotonicity", "generalized_relative_smoothness"}
    for c in blob["checks"]:
        assert set(c) == {"check", "max_violation", "sample_count", "passed"}
    assert blob["seed"] == 42


def test_validate_model_rejects_bad_sample_count():
    model = vi_model_from_operator(lambda x: x)
    with pytest.raises(ValueError):
        validate_model(model, EuclideanBall(np.zeros(2), 1.0), EuclideanSetup(),
                       samples=0)
