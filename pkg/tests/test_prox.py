import numpy as np
import pytest

import modelprox as mp
from modelprox import (
    DomainError,
    EntropySetup,
    EuclideanBall,
    EuclideanSetup,
    LogBarrierSetup,
    MaxInnerIterations,
    Power4Setup,
    ResourceSharingSetup,
    Simplex,
    SubproblemPart,
    UnboundedSubproblem,
    bregman,
    composite_argmin,
    divergence_diameter_bound,
    mirror_argmin,
)

SETUP_SETS = [
    (EuclideanSetup(), EuclideanBall(np.zeros(4), 2.0)),
    (EntropySetup(), Simplex(4, 1.0)),
    (LogBarrierSetup(), Simplex(4, 1.0)),
    (ResourceSharingSetup(), mp.CappedSimplex(np.full(4, np.sqrt(3) / 2), 2.0)),
    (Power4Setup(), EuclideanBall(np.zeros(4), 2.0)),
]


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def interior_samples(setup, Q, n, seed=0):
    pts = Q.sample(rng(seed), n)
    if setup.needs_interior:
        pts = np.stack([Q.clamp_interior(p, 1e-6) for p in pts])
    return pts


def test_bregman_euclidean_half_square():
    assert bregman(EuclideanSetup(), [0.0, 0.0], [3.0, 4.0]) == 12.5


def test_bregman_zero_on_diagonal():
    assert bregman(EntropySetup(), [0.5, 0.5], [0.5, 0.5]) == 0.0


def test_bregman_resource_sharing_closed_form():
    # (x-y)^2 / ((1-x)(1-y)^2) at y=0.5, x=0.25
    assert bregman(ResourceSharingSetup(), [0.5], [0.25]) == pytest.approx(1.0 / 3.0)


def test_bregman_nonnegative_everywhere():
    for setup, Q in SETUP_SETS:
        xs = interior_samples(setup, Q, 50, 1)
        ys = interior_samples(setup, Q, 50, 2)
        for x, y in zip(xs, ys):
            assert setup.bregman(y, x) >= 0.0


def test_entropy_gradient_boundary_raises():
    with pytest.raises(DomainError):
        EntropySetup().grad_d(np.array([0.0, 1.0]))
    with pytest.raises(DomainError):
        LogBarrierSetup().grad_d(np.array([0.5, 0.0, 0.5]))
    with pytest.raises(DomainError):
        ResourceSharingSetup().grad_d(np.array([1.0]))


def test_grad_d_matches_finite_differences():
    # central differences, step 1e-6, relative tolerance 1e-5, 100 points
    for setup, Q in SETUP_SETS:
        pts = interior_samples(setup, Q, 100, 3)
        for x in pts:
            g = setup.grad_d(x)
            fd = np.empty_like(x)
            for i in range(x.size):
                e = np.zeros_like(x)
                e[i] = 1e-6
                fd[i] = (setup.d(x + e) - setup.d(x - e)) / 2e-6
            assert np.allclose(fd, g, rtol=1e-5, atol=1e-5), setup.name


def test_three_point_identity():
    # <grad d(y) - grad d(z), y - x> = V[z](y) + V[y](x) - V[z](x)
    for setup, Q in SETUP_SETS:
        xs = interior_samples(setup, Q, 60, 4)
        ys = interior_samples(setup, Q, 60, 5)
        zs = interior_samples(setup, Q, 60, 6)
        for x, y, z in zip(xs, ys, zs):
            lhs = float((setup.grad_d(y) - setup.grad_d(z)) @ (y - x))
            rhs = setup.bregman(z, y) + setup.bregman(y, x) - setup.bregman(z, x)
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9), setup.name


def test_composite_argmin_ball_clipping():
    # unconstrained minimizer -g/beta leaves the ball, so the step clips
    cert = composite_argmin(
        EuclideanSetup(), EuclideanBall(np.zeros(2), 1.0),
        SubproblemPart(linear=np.array([1.0, 1.0])), 1.0, np.zeros(2),
    )
    assert np.allclose(cert.solution, [-1 / np.sqrt(2), -1 / np.sqrt(2)])
    assert cert.delta_tilde == 0.0
    # first-order optimality at the returned point: h = g + beta*(x - 0)
    h = np.array([1.0, 1.0]) + cert.solution
    for u in EuclideanBall(np.zeros(2), 1.0).sample(rng(7), 100):
        assert h @ (u - cert.solution) >= -1e-12


def test_composite_argmin_zero_part_returns_anchor():
    a = np.array([0.3, -0.2, 0.1])
    cert = composite_argmin(EuclideanSetup(), EuclideanBall(np.zeros(3), 1.0),
                            SubproblemPart(linear=np.zeros(3)), 2.5, a)
    assert np.allclose(cert.solution, a)
    assert cert.delta_tilde == 0.0


def test_entropy_prox_kkt_random_instance():
    # x_i proportional to y_i exp(-g_i / beta) on a 5-dim simplex
    r = rng(8)
    y = r.dirichlet(np.ones(5))
    g = r.standard_normal(5)
    beta = 1.7
    cert = composite_argmin(EntropySetup(), Simplex(5, 1.0),
                            SubproblemPart(linear=g), beta, y)
    manual = y * np.exp(-g / beta)
    manual /= manual.sum()
    assert np.allclose(cert.solution, manual, atol=1e-12)
    assert cert.delta_tilde == 0.0


def test_logbar_prox_budget_residual_and_certificate():
    r = rng(9)
    g = r.standard_normal(6)
    cert = composite_argmin(LogBarrierSetup(), Simplex(6, 1.0),
                            SubproblemPart(linear=g), 2.0, np.full(6, 1 / 6),
                            target_delta_tilde=1e-8)
    assert abs(cert.solution.sum() - 1.0) <= 1e-12
    assert 0.0 <= cert.delta_tilde <= 1e-8


def test_power4_prox_stationarity():
    r = rng(10)
    g = r.standard_normal(5)
    anchor = 0.1 * r.standard_normal(5)
    setup = Power4Setup()
    cert = composite_argmin(setup, EuclideanBall(np.zeros(5), 100.0),
                            SubproblemPart(linear=g), 3.0, anchor)
    # interior solution: g + beta*(grad d(x) - grad d(anchor)) = 0
    resid = g + 3.0 * (setup.grad_d(cert.solution) - setup.grad_d(anchor))
    assert np.linalg.norm(resid) <= 1e-9


@pytest.mark.parametrize("setup,Q", [
    (EuclideanSetup(), EuclideanBall(np.zeros(2), 1.0)),
    (EntropySetup(), Simplex(3, 1.0)),
    (LogBarrierSetup(), Simplex(3, 1.0)),
])
def test_composite_argmin_against_grid_oracle(setup, Q):
    # Psi(x~) - Psi(x*) <= delta_tilde on low-dimensional instances
    r = rng(11)
    g = r.standard_normal(Q.dim)
    anchor = Q.interior_point()
    cert = composite_argmin(setup, Q, SubproblemPart(linear=g), 1.3, anchor,
                            target_delta_tilde=1e-6)

    def Psi(x):
        return float(g @ x) + 1.3 * setup.bregman(anchor, x)

    best = np.inf
    if isinstance(Q, Simplex):
        ts = np.linspace(1e-6, 1.0 - 2e-6, 701)
        for a in ts:
            for b in np.linspace(1e-6, 1.0 - a - 1e-6, 301):
                best = min(best, Psi(np.array([a, b, 1.0 - a - b])))
    else:
        for a in np.linspace(-1, 1, 801):
            m = np.sqrt(max(0.0, 1 - a * a))
            for b in np.linspace(-m, m, 401):
                best = min(best, Psi(np.array([a, b])))
    assert Psi(cert.solution) <= best + max(cert.delta_tilde, 1e-9)


def test_beta_zero_uses_linear_oracle():
    cert = mirror_argmin(EuclideanSetup(), Simplex(3, 1.0),
                         SubproblemPart(linear=np.array([2.0, 1.0, 3.0])),
                         0.0, np.zeros(3))
    assert np.array_equal(cert.solution, [0.0, 1.0, 0.0])
    assert cert.delta_tilde == 0.0


def test_beta_zero_without_structure_is_unbounded():
    with pytest.raises(UnboundedSubproblem):
        mirror_argmin(EuclideanSetup(), EuclideanBall(np.zeros(2), 1.0),
                      SubproblemPart(fn=lambda x: 0.0,
                                     subgrad=lambda x: np.zeros(2)),
                      0.0, np.zeros(2))


def test_generic_fallback_certifies_or_raises():
    # minimizer sits on the smooth side of the kink, so the certificate
    # can be driven below the target; a zero target is unreachable
    Q = EuclideanBall(np.zeros(2), 1.0)
    part = SubproblemPart(fn=lambda x: abs(x[0]),
                          subgrad=lambda x: np.array([np.sign(x[0]), 0.0]))
    cert = composite_argmin(EuclideanSetup(), Q, part, 2.0,
                            np.array([0.9, 0.1]), target_delta_tilde=1e-5)
    assert cert.delta_tilde <= 1e-5
    assert cert.solution[0] == pytest.approx(0.4, abs=1e-3)
    with pytest.raises(MaxInnerIterations):
        composite_argmin(EuclideanSetup(), Q, part, 2.0, np.array([0.9, 0.1]),
                         target_delta_tilde=0.0, inner_budget=1000)


def test_divergence_diameter_bounds():
    assert divergence_diameter_bound(
        EuclideanSetup(), EuclideanBall(np.zeros(3), 2.0)) == pytest.approx(8.0)
    assert divergence_diameter_bound(
        EuclideanSetup(), Simplex(5, 1.0)) == pytest.approx(1.0)
    with pytest.raises(mp.UnsupportedSet):
        divergence_diameter_bound(EntropySetup(), Simplex(5, 1.0))
    # the bound dominates sampled divergences
    Q = Simplex(5, 1.0)
    xs, ys = Q.sample(rng(12), 300), Q.sample(rng(13), 300)
    top = max(bregman(EuclideanSetup(), y, x) for x, y in zip(xs, ys))
    assert top <= 1.0 + 1e-12


def test_strongly_convex_setups_dominate_half_norm_sq():
    for setup, Q in SETUP_SETS:
        if not setup.strongly_convex_1:
            continue
        xs = interior_samples(setup, Q, 80, 14)
        ys = interior_samples(setup, Q, 80, 15)
        for x, y in zip(xs, ys):
            assert setup.bregman(y, x) >= 0.5 * setup.norm(x - y) ** 2 - 1e-10
