import numpy as np
import pytest

from modelprox import _kernels


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


@pytest.fixture(scope="module")
def both_paths():
    py = _kernels.python_impls()
    jit = _kernels.jitted_impls()
    if jit is None:
        pytest.skip("numba unavailable")
    return py, jit


def test_cubic_root_residuals(both_paths):
    py, jit = both_paths
    for s in (0.0, 1e-10, 0.3, 2.0, 1e4, 1e9):
        for impl in (py["cubic_root"], jit["cubic_root"]):
            r = impl(s)
            assert r >= 0
            assert abs(r**3 + r - s) <= 1e-9 * max(1.0, s)
    assert py["cubic_root"](2.0) == pytest.approx(1.0)


def test_quartic_kernels_agree_across_paths(both_paths):
    py, jit = both_paths
    r = rng(1)
    n = 12
    A = 0.95 + 0.1 * r.random((n, n))
    C = 0.95 + 0.1 * r.random((n, n))
    b = 0.95 + 0.1 * r.random(n)
    d = 0.95 + 0.1 * r.random(n)
    x = r.random(n) / n
    assert py["quartic_value"](A, b, C, d, x) == pytest.approx(
        jit["quartic_value"](A, b, C, d, x), rel=1e-12)
    assert np.allclose(py["quartic_grad"](A, b, C, d, x),
                       jit["quartic_grad"](A, b, C, d, x), rtol=1e-12)
    f_py, _, _, ev_py = py["quartic_adaptive_gm"](A, b, C, d, np.zeros(n),
                                                  1.0, 120, 2.0, 60, 1e2)
    f_jit, _, _, ev_jit = jit["quartic_adaptive_gm"](A, b, C, d, np.zeros(n),
                                                     1.0, 120, 2.0, 60, 1e2)
    assert ev_py == ev_jit
    assert f_py == pytest.approx(f_jit, rel=1e-9)


def test_quartic_adaptive_gm_descends(both_paths):
    py, _ = both_paths
    r = rng(2)
    n = 10
    A = 0.95 + 0.1 * r.random((n, n))
    C = 0.95 + 0.1 * r.random((n, n))
    b = 0.95 + 0.1 * r.random(n)
    d = 0.95 + 0.1 * r.random(n)
    f0 = py["quartic_value"](A, b, C, d, np.zeros(n))
    fN, xN, _, _ = py["quartic_adaptive_gm"](A, b, C, d, np.zeros(n),
                                             1.0, 400, 2.0, 60, 1e2)
    assert fN < f0
    g = py["quartic_grad"](A, b, C, d, xN)
    assert np.linalg.norm(g) < 1.0


def test_rs_prox_kkt_and_budget(both_paths):
    py, jit = both_paths
    r = rng(3)
    n = 30
    caps = np.full(n, np.sqrt(3) / 2)
    budget = n / 2.0
    z = np.clip(r.random(n) * 0.8, 0.05, 0.8)
    G = 1.0 / (1.0 - z) ** 2
    c = r.standard_normal(n)
    beta = 0.7
    x_py, lam_py = py["rs_prox"](c, G, caps, budget, beta)
    x_jit, lam_jit = jit["rs_prox"](c, G, caps, budget, beta)
    assert np.array_equal(x_py, x_jit)
    assert abs(x_py.sum() - budget) <= 1e-11 * max(1.0, budget)
    # interior coordinates satisfy the stationarity system exactly
    interior = (x_py > 1e-12) & (x_py < caps - 1e-12)
    resid = c + beta * (1.0 / (1.0 - x_py) ** 2 - G) + lam_py
    assert np.max(np.abs(resid[interior])) <= 1e-9
    # clipped coordinates satisfy the complementary sign conditions
    assert np.all(resid[x_py <= 1e-12] >= -1e-9)
    assert np.all(resid[x_py >= caps - 1e-12] <= 1e-9)


def test_logbar_prox_budget_and_sign(both_paths):
    py, jit = both_paths
    r = rng(4)
    for scale in (1.0, 2.5):
        t = r.standard_normal(20)
        x_py, _ = py["logbar_simplex_prox"](t, scale)
        x_jit, _ = jit["logbar_simplex_prox"](t, scale)
        assert np.array_equal(x_py, x_jit)
        assert abs(x_py.sum() - scale) <= 1e-11 * max(1.0, scale)
        assert np.all(x_py > 0)


def test_env_flag_selects_python_path(tmp_path):
    import subprocess
    import sys

    code = ("import modelprox._kernels as k; "
            "print(k.NUMBA_ENABLED, k.rs_prox is k.python_impls()['rs_prox'])")
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"PATH": "/usr/bin:/bin", "MODELPROX_DISABLE_NUMBA": "1",
             "HOME": str(tmp_path)},
        capture_output=True, text=True, cwd="/root/pkg",
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.split() == ["False", "True"]
