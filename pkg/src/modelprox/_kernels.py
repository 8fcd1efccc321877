"""Hot numeric kernels: numba-jitted by default, pure numpy otherwise.

The jitted path is selected at import time unless the environment variable
``MODELPROX_DISABLE_NUMBA`` is set to 1/true/yes (or numba is missing), in
which case the same source functions run as plain Python/numpy.  Use
``python -m modelprox.kernel_bench`` to time the two paths side by side.
"""

import math
import os

import numpy as np

_FLAG = os.environ.get("MODELPROX_DISABLE_NUMBA", "0").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes")
NUMBA_ENABLED = False
if NUMBA_REQUESTED:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def _build(wrap):
    """Construct the kernel set under a decorator (numba njit or identity)."""

    @wrap
    def cubic_root(s):
        # unique real root of r^3 + r = s for s >= 0, Cardano + Newton polish
        disc = math.sqrt(0.25 * s * s + 1.0 / 27.0)
        r = np.cbrt(0.5 * s + disc) + np.cbrt(0.5 * s - disc)
        for _ in range(3):
            fr = r * r * r + r - s
            fp = 3.0 * r * r + 1.0
            r -= fr / fp
        if r < 0.0:
            r = 0.0
        return r

    @wrap
    def quartic_value(A, b, C, d, x):
        r = np.dot(A, x) - b
        q = np.dot(C, x) - d
        s4 = 0.0
        for i in range(r.shape[0]):
            s4 += r[i] * r[i] * r[i] * r[i]
        return 0.25 * s4 + 0.5 * np.dot(q, q)

    @wrap
    def quartic_grad(A, b, C, d, x):
        r = np.dot(A, x) - b
        q = np.dot(C, x) - d
        r3 = r * r * r
        return np.dot(A.T, r3) + np.dot(C.T, q)

    @wrap
    def quartic_adaptive_gm(A, b, C, d, x0, L0, n_iters, zeta, max_ls, radius):
        # adaptive Bregman gradient steps for the quartic objective relative
        # to h(x) = 0.25 ||x||^4 + 0.5 ||x||^2, feasible set = ball(0, radius)
        n = x0.shape[0]
        x = x0.copy()
        fx = quartic_value(A, b, C, d, x)
        f_best = fx
        x_best = x.copy()
        L = L0
        evals = 1
        for _ in range(n_iters):
            g = quartic_grad(A, b, C, d, x)
            xsq = np.dot(x, x)
            hx = 0.25 * xsq * xsq + 0.5 * xsq
            gh = (1.0 + xsq) * x  # grad h at x
            Lt = L / zeta
            accepted = False
            xt = x
            ft = fx
            for _trial in range(max_ls + 1):
                s = gh - g / Lt
                snorm = math.sqrt(np.dot(s, s))
                if snorm == 0.0:
                    xt = np.zeros(n)
                else:
                    rho = cubic_root(snorm)
                    if rho > radius:
                        rho = radius
                    xt = (rho / snorm) * s
                ft = quartic_value(A, b, C, d, xt)
                evals += 1
                xtsq = np.dot(xt, xt)
                hxt = 0.25 * xtsq * xtsq + 0.5 * xtsq
                breg = hxt - hx - np.dot(gh, xt - x)
                lin = np.dot(g, xt - x)
                guard = 1e-12 * (1.0 + abs(fx) + abs(ft))
                if ft <= fx + lin + Lt * breg + guard:
                    accepted = True
                    break
                Lt *= zeta
            if not accepted:
                break
            x = xt
            fx = ft
            L = Lt
            if fx < f_best:
                f_best = fx
                x_best = x.copy()
        return f_best, x_best, L, evals

    @wrap
    def rs_prox(c, G, caps, budget, beta):
        # argmin <c,x> + beta*(d(x) - <G,x>) over {0 <= x <= caps, sum = budget}
        # with d(x) = sum 1/(1 - x_i); the coordinate KKT system inverts to
        # x_i(lam) = clip(1 - s_i^{-1/2}, 0, caps_i), s_i = G_i - (c_i+lam)/beta,
        # and a safeguarded bisection matches the budget to 1e-12.
        n = c.shape[0]
        x = np.empty(n)

        def fill(lam):
            total = 0.0
            for i in range(n):
                s = G[i] - (c[i] + lam) / beta
                if s <= 1.0:
                    xi = 0.0
                else:
                    xi = 1.0 - 1.0 / math.sqrt(s)
                    if xi > caps[i]:
                        xi = caps[i]
                x[i] = xi
                total += xi
            return total

        lam_lo = -1.0
        for _ in range(200):
            if fill(lam_lo) >= budget:
                break
            lam_lo = 2.0 * lam_lo - 1.0
        lam_hi = 1.0
        for _ in range(200):
            if fill(lam_hi) <= budget:
                break
            lam_hi = 2.0 * lam_hi + 1.0
        lam = 0.5 * (lam_lo + lam_hi)
        for _ in range(200):
            lam = 0.5 * (lam_lo + lam_hi)
            r = fill(lam) - budget
            if abs(r) <= 1e-12 * max(1.0, budget):
                break
            if r > 0.0:
                lam_lo = lam
            else:
                lam_hi = lam
        fill(lam)
        return x, lam

    @wrap
    def logbar_simplex_prox(t, scale):
        # coordinate KKT system x_i = 1/(t_i + lam), sum x_i = scale, solved
        # by safeguarded bisection with bracket expansion by doubling and
        # residual tolerance 1e-12 on the budget constraint.
        n = t.shape[0]
        tmin = t[0]
        for i in range(1, n):
            if t[i] < tmin:
                tmin = t[i]
        lam_min = -tmin

        def total(lam):
            s = 0.0
            for i in range(n):
                s += 1.0 / (t[i] + lam)
            return s

        eps = max(1.0, abs(lam_min))
        lo = lam_min + eps
        for _ in range(400):
            if total(lo) >= scale:
                break
            eps *= 0.5
            lo = lam_min + eps
        hi = lam_min + max(1.0, abs(lam_min))
        for _ in range(200):
            if total(hi) <= scale:
                break
            hi = lam_min + 2.0 * (hi - lam_min)
        if lo > hi:
            lo = lam_min + (hi - lam_min) * 0.5
        lam = 0.5 * (lo + hi)
        for _ in range(300):
            lam = 0.5 * (lo + hi)
            r = total(lam) - scale
            if abs(r) <= 1e-12 * max(1.0, scale):
                break
            if r > 0.0:
                lo = lam
            else:
                hi = lam
        x = np.empty(n)
        for i in range(n):
            x[i] = 1.0 / (t[i] + lam)
        return x, lam

    return {
        "cubic_root": cubic_root,
        "quartic_value": quartic_value,
        "quartic_grad": quartic_grad,
        "quartic_adaptive_gm": quartic_adaptive_gm,
        "rs_prox": rs_prox,
        "logbar_simplex_prox": logbar_simplex_prox,
    }


def _identity(fn):
    return fn


_PY_KERNELS = _build(_identity)
_JIT_KERNELS = None
if NUMBA_ENABLED:
    _JIT_KERNELS = _build(_njit(cache=True))

_ACTIVE = _JIT_KERNELS if NUMBA_ENABLED else _PY_KERNELS

cubic_root = _ACTIVE["cubic_root"]
quartic_value = _ACTIVE["quartic_value"]
quartic_grad = _ACTIVE["quartic_grad"]
quartic_adaptive_gm = _ACTIVE["quartic_adaptive_gm"]
rs_prox = _ACTIVE["rs_prox"]
logbar_simplex_prox = _ACTIVE["logbar_simplex_prox"]


def python_impls():
    """The plain-Python variants, regardless of the env flag."""
    return dict(_PY_KERNELS)


def jitted_impls():
    """The jitted variants (compiled on demand; None when numba is missing)."""
    global _JIT_KERNELS
    if _JIT_KERNELS is None:
        try:
            from numba import njit
        except ImportError:
            return None
        _JIT_KERNELS = _build(njit(cache=True))
    return dict(_JIT_KERNELS)
