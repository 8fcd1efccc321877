"""Adaptive momentum (fast) gradient method with a norm-variant model.

The iteration keeps three sequences (x_k, y_k, u_k) coupled through the
accumulator A_k: alpha_{k+1} is the largest root of

    L_{k+1} alpha^2 = (A_k + alpha)(1 + A_k mu + A_k m),

y_{k+1} and x_{k+1} are convex combinations (so feasibility is free), and
u_{k+1} solves the mirror subproblem

    alpha psi(x, y_{k+1}) + (1 + A_k mu + A_k m) V[u_k](x)
        + alpha mu V[y_{k+1}](x).

Two extra modes reuse the same loop: conditional-gradient ("frank-wolfe")
mode replaces the subproblem with a linear minimization oracle, paying a
certified inexactness of 2 R_Q^2 per step with the error schedule
delta_k = eps * alpha_{k+1} / (4 A_{k+1}); restart mode wraps the solver
in distance-halving stages for relatively strongly convex objectives.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    ErrorBudgetViolated,
    InnerSolveFailed,
    LineSearchStalled,
    MaxInnerIterations,
    ProxNotStronglyConvex,
    UnsupportedSet,
)
from .gm import SolverRun
from .prox import SubproblemPart, divergence_diameter_bound, mirror_argmin
from .sets import as_point


@dataclass
class FGMConfig:
    L0: float = 1.0
    mu: float = 0.0
    m: float = 0.0
    delta_schedule: Optional[Callable[[int], float]] = None
    delta_tilde_schedule: Optional[Callable[[int], float]] = None
    delta_tilde: float = 1e-9
    max_iterations: int = 1000
    mode: str = "prox"                 # "prox" or "frank-wolfe"
    epsilon: Optional[float] = None    # target accuracy (drives the FW delta rule)
    max_linesearch_per_iter: int = 60
    zeta: float = 2.0
    a_target: Optional[float] = None   # stop once A_N reaches this value

    def __post_init__(self):
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")
        if self.mode not in ("prox", "frank-wolfe"):
            raise ValueError("mode must be 'prox' or 'frank-wolfe'")


def alpha_next(A_k, L_next, mu, m):
    """Largest root of L alpha^2 = (A_k + alpha)(1 + A_k mu + A_k m)."""
    if A_k < 0 or L_next <= 0:
        raise ValueError("need A_k >= 0 and L_next > 0")
    b = 1.0 + A_k * mu + A_k * m
    return (b + math.sqrt(b * b + 4.0 * L_next * b * A_k)) / (2.0 * L_next)


def fgm_growth_lower_bound(L_history, mu, m, N=None):
    """Accumulator lower bound max{1/4 (sum 1/sqrt(L))^2, product form}."""
    if N is None:
        N = len(L_history)
    Ls = L_history[:N]
    s = sum(1.0 / math.sqrt(L) for L in Ls)
    sum_form = 0.25 * s * s
    prod = 1.0 / Ls[0]
    for L in Ls[1:]:
        prod *= (1.0 + math.sqrt((mu + m) / (4.0 * L))) ** 2
    return max(sum_form, prod)


def _scaled_part(part, alpha):
    lin = None if part.linear is None else alpha * part.linear
    fn = None if part.fn is None else (lambda x: alpha * part.fn(x))
    sg = None if part.subgrad is None else (lambda x: alpha * part.subgrad(x))
    return SubproblemPart(linear=lin, composite=part.composite,
                          weight=alpha * part.weight, fn=fn, subgrad=sg)


def fgm_solve(model, setup, Q, x0, config, r_q_sq=None):
    """Run the adaptive momentum method; returns a :class:`SolverRun`.

    ``r_q_sq`` (sup of V over Q x Q) is required in conditional-gradient
    mode, where it prices the inexactness of the linear-oracle step.
    """
    if model.variant != "norm":
        raise ValueError("fgm_solve needs a norm-variant model")
    if not setup.strongly_convex_1:
        raise ProxNotStronglyConvex("the momentum method needs a 1-SC prox setup")
    fw = config.mode == "frank-wolfe"
    if fw:
        if r_q_sq is None or config.epsilon is None:
            raise ValueError("frank-wolfe mode needs r_q_sq and epsilon")

    x = as_point(x0).copy()
    if setup.needs_interior:
        x = Q.clamp_interior(x)
    u = x.copy()
    A = 0.0
    L = config.L0
    fx = model.f_delta(x)
    evals = 1

    iterates = [x.copy()]
    u_iters = [u.copy()]
    f_hist = [fx]
    L_hist, A_hist, alpha_hist = [], [], []
    delta_hist, cert_hist, trial_hist, evals_hist = [], [], [], []
    best_index, best_f = 0, np.inf
    stopped_by = "iterations"

    for k in range(config.max_iterations):
        if config.delta_schedule is not None:
            delta_k_base = config.delta_schedule(k)
        else:
            delta_k_base = model.delta
        if config.delta_tilde_schedule is not None:
            dt_target = config.delta_tilde_schedule(k)
        else:
            dt_target = config.delta_tilde

        Lt = L / config.zeta
        trials = 0
        while True:
            trials += 1
            alpha = alpha_next(A, Lt, config.mu, config.m)
            A1 = A + alpha
            y1 = (alpha * u + A * x) / A1
            fy = model.f_delta(y1)
            evals += 1
            part = model.part_at(y1)
            delta_k = config.epsilon * alpha / (4.0 * A1) if fw else delta_k_base

            if fw:
                if part.linear is None:
                    raise UnsupportedSet(
                        "conditional-gradient mode needs an affine model part"
                    )
                u1 = Q.lmo(part.linear)
                cert_dt = 2.0 * r_q_sq
            else:
                beta1 = 1.0 + A * config.mu + A * config.m
                beta2 = alpha * config.mu
                beta = beta1 + beta2
                G = setup.grad_d(u)
                if beta2 > 0.0:
                    G = (beta1 * G + beta2 * setup.grad_d(y1)) / beta
                try:
                    cert = mirror_argmin(setup, Q, _scaled_part(part, alpha),
                                         beta, G, target_delta_tilde=dt_target)
                except MaxInnerIterations as exc:
                    raise InnerSolveFailed(str(exc)) from exc
                u1 = cert.solution
                cert_dt = cert.delta_tilde

            x1 = (alpha * u1 + A * x) / A1
            ft = model.f_delta(x1)
            evals += 1
            rhs = fy + part.fn(x1) + 0.5 * Lt * setup.norm(x1 - y1) ** 2 + delta_k
            if ft <= rhs + 1e-12 * (1.0 + abs(fy) + abs(ft)):
                break
            if trials > config.max_linesearch_per_iter:
                raise LineSearchStalled(
                    f"momentum descent test failed {trials} times at iteration {k}"
                )
            Lt *= config.zeta

        x, u, A, L, fx = x1, u1, A1, Lt, ft
        if setup.needs_interior:
            x = Q.clamp_interior(x)
            u = Q.clamp_interior(u)
        iterates.append(x.copy())
        u_iters.append(u.copy())
        f_hist.append(fx)
        L_hist.append(L)
        A_hist.append(A)
        alpha_hist.append(alpha)
        delta_hist.append(delta_k)
        cert_hist.append(cert_dt)
        trial_hist.append(trials)
        evals_hist.append(evals)
        if fx < best_f:
            best_f, best_index = fx, len(iterates) - 1

        if fw and A >= 6.0 * r_q_sq * (k + 1) / config.epsilon:
            stopped_by = "fw_criterion"
            break
        if config.a_target is not None and A >= config.a_target:
            stopped_by = "a_target"
            break

    return SolverRun(
        iterates=iterates,
        f_delta_history=f_hist,
        L_history=L_hist,
        S=sum(1.0 / L for L in L_hist),
        linesearch_evals=evals,
        evals_history=evals_hist,
        best_index=best_index,
        delta=model.delta,
        cert_history=cert_hist,
        trial_history=trial_hist,
        A_history=A_hist,
        alpha_history=alpha_hist,
        delta_k_history=delta_hist,
        u_iterates=u_iters,
        mode=config.mode,
        stopped_by=stopped_by,
    )


def fgm_master_bound(run, v0):
    """Objective-gap bound V[u_0](x_*)/A_N + error accumulation terms."""
    A_N = run.A_history[-1]
    err = 2.0 * sum(a * d for a, d in zip(run.A_history, run.delta_k_history))
    return (v0 + err + sum(run.cert_history)) / A_N


def universal_fw_solve(model, Q, setup, x0, epsilon, L0=1.0, max_iterations=500000):
    """Projection-free universal solve: momentum + linear minimization oracle.

    Stops at the first N with A_N >= 6 R_Q^2 N / epsilon, which certifies
    f(x_N) - f_* <= 3 R_Q^2 N / A_N + epsilon/2 <= epsilon.
    """
    r_q_sq = divergence_diameter_bound(setup, Q)
    config = FGMConfig(L0=L0, mode="frank-wolfe", epsilon=epsilon,
                       max_iterations=max_iterations)
    run = fgm_solve(model, setup, Q, x0, config, r_q_sq=r_q_sq)
    run.extras["r_q_sq"] = r_q_sq
    run.extras["certified_gap"] = (
        3.0 * r_q_sq * run.iterations / run.A_history[-1] + epsilon / 2.0
    )
    return run


@dataclass
class FGMRestartRun:
    stage_runs: list
    stage_points: list      # x_0, x_after_stage_1, ...
    total_iterations: int
    epsilon: float

    @property
    def final_point(self):
        return self.stage_points[-1]

    @property
    def stages(self):
        return len(self.stage_runs)


def fgm_restart_solve(model, setup, Q, x0, R0_sq, epsilon, L_hint=None,
                      L0=1.0, delta_tilde=1e-9):
    """Distance-halving restarts for left relatively strongly convex objectives.

    Each stage runs the momentum method (with mu = m = 0 inside the stage)
    until its accumulator reaches A >= 2/mu, which halves the divergence to
    the minimizer; ceil(log2(mu R0^2 / eps)) stages reach the target.
    model.mu carries the left relative strong-convexity parameter.
    """
    mu = model.mu
    if mu <= 0:
        raise ValueError("restart scheme needs mu > 0")
    if (model.delta > 0 or delta_tilde > 0) and L_hint is not None:
        kappa = math.ceil(math.sqrt(L_hint / mu))
        budget = (4.0 * mu * math.sqrt(10.0) / L_hint) * (
            5.0 * model.delta * kappa**3 + delta_tilde * L_hint * kappa
        )
        if budget > epsilon:
            raise ErrorBudgetViolated(
                f"oracle errors too large: budget {budget:.3e} > epsilon {epsilon:.3e}"
            )

    n_stages = max(1, math.ceil(math.log2(mu * R0_sq / epsilon)))
    stage_cap = 10000
    if L_hint is not None:
        stage_cap = 10 * math.ceil(math.sqrt(10.0 * L_hint / mu)) + 10

    x = as_point(x0).copy()
    points = [x.copy()]
    runs = []
    total = 0
    L_carry = L0
    for _ in range(n_stages):
        cfg = FGMConfig(L0=L_carry, mu=0.0, m=0.0, delta_tilde=delta_tilde,
                        max_iterations=stage_cap, a_target=2.0 / mu)
        run = fgm_solve(model, setup, Q, x, cfg)
        x = run.final_point.copy()
        points.append(x.copy())
        runs.append(run)
        total += run.iterations
        L_carry = run.L_history[-1]
    return FGMRestartRun(stage_runs=runs, stage_points=points,
                         total_iterations=total, epsilon=epsilon)
