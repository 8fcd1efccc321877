"""Generalized extragradient (Mirror-Prox) solvers for abstract VIs.

Each iteration takes two certified prox steps from the current point z_k,

    w_k    ~ argmin psi(x, z_k) + L_{k+1} V[z_k](x)
    z_{k+1} ~ argmin psi(x, w_k) + L_{k+1} V[z_k](x),

accepting the smallest L_{k+1} = 2^(i_k - 1) L_k that passes the two-point
smoothness test; the answer is the 1/L-weighted average of the w_k and the
run stops once S_N = sum 1/L_{k+1} clears the supplied divergence budget
over epsilon.  A restart wrapper adds linear convergence for strongly
monotone models by halving a distance bound stage by stage.
"""

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    GapNotComputable,
    InnerSolveFailed,
    IterationBudgetExceeded,
    LineSearchStalled,
    MaxInnerIterations,
    OmegaMissing,
)
from .prox import mirror_argmin
from .sets import ProductSet, as_point


@dataclass
class MPConfig:
    epsilon: float = 1e-2
    delta: Optional[float] = None       # line-search slack; defaults to model.delta
    delta_tilde: float = 1e-9           # inner certification target
    L0: float = 1.0
    divergence_bound: Optional[float] = None  # max_x V[z_0](x) for the stop rule
    non_increasing: bool = False        # L_{k+1} = 2^{i_k} L_k comparison arm
    fixed_L: Optional[float] = None     # non-adaptive arm
    max_iterations: int = 200_000
    s_target: Optional[float] = None    # overrides divergence_bound/epsilon
    allow_censor: bool = False          # return a censored run instead of raising
    max_linesearch_per_iter: int = 60
    record_wallclock: bool = True

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")


@dataclass
class MPRun:
    z_iterates: list
    w_iterates: list
    L_history: list
    S_history: list
    averaged_point: np.ndarray
    cert_history: list
    trial_history: list
    operator_evals: int
    evals_history: list
    wallclock_ns: list
    delta: float
    censored: bool = False
    gap_estimate: Optional[float] = None
    gap_exact: bool = False
    stage: Optional[int] = None
    extras: dict = field(default_factory=dict)

    @property
    def S_N(self):
        return self.S_history[-1] if self.S_history else 0.0

    @property
    def iterations(self):
        return len(self.L_history)

    @property
    def delta_tilde_max(self):
        return max(self.cert_history) if self.cert_history else 0.0

    def iterations_to_reach(self, s_value):
        """First iteration count with S_N >= s_value (None if never reached)."""
        for i, s in enumerate(self.S_history):
            if s >= s_value:
                return i + 1
        return None

    def to_csv(self, path, zero_timing=False):
        lines = ["k,L_k,S_k,gap_estimate_if_any,wallclock_ns"]
        n = len(self.L_history)
        for k in range(n):
            gap = ""
            if k == n - 1 and self.gap_estimate is not None:
                gap = f"{self.gap_estimate:.17g}"
            ns = 0 if zero_timing else self.wallclock_ns[k]
            lines.append(
                f"{k},{self.L_history[k]:.17g},{self.S_history[k]:.17g},{gap},{ns}"
            )
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def mirror_prox_solve(vi, setup, Q, config, z0=None):
    """Run the adaptive extragradient loop until S_N clears its target.

    ``z0`` defaults to argmin_Q d.  The stopping threshold is
    ``config.s_target`` when given, else divergence_bound / epsilon.
    """
    s_target = config.s_target
    if s_target is None:
        if config.divergence_bound is None:
            raise ValueError("need divergence_bound (or s_target) for the stop rule")
        s_target = config.divergence_bound / config.epsilon
    delta = vi.delta if config.delta is None else config.delta

    z = as_point(z0).copy() if z0 is not None else setup.argmin_d(Q)
    if setup.needs_interior:
        z = Q.clamp_interior(z)

    z_hist = [z.copy()]
    w_hist, L_hist, S_hist = [], [], []
    cert_hist, trial_hist, evals_hist, clock_hist = [], [], [], []
    avg_num = np.zeros_like(z)
    S = 0.0
    L = config.fixed_L if config.fixed_L is not None else config.L0
    op_evals = 0
    censored = False
    t0 = time.perf_counter_ns()

    fixed = config.fixed_L is not None
    while True:
        if len(L_hist) >= config.max_iterations:
            if config.allow_censor:
                censored = True
                break
            raise IterationBudgetExceeded(
                f"S_N = {S:.6g} < target {s_target:.6g} after {len(L_hist)} iterations"
            )
        part_z = vi.part_at(z)
        op_evals += 1
        Gz = setup.grad_d(z)
        Lt = L if (fixed or config.non_increasing) else L / 2.0
        trials = 0
        while True:
            trials += 1
            try:
                w_cert = mirror_argmin(setup, Q, part_z, Lt, Gz,
                                       target_delta_tilde=config.delta_tilde)
                w = w_cert.solution
                if setup.needs_interior:
                    w = Q.clamp_interior(w)
                part_w = vi.part_at(w)
                op_evals += 1
                z_cert = mirror_argmin(setup, Q, part_w, Lt, Gz,
                                       target_delta_tilde=config.delta_tilde)
            except MaxInnerIterations as exc:
                raise InnerSolveFailed(str(exc)) from exc
            z1 = z_cert.solution
            if fixed:
                break
            lhs = part_z.fn(z1)
            rhs = (part_w.fn(z1) + part_z.fn(w)
                   + Lt * (setup.bregman(z, w) + setup.bregman(w, z1)) + delta)
            if lhs <= rhs + 1e-12 * (1.0 + abs(lhs) + abs(rhs)):
                break
            if trials > config.max_linesearch_per_iter:
                raise LineSearchStalled(
                    f"two-point test failed {trials} times at iteration {len(L_hist)}"
                )
            Lt *= 2.0

        z = z1 if not setup.needs_interior else Q.clamp_interior(z1)
        L = Lt
        S += 1.0 / Lt
        avg_num += w / Lt
        z_hist.append(z.copy())
        w_hist.append(w.copy())
        L_hist.append(Lt)
        S_hist.append(S)
        cert_hist.append(max(w_cert.delta_tilde, z_cert.delta_tilde))
        trial_hist.append(trials)
        evals_hist.append(op_evals)
        clock_hist.append(time.perf_counter_ns() - t0 if config.record_wallclock else 0)
        if S >= s_target:
            break

    # the averaged-point guarantee needs L0 <= 2L; estimate L from the
    # accepted levels after the warm-up descent from L0
    if not fixed and L_hist and config.L0 > 2.0 * max(L_hist[len(L_hist) // 2:]):
        warnings.warn(
            "L0 exceeds twice the accepted smoothness levels; the "
            "averaged-point guarantee assumes L0 <= 2L",
            stacklevel=2,
        )

    return MPRun(
        z_iterates=z_hist,
        w_iterates=w_hist,
        L_history=L_hist,
        S_history=S_hist,
        averaged_point=avg_num / S if S > 0 else z.copy(),
        cert_history=cert_hist,
        trial_history=trial_hist,
        operator_evals=op_evals,
        evals_history=evals_hist,
        wallclock_ns=clock_hist,
        delta=delta,
        censored=censored,
    )


def mp_gap_bound(run, L_upper, divergence_bound):
    """Averaged-point restricted-gap bound 2 L B / N + 3 delta + 2 delta~."""
    return (2.0 * L_upper * divergence_bound / run.iterations
            + 3.0 * run.delta + 2.0 * run.delta_tilde_max)


def saddle_solve(saddle, setup, Q, config, z0=None, gap_starts=10,
                 gap_iterations=400, rng_seed=1234):
    """Mirror-Prox on a saddle model, plus a duality-gap evaluation.

    The gap at the averaged point uses the model's closed-form oracle when
    present (gap_exact=True); otherwise a multi-start projected-subgradient
    estimate over each block.  Raises GapNotComputable when neither path is
    available.
    """
    run = mirror_prox_solve(saddle.vi, setup, Q, config, z0=z0)
    u_hat, v_hat = saddle.parts(run.averaged_point)
    if saddle.gap_oracle is not None:
        gap, exact = saddle.gap_oracle(u_hat, v_hat)
    else:
        gap, exact = _estimate_gap(saddle, Q, u_hat, v_hat, gap_starts,
                                   gap_iterations, rng_seed)
    run.gap_estimate = float(gap)
    run.gap_exact = bool(exact)
    return run


def _estimate_gap(saddle, Q, u_hat, v_hat, starts, iters, rng_seed):
    if not isinstance(Q, ProductSet) or len(Q.blocks) != 2:
        raise GapNotComputable("gap estimation needs a two-block product set")
    Qu, Qv = Q.blocks
    n1 = saddle.split[0]
    rng = np.random.Generator(np.random.Philox(rng_seed))

    def block_grad(u, v):
        # grad_tilde convention: first block subgradient of f in u,
        # second block the negated subgradient in v
        g = saddle.vi.part_at(np.concatenate([u, v])).linear
        return g[:n1], -g[n1:]

    best_max = -np.inf
    for v0 in np.vstack([Qv.sample(rng, starts), v_hat[None, :]]):
        v = v0.copy()
        for t in range(1, iters + 1):
            _, gv = block_grad(u_hat, v)
            v = Qv.project(v + (1.0 / math.sqrt(t)) * gv)
            best_max = max(best_max, saddle.f_saddle(u_hat, v))
        best_max = max(best_max, saddle.f_saddle(u_hat, v))
    best_min = np.inf
    for u0 in np.vstack([Qu.sample(rng, starts), u_hat[None, :]]):
        u = u0.copy()
        for t in range(1, iters + 1):
            gu, _ = block_grad(u, v_hat)
            u = Qu.project(u - (1.0 / math.sqrt(t)) * gu)
            best_min = min(best_min, saddle.f_saddle(u, v_hat))
        best_min = min(best_min, saddle.f_saddle(u, v_hat))
    return best_max - best_min, False


@dataclass
class RestartConfig:
    # mu may carry mu + m when the model part is additionally m-strongly
    # convex; the stage arithmetic is unchanged
    mu: float
    R0_sq: float
    epsilon: float
    Omega: Optional[float] = None      # defaults to the setup's unit-ball bound

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.R0_sq <= 0 or self.epsilon <= 0:
            raise ValueError("R0_sq and epsilon must be positive")


@dataclass
class RestartMPRun:
    stage_runs: list
    stage_points: list
    R_sq_history: list
    total_inner_iterations: int

    @property
    def final_point(self):
        return self.stage_points[-1]

    @property
    def stages(self):
        return len(self.stage_runs)

    def to_csv(self, path, zero_timing=False):
        lines = ["stage,R_p_sq,stage_iterations,L_max,wallclock_ns"]
        for p, run in enumerate(self.stage_runs):
            ns = 0 if zero_timing else (run.wallclock_ns[-1] if run.wallclock_ns else 0)
            lines.append(
                f"{p},{self.R_sq_history[p]:.17g},{run.iterations},"
                f"{max(run.L_history):.17g},{ns}"
            )
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def restarted_mirror_prox(vi, setup, Q, x0, rc, mp):
    """Stagewise distance halving for mu-strongly delta-monotone models.

    Stage p replays the extragradient loop with the rescaled setup
    d_p(x) = R_p^2 d((x - x_p)/R_p) until sum 1/L_{k+1} >= Omega/mu, then
    updates R_{p+1}^2 = R_0^2 2^-(p+1) + 2(1 - 2^-(p+1))(delta + 2 delta~)/mu.
    """
    omega = rc.Omega if rc.Omega is not None else setup.omega_bound
    if omega is None:
        raise OmegaMissing("restarting needs a unit-ball bound on d")
    delta = vi.delta if mp.delta is None else mp.delta

    x = Q.project(as_point(x0))
    R_sq = float(rc.R0_sq)
    points = [x.copy()]
    R_hist = [R_sq]
    runs = []
    total = 0
    p = 0
    max_p = math.log2(rc.R0_sq / rc.epsilon)
    while p <= max_p:
        stage_setup = setup.rescaled(x, math.sqrt(R_sq))
        stage_cfg = replace(mp, s_target=omega / rc.mu, divergence_bound=None)
        run = mirror_prox_solve(vi, stage_setup, Q, stage_cfg, z0=x)
        run.stage = p
        x = Q.project(run.averaged_point)
        dt = run.delta_tilde_max
        R_sq = rc.R0_sq * 2.0 ** (-(p + 1)) + 2.0 * (1.0 - 2.0 ** (-(p + 1))) * (
            delta + 2.0 * dt
        ) / rc.mu
        points.append(x.copy())
        R_hist.append(R_sq)
        runs.append(run)
        total += run.iterations
        p += 1
    return RestartMPRun(stage_runs=runs, stage_points=points,
                        R_sq_history=R_hist, total_inner_iterations=total)
