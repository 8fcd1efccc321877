"""Adaptive gradient method driven by a (delta, L, mu, m, V)-model.

Each iteration finds the smallest integer i_k >= 0 such that the accepted
point x_{k+1}, the certified inexact argmin of

    phi_{k+1}(x) = psi_delta(x, x_k) + L_{k+1} V[x_k](x),

passes the model descent test

    f_delta(x_{k+1}) <= f_delta(x_k) + psi_delta(x_{k+1}, x_k)
                        + L_{k+1} V[x_k](x_{k+1}) + delta,

with L_{k+1} = zeta^(i_k - 1) L_k (the stepsize may grow between
iterations) or zeta^(i_k) L_k in the non-increasing-stepsize arm.  The
companion bound of the convergence theorem is accumulated alongside the
run when a divergence bound V[x_0](x_*) is supplied.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InnerSolveFailed, LineSearchStalled, MaxInnerIterations
from .prox import composite_argmin


@dataclass
class GMConfig:
    L0: float = 1.0
    delta_tilde: float = 1e-9          # inner-solve certification target
    max_iterations: int = 1000
    max_linesearch_per_iter: int = 60  # 0 switches to the fixed-L arm
    zeta: float = 2.0                  # line-search base, > 1
    non_increasing: bool = False       # L_{k+1} = zeta^{i_k} L_k comparison arm
    v0_bound: Optional[float] = None   # upper bound on V[x_0](x_*)
    target_epsilon: Optional[float] = None

    def __post_init__(self):
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")
        if self.zeta <= 1:
            raise ValueError("zeta must exceed 1")


@dataclass
class SolverRun:
    """Full trace of one solve (shared by the plain and momentum methods)."""

    iterates: list
    f_delta_history: list
    L_history: list
    S: float
    linesearch_evals: int
    evals_history: list
    best_index: int
    delta: float
    cert_history: list
    trial_history: list
    bound_history: Optional[list] = None
    divergence_to_ref: Optional[list] = None
    # momentum-method extras
    A_history: Optional[list] = None
    alpha_history: Optional[list] = None
    delta_k_history: Optional[list] = None
    u_iterates: Optional[list] = None
    mode: Optional[str] = None
    stopped_by: str = "iterations"
    extras: dict = field(default_factory=dict)

    @property
    def best_point(self):
        return self.iterates[self.best_index]

    @property
    def final_point(self):
        return self.iterates[-1]

    @property
    def delta_tilde_max(self):
        return max(self.cert_history) if self.cert_history else 0.0

    @property
    def iterations(self):
        return len(self.L_history)

    def to_csv(self, path):
        cols = ["k", "f_delta", "L_k", "V_to_ref_if_known", "bound_rhs",
                "cumulative_model_evals"]
        momentum = self.A_history is not None
        if momentum:
            cols += ["A_k", "alpha_k", "delta_k", "mode"]
        lines = [",".join(cols)]
        for k in range(1, len(self.iterates)):
            row = [
                str(k),
                _fmt(self.f_delta_history[k]),
                _fmt(self.L_history[k - 1]),
                _fmt(self.divergence_to_ref[k]) if self.divergence_to_ref else "",
                _fmt(self.bound_history[k - 1]) if self.bound_history else "",
                str(self.evals_history[k - 1]),
            ]
            if momentum:
                row += [
                    _fmt(self.A_history[k - 1]),
                    _fmt(self.alpha_history[k - 1]),
                    _fmt(self.delta_k_history[k - 1]),
                    self.mode or "",
                ]
            lines.append(",".join(row))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def _fmt(v):
    return f"{float(v):.17g}"


def gm_bound_value(L_history, mu, m, V0, delta, delta_tilde):
    """Right-hand side of the objective bound after len(L_history) steps."""
    harm = 0.0
    qprod = 1.0
    for L in L_history:
        harm += 1.0 / (L + m)
        qprod *= (L - mu) / (L + m) if L > mu else 0.0
    L_N = L_history[-1]
    return min((L_N + m) * qprod, 1.0 / harm) * V0 + delta_tilde + 3.0 * delta


def gm_theoretical_bound(run, model, V0):
    """Evaluate the convergence-theorem bound for a completed run."""
    return gm_bound_value(run.L_history, model.mu, model.m, V0, run.delta,
                          run.delta_tilde_max)


def gm_solve(model, setup, Q, x0, config, ref_point=None):
    """Run the adaptive gradient method; returns the full :class:`SolverRun`.

    Parameters
    ----------
    model : ObjectiveModel
        Must be the "V" variant (divergence-based upper bound).
    setup, Q : prox setup and feasible set shared by all inner steps.
    x0 : starting point, in the relative interior of Q.
    config : GMConfig
    ref_point : optional known reference solution; when given, the run
        tracks V[x_k](ref) per iteration.
    """
    if model.variant != "V":
        raise ValueError("gm_solve needs a V-variant model")
    x = np.asarray(x0, dtype=np.float64).copy()
    if setup.needs_interior:
        x = Q.clamp_interior(x)
    delta = model.delta
    fx = model.f_delta(x)
    evals = 1

    iterates = [x.copy()]
    f_hist = [fx]
    L_hist, cert_hist, trial_hist, evals_hist = [], [], [], []
    bound_hist = [] if config.v0_bound is not None else None
    div_hist = [setup.bregman(x, ref_point)] if ref_point is not None else None
    S = 0.0
    harm = 0.0
    qprod = 1.0
    L = config.L0
    best_index = 0
    best_f = np.inf
    stopped_by = "iterations"

    fixed = config.max_linesearch_per_iter == 0
    for k in range(config.max_iterations):
        part = model.part_at(x)
        Lt = L if (fixed or config.non_increasing) else L / config.zeta
        trials = 0
        while True:
            trials += 1
            try:
                cert = composite_argmin(setup, Q, part, Lt, x,
                                        target_delta_tilde=config.delta_tilde)
            except MaxInnerIterations as exc:
                raise InnerSolveFailed(str(exc)) from exc
            xt = cert.solution
            ft = model.f_delta(xt)
            evals += 1
            if fixed:
                break
            rhs = fx + part.fn(xt) + Lt * setup.bregman(x, xt) + delta
            if ft <= rhs + 1e-12 * (1.0 + abs(fx) + abs(ft)):
                break
            if trials > config.max_linesearch_per_iter:
                raise LineSearchStalled(
                    f"descent test failed {trials} times at iteration {k}"
                )
            Lt *= config.zeta

        x = xt if not setup.needs_interior else Q.clamp_interior(xt)
        fx = ft
        L = Lt
        S += 1.0 / L
        harm += 1.0 / (L + model.m)
        qprod *= (L - model.mu) / (L + model.m) if L > model.mu else 0.0

        iterates.append(x.copy())
        f_hist.append(fx)
        L_hist.append(L)
        cert_hist.append(cert.delta_tilde)
        trial_hist.append(trials)
        evals_hist.append(evals)
        if div_hist is not None:
            div_hist.append(setup.bregman(x, ref_point))
        if fx < best_f:
            best_f = fx
            best_index = len(iterates) - 1
        if bound_hist is not None:
            dt_max = max(cert_hist)
            b = min((L + model.m) * qprod, 1.0 / harm) * config.v0_bound \
                + dt_max + 3.0 * delta
            bound_hist.append(b)
            if config.target_epsilon is not None and b <= config.target_epsilon:
                stopped_by = "bound"
                break

    return SolverRun(
        iterates=iterates,
        f_delta_history=f_hist,
        L_history=L_hist,
        S=S,
        linesearch_evals=evals,
        evals_history=evals_hist,
        best_index=best_index,
        delta=delta,
        cert_history=cert_hist,
        trial_history=trial_hist,
        bound_history=bound_hist,
        divergence_to_ref=div_hist,
        stopped_by=stopped_by,
    )


def gm_oracle_budget(run, L0, zeta=2.0):
    """The line-search accounting bound on total model evaluations."""
    L_hat = max(run.L_history)
    return 2 * run.iterations + math.log2(2.0 * L_hat / L0) / math.log2(zeta)
