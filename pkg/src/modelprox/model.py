"""Inexact two-point models of objectives, VI operators and saddle functions.

A model is the pair (f_delta, psi_delta) with declared error delta and
convexity parameters (mu, m).  The constructors below cover the standard
ways of building one (plain gradients, composite objectives, monotone
operators, convex-concave saddles); :func:`validate_model` turns every
definitional inequality into a sampled check with an explicit tolerance.

Models are immutable; their callables must be safe for concurrent
read-only invocation.
"""

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GroundTruthRequired
from .prox import SubproblemPart


@dataclass(frozen=True)
class ObjectiveModel:
    """(delta, L, mu, m, V)-style model of an objective.

    ``variant`` selects the upper-bound geometry: "V" compares against
    L*V[y](x) (gradient-method model), "norm" against L/2 ||x-y||^2
    (momentum-method model).  L itself is never stored: the adaptive
    solvers discover it and the validators take a candidate per call.
    """

    f_delta: Callable[[np.ndarray], float]
    psi: Callable[[np.ndarray, np.ndarray], float]
    psi_subgrad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    part_at: Callable[[np.ndarray], SubproblemPart]
    delta: float = 0.0
    mu: float = 0.0
    m: float = 0.0
    variant: str = "V"

    def __post_init__(self):
        if self.variant not in ("V", "norm"):
            raise ValueError("variant must be 'V' or 'norm'")


@dataclass(frozen=True)
class VIModel:
    """Abstract-VI model: evaluator of psi_delta with declared (delta, mu)."""

    psi: Callable[[np.ndarray, np.ndarray], float]
    psi_subgrad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    part_at: Callable[[np.ndarray], SubproblemPart]
    delta: float = 0.0
    mu: float = 0.0
    psi_true: Optional[Callable] = None
    smoothness: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SaddleModel:
    """VI model of a convex-concave saddle function, plus the function itself."""

    vi: VIModel
    f_saddle: Callable[[np.ndarray, np.ndarray], float]
    split: tuple
    gap_oracle: Optional[Callable] = None  # (u, v) -> (gap, exact_flag)

    @property
    def psi(self):
        return self.vi.psi

    @property
    def delta(self):
        return self.vi.delta

    def parts(self, x):
        n1 = self.split[0]
        return x[:n1], x[n1:]


def model_from_gradient(f, grad_f, delta=0.0, mu=0.0, variant="V"):
    """The plain linearization model psi(x, y) = <grad f(y), x - y>."""

    def psi(x, y):
        return float(grad_f(y) @ (x - y))

    def psi_subgrad(x, y):
        return grad_f(y)

    def part_at(y):
        g = grad_f(y)
        return SubproblemPart(
            linear=g, fn=lambda x: float(g @ (x - y)), subgrad=lambda x: g
        )

    return ObjectiveModel(
        f_delta=lambda x: float(f(x)),
        psi=psi,
        psi_subgrad=psi_subgrad,
        part_at=part_at,
        delta=delta,
        mu=mu,
        m=0.0,
        variant=variant,
    )


def model_composite(g, grad_g, h, h_subgrad, m_h, composite=None,
                    composite_weight=0.0, delta=0.0, mu=0.0, variant="V"):
    """Composite model psi(x, y) = <grad g(y), x - y> + h(x) - h(y).

    ``composite``/``composite_weight`` describe h to the prox solvers when it
    matches a structured term they know ("entropy" for weight*sum x log x);
    otherwise prox steps fall back to the generic certified solver.
    """

    def f_delta(x):
        return float(g(x)) + float(h(x))

    def psi(x, y):
        return float(grad_g(y) @ (x - y)) + float(h(x)) - float(h(y))

    def psi_subgrad(x, y):
        return grad_g(y) + h_subgrad(x)

    def part_at(y):
        gy = grad_g(y)
        hy = float(h(y))
        return SubproblemPart(
            linear=gy,
            composite=composite,
            weight=composite_weight,
            fn=lambda x: float(gy @ (x - y)) + float(h(x)) - hy,
            subgrad=lambda x: gy + h_subgrad(x),
        )

    return ObjectiveModel(
        f_delta=f_delta,
        psi=psi,
        psi_subgrad=psi_subgrad,
        part_at=part_at,
        delta=delta,
        mu=mu,
        m=m_h,
        variant=variant,
    )


def entropy_term(weight):
    """(h, h_subgrad) for h(x) = weight * sum x log x (0 log 0 = 0)."""

    def h(x):
        return weight * float(np.sum(np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0)))

    def h_subgrad(x):
        return weight * (1.0 + np.log(np.maximum(x, 1e-300)))

    return h, h_subgrad


def vi_model_from_operator(g, delta=0.0, mu=0.0, smoothness=None):
    """The operator model psi(x, y) = <g(y), x - y> of Minty/Stampacchia VIs."""

    def psi(x, y):
        return float(g(y) @ (x - y))

    def psi_subgrad(x, y):
        return g(y)

    def part_at(y):
        gy = g(y)
        return SubproblemPart(
            linear=gy, fn=lambda x: float(gy @ (x - y)), subgrad=lambda x: gy
        )

    return VIModel(
        psi=psi,
        psi_subgrad=psi_subgrad,
        part_at=part_at,
        delta=delta,
        mu=mu,
        smoothness=dict(smoothness or {}),
    )


def saddle_model_composite(grad_tilde, f_saddle, split, h=None, h_subgrad=None,
                           phi=None, phi_subgrad=None, delta=0.0, mu=0.0,
                           gap_oracle=None, smoothness=None):
    """Saddle model psi(x,y) = <g~(y), x-y> + h(u_x) + phi(v_x) - h(u_y) - phi(v_y).

    ``grad_tilde`` maps the stacked point y = (u, v) to (subgrad_u f, -subgrad_v f).
    ``h`` and ``phi`` are the optional convex composites of the two blocks.
    """
    n1 = int(split[0])

    def hval(u):
        return float(h(u)) if h is not None else 0.0

    def phival(v):
        return float(phi(v)) if phi is not None else 0.0

    def psi(x, y):
        base = float(grad_tilde(y) @ (x - y))
        return base + hval(x[:n1]) + phival(x[n1:]) - hval(y[:n1]) - phival(y[n1:])

    def psi_subgrad(x, y):
        out = np.array(grad_tilde(y), dtype=np.float64, copy=True)
        if h_subgrad is not None:
            out[:n1] += h_subgrad(x[:n1])
        if phi_subgrad is not None:
            out[n1:] += phi_subgrad(x[n1:])
        return out

    def part_at(y):
        gy = grad_tilde(y)
        if h is None and phi is None:
            return SubproblemPart(
                linear=gy, fn=lambda x: float(gy @ (x - y)), subgrad=lambda x: gy
            )
        const = hval(y[:n1]) + phival(y[n1:])
        return SubproblemPart(
            linear=gy,
            fn=lambda x: float(gy @ (x - y)) + hval(x[:n1]) + phival(x[n1:]) - const,
            subgrad=lambda x: psi_subgrad(x, y),
        )

    vi = VIModel(
        psi=psi,
        psi_subgrad=psi_subgrad,
        part_at=part_at,
        delta=delta,
        mu=mu,
        smoothness=dict(smoothness or {}),
    )
    return SaddleModel(vi=vi, f_saddle=f_saddle, split=tuple(split), gap_oracle=gap_oracle)


def holder_smoothness_constant(delta, nu, L_nu):
    """L(delta) making a nu-Hoelder operator/gradient (delta, L)-smooth."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError("nu must lie in [0, 1]")
    if nu == 1.0:
        return float(L_nu)
    return float((1.0 / (2.0 * delta)) ** ((1.0 - nu) / (1.0 + nu)) * L_nu ** (2.0 / (1.0 + nu)))


# ---------------------------------------------------------------------------
# sampled validity checks


@dataclass
class CheckResult:
    name: str
    max_violation: float
    samples: int
    passed: bool


@dataclass
class ValidationReport:
    model_kind: str
    seed: int
    samples: int
    tolerance: float
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "model_kind": self.model_kind,
            "seed": self.seed,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "checks": [
                {
                    "check": c.name,
                    "max_violation": c.max_violation,
                    "sample_count": c.samples,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


_OBJECTIVE_CHECKS = (
    "psi_zero_diag",
    "psi_midpoint_convexity",
    "psi_relative_strong_convexity",
    "sandwich_lower",
    "sandwich_upper",
)
_VI_CHECKS = (
    "psi_zero_diag",
    "psi_midpoint_convexity",
    "delta_monotonicity",
    "generalized_relative_smoothness",
    "majorizes_true_psi",
)


def validate_model(model, Q, setup, ground_truth=None, L_candidate=None,
                   delta_check=None, samples=1000, rng_seed=42, checks=None,
                   tol=1e-8):
    """Run the sampled definitional checks; passes iff every max violation
    stays within ``tol`` beyond the allowed delta slack.

    ``ground_truth`` is the exact objective f (objective models only);
    ``L_candidate`` the smoothness constant to test; ``delta_check`` an
    optional slack overriding the model's own delta in the inequalities
    where the definition allows an (delta, L(delta)) pairing.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.Generator(np.random.Philox(rng_seed))
    xs = Q.sample(rng, samples)
    ys = Q.sample(rng, samples)
    zs = Q.sample(rng, samples)
    if setup.needs_interior:
        xs = np.stack([Q.clamp_interior(p, 1e-9) for p in xs])
        ys = np.stack([Q.clamp_interior(p, 1e-9) for p in ys])
        zs = np.stack([Q.clamp_interior(p, 1e-9) for p in zs])

    if isinstance(model, SaddleModel):
        report = _validate_vi(model.vi, Q, setup, xs, ys, zs, L_candidate,
                              delta_check, checks, tol, kind="saddle")
        if checks is None or "saddle_gap_link" in checks:
            n1 = model.split[0]
            worst = -np.inf
            for x, y in zip(xs, ys):
                lhs = model.f_saddle(y[:n1], x[n1:]) - model.f_saddle(x[:n1], y[n1:])
                worst = max(worst, lhs + model.vi.psi(x, y) - model.vi.delta)
            report.checks.append(_result("saddle_gap_link", worst, samples, tol))
    elif isinstance(model, VIModel):
        report = _validate_vi(model, Q, setup, xs, ys, zs, L_candidate,
                              delta_check, checks, tol, kind="vi")
    else:
        report = _validate_objective(model, Q, setup, xs, ys, zs, ground_truth,
                                     L_candidate, delta_check, checks, tol)
    report.seed = rng_seed
    report.samples = samples
    return report


def _result(name, worst, samples, tol):
    viol = max(0.0, float(worst))
    return CheckResult(name, viol, samples, viol <= tol)


def _validate_objective(model, Q, setup, xs, ys, zs, ground_truth, L_candidate,
                        delta_check, checks, tol):
    wanted = tuple(checks) if checks is not None else None
    out = []
    slack = model.delta if delta_check is None else delta_check

    def active(name):
        if wanted is None:
            if name in ("sandwich_lower", "sandwich_upper"):
                return ground_truth is not None and (
                    name == "sandwich_lower" or L_candidate is not None
                )
            if name == "psi_relative_strong_convexity":
                return model.m > 0
            return True
        return name in wanted

    if active("sandwich_lower") or active("sandwich_upper"):
        if ground_truth is None:
            raise GroundTruthRequired("sandwich checks need the exact objective f")

    if active("psi_zero_diag"):
        worst = max(abs(model.psi(x, x)) for x in xs)
        out.append(_result("psi_zero_diag", worst, len(xs), tol))

    if active("psi_midpoint_convexity"):
        worst = -np.inf
        for x, y, z in zip(xs, ys, zs):
            mid = model.psi(0.5 * (x + z), y)
            worst = max(worst, mid - 0.5 * (model.psi(x, y) + model.psi(z, y)))
        out.append(_result("psi_midpoint_convexity", worst, len(xs), tol))

    if active("psi_relative_strong_convexity"):
        worst = -np.inf
        for x, y, z in zip(xs, ys, zs):
            gz = model.psi_subgrad(z, y)
            lhs = model.psi(z, y) + float(gz @ (x - z)) + model.m * setup.bregman(z, x)
            worst = max(worst, lhs - model.psi(x, y))
        out.append(_result("psi_relative_strong_convexity", worst, len(xs), tol))

    if active("sandwich_lower"):
        f = ground_truth
        worst = -np.inf
        for x, y in zip(xs, ys):
            gap = f(x) - model.f_delta(y) - model.psi(x, y)
            worst = max(worst, model.mu * setup.bregman(y, x) - gap)
        out.append(_result("sandwich_lower", worst, len(xs), tol))

    if active("sandwich_upper"):
        if L_candidate is None:
            raise GroundTruthRequired("sandwich_upper needs an L candidate")
        f = ground_truth
        worst = -np.inf
        for x, y in zip(xs, ys):
            gap = f(x) - model.f_delta(y) - model.psi(x, y)
            if model.variant == "norm":
                ub = 0.5 * L_candidate * setup.norm(x - y) ** 2
            else:
                ub = L_candidate * setup.bregman(y, x)
            worst = max(worst, gap - ub - slack)
        out.append(_result("sandwich_upper", worst, len(xs), tol))

    return ValidationReport("objective", 0, len(xs), tol, out)


def _validate_vi(model, Q, setup, xs, ys, zs, L_candidate, delta_check, checks,
                 tol, kind):
    wanted = tuple(checks) if checks is not None else None
    slack = model.delta if delta_check is None else delta_check
    out = []

    def active(name):
        if wanted is None:
            if name == "generalized_relative_smoothness":
                return L_candidate is not None
            if name == "majorizes_true_psi":
                return model.psi_true is not None
            return True
        return name in wanted

    if active("psi_zero_diag"):
        worst = max(abs(model.psi(x, x)) for x in xs)
        out.append(_result("psi_zero_diag", worst, len(xs), tol))

    if active("psi_midpoint_convexity"):
        worst = -np.inf
        for x, y, z in zip(xs, ys, zs):
            mid = model.psi(0.5 * (x + z), y)
            worst = max(worst, mid - 0.5 * (model.psi(x, y) + model.psi(z, y)))
        out.append(_result("psi_midpoint_convexity", worst, len(xs), tol))

    if active("delta_monotonicity"):
        worst = -np.inf
        for x, y in zip(xs, ys):
            s = model.psi(x, y) + model.psi(y, x)
            if model.mu > 0:
                s += model.mu * float(np.linalg.norm(x - y)) ** 2
            worst = max(worst, s - model.delta)
        out.append(_result("delta_monotonicity", worst, len(xs), tol))

    if active("generalized_relative_smoothness"):
        if L_candidate is None:
            raise GroundTruthRequired("relative smoothness check needs an L candidate")
        worst = -np.inf
        for x, y, z in zip(xs, ys, zs):
            lhs = model.psi(x, y) - model.psi(x, z) - model.psi(z, y)
            rhs = L_candidate * (setup.bregman(z, x) + setup.bregman(y, z)) + slack
            worst = max(worst, lhs - rhs)
        out.append(_result("generalized_relative_smoothness", worst, len(xs), tol))

    if active("majorizes_true_psi"):
        worst = -np.inf
        for x, y in zip(xs, ys):
            worst = max(worst, model.psi_true(x, y) - model.psi(x, y) - model.delta)
        out.append(_result("majorizes_true_psi", worst, len(xs), tol))

    return ValidationReport(kind, 0, len(xs), tol, out)
