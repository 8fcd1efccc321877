"""Bregman prox setups and the certified composite-argmin oracle.

A :class:`ProxSetup` bundles a distance-generating function d, its gradient,
the reference norm and the derived divergence V[y](x).  All solvers obtain
their inner steps from :func:`composite_argmin` (single anchor) or
:func:`mirror_argmin` (pre-combined mirror vector, used by the momentum
method whose subproblem mixes two divergence terms).

Inexactness is certified, not assumed: closed-form steps report
delta_tilde = 0, iterative steps report the computable bound
max(0, max_{x in Q} <-h, x - x_tilde>) evaluated with the set's support
function, where h is the subproblem (sub)gradient at the returned point.

Setups are immutable and safe for concurrent read-only use; every solve
keeps its state local to the call.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import (
    DomainError,
    MaxInnerIterations,
    UnboundedSubproblem,
    UnsupportedSet,
)
from .sets import CappedSimplex, EuclideanBall, NonnegativeBall, ProductSet, Simplex


@dataclass(frozen=True)
class ArgminCertificate:
    """An inexact argmin together with its certified inexactness."""

    solution: np.ndarray
    delta_tilde: float
    inner_iterations: int


@dataclass(frozen=True)
class SubproblemPart:
    """The model part psi(., y) of a prox subproblem, frozen at its anchor.

    ``linear`` is the coefficient vector when psi(., y) is affine (constants
    are irrelevant to the argmin); ``composite``/``weight`` describe an extra
    structured term (currently ``"entropy"`` for weight * sum x log x);
    ``fn``/``subgrad`` give black-box access for generic solves and for the
    line-search tests in the outer solvers.
    """

    linear: Optional[np.ndarray] = None
    composite: Optional[str] = None
    weight: float = 0.0
    fn: Optional[Callable] = None
    subgrad: Optional[Callable] = None

    def gradient_at(self, x):
        g = None
        if self.linear is not None:
            g = np.array(self.linear, dtype=np.float64, copy=True)
        if self.composite == "entropy" and self.weight != 0.0:
            if np.any(x <= 0):
                raise DomainError("entropy composite gradient needs x > 0")
            g = (g if g is not None else 0.0) + self.weight * (1.0 + np.log(x))
        if g is None:
            if self.subgrad is None:
                raise ValueError("part has neither structure nor a subgradient")
            g = self.subgrad(x)
        return g


class ProxSetup:
    """A distance-generating function with its divergence and prox solvers."""

    name = "abstract"
    strongly_convex_1 = False
    omega_bound = None
    needs_interior = False

    def d(self, x):
        raise NotImplementedError

    def grad_d(self, x):
        raise NotImplementedError

    def norm(self, v):
        """The reference norm paired with this setup."""
        raise NotImplementedError

    def bregman(self, y, x):
        """V[y](x) = d(x) - d(y) - <grad d(y), x - y> (clipped at 0)."""
        gy = self.grad_d(y)
        v = self.d(x) - self.d(y) - float(gy @ (x - y))
        return max(0.0, v)

    def _solve(self, Q, part, beta, G):
        """Minimize part(x) + beta * (d(x) - <G, x>) over Q.

        Returns (x, inner_iterations, exact) where ``exact`` marks a
        closed-form solve (certified delta_tilde = 0).
        """
        raise UnsupportedSet(f"{self.name} setup has no solver for {Q.kind}")

    def argmin_d(self, Q):
        """argmin_{x in Q} d(x) (the canonical Mirror-Prox start)."""
        zero = SubproblemPart(linear=np.zeros(Q.dim))
        x, _, _ = self._solve(Q, zero, 1.0, np.zeros(Q.dim))
        return x

    def rescaled(self, center, radius_sq_root):
        """The restart-stage setup d_p(x) = R^2 d((x - center)/R)."""
        raise UnsupportedSet(
            f"{self.name} setup cannot be translated/rescaled (domain is not "
            "translation invariant)"
        )

    def __repr__(self):
        return f"{type(self).__name__}()"


class EuclideanSetup(ProxSetup):
    """d(x) = 0.5 ||x - center||_2^2 (center defaults to the origin)."""

    name = "euclidean"
    strongly_convex_1 = True
    omega_bound = 1.0

    def __init__(self, center=None):
        self.center = None if center is None else np.asarray(center, dtype=np.float64)

    def _c(self, x):
        return 0.0 if self.center is None else self.center

    def d(self, x):
        v = x - self._c(x)
        return 0.5 * float(v @ v)

    def grad_d(self, x):
        return x - self._c(x)

    def norm(self, v):
        return float(np.linalg.norm(v))

    def _solve(self, Q, part, beta, G):
        if part.linear is None or part.composite is not None:
            raise UnsupportedSet("euclidean closed form needs an affine part")
        target = self._c(G) + G - part.linear / beta
        x = Q.project(target)
        exact = not _uses_bisection(Q)
        return x, 1, exact

    def rescaled(self, center, radius):
        # R^2 * 0.5 ||(x - c)/R||^2 = 0.5 ||x - c||^2: the scale cancels
        return EuclideanSetup(center=center)


class EntropySetup(ProxSetup):
    """d(x) = sum x_i log x_i on the unit simplex, 1-SC w.r.t. ||.||_1."""

    name = "entropy"
    strongly_convex_1 = True  # Pinsker, for scale-1 simplices
    needs_interior = True

    def d(self, x):
        if np.any(x < 0):
            raise DomainError("entropy is defined for x >= 0")
        return float(np.sum(np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0)))

    def grad_d(self, x):
        if np.any(x <= 0):
            raise DomainError("grad of entropy is undefined at the boundary")
        return 1.0 + np.log(x)

    def norm(self, v):
        return float(np.sum(np.abs(v)))

    def _solve(self, Q, part, beta, G):
        if not isinstance(Q, Simplex):
            raise UnsupportedSet("entropy prox implemented on the simplex")
        if part.linear is None:
            raise UnsupportedSet("entropy prox needs an affine (+entropy) part")
        w = 0.0
        if part.composite is not None:
            if part.composite != "entropy":
                raise UnsupportedSet(f"composite {part.composite!r} not supported here")
            w = part.weight
        t = (beta * G - part.linear) / (beta + w)
        t = t - np.max(t)
        x = np.exp(t)
        x *= Q.scale / float(np.sum(x))
        return x, 1, True


class LogBarrierSetup(ProxSetup):
    """d(x) = -sum log x_j; pairs with simplex-constrained designs."""

    name = "log-barrier"
    # Hessian diag(1/x^2) >= I on the unit simplex, so 1-SC holds there
    strongly_convex_1 = True
    needs_interior = True

    def d(self, x):
        if np.any(x <= 0):
            raise DomainError("log barrier needs x > 0")
        return -float(np.sum(np.log(x)))

    def grad_d(self, x):
        if np.any(x <= 0):
            raise DomainError("grad of log barrier is undefined at the boundary")
        return -1.0 / x

    def norm(self, v):
        return float(np.linalg.norm(v))

    def _solve(self, Q, part, beta, G):
        if not isinstance(Q, Simplex):
            raise UnsupportedSet("log-barrier prox implemented on the simplex")
        if part.linear is None or part.composite is not None:
            raise UnsupportedSet("log-barrier prox needs an affine part")
        t = np.ascontiguousarray(part.linear / beta - G)
        x, _lam = _kernels.logbar_simplex_prox(t, Q.scale)
        return x, 1, False


class ResourceSharingSetup(ProxSetup):
    """d(x) = sum 1/(1 - x_i) on {x_i < 1}; the Kleinrock-model setup."""

    name = "resource-sharing"
    strongly_convex_1 = True  # d'' = 2/(1-x)^3 >= 2 on x in [0, 1)
    needs_interior = True

    def d(self, x):
        if np.any(x >= 1.0):
            raise DomainError("resource-sharing divergence needs x < 1")
        return float(np.sum(1.0 / (1.0 - x)))

    def grad_d(self, x):
        if np.any(x >= 1.0):
            raise DomainError("grad undefined for x >= 1")
        return 1.0 / (1.0 - x) ** 2

    def norm(self, v):
        return float(np.linalg.norm(v))

    def bregman(self, y, x):
        # direct form sum (x-y)^2 / ((1-x)(1-y)^2); equals the generic formula
        if np.any(x >= 1.0) or np.any(y >= 1.0):
            raise DomainError("resource-sharing divergence needs arguments < 1")
        v = float(np.sum((x - y) ** 2 / ((1.0 - x) * (1.0 - y) ** 2)))
        return max(0.0, v)

    def _solve(self, Q, part, beta, G):
        if not isinstance(Q, CappedSimplex):
            raise UnsupportedSet("resource-sharing prox implemented on capped simplices")
        if part.linear is None or part.composite is not None:
            raise UnsupportedSet("resource-sharing prox needs an affine part")
        c = np.ascontiguousarray(part.linear, dtype=np.float64)
        Gc = np.ascontiguousarray(G, dtype=np.float64)
        x, _lam = _kernels.rs_prox(c, Gc, Q.caps, Q.budget, float(beta))
        return x, 1, False


class Power4Setup(ProxSetup):
    """d(x) = 0.25 ||x||^4 + 0.5 ||x||^2 (quartic-growth reference function)."""

    name = "power4"
    strongly_convex_1 = True
    omega_bound = 1.5  # d(x) <= 0.75 = omega/2 on the unit ball

    def d(self, x):
        s = float(x @ x)
        return 0.25 * s * s + 0.5 * s

    def grad_d(self, x):
        return (1.0 + float(x @ x)) * x

    def norm(self, v):
        return float(np.linalg.norm(v))

    def _solve(self, Q, part, beta, G):
        if part.linear is None or part.composite is not None:
            raise UnsupportedSet("power4 prox needs an affine part")
        if not isinstance(Q, EuclideanBall) or np.any(Q.center != 0.0):
            raise UnsupportedSet("power4 prox implemented on origin-centered balls")
        s = G - part.linear / beta
        snorm = float(np.linalg.norm(s))
        if snorm == 0.0:
            return np.zeros(Q.dim), 1, True
        rho = min(_kernels.cubic_root(snorm), Q.radius)
        return (rho / snorm) * s, 1, True


def _uses_bisection(Q):
    if isinstance(Q, CappedSimplex):
        return True
    if isinstance(Q, ProductSet):
        return any(_uses_bisection(b) for b in Q.blocks)
    return False


def bregman(setup, y, x):
    """V[y](x) for the given setup; 0 exactly when x is y."""
    return setup.bregman(np.asarray(y, dtype=np.float64), np.asarray(x, dtype=np.float64))


def linear_minimization_oracle(Q, g):
    """argmin_{x in Q} <g, x>, exact for the supported set kinds."""
    return Q.lmo(np.asarray(g, dtype=np.float64))


def certified_inexactness(Q, h, x):
    """The Def-2.2 bound max(0, max_{u in Q} <-h, u - x>) via the support function."""
    return max(0.0, Q.support(-h) + float(h @ x))


def mirror_argmin(setup, Q, part, beta, G, target_delta_tilde=np.inf, inner_budget=200000):
    """Certified argmin of part(x) + beta*(d(x) - <G, x>) over Q.

    ``G`` is the aggregated mirror vector: for a single prox anchor y it is
    grad d(y); a convex combination of several grad d(z_i) encodes a sum of
    divergence terms with total weight ``beta``.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        if part.linear is not None and part.composite is None:
            try:
                x = Q.lmo(part.linear)
            except UnsupportedSet:
                raise UnboundedSubproblem(
                    "beta = 0 with no linear minimization oracle on this set"
                )
            return ArgminCertificate(x, 0.0, 1)
        raise UnboundedSubproblem("beta = 0 subproblem without affine structure")

    try:
        x, iters, exact = setup._solve(Q, part, beta, G)
    except UnsupportedSet:
        return _iterative_argmin(setup, Q, part, beta, G, target_delta_tilde, inner_budget)

    if exact:
        return ArgminCertificate(x, 0.0, iters)
    h = part.gradient_at(x) + beta * (setup.grad_d(x) - G)
    dt = certified_inexactness(Q, h, x)
    if dt > target_delta_tilde:
        raise MaxInnerIterations(
            f"certified inexactness {dt:.3e} exceeds target {target_delta_tilde:.3e}"
        )
    return ArgminCertificate(x, dt, iters)


def composite_argmin(setup, Q, part, beta, anchor, target_delta_tilde=np.inf,
                     inner_budget=200000):
    """Certified argmin of part(x) + beta * V[anchor](x) over Q."""
    anchor = np.asarray(anchor, dtype=np.float64)
    if setup.needs_interior:
        anchor = Q.clamp_interior(anchor)
    G = setup.grad_d(anchor)
    return mirror_argmin(setup, Q, part, beta, G, target_delta_tilde, inner_budget)


def _iterative_argmin(setup, Q, part, beta, G, target, budget):
    """Projected-subgradient fallback for parts without a structured solver.

    Only available for the Euclidean setup (the certification and the
    projection both live in that geometry).  Restarts with a doubled
    iteration count until the certificate meets the target.
    """
    if not isinstance(setup, EuclideanSetup):
        raise UnsupportedSet(
            f"no structured solver and no generic fallback for setup {setup.name}"
        )
    if part.subgrad is None and part.linear is None:
        raise UnsupportedSet("generic fallback needs a subgradient oracle")

    def subgrad_total(x):
        return part.gradient_at(x) + beta * (setup.grad_d(x) - G)

    x0 = Q.interior_point()
    spent = 0
    T = 256
    best = None
    while spent < budget:
        T = min(T, budget - spent)
        x = x0.copy()
        avg = np.zeros_like(x)
        wsum = 0.0
        for t in range(1, T + 1):
            g = subgrad_total(x)
            x = Q.project(x - (2.0 / (beta * (t + 1))) * g)
            avg += t * x
            wsum += t
        spent += T
        cand = avg / wsum
        dt = certified_inexactness(Q, subgrad_total(cand), cand)
        # the last iterate is often better than the average late in the run
        dt_last = certified_inexactness(Q, subgrad_total(x), x)
        if dt_last < dt:
            cand, dt = x, dt_last
        if best is None or dt < best[1]:
            best = (cand, dt)
        if dt <= target:
            return ArgminCertificate(cand, dt, spent)
        T *= 2
    raise MaxInnerIterations(
        f"could not certify delta_tilde <= {target:.3e} within {budget} inner "
        f"iterations (best {best[1]:.3e})"
    )


def divergence_diameter_bound(setup, Q):
    """A finite R^2 with V[y](x) <= R^2 for all x, y in Q, when available.

    Closed forms exist for the Euclidean setup over balls and simplices; the
    entropy divergence is unbounded on the simplex, so conditional-gradient
    mode refuses it.
    """
    if isinstance(setup, EuclideanSetup):
        return 0.5 * _sq_diameter(Q)
    raise UnsupportedSet(
        f"no finite divergence diameter for setup {setup.name} on {Q.kind}"
    )


def _sq_diameter(Q):
    if isinstance(Q, EuclideanBall):
        return (2.0 * Q.radius) ** 2
    if isinstance(Q, Simplex):
        return 2.0 * Q.scale**2
    if isinstance(Q, NonnegativeBall):
        return 2.0 * Q.radius**2
    if isinstance(Q, ProductSet):
        return sum(_sq_diameter(b) for b in Q.blocks)
    raise UnsupportedSet(f"no diameter bound for {Q.kind}")
