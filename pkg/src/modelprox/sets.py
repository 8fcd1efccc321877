"""Feasible sets with closed-form membership, sampling, LMO and support oracles.

Every solver in this package talks to sets through this small interface:
``lmo`` gives exact linear minimization (conditional-gradient steps and
beta = 0 prox subproblems), ``support`` gives max_{x in Q} <s, x> (used to
certify inexact argmins), ``project`` the Euclidean projection, and
``sample`` the distribution used by model validity checks (uniform for
balls, Dirichlet(1,...,1) for simplices).

Sets are immutable after construction and safe for concurrent read-only use.
"""

import numpy as np

from .errors import UnsupportedSet


def as_point(x, dim=None):
    """Coerce to a 1-D float64 array with finite entries."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise ValueError(f"point must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    if dim is not None and x.size != dim:
        raise ValueError(f"point has dimension {x.size}, expected {dim}")
    return x


class FeasibleSet:
    """Abstract feasible set of a fixed dimension."""

    kind = "abstract"

    def __init__(self, dim):
        self.dim = int(dim)

    def contains(self, x, tol=1e-10):
        raise NotImplementedError

    def sample(self, rng, size):
        """Draw ``size`` feasible points, shape (size, dim)."""
        raise NotImplementedError

    def interior_point(self):
        raise NotImplementedError

    def clamp_interior(self, x, margin=1e-12):
        """Pull a feasible point strictly inside (guards grad_d at the boundary)."""
        return x

    def lmo(self, g):
        """Exact argmin of <g, x> over the set."""
        raise UnsupportedSet(f"no linear minimization oracle for {self.kind}")

    def support(self, s):
        """max_{x in Q} <s, x>."""
        raise UnsupportedSet(f"no support function for {self.kind}")

    def project(self, x):
        """Euclidean projection onto the set."""
        raise UnsupportedSet(f"no Euclidean projection for {self.kind}")

    def max_sq_dist(self, p):
        """max_{x in Q} ||x - p||_2^2 (exact, via extreme points)."""
        raise UnsupportedSet(f"no squared-diameter oracle for {self.kind}")

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class EuclideanBall(FeasibleSet):
    """{x : ||x - center|| <= radius}."""

    kind = "euclidean-ball"

    def __init__(self, center, radius):
        center = as_point(center)
        super().__init__(center.size)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.center = center
        self.radius = float(radius)

    def contains(self, x, tol=1e-10):
        return np.linalg.norm(x - self.center) <= self.radius * (1 + tol) + tol

    def sample(self, rng, size):
        d = rng.standard_normal((size, self.dim))
        d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
        r = self.radius * rng.random(size) ** (1.0 / self.dim)
        return self.center + d * r[:, None]

    def interior_point(self):
        return self.center.copy()

    def lmo(self, g):
        ng = np.linalg.norm(g)
        if ng == 0.0:
            # tie-break: every point is optimal, return the center
            return self.center.copy()
        return self.center - self.radius * g / ng

    def support(self, s):
        return float(s @ self.center + self.radius * np.linalg.norm(s))

    def project(self, x):
        v = x - self.center
        nv = np.linalg.norm(v)
        if nv <= self.radius:
            return np.asarray(x, dtype=np.float64).copy()
        return self.center + v * (self.radius / nv)

    def max_sq_dist(self, p):
        return float((self.radius + np.linalg.norm(p - self.center)) ** 2)


class NonnegativeBall(FeasibleSet):
    """{x : x >= 0, ||x|| <= radius} (compactified multiplier set)."""

    kind = "nonneg-ball"

    def __init__(self, radius, dim):
        super().__init__(dim)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def contains(self, x, tol=1e-10):
        return bool(np.all(x >= -tol) and np.linalg.norm(x) <= self.radius * (1 + tol) + tol)

    def sample(self, rng, size):
        d = np.abs(rng.standard_normal((size, self.dim)))
        d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
        r = self.radius * rng.random(size) ** (1.0 / self.dim)
        return d * r[:, None]

    def interior_point(self):
        return np.full(self.dim, self.radius / (2.0 * np.sqrt(self.dim)))

    def lmo(self, g):
        v = np.minimum(g, 0.0)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return np.zeros(self.dim)
        return -self.radius * v / nv

    def support(self, s):
        return float(self.radius * np.linalg.norm(np.maximum(s, 0.0)))

    def project(self, x):
        v = np.maximum(x, 0.0)
        nv = np.linalg.norm(v)
        if nv <= self.radius:
            return v
        return v * (self.radius / nv)

    def max_sq_dist(self, p):
        # max over the extreme points: the origin and the spherical cap
        r = self.radius
        psq = float(p @ p)
        neg = np.minimum(p, 0.0)
        if np.any(neg < 0.0):
            cap_lin = float(r * np.linalg.norm(neg))
        else:
            cap_lin = float(-r * np.min(p)) if p.size else 0.0
        return psq + max(0.0, r * r + 2.0 * cap_lin)


class Simplex(FeasibleSet):
    """{x >= 0 : sum x = scale}."""

    kind = "simplex"

    def __init__(self, dim, scale=1.0):
        super().__init__(dim)
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)

    def contains(self, x, tol=1e-10):
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - self.scale) <= tol * max(1.0, self.scale))

    def sample(self, rng, size):
        return self.scale * rng.dirichlet(np.ones(self.dim), size=size)

    def interior_point(self):
        return np.full(self.dim, self.scale / self.dim)

    def clamp_interior(self, x, margin=1e-12):
        floor = margin * self.scale / self.dim
        y = np.maximum(x, floor)
        return y * (self.scale / float(np.sum(y)))

    def lmo(self, g):
        # lowest-index tie-break via argmin's first-occurrence rule
        out = np.zeros(self.dim)
        out[int(np.argmin(g))] = self.scale
        return out

    def support(self, s):
        return float(self.scale * np.max(s))

    def project(self, x):
        # sort-based exact projection onto the scaled simplex
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - self.scale
        ks = np.arange(1, self.dim + 1)
        cond = u - css / ks > 0
        rho = int(np.nonzero(cond)[0][-1])
        theta = css[rho] / (rho + 1.0)
        return np.maximum(x - theta, 0.0)

    def max_sq_dist(self, p):
        # extreme points are the scaled vertices
        best = 0.0
        for i in range(self.dim):
            v = -p.copy()
            v[i] += self.scale
            best = max(best, float(v @ v))
        return best


class CappedSimplex(FeasibleSet):
    """{0 <= x <= caps, sum x = budget} (box-simplex interior)."""

    kind = "box-simplex-interior"

    def __init__(self, caps, budget):
        caps = as_point(caps)
        super().__init__(caps.size)
        if np.any(caps <= 0):
            raise ValueError("capacities must be positive")
        if not 0 < budget < float(np.sum(caps)):
            raise ValueError("budget must lie strictly between 0 and sum(caps)")
        self.caps = caps
        self.budget = float(budget)

    def contains(self, x, tol=1e-10):
        return bool(
            np.all(x >= -tol)
            and np.all(x <= self.caps + tol)
            and abs(float(np.sum(x)) - self.budget) <= tol * max(1.0, self.budget)
        )

    def sample(self, rng, size):
        # Dirichlet mass projected into the box; blended toward the center so
        # sampled points stay strictly inside (divergences used with this set
        # are evaluated on interior iterates).
        raw = self.budget * rng.dirichlet(np.ones(self.dim), size=size)
        out = np.empty_like(raw)
        center = self.interior_point()
        for i in range(size):
            out[i] = 0.9 * self.project(raw[i]) + 0.1 * center
        return out

    def interior_point(self):
        return self.project(np.full(self.dim, self.budget / self.dim))

    def clamp_interior(self, x, margin=1e-12):
        y = np.clip(x, margin, self.caps * (1.0 - margin))
        # one waterfill pass restores the budget after clipping
        return self.project(y) if abs(float(np.sum(y)) - self.budget) > 1e-15 else y

    def lmo(self, g):
        order = np.argsort(g, kind="stable")
        out = np.zeros(self.dim)
        left = self.budget
        for i in order:
            take = min(self.caps[i], left)
            out[i] = take
            left -= take
            if left <= 0:
                break
        return out

    def support(self, s):
        return float(s @ self.lmo(-s))

    def project(self, x):
        lo, hi = float(np.min(x - self.caps)), float(np.max(x))
        for _ in range(200):
            lam = 0.5 * (lo + hi)
            r = float(np.sum(np.clip(x - lam, 0.0, self.caps))) - self.budget
            if abs(r) <= 1e-13 * max(1.0, self.budget):
                break
            if r > 0:
                lo = lam
            else:
                hi = lam
        return np.clip(x - 0.5 * (lo + hi), 0.0, self.caps)


class ProductSet(FeasibleSet):
    """Cartesian product Q_1 x ... x Q_k, all oracles applied blockwise."""

    kind = "product"

    def __init__(self, blocks):
        blocks = list(blocks)
        if not blocks:
            raise ValueError("product of zero sets")
        super().__init__(sum(b.dim for b in blocks))
        self.blocks = blocks
        self.offsets = np.cumsum([0] + [b.dim for b in blocks])

    def split(self, x):
        return [x[self.offsets[i]:self.offsets[i + 1]] for i in range(len(self.blocks))]

    def contains(self, x, tol=1e-10):
        return all(b.contains(p, tol) for b, p in zip(self.blocks, self.split(x)))

    def sample(self, rng, size):
        return np.concatenate([b.sample(rng, size) for b in self.blocks], axis=1)

    def interior_point(self):
        return np.concatenate([b.interior_point() for b in self.blocks])

    def clamp_interior(self, x, margin=1e-12):
        return np.concatenate(
            [b.clamp_interior(p, margin) for b, p in zip(self.blocks, self.split(x))]
        )

    def lmo(self, g):
        return np.concatenate([b.lmo(p) for b, p in zip(self.blocks, self.split(g))])

    def support(self, s):
        return float(sum(b.support(p) for b, p in zip(self.blocks, self.split(s))))

    def project(self, x):
        return np.concatenate([b.project(p) for b, p in zip(self.blocks, self.split(x))])

    def max_sq_dist(self, p):
        return float(sum(b.max_sq_dist(q) for b, q in zip(self.blocks, self.split(p))))
