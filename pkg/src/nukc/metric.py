"""Finite metric spaces given by explicit distance matrices.

All coverage comparisons in the package are inclusive: a point q belongs to
the ball of radius r around c when d(c, q) <= r + COVER_TOL.
"""

from __future__ import annotations

import numpy as np

COVER_TOL = 1e-9
METRIC_TOL = 1e-9


class MetricError(ValueError):
    """Raised when a distance matrix fails the metric axioms."""

    def __init__(self, violations):
        self.violations = violations
        preview = "; ".join(str(v) for v in violations[:5])
        more = "" if len(violations) <= 5 else f" (+{len(violations) - 5} more)"
        super().__init__(f"not a metric: {preview}{more}")


def validate_metric(dist: np.ndarray, tol: float = METRIC_TOL) -> list:
    """Check symmetry, zero diagonal, non-negativity and the triangle
    inequality.  Returns a list of violation tuples, empty when the matrix
    is a metric.  The triangle check is the full O(n^3) scan.
    """
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
    n = dist.shape[0]
    violations = []
    for i in range(n):
        if abs(dist[i, i]) > tol:
            violations.append(("diagonal", i, dist[i, i]))
    asym = np.argwhere(np.abs(dist - dist.T) > tol)
    for i, j in asym:
        if i < j:
            violations.append(("asymmetry", int(i), int(j)))
    neg = np.argwhere(dist < -tol)
    for i, j in neg:
        violations.append(("negative", int(i), int(j)))
    # d[i, j] <= d[i, k] + d[k, j] for all i, j, k.
    for k in range(n):
        slack = dist - (dist[:, k : k + 1] + dist[k : k + 1, :])
        bad = np.argwhere(slack > tol)
        for i, j in bad:
            violations.append(("triangle", int(i), int(j), int(k)))
    return violations


class MetricSpace:
    """A finite metric space on points 0..n-1."""

    def __init__(self, dist, labels=None, check: bool = True, tol: float = METRIC_TOL):
        self.dist = np.array(dist, dtype=float)
        if self.dist.ndim != 2 or self.dist.shape[0] != self.dist.shape[1]:
            raise ValueError(
                f"distance matrix must be square, got shape {self.dist.shape}"
            )
        if check:
            violations = validate_metric(self.dist, tol=tol)
            if violations:
                raise MetricError(violations)
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != self.dist.shape[0]:
            raise ValueError("labels length must match matrix size")

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def ball(self, center: int, radius: float) -> list:
        """Points within the closed ball of `radius` around `center`
        (inclusive comparison with COVER_TOL slack)."""
        return [int(q) for q in np.nonzero(self.dist[center] <= radius + COVER_TOL)[0]]

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    @classmethod
    def from_coords(cls, coords, check: bool = False) -> "MetricSpace":
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2:
            raise ValueError("coords must be a 2-d array")
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        # Euclidean matrices are metrics by construction; symmetrize away
        # floating noise instead of re-validating.
        dist = (dist + dist.T) / 2.0
        np.fill_diagonal(dist, 0.0)
        return cls(dist, check=check)


def ball(space: MetricSpace, center: int, radius: float) -> list:
    return space.ball(center, radius)


def gonzalez_kcenter(space: MetricSpace, k: int):
    """Farthest-first traversal.  Returns (centers, radius) with
    |centers| <= k and radius = max_p min_c d(p, c).  Ties in the farthest
    choice go to the lowest point id.  The radius is at most twice the
    optimal k-center radius.
    """
    n = space.n
    if k <= 0:
        raise ValueError(f"gonzalez_kcenter requires k >= 1, got k={k} with n={n}")
    centers = [0]
    mind = space.dist[0].copy()
    while len(centers) < k:
        far = int(np.argmax(mind))  # argmax returns the lowest index on ties
        if mind[far] <= COVER_TOL:
            break
        centers.append(far)
        mind = np.minimum(mind, space.dist[far])
    return centers, float(mind.max())
