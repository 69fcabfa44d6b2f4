"""Instance model for covering with non-uniform ball classes.

An instance is a finite metric space plus radius classes (k_t, r_t) sorted
by strictly decreasing radius.  A solution is a set of balls, each tagged
with the class it is charged to; quality is measured by two factors:
count (balls per class versus k_t) and radius (used radius versus r_t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .metric import COVER_TOL, MetricSpace


class InfeasibleInstanceError(ValueError):
    """No dilation makes the fractional relaxation feasible."""


@dataclass(frozen=True)
class RadiusClass:
    multiplicity: int
    radius: float

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError(f"class multiplicity must be >= 1, got {self.multiplicity}")
        if self.radius < 0:
            raise ValueError(f"class radius must be >= 0, got {self.radius}")


class NukcInstance:
    """Metric space plus radius classes, radii strictly decreasing.

    Classes given with equal radii are merged (multiplicities added).
    """

    def __init__(self, space: MetricSpace, classes):
        self.space = space
        merged: dict[float, int] = {}
        for cls in classes:
            if not isinstance(cls, RadiusClass):
                cls = RadiusClass(int(cls[0]), float(cls[1]))
            merged[cls.radius] = merged.get(cls.radius, 0) + cls.multiplicity
        if not merged:
            raise ValueError("instance needs at least one radius class")
        self.classes = [
            RadiusClass(merged[r], r) for r in sorted(merged, reverse=True)
        ]

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def radii(self) -> list:
        return [c.radius for c in self.classes]

    @property
    def budgets(self) -> list:
        return [c.multiplicity for c in self.classes]

    @property
    def total_k(self) -> int:
        return sum(c.multiplicity for c in self.classes)

    def scaled(self, alpha: float) -> "NukcInstance":
        """The same instance with every radius multiplied by alpha > 0."""
        if alpha <= 0:
            raise ValueError("scaling factor must be positive")
        return NukcInstance(
            self.space, [(c.multiplicity, c.radius * alpha) for c in self.classes]
        )

    def expand_radii(self) -> list:
        """All radii as individual (sorted, non-increasing) entries, paired
        with their class index: [(radius, class_index), ...]."""
        out = []
        for t, c in enumerate(self.classes):
            out.extend([(c.radius, t)] * c.multiplicity)
        return out


@dataclass(frozen=True)
class Ball:
    center: int
    class_index: int
    radius_used: float


@dataclass
class NukcSolution:
    balls: list

    def centers_of_class(self, t: int) -> list:
        return [b.center for b in self.balls if b.class_index == t]

    def class_counts(self, num_classes: int) -> list:
        counts = [0] * num_classes
        for b in self.balls:
            counts[b.class_index] += 1
        return counts


def var_index(p: int, t: int, num_classes: int) -> int:
    return p * num_classes + t


def build_nukc_lp(
    instance: NukcInstance,
    dilation: float,
    points=None,
    class_window=None,
) -> lp.LpProblem:
    """The fractional relaxation at a given dilation.

    Variables x[p, t] in [0, 1].  One covering row per point in `points`
    (default: all), one budget row per class.  `class_window` (lo, hi)
    restricts which classes may carry mass (others are pinned to 0).
    """
    n, h = instance.n, instance.num_classes
    radii = instance.radii
    prob = lp.LpProblem(num_vars=n * h)
    bounds = [(0.0, 1.0)] * (n * h)
    if class_window is not None:
        wlo, whi = class_window
        for p in range(n):
            for t in range(h):
                if not (wlo <= t <= whi):
                    bounds[var_index(p, t, h)] = (0.0, 0.0)
    prob.bounds = bounds
    pts = range(n) if points is None else points
    dist = instance.space.dist
    for p in pts:
        row = np.zeros(n * h)
        for t in range(h):
            if class_window is not None and not (class_window[0] <= t <= class_window[1]):
                continue
            reach = dilation * radii[t] + COVER_TOL
            for q in np.nonzero(dist[p] <= reach)[0]:
                row[var_index(int(q), t, h)] = 1.0
        prob.add_constraint(row, lp.GE, 1.0)
    for t in range(h):
        row = np.zeros(n * h)
        for p in range(n):
            row[var_index(p, t, h)] = 1.0
        prob.add_constraint(row, lp.LE, float(instance.classes[t].multiplicity))
    return prob


def solve_fractional(instance: NukcInstance, dilation: float, **kwargs):
    """Solve the relaxation at `dilation`; returns x of shape (n, h) or
    None when infeasible."""
    sol = lp.solve(build_nukc_lp(instance, dilation, **kwargs))
    if not sol.ok:
        return None
    return sol.values.reshape(instance.n, instance.num_classes)


def candidate_dilations(instance: NukcInstance) -> list:
    """All values the optimal dilation can take: pairwise distance over
    positive class radius, plus 0."""
    vals = {0.0}
    dist = instance.space.dist
    n = instance.n
    for r in instance.radii:
        if r > 0:
            for i in range(n):
                for j in range(i + 1, n):
                    vals.add(dist[i, j] / r)
    return sorted(vals)


def min_feasible_dilation(instance: NukcInstance):
    """Smallest dilation (over the candidate set) whose relaxation is
    feasible, together with a basic feasible x.  Feasibility is monotone in
    the dilation, so binary search applies."""
    cands = candidate_dilations(instance)
    if solve_fractional(instance, cands[-1]) is None:
        raise InfeasibleInstanceError(
            "relaxation infeasible at the largest candidate dilation "
            f"({cands[-1]:g}); not enough balls to cover the points"
        )
    losol = solve_fractional(instance, cands[0])
    if losol is not None:
        return cands[0], losol
    lo, hi = 0, len(cands) - 1  # cands[lo] infeasible, cands[hi] feasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if solve_fractional(instance, cands[mid]) is None:
            lo = mid
        else:
            hi = mid
    return cands[hi], solve_fractional(instance, cands[hi])


@dataclass
class CoverageProfile:
    """cov[p, t] = total x-mass of class t within reach of point p;
    suffix(p, t) sums classes t..h-1."""

    cov: np.ndarray

    def suffix(self, p: int, t: int) -> float:
        h = self.cov.shape[1]
        if t >= h:
            return 0.0
        return float(self.cov[p, t:].sum())

    def window(self, p: int, a: int, b: int) -> float:
        return float(self.cov[p, a : b + 1].sum())


def coverage(instance: NukcInstance, x: np.ndarray, dilation: float = 1.0) -> CoverageProfile:
    n, h = instance.n, instance.num_classes
    x = np.asarray(x, dtype=float).reshape(n, h)
    dist = instance.space.dist
    cov = np.zeros((n, h))
    for t, r in enumerate(instance.radii):
        within = dist <= dilation * r + COVER_TOL
        cov[:, t] = within @ x[:, t]
    return CoverageProfile(cov)


@dataclass
class ValidationReport:
    uncovered: list = field(default_factory=list)
    radius_violations: list = field(default_factory=list)  # (ball idx, used, limit)
    count_violations: list = field(default_factory=list)  # (class, count, limit)

    @property
    def ok(self) -> bool:
        return not (self.uncovered or self.radius_violations or self.count_violations)

    def __str__(self):
        if self.ok:
            return "valid"
        parts = []
        if self.uncovered:
            parts.append(f"uncovered points: {self.uncovered}")
        if self.radius_violations:
            parts.append(f"radius violations: {self.radius_violations}")
        if self.count_violations:
            parts.append(f"count violations: {self.count_violations}")
        return "; ".join(parts)


def validate_solution(
    instance: NukcInstance,
    solution: NukcSolution,
    count_factor: float = 1.0,
    radius_factor: float = 1.0,
    tol: float = 1e-9,
) -> ValidationReport:
    """Check a solution as an (count_factor, radius_factor) bicriteria
    answer: every point covered, each ball's used radius at most
    radius_factor * r_t, and per-class ball counts at most
    ceil(count_factor * k_t)."""
    report = ValidationReport()
    n, h = instance.n, instance.num_classes
    dist = instance.space.dist
    covered = np.zeros(n, dtype=bool)
    for idx, b in enumerate(solution.balls):
        if not (0 <= b.class_index < h):
            raise ValueError(f"ball {idx} refers to unknown class {b.class_index}")
        limit = radius_factor * instance.radii[b.class_index]
        if b.radius_used > limit + tol:
            report.radius_violations.append((idx, b.radius_used, limit))
        covered |= dist[b.center] <= b.radius_used + COVER_TOL
    report.uncovered = [int(p) for p in np.nonzero(~covered)[0]]
    counts = solution.class_counts(h)
    if math.isfinite(count_factor):
        for t in range(h):
            limit = math.ceil(count_factor * instance.classes[t].multiplicity - 1e-9)
            if counts[t] > limit:
                report.count_violations.append((t, counts[t], limit))
    return report


def achieved_dilation(instance: NukcInstance, solution: NukcSolution) -> float:
    """max over points of min over balls of d(p, center)/r_t, using each
    ball's class radius.  Zero-radius balls count only for points at
    distance 0.  Returns inf if some point is not covered at any dilation."""
    dist = instance.space.dist
    worst = 0.0
    for p in range(instance.n):
        best = math.inf
        for b in solution.balls:
            d = dist[p, b.center]
            r = instance.radii[b.class_index]
            if r > 0:
                best = min(best, d / r)
            elif d <= COVER_TOL:
                best = 0.0
        worst = max(worst, best)
    return worst


# ---------------------------------------------------------------------------
# Radius preprocessing: power-of-two clubbing and doubling compression.
# ---------------------------------------------------------------------------


def club_radii(instance: NukcInstance):
    """Round every positive radius up to the nearest power of two.

    Returns (clubbed instance, mapping) where mapping[t_clubbed] is the list
    of (original class index, multiplicity) folded into clubbed class t.
    Any (a, b) solution of the clubbed instance is an (a, 2b) solution of
    the original, since each radius grew by a factor less than 2.
    """
    clubbed: dict[float, list] = {}
    for t, cls in enumerate(instance.classes):
        r = cls.radius
        if r > 0:
            r = 2.0 ** math.ceil(math.log2(r) - 1e-12)
        clubbed.setdefault(r, []).append((t, cls.multiplicity))
    order = sorted(clubbed, reverse=True)
    new_classes = [(sum(m for _, m in clubbed[r]), r) for r in order]
    mapping = [clubbed[r] for r in order]
    return NukcInstance(instance.space, new_classes), mapping


def lift_clubbed_solution(
    clubbed_solution: NukcSolution, mapping, original: NukcInstance
) -> NukcSolution:
    """Reassign balls of each clubbed class round-robin over the original
    classes it absorbed, weighted by multiplicity.  Preserves used radii,
    so an (a, b) clubbed solution validates at (a, 2b) on the original."""
    balls = []
    for tc, targets in enumerate(mapping):
        slots = []
        for t_orig, mult in targets:
            slots.extend([t_orig] * mult)
        cballs = [b for b in clubbed_solution.balls if b.class_index == tc]
        for i, b in enumerate(cballs):
            t_orig = slots[i % len(slots)]
            balls.append(Ball(b.center, t_orig, b.radius_used))
    return NukcSolution(balls)


@dataclass
class CompressedInstance:
    """Doubling compression of an instance with k individual radii.

    Sorted radii r_1 >= ... >= r_k (1-based) are bucketed at barrier
    indices 2^i: bucket i holds indices [2^i, 2^(i+1)) and is rounded up to
    r_hat_i = r_{2^i}, so bucket i has multiplicity 2^i (the last bucket
    possibly fewer).  Buckets with equal rounded radius merge.
    """

    instance: NukcInstance  # the compressed instance
    # per compressed class: 1-based original radius indices its lifted
    # balls are distributed over (bucket i targets [2^(i-1), 2^i); bucket 0
    # targets index 1)
    lift_targets: list = field(default_factory=list)
    # per compressed class: the barrier levels i merged into it
    barrier_levels: list = field(default_factory=list)
    # 1-based original index -> original class index
    index_class: list = field(default_factory=list)
    num_barriers: int = 0


def compress_radii(original: NukcInstance) -> CompressedInstance:
    """Build the doubling compression.  Works from the expanded list of the
    instance's k individual radii."""
    expanded = original.expand_radii()  # sorted non-increasing
    k = len(expanded)
    levels = int(math.floor(math.log2(k))) if k > 0 else 0
    buckets = []  # (i, rounded radius, multiplicity, target original indices)
    for i in range(levels + 1):
        start = 2**i  # 1-based
        stop = min(2 ** (i + 1) - 1, k)
        if start > k:
            break
        r_hat = expanded[start - 1][0]
        mult = stop - start + 1
        targets = [1] if i == 0 else list(range(2 ** (i - 1), 2**i))
        buckets.append((i, r_hat, mult, targets))
    merged: dict[float, dict] = {}
    for i, r_hat, mult, targets in buckets:
        entry = merged.setdefault(r_hat, {"mult": 0, "targets": [], "levels": []})
        entry["mult"] += mult
        entry["targets"].extend(targets)
        entry["levels"].append(i)
    order = sorted(merged, reverse=True)
    inst = NukcInstance(original.space, [(merged[r]["mult"], r) for r in order])
    return CompressedInstance(
        instance=inst,
        lift_targets=[sorted(merged[r]["targets"]) for r in order],
        barrier_levels=[merged[r]["levels"] for r in order],
        index_class=[t for _, t in expanded],
        num_barriers=len(buckets),
    )


def lift_compressed_solution(
    compressed_solution: NukcSolution,
    compressed: CompressedInstance,
    original: NukcInstance,
) -> NukcSolution:
    """Map a compressed (alpha, beta) solution back to the original
    instance as a (3*alpha, beta) solution: the centers charged to
    compressed class i are redistributed round-robin over the original
    radius indices in [2^(i-1), 2^i) (class 0 folds onto index 1), keeping
    each ball's used radius.  Those indices carry radii at least as large
    as the compressed one, so the radius factor is preserved; the doubling
    of the index range plus the fold onto index 1 costs the factor 3 in
    counts."""
    balls = []
    for tc, targets in enumerate(compressed.lift_targets):
        cballs = [b for b in compressed_solution.balls if b.class_index == tc]
        for i, b in enumerate(cballs):
            j = targets[i % len(targets)]  # 1-based original radius index
            t_orig = compressed.index_class[j - 1]
            balls.append(Ball(b.center, t_orig, b.radius_used))
    return NukcSolution(balls)
