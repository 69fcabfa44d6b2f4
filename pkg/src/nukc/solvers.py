"""Approximation pipelines built on the tree embedding.

* solve_kcwo: factor-2 k-center with excused points (two classes, the
  second of radius zero), via height-two rounding.
* solve_two_radii: factor (1 + sqrt 5) for two radius classes, branching
  on the golden-ratio threshold between the radii.
* round_bottom_heavy: covers every point drawing at least half its
  fractional coverage from classes >= tau, at 4x budgets and 8x radii.
* solve_guess_q: enumerate centers of the largest classes, LP-cover the
  rest, round bottom-heavy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product

import numpy as np

from . import lp
from .embed import embed_barrier, embed_basic, lift_tree_solution
from .metric import COVER_TOL, MetricSpace, gonzalez_kcenter
from .model import (
    Ball,
    CompressedInstance,
    NukcInstance,
    NukcSolution,
    build_nukc_lp,
    candidate_dilations,
    coverage,
    min_feasible_dilation,
    solve_fractional,
    var_index,
)
from .oracle import SizeBudgetError
from .rmfct import FirefighterSolution, round_depth2, round_loose, solve_rmfct_lp

THETA = (math.sqrt(5.0) + 1.0) / 2.0
TWO_RADII_FACTOR = 1.0 + math.sqrt(5.0)


def ilog(value: float) -> int:
    """ceil(log2(max(value, 2))): the iterated-log step used throughout."""
    return int(math.ceil(math.log2(max(value, 2)) - 1e-12))


def iterated_log(value: int, times: int) -> int:
    v = value
    for _ in range(times):
        v = ilog(v)
    return v


@dataclass
class KcwoResult:
    centers: list
    outliers: list
    radius: float

    def to_solution(self, k: int, l: int) -> NukcSolution:
        """As a two-class ball solution: centers carry class 0, excused
        points get zero-radius balls of class 1."""
        balls = [Ball(c, 0, self.radius) for c in self.centers]
        balls += [Ball(p, 1, 0.0) for p in self.outliers]
        return NukcSolution(balls)


def _duplicate_classes(space: MetricSpace) -> list:
    """Representatives of the distance-zero equivalence classes."""
    reps = []
    for p in range(space.n):
        if not any(space.dist[p, r] <= COVER_TOL for r in reps):
            reps.append(p)
    return reps


def solve_kcwo(space: MetricSpace, k: int, l: int) -> KcwoResult:
    """Cover all but at most l points with k balls of a common radius at
    most twice the optimum.

    Binary-searches the smallest pairwise distance r whose two-class
    relaxation ((k, r), (l, 0)) is fractionally feasible — a lower bound on
    the optimum — then rounds the height-two tree embedding integrally and
    opens balls of radius 2r."""
    n = space.n
    if k < 0 or l < 0 or k + l < 1:
        raise ValueError("solve_kcwo needs k >= 0, l >= 0, k + l >= 1")
    if l >= n:
        return KcwoResult([], list(range(n)), 0.0)
    reps = _duplicate_classes(space)
    if k == 0:
        raise ValueError(f"k = 0 cannot cover {n} points with only {l} excused")
    if len(reps) <= k + l:
        # Radius zero suffices: cover duplicate classes directly.
        centers = reps[:k]
        outliers = [
            p
            for p in range(n)
            if not any(space.dist[p, c] <= COVER_TOL for c in centers)
        ]
        if len(outliers) <= l:
            return KcwoResult(centers, outliers, 0.0)

    cands = sorted({float(d) for d in space.dist[np.triu_indices(n, 1)]} | {0.0})

    def fractional(r: float):
        inst = NukcInstance(space, [(k, r), (l, 0)] if l > 0 else [(k, r)])
        if inst.num_classes != (2 if l > 0 else 1):
            return None, None  # r == 0 merged the classes; handled above
        return inst, solve_fractional(inst, 1.0)

    lo, hi = 0, len(cands) - 1
    inst_hi, x_hi = fractional(cands[hi])
    if x_hi is None:
        raise ValueError("relaxation infeasible even at the metric diameter")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        inst_mid, x_mid = fractional(cands[mid])
        if x_mid is None:
            lo = mid
        else:
            hi, inst_hi, x_hi = mid, inst_mid, x_mid
    if lo == 0:
        inst0, x0 = fractional(cands[0])
        if x0 is not None:
            hi, inst_hi, x_hi = 0, inst0, x0
    r = cands[hi]

    emb = embed_basic(inst_hi, x_hi)
    if l > 0:
        ff = round_depth2(emb.tree, emb.y)
        top = set(emb.tree.levels[0])
        centers = sorted(emb.tree.psi[v] for v in ff.chosen & top)
    else:
        centers = sorted(emb.tree.psi[v] for v in emb.tree.levels[0])
    radius = 2.0 * r
    outliers = [
        p
        for p in range(n)
        if not any(space.dist[p, c] <= radius + COVER_TOL for c in centers)
    ]
    if len(centers) > k or len(outliers) > l:
        raise RuntimeError(
            f"rounding produced {len(centers)} centers / {len(outliers)} excused "
            f"points against budgets ({k}, {l})"
        )
    return KcwoResult(centers, outliers, radius)


def charikar_kcwo(space: MetricSpace, k: int, l: int, r: float) -> KcwoResult | None:
    """Greedy baseline at a fixed radius guess: k times, pick the center
    whose r-ball covers the most uncovered points (ties to the lowest id)
    and remove its 3r-ball.  Succeeds when at most l points remain.  Never
    refuses when r is the exact optimal radius."""
    n = space.n
    uncovered = np.ones(n, dtype=bool)
    inner = space.dist <= r + COVER_TOL
    outer = space.dist <= 3.0 * r + COVER_TOL
    centers = []
    for _ in range(k):
        if not uncovered.any():
            break
        gains = (inner & uncovered[None, :]).sum(axis=1)
        c = int(np.argmax(gains))
        centers.append(c)
        uncovered &= ~outer[c]
    outliers = [int(p) for p in np.nonzero(uncovered)[0]]
    if len(outliers) > l:
        return None
    return KcwoResult(centers, outliers, 3.0 * r)


def charikar_kcwo_search(space: MetricSpace, k: int, l: int) -> KcwoResult:
    """Smallest candidate radius at which the greedy succeeds."""
    if l >= space.n:
        return KcwoResult([], list(range(space.n)), 0.0)
    n = space.n
    cands = sorted({float(d) for d in space.dist[np.triu_indices(n, 1)]} | {0.0})
    for r in cands:
        res = charikar_kcwo(space, k, l, r)
        if res is not None:
            return res
    raise ValueError("greedy failed at every candidate radius")


def solve_two_radii(space: MetricSpace, class1, class2) -> NukcSolution:
    """Factor (1 + sqrt 5) for two classes (k1, r1), (k2, r2), r1 >= r2.

    When r1 < theta * r2 (theta the golden ratio), a single farthest-first
    sweep with k1 + k2 centers already gives dilation 2*theta times
    optimal.  Otherwise the relaxation at the optimal candidate dilation is
    embedded, rounded at height two, and lifted with radii 2*alpha*(r1+r2)
    and 2*alpha*r2, giving 2*(1 + 1/theta) = 1 + sqrt 5."""
    (k1, r1), (k2, r2) = class1, class2
    if r1 < r2:
        raise ValueError("classes must come radius-descending")
    instance = NukcInstance(space, [(k1, r1), (k2, r2)])
    if r2 > 0 and r1 < THETA * r2:
        centers, radius = gonzalez_kcenter(space, k1 + k2)
        balls = []
        for i, c in enumerate(centers):
            cls = 0 if i < k1 else min(1, instance.num_classes - 1)
            balls.append(Ball(c, cls, radius))
        return NukcSolution(balls)

    alpha, x = min_feasible_dilation(instance)
    if alpha == 0.0:
        return zero_dilation_solution(instance)
    scaled = instance.scaled(alpha)
    # The relaxation rows at (instance, alpha) and (scaled, 1) coincide, so
    # x stays feasible for the scaled instance at dilation 1.
    emb = embed_basic(scaled, x)
    if instance.num_classes == 1:
        chosen = set(emb.tree.levels[0])
    else:
        chosen = round_depth2(emb.tree, emb.y).chosen
    return lift_tree_solution(emb, FirefighterSolution(chosen=chosen))


def zero_dilation_solution(instance: NukcInstance) -> NukcSolution:
    """Cover at dilation zero: one zero-radius ball per distance-zero
    equivalence class, distributed over the classes in budget order.  Only
    valid when the total budget covers the number of such classes."""
    reps = _duplicate_classes(instance.space)
    balls = []
    t = 0
    used = 0
    for p in reps:
        while used >= instance.classes[t].multiplicity:
            t += 1
            used = 0
            if t >= instance.num_classes:
                raise ValueError("not enough balls for a zero-dilation cover")
        balls.append(Ball(p, t, 0.0))
        used += 1
    return NukcSolution(balls)


# ---------------------------------------------------------------------------
# Bottom-heavy rounding.
# ---------------------------------------------------------------------------


@dataclass
class BottomHeavyResult:
    solution: NukcSolution
    covered: list
    parts: list = field(default_factory=list)  # (window, points) actually used


def round_bottom_heavy(
    instance: NukcInstance,
    x: np.ndarray,
    tau: int,
    points=None,
    tol: float = 1e-7,
) -> BottomHeavyResult:
    """Round x on the points drawing coverage >= 1/2 from classes >= tau.

    The points split by where that mass sits — the window [tau, mid] with
    mid = ilog(L), or (mid, L] — and each part keeps >= 1/4 of coverage in
    its window.  Scaling its x by 4 (capped at 1) makes the part fractionally
    covered by the window alone; the barrier embedding of the part is
    re-solved to a basic point and rounded by loose vertices.  Per class t:
    at most 4*k_t + (tree height) balls, radius 8*r_t, never below tau."""
    n, h = instance.n, instance.num_classes
    L = h - 1
    if not (0 <= tau <= L):
        raise ValueError(f"tau must lie in [0, {L}], got {tau}")
    prof = coverage(instance, x)
    eligible = [p for p in range(n) if prof.suffix(p, tau) >= 0.5 - tol]
    if points is None:
        pts = eligible
    else:
        pts = sorted(points)
        bad = [p for p in pts if prof.suffix(p, tau) < 0.5 - tol]
        if bad:
            raise ValueError(
                f"points {bad} draw less than half their coverage from classes >= {tau}"
            )
    mid = min(L, max(tau, ilog(L)))
    upper = [p for p in pts if prof.window(p, tau, mid) >= 0.25 - tol]
    lower = [p for p in pts if p not in set(upper)]
    balls = []
    parts = []
    for window, part in (((tau, mid), upper), ((mid + 1, L), lower)):
        if not part:
            continue
        a, b = window
        x4 = np.minimum(4.0 * np.asarray(x, dtype=float).reshape(n, h), 1.0)
        x4[:, :a] = 0.0
        x4[:, b + 1 :] = 0.0
        emb = embed_barrier(instance, x4, points=part)
        budgets = [
            4.0 * instance.classes[t].multiplicity if a <= t <= b else 0.0
            for t in range(h)
        ] + [0.0]
        emb.tree.budgets = budgets
        y = solve_rmfct_lp(emb.tree, alpha=1.0)
        if y is None:
            raise RuntimeError("re-solved firefighter relaxation was infeasible")
        ff = round_loose(emb.tree, y, is_basic=True)
        part_sol = lift_tree_solution(emb, ff)
        balls.extend(part_sol.balls)
        parts.append((window, part))
    if any(b.class_index < tau for b in balls):
        raise RuntimeError("bottom-heavy rounding opened a ball below tau")
    return BottomHeavyResult(NukcSolution(balls), covered=pts, parts=parts)


# ---------------------------------------------------------------------------
# Guess-the-top, LP-cover the rest.
# ---------------------------------------------------------------------------


@dataclass
class GuessQResult:
    solution: NukcSolution
    dilation: float  # candidate dilation the pipeline locked onto
    tau: int
    guess: list  # the enumerated (center, class) pairs


def _window_lp_feasible(instance, alpha, tau, fixed_balls, tol=1e-9):
    """Cover the points missed by `fixed_balls` using classes >= tau only,
    at dilation alpha.  Returns (x, uncovered) or (None, uncovered)."""
    n, h = instance.n, instance.num_classes
    dist = instance.space.dist
    radii = instance.radii
    covered = np.zeros(n, dtype=bool)
    for center, t in fixed_balls:
        covered |= dist[center] <= alpha * radii[t] + COVER_TOL
    uncovered = [int(p) for p in np.nonzero(~covered)[0]]
    if not uncovered:
        return np.zeros((n, h)), uncovered
    x = solve_fractional(
        instance, alpha, points=uncovered, class_window=(tau, h - 1)
    )
    return x, uncovered


def solve_guess_q(
    compressed: CompressedInstance | NukcInstance,
    q: int,
    guess_budget: int = 200_000,
) -> GuessQResult:
    """Enumerate center placements for classes below tau_q (the q-times
    iterated log of L, clamped to [0, L]), LP-cover the remaining points
    with classes >= tau_q, and round bottom-heavy.  The dilation is the
    smallest candidate at which some guess admits a fractional cover."""
    instance = (
        compressed.instance if isinstance(compressed, CompressedInstance) else compressed
    )
    n, h = instance.n, instance.num_classes
    L = h - 1
    tau = max(0, min(L, iterated_log(L, max(q, 1))))

    guess_classes = list(range(tau))
    combos = 1
    for t in guess_classes:
        combos *= math.comb(n + instance.classes[t].multiplicity - 1,
                            instance.classes[t].multiplicity)
    if combos > guess_budget:
        raise SizeBudgetError(
            f"guess enumeration needs {combos} placements (> budget {guess_budget})"
        )
    per_class = [
        list(combinations_with_replacement(range(n), instance.classes[t].multiplicity))
        for t in guess_classes
    ]
    guesses = [
        [(c, t) for t, picks in zip(guess_classes, combo) for c in picks]
        for combo in product(*per_class)
    ] or [[]]

    cands = candidate_dilations(instance)

    def first_feasible(alpha):
        for guess in guesses:
            x, uncovered = _window_lp_feasible(instance, alpha, tau, guess)
            if x is not None:
                return guess, x, uncovered
        return None

    hit_hi = first_feasible(cands[-1])
    if hit_hi is None:
        raise ValueError("no guess admits a cover at the largest candidate dilation")
    lo, hi = 0, len(cands) - 1
    hit0 = first_feasible(cands[0])
    if hit0 is not None:
        hi, hit_hi = 0, hit0
    else:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            hit = first_feasible(cands[mid])
            if hit is None:
                lo = mid
            else:
                hi, hit_hi = mid, hit
    alpha = cands[hi]
    guess, x, uncovered = hit_hi

    balls = [Ball(c, t, alpha * instance.radii[t]) for c, t in guess]
    if uncovered:
        scaled = instance if alpha == 0 else instance.scaled(alpha)
        bh = round_bottom_heavy(scaled, x, tau, points=uncovered)
        balls.extend(bh.solution.balls)
    return GuessQResult(NukcSolution(balls), dilation=alpha, tau=tau, guess=guess)
