"""Layered trees and the fractional firefighter relaxation on them.

A layered tree has non-root levels 0..h-1 (every node's parent sits one
level up; level-0 nodes hang off an implicit root) and all leaves on the
last level.  A firefighter solution picks non-root nodes hitting every
root-to-leaf path, subject to per-level budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp

ROUND_TOL = 1e-7


class FirefighterInfeasibleError(ValueError):
    def __init__(self, message, uncovered_leaves=None):
        super().__init__(message)
        self.uncovered_leaves = uncovered_leaves or []


class LayeredTree:
    """levels[i] lists the node ids on level i (levels[-1] are the leaves);
    parent[v] is the node one level up, or None on level 0.  budgets[i] is
    the per-level budget; psi optionally maps nodes to metric points."""

    def __init__(self, levels, parent, budgets, psi=None):
        self.levels = [list(lv) for lv in levels]
        self.parent = dict(parent)
        self.budgets = [float(b) for b in budgets]
        self.psi = dict(psi) if psi is not None else None
        if len(self.budgets) != len(self.levels):
            raise ValueError("budgets must have one entry per level")
        self.level_of = {}
        for i, lv in enumerate(self.levels):
            for v in lv:
                if v in self.level_of:
                    raise ValueError(f"node {v} appears on two levels")
                self.level_of[v] = i
        self.children = {v: [] for v in self.level_of}
        for v, p in self.parent.items():
            if p is None:
                if self.level_of[v] != 0:
                    raise ValueError(f"non-top node {v} has no parent")
                continue
            if self.level_of[p] != self.level_of[v] - 1:
                raise ValueError(f"parent of {v} is not one level up")
            self.children[p].append(v)
        for v in self.level_of:
            if v not in self.parent:
                raise ValueError(f"node {v} missing from parent map")
            self.children[v].sort()

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def num_nodes(self) -> int:
        return len(self.level_of)

    @property
    def leaves(self) -> list:
        return self.levels[-1]

    def path_to_root(self, v: int) -> list:
        """Nodes on the path from v (inclusive) up to level 0."""
        out = []
        while v is not None:
            out.append(v)
            v = self.parent[v]
        return out

    def to_text(self) -> str:
        lines = []
        for i, lv in enumerate(self.levels):
            for v in lv:
                psi = "" if self.psi is None else f" psi={self.psi.get(v)}"
                lines.append(f"node={v} level={i} parent={self.parent[v]}{psi}")
        return "\n".join(lines)


@dataclass
class FirefighterSolution:
    chosen: set
    loose: set = field(default_factory=set)

    def level_counts(self, tree: LayeredTree) -> list:
        counts = [0] * tree.num_levels
        for v in self.chosen:
            counts[tree.level_of[v]] += 1
        return counts


def is_feasible_set(tree: LayeredTree, chosen) -> list:
    """Leaves whose root path misses `chosen` (empty list == feasible)."""
    chosen = set(chosen)
    return [v for v in tree.leaves if not chosen.intersection(tree.path_to_root(v))]


def build_rmfct_lp(tree: LayeredTree, alpha: float = 1.0) -> lp.LpProblem:
    """Fractional relaxation: y_v in [0,1] per node, path sums >= 1 per
    leaf, level sums <= alpha * budget."""
    nodes = sorted(tree.level_of)
    idx = {v: i for i, v in enumerate(nodes)}
    prob = lp.LpProblem(num_vars=len(nodes))
    prob.bounds = [(0.0, 1.0)] * len(nodes)
    for leaf in tree.leaves:
        row = np.zeros(len(nodes))
        for v in tree.path_to_root(leaf):
            row[idx[v]] = 1.0
        prob.add_constraint(row, lp.GE, 1.0)
    for i, lv in enumerate(tree.levels):
        row = np.zeros(len(nodes))
        for v in lv:
            row[idx[v]] = 1.0
        prob.add_constraint(row, lp.LE, alpha * tree.budgets[i])
    return prob


def solve_rmfct_lp(tree: LayeredTree, alpha: float = 1.0):
    """Returns a basic feasible y (dict node -> value) or None."""
    sol = lp.solve(build_rmfct_lp(tree, alpha))
    if not sol.ok:
        return None
    nodes = sorted(tree.level_of)
    return {v: float(sol.values[i]) for i, v in enumerate(nodes)}


# ---------------------------------------------------------------------------
# Height-two integral rounding (shifting scheme).
# ---------------------------------------------------------------------------


def _depth2_levels(tree: LayeredTree):
    if tree.num_levels == 2:
        return tree.levels[0], tree.levels[1]
    if tree.num_levels == 3 and tree.budgets[2] == 0:
        # Leaves carry budget zero; every second-level node has a leaf
        # below it, so the covering rows collapse to parent+node >= 1.
        for v in tree.levels[1]:
            if not tree.children[v]:
                raise ValueError(f"second-level node {v} has no leaf below it")
        return tree.levels[0], tree.levels[1]
    raise ValueError(
        "round_depth2 needs exactly two budgeted levels "
        f"(got {tree.num_levels} levels, budgets {tree.budgets})"
    )


def round_depth2(tree: LayeredTree, y: dict, tol: float = ROUND_TOL) -> FirefighterSolution:
    """Round a feasible fractional y on a height-two tree to an integral
    solution within the same integer budgets.

    Repeatedly pairs the two lowest-id fractional top-level nodes, shifts
    mass from the one with fewer children to the one with more (ties to
    the lower id), moving the opposite amount across their children; the
    shift size is the largest keeping all variables in [0, 1], so at least
    one variable hits a bound per step.  A single remaining fractional
    top-level node is raised to 1 (the integer budget leaves room).
    """
    top, second = _depth2_levels(tree)
    k1 = tree.budgets[0]
    k2 = tree.budgets[1]
    if abs(k1 - round(k1)) > tol or abs(k2 - round(k2)) > tol:
        raise ValueError(f"round_depth2 needs integer budgets, got {k1}, {k2}")
    k1, k2 = int(round(k1)), int(round(k2))
    y = dict(y)
    for v in second:
        pathsum = y.get(v, 0.0) + y.get(tree.parent[v], 0.0)
        if pathsum < 1.0 - tol:
            raise ValueError(f"input y infeasible at node {v}: path sum {pathsum}")

    def fractional_top():
        return [w for w in sorted(top) if tol < y.get(w, 0.0) < 1.0 - tol]

    max_steps = 4 * (len(top) + len(second) + 1) ** 2
    for _ in range(max_steps):
        frac = fractional_top()
        if not frac:
            break
        if len(frac) == 1:
            w = frac[0]
            # Integer budget: the other top nodes are integral, so the
            # level sum leaves at least 1 - y_w of room.
            y[w] = 1.0
            continue
        a, bnode = frac[0], frac[1]
        ca = [c for c in tree.children[a] if c in tree.level_of and tree.level_of[c] == 1]
        cb = [c for c in tree.children[bnode] if tree.level_of[c] == 1]
        if len(ca) >= len(cb):
            up, down, cup, cdown = a, bnode, ca, cb
        else:
            up, down, cup, cdown = bnode, a, cb, ca
        eps = min(1.0 - y[up], y[down])
        for c in cup:
            eps = min(eps, y.get(c, 0.0))
        for c in cdown:
            if y.get(c, 0.0) < 1.0 - tol:
                eps = min(eps, 1.0 - y.get(c, 0.0))
        if eps <= tol:
            raise RuntimeError("shifting step stalled; input y was not feasible")
        y[up] += eps
        y[down] -= eps
        for c in cup:
            y[c] = y.get(c, 0.0) - eps
        for c in cdown:
            if y.get(c, 0.0) < 1.0 - tol:
                y[c] = y.get(c, 0.0) + eps
        for v in (up, down, *cup, *cdown):
            if y[v] < tol:
                y[v] = 0.0
            elif y[v] > 1.0 - tol:
                y[v] = 1.0
    else:
        raise RuntimeError("round_depth2 did not terminate within its step budget")

    chosen = {w for w in top if y.get(w, 0.0) >= 1.0 - tol}
    for v in second:
        if tree.parent[v] in chosen:
            continue
        if y.get(v, 0.0) < 1.0 - tol:
            raise RuntimeError(f"rounded y leaves node {v} uncovered")
        chosen.add(v)
    sol = FirefighterSolution(chosen=chosen)
    counts = sol.level_counts(tree)
    if counts[0] > k1 or counts[1] > k2:
        raise RuntimeError(f"rounding exceeded budgets: {counts} vs ({k1}, {k2})")
    return sol


# ---------------------------------------------------------------------------
# Loose-vertex rounding for basic solutions.
# ---------------------------------------------------------------------------


def round_loose(
    tree: LayeredTree, y: dict, is_basic: bool = True, tol: float = ROUND_TOL
) -> FirefighterSolution:
    """Select every integral vertex plus every loose vertex: y_v > 0 and
    the inclusive root-prefix sum above v is below 1.  The topmost positive
    vertex of any root-leaf path is integral or loose, so the selection is
    feasible for every feasible y.  At a basic solution the loose vertices
    number at most the tree height, so each level exceeds its budget by at
    most that height."""
    integral = set()
    loose = set()
    prefix = {}

    def walk(v, acc):
        val = y.get(v, 0.0)
        acc = acc + val
        prefix[v] = acc
        if val >= 1.0 - tol:
            integral.add(v)
        elif val > tol and acc < 1.0 - tol:
            loose.add(v)
        for c in tree.children[v]:
            walk(c, acc)

    for v in tree.levels[0]:
        walk(v, 0.0)

    height = tree.num_levels
    if len(loose) > height:
        if not is_basic:
            raise ValueError(
                f"{len(loose)} loose vertices exceed the tree height {height}; "
                "the input y is not basic — re-solve the relaxation to a basic "
                "solution before rounding"
            )
        raise RuntimeError(
            f"basic y produced {len(loose)} loose vertices (> height {height})"
        )
    chosen = integral | loose
    missed = is_feasible_set(tree, chosen)
    if missed:
        raise FirefighterInfeasibleError(
            "input y does not fractionally cover all leaves", uncovered_leaves=missed
        )
    return FirefighterSolution(chosen=chosen, loose=set(loose))


# ---------------------------------------------------------------------------
# Exact search (budgeted): minimize max_t |N on level t| / budget_t.
# ---------------------------------------------------------------------------


def exact_rmfct(tree: LayeredTree, budgets=None, max_nodes: int = 24):
    """Exhaustive minimal-hitting-set search over root-leaf paths.

    Returns (value, chosen) where value = min over feasible N of
    max_t |N on level t| / budget_t (0/0 counts as 0, x/0 as inf).
    Branches on the nodes of the first uncovered leaf's path, which
    enumerates exactly the minimal feasible sets; removing nodes never
    raises the objective, so the optimum is attained at one of them.
    """
    if tree.num_nodes > max_nodes:
        raise ValueError(
            f"exact_rmfct limited to {max_nodes} nodes, tree has {tree.num_nodes}"
        )
    budgets = list(budgets) if budgets is not None else list(tree.budgets)
    leaves = sorted(tree.leaves)
    paths = {leaf: tree.path_to_root(leaf) for leaf in leaves}
    best = [math.inf, None]

    def value_of(counts):
        worst = 0.0
        for t, cnt in enumerate(counts):
            if cnt == 0:
                continue
            if budgets[t] <= 0:
                return math.inf
            worst = max(worst, cnt / budgets[t])
        return worst

    def search(chosen, counts):
        val = value_of(counts)
        if val >= best[0]:
            return
        for leaf in leaves:
            if not chosen.intersection(paths[leaf]):
                for v in paths[leaf]:
                    t = tree.level_of[v]
                    counts[t] += 1
                    chosen.add(v)
                    search(chosen, counts)
                    chosen.discard(v)
                    counts[t] -= 1
                return
        best[0] = val
        best[1] = set(chosen)

    search(set(), [0] * tree.num_levels)
    if best[1] is None:
        raise FirefighterInfeasibleError("no feasible node set exists")
    return best[0], best[1]
