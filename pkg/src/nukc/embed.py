"""Embedding a fractional ball-cover into a layered tree.

Given a fractional solution x feasible at dilation 1, the embedding builds
a layered tree whose level t corresponds to radius class t and whose
leaves are the instance points, together with node values y that are
feasible for the firefighter relaxation at budget factor 1: leaf path sums
are at least 1 and the level-t y sum is at most k_t.

Two modes:

* "basic": one clustering round per level, gathering radius 2*r_{t}.
  Lifting a chosen level-t node opens a ball of radius
  2 * (r_t + r_{t+1} + ... + r_{h-1}) at its mapped point.
* "barrier": rounds jump over levels whose radii are within a factor two,
  replicating winners down the skipped span; the gathering radius at a
  span topped by level t is 2*r_t.  Consecutive span radii shrink
  geometrically, so an ancestor at level t is within 8*r_t of every
  descendant's mapped point, and lifting opens balls of radius 8*r_t.
  The factor-8 bound is audited at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metric import COVER_TOL
from .model import Ball, NukcInstance, NukcSolution, coverage
from .rmfct import FirefighterInfeasibleError, FirefighterSolution, LayeredTree

AUDIT_TOL = 1e-9


@dataclass
class EmbedResult:
    tree: LayeredTree
    mode: str
    instance: NukcInstance
    leaf_points: list
    winners: list  # per level 0..h-1, the mapped winner points in pick order
    barrier_levels: list = field(default_factory=list)  # span-top levels
    leaf_node_of: dict = field(default_factory=dict)  # point -> leaf node id
    y: dict = field(default_factory=dict)

    def winner_nodes(self, level: int) -> list:
        return list(self.tree.levels[level])


def _audit_barrier(result: EmbedResult) -> None:
    """Hard postcondition: every ancestor at level t sits within 8*r_t of
    every descendant's mapped point."""
    tree = result.tree
    dist = result.instance.space.dist
    radii = result.instance.radii
    psi = tree.psi
    h = result.instance.num_classes

    def walk(v, ancestors):
        for (lvl, pt) in ancestors:
            d = dist[pt, psi[v]]
            if d > 8.0 * radii[lvl] + AUDIT_TOL:
                raise RuntimeError(
                    f"barrier audit failed: ancestor at level {lvl} (point {pt}) "
                    f"is {d:g} > 8*{radii[lvl]:g} from descendant point {psi[v]}"
                )
        lvl_v = tree.level_of[v]
        nxt = ancestors + [(lvl_v, psi[v])] if lvl_v < h else ancestors
        for c in tree.children[v]:
            walk(c, nxt)

    for v in tree.levels[0]:
        walk(v, [])


def embed(
    instance: NukcInstance,
    x: np.ndarray,
    mode: str = "basic",
    points=None,
    audit: bool = True,
) -> EmbedResult:
    """Embed a fractional solution x (feasible at dilation 1, covering at
    least the points in `points`) into a layered tree.  Winner selection
    minimizes the suffix coverage at the current level, ties to the lowest
    point id."""
    if mode not in ("basic", "barrier"):
        raise ValueError(f"unknown embed mode {mode!r}")
    n, h = instance.n, instance.num_classes
    radii = instance.radii
    dist = instance.space.dist
    pts = sorted(range(n)) if points is None else sorted(points)
    if not pts:
        raise ValueError("cannot embed an empty point set")
    prof = coverage(instance, x)

    def suffix(p, level):
        return prof.suffix(p, level)

    next_node = 0

    def new_node():
        nonlocal next_node
        next_node += 1
        return next_node - 1

    levels = [[] for _ in range(h + 1)]
    parent = {}
    psi = {}
    yval = {}
    leaf_node_of = {}
    # Leaf level h: identity on the embedded points.
    node_of = {}  # point -> its current top node
    for p in pts:
        v = new_node()
        levels[h].append(v)
        psi[v] = p
        leaf_node_of[p] = v
        node_of[p] = v

    winners_at = [[] for _ in range(h)]
    barrier_tops = []
    cur = h  # current top level already built
    while cur >= 1:
        if mode == "basic":
            span_top = cur - 1
        else:
            # Smallest class index whose radius is within twice the radius
            # one level up from here; the span [span_top, cur-1] is built
            # in one round with gathering radius 2 * r_{span_top}.
            span_top = cur - 1
            for s in range(cur - 1):
                if radii[s] <= 2.0 * radii[cur - 1] + COVER_TOL:
                    span_top = s
                    break
        gather = 2.0 * radii[span_top]
        active = sorted(node_of)  # points owning a node at level `cur`
        new_node_of = {}
        while active:
            # Winner: minimal suffix coverage at the current level, ties to
            # the lowest point id (`active` is sorted).
            p = min(active, key=lambda q: (suffix(q, cur), q))
            group = [q for q in active if dist[p, q] <= gather + COVER_TOL]
            chain_child = [node_of[q] for q in group]
            for lvl in range(cur - 1, span_top - 1, -1):
                w = new_node()
                levels[lvl].append(w)
                psi[w] = p
                yval[w] = prof.cov[p, lvl]
                for cnode in chain_child:
                    parent[cnode] = w
                chain_child = [w]
                winners_at[lvl].append(p)
            new_node_of[p] = chain_child[0]
            active = [q for q in active if q not in group]
        node_of = new_node_of
        barrier_tops.append(span_top)
        cur = span_top
    for v in levels[0]:
        parent[v] = None

    budgets = [float(c.multiplicity) for c in instance.classes] + [0.0]
    tree = LayeredTree(levels, parent, budgets, psi=psi)
    result = EmbedResult(
        tree=tree,
        mode=mode,
        instance=instance,
        leaf_points=pts,
        winners=winners_at,
        barrier_levels=sorted(barrier_tops) if mode == "barrier" else [],
        leaf_node_of=leaf_node_of,
        y={v: float(val) for v, val in yval.items()},
    )
    if mode == "barrier" and audit:
        _audit_barrier(result)
    return result


def embed_basic(instance, x, points=None) -> EmbedResult:
    return embed(instance, x, mode="basic", points=points)


def embed_barrier(instance, x, points=None, audit: bool = True) -> EmbedResult:
    return embed(instance, x, mode="barrier", points=points, audit=audit)


def lift_radius(result: EmbedResult, level: int) -> float:
    """Ball radius used when opening a chosen level-`level` node."""
    radii = result.instance.radii
    if result.mode == "basic":
        return 2.0 * sum(radii[level:])
    return 8.0 * radii[level]


def lift_tree_solution(
    result: EmbedResult, firefighter: FirefighterSolution
) -> NukcSolution:
    """Open, for every chosen node at level t, a ball of the mode's lift
    radius at the node's mapped point, charged to class t.  Raises with an
    uncovered-point report when the firefighter input misses some leaf."""
    h = result.instance.num_classes
    tree = result.tree
    balls = []
    for v in sorted(firefighter.chosen):
        lvl = tree.level_of[v]
        if lvl >= h:
            raise ValueError(
                f"chosen node {v} lies on the leaf level, which carries no class"
            )
        balls.append(Ball(tree.psi[v], lvl, lift_radius(result, lvl)))
    dist = result.instance.space.dist
    uncovered = [
        p
        for p in result.leaf_points
        if not any(dist[p, b.center] <= b.radius_used + COVER_TOL for b in balls)
    ]
    if uncovered:
        raise FirefighterInfeasibleError(
            f"firefighter solution leaves {len(uncovered)} embedded points uncovered",
            uncovered_leaves=uncovered,
        )
    return NukcSolution(balls)
