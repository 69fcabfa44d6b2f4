import itertools

import numpy as np
import pytest

from nukc.gadgets import random_layered_tree
from nukc.rmfct import (
    FirefighterInfeasibleError,
    LayeredTree,
    build_rmfct_lp,
    exact_rmfct,
    is_feasible_set,
    round_depth2,
    round_loose,
    solve_rmfct_lp,
)
from nukc import lp


def path_tree():
    # A root-excluded path 1 - 2 - 3, budgets 1 each.
    return LayeredTree([[1], [2], [3]], {1: None, 2: 1, 3: 2}, [1, 1, 1])


def binary_tree():
    # Complete binary of depth 2 with the root dropped: nodes 1, 2 on
    # level 0 and leaves 3..6 below them.
    levels = [[1, 2], [3, 4, 5, 6]]
    parent = {1: None, 2: None, 3: 1, 4: 1, 5: 2, 6: 2}
    return LayeredTree(levels, parent, [1, 1])


def brute_force_value(tree):
    """Independent reference: try all node subsets (small trees only)."""
    nodes = sorted(tree.level_of)
    best = None
    for r in range(len(nodes) + 1):
        for subset in itertools.combinations(nodes, r):
            if is_feasible_set(tree, subset):
                continue
            worst = 0.0
            ok = True
            for lvl in range(tree.num_levels):
                cnt = sum(1 for v in subset if tree.level_of[v] == lvl)
                b = tree.budgets[lvl]
                if cnt == 0:
                    continue
                if b == 0:
                    ok = False
                    break
                worst = max(worst, cnt / b)
            if ok and (best is None or worst < best):
                best = worst
    return best


class TestLayeredTree:
    def test_structure_validation(self):
        with pytest.raises(ValueError, match="two levels"):
            LayeredTree([[0], [0]], {0: None}, [1, 1])
        with pytest.raises(ValueError, match="one level up"):
            LayeredTree([[0], [1], [2]], {0: None, 1: 0, 2: 0}, [1, 1, 1])
        with pytest.raises(ValueError, match="budgets"):
            LayeredTree([[0], [1]], {0: None, 1: 0}, [1])

    def test_path_to_root(self):
        tree = binary_tree()
        assert tree.path_to_root(5) == [5, 2]
        assert tree.leaves == [3, 4, 5, 6]

    def test_to_text_lists_every_node(self):
        text = binary_tree().to_text()
        assert text.count("node=") == 6


class TestLp:
    def test_lp_rows(self):
        tree = binary_tree()
        prob = build_rmfct_lp(tree, 1.0)
        # 4 leaf path rows + 2 level rows.
        assert len(prob.constraints) == 6

    def test_binary_tree_fractional_threshold(self):
        # With y = a on the top nodes and 1 - a on leaves, the budgets
        # force max(2a, 4(1 - a)) <= alpha, minimized at a = 2/3: the
        # fractional threshold is alpha = 4/3.
        tree = binary_tree()
        assert solve_rmfct_lp(tree, 4.0 / 3.0 + 1e-9) is not None
        assert solve_rmfct_lp(tree, 1.3) is None

    def test_infeasible_at_small_alpha(self):
        assert solve_rmfct_lp(binary_tree(), 0.2) is None


class TestRoundDepth2:
    def test_handcrafted_half_integral(self):
        # Two top nodes each with two leaves; budgets (1, 2, 0)-style
        # depth-2 shape: top budget 1, second budget 2.
        levels = [[0, 1], [2, 3, 4, 5]]
        parent = {0: None, 1: None, 2: 0, 3: 0, 4: 1, 5: 1}
        tree = LayeredTree(levels, parent, [1.0, 2.0])
        y = {0: 0.5, 1: 0.5, 2: 0.5, 3: 0.5, 4: 0.5, 5: 0.5}
        ff = round_depth2(tree, y)
        assert not is_feasible_set(tree, ff.chosen)
        counts = ff.level_counts(tree)
        assert counts[0] <= 1 and counts[1] <= 2

    def test_accepts_three_levels_with_zero_leaf_budget(self):
        # Embed-produced trees carry an extra leaf level with budget 0.
        levels = [[0, 1], [2, 3], [4, 5]]
        parent = {0: None, 1: None, 2: 0, 3: 1, 4: 2, 5: 3}
        tree = LayeredTree(levels, parent, [1.0, 1.0, 0.0])
        y = {0: 0.5, 1: 0.5, 2: 0.5, 3: 0.5}
        ff = round_depth2(tree, y)
        assert not is_feasible_set(tree, ff.chosen)

    def test_rejects_deep_trees(self):
        with pytest.raises(ValueError):
            round_depth2(path_tree(), {0: 1.0, 1: 0.0, 2: 0.0})

    def test_rejects_infeasible_input(self):
        levels = [[0, 1], [2, 3, 4, 5]]
        parent = {0: None, 1: None, 2: 0, 3: 0, 4: 1, 5: 1}
        tree = LayeredTree(levels, parent, [1.0, 2.0])
        with pytest.raises((ValueError, FirefighterInfeasibleError)):
            round_depth2(tree, {v: 0.0 for v in range(6)})

    @pytest.mark.parametrize("seed", range(60))
    def test_random_lp_solutions_round_cleanly(self, seed):
        rng = np.random.RandomState(seed)
        tree = random_layered_tree(2, max_branching=4, seed=seed).to_layered(
            budgets=[float(rng.randint(1, 4)), float(rng.randint(1, 4))]
        )
        y = solve_rmfct_lp(tree, 1.0)
        if y is None:
            return
        ff = round_depth2(tree, y)
        assert not is_feasible_set(tree, ff.chosen)
        counts = ff.level_counts(tree)
        for lvl in range(tree.num_levels - 1):
            assert counts[lvl] <= tree.budgets[lvl] + 1e-9


class TestRoundLoose:
    @pytest.mark.parametrize("seed", range(60))
    def test_feasible_with_bounded_excess(self, seed):
        rng = np.random.RandomState(1000 + seed)
        depth = int(rng.randint(2, 5))
        tree = random_layered_tree(depth, max_branching=3, seed=seed).to_layered()
        y = solve_rmfct_lp(tree, 1.0)
        if y is None:
            return
        ff = round_loose(tree, y)
        assert not is_feasible_set(tree, ff.chosen)
        height = tree.num_levels
        assert len(ff.loose) <= height
        counts = ff.level_counts(tree)
        for lvl in range(tree.num_levels):
            assert counts[lvl] <= tree.budgets[lvl] + height

    def test_infeasible_y_reported(self):
        tree = binary_tree()
        with pytest.raises(FirefighterInfeasibleError) as err:
            round_loose(tree, {v: 0.0 for v in range(7)})
        assert err.value.uncovered_leaves


class TestExact:
    def test_path_value_one(self):
        value, chosen = exact_rmfct(path_tree())
        assert value == 1.0

    def test_binary_value_two(self):
        value, chosen = exact_rmfct(binary_tree())
        assert value == 2.0
        assert not is_feasible_set(binary_tree(), chosen)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force(self, seed):
        tree = random_layered_tree(2, max_branching=3, seed=seed).to_layered()
        if tree.num_nodes > 10:
            return
        value, chosen = exact_rmfct(tree)
        assert value == pytest.approx(brute_force_value(tree))

    def test_node_budget_guard(self):
        tree = random_layered_tree(4, max_branching=3, seed=0).to_layered()
        if tree.num_nodes > 24:
            with pytest.raises(ValueError):
                exact_rmfct(tree)
