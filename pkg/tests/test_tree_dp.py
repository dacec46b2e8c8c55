import numpy as np
import pytest

from src.analyzer.proximity import check_center_proximity
from src.errors import InvalidParameterError
from src.metric.metric_core import MetricSpace, metric_closure, scale_metric
from src.objective.objectives import clustering_cost
from src.solver.mst import kruskal
from src.solver.oracle import brute_force_optimal, tree_partition_optimal
from src.solver.tree_dp import (
    build_dp_table,
    cluster_exact,
    dp_cluster,
    dp_cost_only,
    root_and_binarize,
)
from tests.conftest import all_objectives, random_metric


def star(leaves: int) -> MetricSpace:
    n = leaves + 1
    dist = np.full((n, n), 2.0)
    dist[0, :] = dist[:, 0] = 1.0
    np.fill_diagonal(dist, 0.0)
    return MetricSpace(dist)


def hub_tree_metric(n: int, hubs: int, seed: int) -> MetricSpace:
    """Path metric of a random tree whose non-hub vertices all hang off a few hubs."""
    rng = np.random.Generator(np.random.PCG64(seed))
    far = 1e3
    weights = np.full((n, n), far)
    np.fill_diagonal(weights, 0.0)
    for v in range(1, n):
        parent = int(rng.integers(0, min(v, hubs)))
        weights[v, parent] = weights[parent, v] = rng.uniform(1.0, 2.0)
    return metric_closure(weights)


class TestBinarize:
    def test_path_needs_no_dummies(self, line4):
        bt = root_and_binarize(kruskal(line4), 0)
        assert bt.size == 4
        assert bt.dummy_count == 0
        assert bt.children[0] == (1,)

    def test_star_three_leaves(self):
        bt = root_and_binarize(kruskal(star(3)), 0)
        assert bt.size == 5
        assert bt.dummy_count == 1

    def test_star_five_leaves(self):
        bt = root_and_binarize(kruskal(star(5)), 0)
        assert bt.size == 9
        assert bt.dummy_count == 3
        assert all(len(c) <= 2 for c in bt.children)
        assert bt.children[6] == (1, 2)
        assert bt.is_dummy[6:] == (True, True, True)
        assert all(bt.orig_index[d] == 0 for d in range(6, 9))

    def test_contract_recovers_tree(self):
        m = star(5)
        tree = kruskal(m)
        bt = root_and_binarize(tree, 0)
        assert bt.contract_edges() == sorted((i, j) for i, j, _ in tree.edges)

    def test_contract_with_other_root(self):
        m = random_metric(20, seed=4)
        tree = kruskal(m)
        for root in (0, 7, 19):
            assert root_and_binarize(tree, root).contract_edges() == sorted((i, j) for i, j, _ in tree.edges)

    def test_subtree_intervals(self):
        bt = root_and_binarize(kruskal(star(5)), 0)
        assert bt.subtree_points(0) == (0, 1, 2, 3, 4, 5)
        assert bt.subtree_points(6) == (1, 2)
        assert bt.point_count[6] == 2
        assert bt.contains(6, 1)
        assert not bt.contains(6, 3)
        assert bt.real_parent(1) == 0

    def test_part_limit_counts_dummy_part(self):
        bt = root_and_binarize(kruskal(star(5)), 0)
        assert bt.part_limit(0) == 6
        assert bt.part_limit(1) == 1
        # dummy 6 holds points 1 and 2 and may still carry its parent's part
        assert bt.part_limit(6) == 3

    def test_bad_root(self, line4):
        with pytest.raises(InvalidParameterError):
            root_and_binarize(kruskal(line4), 4)


class TestDpCluster:
    def test_line4_kmedian(self, line4, kmedian):
        c = dp_cluster(root_and_binarize(kruskal(line4)), line4, kmedian, 2)
        assert c.assignment == (1, 1, 2, 2)
        assert c.centers == (0, 2)
        assert c.cost == 2.0

    def test_line4_kcenter(self, line4, kcenter):
        c = cluster_exact(line4, kcenter, 2)
        assert c.assignment == (1, 1, 2, 2)
        assert c.cost == 1.0

    def test_single_cluster(self, line4, kmedian):
        c = cluster_exact(line4, kmedian, 1)
        assert c.assignment == (1, 1, 1, 1)
        assert c.centers == (1,)
        assert c.cost == 20.0

    def test_all_singletons(self, line4, kmedian):
        c = cluster_exact(line4, kmedian, 4)
        assert c.assignment == (1, 2, 3, 4)
        assert c.cost == 0.0

    def test_single_point(self, kmedian):
        c = cluster_exact(MetricSpace([[0.0]]), kmedian, 1)
        assert c.assignment == (1,)
        assert c.cost == 0.0

    def test_cost_only(self, line4, kmedian):
        bt = root_and_binarize(kruskal(line4))
        assert dp_cost_only(bt, line4, kmedian, 2) == 2.0
        assert dp_cost_only(bt, line4, kmedian, 1) == 20.0
        assert dp_cost_only(bt, line4, kmedian, 4) == 0.0

    def test_scaling(self, kmedian):
        m = random_metric(12, seed=5)
        base = cluster_exact(m, kmedian, 3)
        scaled = cluster_exact(scale_metric(m, 3.0), kmedian, 3)
        assert scaled.assignment == base.assignment
        assert scaled.cost == pytest.approx(3.0 * base.cost, rel=1e-9)

    def test_parts_are_subtrees_and_cost_recomputes(self):
        from src.solver.mst import is_subtree_connected
        m = random_metric(30, seed=6)
        tree = kruskal(m)
        bt = root_and_binarize(tree, 3)
        for obj in all_objectives(30, seed=6):
            c = dp_cluster(bt, m, obj, 5)
            assert c.k == 5
            assert all(is_subtree_connected(tree, block) for block in c.blocks())
            assert clustering_cost(c.assignment, m, obj)[0] == pytest.approx(c.cost, rel=1e-9)

    def test_star_uses_dummies(self, kmedian):
        m = star(5)
        bt = root_and_binarize(kruskal(m), 0)
        for k in range(1, 7):
            assert dp_cost_only(bt, m, kmedian, k) == pytest.approx(
                tree_partition_optimal(bt, m, kmedian, k).optimal_cost, rel=1e-9)

    def test_star_every_leaf_alone(self, kmedian):
        m = star(5)
        c = cluster_exact(m, kmedian, 6)
        assert c.assignment == (1, 2, 3, 4, 5, 6)
        assert c.cost == 0.0
        assert cluster_exact(m, kmedian, 5).cost == 1.0

    def test_dummy_with_both_children_cut(self, kmedian, kcenter):
        # MST is the star 0-1, 0-2, 0-3 and the optimum cuts off both leaves under the dummy
        m = MetricSpace([
            [0.0, 5.0, 5.0, 0.1],
            [5.0, 0.0, 9.0, 5.1],
            [5.0, 9.0, 0.0, 5.1],
            [0.1, 5.1, 5.1, 0.0],
        ])
        for obj in (kmedian, kcenter):
            oracle = brute_force_optimal(m, obj, 3)
            assert oracle.optimal_partitions == [[1, 2, 3, 1]]
            for root in range(4):
                c = cluster_exact(m, obj, 3, root=root)
                assert list(c.assignment) == oracle.optimal_partitions[0]
                assert c.cost == pytest.approx(0.1, rel=1e-9)
                assert check_center_proximity(c, m, 2.0).holds

    @pytest.mark.parametrize("k", [0, 5])
    def test_invalid_k(self, line4, kmedian, k):
        with pytest.raises(InvalidParameterError):
            dp_cluster(root_and_binarize(kruskal(line4)), line4, kmedian, k)

    def test_tree_size_mismatch(self, line4, line3, kmedian):
        with pytest.raises(InvalidParameterError):
            dp_cost_only(root_and_binarize(kruskal(line3)), line4, kmedian, 2)


class TestDpTable:
    def test_keep_costs(self, line4, kmedian):
        bt = root_and_binarize(kruskal(line4))
        table = build_dp_table(bt, line4, kmedian, 2, keep_choices=False, keep_costs=True)
        assert set(table.costs) == set(range(bt.size))
        assert table.case == {}
        assert table.value == table.root_costs.min() == 2.0
        # the leaf's only state is one part served by its center
        leaf = 3
        assert table.costs[leaf][1, 3] == 0.0
        assert table.costs[leaf][1, 2] == 1.0
        assert np.isinf(table.costs[leaf][2]).all()

    def test_center_outside_subtree(self, line4, kmedian):
        bt = root_and_binarize(kruskal(line4))
        table = build_dp_table(bt, line4, kmedian, 2, keep_costs=True)
        # node 2 with child 3 and one part served from point 0 outside T_2
        assert table.costs[2][1, 0] == 10.0 + 11.0


class TestExactOverTreePartitions:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_tree_enumeration(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        n = int(rng.integers(2, 10))
        m = random_metric(n, seed, dim=int(rng.integers(1, 4)))
        tree = kruskal(m)
        for obj in all_objectives(n, seed):
            bt = root_and_binarize(tree, int(rng.integers(0, n)))
            for k in range(1, n + 1):
                dp = dp_cost_only(bt, m, obj, k)
                enumerated = tree_partition_optimal(bt, m, obj, k).optimal_cost
                assert dp == pytest.approx(enumerated, rel=1e-9, abs=1e-12)
                assert dp >= brute_force_optimal(m, obj, k).optimal_cost - 1e-9 * max(1.0, dp)

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_tree_enumeration_on_high_degree_trees(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed + 300))
        n = int(rng.integers(4, 10))
        m = hub_tree_metric(n, hubs=int(rng.integers(1, 3)), seed=seed)
        tree = kruskal(m)
        for obj in all_objectives(n, seed):
            bt = root_and_binarize(tree, int(rng.integers(0, n)))
            for k in range(1, n + 1):
                dp = dp_cluster(bt, m, obj, k)
                enumerated = tree_partition_optimal(bt, m, obj, k).optimal_cost
                assert dp.cost == pytest.approx(enumerated, rel=1e-9, abs=1e-12)

    def test_root_does_not_change_cost(self, kmeans):
        m = random_metric(25, seed=9)
        tree = kruskal(m)
        costs = {round(dp_cost_only(root_and_binarize(tree, r), m, kmeans, 4), 9) for r in range(0, 25, 6)}
        assert len(costs) == 1
