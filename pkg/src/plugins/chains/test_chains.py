import os
import random
import unittest

import networkx as nx
from scipy import stats

from src.common.errors import DistrictLabError, InvalidStartError, PolicyConfigError
from src.plugins.core import Constraints, Plan, validate
from src.plugins.enumeration import enumerate_plans
from src.plugins.instances import DATA_DIR, grid, load_instance, make_path, quadrant_plan, stripe_plan
from src.plugins.chains import (
    ChainConfig,
    StepKind,
    apply_move,
    bipartition_tree,
    flip_step,
    hamming_autocorrelation,
    neighbor_moves,
    random_spanning_tree,
    recom_seed_plan,
    recom_step,
    run_chain,
    run_chains,
    swap_step,
)

SLOW = os.getenv("DISTRICTLAB_SLOW", "").strip().lower() in ("1", "true", "yes")
IOWA = DATA_DIR / "iowa.toml"


def _changed(a: Plan, b: Plan):
    return [u for u, (x, y) in enumerate(zip(a.assignment, b.assignment)) if x != y]


class TestSpanningTree(unittest.TestCase):
    def test_tree_spans_region(self):
        g = grid(4)
        tree = random_spanning_tree(range(16), g, random.Random(1))
        self.assertEqual(tree.number_of_nodes(), 16)
        self.assertEqual(tree.number_of_edges(), 15)
        self.assertTrue(nx.is_tree(tree))
        for a, b in tree.edges:
            self.assertIn(b, g.neighbors(a))

    def test_disconnected_region(self):
        with self.assertRaises(DistrictLabError):
            random_spanning_tree([0, 3], grid(2), random.Random(0))

    def test_bipartition_balanced(self):
        g = grid(2)
        first, second = bipartition_tree(range(4), g, random.Random(2), (2, 2))
        self.assertEqual(len(first), 2)
        self.assertEqual(len(second), 2)
        self.assertTrue(g.is_connected_set(first))
        self.assertTrue(g.is_connected_set(second))

    def test_bipartition_impossible(self):
        # 路径上 1+1+1 无法切成人口各为 1.5 的两块
        self.assertIsNone(bipartition_tree(range(3), make_path([1, 1, 1]), random.Random(0), (1.5, 1.5), retries=5))

    def test_seed_plans_are_valid(self):
        g = grid(6)
        constraints = Constraints(4, 0.0)
        rng = random.Random(3)
        plans = [recom_seed_plan(g, constraints, rng) for _ in range(10)]
        accepted = [p for p in plans if p is not None]
        self.assertGreater(len(accepted), 0)
        for plan in accepted:
            self.assertTrue(validate(plan, g, constraints).valid)


class TestSteps(unittest.TestCase):
    def test_step_kind(self):
        self.assertIs(StepKind.parse("recom"), StepKind.RECOM)
        self.assertEqual(StepKind.RECOM.merge_count, 2)
        with self.assertRaises(PolicyConfigError):
            StepKind.parse("teleport")

    def test_single_district_self_loops(self):
        g = grid(3)
        plan = Plan((0,) * 9, 1)
        constraints = Constraints(1)
        rng = random.Random(0)
        self.assertIs(flip_step(plan, g, constraints, rng), plan)
        self.assertIs(swap_step(plan, g, constraints, rng), plan)
        self.assertIs(recom_step(plan, g, constraints, rng), plan)

    def test_flip_on_balanced_path_always_self_loops(self):
        g = make_path([1, 1, 1, 1])
        plan = Plan((0, 0, 1, 1), 2)
        rng = random.Random(5)
        for _ in range(50):
            self.assertIs(flip_step(plan, g, Constraints(2, 0.0), rng), plan)

    def test_accepted_flip_changes_one_unit(self):
        g = grid(6)
        constraints = Constraints(4, 0.12)
        plan = quadrant_plan(6)
        rng = random.Random(6)
        accepted = 0
        for _ in range(200):
            nxt = flip_step(plan, g, constraints, rng)
            if nxt is plan:
                continue
            accepted += 1
            self.assertEqual(len(_changed(plan, nxt)), 1)
            self.assertTrue(validate(nxt, g, constraints).valid)
            plan = nxt
        self.assertGreater(accepted, 0)

    def test_swap_preserves_sizes(self):
        g = grid(3)
        constraints = Constraints(3, 0.0)
        # 两个 L 形选区交换 1、4 后仍然连通
        plan = Plan((0, 0, 1, 0, 1, 1, 2, 2, 2), 3)
        rng = random.Random(7)
        accepted = 0
        for _ in range(300):
            nxt = swap_step(plan, g, constraints, rng)
            if nxt is plan:
                continue
            accepted += 1
            self.assertEqual(len(_changed(plan, nxt)), 2)
            self.assertEqual(sorted(nxt.assignment), sorted(plan.assignment))
            plan = nxt
        self.assertGreater(accepted, 0)

    def test_recom_leaves_other_districts_alone(self):
        g = grid(6)
        constraints = Constraints(4, 0.0)
        plan = quadrant_plan(6)
        rng = random.Random(8)
        for _ in range(100):
            nxt = recom_step(plan, g, constraints, rng)
            touched = {plan[u] for u in _changed(plan, nxt)} | {nxt[u] for u in _changed(plan, nxt)}
            self.assertLessEqual(len(touched), 2)
            self.assertTrue(validate(nxt, g, constraints).valid)
            plan = nxt

    def test_recom_reaches_both_stripes(self):
        g = grid(2)
        constraints = Constraints(2, 0.0)
        plan = Plan((0, 0, 1, 1), 2)
        rng = random.Random(9)
        seen = {plan.canonical_form()}
        for _ in range(100):
            plan = recom_step(plan, g, constraints, rng)
            seen.add(plan.canonical_form())
        self.assertEqual(seen, {(0, 0, 1, 1), (0, 1, 0, 1)})

    def test_proposals_are_symmetric(self):
        """3x3 分 3 个选区的 10 个方案上，翻转与交换的可达关系是对称的"""
        g = grid(3)
        constraints = Constraints(3, 0.0)
        space = enumerate_plans(g, constraints, collect=True).plans
        self.assertEqual(len(space), 10)
        for kind in (StepKind.FLIP, StepKind.SWAP):
            for plan in space:
                for move in neighbor_moves(kind, plan, g):
                    target = apply_move(kind, plan, g, constraints, move)
                    if target is None:
                        continue
                    back = [apply_move(kind, target, g, constraints, m) for m in neighbor_moves(kind, target, g)]
                    self.assertIn(plan, back)


class TestRunChain(unittest.TestCase):
    def setUp(self):
        self.g = grid(6)
        self.constraints = Constraints(4, 0.12)
        self.start = quadrant_plan(6)

    def test_zero_steps(self):
        config = ChainConfig(0, StepKind.FLIP, self.constraints, seed=1)
        ensemble = run_chain(self.start, config, self.g)
        self.assertEqual(ensemble.plans, [self.start])
        self.assertEqual(ensemble.steps, [0])
        self.assertEqual(ensemble.scores, [12])

    def test_seed_replay(self):
        config = ChainConfig(300, StepKind.RECOM, self.constraints, seed=4, record_every=10)
        a = run_chain(self.start, config, self.g)
        b = run_chain(self.start, config, self.g)
        self.assertEqual(a.plans, b.plans)
        self.assertEqual(a.steps, list(range(0, 301, 10)))

    def test_invalid_start(self):
        bad = Plan((0,) * 35 + (1,), 4)
        with self.assertRaises(InvalidStartError):
            run_chain(bad, ChainConfig(10, StepKind.FLIP, self.constraints), self.g)

    def test_config_checks(self):
        with self.assertRaises(PolicyConfigError):
            ChainConfig(5, StepKind.FLIP, self.constraints, record_every=10)
        with self.assertRaises(PolicyConfigError):
            ChainConfig(5, StepKind.FLIP, self.constraints, record_every=0)

    def test_records_are_valid_and_counted(self):
        for kind in StepKind:
            with self.subTest(kind=kind.value):
                config = ChainConfig(500, kind, self.constraints, seed=2, record_every=5)
                ensemble = run_chain(self.start, config, self.g)
                meta = ensemble.metadata
                self.assertEqual(meta["accepted"] + meta["self_loops"], 500)
                self.assertIn("caveat", meta)
                for plan in ensemble.plans:
                    self.assertTrue(validate(plan, self.g, self.constraints).valid)

    def test_recut_of_same_partition_is_not_accepted(self):
        """两个单元分成两个选区：重组只能切回原来的划分"""
        g = make_path([1, 1])
        config = ChainConfig(20, StepKind.RECOM, Constraints(2, 0.0), seed=1)
        ensemble = run_chain(Plan((0, 1), 2), config, g)
        self.assertEqual(ensemble.metadata["accepted"], 0)
        self.assertEqual(ensemble.metadata["self_loops"], 20)

    def test_accepted_counts_partition_changes(self):
        g = grid(4)
        config = ChainConfig(200, StepKind.RECOM, Constraints(2, 0.0), seed=8)
        ensemble = run_chain(stripe_plan(4, 4, 2), config, g)
        forms = [p.canonical_form() for p in ensemble.plans]
        changes = sum(1 for a, b in zip(forms, forms[1:]) if a != b)
        self.assertEqual(ensemble.metadata["accepted"], changes)

    def test_hamming_autocorrelation_grows(self):
        config = ChainConfig(5000, StepKind.FLIP, self.constraints, seed=3)
        ensemble = run_chain(self.start, config, self.g)
        lags = hamming_autocorrelation(ensemble, [1, 2, 4, 8])
        values = [lags[lag] for lag in (1, 2, 4, 8)]
        self.assertEqual(values, sorted(values))
        self.assertGreater(values[-1], values[0])

    def test_parallel_chains(self):
        config = ChainConfig(100, StepKind.RECOM, self.constraints, seed=6, record_every=10)
        one = run_chains(self.start, config, self.g, n_chains=3, threads=1)
        many = run_chains(self.start, config, self.g, n_chains=3, threads=3)
        self.assertEqual([e.plans for e in one], [e.plans for e in many])
        self.assertEqual(len({e.seed for e in one}), 3)

    @unittest.skipUnless(SLOW, "设置 DISTRICTLAB_SLOW=1 运行长链比较")
    def test_recombination_more_compact_than_flip(self):
        """10x10 分 4 个选区：重组游走的切边数显著低于翻转游走"""
        g = grid(10)
        constraints = Constraints(4, 0.1)
        start = None
        rng = random.Random(10)
        while start is None:
            start = recom_seed_plan(g, constraints, rng)
        flips = run_chain(start, ChainConfig(100_000, StepKind.FLIP, constraints, seed=1, record_every=50), g)
        recoms = run_chain(start, ChainConfig(100_000, StepKind.RECOM, constraints, seed=1, record_every=50), g)
        half = len(flips.scores) // 2
        _, p_value = stats.mannwhitneyu(recoms.scores[half:], flips.scores[half:], alternative="less")
        self.assertLess(p_value, 0.01)


@unittest.skipUnless(IOWA.exists(), "未附带艾奥瓦州县级实例")
class TestIowaChain(unittest.TestCase):
    def test_recom_never_beats_known_optimum(self):
        loaded = load_instance(IOWA)
        g = loaded.graph
        constraints = Constraints(4, 0.05)
        start = None
        rng = random.Random(11)
        while start is None:
            start = recom_seed_plan(g, constraints, rng)
        steps = 100_000 if SLOW else 2_000
        ensemble = run_chain(start, ChainConfig(steps, StepKind.RECOM, constraints, seed=11, record_every=10), g)
        for plan in ensemble.plans:
            self.assertTrue(validate(plan, g, constraints).valid)
        self.assertGreaterEqual(min(ensemble.scores), 29)


if __name__ == "__main__":
    unittest.main()
