import os
import random
import unittest

from scipy import stats

from src.common.errors import PolicyConfigError
from src.plugins.core import Constraints, Plan, UnitGraph, cut_edges, validate
from src.plugins.instances import grid, make_path, quadrant_zones
from src.plugins.samplers import (
    FloodFillPolicy,
    flood_fill,
    iterative_merge,
    random_assignment,
    rebalance,
    rejection_sample,
    sample_ensemble,
)

SLOW = os.getenv("DISTRICTLAB_SLOW", "").strip().lower() in ("1", "true", "yes")


class TestRandomAssignment(unittest.TestCase):
    def test_single_district(self):
        g = grid(3)
        plan = random_assignment(g, 1, random.Random(1))
        self.assertEqual(plan.assignment, (0,) * 9)
        self.assertTrue(validate(plan, g, Constraints(1)).valid)

    def test_seed_replay(self):
        g = grid(5)
        a = random_assignment(g, 4, random.Random(42))
        b = random_assignment(g, 4, random.Random(42))
        self.assertEqual(a, b)

    def test_acceptance_on_two_by_two(self):
        """2x2 分两个选区：16 种带标签赋值中有 4 种合法"""
        g = grid(2)
        constraints = Constraints(2, 0.0)

        def gen(rng):
            return random_assignment(g, 2, rng)

        run = rejection_sample(gen, g, constraints, 4000, random.Random(7), target=10**9)
        self.assertEqual(run.attempts, 4000)
        self.assertAlmostEqual(run.acceptance_rate, 0.25, delta=0.03)
        for plan in run.plans:
            self.assertTrue(validate(plan, g, constraints).valid)

    def test_zero_successes_is_not_an_error(self):
        g = grid(4)
        run = rejection_sample(lambda rng: None, g, Constraints(4), 10, random.Random(0))
        self.assertTrue(run.empty)
        self.assertEqual(run.attempts, 10)


class TestFloodFill(unittest.TestCase):
    def test_two_by_two_always_stripe(self):
        g = grid(2)
        stripes = {(0, 0, 1, 1), (0, 1, 0, 1)}
        rng = random.Random(3)
        for _ in range(50):
            plan = flood_fill(g, Constraints(2), FloodFillPolicy(), rng)
            self.assertIsNotNone(plan)
            self.assertIn(plan.canonical_form(), stripes)

    def test_policy_data_mismatch(self):
        bare = UnitGraph("bare", [1, 1, 1, 1], [(0, 1), (1, 2), (2, 3)])
        with self.assertRaises(PolicyConfigError):
            flood_fill(bare, Constraints(2), FloodFillPolicy(spread_rule="bounding_box"), random.Random(0))
        with self.assertRaises(PolicyConfigError):
            flood_fill(bare, Constraints(2), FloodFillPolicy(spread_rule="county_preserving"), random.Random(0))
        zones = FloodFillPolicy(mode="whole_plan", seed_rule="zones", zones=(0, 0, 0, 0))
        with self.assertRaises(PolicyConfigError):
            flood_fill(bare, Constraints(2), zones, random.Random(0))
        with self.assertRaises(PolicyConfigError):
            FloodFillPolicy(mode="sideways")

    def test_variants_return_valid_plans_within_oracle_support(self):
        g = grid(6)
        constraints = Constraints(4, 0.0)
        policies = {
            "standard": FloodFillPolicy(),
            "bounding_box": FloodFillPolicy(spread_rule="bounding_box"),
            "whole_plan": FloodFillPolicy(mode="whole_plan"),
            "boundary": FloodFillPolicy(mode="whole_plan", seed_rule="boundary"),
            "zones": FloodFillPolicy(mode="whole_plan", seed_rule="zones", zones=quadrant_zones(6, 6)),
            "backtrack": FloodFillPolicy(backtrack_limit=5),
        }
        for name, policy in policies.items():
            with self.subTest(policy=name):
                rng = random.Random(11)
                found = 0
                for _ in range(400):
                    plan = flood_fill(g, constraints, policy, rng)
                    if plan is None:
                        continue
                    found += 1
                    self.assertTrue(validate(plan, g, constraints).valid)
                    self.assertTrue(12 <= cut_edges(plan, g) <= 28)
                self.assertGreater(found, 0)

    def test_backtracking_lowers_rejection(self):
        g = grid(6)
        constraints = Constraints(4, 0.0)
        plain = rejection_sample(
            lambda rng: flood_fill(g, constraints, FloodFillPolicy(), rng), g, constraints, 600, random.Random(2), 10**9
        )
        patient = rejection_sample(
            lambda rng: flood_fill(g, constraints, FloodFillPolicy(backtrack_limit=20), rng),
            g,
            constraints,
            600,
            random.Random(2),
            10**9,
        )
        self.assertGreater(patient.acceptance_rate, plain.acceptance_rate)

    def test_county_preserving(self):
        base = grid(4)
        counties = ["w" if c < 2 else "e" for r in range(4) for c in range(4)]
        g = UnitGraph("c4", base.populations, base.edge_list, centroids=base.centroids, counties=counties)
        rng = random.Random(8)
        policy = FloodFillPolicy(spread_rule="county_preserving", max_restarts=20)
        plan = flood_fill(g, Constraints(2), policy, rng)
        self.assertIsNotNone(plan)
        self.assertTrue(validate(plan, g, Constraints(2)).valid)

    def test_bounding_box_is_more_compact(self):
        """bounding_box 变体的平均切边数低于标准洪水填充"""
        g = grid(6)
        constraints = Constraints(4, 0.0)
        target = 10_000 if SLOW else 400
        std = sample_ensemble("flood_fill", g, constraints, target, seed=5, policy=FloodFillPolicy())
        box = sample_ensemble(
            "flood_fill", g, constraints, target, seed=5, policy=FloodFillPolicy(spread_rule="bounding_box")
        )
        std_scores = [cut_edges(p, g) for p in std.plans]
        box_scores = [cut_edges(p, g) for p in box.plans]
        self.assertLess(sum(box_scores) / len(box_scores), sum(std_scores) / len(std_scores))
        _, p_value = stats.mannwhitneyu(box_scores, std_scores, alternative="less")
        self.assertLess(p_value, 0.01)


class TestRebalance(unittest.TestCase):
    def test_already_feasible_is_fixed_point(self):
        g = grid(2)
        plan = Plan((0, 0, 1, 1), 2)
        result = rebalance(plan, g, Constraints(2), 100, random.Random(0))
        self.assertTrue(result.success)
        self.assertIs(result.plan, plan)
        self.assertEqual(result.moves, 0)

    def test_path_example(self):
        g = make_path([1, 1, 1, 3])
        result = rebalance(Plan((0, 0, 1, 1), 2), g, Constraints(2, 0.0), 100, random.Random(0))
        self.assertTrue(result.success)
        self.assertEqual(result.plan.assignment, (0, 0, 0, 1))

    def test_blocked_by_contiguity(self):
        # 单元 1 是选区 0 的割点，也是它唯一的边界单元
        g = UnitGraph("t", [1, 1, 1, 1], [(0, 1), (1, 2), (1, 3)])
        plan = Plan((0, 0, 0, 1), 2)
        result = rebalance(plan, g, Constraints(2, 0.0), 100, random.Random(0))
        self.assertFalse(result.success)
        self.assertEqual(result.plan, plan)


class TestIterativeMerge(unittest.TestCase):
    def test_no_merging_needed(self):
        g = grid(2)
        plan = iterative_merge(g, Constraints(4, 0.0), random.Random(0))
        self.assertIsNotNone(plan)
        self.assertEqual(sorted(plan.assignment), [0, 1, 2, 3])

    def test_disconnected_input(self):
        g = UnitGraph("split", [1, 1, 1, 1], [(0, 1), (2, 3)], centroids=[(0, 0), (1, 0), (5, 0), (6, 0)])
        self.assertIsNone(iterative_merge(g, Constraints(1, 0.0), random.Random(0)))

    def test_requires_centroids(self):
        g = UnitGraph("bare", [1, 1], [(0, 1)])
        with self.assertRaises(PolicyConfigError):
            iterative_merge(g, Constraints(1), random.Random(0))

    def test_produces_valid_plans(self):
        g = grid(6)
        constraints = Constraints(4, 0.12)
        rng = random.Random(4)
        plans = [iterative_merge(g, constraints, rng) for _ in range(60)]
        accepted = [p for p in plans if p is not None]
        self.assertGreater(len(accepted), 0)
        for plan in accepted:
            self.assertTrue(validate(plan, g, constraints).valid)


class TestEnsemble(unittest.TestCase):
    def test_thread_count_invariance(self):
        g = grid(6)
        constraints = Constraints(4, 0.0)
        one = sample_ensemble("flood_fill", g, constraints, 60, seed=9, threads=1, chunk_size=20)
        many = sample_ensemble("flood_fill", g, constraints, 60, seed=9, threads=3, chunk_size=20)
        self.assertEqual(one.plans, many.plans)
        self.assertEqual(one.attempts, many.attempts)
        self.assertEqual(one.successes, 60)

    def test_unknown_generator(self):
        with self.assertRaises(PolicyConfigError):
            sample_ensemble("nope", grid(2), Constraints(2), 1, seed=0)


if __name__ == "__main__":
    unittest.main()
