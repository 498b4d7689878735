import os
import random
import unittest

from src.common.errors import BudgetExceededError, DistrictLabError
from src.plugins.core import Constraints, cut_edges, validate
from src.plugins.enumeration import DEFAULT_NODE_BUDGET, cut_edge_distribution, enumerate_plans, iter_plans
from src.plugins.instances import grid

SLOW = os.getenv("DISTRICTLAB_SLOW", "").strip().lower() in ("1", "true", "yes")


class TestGridCounts(unittest.TestCase):
    def test_square_grid_counts(self):
        """n×n 网格分成 n 个等大连通选区的方案数"""
        expected = {1: 1, 2: 2, 3: 10, 4: 117, 5: 4006}
        for n, count in expected.items():
            with self.subTest(n=n):
                result = enumerate_plans(grid(n), Constraints(n, 0.0))
                self.assertEqual(result.count, count)
                self.assertFalse(result.partial)
                self.assertEqual(sum(result.histogram.values()), count)

    def test_small_histograms(self):
        self.assertEqual(cut_edge_distribution(enumerate_plans(grid(3), Constraints(3))), {6: 10})
        self.assertEqual(cut_edge_distribution(enumerate_plans(grid(2), Constraints(2))), {2: 2})

    def test_k_larger_than_units(self):
        self.assertEqual(enumerate_plans(grid(2), Constraints(5, 1.0)).count, 0)


class TestPlanStream(unittest.TestCase):
    def test_collected_plans_are_valid_and_canonical(self):
        g = grid(4)
        constraints = Constraints(4)
        result = enumerate_plans(g, constraints, collect=True)
        self.assertEqual(len(result.plans), 117)
        forms = set()
        for plan in result.plans:
            self.assertTrue(validate(plan, g, constraints).valid)
            self.assertEqual(plan.canonical_form(), plan.assignment)
            forms.add(plan.canonical_form())
        self.assertEqual(len(forms), 117)

    def test_histogram_matches_plans(self):
        g = grid(4)
        result = enumerate_plans(g, Constraints(4), collect=True)
        scores = {}
        for plan in result.plans:
            score = cut_edges(plan, g)
            scores[score] = scores.get(score, 0) + 1
        self.assertEqual(scores, cut_edge_distribution(result))

    def test_deterministic_order(self):
        g = grid(3)
        first = list(iter_plans(g, Constraints(3)))
        second = list(iter_plans(g, Constraints(3)))
        self.assertEqual(first, second)
        self.assertEqual(len(first), 10)

    def test_relabel_never_yields_another_plan(self):
        plans = list(iter_plans(grid(3), Constraints(3)))
        assignments = {p.assignment for p in plans}
        for plan in plans:
            swapped = tuple({0: 1, 1: 0}.get(label, label) for label in plan.assignment)
            self.assertNotIn(swapped, assignments)


class TestDeviationAndBudget(unittest.TestCase):
    def test_monotone_in_deviation(self):
        g = grid(4)
        tight = enumerate_plans(g, Constraints(4, 0.0)).count
        loose = enumerate_plans(g, Constraints(4, 0.25)).count
        self.assertLessEqual(tight, loose)
        self.assertGreater(loose, tight)

    def test_budget_guard(self):
        """10x10 在小预算下被拒绝，并附带不完整的结果"""
        with self.assertRaises(BudgetExceededError) as ctx:
            enumerate_plans(grid(10), Constraints(4), node_budget=20_000)
        partial = ctx.exception.partial
        self.assertTrue(partial.partial)
        with self.assertRaises(DistrictLabError):
            cut_edge_distribution(partial)

    def test_budget_exceeded_while_collecting(self):
        """计数刚好在预算内、收集方案时超出，也要带上不完整的结果"""
        g, c = grid(4), Constraints(4)
        counted = enumerate_plans(g, c)
        with self.assertRaises(BudgetExceededError) as ctx:
            enumerate_plans(g, c, collect=True, node_budget=counted.nodes + 1)
        partial = ctx.exception.partial
        self.assertIsNotNone(partial)
        self.assertTrue(partial.partial)
        self.assertEqual(partial.count, counted.count)
        self.assertLess(len(partial.plans), counted.count)

    def test_uniform_sampling_covers_all_plans(self):
        result = enumerate_plans(grid(3), Constraints(3))
        rng = random.Random(5)
        seen = {result.enumerator.sample_uniform(rng).assignment for _ in range(400)}
        self.assertEqual(len(seen), 10)


@unittest.skipUnless(SLOW, "设置 DISTRICTLAB_SLOW=1 运行耗时测试")
class TestSixBySix(unittest.TestCase):
    def test_four_districts(self):
        result = enumerate_plans(grid(6), Constraints(4, 0.0))
        self.assertEqual(result.count, 442_791)
        hist = cut_edge_distribution(result)
        self.assertEqual(min(hist), 12)
        self.assertEqual(max(hist), 28)
        middle = sum(c for score, c in hist.items() if 21 <= score <= 28)
        self.assertGreaterEqual(middle / result.count, 0.93)

    def test_six_districts(self):
        self.assertEqual(enumerate_plans(grid(6), Constraints(6, 0.0)).count, 451_206)

    def test_default_budget_refuses_ten_by_ten(self):
        """默认上限能跑完 6x6/k=4，但拒绝 10x10/k=4"""
        self.assertLess(enumerate_plans(grid(6), Constraints(4, 0.0)).nodes, DEFAULT_NODE_BUDGET)
        with self.assertRaises(BudgetExceededError) as ctx:
            enumerate_plans(grid(10), Constraints(4, 0.0), progress_every=0)
        self.assertTrue(ctx.exception.partial.partial)
        self.assertGreaterEqual(ctx.exception.partial.nodes, DEFAULT_NODE_BUDGET)


if __name__ == "__main__":
    unittest.main()
