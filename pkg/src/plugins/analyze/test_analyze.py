import os
import random
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.common.errors import DistrictLabError, EmptyEnsembleError, InstanceFormatError, InvalidPlanError
from src.plugins.core import Constraints, Plan, UnitGraph
from src.plugins.enumeration import EnumerationResult, enumerate_plans
from src.plugins.instances import RunMetadata, grid, quadrant_plan, stripe_plan
from src.plugins.samplers import sample_ensemble
from src.plugins.analyze import (
    Ensemble,
    compare_means,
    compare_to_oracle,
    cut_edge_histogram,
    distinct_plans,
    edge_frequency,
    edge_frequency_to_frame,
    histogram_to_frame,
    load_ensemble,
    save_ensemble,
    uniform_resample,
)

SLOW = os.getenv("DISTRICTLAB_SLOW", "").strip().lower() in ("1", "true", "yes")


def _oracle(n, k, collect=False):
    return enumerate_plans(grid(n), Constraints(k), collect=collect)


class TestHistogram(unittest.TestCase):
    def test_three_by_three_enumeration(self):
        g = grid(3)
        oracle = _oracle(3, 3, collect=True)
        ensemble = Ensemble.from_plans(oracle.plans, g, algorithm="enumeration")
        self.assertEqual(cut_edge_histogram(ensemble), {6: 10})

    def test_single_plan(self):
        ensemble = Ensemble.from_plans([quadrant_plan(6)], grid(6))
        self.assertEqual(cut_edge_histogram(ensemble), {12: 1})

    def test_total_matches_size(self):
        g = grid(4)
        oracle = _oracle(4, 4, collect=True)
        ensemble = Ensemble.from_plans(oracle.plans, g)
        self.assertEqual(sum(cut_edge_histogram(ensemble).values()), len(ensemble))
        self.assertEqual(cut_edge_histogram(ensemble), oracle.histogram)

    def test_scores_from_graph(self):
        g = grid(6)
        bare = Ensemble(plans=[quadrant_plan(6)])
        self.assertEqual(cut_edge_histogram(bare, g), {12: 1})
        with self.assertRaises(DistrictLabError):
            cut_edge_histogram(bare)

    def test_empty(self):
        with self.assertRaises(EmptyEnsembleError):
            cut_edge_histogram(Ensemble())


class TestEdgeFrequency(unittest.TestCase):
    def test_complementary_stripes(self):
        g = grid(2)
        freq = edge_frequency([Plan((0, 0, 1, 1), 2), Plan((0, 1, 0, 1), 2)], g)
        np.testing.assert_allclose(freq.values, [0.5] * 4)
        self.assertEqual(freq.sample_size, 2)

    def test_single_plan_indicator(self):
        g = grid(6)
        freq = edge_frequency([quadrant_plan(6)], g)
        self.assertTrue(set(np.unique(freq.values)) <= {0.0, 1.0})
        self.assertEqual(int(freq.values.sum()), 12)
        self.assertEqual(freq.of(2, 3), 1.0)
        self.assertEqual(freq.of(1, 0), 0.0)

    def test_union_is_weighted_mean(self):
        g = grid(4)
        plans = _oracle(4, 2, collect=True).plans
        first, second = plans[:3], plans[3:8]
        merged = Ensemble.from_plans(first, g).merged_with(Ensemble.from_plans(second, g))
        expected = (3 * edge_frequency(first, g).values + 5 * edge_frequency(second, g).values) / 8
        np.testing.assert_allclose(edge_frequency(merged, g).values, expected)

    def test_order_invariant(self):
        g = grid(4)
        plans = _oracle(4, 4, collect=True).plans
        shuffled = list(plans)
        random.Random(0).shuffle(shuffled)
        np.testing.assert_allclose(edge_frequency(plans, g).values, edge_frequency(shuffled, g).values)

    def test_empty(self):
        with self.assertRaises(EmptyEnsembleError):
            edge_frequency([], grid(2))

    @unittest.skipUnless(SLOW, "设置 DISTRICTLAB_SLOW=1 运行 6x6 全枚举的边频率")
    def test_center_edges_cut_more_often(self):
        g = grid(6)
        oracle = enumerate_plans(g, Constraints(4))
        sample = uniform_resample(oracle, 20_000, random.Random(0))
        freq = edge_frequency(sample, g)
        # 中心的边 (14,15) 对比角落的边 (0,1)
        self.assertGreater(freq.of(14, 15), freq.of(0, 1))


class TestOracleComparison(unittest.TestCase):
    def test_full_oracle_has_zero_distance(self):
        g = grid(4)
        oracle = _oracle(4, 4, collect=True)
        report = compare_to_oracle(Ensemble.from_plans(oracle.plans, g), oracle)
        self.assertAlmostEqual(report.tv_distance, 0.0)
        self.assertAlmostEqual(report.chi_square, 0.0)
        self.assertAlmostEqual(report.p_value, 1.0)
        self.assertEqual(report.sample_size, oracle.count)

    def test_single_bin(self):
        g = grid(3)
        oracle = _oracle(3, 3, collect=True)
        report = compare_to_oracle(Ensemble.from_plans(oracle.plans[:4], g), oracle)
        self.assertEqual(report.bins, 1)
        self.assertEqual(report.p_value, 1.0)

    def test_uniform_resample_is_close(self):
        oracle = _oracle(4, 4)
        sample = uniform_resample(oracle, 3000, random.Random(1))
        self.assertEqual(len(sample), 3000)
        report = compare_to_oracle(sample, oracle)
        self.assertLess(report.tv_distance, 0.1)

    def test_mismatches(self):
        oracle = _oracle(3, 3)
        with self.assertRaises(InvalidPlanError):
            compare_to_oracle(Ensemble.from_plans([quadrant_plan(4)], grid(4)), oracle)
        partial = EnumerationResult(count=3, histogram={6: 3}, partial=True, instance="grid3x3")
        with self.assertRaises(DistrictLabError):
            compare_to_oracle(Ensemble.from_plans([stripe_plan(3, 3, 3)], grid(3)), partial)
        with self.assertRaises(InvalidPlanError):
            compare_to_oracle(Ensemble.from_plans([stripe_plan(3, 3, 1)], grid(3)), oracle)

    def test_same_name_different_instance(self):
        """名称相同但人口不同的实例也算不一致"""
        oracle = _oracle(4, 4)
        base = grid(4)
        heavier = UnitGraph(base.name, (2,) + base.populations[1:], base.edge_list, centroids=base.centroids)
        with self.assertRaises(InvalidPlanError) as ctx:
            compare_to_oracle(Ensemble.from_plans([quadrant_plan(4)], heavier), oracle)
        self.assertIn("instance_hash", str(ctx.exception))
        report = compare_to_oracle(Ensemble.from_plans([quadrant_plan(4)], base), oracle)
        self.assertEqual(report.sample_size, 1)

    @unittest.skipUnless(SLOW, "设置 DISTRICTLAB_SLOW=1 运行洪水填充的均匀性检验")
    def test_flood_fill_is_not_uniform(self):
        g = grid(6)
        constraints = Constraints(4)
        oracle = enumerate_plans(g, constraints)
        run = sample_ensemble("flood_fill", g, constraints, 10_000, seed=1, max_attempts_per_chunk=500_000)
        report = compare_to_oracle(Ensemble.from_plans(run.plans, g, algorithm="flood_fill"), oracle)
        self.assertLess(report.p_value, 0.001)

    @unittest.skipUnless(SLOW, "设置 DISTRICTLAB_SLOW=1 运行 6x6 大样本均匀抽样")
    def test_six_by_six_resample(self):
        oracle = enumerate_plans(grid(6), Constraints(4))
        report = compare_to_oracle(uniform_resample(oracle, 50_000, random.Random(2)), oracle)
        self.assertLess(report.tv_distance, 0.05)


class TestSummaries(unittest.TestCase):
    def test_distinct_plans_ignores_labels(self):
        a = Plan((0, 0, 1, 1), 2)
        b = Plan((1, 1, 0, 0), 2)
        c = Plan((0, 1, 0, 1), 2)
        self.assertEqual(distinct_plans([a, b, c]), 2)

    def test_compare_means(self):
        g = grid(6)
        compact = Ensemble.from_plans([quadrant_plan(6)] * 6, g)
        stripes = Ensemble.from_plans([stripe_plan(6, 6, 6), stripe_plan(6, 6, 6, vertical=False)] * 3, g)
        result = compare_means(compact, stripes)
        self.assertLess(result.mean_a, result.mean_b)
        self.assertLess(result.p_value, 0.05)


class TestExport(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_frames(self):
        frame = histogram_to_frame({14: 2, 12: 1})
        self.assertEqual(list(frame.columns), ["score", "count"])
        self.assertEqual(frame["score"].tolist(), [12, 14])
        freq = edge_frequency([Plan((0, 0, 1, 1), 2)], grid(2))
        frame = edge_frequency_to_frame(freq)
        self.assertEqual(list(frame.columns), ["unit_a", "unit_b", "frequency"])
        self.assertEqual(len(frame), 4)

    def test_ensemble_file(self):
        g = grid(6)
        ensemble = Ensemble.from_plans(
            [quadrant_plan(6), stripe_plan(6, 6, 3)], g, algorithm="manual", seed=7, steps=[0, 10], metadata={"kind": "x"}
        )
        path = save_ensemble(self.dir / "ensemble.jsonl", ensemble, RunMetadata(algorithm="manual", seed=7))
        loaded = load_ensemble(path)
        self.assertEqual(loaded.plans, ensemble.plans)
        self.assertEqual(loaded.scores, ensemble.scores)
        self.assertEqual(loaded.steps, [0, 10])
        self.assertEqual((loaded.algorithm, loaded.seed, loaded.instance_hash), ("manual", 7, ensemble.instance_hash))
        self.assertEqual(loaded.metadata, {"kind": "x"})

    def test_missing_header(self):
        path = self.dir / "bad.jsonl"
        path.write_text('{"plan": [0, 1], "k": 2}\n', encoding="utf-8")
        with self.assertRaises(InstanceFormatError):
            load_ensemble(path)


if __name__ == "__main__":
    unittest.main()
