import contextlib
import io
import tempfile
import unittest
from pathlib import Path

from src.main import main
from src.plugins.analyze import load_ensemble
from src.plugins.instances import DATA_DIR, load_instance, load_plan, read_plan_metadata


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_enumerate_three_by_three(self):
        code, out, _ = run("enumerate", "--grid", "3x3", "--districts", "3")
        self.assertEqual(code, 0)
        self.assertIn("count: 10", out)
        self.assertIn("6\t10", out)

    def test_enumerate_writes_histogram(self):
        path = self.dir / "hist.csv"
        code, _, _ = run("enumerate", "--grid", "4x4", "-k", "4", "--out", str(path), "--seed", "3")
        self.assertEqual(code, 0)
        meta = read_plan_metadata(path)
        self.assertEqual(meta["instance"], "grid4x4")
        self.assertEqual(meta["seed"], "3")
        self.assertIn("score,count", path.read_text(encoding="utf-8"))

    def test_enumerate_budget_exceeded(self):
        code, out, _ = run("enumerate", "--grid", "6x6", "-k", "4", "--node-budget", "10")
        self.assertEqual(code, 3)
        self.assertIn("partial", out)

    def test_missing_instance(self):
        code, _, err = run("validate", "--instance", str(self.dir / "nope.toml"), "--plan", "x")
        self.assertEqual(code, 2)
        self.assertIn("error", err)

    def test_usage_errors(self):
        self.assertEqual(run("enumerate", "--districts", "3")[0], 1)
        self.assertEqual(run("no-such-command")[0], 1)
        self.assertEqual(run("sample", "--grid", "3x3", "-k", "3", "--generator", "teleport")[0], 1)
        self.assertEqual(run("--help")[0], 0)

    def test_validate_quadrants(self):
        code, out, _ = run("validate", "--grid", "6x6", "-k", "4", "--plan", "quadrants")
        self.assertEqual(code, 0)
        self.assertIn("valid: True", out)
        self.assertIn("cut_edges: 12", out)

    def test_gen_grid_then_validate(self):
        path = self.dir / "g.toml"
        code, out, _ = run("gen-grid", "--grid", "4x4", "-k", "2", "--out", str(path))
        self.assertEqual(code, 0)
        loaded = load_instance(path)
        self.assertEqual((loaded.graph.n_units, loaded.districts), (16, 2))
        code, out, _ = run("validate", "--instance", str(path), "--plan", "seed")
        self.assertEqual(code, 0)
        self.assertIn("valid: True", out)

    def test_optimize_writes_plan(self):
        path = self.dir / "best.csv"
        code, out, _ = run(
            "optimize", "--grid", "6x6", "-k", "4", "--deviation", "0.12", "--plan", "seed", "--out", str(path)
        )
        self.assertEqual(code, 0)
        plan = load_plan(path, n_units=36, k=4)
        self.assertEqual(plan.n_units, 36)
        self.assertEqual(read_plan_metadata(path)["algorithm"], "hill_climb")

    def test_exact(self):
        code, out, _ = run("optimize", "--method", "exact", "--grid", "4x4", "-k", "4", "--out", str(self.dir / "x.csv"))
        self.assertEqual(code, 0)
        self.assertIn("status: proven_optimal", out)
        self.assertIn("cut_edges: 8", out)

    def test_pareto(self):
        code, out, _ = run("pareto", "--grid", "4x4", "-k", "4", "--deviations", "0,0.25", "--budget", "30")
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("deviation,cut_edges,status,lower_bound"))
        self.assertEqual(run("pareto", "--grid", "4x4", "-k", "4", "--deviations", "0.2,0.1")[0], 1)

    def test_sample_then_analyze(self):
        ensemble_path = self.dir / "ff.jsonl"
        code, out, _ = run(
            "sample", "--grid", "4x4", "-k", "4", "--generator", "recom_seed",
            "--count", "20", "--seed", "5", "--out", str(ensemble_path),
        )
        self.assertEqual(code, 0)
        self.assertIn("accepted: 20/20", out)
        ensemble = load_ensemble(ensemble_path)
        self.assertEqual(len(ensemble), 20)

        report_path = self.dir / "report.csv"
        code, out, _ = run(
            "analyze", "--grid", "4x4", "-k", "4", "--ensemble", str(ensemble_path), "--oracle", "--out", str(report_path)
        )
        self.assertEqual(code, 0)
        self.assertIn("tv_distance", out)
        self.assertTrue((self.dir / "report_histogram.csv").exists())
        self.assertTrue((self.dir / "report_edges.csv").exists())

    def test_chain(self):
        path = self.dir / "chain.jsonl"
        code, out, _ = run(
            "chain", "--grid", "4x4", "-k", "2", "--plan", "seed", "--kind", "recom",
            "--steps", "10", "--chains", "2", "--out", str(path),
        )
        self.assertEqual(code, 0)
        self.assertIn("chain 1", out)
        # 每条链 11 条记录（含第 0 步）
        self.assertEqual(len(load_ensemble(path)), 22)


@unittest.skipUnless((DATA_DIR / "iowa.toml").exists(), "未附带艾奥瓦州县级实例")
class TestCliIowa(unittest.TestCase):
    def test_validate_enacted(self):
        code, out, _ = run("validate", "--instance", "iowa", "--plan", "enacted", "--deviation", "0.001")
        self.assertEqual(code, 0)
        self.assertIn("cut_edges: 47", out)


if __name__ == "__main__":
    unittest.main()
