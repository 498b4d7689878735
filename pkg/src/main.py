"""命令行入口：把各模块串成可复现、由配置驱动的实验

退出码：0 成功，1 用法错误，2 数据错误，3 超出预算（已输出部分结果）。
"""

import argparse
import random
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .common.errors import BudgetExceededError, DistrictLabError, InstanceFormatError, PolicyConfigError
from .common.logger import get_module_logger, LogConfig, CLI_STYLE_CONFIG
from .plugins import chains, geometric  # noqa: F401  注册 recom_seed / power / splitline 生成器
from .plugins.analyze import (
    Ensemble,
    compare_to_oracle,
    cut_edge_histogram,
    distinct_plans,
    edge_frequency,
    edge_frequency_to_frame,
    histogram_to_frame,
    load_ensemble,
    save_ensemble,
    save_frame,
)
from .plugins.chains import CONVERGENCE_CAVEAT, ChainConfig, StepKind, recom_seed_plan, run_chains
from .plugins.config.config import DEFAULT_CONFIG_PATH, LabConfig, lab_version
from .plugins.core import Constraints, Plan, UnitGraph, county_splits, validate
from .plugins.enumeration import enumerate_plans
from .plugins.geometric import SAMPLE, SHORTEST, balance_power_diagram, lloyd_kmeans, snap_to_units, split_region
from .plugins.instances import (
    QUEEN,
    ROOK,
    GridSpec,
    LoadedInstance,
    RunMetadata,
    instance_hash,
    load_instance,
    load_plan,
    make_grid,
    quadrant_plan,
    resolve_instance_path,
    save_instance,
    save_plan,
)
from .plugins.optimize import BaseOptimizer, Objective, exact_min_cut_edges, pareto_sweep
from .plugins.samplers import GENERATORS, FloodFillPolicy, sample_ensemble

logger = get_module_logger("cli", config=LogConfig.from_style(CLI_STYLE_CONFIG))

COMMANDS = ("gen-grid", "enumerate", "sample", "chain", "geo", "optimize", "pareto", "analyze", "validate")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("实例")
    source.add_argument("--grid", help="网格实例，例如 6x6")
    source.add_argument("--queen", action="store_true", help="网格使用 queen 邻接（含对角）")
    source.add_argument("--instance", help="实例文件路径，或 data/instances 下的实例名")
    source.add_argument("--plan", help="实例中的方案名、方案 CSV 路径，或 quadrants / seed")
    run = common.add_argument_group("运行参数")
    run.add_argument("--districts", "-k", type=int, help="选区数")
    run.add_argument("--deviation", type=float, help="允许的最大人口偏差比例")
    run.add_argument("--allow-discontiguous", action="store_true", help="不要求选区连通")
    run.add_argument("--seed", type=int, help="随机种子，缺省取配置文件")
    run.add_argument("--threads", type=int, help="并行线程数")
    run.add_argument("--budget", type=float, help="精确求解的时间预算（秒）")
    run.add_argument("--out", help="输出文件路径")
    run.add_argument("--config", help="配置文件路径，缺省为 config/lab_config.toml")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="districtlab", description="选区划分算法实验室")
    parser.add_argument("--version", action="version", version=f"%(prog)s {lab_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-grid", parents=[common], help="生成网格实例文件")

    p = sub.add_parser("enumerate", parents=[common], help="穷举所有合法方案并统计切边")
    p.add_argument("--node-budget", type=int, help="搜索节点上限")

    p = sub.add_parser("sample", parents=[common], help="用生成器拒绝采样一个集成")
    p.add_argument("--generator", default="flood_fill", help="生成器名称")
    p.add_argument("--policy", default="standard", help="洪水填充预设")
    p.add_argument("--count", type=int, default=100, help="需要的合法方案数")

    p = sub.add_parser("chain", parents=[common], help="从一个方案出发做随机游走")
    p.add_argument("--kind", default=StepKind.FLIP.value, help="flip / swap / recombination")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--record-every", type=int, help="每多少步记录一次")
    p.add_argument("--chains", type=int, default=1, help="独立链条数")

    p = sub.add_parser("geo", parents=[common], help="几何方法：splitline / power / kmeans")
    p.add_argument("--method", default="splitline", choices=("splitline", "splitline_sample", "power", "kmeans"))

    p = sub.add_parser("optimize", parents=[common], help="优化切边数或加权目标")
    p.add_argument("--method", default="hill_climb", help="hill_climb / anneal / tabu / evolution / exact")
    p.add_argument("--objective", default="cut_edges", help="cut_edges 或 weighted_sum:cut_edges=1,...")
    p.add_argument("--neighborhood", default=StepKind.FLIP.value, help="flip / swap / recombination")

    p = sub.add_parser("pareto", parents=[common], help="人口偏差与最少切边的 Pareto 扫描")
    p.add_argument("--deviations", default="0,0.01,0.05,0.1", help="逗号分隔、升序")
    p.add_argument("--keep-dominated", action="store_true")

    p = sub.add_parser("analyze", parents=[common], help="分析集成：直方图、边频率、与穷举比较")
    p.add_argument("--ensemble", required=True, help="sample / chain 输出的 .jsonl 集成文件")
    p.add_argument("--oracle", action="store_true", help="与穷举结果比较")

    sub.add_parser("validate", parents=[common], help="检查一个方案并输出分数")
    return parser


class LabSystem:
    """一次命令行调用的上下文：配置、实例和输出"""

    def __init__(self, args: argparse.Namespace, config: LabConfig):
        self.args = args
        self.config = config
        self.seed = args.seed if args.seed is not None else config.seed
        self.threads = args.threads if args.threads is not None else config.threads
        self._loaded: Optional[LoadedInstance] = None
        self._graph: Optional[UnitGraph] = None

    # ---- 实例与约束 ----

    @property
    def graph(self) -> UnitGraph:
        if self._graph is None:
            args = self.args
            if args.grid and args.instance:
                raise PolicyConfigError("--grid 与 --instance 只能二选一")
            if args.grid:
                self._graph = make_grid(GridSpec.parse(args.grid, QUEEN if args.queen else ROOK))
            elif args.instance:
                self._loaded = load_instance(resolve_instance_path(args.instance))
                self._graph = self._loaded.graph
            else:
                raise PolicyConfigError("需要 --grid 或 --instance")
        return self._graph

    @property
    def k(self) -> int:
        if self.args.districts is not None:
            return self.args.districts
        _ = self.graph
        if self._loaded is not None and self._loaded.districts is not None:
            return self._loaded.districts
        raise PolicyConfigError("需要 --districts（实例文件中也没有给出）")

    @property
    def constraints(self) -> Constraints:
        deviation = self.args.deviation if self.args.deviation is not None else self.config.deviation
        contiguity = self.config.require_contiguity and not self.args.allow_discontiguous
        return Constraints(self.k, deviation, contiguity)

    def plan(self, required: bool = True) -> Optional[Plan]:
        spec = self.args.plan
        graph = self.graph
        if spec is None:
            if required:
                raise PolicyConfigError("需要 --plan")
            return None
        if self._loaded is not None and spec in self._loaded.plans:
            return self._loaded.plans[spec]
        if Path(spec).exists():
            return load_plan(spec, n_units=graph.n_units, k=self.args.districts)
        if spec in ("quadrants", "quadrant") and self.args.grid:
            spec_grid = GridSpec.parse(self.args.grid)
            return quadrant_plan(spec_grid.rows, spec_grid.cols)
        if spec == "seed":
            rng = random.Random(self.seed)
            for _ in range(max(1, self.config.max_restarts) * 100):
                plan = recom_seed_plan(graph, self.constraints, rng, self.config.recom_retries)
                if plan is not None:
                    return plan
            raise DistrictLabError("生成树切分没能找到合法的起点方案")
        raise InstanceFormatError(f"找不到方案 {spec}（不是实例中的方案名，也不是文件）", field="plan")

    # ---- 输出 ----

    def metadata(self, algorithm: str, **extra) -> RunMetadata:
        overrides = {k: v for k, v in vars(self.args).items() if v is not None and k not in ("config", "out")}
        return RunMetadata(
            algorithm=algorithm,
            seed=self.seed,
            instance=self.graph.name,
            instance_hash=instance_hash(self.graph),
            config_hash=self.config.config_hash(overrides),
            extra=extra,
        )

    def out_path(self, default_name: str) -> Path:
        if self.args.out:
            return Path(self.args.out)
        return Path(self.config.output_dir) / default_name

    # ---- 子命令 ----

    def run(self) -> int:
        handler = getattr(self, "cmd_" + self.args.command.replace("-", "_"))
        return handler()

    def cmd_gen_grid(self) -> int:
        if not self.args.grid:
            raise PolicyConfigError("gen-grid 需要 --grid")
        graph = self.graph
        path = save_instance(graph, self.out_path(f"{graph.name}.toml"), districts=self.args.districts)
        print(f"{graph.name}: {graph.n_units} 个单元，{graph.n_edges} 条边 -> {path}")
        print(f"instance_hash: {instance_hash(graph)}")
        return 0

    def cmd_enumerate(self) -> int:
        node_budget = self.args.node_budget or self.config.enumerate_node_budget
        try:
            result = enumerate_plans(self.graph, self.constraints, node_budget=node_budget)
        except BudgetExceededError as e:
            partial = e.partial
            print(f"partial count: {partial.count}（超出节点上限 {node_budget}，结果不完整）")
            self._write_histogram(partial.histogram, "enumeration_partial", partial=True)
            return e.exit_code
        print(f"count: {result.count}")
        for score, count in sorted(result.histogram.items()):
            print(f"{score}\t{count}")
        self._write_histogram(result.histogram, "enumeration")
        return 0

    def _write_histogram(self, histogram: Dict[int, int], algorithm: str, partial: bool = False) -> None:
        if not self.args.out:
            return
        meta = self.metadata(algorithm, districts=self.k, deviation=self.constraints.deviation, partial=partial)
        save_frame(self.args.out, histogram_to_frame(histogram), meta)

    def cmd_sample(self) -> int:
        name = self.args.generator
        if name not in GENERATORS:
            raise PolicyConfigError(f"未知的生成器 {name}，可选 {sorted(GENERATORS)}")
        options = {
            "rebalance_budget": self.config.rebalance_budget,
            "recom_retries": self.config.recom_retries,
            "angles": self.config.splitline_angles,
            "max_iters": self.config.power_max_iters,
            "power_step": self.config.power_step,
        }
        if name == "flood_fill":
            zones = None
            if self.args.policy == "whole_plan_zones" and self.args.grid:
                spec = GridSpec.parse(self.args.grid)
                zones = quadrant_plan(spec.rows, spec.cols).assignment
            options["policy"] = FloodFillPolicy.named(self.args.policy, zones, max_restarts=self.config.max_restarts)
        run = sample_ensemble(
            name,
            self.graph,
            self.constraints,
            self.args.count,
            self.seed,
            threads=self.threads,
            chunk_size=self.config.chunk_size,
            **options,
        )
        algorithm = name if name != "flood_fill" else f"flood_fill:{self.args.policy}"
        ensemble = Ensemble.from_plans(
            run.plans,
            self.graph,
            algorithm=algorithm,
            seed=self.seed,
            metadata={"attempts": run.attempts, "acceptance_rate": run.acceptance_rate},
        )
        print(f"accepted: {run.successes}/{self.args.count}，attempts: {run.attempts}，rate: {run.acceptance_rate:.6f}")
        if not ensemble.empty:
            for score, count in cut_edge_histogram(ensemble).items():
                print(f"{score}\t{count}")
        save_ensemble(self.out_path(f"{self.graph.name}_{name}.jsonl"), ensemble, self.metadata(algorithm))
        return 0

    def cmd_chain(self) -> int:
        args = self.args
        if args.chains < 1:
            raise PolicyConfigError("--chains 必须 >= 1")
        config = ChainConfig(
            steps=args.steps,
            kind=args.kind,
            constraints=self.constraints,
            seed=self.seed,
            record_every=args.record_every or self.config.record_every,
            recom_retries=self.config.recom_retries,
            progress_every=self.config.progress_every,
        )
        ensembles = run_chains(self.plan(), config, self.graph, args.chains, self.threads)
        merged = ensembles[0]
        for other in ensembles[1:]:
            merged = merged.merged_with(other)
        merged.metadata = dict(ensembles[0].metadata, chains=len(ensembles))
        for i, ensemble in enumerate(ensembles):
            print(f"chain {i}: acceptance_rate {ensemble.metadata['acceptance_rate']:.4f}，记录 {len(ensemble)} 个方案")
        print(CONVERGENCE_CAVEAT)
        out = self.out_path(f"{self.graph.name}_{config.kind.value}_chain.jsonl")
        save_ensemble(out, merged, self.metadata(merged.algorithm, steps=args.steps, chains=len(ensembles)))
        return 0

    def cmd_geo(self) -> int:
        method = self.args.method
        graph, constraints = self.graph, self.constraints
        rng = random.Random(self.seed)
        lines = []
        if method in ("splitline", "splitline_sample"):
            result = split_region(
                graph, constraints, rng, self.config.splitline_angles, SAMPLE if method == "splitline_sample" else SHORTEST
            )
            plan = result.plan if result is not None else None
            lines = result.lines if result is not None else []
        elif method == "power":
            partition = balance_power_diagram(
                graph, constraints.k, constraints, self.config.power_max_iters, rng, self.config.power_step
            )
            plan = snap_to_units(partition, graph, constraints)
        else:
            partition = lloyd_kmeans(graph, constraints.k, None, self.config.kmeans_max_iters, self.config.kmeans_tol, rng)
            plan = snap_to_units(partition, graph, constraints)
        if plan is None:
            print(f"{method}: 没有得到合法方案（拒绝）")
            return 2
        for line in lines:
            print(f"line angle={line.angle:.4f} offset={line.offset:.4f} length={line.length:.4f}")
        return self._report_plan(plan, method)

    def cmd_optimize(self) -> int:
        method = self.args.method
        graph, constraints = self.graph, self.constraints
        budget = self.args.budget if self.args.budget is not None else self.config.budget_seconds
        if method == "exact":
            result = exact_min_cut_edges(
                graph,
                constraints,
                budget,
                warm_start=self.plan(required=False),
                allow_discontiguous=not constraints.require_contiguity,
                node_budget=self.config.enumerate_node_budget,
                seed=self.seed,
            )
            print(f"status: {result.status}，lower_bound: {result.lower_bound}")
            if result.plan is None:
                return 3 if result.lower_bound is not None else 2
            self._report_plan(result.plan, "exact", status=result.status, lower_bound=result.lower_bound)
            return 0 if result.proven else 3
        objective = Objective.parse(self.args.objective)
        optimizer = BaseOptimizer.create(method, objective, self.args.neighborhood, self.config)
        result = optimizer.optimize(self.plan(), graph, constraints, random.Random(self.seed))
        print(f"{method}: {result.start_score:g} -> {result.score:g}，{result.steps} 步")
        return self._report_plan(result.plan, method, objective=objective.describe(), score=result.score)

    def cmd_pareto(self) -> int:
        try:
            deviations = [float(x) for x in self.args.deviations.split(",") if x.strip()]
        except ValueError as e:
            raise PolicyConfigError(f"无法解析偏差列表 {self.args.deviations}") from e
        budget = self.args.budget if self.args.budget is not None else self.config.optimize_time_budget
        points = pareto_sweep(
            self.graph,
            self.k,
            deviations,
            budget,
            keep_dominated=self.args.keep_dominated,
            allow_discontiguous=self.args.allow_discontiguous,
            seed=self.seed,
        )
        frame = pd.DataFrame([p.to_row() for p in points], columns=["deviation", "cut_edges", "status", "lower_bound"])
        print(frame.to_csv(index=False, lineterminator="\n"), end="")
        if self.args.out:
            save_frame(self.args.out, frame, self.metadata("pareto_sweep", districts=self.k))
        return 0

    def cmd_analyze(self) -> int:
        ensemble = load_ensemble(self.args.ensemble)
        graph = self.graph
        if ensemble.instance_hash and ensemble.instance_hash != instance_hash(graph):
            raise InstanceFormatError(f"集成来自 {ensemble.instance}，与当前实例 {graph.name} 不一致")
        histogram = cut_edge_histogram(ensemble, graph)
        print(f"plans: {len(ensemble)}，distinct: {distinct_plans(ensemble)}")
        for score, count in histogram.items():
            print(f"{score}\t{count}")
        if self.args.oracle:
            k = ensemble.plans[0].k
            deviation = self.args.deviation if self.args.deviation is not None else self.config.deviation
            oracle = enumerate_plans(graph, Constraints(k, deviation), node_budget=self.config.enumerate_node_budget)
            report = compare_to_oracle(ensemble, oracle)
            print(f"tv_distance: {report.tv_distance:.6f}，chi_square: {report.chi_square:.4f}，p_value: {report.p_value:.6g}")
        if self.args.out:
            out = Path(self.args.out)
            meta = self.metadata(f"analyze:{ensemble.algorithm}")
            save_frame(out.with_name(out.stem + "_histogram.csv"), histogram_to_frame(histogram), meta)
            frequency = edge_frequency(ensemble, graph)
            save_frame(out.with_name(out.stem + "_edges.csv"), edge_frequency_to_frame(frequency), meta)
        return 0

    def cmd_validate(self) -> int:
        plan = self.plan()
        constraints = self.constraints if self.args.districts is not None else Constraints(plan.k, *self._bounds())
        report = validate(plan, self.graph, constraints)
        print(f"valid: {report.valid}")
        print(f"cut_edges: {report.cut_edges}")
        print(f"max_deviation: {report.max_deviation * 100:.4f}%")
        print(f"district_populations: {report.district_populations}")
        if self.graph.has_counties:
            print(f"county_splits: {county_splits(plan, self.graph)}")
        if report.reasons:
            print(f"reasons: {', '.join(report.reasons)}")
        return 0 if report.valid else 2

    def _bounds(self) -> Tuple[float, bool]:
        deviation = self.args.deviation if self.args.deviation is not None else self.config.deviation
        return deviation, self.config.require_contiguity and not self.args.allow_discontiguous

    def _report_plan(self, plan: Plan, algorithm: str, **extra) -> int:
        report = validate(plan, self.graph, self.constraints)
        print(f"cut_edges: {report.cut_edges}，max_deviation: {report.max_deviation:.6f}，valid: {report.valid}")
        path = self.out_path(f"{self.graph.name}_{algorithm}.csv")
        save_plan(path, plan, self.metadata(algorithm, **extra))
        print(f"plan -> {path}")
        return 0


def load_lab_config(path: Optional[str]) -> LabConfig:
    if path is not None:
        if not Path(path).exists():
            raise InstanceFormatError("配置文件不存在", path=path)
        return LabConfig.load_config(path)
    return LabConfig.load_config(str(DEFAULT_CONFIG_PATH) if DEFAULT_CONFIG_PATH.exists() else None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        # argparse 的用法错误统一为退出码 1，--help / --version 为 0
        return 0 if e.code in (0, None) else 1

    try:
        config = load_lab_config(args.config)
        return LabSystem(args, config).run()
    except BudgetExceededError as e:
        logger.error(f"超出预算: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except DistrictLabError as e:
        logger.error(f"{args.command} 失败: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"读写文件失败: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


def run_cli(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))
