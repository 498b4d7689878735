import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Sequence, Union

from src.common.errors import InvalidStartError, PolicyConfigError
from src.common.logger import get_module_logger, LogConfig, CHAIN_STYLE_CONFIG
from ..analyze.ensemble import Ensemble
from ..core import Constraints, Plan, UnitGraph, validate
from ..samplers import chunk_seed
from ..utils.timer_calculater import Timer
from .spanning import DEFAULT_RETRIES
from .steps import StepKind, take_step

logger = get_module_logger("chains", config=LogConfig.from_style(CHAIN_STYLE_CONFIG))

CONVERGENCE_CAVEAT = "随机游走没有收敛保证：记录下来的方案不服从任何已知的分布，只保证每个都合法"


@dataclass(frozen=True)
class ChainConfig:
    """一条随机游走的参数

    Attributes:
        steps: 步数（原地不动也算一步）
        kind: 单步类型
        constraints: 合法性约束
        seed: 随机种子
        record_every: 每隔多少步记录一次当前方案
        recom_retries: 重组步每次最多抽几棵生成树
        progress_every: 每隔多少步打一次进度日志，0 表示不打
    """

    steps: int
    kind: StepKind
    constraints: Constraints
    seed: int = 0
    record_every: int = 1
    recom_retries: int = DEFAULT_RETRIES
    progress_every: int = 10000

    def __post_init__(self):
        object.__setattr__(self, "kind", StepKind.parse(self.kind))
        if self.steps < 0:
            raise PolicyConfigError(f"steps 不能为负，实际为 {self.steps}")
        if self.record_every < 1:
            raise PolicyConfigError("record_every 必须 >= 1")
        if self.steps > 0 and self.record_every > self.steps:
            raise PolicyConfigError(f"record_every={self.record_every} 不能超过 steps={self.steps}")
        if self.recom_retries < 1:
            raise PolicyConfigError("recom_retries 必须 >= 1")


def run_chain(start: Plan, config: ChainConfig, graph: UnitGraph) -> Ensemble:
    """从 start 出发走 config.steps 步，记录第 0 步以及每 record_every 步的方案"""
    report = validate(start, graph, config.constraints)
    if not report.valid:
        raise InvalidStartError(f"起点方案不合法: {', '.join(report.reasons)}")

    rng = random.Random(config.seed)
    kind = config.kind
    plans: List[Plan] = [start]
    steps: List[int] = [0]
    accepted = 0
    current = start
    current_form = start.canonical_form()

    with Timer(f"{kind.value} 游走") as timer:
        for i in range(1, config.steps + 1):
            proposal = take_step(kind, current, graph, config.constraints, rng, config.recom_retries)
            if proposal is not current:
                form = proposal.canonical_form()
                # 重组可能重新切出同一个划分（只是换了标号），不算接受
                if form != current_form:
                    accepted += 1
                    current_form = form
                current = proposal
            if i % config.record_every == 0:
                plans.append(current)
                steps.append(i)
            if config.progress_every and i % config.progress_every == 0:
                logger.info(f"{kind.value} 游走 {i}/{config.steps} 步，接受 {accepted} 次")

    rate = accepted / config.steps if config.steps else 0.0
    metadata = {
        "kind": kind.value,
        "steps": config.steps,
        "record_every": config.record_every,
        "accepted": accepted,
        "self_loops": config.steps - accepted,
        "acceptance_rate": rate,
        "caveat": CONVERGENCE_CAVEAT,
    }
    logger.success(
        f"{graph.name}: {kind.value} 游走 {config.steps} 步完成，接受率 {rate:.4f}，"
        f"记录 {len(plans)} 个方案，耗时 {timer.human_readable}"
    )
    return Ensemble.from_plans(plans, graph, algorithm=f"{kind.value}_chain", seed=config.seed, steps=steps, metadata=metadata)


def run_chains(start: Plan, config: ChainConfig, graph: UnitGraph, n_chains: int, threads: int = 1) -> List[Ensemble]:
    """用派生种子并行跑多条独立的游走；结果按链编号排列，与线程数无关"""
    configs = [replace(config, seed=chunk_seed(config.seed, i)) for i in range(n_chains)]
    if threads <= 1:
        return [run_chain(start, c, graph) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: run_chain(start, c, graph), configs))


def _hamming(a: Plan, b: Plan) -> int:
    return sum(1 for x, y in zip(a.assignment, b.assignment) if x != y)


def hamming_autocorrelation(records: Union[Ensemble, Sequence[Plan]], lags: Iterable[int]) -> Dict[int, float]:
    """相隔 lag 条记录的方案之间的平均 Hamming 距离

    游走过程中选区标签保持稳定，所以直接比较标签；没有足够记录的 lag 不出现在结果里。
    """
    plans = list(records.plans if isinstance(records, Ensemble) else records)
    out: Dict[int, float] = {}
    for lag in sorted(set(lags)):
        if lag < 1 or lag >= len(plans):
            continue
        distances = [_hamming(plans[i], plans[i + lag]) for i in range(len(plans) - lag)]
        out[lag] = sum(distances) / len(distances)
    return out
