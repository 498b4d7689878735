"""随机生成树与树上二分

重组步和起点生成都用同一个办法切分区域：在区域上抽一棵均匀随机生成树，
找出删掉后两侧人口都可行的树边，均匀选一条切开。抽不到就换一棵树重试。
"""

import random
from typing import FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from src.common.errors import DistrictLabError
from src.common.logger import get_module_logger, LogConfig, CHAIN_STYLE_CONFIG
from ..core import UNASSIGNED, Constraints, Plan, UnitGraph, validate

logger = get_module_logger("chains", config=LogConfig.from_style(CHAIN_STYLE_CONFIG))

Bounds = Tuple[float, float]

DEFAULT_RETRIES = 100


def random_spanning_tree(units: Iterable[int], graph: UnitGraph, rng: random.Random) -> nx.Graph:
    """Wilson 算法：在 units 诱导的子图上均匀抽取一棵生成树"""
    nodes = sorted(set(units))
    if not nodes:
        raise DistrictLabError("不能在空区域上抽生成树")
    member = set(nodes)
    if not graph.is_connected_set(member):
        raise DistrictLabError("区域不连通，没有生成树")
    local = {u: [v for v in graph.neighbors(u) if v in member] for u in nodes}

    tree = nx.Graph()
    tree.add_nodes_from(nodes)
    in_tree = {rng.choice(nodes)}
    step_to = {}
    for start in nodes:
        # 环消除随机游走：只保留每个点最后一次离开的方向
        u = start
        while u not in in_tree:
            step_to[u] = rng.choice(local[u])
            u = step_to[u]
        u = start
        while u not in in_tree:
            in_tree.add(u)
            tree.add_edge(u, step_to[u])
            u = step_to[u]
    return tree


def _within(value: float, bounds: Bounds) -> bool:
    return bounds[0] <= value <= bounds[1]


def bipartition_tree(
    units: Iterable[int],
    graph: UnitGraph,
    rng: random.Random,
    first: Bounds,
    second: Optional[Bounds] = None,
    retries: int = DEFAULT_RETRIES,
) -> Optional[Tuple[FrozenSet[int], FrozenSet[int]]]:
    """把连通区域切成两块，第一块人口落在 first 内，第二块落在 second 内

    second 缺省时与 first 相同。最多抽 retries 棵树，都切不开时返回 None。
    """
    nodes = sorted(set(units))
    second = second or first
    total = graph.population_of(nodes)
    if len(nodes) < 2:
        return None

    for _ in range(retries):
        tree = random_spanning_tree(nodes, graph, rng)
        root = nodes[0]
        order = list(nx.dfs_preorder_nodes(tree, root))
        parent = dict(nx.dfs_predecessors(tree, root))
        below = {u: graph.populations[u] for u in nodes}
        for u in reversed(order):
            if u != root:
                below[parent[u]] += below[u]

        # (子树根, 子树是否作为第一块)
        cuts: List[Tuple[int, bool]] = []
        for u in order[1:]:
            inside, outside = below[u], total - below[u]
            if _within(inside, first) and _within(outside, second):
                cuts.append((u, True))
            if _within(outside, first) and _within(inside, second):
                cuts.append((u, False))
        if not cuts:
            continue

        u, subtree_first = rng.choice(cuts)
        tree.remove_edge(u, parent[u])
        subtree = frozenset(nx.node_connected_component(tree, u))
        rest = frozenset(nodes) - subtree
        return (subtree, rest) if subtree_first else (rest, subtree)

    logger.trace(f"{retries} 棵生成树都没有可行的切边（区域 {len(nodes)} 个单元）")
    return None


def recom_seed_plan(
    graph: UnitGraph, constraints: Constraints, rng: random.Random, retries: int = DEFAULT_RETRIES
) -> Optional[Plan]:
    """递归生成树切分：每次切下一个人口可行的选区，剩下的部分仍能容纳其余选区

    得到的方案一定连通；失败时返回 None。
    """
    k = constraints.k
    if not graph.is_connected() or k > graph.n_units:
        return None
    lo, hi = constraints.population_bounds(graph.total_population)
    labels = [UNASSIGNED] * graph.n_units
    remaining: FrozenSet[int] = frozenset(range(graph.n_units))

    for district in range(k - 1):
        left = k - district - 1
        split = bipartition_tree(remaining, graph, rng, (lo, hi), (left * lo, left * hi), retries)
        if split is None:
            return None
        piece, remaining = split
        for u in piece:
            labels[u] = district
    for u in remaining:
        labels[u] = k - 1

    plan = Plan(tuple(labels), k)
    return plan if validate(plan, graph, constraints).valid else None
