#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
精确MDP模块
对极小规模实例枚举受控状态 (O, I, E)，在离散信道上用相对值迭代求解平均代价最优策略，
并检查最优策略的嵌套阈值结构（代价等级越高，替换次数越少）
"""

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse, stats
from scipy.sparse.linalg import spsolve

from src.core.channel_model import DiscreteChannel
from src.core.content_dynamics import EMPTY, GenParams, LifetimeMultiset, access_hazard
from src.core.threshold_table import ThresholdTable
from src.utils import csv_io
from src.utils.config import Config
from src.utils.errors import ConfigError, InvariantViolation, StateSpaceTooLargeError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)

StateKey = Tuple[LifetimeMultiset, LifetimeMultiset, int]
Pair = Tuple[int, int]

KERNEL_ATOL = 1e-12
DENSE_LIMIT = 2000


@dataclass
class MdpInstance:
    """
    枚举后的MDP

    access_kernel 为接入时隙的转移矩阵；swap_kernels[b] 为未接入且执行前 b 个替换时的转移矩阵
    （b 超过 max_swaps 的行全为零）。
    """
    gen: GenParams
    channel: DiscreteChannel
    states: List[StateKey]
    index: Dict[StateKey, int]
    hazard: np.ndarray
    n_out: np.ndarray
    pairs: List[List[Pair]]
    max_swaps: np.ndarray
    access_kernel: sparse.csr_matrix
    swap_kernels: List[sparse.csr_matrix]
    renewal: int = 0
    _dense: Optional[Tuple[np.ndarray, List[np.ndarray]]] = field(default=None, repr=False)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_levels(self) -> int:
        return int(self.channel.levels.size)

    @property
    def n_actions(self) -> int:
        return len(self.swap_kernels)

    def valid_actions(self) -> np.ndarray:
        """n_states × n_actions 的可行动作掩码"""
        return np.arange(self.n_actions)[None, :] <= self.max_swaps[:, None]

    def dense_kernels(self) -> Tuple[np.ndarray, List[np.ndarray]]:
        if self._dense is None:
            self._dense = (self.access_kernel.toarray(), [k.toarray() for k in self.swap_kernels])
        return self._dense


@dataclass(frozen=True)
class SolveResult:
    """相对值迭代结果"""
    rho_star: float
    values: np.ndarray
    policy: np.ndarray      # n_states × n_levels 的替换次数
    iterations: int
    residual: float


@dataclass
class StructureReport:
    """结构检查报告"""
    checked_states: int = 0
    violations: List[Tuple[int, List[int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def batch_distribution(gen: GenParams) -> List[Tuple[LifetimeMultiset, float]]:
    """
    新内容多重集的分布：P(M=m)·多项分布

    Returns:
        List[Tuple[LifetimeMultiset, float]]: (新内容, 概率)，概率之和为1
    """
    support = list(gen.lifetime_support)
    uniform = np.full(len(support), 1.0 / len(support))
    result: Dict[LifetimeMultiset, float] = {}
    for m in range(1, gen.m_max + 1):
        for combo in combinations_with_replacement(support, m):
            counts = Counter(combo)
            x = [counts.get(k, 0) for k in support]
            p = stats.multinomial.pmf(x, n=m, p=uniform) / gen.m_max
            batch = LifetimeMultiset.from_lifetimes(combo)
            result[batch] = result.get(batch, 0.0) + float(p)
    return list(result.items())


def swap_pairs(out: LifetimeMultiset, cache: LifetimeMultiset, capacity: int) -> List[Pair]:
    """
    按LISO顺序排列的替换对 (l_i|L_i)

    l 依次取空位（l=0）再取缓存内容升序，L 取缓存外内容降序，只保留 L_i > l_i 的前缀。
    """
    free = max(0, int(capacity) - len(cache))
    smalls = [0] * min(free, len(out)) + list(cache)
    pairs = []
    for big, small in zip(out.descending(), smalls):
        if big <= small:
            break
        pairs.append((small, big))
    return pairs


def apply_swaps(out: LifetimeMultiset, cache: LifetimeMultiset,
                pairs: List[Pair]) -> Tuple[LifetimeMultiset, LifetimeMultiset]:
    for small, big in pairs:
        out = out.remove(big)
        cache = cache.add(big)
        if small > 0:
            cache = cache.remove(small)
            out = out.add(small)
    return out, cache


def _elapsed_cap(gen: GenParams) -> int:
    # 纯几何接入的危险率与 e 无关，只区分 e=0 与 e>0
    return gen.d_max - 1 if gen.truncate_access else 1


def _check_capacity(gen: GenParams) -> int:
    if math.isinf(gen.b):
        raise ConfigError("精确求解要求有限的缓存容量", key="gen.b")
    return int(gen.b)


def _explore(gen: GenParams, max_states: int):
    """广度优先枚举可达状态，同时记录转移"""
    capacity = _check_capacity(gen)
    batches = batch_distribution(gen)
    cap = _elapsed_cap(gen)
    index: Dict[StateKey, int] = {}
    states: List[StateKey] = []
    queue = deque()

    def visit(key: StateKey) -> int:
        if key not in index:
            if len(states) >= max_states:
                raise StateSpaceTooLargeError(f"可达状态数超过上限 {max_states}", key="exact.max_states")
            index[key] = len(states)
            states.append(key)
            queue.append(key)
        return index[key]

    for batch, _ in batches:
        visit((batch, EMPTY, 0))

    access_edges, swap_edges, meta = {}, {}, {}
    while queue:
        key = queue.popleft()
        out, cache, e = key
        i = index[key]
        h = access_hazard(gen, e)
        pairs = swap_pairs(out, cache, capacity) if h < 1.0 else []
        meta[i] = (h, len(out), pairs)
        if h > 0.0:
            access_edges[i] = [(visit((batch, EMPTY, 0)), p) for batch, p in batches]
        if h < 1.0:
            next_e = min(e + 1, cap)
            for b in range(len(pairs) + 1):
                new_out, new_cache = apply_swaps(out, cache, pairs[:b])
                kept_out, kept_cache = new_out.decrement(), new_cache.decrement()
                swap_edges[(i, b)] = [(visit((kept_out.union(batch), kept_cache, next_e)), p)
                                      for batch, p in batches]
    return states, index, meta, access_edges, swap_edges, capacity


def enumerate_states(gen: GenParams, max_states: Optional[int] = None) -> List[StateKey]:
    """
    枚举从空初始状态出发可达的全部受控状态

    Args:
        gen: 生成参数（必须是极小实例）
        max_states: 状态数上限，默认取 Config.get_max_exact_states()

    Returns:
        List[StateKey]: (O, I, E) 列表，每个可达状态恰好出现一次

    Raises:
        StateSpaceTooLargeError: 状态数超过上限
    """
    limit = Config.get_max_exact_states() if max_states is None else max_states
    return _explore(gen, limit)[0]


def _to_csr(edges: Dict[int, List[Tuple[int, float]]], n: int) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for i, targets in edges.items():
        for j, p in targets:
            rows.append(i)
            cols.append(j)
            vals.append(p)
    # 重复的 (i, j) 在转换为CSR时求和
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def build_mdp(gen: GenParams, channel: DiscreteChannel, max_states: Optional[int] = None) -> MdpInstance:
    """
    构建极小实例的MDP

    动作限定为结构化族 A_0..A_B：执行LISO顺序下的前 b 个替换对。
    转移对新内容生成、接入与生命周期递减精确求边缘分布。

    Args:
        gen: 生成参数
        channel: 离散信道
        max_states: 状态数上限

    Returns:
        MdpInstance: 状态、核与代价所需的数据

    Raises:
        StateSpaceTooLargeError: 状态数超过上限
        InvariantViolation: 转移概率质量不为1
    """
    limit = Config.get_max_exact_states() if max_states is None else max_states
    states, index, meta, access_edges, swap_edges, capacity = _explore(gen, limit)
    n = len(states)
    hazard = np.array([meta[i][0] for i in range(n)])
    n_out = np.array([meta[i][1] for i in range(n)], dtype=float)
    pairs = [meta[i][2] for i in range(n)]
    max_swaps = np.array([len(p) for p in pairs], dtype=int)

    access_kernel = _to_csr(access_edges, n)
    swap_kernels = []
    for b in range(capacity + 1):
        edges = {i: t for (i, bb), t in swap_edges.items() if bb == b}
        swap_kernels.append(_to_csr(edges, n))

    acc_sums = np.asarray(access_kernel.sum(axis=1)).ravel()
    if np.any(np.abs(acc_sums[hazard > 0] - 1.0) > KERNEL_ATOL):
        raise InvariantViolation("接入转移概率之和不为1")
    for b, kernel in enumerate(swap_kernels):
        sums = np.asarray(kernel.sum(axis=1)).ravel()
        rows = (hazard < 1.0) & (max_swaps >= b)
        if np.any(np.abs(sums[rows] - 1.0) > KERNEL_ATOL):
            raise InvariantViolation(f"替换 {b} 次的转移概率之和不为1")

    logger.info(f"精确MDP: {n} 个状态, {channel.levels.size} 个信道等级, 最多 {capacity} 次替换")
    return MdpInstance(gen=gen, channel=channel, states=states, index=index, hazard=hazard,
                       n_out=n_out, pairs=pairs, max_swaps=max_swaps,
                       access_kernel=access_kernel, swap_kernels=swap_kernels, renewal=0)


def _action_values(mdp: MdpInstance, v: np.ndarray) -> np.ndarray:
    """q[x, c, b] = b·c + E[v(下一状态) | x, b]，不可行动作为 +inf"""
    future = np.column_stack([k @ v for k in mdp.swap_kernels])
    b_idx = np.arange(mdp.n_actions)
    q = future[:, None, :] + mdp.channel.levels[None, :, None] * b_idx[None, None, :]
    q[~np.broadcast_to(mdp.valid_actions()[:, None, :], q.shape)] = np.inf
    return q


def _bellman(mdp: MdpInstance, v: np.ndarray) -> np.ndarray:
    h = mdp.hazard
    access = h * (mdp.n_out * mdp.channel.mean + mdp.access_kernel @ v)
    best = _action_values(mdp, v).min(axis=2)
    # 危险率为1的状态不会走到未接入分支
    best[h >= 1.0] = 0.0
    return access + (1.0 - h) * (best @ mdp.channel.probs)


def greedy_policy(mdp: MdpInstance, v: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """贪心策略；并列时取最小的替换次数"""
    q = _action_values(mdp, v)
    best = q.min(axis=2, keepdims=True)
    near = q <= best + atol * (1.0 + np.abs(best))
    policy = np.argmax(near, axis=2)
    policy[mdp.hazard >= 1.0] = 0
    return policy


def relative_value_iteration(mdp: MdpInstance, tol: float = 1e-9, max_iter: int = 1_000_000,
                             alpha: float = 0.5) -> SolveResult:
    """
    相对值迭代

    g = Tv - v，v ← v + α(g - g(ref))；当 span(g) < tol 时停止，ρ* 取 g 的中点。
    阻尼 α < 1 避免周期链上的振荡。

    Args:
        mdp: MDP实例
        tol: 跨度收敛阈值
        max_iter: 最大迭代次数
        alpha: 阻尼步长

    Returns:
        SolveResult: ρ*、以更新状态为零点的相对值、贪心策略

    Raises:
        InvariantViolation: 未在 max_iter 内收敛
    """
    v = np.zeros(mdp.n_states)
    ref = mdp.renewal
    for it in range(1, max_iter + 1):
        g = _bellman(mdp, v) - v
        span = float(g.max() - g.min())
        if span < tol:
            rho = float(0.5 * (g.max() + g.min()))
            values = v - v[ref]
            logger.info(f"相对值迭代收敛: {it} 次迭代, ρ*={rho:.10g}")
            return SolveResult(rho_star=rho, values=values, policy=greedy_policy(mdp, v),
                               iterations=it, residual=float(np.max(np.abs(g - rho))))
        v = v + alpha * (g - g[ref])
        if it % 10000 == 0:
            logger.debug(f"相对值迭代 {it}: span={span:.3g}")
    raise InvariantViolation(f"相对值迭代在 {max_iter} 次迭代内未收敛")


def evaluate_policy(mdp: MdpInstance, swap_counts: np.ndarray) -> float:
    """
    求解平稳分布，计算给定策略的平均代价

    Args:
        mdp: MDP实例
        swap_counts: n_states × n_levels 的替换次数

    Returns:
        float: 平均每时隙代价

    Raises:
        ValueError: 策略形状不对或动作不可行
    """
    counts = np.asarray(swap_counts, dtype=int)
    if counts.shape != (mdp.n_states, mdp.n_levels):
        raise ValueError(f"策略形状应为 {(mdp.n_states, mdp.n_levels)}，实际 {counts.shape}")
    active = mdp.hazard < 1.0
    if np.any(counts[active] > mdp.max_swaps[active, None]) or np.any(counts < 0):
        raise ValueError("策略包含不可行的替换次数")
    h = mdp.hazard
    probs, levels = mdp.channel.probs, mdp.channel.levels
    counts = np.where(active[:, None], counts, 0)
    cost = h * mdp.n_out * mdp.channel.mean + (1.0 - h) * ((counts * levels[None, :]) @ probs)
    weights = [(1.0 - h) * ((counts == b) @ probs) for b in range(mdp.n_actions)]

    n, ref = mdp.n_states, mdp.renewal
    if n <= DENSE_LIMIT:
        acc, kernels = mdp.dense_kernels()
        chain = h[:, None] * acc + sum(w[:, None] * k for w, k in zip(weights, kernels))
        system = chain.T - np.eye(n)
        system[ref, :] = 1.0
        rhs = np.zeros(n)
        rhs[ref] = 1.0
        pi = np.linalg.solve(system, rhs)
    else:
        chain = sparse.diags(h) @ mdp.access_kernel
        for w, k in zip(weights, mdp.swap_kernels):
            chain = chain + sparse.diags(w) @ k
        system = (chain.T - sparse.identity(n)).tolil()
        system[ref, :] = 1.0
        rhs = np.zeros(n)
        rhs[ref] = 1.0
        pi = spsolve(system.tocsr(), rhs)
    return float(pi @ cost)


def liso_swap_counts(mdp: MdpInstance, table: ThresholdTable) -> np.ndarray:
    """LISO 在每个 (状态, 代价等级) 下的替换次数：阈值满足的替换对前缀长度"""
    if table.k_max < mdp.gen.k_max:
        raise ConfigError(f"阈值表 K_max={table.k_max} 小于实例 K_max={mdp.gen.k_max}", key="gen.k_max")
    counts = np.zeros((mdp.n_states, mdp.n_levels), dtype=int)
    for i, pairs in enumerate(mdp.pairs):
        if mdp.hazard[i] >= 1.0:
            continue
        for c, level in enumerate(mdp.channel.levels):
            b = 0
            while b < len(pairs) and level <= table.get(*pairs[b]):
                b += 1
            counts[i, c] = b
    return counts


def evaluate_liso(mdp: MdpInstance, table: ThresholdTable) -> float:
    return evaluate_policy(mdp, liso_swap_counts(mdp, table))


class ExactLisoObjective:
    """以精确评估作为FDM目标函数（与种子无关）"""

    def __init__(self, mdp: MdpInstance):
        self.mdp = mdp

    def __call__(self, table: ThresholdTable, seed: int) -> float:
        return evaluate_liso(self.mdp, table)


def check_threshold_structure(result: SolveResult, mdp: MdpInstance) -> StructureReport:
    """
    检查嵌套阈值结构：每个可决策状态（危险率 < 1）的替换次数随代价等级升高而不增

    违反项作为报告内容返回，不抛异常。
    """
    report = StructureReport()
    for i in range(mdp.n_states):
        if mdp.hazard[i] >= 1.0:
            continue
        report.checked_states += 1
        row = [int(b) for b in result.policy[i]]
        if any(later > earlier for earlier, later in zip(row, row[1:])):
            report.violations.append((i, row))
    if report.violations:
        logger.warning(f"发现 {len(report.violations)} 个违反嵌套阈值结构的状态")
    return report


def check_value_monotonicity(result: SolveResult, mdp: MdpInstance,
                             atol: float = 1e-7) -> List[Tuple[int, int]]:
    """
    相对值单调性：用缓存外更长生命周期的内容 L 替换缓存内的 l（L > l）不增加相对值

    Returns:
        List[Tuple[int, int]]: 违反的 (原状态, 替换后状态) 下标对，只比较都可达的状态
    """
    violations = []
    for i, (out, cache, e) in enumerate(mdp.states):
        for small in set(cache):
            for big in set(out):
                if big <= small:
                    continue
                swapped = (out.remove(big).add(small), cache.remove(small).add(big), e)
                j = mdp.index.get(swapped)
                if j is not None and result.values[j] > result.values[i] + atol:
                    violations.append((i, j))
    if violations:
        logger.warning(f"发现 {len(violations)} 对违反相对值单调性的状态")
    return violations


def solution_rows(mdp: MdpInstance, result: SolveResult) -> List[list]:
    rows = []
    for i, (out, cache, e) in enumerate(mdp.states):
        rows.append([i, repr(out), repr(cache), e, float(result.values[i])]
                    + [int(b) for b in result.policy[i]])
    return rows


def solution_header(mdp: MdpInstance) -> List[str]:
    return ["state", "out", "cache", "elapsed", "value"] + [f"swaps_level{c}" for c in range(mdp.n_levels)]


def dump_solution_csv(path: str, mdp: MdpInstance, result: SolveResult) -> None:
    """导出每个状态的相对值与各代价等级下的替换次数"""
    csv_io.write_csv(path, solution_header(mdp), solution_rows(mdp, result))
