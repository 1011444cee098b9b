#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
下界模块
LB-UC：假设缓存容量无限，每个内容独立按剩余生命周期的阈值决定下载；
LB-NCK：假设预先知道用户接入时刻，按距离接入的时隙数设定阈值，并在容量 B 下贪心下载
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from src.core.channel_model import CostModel, expected_cost, expected_min_cost
from src.core.content_dynamics import GenParams, access_hazard, elapsed_distribution
from src.core.simulator import Channel, Environment, ExogenousTrace, draw_trace, evaluate, trajectory_seeds
from src.policies.lifetime_threshold_policy import LifetimeThresholdPolicy
from src.utils import csv_io
from src.utils.errors import ConfigError
from src.utils.logger import get_logger
from src.utils.seeding import trajectory_streams
from src.utils.stats import CostEstimate, summarize_costs

# 获取日志记录器
logger = get_logger(__name__)

LBUC_HEADER = ["k", "W_mw"]
LBNCK_HEADER = ["s", "V_mw"]

LBNCK_SCHEME = "lb_nck"


@dataclass(frozen=True)
class LbucTable:
    """W(k)：剩余 k 个时隙的未缓存内容在最优单内容策略下的期望代价"""
    w: np.ndarray

    @property
    def k_max(self) -> int:
        return int(self.w.size - 1)

    def thresholds(self) -> np.ndarray:
        """T_k = W(k-1)，下标0不使用"""
        t = np.zeros(self.w.size)
        t[1:] = self.w[:-1]
        return t

    def to_csv(self, path: str) -> None:
        csv_io.write_csv(path, LBUC_HEADER, [(k, float(v)) for k, v in enumerate(self.w)])


@dataclass(frozen=True)
class LbucTruncatedTable:
    """截断接入下的 W(k, e)，e 为时隙开始时的 elapsed"""
    w: np.ndarray
    elapsed_weights: np.ndarray

    @property
    def k_max(self) -> int:
        return int(self.w.shape[0] - 1)

    def weighted(self) -> LbucTable:
        """按 elapsed 平稳分布加权后的 W(k)"""
        return LbucTable(self.w @ self.elapsed_weights)

    def to_csv(self, path: str) -> None:
        self.weighted().to_csv(path)


@dataclass(frozen=True)
class LbnckTable:
    """V(s)：距离接入还有 s 个时隙时，一个必须交付的内容的期望下载代价"""
    v: np.ndarray

    @property
    def d_max(self) -> int:
        return int(self.v.size - 1)

    def threshold(self, s: int) -> float:
        """s >= 1 时为 V(s-1)；s = 0 为强制下载"""
        return math.inf if s == 0 else float(self.v[s - 1])

    def to_csv(self, path: str) -> None:
        csv_io.write_csv(path, LBNCK_HEADER, [(s, float(v)) for s, v in enumerate(self.v)])


def lbuc_table(p_a: float, dist: CostModel, k_max: int) -> LbucTable:
    """
    无限缓存下界的动态规划（纯几何接入）

    W(0) = 0，W(k) = p_a·E[C] + (1-p_a)·E[min(C, W(k-1))]

    Args:
        p_a: 每时隙接入概率
        dist: 代价分布
        k_max: 最大生命周期

    Returns:
        LbucTable: W(0..K_max)
    """
    if not 0.0 < p_a <= 1.0:
        raise ConfigError(f"必须满足 0 < p_a <= 1，当前 {p_a}", key="gen.p_a")
    mean_cost = expected_cost(dist)
    w = np.zeros(k_max + 1)
    for k in range(1, k_max + 1):
        w[k] = p_a * mean_cost + (1.0 - p_a) * expected_min_cost(w[k - 1], dist)
    logger.debug(f"LB-UC 阈值表: {np.round(w, 6).tolist()}")
    return LbucTable(w)


def lbuc_table_truncated(p_a: float, d_max: int, dist: CostModel, k_max: int) -> LbucTruncatedTable:
    """
    截断接入下按 (k, e) 的动态规划

    W(0, e) = 0，W(k, e) = h(e)·E[C] + (1-h(e))·E[min(C, W(k-1, e+1))]，
    其中 h(e) 在 e = D_max-1 时为1，否则为 p_a。

    Returns:
        LbucTruncatedTable: W(k, e) 与 elapsed 平稳分布
    """
    gen = GenParams(k_max=k_max, p_a=p_a, d_max=d_max, lifetime_support=(k_max,))
    mean_cost = expected_cost(dist)
    w = np.zeros((k_max + 1, d_max))
    for k in range(1, k_max + 1):
        for e in range(d_max):
            h = access_hazard(gen, e)
            wait = w[k - 1, min(e + 1, d_max - 1)]
            w[k, e] = h * mean_cost + (1.0 - h) * expected_min_cost(wait, dist)
    return LbucTruncatedTable(w=w, elapsed_weights=elapsed_distribution(gen))


def lbuc_rate(gen: GenParams, table) -> float:
    """
    无限缓存下界的平均每时隙代价 E[M]·E_K[W(K)]

    Args:
        gen: 生成参数
        table: LbucTable 或 LbucTruncatedTable

    Returns:
        float: LB-UC（mW/时隙）

    Raises:
        ConfigError: 表的 K_max 与生成参数不一致
    """
    if table.k_max != gen.k_max:
        raise ConfigError(f"阈值表 K_max={table.k_max} 与生成参数 K_max={gen.k_max} 不一致", key="gen.k_max")
    if isinstance(table, LbucTruncatedTable):
        table = table.weighted()
    support = np.asarray(gen.lifetime_support)
    return float(gen.mean_batch_size * np.mean(table.w[support]))


def lbuc_simulate(gen: GenParams, chan: Channel, table: LbucTable, n_traj: int, horizon: int,
                  base_seed: int, sweep_value=None, workers: int = 1) -> CostEstimate:
    """无限缓存下直接仿真按生命周期阈值 T_k = W(k-1) 的策略"""
    env = Environment(replace(gen, b=math.inf), chan)
    policy = LifetimeThresholdPolicy(table.thresholds())
    return evaluate(policy, env, n_traj, horizon, base_seed, sweep_value, workers)


def lbnck_table(dist: CostModel, d_max: int) -> LbnckTable:
    """
    非因果接入下界的动态规划

    V(0) = E[C]，V(s) = E[min(C, V(s-1))]，1 <= s <= D_max

    Args:
        dist: 代价分布
        d_max: 最大接入间隔

    Returns:
        LbnckTable: V(0..D_max)
    """
    if d_max < 1:
        raise ConfigError("必须 >= 1", key="gen.d_max")
    v = np.zeros(d_max + 1)
    v[0] = expected_cost(dist)
    for s in range(1, d_max + 1):
        v[s] = expected_min_cost(v[s - 1], dist)
    return LbnckTable(v)


def time_to_access(accesses: np.ndarray, horizon: int) -> np.ndarray:
    """
    每个时隙距离下一次接入的时隙数（本时隙接入为0）

    预抽取范围内没有接入时取一个大于任何生命周期的值。
    """
    size = accesses.size
    result = np.full(horizon, size + 1, dtype=int)
    next_access = None
    for t in range(size - 1, -1, -1):
        if accesses[t]:
            next_access = t
        if t < horizon and next_access is not None:
            result[t] = next_access - t
    return result


def lbnck_trajectory(gen: GenParams, table: LbnckTable, trace: ExogenousTrace) -> float:
    """
    在一条外生样本上计算 LB-NCK 平均代价

    新内容若在下一次接入前过期（s > k-1）直接丢弃；非接入时隙若 C <= V(s-1)，
    在容量允许范围内下载待交付内容；接入时隙强制下载剩余待交付内容（不受容量限制）。
    """
    horizon = trace.horizon
    s_all = time_to_access(trace.accesses, horizon)
    pending = 0
    cached = 0
    total = 0.0
    for t in range(horizon):
        s = int(s_all[t])
        cost = float(trace.costs[t])
        pending += sum(n for k, n in trace.batches[t].as_dict().items() if s <= k - 1)
        if s == 0:
            total += pending * cost
            pending = 0
            cached = 0
            continue
        if s <= table.d_max and cost <= table.threshold(s):
            n = min(pending, gen.b - cached)
            if n > 0:
                n = int(n)
                total += n * cost
                pending -= n
                cached += n
    return total / horizon


def lbnck_simulate(gen: GenParams, chan: Channel, table: LbnckTable, n_traj: int, horizon: int,
                   base_seed: int, sweep_value=None) -> CostEstimate:
    """
    仿真 LB-NCK（接入时刻预先抽取并对策略可见）

    与其它方案共享 (base_seed, 扫描值, 轨迹序号) 派生的外生样本。

    Returns:
        CostEstimate: 均值与95%置信区间
    """
    if n_traj < 2:
        raise ValueError(f"n_traj 至少为2，当前 {n_traj}")
    env = Environment(gen, chan)
    lookahead = max(gen.d_max, gen.k_max) + 1
    costs = []
    for seed in trajectory_seeds(base_seed, n_traj, sweep_value):
        trace = draw_trace(env, horizon, trajectory_streams(seed, LBNCK_SCHEME), lookahead)
        costs.append(lbnck_trajectory(gen, table, trace))
    estimate = summarize_costs(costs)
    logger.info(f"LB-NCK: 均值={estimate.mean:.6g} mW, CI95={estimate.ci95:.3g}")
    return estimate


def reactive_rate_closed_form(gen: GenParams, mean_cost: float) -> float:
    """
    被动缓存的更新-回报闭式代价

    一个在 elapsed=e 的时隙生成、生命周期为 K 的内容，只有在 K 个时隙内（含当前）
    发生接入时才会被下载：
    rate = E[C]·E[M]·Σ_e π(e)·Σ_K P(K)·P(接入发生在 K 个时隙内 | e)

    Args:
        gen: 生成参数
        mean_cost: E[C]

    Returns:
        float: 平均每时隙代价（mW）
    """
    support = np.asarray(gen.lifetime_support)
    if not gen.truncate_access:
        delivered = np.mean(1.0 - (1.0 - gen.p_a) ** support)
        return float(mean_cost * gen.mean_batch_size * delivered)
    weights = elapsed_distribution(gen)
    delivered = 0.0
    for e, weight in enumerate(weights):
        per_k = []
        for k in support:
            survive = 1.0
            for j in range(int(k)):
                survive *= 1.0 - access_hazard(gen, min(e + j, gen.d_max - 1))
            per_k.append(1.0 - survive)
        delivered += weight * float(np.mean(per_k))
    return float(mean_cost * gen.mean_batch_size * delivered)
