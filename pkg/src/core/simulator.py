#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
仿真模块
预先抽取外生随机量（内容、信道、接入），在其上运行缓存策略并统计平均能耗
"""

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Sequence, Tuple, Union

import numpy as np

from src.core.channel_model import ChannelParams, DiscreteChannel
from src.core.content_dynamics import (
    GenParams, LifetimeMultiset, SystemState, add_fresh, advance_slot, apply_action,
    generate_batch, sample_access, slot_cost,
)
from src.policies.base_policy import CachePolicy
from src.utils.errors import InvariantViolation
from src.utils.logger import get_logger
from src.utils.seeding import TrajectoryStreams, derive_seed, trajectory_streams
from src.utils.stats import CostEstimate, summarize_costs

# 获取日志记录器
logger = get_logger(__name__)

Channel = Union[ChannelParams, DiscreteChannel]


@dataclass(frozen=True)
class Environment:
    """仿真环境：内容/接入参数 + 信道"""
    gen: GenParams
    channel: Channel

    @property
    def capacity(self):
        return self.gen.b

    @property
    def c_max(self) -> float:
        return self.channel.c_max

    def sample_costs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.channel.sample_costs(rng, size)


@dataclass(frozen=True)
class ExogenousTrace:
    """
    一条轨迹的外生随机量

    batches[t] 为第 t 个时隙开始时的新内容（共 horizon+1 个，最后一个只用于推进）；
    accesses 额外包含 lookahead 个时隙，供非因果下界读取未来接入时刻。
    """
    batches: Tuple[LifetimeMultiset, ...]
    costs: np.ndarray
    accesses: np.ndarray

    @property
    def horizon(self) -> int:
        return int(self.costs.size)


@dataclass(frozen=True)
class RolloutResult:
    """单条轨迹的结果"""
    avg_cost: float
    n_downloads: int
    n_accesses: int


def draw_trace(env: Environment, horizon: int, streams: TrajectoryStreams,
               lookahead: int = 0) -> ExogenousTrace:
    """
    抽取一条轨迹的外生随机量

    Args:
        env: 仿真环境
        horizon: 时隙数 T
        streams: 轨迹随机流
        lookahead: 额外抽取的接入时隙数

    Returns:
        ExogenousTrace: 外生样本
    """
    batches = tuple(generate_batch(streams.gen, env.gen) for _ in range(horizon + 1))
    costs = np.asarray(env.sample_costs(streams.chan, horizon), dtype=float)
    accesses = np.zeros(horizon + lookahead, dtype=bool)
    elapsed = 0
    for t in range(horizon + lookahead):
        accesses[t] = sample_access(streams.access, env.gen, elapsed)
        elapsed = 0 if accesses[t] else elapsed + 1
    return ExogenousTrace(batches=batches, costs=costs, accesses=accesses)


def run_trace(policy: CachePolicy, env: Environment, trace: ExogenousTrace,
              rng: np.random.Generator) -> RolloutResult:
    """
    在给定外生样本上运行策略

    初始状态 O_0 = I_0 = ∅，第一个时隙的新内容并入 O 后开始决策。

    Args:
        policy: 缓存策略
        env: 仿真环境
        trace: 外生样本
        rng: 策略随机流

    Returns:
        RolloutResult: 平均每时隙能耗与计数

    Raises:
        InvariantViolation: 策略动作不合法
    """
    capacity = env.capacity
    state = add_fresh(SystemState(), trace.batches[0])
    total = 0.0
    downloads = 0
    accesses = 0
    for t in range(trace.horizon):
        accessed = bool(trace.accesses[t])
        cost = float(trace.costs[t])
        action = policy.select_action(state, cost, accessed, capacity, rng)
        middle = apply_action(state, action, accessed, capacity)
        total += slot_cost(action, cost)
        downloads += action.n_downloads
        accesses += int(accessed)
        state = advance_slot(middle, trace.batches[t + 1], accessed)
    if total < 0:
        raise InvariantViolation(f"累计能耗为负: {total}")
    return RolloutResult(avg_cost=total / trace.horizon, n_downloads=downloads, n_accesses=accesses)


def rollout(policy: CachePolicy, env: Environment, horizon: int, seed: int) -> RolloutResult:
    """
    从空状态出发仿真一条轨迹

    Args:
        policy: 缓存策略
        env: 仿真环境
        horizon: 时隙数（>= 1）
        seed: 轨迹种子；外生随机量只依赖它，不同策略可配对比较

    Returns:
        RolloutResult: 平均每时隙能耗
    """
    if horizon < 1:
        raise ValueError(f"horizon 必须 >= 1，当前 {horizon}")
    streams = trajectory_streams(seed, policy.name)
    trace = draw_trace(env, horizon, streams)
    return run_trace(policy, env, trace, streams.policy)


def rollout_many(policy: CachePolicy, env: Environment, horizon: int, seeds: Sequence[int],
                 workers: int = 1) -> np.ndarray:
    """
    对一组种子各仿真一条轨迹，结果按种子顺序排列（与是否并行无关）

    Args:
        policy: 缓存策略
        env: 仿真环境
        horizon: 时隙数
        seeds: 轨迹种子
        workers: 进程数，>1 时使用进程池

    Returns:
        np.ndarray: 每条轨迹的平均能耗
    """
    args = [(policy, env, horizon, int(s)) for s in seeds]
    if workers > 1 and len(args) > 1:
        with Pool(processes=min(workers, len(args))) as pool:
            results = pool.starmap(rollout, args)
    else:
        results = [rollout(*a) for a in args]
    return np.array([r.avg_cost for r in results], dtype=float)


def trajectory_seeds(base_seed: int, n_test: int, sweep_value=None) -> list:
    """测试轨迹的种子：由 (base_seed, 扫描值, 轨迹序号) 派生，不含策略名"""
    return [derive_seed(base_seed, sweep_value, i) for i in range(n_test)]


def evaluate(policy: CachePolicy, env: Environment, n_test: int, horizon: int,
             base_seed: int, sweep_value=None, workers: int = 1) -> CostEstimate:
    """
    用 n_test 条独立轨迹评估策略

    Args:
        policy: 缓存策略
        env: 仿真环境
        n_test: 轨迹数（>= 2）
        horizon: 每条轨迹时隙数
        base_seed: 基础种子
        sweep_value: 扫描值（参与种子派生）
        workers: 进程数

    Returns:
        CostEstimate: 均值、标准差与95%置信区间

    Raises:
        ValueError: n_test < 2
    """
    if n_test < 2:
        raise ValueError(f"n_test 至少为2才能给出置信区间，当前 {n_test}")
    costs = rollout_many(policy, env, horizon, trajectory_seeds(base_seed, n_test, sweep_value), workers)
    estimate = summarize_costs(costs)
    logger.info(f"评估 {policy.name}: 均值={estimate.mean:.6g} mW, CI95={estimate.ci95:.3g}, "
                f"n={n_test}, T={horizon}")
    return estimate
