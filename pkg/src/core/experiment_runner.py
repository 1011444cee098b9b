#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验编排模块
对扫描变量的每个取值、每个方案：训练（LISO）、评估、计算下界或精确最优，输出结果行
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core import bounds
from src.core.channel_model import CostDistribution, DiscreteChannel, cost_distribution, discretize
from src.core.exact_mdp import (
    MdpInstance, SolveResult, StructureReport, build_mdp, check_threshold_structure,
    relative_value_iteration,
)
from src.core.fdm_optimizer import TrainResult, train
from src.core.ordering_validator import OrderingValidator
from src.core.results import ResultRow
from src.core.simulator import Environment, evaluate
from src.core.threshold_table import ThresholdTable, initial_table
from src.policies.policy_factory import PolicyFactory
from src.utils.errors import ConfigError
from src.utils.experiment_config import ExperimentConfig
from src.utils.logger import get_logger
from src.utils.seeding import derive_seed

# 获取日志记录器
logger = get_logger(__name__)

CostModelLike = Union[CostDistribution, DiscreteChannel]


@dataclass
class Cell:
    """一个扫描取值下的实验上下文"""
    config: ExperimentConfig
    sweep_value: object
    env: Environment
    cost_model: CostModelLike


def cost_model_for(config: ExperimentConfig) -> CostModelLike:
    """显式代价等级时用离散信道，否则抽样得到经验分布（只依赖 base_seed）"""
    discrete = config.discrete_channel()
    if discrete is not None:
        return discrete
    rng = np.random.default_rng(derive_seed(config.base_seed, "cost-distribution"))
    return cost_distribution(config.chan, config.n_samples, rng)


def make_cell(config: ExperimentConfig, sweep_value, cost_model: Optional[CostModelLike] = None) -> Cell:
    """构建扫描取值对应的上下文"""
    cell_config = config.at_sweep_value(sweep_value)
    model = cost_model if cost_model is not None else cost_model_for(cell_config)
    channel = model if isinstance(model, DiscreteChannel) else cell_config.chan
    return Cell(config=cell_config, sweep_value=sweep_value,
                env=Environment(cell_config.gen, channel), cost_model=model)


def train_liso(cell: Cell) -> TrainResult:
    """从代价中位数出发训练LISO阈值表"""
    init = initial_table(cell.config.gen.k_max, cell.env.c_max, cell.cost_model.median())
    return train(init, cell.config.fdm, cell.env, sweep_value=cell.sweep_value)


def liso_table(cell: Cell, trained: Optional[Dict[tuple, ThresholdTable]] = None) -> ThresholdTable:
    """
    取得该扫描值下的LISO阈值表

    LISO的目标只依赖生成参数、信道与FDM配置；在同一次实验中这些不变时复用已训练的表
    （例如扫描随机缓存概率 q 时只训练一次）。

    Args:
        cell: 扫描取值上下文
        trained: 以 (gen, fdm) 为键的已训练表缓存，None 表示不缓存
    """
    key = (cell.config.gen, cell.config.fdm)
    if trained is not None and key in trained:
        logger.info(f"复用已训练的LISO阈值表 ({cell.config.sweep.var}={cell.sweep_value})")
        return trained[key]
    table = train_liso(cell).table
    if trained is not None:
        trained[key] = table
    return table


def exact_channel(cell: Cell) -> DiscreteChannel:
    if isinstance(cell.cost_model, DiscreteChannel):
        return cell.cost_model
    return discretize(cell.cost_model, cell.config.exact.channel_levels)


def solve_exact(cell: Cell) -> Tuple[MdpInstance, SolveResult, StructureReport]:
    """
    在离散信道上精确求解，并检查最优策略的嵌套阈值结构

    Raises:
        StateSpaceTooLargeError: 实例过大
    """
    mdp = build_mdp(cell.config.gen, exact_channel(cell), cell.config.exact.max_states)
    result = relative_value_iteration(mdp, cell.config.exact.tol)
    return mdp, result, check_threshold_structure(result, mdp)


def _row(cell: Cell, scheme: str, mean: float, ci95: float, n_traj: int, horizon: int) -> ResultRow:
    return ResultRow(scheme=scheme, sweep_var=cell.config.sweep.var, sweep_value=cell.sweep_value,
                     mean_cost_mw=float(mean), ci95_mw=float(ci95), n_traj=n_traj,
                     horizon=horizon, seed=cell.config.base_seed)


def run_scheme(cell: Cell, scheme: str, trained: Optional[Dict[tuple, ThresholdTable]] = None) -> ResultRow:
    """
    计算一个 (方案, 扫描值) 的结果行

    解析下界与精确最优的 ci95 为0，n_traj 与 horizon 记为0。
    """
    cfg = cell.config
    n, horizon = cfg.n_test, cfg.test_horizon
    if scheme in (PolicyFactory.POLICY_LISO, PolicyFactory.POLICY_REACTIVE, PolicyFactory.POLICY_RANDOM):
        table = liso_table(cell, trained) if scheme == PolicyFactory.POLICY_LISO else None
        policy = PolicyFactory.create(scheme, table=table, q=cfg.random_q)
        est = evaluate(policy, cell.env, n, horizon, cfg.base_seed, cell.sweep_value, cfg.workers)
        return _row(cell, scheme, est.mean, est.ci95, n, horizon)
    if scheme == "lb_uc":
        gen = cfg.gen
        if cfg.lbuc_truncated:
            table = bounds.lbuc_table_truncated(gen.p_a, gen.d_max, cell.cost_model, gen.k_max)
        else:
            table = bounds.lbuc_table(gen.p_a, cell.cost_model, gen.k_max)
        return _row(cell, scheme, bounds.lbuc_rate(gen, table), 0.0, 0, 0)
    if scheme == "lb_nck":
        table = bounds.lbnck_table(cell.cost_model, cfg.gen.d_max)
        est = bounds.lbnck_simulate(cfg.gen, cell.env.channel, table, n, horizon,
                                    cfg.base_seed, cell.sweep_value)
        return _row(cell, scheme, est.mean, est.ci95, n, horizon)
    if scheme == "exact":
        _, result, _ = solve_exact(cell)
        return _row(cell, scheme, result.rho_star, 0.0, 0, 0)
    raise ConfigError(f"不支持的方案: {scheme}", key="schemes")


def run_experiment(config: ExperimentConfig) -> List[ResultRow]:
    """
    运行完整实验

    每个扫描取值、每个方案各一行，顺序为 (扫描值, 方案) 的配置顺序，给定 base_seed 时结果确定。

    Args:
        config: 实验配置

    Returns:
        List[ResultRow]: 结果行
    """
    rows = []
    values = config.sweep_values()
    # 代价分布不随扫描变量变化，只抽样一次
    shared_model = cost_model_for(config)
    trained: Dict[tuple, ThresholdTable] = {}
    for i, value in enumerate(values):
        cell = make_cell(config, value, shared_model)
        logger.info(f"扫描 {config.sweep.var}={value} ({i + 1}/{len(values)})")
        for scheme in config.schemes:
            row = run_scheme(cell, scheme, trained)
            logger.info(f"  {scheme}: {row.mean_cost_mw:.6g} mW ±{row.ci95_mw:.3g}")
            rows.append(row)
    return rows


def normalized_capacity(config: ExperimentConfig, row: ResultRow) -> float:
    """B/(E[M]·E[K])"""
    try:
        gen = config.at_sweep_value(row.sweep_value).gen if row.sweep_var == config.sweep.var else config.gen
    except ConfigError:
        gen = config.gen
    return gen.b / (gen.mean_batch_size * gen.mean_lifetime)


def summarize(rows: Sequence[ResultRow], config: Optional[ExperimentConfig] = None) -> str:
    """
    生成对齐的文本表格，并附加排序违反警告

    Args:
        rows: 结果行
        config: 用于计算归一化容量的配置，默认全部默认值

    Returns:
        str: 表格文本；没有结果行时为空字符串
    """
    if not rows:
        return ""
    config = config or ExperimentConfig()
    header = ["scheme", "sweep_var", "sweep_value", "norm_capacity", "mean_cost_mw", "ci95_mw", "n_traj", "horizon"]
    table = [header]
    for r in rows:
        table.append([r.scheme, r.sweep_var, f"{r.sweep_value:g}", f"{normalized_capacity(config, r):.4g}",
                      f"{r.mean_cost_mw:.6g}", f"{r.ci95_mw:.3g}", str(r.n_traj), str(r.horizon)])
    widths = [max(len(line[c]) for line in table) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in table]
    lines.insert(1, "  ".join("-" * w for w in widths))

    _, violations = OrderingValidator().validate(rows)
    for v in violations:
        lines.append(f"警告: {v['reason']}")
    return "\n".join(lines) + "\n"
