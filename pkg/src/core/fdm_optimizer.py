#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
有限差分策略梯度模块
扰动阈值表 -> 配对轨迹评估 -> 岭回归估计梯度 -> 平均若干估计 -> 梯度步 -> 单调投影
"""

from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.simulator import Environment, rollout
from src.core.threshold_table import ThresholdTable, project_monotone
from src.policies.liso_policy import LisoPolicy
from src.utils import csv_io
from src.utils.errors import ConfigError, InvariantViolation
from src.utils.logger import get_logger
from src.utils.seeding import derive_seed
from src.utils.stats import summarize_costs

# 获取日志记录器
logger = get_logger(__name__)

# 目标函数：(阈值表, 轨迹种子) -> 平均能耗
Objective = Callable[[ThresholdTable, int], float]

CURVE_HEADER = ["update", "mean_cost_mw", "ci95_mw"]


@dataclass(frozen=True)
class FdmConfig:
    """有限差分训练参数"""
    r: float = 0.08
    step: float = 0.01
    n_perturbations: int = 100
    n_estimates: int = 5
    horizon: int = 300
    n_updates: int = 200
    ridge: float = 1e-6
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigError(f"必须 > 0，当前 {self.r}", key="fdm.r")
        if self.step < 0:
            raise ConfigError(f"不能为负，当前 {self.step}", key="fdm.step")
        if self.n_perturbations < 1:
            raise ConfigError("必须 >= 1", key="fdm.n_perturbations")
        if self.n_estimates < 1:
            raise ConfigError("必须 >= 1", key="fdm.n_estimates")
        if self.horizon < 1:
            raise ConfigError("必须 >= 1", key="fdm.horizon")
        if self.n_updates < 0:
            raise ConfigError("不能为负", key="fdm.n_updates")
        if self.ridge < 0:
            raise ConfigError("不能为负", key="fdm.ridge")
        if self.workers < 1:
            raise ConfigError("必须 >= 1", key="workers")


@dataclass(frozen=True)
class GradientEstimate:
    """一次梯度估计的中间量"""
    gradient: np.ndarray
    deltas: np.ndarray       # N×p，投影前的扰动
    diffs: np.ndarray        # N，配对代价差 ΔJ
    base_costs: np.ndarray   # N，未扰动表在各种子上的代价


@dataclass(frozen=True)
class LearningPoint:
    """学习曲线上的一点：第 update 次更新前的表的评估"""
    update: int
    mean_cost_mw: float
    ci95_mw: float


@dataclass
class TrainResult:
    """训练结果"""
    table: ThresholdTable
    curve: List[LearningPoint] = field(default_factory=list)


class RolloutObjective:
    """以蒙特卡洛轨迹评估 LISO 阈值表（可被进程池序列化）"""

    def __init__(self, env: Environment, horizon: int):
        self.env = env
        self.horizon = horizon

    def __call__(self, table: ThresholdTable, seed: int) -> float:
        return rollout(LisoPolicy(table), self.env, self.horizon, seed).avg_cost


def _evaluate_task(args) -> float:
    objective, table, seed = args
    return float(objective(table, seed))


def _evaluate_all(objective: Objective, tasks: Sequence[Tuple[ThresholdTable, int]],
                  workers: int) -> np.ndarray:
    """按任务顺序返回目标值；只有 RolloutObjective 走进程池"""
    args = [(objective, table, seed) for table, seed in tasks]
    if workers > 1 and isinstance(objective, RolloutObjective) and len(args) > 1:
        with Pool(processes=min(workers, len(args))) as pool:
            return np.array(pool.map(_evaluate_task, args), dtype=float)
    return np.array([_evaluate_task(a) for a in args], dtype=float)


def perturb(table: ThresholdTable, r: float,
            rng: np.random.Generator) -> Tuple[ThresholdTable, np.ndarray]:
    """
    随机扰动阈值表

    Args:
        table: 可行阈值表
        r: 扰动半宽，Δθ ~ U(-r, r) 逐项独立
        rng: 扰动随机流

    Returns:
        Tuple[ThresholdTable, np.ndarray]: 投影后的扰动表，以及投影前的 Δθ
    """
    delta = rng.uniform(-r, r, size=table.n_params)
    raw = ThresholdTable.from_vector(table.k_max, table.c_max, table.as_vector() + delta)
    return project_monotone(raw), delta


def regress_gradient(deltas: np.ndarray, diffs: np.ndarray, ridge: float) -> np.ndarray:
    """
    由 ΔJ ≈ ΔΘ·g 回归梯度：(ΔΘᵀΔΘ + ridge_eff·I) g = ΔΘᵀΔJ

    ridge_eff = ridge·trace(ΔΘᵀΔΘ)/p，使正则项与扰动尺度无关。

    Args:
        deltas: N×p 扰动矩阵
        diffs: 长度 N 的代价差
        ridge: 相对正则系数

    Returns:
        np.ndarray: 梯度估计（长度 p）

    Raises:
        ConfigError: ridge=0 且方程奇异（例如 N < p）
    """
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    diffs = np.asarray(diffs, dtype=float)
    n, p = deltas.shape
    gram = deltas.T @ deltas
    rhs = deltas.T @ diffs
    if ridge == 0.0:
        if n < p or np.linalg.matrix_rank(gram) < p:
            raise ConfigError(f"回归方程奇异（N={n}, 参数数={p}），请设置正的岭系数", key="fdm.ridge")
        return np.linalg.solve(gram, rhs)
    trace = float(np.trace(gram))
    ridge_eff = ridge * trace / p if trace > 0 else ridge
    return np.linalg.solve(gram + ridge_eff * np.eye(p), rhs)


def estimate_gradient(table: ThresholdTable, cfg: FdmConfig, env: Optional[Environment] = None,
                      objective: Optional[Objective] = None,
                      seed_key: Tuple = ()) -> GradientEstimate:
    """
    有限差分梯度估计

    生成 N 个扰动；第 i 个扰动表与未扰动表使用同一轨迹种子评估，
    ΔJ_i = J(θ+Δθ_i) - J(θ)，再做岭回归。

    Args:
        table: 当前可行阈值表
        cfg: 训练参数
        env: 仿真环境（未给 objective 时用于蒙特卡洛评估）
        objective: 可选的目标函数，替代蒙特卡洛轨迹
        seed_key: 参与种子派生的附加部件（扫描值、更新序号、估计序号）

    Returns:
        GradientEstimate: 梯度与中间量

    Raises:
        ConfigError: 未提供环境也未提供目标函数，或回归奇异
        InvariantViolation: 扰动表不可行
    """
    if objective is None:
        if env is None:
            raise ConfigError("需要仿真环境或目标函数")
        objective = RolloutObjective(env, cfg.horizon)
    rng = np.random.default_rng(derive_seed(cfg.base_seed, "fdm-perturb", *seed_key))
    perturbed, deltas = [], []
    for _ in range(cfg.n_perturbations):
        candidate, delta = perturb(table, cfg.r, rng)
        if not candidate.is_feasible():
            raise InvariantViolation("扰动后的阈值表不可行")
        perturbed.append(candidate)
        deltas.append(delta)
    seeds = [derive_seed(cfg.base_seed, "fdm", *seed_key, i) for i in range(cfg.n_perturbations)]
    tasks = list(zip(perturbed, seeds)) + [(table, s) for s in seeds]
    values = _evaluate_all(objective, tasks, cfg.workers)
    n = cfg.n_perturbations
    perturbed_costs, base_costs = values[:n], values[n:]
    diffs = perturbed_costs - base_costs
    deltas = np.array(deltas)
    gradient = regress_gradient(deltas, diffs, cfg.ridge)
    logger.debug(f"梯度估计 {seed_key}: |g|={np.linalg.norm(gradient):.4g}, J={base_costs.mean():.6g}")
    return GradientEstimate(gradient=gradient, deltas=deltas, diffs=diffs, base_costs=base_costs)


def train(init_table: ThresholdTable, cfg: FdmConfig, env: Optional[Environment] = None,
          objective: Optional[Objective] = None, sweep_value=None) -> TrainResult:
    """
    训练 LISO 阈值表

    每次更新平均 n_estimates 个独立梯度估计，θ ← Π(θ - λ·ḡ)。
    学习曲线记录每次更新所用的未扰动评估（均值与95%置信区间）。

    Args:
        init_table: 可行初始表
        cfg: 训练参数
        env: 仿真环境
        objective: 可选目标函数
        sweep_value: 扫描值（参与种子派生）

    Returns:
        TrainResult: 最终阈值表与学习曲线
    """
    if not init_table.is_feasible():
        raise InvariantViolation("初始阈值表不可行")
    table = init_table
    curve = []
    logger.info(f"开始FDM训练: {table!r}, 更新次数={cfg.n_updates}, λ={cfg.step}")
    for j in range(cfg.n_updates):
        estimates = [estimate_gradient(table, cfg, env, objective, (sweep_value, j, e))
                     for e in range(cfg.n_estimates)]
        avg_gradient = np.mean([e.gradient for e in estimates], axis=0)
        base_costs = np.concatenate([e.base_costs for e in estimates])
        ci95 = summarize_costs(base_costs).ci95 if base_costs.size >= 2 else 0.0
        curve.append(LearningPoint(update=j, mean_cost_mw=float(base_costs.mean()), ci95_mw=ci95))

        stepped = ThresholdTable.from_vector(table.k_max, table.c_max,
                                             table.as_vector() - cfg.step * avg_gradient)
        table = project_monotone(stepped)
        logger.info(f"FDM更新 {j + 1}/{cfg.n_updates}: J={curve[-1].mean_cost_mw:.6g} mW "
                    f"±{ci95:.3g}, |ḡ|={np.linalg.norm(avg_gradient):.4g}")
    return TrainResult(table=table, curve=curve)


def curve_rows(curve: Sequence[LearningPoint]) -> List[Tuple[int, float, float]]:
    return [(p.update, p.mean_cost_mw, p.ci95_mw) for p in curve]


def write_learning_curve(path: str, curve: Sequence[LearningPoint]) -> None:
    """写出学习曲线CSV：update,mean_cost_mw,ci95_mw"""
    csv_io.write_csv(path, CURVE_HEADER, curve_rows(curve))
