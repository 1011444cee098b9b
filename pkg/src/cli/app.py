#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
命令行入口模块
退出码：0 成功，2 配置错误，3 运行时不变量被破坏
"""

import argparse
import os
import sys
from typing import List, Optional

from src.core import bounds
from src.core.exact_mdp import check_value_monotonicity, dump_solution_csv
from src.core.experiment_runner import make_cell, run_experiment, run_scheme, solve_exact, summarize, train_liso
from src.core.fdm_optimizer import write_learning_curve
from src.core.results import ResultRow, emit_rows, read_rows, write_rows
from src.core.simulator import evaluate
from src.core.threshold_table import ThresholdTable
from src.policies.policy_factory import PolicyFactory
from src.utils.errors import ConfigError, InvariantViolation
from src.utils.experiment_config import SCHEMES, ExperimentConfig, load_config
from src.utils.logger import get_logger, logger_instance

# 获取日志记录器
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _load(args) -> ExperimentConfig:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"base_seed={args.seed}")
    return load_config(args.config, overrides)


def _emit(rows: List[ResultRow], out: Optional[str]) -> None:
    if out and out != "-":
        write_rows(out, rows)
    else:
        sys.stdout.write(emit_rows(rows))


def cmd_simulate(args) -> int:
    """单一方案在配置的每个扫描取值上评估"""
    config = _load(args)
    scheme = args.scheme
    if scheme is None:
        raise ConfigError("simulate 需要 --scheme", key="--scheme")
    rows = []
    for value in config.sweep_values():
        cell = make_cell(config, value)
        if scheme == PolicyFactory.POLICY_LISO and args.thresholds:
            table = ThresholdTable.from_csv(args.thresholds, cell.env.c_max)
            cfg = cell.config
            est = evaluate(PolicyFactory.create(scheme, table=table), cell.env, cfg.n_test,
                           cfg.test_horizon, cfg.base_seed, value, cfg.workers)
            rows.append(ResultRow(scheme, cfg.sweep.var, value, est.mean, est.ci95,
                                  cfg.n_test, cfg.test_horizon, cfg.base_seed))
        else:
            rows.append(run_scheme(cell, scheme))
    _emit(rows, args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    """在第一个扫描取值上训练LISO，写出阈值表与学习曲线"""
    config = _load(args)
    cell = make_cell(config, config.sweep_values()[0])
    result = train_liso(cell)
    result.table.to_csv(args.out or "-")
    if args.curve:
        write_learning_curve(args.curve, result.curve)
    return EXIT_OK


def cmd_bounds(args) -> int:
    """写出 LB-UC 与 LB-NCK 阈值表，并在标准错误输出打印 LB-UC 速率"""
    config = _load(args)
    cell = make_cell(config, config.sweep_values()[0])
    gen = cell.config.gen
    if cell.config.lbuc_truncated:
        lbuc = bounds.lbuc_table_truncated(gen.p_a, gen.d_max, cell.cost_model, gen.k_max)
    else:
        lbuc = bounds.lbuc_table(gen.p_a, cell.cost_model, gen.k_max)
    lbnck = bounds.lbnck_table(cell.cost_model, gen.d_max)
    if args.out and args.out != "-":
        os.makedirs(args.out, exist_ok=True)
        lbuc.to_csv(os.path.join(args.out, "lbuc_table.csv"))
        lbnck.to_csv(os.path.join(args.out, "lbnck_table.csv"))
    else:
        lbuc.to_csv("-")
        lbnck.to_csv("-")
    sys.stderr.write(f"LB-UC = {bounds.lbuc_rate(gen, lbuc):.6g} mW/slot\n")
    return EXIT_OK


def cmd_solve_exact(args) -> int:
    """精确求解极小实例并输出结构报告"""
    config = _load(args)
    cell = make_cell(config, config.sweep_values()[0])
    mdp, result, report = solve_exact(cell)
    monotone = check_value_monotonicity(result, mdp)
    lines = [
        f"states={mdp.n_states}",
        f"channel_levels={mdp.n_levels}",
        f"rho_star_mw={result.rho_star!r}",
        f"iterations={result.iterations}",
        f"bellman_residual={result.residual:.3g}",
        f"structure_checked_states={report.checked_states}",
        f"structure_violations={len(report.violations)}",
        f"value_monotonicity_violations={len(monotone)}",
    ]
    for i, row in report.violations:
        out, cache, e = mdp.states[i]
        lines.append(f"violation state={i} O={out!r} I={cache!r} E={e} swaps={row}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        dump_solution_csv(args.out, mdp, result)
    return EXIT_OK


def cmd_sweep(args) -> int:
    """完整扫描实验"""
    config = _load(args)
    _emit(run_experiment(config), args.out)
    return EXIT_OK


def cmd_summarize(args) -> int:
    """读取结果CSV并打印汇总表"""
    config = _load(args)
    rows = []
    for path in args.inputs:
        rows.extend(read_rows(path))
    sys.stdout.write(summarize(rows, config))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proactive-cache", description="主动缓存能耗仿真与优化工具")
    parser.add_argument("--log-level", default=None, help="日志级别（覆盖 PCACHE_LOG_LEVEL）")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="配置文件路径或 preset:名称")
    common.add_argument("--seed", type=int, default=None, help="覆盖 base_seed")
    common.add_argument("--out", default=None, help="输出路径，- 表示标准输出")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="覆盖配置项，可重复")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="评估单一方案")
    p.add_argument("--scheme", choices=SCHEMES, default=None)
    p.add_argument("--thresholds", default=None, help="LISO 阈值表CSV（不给出则训练）")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="FDM 训练 LISO 阈值表")
    p.add_argument("--curve", default=None, help="学习曲线CSV输出路径")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bounds", parents=[common], help="输出下界阈值表")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("solve-exact", parents=[common], help="精确求解极小实例")
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("sweep", parents=[common], help="完整扫描实验")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("summarize", parents=[common], help="汇总结果CSV")
    p.add_argument("inputs", nargs="+", help="结果CSV文件")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行主函数

    Args:
        argv: 参数列表，None 表示 sys.argv[1:]

    Returns:
        int: 退出码
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        logger_instance.set_level(args.log_level.upper())
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error(f"配置错误: {e}")
        return EXIT_CONFIG
    except InvariantViolation as e:
        logger.error(f"运行时不变量被破坏: {e}")
        return EXIT_INVARIANT
