#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验结果行模块
ResultRow 及其CSV读写
"""

from dataclasses import dataclass
from typing import List, Sequence

from src.utils import csv_io
from src.utils.errors import ConfigError

RESULT_HEADER = ["scheme", "sweep_var", "sweep_value", "mean_cost_mw", "ci95_mw", "n_traj", "horizon", "seed"]


@dataclass(frozen=True)
class ResultRow:
    """一个 (方案, 扫描值) 的评估结果；解析得到的下界行 ci95_mw 为0"""
    scheme: str
    sweep_var: str
    sweep_value: float
    mean_cost_mw: float
    ci95_mw: float
    n_traj: int
    horizon: int
    seed: int

    def __post_init__(self):
        if self.mean_cost_mw < 0 or self.ci95_mw < 0:
            raise ValueError(f"结果行数值不能为负: {self}")

    def as_tuple(self) -> tuple:
        return (self.scheme, self.sweep_var, self.sweep_value, self.mean_cost_mw,
                self.ci95_mw, self.n_traj, self.horizon, self.seed)


def _sweep_number(text: str) -> float:
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def emit_rows(rows: Sequence[ResultRow]) -> str:
    """渲染为CSV文本"""
    return csv_io.render_csv(RESULT_HEADER, [r.as_tuple() for r in rows])


def parse_rows(text: str) -> List[ResultRow]:
    """
    解析 emit_rows 的输出

    Raises:
        ConfigError: 表头不符或字段无法解析
    """
    rows = []
    for record in csv_io.parse_csv(text, RESULT_HEADER):
        try:
            rows.append(ResultRow(
                scheme=record["scheme"],
                sweep_var=record["sweep_var"],
                sweep_value=_sweep_number(record["sweep_value"]),
                mean_cost_mw=float(record["mean_cost_mw"]),
                ci95_mw=float(record["ci95_mw"]),
                n_traj=int(record["n_traj"]),
                horizon=int(record["horizon"]),
                seed=int(record["seed"]),
            ))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"无法解析结果行 {record}: {e}")
    return rows


def write_rows(path: str, rows: Sequence[ResultRow]) -> None:
    csv_io.write_csv(path, RESULT_HEADER, [r.as_tuple() for r in rows])


def read_rows(path: str) -> List[ResultRow]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_rows(f.read())
