#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
LISO 阈值表模块
T(l|L) 对所有 0 <= l < L <= K_max，l=0 表示缓存空位（纯下载）
"""

from typing import List, Tuple

import numpy as np

from src.utils.errors import InvariantViolation
from src.utils import csv_io

Pair = Tuple[int, int]

CSV_HEADER = ["l", "L", "threshold_mw"]


def threshold_pairs(k_max: int) -> List[Pair]:
    """按 (l, L) 排序的全部参数下标"""
    return [(l, big) for l in range(k_max) for big in range(l + 1, k_max + 1)]


class ThresholdTable:
    """
    LISO 阈值表

    内部用 (K_max+1)×(K_max+1) 矩阵保存，只有 l < L 的上三角部分有意义。
    对象创建后只读。
    """

    def __init__(self, k_max: int, c_max: float, values: np.ndarray):
        values = np.array(values, dtype=float)
        if values.shape != (k_max + 1, k_max + 1):
            raise ValueError(f"阈值矩阵形状应为 {(k_max + 1, k_max + 1)}，实际 {values.shape}")
        # 下三角无意义，统一置零便于比较
        values[np.tril_indices(k_max + 1)] = 0.0
        values.setflags(write=False)
        self.k_max = k_max
        self.c_max = float(c_max)
        self.values = values

    @classmethod
    def constant(cls, k_max: int, c_max: float, value: float) -> "ThresholdTable":
        """所有阈值取同一值（例如代价分布中位数，或0得到被动缓存）"""
        return cls(k_max, c_max, np.full((k_max + 1, k_max + 1), float(value)))

    @classmethod
    def from_vector(cls, k_max: int, c_max: float, vector) -> "ThresholdTable":
        vector = np.asarray(vector, dtype=float)
        rows, cols = _pair_index(k_max)
        if vector.size != rows.size:
            raise ValueError(f"参数向量长度应为 {rows.size}，实际 {vector.size}")
        values = np.zeros((k_max + 1, k_max + 1))
        values[rows, cols] = vector
        return cls(k_max, c_max, values)

    @property
    def n_params(self) -> int:
        return self.k_max * (self.k_max + 1) // 2

    def get(self, l: int, big: int) -> float:
        return float(self.values[l, big])

    def as_vector(self) -> np.ndarray:
        rows, cols = _pair_index(self.k_max)
        return self.values[rows, cols].copy()

    def is_feasible(self, atol: float = 1e-12) -> bool:
        """检查 [0, C_max] 边界和两条单调约束"""
        vec = self.as_vector()
        if np.any(vec < -atol) or np.any(vec > self.c_max + atol):
            return False
        t = self.values
        for l in range(self.k_max):
            if np.any(np.diff(t[l, l + 1:]) < -atol):
                return False
        for big in range(2, self.k_max + 1):
            if np.any(np.diff(t[:big, big]) > atol):
                return False
        return True

    def to_rows(self) -> List[Tuple[int, int, float]]:
        return [(l, big, float(self.values[l, big])) for l, big in threshold_pairs(self.k_max)]

    def to_csv(self, path: str) -> None:
        csv_io.write_csv(path, CSV_HEADER, self.to_rows())

    @classmethod
    def from_csv(cls, path: str, c_max: float) -> "ThresholdTable":
        rows = csv_io.read_csv(path, CSV_HEADER)
        k_max = max(int(r["L"]) for r in rows)
        values = np.zeros((k_max + 1, k_max + 1))
        for r in rows:
            values[int(r["l"]), int(r["L"])] = float(r["threshold_mw"])
        return cls(k_max, c_max, values)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ThresholdTable) and self.k_max == other.k_max
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"ThresholdTable(k_max={self.k_max}, c_max={self.c_max:.4g}, params={self.n_params})"


def _pair_index(k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    pairs = threshold_pairs(k_max)
    return (np.array([p[0] for p in pairs], dtype=int),
            np.array([p[1] for p in pairs], dtype=int))


def project_monotone(table: ThresholdTable) -> ThresholdTable:
    """
    投影到可行阈值集合

    先截断到 [0, C_max]；对每个 l 沿 L 升序取累计最大（L 方向不减），
    再对每个 L 沿 l 升序取累计最小（l 方向不增）。两遍扫描各做两次。

    Args:
        table: 任意阈值表

    Returns:
        ThresholdTable: 满足两条单调约束的阈值表；对可行输入保持不变

    Raises:
        InvariantViolation: 扫描后仍不可行
    """
    k = table.k_max
    t = np.clip(np.array(table.values), 0.0, table.c_max)
    for _ in range(2):
        for l in range(k):
            t[l, l + 1:] = np.maximum.accumulate(t[l, l + 1:])
        for big in range(1, k + 1):
            t[:big, big] = np.minimum.accumulate(t[:big, big])
    projected = ThresholdTable(k, table.c_max, t)
    if not projected.is_feasible():
        raise InvariantViolation("单调投影后阈值表仍不可行")
    return projected


def initial_table(k_max: int, c_max: float, value: float) -> ThresholdTable:
    """训练初值：所有阈值取同一值（默认取代价分布中位数），截断到 [0, C_max]"""
    return project_monotone(ThresholdTable.constant(k_max, c_max, value))
