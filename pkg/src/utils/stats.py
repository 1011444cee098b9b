#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
统计工具模块
样本均值、标准差与正态近似95%置信区间
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

Z_95 = float(stats.norm.ppf(0.975))


@dataclass(frozen=True)
class CostEstimate:
    """一组独立轨迹平均代价的汇总"""
    mean: float
    std: float
    ci95: float
    n: int

    @property
    def std_error(self) -> float:
        return self.std / math.sqrt(self.n) if self.n > 0 else 0.0


def summarize_costs(values: Sequence[float]) -> CostEstimate:
    """
    汇总独立样本

    Args:
        values: 每条轨迹的平均代价

    Returns:
        CostEstimate: 均值、样本标准差、95%置信区间半宽

    Raises:
        ValueError: 样本数少于2，无法给出置信区间
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError(f"至少需要2个样本才能计算置信区间，当前 {arr.size} 个")
    std = float(np.std(arr, ddof=1))
    return CostEstimate(
        mean=float(np.mean(arr)),
        std=std,
        ci95=Z_95 * std / math.sqrt(arr.size),
        n=int(arr.size),
    )
