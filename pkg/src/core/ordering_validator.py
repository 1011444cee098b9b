#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
排序验证模块
检查各方案的平均代价是否低于下界超出置信区间（这意味着实现或统计有问题）
"""

import math
from collections import defaultdict
from typing import Any, Dict, List, Sequence, Tuple

from src.core.results import ResultRow
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)

BOUND_SCHEMES = ("lb_uc", "lb_nck", "exact")


class OrderingValidator:
    """结果排序验证器"""

    def __init__(self, bounds: Sequence[str] = BOUND_SCHEMES, n_sigma: float = 2.0):
        """
        初始化排序验证器

        Args:
            bounds: 视为下界的方案
            n_sigma: 允许的合并置信区间倍数
        """
        self.bounds = tuple(bounds)
        self.n_sigma = n_sigma

    def validate(self, rows: Sequence[ResultRow]) -> Tuple[bool, List[Dict[str, Any]]]:
        """
        验证结果排序

        同一扫描值下，若某方案均值 < 下界 - n_sigma·sqrt(ci_s² + ci_b²)，记为违反。

        Args:
            rows: 结果行

        Returns:
            Tuple[bool, List[Dict]]: (是否通过, 违反列表)，每项包含 rule 与 reason
        """
        by_value = defaultdict(dict)
        for row in rows:
            by_value[(row.sweep_var, row.sweep_value)][row.scheme] = row

        violations = []
        for (var, value), cell in by_value.items():
            for bound_name in self.bounds:
                bound = cell.get(bound_name)
                if bound is None:
                    continue
                for scheme, row in cell.items():
                    if scheme in self.bounds:
                        continue
                    margin = self.n_sigma * math.hypot(row.ci95_mw, bound.ci95_mw)
                    if row.mean_cost_mw < bound.mean_cost_mw - margin:
                        violations.append({
                            "rule": f"{scheme} >= {bound_name}",
                            "reason": (f"{var}={value}: {scheme} 均值 {row.mean_cost_mw:.6g} 低于 "
                                       f"{bound_name} {bound.mean_cost_mw:.6g} 超过 {margin:.3g}"),
                        })
        for v in violations:
            logger.warning(f"排序违反: {v['reason']}")
        return len(violations) == 0, violations
