#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
LISO策略模块
Longest lifetime In - Shortest lifetime Out：
信道代价低于 (l|L) 阈值时，用缓存外寿命最长的内容替换缓存内寿命最短的内容，
重复直到不能再替换
"""

import math

import numpy as np

from src.core.content_dynamics import (
    NO_ACTION, CacheAction, Capacity, LifetimeMultiset, SystemState,
)
from src.core.threshold_table import ThresholdTable
from src.policies.base_policy import CachePolicy
from src.utils.errors import InvariantViolation
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)


def select_action_liso(table: ThresholdTable, state: SystemState, cost: float,
                       b: Capacity) -> CacheAction:
    """
    LISO 替换循环

    每轮取 L = max(O)，缓存满时 l = min(I)，否则 l = 0（空位）；
    若 L > l 且 cost <= T(l|L)，执行简单动作 (l|L) 并更新工作副本。

    Args:
        table: 阈值表
        state: 当前状态
        cost: 本时隙代价
        b: 缓存容量

    Returns:
        CacheAction: 累积的下载与移出

    Raises:
        InvariantViolation: 简单动作次数超过 B·K_max
    """
    if b <= 0:
        return NO_ACTION
    out, cache = state.out_contents, state.cache
    downloads, evictions = [], []
    bound = len(out) if math.isinf(b) else int(b) * table.k_max
    swaps = 0
    while out:
        big = out.max()
        small = cache.min() if len(cache) >= b else 0
        if big <= small or cost > table.get(small, big):
            break
        swaps += 1
        if swaps > bound:
            raise InvariantViolation(f"LISO替换次数 {swaps} 超过上界 {bound}")
        out = out.remove(big)
        cache = cache.add(big)
        downloads.append(big)
        if small > 0:
            cache = cache.remove(small)
            out = out.add(small)
            evictions.append(small)
    if not downloads:
        return NO_ACTION
    return CacheAction(LifetimeMultiset.from_lifetimes(downloads),
                       LifetimeMultiset.from_lifetimes(evictions))


class LisoPolicy(CachePolicy):
    """LISO阈值策略"""

    def __init__(self, table: ThresholdTable):
        self.table = table

    @property
    def name(self) -> str:
        return "liso"

    def proactive_action(self, state: SystemState, cost: float,
                         capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        return select_action_liso(self.table, state, cost, capacity)
