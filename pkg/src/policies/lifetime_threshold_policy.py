#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
按生命周期阈值的下载策略
无限缓存下，剩余生命周期为 L 的缓存外内容在 C <= T_L 时下载；
用于以直接仿真校验无限缓存下界
"""

import numpy as np

from src.core.content_dynamics import NO_ACTION, CacheAction, Capacity, LifetimeMultiset, SystemState
from src.policies.base_policy import CachePolicy


class LifetimeThresholdPolicy(CachePolicy):
    """每个剩余生命周期一个阈值的策略"""

    def __init__(self, thresholds):
        # thresholds[L] 为生命周期 L 的阈值，下标0不使用
        self.thresholds = np.asarray(thresholds, dtype=float)

    @property
    def name(self) -> str:
        return "lifetime_threshold"

    def proactive_action(self, state: SystemState, cost: float,
                         capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        space = capacity - len(state.cache)
        chosen = []
        for lifetime in state.out_contents.descending():
            if len(chosen) >= space:
                break
            if cost <= self.thresholds[lifetime]:
                chosen.append(lifetime)
        if not chosen:
            return NO_ACTION
        return CacheAction(downloads=LifetimeMultiset.from_lifetimes(chosen))
