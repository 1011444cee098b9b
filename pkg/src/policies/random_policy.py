#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
随机缓存策略模块
按随机顺序遍历缓存外内容，每个以概率 q 缓存，直到缓存满；从不移出
"""

import numpy as np

from src.core.content_dynamics import NO_ACTION, CacheAction, Capacity, LifetimeMultiset, SystemState
from src.policies.base_policy import CachePolicy
from src.utils.errors import ConfigError


def select_action_random(q: float, state: SystemState, rng: np.random.Generator,
                         b: Capacity) -> CacheAction:
    """
    随机缓存动作

    Args:
        q: 缓存概率
        state: 当前状态
        rng: 策略随机流
        b: 缓存容量

    Returns:
        CacheAction: 只含下载的动作
    """
    space = b - len(state.cache)
    if space <= 0 or not state.out_contents:
        return NO_ACTION
    order = rng.permutation(np.fromiter(state.out_contents, dtype=int))
    chosen = []
    for lifetime in order:
        if len(chosen) >= space:
            break
        if rng.random() < q:
            chosen.append(int(lifetime))
    if not chosen:
        return NO_ACTION
    return CacheAction(downloads=LifetimeMultiset.from_lifetimes(chosen))


class RandomPolicy(CachePolicy):
    """随机缓存策略"""

    def __init__(self, q: float):
        if not 0.0 <= q <= 1.0:
            raise ConfigError(f"缓存概率必须在 [0, 1]，当前 {q}", key="random.q")
        self.q = q

    @property
    def name(self) -> str:
        return "random"

    def proactive_action(self, state: SystemState, cost: float,
                         capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        return select_action_random(self.q, state, rng, capacity)
