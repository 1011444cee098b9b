#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
被动缓存策略模块
只在用户接入时下载内容
"""

import numpy as np

from src.core.content_dynamics import NO_ACTION, CacheAction, Capacity, SystemState, forced_action
from src.policies.base_policy import CachePolicy


def select_action_reactive(state: SystemState, accessed: bool) -> CacheAction:
    """接入时下载全部 O，否则不动作"""
    return forced_action(state) if accessed else NO_ACTION


class ReactivePolicy(CachePolicy):
    """被动缓存策略"""

    @property
    def name(self) -> str:
        return "reactive"

    def proactive_action(self, state: SystemState, cost: float,
                         capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        return select_action_reactive(state, False)
