#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
基础策略模块
定义缓存管理策略的基类接口
"""

from abc import ABC, abstractmethod

import numpy as np

from src.core.content_dynamics import CacheAction, Capacity, SystemState, forced_action


class CachePolicy(ABC):
    """缓存管理策略基类"""

    @property
    @abstractmethod
    def name(self) -> str:
        """
        获取策略名称

        Returns:
            str: 策略名称
        """
        pass

    def select_action(self, state: SystemState, cost: float, accessed: bool,
                      capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        """
        选择本时隙动作；用户接入时所有策略都执行强制动作

        Args:
            state: 当前状态（O 已含本时隙新内容）
            cost: 本时隙信道代价 C_t
            accessed: 本时隙是否接入
            capacity: 缓存容量 B
            rng: 策略随机流

        Returns:
            CacheAction: 缓存动作
        """
        if accessed:
            return forced_action(state)
        return self.proactive_action(state, cost, capacity, rng)

    @abstractmethod
    def proactive_action(self, state: SystemState, cost: float,
                         capacity: Capacity, rng: np.random.Generator) -> CacheAction:
        """
        用户未接入时的主动缓存动作

        Args:
            state: 当前状态
            cost: 本时隙信道代价
            capacity: 缓存容量
            rng: 策略随机流

        Returns:
            CacheAction: 缓存动作
        """
        pass
