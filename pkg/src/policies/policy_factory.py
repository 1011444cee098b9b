#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
策略工厂模块
负责按名称创建缓存管理策略
"""

from typing import Optional

from src.core.threshold_table import ThresholdTable
from src.policies.base_policy import CachePolicy
from src.policies.lifetime_threshold_policy import LifetimeThresholdPolicy
from src.policies.liso_policy import LisoPolicy
from src.policies.random_policy import RandomPolicy
from src.policies.reactive_policy import ReactivePolicy
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)


class PolicyFactory:
    """策略工厂类，负责创建不同的缓存管理策略"""

    # 支持的策略类型
    POLICY_LISO = "liso"
    POLICY_REACTIVE = "reactive"
    POLICY_RANDOM = "random"
    POLICY_LIFETIME_THRESHOLD = "lifetime_threshold"

    @staticmethod
    def create(kind: str, table: Optional[ThresholdTable] = None, q: Optional[float] = None,
               thresholds=None) -> CachePolicy:
        """
        创建缓存策略

        Args:
            kind: 策略类型
            table: LISO 阈值表（kind=liso 时必需）
            q: 缓存概率（kind=random 时必需）
            thresholds: 按生命周期的阈值（kind=lifetime_threshold 时必需）

        Returns:
            CachePolicy: 策略实例

        Raises:
            ConfigError: 策略类型不支持或缺少参数
        """
        kind = kind.lower()
        logger.debug(f"创建缓存策略: {kind}")
        if kind == PolicyFactory.POLICY_LISO:
            if table is None:
                raise ConfigError("LISO策略需要阈值表", key="schemes")
            return LisoPolicy(table)
        elif kind == PolicyFactory.POLICY_REACTIVE:
            return ReactivePolicy()
        elif kind == PolicyFactory.POLICY_RANDOM:
            if q is None:
                raise ConfigError("随机缓存策略需要缓存概率", key="random.q")
            return RandomPolicy(q)
        elif kind == PolicyFactory.POLICY_LIFETIME_THRESHOLD:
            if thresholds is None:
                raise ConfigError("生命周期阈值策略需要阈值向量", key="schemes")
            return LifetimeThresholdPolicy(thresholds)
        else:
            raise ConfigError(f"不支持的策略类型: {kind}", key="schemes")

