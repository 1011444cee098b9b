#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
异常定义模块
"""


class ConfigError(ValueError):
    """配置错误：未知键、类型不符或参数约束不满足（CLI退出码2）"""

    def __init__(self, message: str, key: str = None):
        self.key = key
        if key:
            message = f"{key}: {message}"
        super().__init__(message)


class StateSpaceTooLargeError(ConfigError):
    """精确MDP的状态数超过配置上限"""


class InvariantViolation(RuntimeError):
    """运行时不变量被破坏，通常意味着策略或环境实现有缺陷（CLI退出码3）"""
