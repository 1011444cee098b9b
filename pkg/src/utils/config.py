#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
配置管理模块
处理运行环境级别的配置（日志、并行度、精确求解规模上限等）
实验参数本身由 experiment_config 模块解析
"""

import os
from dotenv import load_dotenv

# 加载环境变量
load_dotenv()


class Config:
    """配置管理类"""

    @staticmethod
    def get_log_dir() -> str:
        """
        获取日志目录

        Returns:
            str: 日志目录路径
        """
        return os.getenv("PCACHE_LOG_DIR") or os.path.join(os.path.expanduser("~"), ".proactive_cache", "logs")

    @staticmethod
    def get_log_level() -> str:
        """
        获取日志级别

        Returns:
            str: 日志级别名称
        """
        if Config.is_debug_mode():
            return "DEBUG"
        return os.getenv("PCACHE_LOG_LEVEL") or "WARNING"

    @staticmethod
    def get_max_exact_states() -> int:
        """
        获取精确MDP求解允许的最大状态数

        Returns:
            int: 状态数上限
        """
        return int(os.getenv("PCACHE_MAX_EXACT_STATES", "1000000"))

    @staticmethod
    def get_workers() -> int:
        """
        获取rollout并行进程数

        Returns:
            int: 进程数，1表示串行
        """
        return max(1, int(os.getenv("PCACHE_WORKERS", "1")))

    @staticmethod
    def is_debug_mode() -> bool:
        """
        检查是否为调试模式

        Returns:
            bool: 是否为调试模式
        """
        return os.getenv("DEBUG", "False").lower() in ("true", "1", "yes")

    @staticmethod
    def get_project_root() -> str:
        """
        获取项目根目录

        Returns:
            str: 项目根目录路径
        """
        return os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

    @staticmethod
    def get_presets_path() -> str:
        """
        获取实验预设目录路径

        Returns:
            str: 预设目录路径
        """
        return os.getenv("PCACHE_PRESETS_DIR") or os.path.join(Config.get_project_root(), "config", "presets")
