#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
主动缓存能耗工具主模块初始化
"""

# 导入日志工具
from src.utils.config import Config
from src.utils.logger import logger_instance

# 日志级别由 PCACHE_LOG_LEVEL 控制，默认WARNING
logger_instance.set_level(Config.get_log_level())
