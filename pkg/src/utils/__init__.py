#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
工具模块初始化
"""

# 导入日志工具
from src.utils.logger import get_logger, logger_instance
