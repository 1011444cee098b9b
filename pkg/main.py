#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
主动缓存能耗工具主程序入口
"""

import os
import sys

# 确保src目录在Python路径中
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
