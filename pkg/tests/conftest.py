#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
测试公共配置：日志写到临时目录，提供极小实例等共享夹具
"""

import os
import sys
import tempfile

# 必须在导入 src 之前设置，日志单例在导入时创建
os.environ.setdefault("PCACHE_LOG_DIR", tempfile.mkdtemp(prefix="pcache_test_logs_"))
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from src.core.channel_model import DiscreteChannel
from src.core.content_dynamics import GenParams
from src.core.exact_mdp import build_mdp, relative_value_iteration
from src.core.simulator import Environment

TINY_LEVELS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]


@pytest.fixture(scope="session")
def tiny_gen():
    """生命周期 {1,2}，每时隙一个新内容，B=1，D_max=2，p_a=0.25"""
    return GenParams(m_max=1, k_max=2, p_a=0.25, d_max=2, b=1, lifetime_support=(1, 2))


@pytest.fixture(scope="session")
def tiny_channel():
    return DiscreteChannel(TINY_LEVELS)


@pytest.fixture(scope="session")
def tiny_mdp(tiny_gen, tiny_channel):
    return build_mdp(tiny_gen, tiny_channel)


@pytest.fixture(scope="session")
def tiny_solution(tiny_mdp):
    return relative_value_iteration(tiny_mdp, tol=1e-11)


@pytest.fixture
def small_env():
    """用于快速仿真的小环境：离散信道 {1,2,3}"""
    gen = GenParams(m_max=3, k_max=10, p_a=0.3, d_max=6, b=4)
    return Environment(gen, DiscreteChannel([1.0, 2.0, 3.0]))
