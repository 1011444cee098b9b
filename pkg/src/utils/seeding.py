#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
随机流派生模块
由 (基础种子, 场景, 扫描值, 轨迹序号, ...) 派生出稳定的整数种子，
再拆分为互相独立的 生成/信道/接入/策略 四条随机流
"""

import hashlib
from dataclasses import dataclass

import numpy as np


def derive_seed(*parts) -> int:
    """
    由任意可打印的部件派生64位种子，结果与执行顺序和进程无关

    Args:
        parts: 种子部件，例如 (base_seed, "liso", 30, 7)

    Returns:
        int: 非负64位整数种子
    """
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class TrajectoryStreams:
    """一条轨迹使用的独立随机流"""
    gen: np.random.Generator
    chan: np.random.Generator
    access: np.random.Generator
    policy: np.random.Generator


def trajectory_streams(seed: int, scheme: str = "") -> TrajectoryStreams:
    """
    为一条轨迹拆分随机流

    外生随机量（内容生成、信道代价、用户接入）各占一条流且只依赖 seed，
    因此不同策略共享同一外生样本；策略自身的随机性（随机缓存）另由 (seed, scheme) 派生。

    Args:
        seed: 轨迹种子
        scheme: 策略名称

    Returns:
        TrajectoryStreams: 四条独立随机流
    """
    children = np.random.SeedSequence(seed).spawn(3)
    gen, chan, access = (np.random.default_rng(c) for c in children)
    policy = np.random.default_rng(derive_seed(seed, scheme))
    return TrajectoryStreams(gen=gen, chan=chan, access=access, policy=policy)
