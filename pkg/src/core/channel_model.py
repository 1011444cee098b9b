#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
信道模型模块
3GPP UMi NLOS 路径损耗 + 截断对数正态阴影，换算为每时隙的下载能耗 C_t（mW），
并提供代价分布的期望工具（E[C]、E[min(C, x)]）供下界动态规划使用
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import stats

from src.utils.errors import ConfigError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)


@dataclass(frozen=True)
class ChannelParams:
    """信道与代价参数（单位见字段注释）"""
    fc_ghz: float = 2.5               # 中心频率 GHz
    d_min: float = 50.0               # 距离下限 m
    d_max_m: float = 250.0            # 距离上限 m
    sigma_db: float = 4.0             # 阴影标准差 dB
    bandwidth_hz: float = 10e6        # 带宽 W
    noise_psd_dbm_hz: float = -174.0  # kT
    noise_figure_db: float = 5.0      # NF
    g_tx_dbi: float = 17.0
    g_rx_dbi: float = 0.0
    spectral_eff: float = 2.0         # R/W bps/Hz
    shadow_clip_sigmas: float = 3.0   # 阴影截断倍数
    c_max_mw: Optional[float] = None  # None 表示取 d_max_m 处 +clip·σ 的代价

    def __post_init__(self):
        if not 0 < self.d_min < self.d_max_m:
            raise ConfigError(f"需要 0 < d_min < d_max_m，当前 {self.d_min}, {self.d_max_m}", key="chan.d_min")
        if self.fc_ghz <= 0:
            raise ConfigError("必须 > 0", key="chan.fc_ghz")
        if self.sigma_db < 0:
            raise ConfigError("必须 >= 0", key="chan.sigma_db")
        if self.bandwidth_hz <= 0:
            raise ConfigError("必须 > 0", key="chan.bandwidth_hz")
        if self.spectral_eff <= 0:
            raise ConfigError("必须 > 0", key="chan.spectral_eff")
        if self.shadow_clip_sigmas <= 0:
            raise ConfigError("必须 > 0", key="chan.shadow_clip_sigmas")
        if self.c_max_mw is not None and self.c_max_mw <= 0:
            raise ConfigError("必须 > 0", key="chan.c_max_mw")

    @property
    def c_max(self) -> float:
        """代价上限 C_max（mW）"""
        if self.c_max_mw is not None:
            return self.c_max_mw
        return deterministic_cost_mw(self, self.d_max_m, self.shadow_clip_sigmas * self.sigma_db)

    def sample_costs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_costs(rng, self, size)


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def path_loss_db(d, fc: float):
    """
    UMi NLOS 路径损耗（不含阴影）

    Args:
        d: 距离（米），标量或数组
        fc: 中心频率（GHz）

    Returns:
        路径损耗 dB：36.7·log10(d) + 22.7 + 26·log10(fc)

    Raises:
        ValueError: 距离或频率非正
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0) or fc <= 0:
        raise ValueError(f"距离和频率必须为正: d={d}, fc={fc}")
    pl = 36.7 * np.log10(d_arr) + 22.7 + 26.0 * math.log10(fc)
    return float(pl) if pl.ndim == 0 else pl


def noise_power_dbm(params: ChannelParams) -> float:
    """噪声功率 P_noise = kT + 10·log10(W) + NF（dBm）"""
    return params.noise_psd_dbm_hz + 10.0 * math.log10(params.bandwidth_hz) + params.noise_figure_db


def required_signal_dbm(params: ChannelParams) -> float:
    """达到给定频谱效率所需的接收功率：SNR = 2^(R/W) - 1"""
    snr = 2.0 ** params.spectral_eff - 1.0
    return noise_power_dbm(params) + 10.0 * math.log10(snr)


def deterministic_cost_mw(params: ChannelParams, d, shadow_db=0.0):
    """
    给定距离与阴影时的发射功率（未截断到 C_max）

    C = P_signal - G_TX - G_RX + PL(d) + X（dBm），再换算为 mW
    """
    dbm = (required_signal_dbm(params) - params.g_tx_dbi - params.g_rx_dbi
           + path_loss_db(d, params.fc_ghz) + np.asarray(shadow_db, dtype=float))
    mw = dbm_to_mw(dbm)
    return float(mw) if mw.ndim == 0 else mw


def sample_costs(rng: np.random.Generator, params: ChannelParams, size: int) -> np.ndarray:
    """
    批量抽取每时隙代价

    d ~ U(d_min, d_max_m)，X ~ N(0, σ²) 截断到 ±clip·σ，结果截断到 C_max

    Args:
        rng: 信道随机流
        params: 信道参数
        size: 样本数

    Returns:
        np.ndarray: 代价（mW），均在 (0, C_max]
    """
    d = rng.uniform(params.d_min, params.d_max_m, size=size)
    if params.sigma_db > 0:
        clip = params.shadow_clip_sigmas
        shadow = stats.truncnorm.rvs(-clip, clip, loc=0.0, scale=params.sigma_db,
                                     size=size, random_state=rng)
    else:
        shadow = np.zeros(size)
    return np.minimum(params.c_max, deterministic_cost_mw(params, d, shadow))


def sample_cost(rng: np.random.Generator, params: ChannelParams) -> float:
    """抽取单个时隙的代价 C_t（mW）"""
    return float(sample_costs(rng, params, 1)[0])


class CostDistribution:
    """代价的经验分布（升序样本）"""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float))
        self._prefix = np.concatenate(([0.0], np.cumsum(self.samples)))

    def __len__(self) -> int:
        return int(self.samples.size)

    def _require_samples(self):
        if self.samples.size == 0:
            raise ValueError("代价分布为空")

    @property
    def mean(self) -> float:
        self._require_samples()
        return float(self._prefix[-1] / self.samples.size)

    @property
    def c_max(self) -> float:
        self._require_samples()
        return float(self.samples[-1])

    def median(self) -> float:
        self._require_samples()
        return float(np.median(self.samples))

    def expected_min(self, x: float) -> float:
        """(1/n)·Σ min(sample_i, x)，利用排序前缀和 O(log n)"""
        self._require_samples()
        if x < 0:
            raise ValueError(f"x 不能为负: {x}")
        n = self.samples.size
        idx = int(np.searchsorted(self.samples, x, side="right"))
        return float((self._prefix[idx] + x * (n - idx)) / n)


class DiscreteChannel:
    """有限代价等级的信道（精确MDP使用），也可直接用于仿真"""

    def __init__(self, levels, probs=None):
        levels = np.asarray(levels, dtype=float)
        if levels.size == 0:
            raise ConfigError("代价等级不能为空", key="exact.channel_levels")
        probs = np.full(levels.size, 1.0 / levels.size) if probs is None else np.asarray(probs, dtype=float)
        if levels.shape != probs.shape:
            raise ConfigError("代价等级与概率的长度必须一致", key="exact.channel_levels")
        if np.any(levels <= 0) or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ConfigError("代价等级必须为正、概率之和必须为1", key="exact.channel_levels")
        order = np.argsort(levels)
        self.levels = levels[order]
        self.probs = probs[order]

    @property
    def mean(self) -> float:
        return float(np.dot(self.levels, self.probs))

    @property
    def c_max(self) -> float:
        return float(self.levels[-1])

    def median(self) -> float:
        cdf = np.cumsum(self.probs)
        return float(self.levels[int(np.searchsorted(cdf, 0.5 - 1e-12))])

    def expected_min(self, x: float) -> float:
        return float(np.dot(np.minimum(self.levels, x), self.probs))

    def sample_costs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.levels, size=size, p=self.probs)


CostModel = Union[CostDistribution, DiscreteChannel]


def cost_distribution(params: ChannelParams, n: int, rng: np.random.Generator) -> CostDistribution:
    """抽取 n 个代价样本构成经验分布"""
    dist = CostDistribution(sample_costs(rng, params, n))
    logger.debug(f"代价分布: n={n}, 均值={dist.mean:.4f} mW, 中位数={dist.median():.4f} mW")
    return dist


def expected_min_cost(x: float, dist: CostModel) -> float:
    """E[min(C, x)]"""
    return dist.expected_min(x)


def expected_cost(dist: CostModel) -> float:
    """E[C]"""
    return dist.mean


def discretize(dist: CostDistribution, n_levels: int) -> DiscreteChannel:
    """
    等概率分位数离散化

    Args:
        dist: 经验代价分布
        n_levels: 等级数

    Returns:
        DiscreteChannel: 每个等级取其分位区间的条件均值
    """
    if n_levels < 1 or n_levels > len(dist):
        raise ConfigError(f"等级数必须在 1..{len(dist)}", key="exact.channel_levels")
    chunks = np.array_split(dist.samples, n_levels)
    levels = [float(np.mean(c)) for c in chunks]
    probs = [c.size / len(dist) for c in chunks]
    return DiscreteChannel(levels, probs)
