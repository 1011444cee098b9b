#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
实验配置模块
解析扁平的 key=value 实验文档（点分键，如 gen.k_max），校验后得到不可变的 ExperimentConfig
"""

import math
import os
from dataclasses import dataclass, field, replace
from io import StringIO
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

from dotenv import dotenv_values

from src.core.channel_model import ChannelParams, DiscreteChannel
from src.core.content_dynamics import GenParams
from src.core.fdm_optimizer import FdmConfig
from src.utils.config import Config
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)

SWEEP_VARS = ("cache_capacity", "k_max", "q", "p_a")
SCHEMES = ("liso", "reactive", "random", "lb_uc", "lb_nck", "exact")
PRESET_PREFIX = "preset:"


def _to_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"不是整数: {text}")
    return int(value)


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"不是布尔值: {text}")


def _to_capacity(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return _to_int(text)


def _to_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() == "auto" else float(text)


def _to_number(text: str):
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    return int(value) if value.is_integer() and "." not in text else value


def _to_number_list(text: str) -> Tuple:
    return tuple(_to_number(t) for t in text.split(",") if t.strip())


def _to_optional_int_list(text: str) -> Optional[Tuple[int, ...]]:
    if text.strip().lower() == "auto":
        return None
    return tuple(_to_int(t) for t in text.split(",") if t.strip())


def _to_optional_float_list(text: str) -> Optional[Tuple[float, ...]]:
    if text.strip().lower() == "auto":
        return None
    return tuple(float(t) for t in text.split(",") if t.strip())


def _to_schemes(text: str) -> Tuple[str, ...]:
    return tuple(t.strip().lower() for t in text.split(",") if t.strip())


# 键 -> (转换函数, 默认值文本)
FIELDS: Dict[str, Tuple[Callable[[str], Any], str]] = {
    "gen.m_max": (_to_int, "8"),
    "gen.k_max": (_to_int, "15"),
    "gen.d_max": (_to_int, "15"),
    "gen.p_a": (float, "0.25"),
    "gen.b": (_to_capacity, "30"),
    "gen.truncate_access": (_to_bool, "true"),
    "gen.lifetime_support": (_to_optional_int_list, "auto"),
    "chan.fc_ghz": (float, "2.5"),
    "chan.d_min": (float, "50"),
    "chan.d_max_m": (float, "250"),
    "chan.sigma_db": (float, "4"),
    "chan.bandwidth_hz": (float, "10e6"),
    "chan.noise_psd_dbm_hz": (float, "-174"),
    "chan.noise_figure_db": (float, "5"),
    "chan.g_tx_dbi": (float, "17"),
    "chan.g_rx_dbi": (float, "0"),
    "chan.spectral_eff": (float, "2"),
    "chan.shadow_clip_sigmas": (float, "3"),
    "chan.c_max_mw": (_to_optional_float, "auto"),
    "chan.n_samples": (_to_int, "100000"),
    "chan.levels_mw": (_to_optional_float_list, "auto"),
    "fdm.r": (float, "0.08"),
    "fdm.step": (float, "0.01"),
    "fdm.n_perturbations": (_to_int, "100"),
    "fdm.n_estimates": (_to_int, "5"),
    "fdm.horizon": (_to_int, "300"),
    "fdm.n_updates": (_to_int, "200"),
    "fdm.ridge": (float, "1e-6"),
    "fdm.base_seed": (_to_int, "0"),
    "sweep.var": (str, "cache_capacity"),
    "sweep.values": (_to_number_list, "0,10,20,30,40,50,60"),
    "schemes": (_to_schemes, "liso,reactive,lb_uc,lb_nck"),
    "random.q": (float, "0.5"),
    "bounds.lbuc_truncated": (_to_bool, "false"),
    "exact.channel_levels": (_to_int, "8"),
    "exact.max_states": (_to_int, str(Config.get_max_exact_states())),
    "exact.tol": (float, "1e-9"),
    "n_test": (_to_int, "100"),
    "test_horizon": (_to_int, "5000"),
    "base_seed": (_to_int, "0"),
    "workers": (_to_int, str(Config.get_workers())),
}


@dataclass(frozen=True)
class SweepSpec:
    """扫描变量与取值"""
    var: str = "cache_capacity"
    values: Tuple = (0, 10, 20, 30, 40, 50, 60)


@dataclass(frozen=True)
class ExactSpec:
    """精确求解参数"""
    channel_levels: int = 8
    max_states: int = 1_000_000
    tol: float = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """完整的实验配置"""
    gen: GenParams = field(default_factory=GenParams)
    chan: ChannelParams = field(default_factory=ChannelParams)
    fdm: FdmConfig = field(default_factory=FdmConfig)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    schemes: Tuple[str, ...] = ("liso", "reactive", "lb_uc", "lb_nck")
    random_q: float = 0.5
    lbuc_truncated: bool = False
    exact: ExactSpec = field(default_factory=ExactSpec)
    n_samples: int = 100000
    levels_mw: Optional[Tuple[float, ...]] = None
    n_test: int = 100
    test_horizon: int = 5000
    base_seed: int = 0
    workers: int = 1

    def discrete_channel(self) -> Optional[DiscreteChannel]:
        """显式给出代价等级时的离散信道（等概率），否则为 None"""
        return DiscreteChannel(self.levels_mw) if self.levels_mw else None

    def sweep_values(self) -> Tuple:
        return self.sweep.values if self.sweep.values else (self.current_sweep_value(),)

    def current_sweep_value(self):
        var = self.sweep.var
        if var == "cache_capacity":
            return self.gen.b
        if var == "k_max":
            return self.gen.k_max
        if var == "p_a":
            return self.gen.p_a
        return self.random_q

    def at_sweep_value(self, value) -> "ExperimentConfig":
        """
        把扫描变量设为给定值

        Raises:
            ConfigError: 取值对该变量不合法
        """
        var = self.sweep.var
        try:
            if var == "cache_capacity":
                return replace(self, gen=replace(self.gen, b=value))
            if var == "k_max":
                support = self.gen.lifetime_support
                derived = support == tuple(range(5, self.gen.k_max + 1, 5))
                return replace(self, gen=replace(self.gen, k_max=int(value),
                                                 lifetime_support=None if derived else support))
            if var == "p_a":
                return replace(self, gen=replace(self.gen, p_a=float(value)))
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"缓存概率必须在 [0, 1]，当前 {value}", key="random.q")
            return replace(self, random_q=float(value))
        except ConfigError as e:
            raise ConfigError(f"扫描值 {value} 不合法: {e}", key="sweep.values")


def _split_override(item: str) -> Tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"覆盖项必须是 key=value 形式: {item}")
    key, value = item.split("=", 1)
    return key.strip(), value.strip()


def parse_config(text: str, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """
    解析实验配置文档

    Args:
        text: key=value 文本（# 开头为注释），缺省键使用默认值
        overrides: 额外的 key=value 覆盖项（命令行 --set）

    Returns:
        ExperimentConfig: 校验后的配置

    Raises:
        ConfigError: 未知键、类型不符或约束不满足，消息中包含键名
    """
    raw: Dict[str, Optional[str]] = dict(dotenv_values(stream=StringIO(text or "")))
    for item in overrides:
        key, value = _split_override(item)
        raw[key] = value

    values: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in FIELDS:
            raise ConfigError("未知配置项", key=key)
        if value is None:
            raise ConfigError("缺少取值", key=key)
    for key, (convert, default) in FIELDS.items():
        text_value = raw.get(key, default)
        try:
            values[key] = convert(text_value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"类型不符: {text_value!r} ({e})", key=key)

    gen = GenParams(
        m_max=values["gen.m_max"], k_max=values["gen.k_max"], p_a=values["gen.p_a"],
        d_max=values["gen.d_max"], b=values["gen.b"],
        lifetime_support=values["gen.lifetime_support"],
        truncate_access=values["gen.truncate_access"],
    )
    chan = ChannelParams(
        fc_ghz=values["chan.fc_ghz"], d_min=values["chan.d_min"], d_max_m=values["chan.d_max_m"],
        sigma_db=values["chan.sigma_db"], bandwidth_hz=values["chan.bandwidth_hz"],
        noise_psd_dbm_hz=values["chan.noise_psd_dbm_hz"], noise_figure_db=values["chan.noise_figure_db"],
        g_tx_dbi=values["chan.g_tx_dbi"], g_rx_dbi=values["chan.g_rx_dbi"],
        spectral_eff=values["chan.spectral_eff"], shadow_clip_sigmas=values["chan.shadow_clip_sigmas"],
        c_max_mw=values["chan.c_max_mw"],
    )
    workers = values["workers"]
    fdm = FdmConfig(
        r=values["fdm.r"], step=values["fdm.step"], n_perturbations=values["fdm.n_perturbations"],
        n_estimates=values["fdm.n_estimates"], horizon=values["fdm.horizon"],
        n_updates=values["fdm.n_updates"], ridge=values["fdm.ridge"],
        base_seed=values["fdm.base_seed"], workers=max(1, workers),
    )

    var = values["sweep.var"].strip().lower()
    if var not in SWEEP_VARS:
        raise ConfigError(f"扫描变量必须是 {', '.join(SWEEP_VARS)} 之一，当前 {var}", key="sweep.var")
    schemes = values["schemes"]
    if not schemes:
        raise ConfigError("至少需要一个方案", key="schemes")
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown:
        raise ConfigError(f"不支持的方案: {', '.join(unknown)}", key="schemes")
    if len(set(schemes)) != len(schemes):
        raise ConfigError("方案不能重复", key="schemes")
    if not 0.0 <= values["random.q"] <= 1.0:
        raise ConfigError(f"必须在 [0, 1]，当前 {values['random.q']}", key="random.q")
    if values["chan.n_samples"] < 1:
        raise ConfigError("必须 >= 1", key="chan.n_samples")
    exact = ExactSpec(channel_levels=values["exact.channel_levels"],
                      max_states=values["exact.max_states"], tol=values["exact.tol"])
    if exact.channel_levels < 1:
        raise ConfigError("必须 >= 1", key="exact.channel_levels")
    if exact.max_states < 1:
        raise ConfigError("必须 >= 1", key="exact.max_states")
    if not exact.tol > 0:
        raise ConfigError("必须 > 0", key="exact.tol")
    if values["n_test"] < 2:
        raise ConfigError("至少为2才能给出置信区间", key="n_test")
    if values["test_horizon"] < 1:
        raise ConfigError("必须 >= 1", key="test_horizon")
    if workers < 1:
        raise ConfigError("必须 >= 1", key="workers")

    config = ExperimentConfig(
        gen=gen, chan=chan, fdm=fdm, sweep=SweepSpec(var=var, values=values["sweep.values"]),
        schemes=schemes, random_q=values["random.q"], lbuc_truncated=values["bounds.lbuc_truncated"],
        exact=exact, n_samples=values["chan.n_samples"], levels_mw=values["chan.levels_mw"],
        n_test=values["n_test"], test_horizon=values["test_horizon"],
        base_seed=values["base_seed"], workers=workers,
    )
    if config.levels_mw is not None:
        config.discrete_channel()
    for value in config.sweep.values:
        config.at_sweep_value(value)
    logger.debug(f"实验配置: 扫描 {var}={config.sweep.values}, 方案={schemes}")
    return config


def load_config(source: Optional[str] = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """
    加载实验配置

    Args:
        source: 配置文件路径、"preset:名称" 或 None（全部默认值）
        overrides: key=value 覆盖项

    Returns:
        ExperimentConfig: 校验后的配置

    Raises:
        ConfigError: 文件不存在、预设不存在或内容不合法
    """
    if source is None:
        text = ""
    elif source.startswith(PRESET_PREFIX):
        from src.utils.preset_manager import PresetManager
        text = PresetManager().get_preset(source[len(PRESET_PREFIX):])
    else:
        if not os.path.isfile(source):
            raise ConfigError(f"配置文件不存在: {source}", key="--config")
        with open(source, "r", encoding="utf-8") as f:
            text = f.read()
    return parse_config(text, overrides)
