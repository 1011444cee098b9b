#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
内容动态模块
时隙化的随机环境：内容生成、生命周期、用户接入、缓存动作的作用与时隙推进
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Optional, Tuple, Union

import numpy as np

from src.utils.errors import ConfigError, InvariantViolation
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)

Capacity = Union[int, float]


class LifetimeMultiset:
    """
    剩余生命周期多重集

    内容只由剩余生命周期描述，内部保存 生命周期 -> 重数 的计数元组
    （下标 k-1 对应生命周期 k，尾部的零被裁掉以保证表示唯一）。
    对象不可变，可作为字典键使用。
    """

    __slots__ = ("_counts", "_size")

    def __init__(self, counts: Iterable[int] = ()):
        values = [int(c) for c in counts]
        if any(c < 0 for c in values):
            raise ValueError(f"重数不能为负: {values}")
        while values and values[-1] == 0:
            values.pop()
        self._counts: Tuple[int, ...] = tuple(values)
        self._size = sum(values)

    @classmethod
    def from_lifetimes(cls, lifetimes: Iterable[int]) -> "LifetimeMultiset":
        """
        由生命周期列表构造

        Args:
            lifetimes: 生命周期（正整数）序列，可重复

        Returns:
            LifetimeMultiset: 多重集
        """
        lifetimes = [int(k) for k in lifetimes]
        if any(k < 1 for k in lifetimes):
            raise ValueError(f"生命周期必须为正整数: {lifetimes}")
        counts = [0] * (max(lifetimes) if lifetimes else 0)
        for k in lifetimes:
            counts[k - 1] += 1
        return cls(counts)

    @classmethod
    def from_counts(cls, mapping: Dict[int, int]) -> "LifetimeMultiset":
        """由 {生命周期: 重数} 构造"""
        if not mapping:
            return cls()
        if min(mapping) < 1:
            raise ValueError(f"生命周期必须为正整数: {mapping}")
        counts = [0] * max(mapping)
        for k, n in mapping.items():
            counts[k - 1] = n
        return cls(counts)

    def count(self, lifetime: int) -> int:
        if 1 <= lifetime <= len(self._counts):
            return self._counts[lifetime - 1]
        return 0

    def as_dict(self) -> Dict[int, int]:
        return {k + 1: n for k, n in enumerate(self._counts) if n > 0}

    def max(self) -> int:
        """最大生命周期，空集返回0"""
        return len(self._counts)

    def min(self) -> int:
        """最小生命周期，空集返回0"""
        for k, n in enumerate(self._counts):
            if n > 0:
                return k + 1
        return 0

    def union(self, other: "LifetimeMultiset") -> "LifetimeMultiset":
        n = max(len(self._counts), len(other._counts))
        a = self._counts + (0,) * (n - len(self._counts))
        b = other._counts + (0,) * (n - len(other._counts))
        return LifetimeMultiset(x + y for x, y in zip(a, b))

    def issubset(self, other: "LifetimeMultiset") -> bool:
        return all(n <= other.count(k + 1) for k, n in enumerate(self._counts))

    def difference(self, other: "LifetimeMultiset") -> "LifetimeMultiset":
        """
        多重集差

        Raises:
            ValueError: other 不是 self 的子多重集
        """
        if not other.issubset(self):
            raise ValueError(f"{other!r} 不是 {self!r} 的子多重集")
        return LifetimeMultiset(n - other.count(k + 1) for k, n in enumerate(self._counts))

    def add(self, lifetime: int, n: int = 1) -> "LifetimeMultiset":
        return self.union(LifetimeMultiset.from_counts({lifetime: n}))

    def remove(self, lifetime: int, n: int = 1) -> "LifetimeMultiset":
        return self.difference(LifetimeMultiset.from_counts({lifetime: n}))

    def decrement(self) -> "LifetimeMultiset":
        """所有生命周期减1，并移除变为0的元素"""
        return LifetimeMultiset(self._counts[1:])

    def descending(self) -> Iterator[int]:
        for k in range(len(self._counts), 0, -1):
            for _ in range(self._counts[k - 1]):
                yield k

    def __iter__(self) -> Iterator[int]:
        for k, n in enumerate(self._counts):
            for _ in range(n):
                yield k + 1

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def __add__(self, other: "LifetimeMultiset") -> "LifetimeMultiset":
        return self.union(other)

    def __sub__(self, other: "LifetimeMultiset") -> "LifetimeMultiset":
        return self.difference(other)

    def __eq__(self, other) -> bool:
        return isinstance(other, LifetimeMultiset) and self._counts == other._counts

    def __hash__(self) -> int:
        return hash(self._counts)

    def __repr__(self) -> str:
        return "{" + ",".join(str(k) for k in self.descending()) + "}"


EMPTY = LifetimeMultiset()


@dataclass(frozen=True)
class GenParams:
    """内容生成与用户接入参数"""
    m_max: int = 8
    k_max: int = 15
    p_a: float = 0.25
    d_max: int = 15
    b: Capacity = 30
    lifetime_support: Optional[Tuple[int, ...]] = None
    # False 时接入为纯几何过程，不在 d_max 处强制接入
    truncate_access: bool = True

    def __post_init__(self):
        if self.m_max < 1:
            raise ConfigError("必须 >= 1", key="gen.m_max")
        if self.lifetime_support is None:
            if self.k_max < 5 or self.k_max % 5 != 0:
                raise ConfigError(f"必须是不小于5的5的倍数，当前 {self.k_max}", key="gen.k_max")
            object.__setattr__(self, "lifetime_support", tuple(range(5, self.k_max + 1, 5)))
        else:
            support = tuple(sorted(int(k) for k in self.lifetime_support))
            if not support or support[0] < 1 or support[-1] > self.k_max:
                raise ConfigError(f"生命周期支撑集必须落在 1..{self.k_max}: {support}",
                                  key="gen.lifetime_support")
            object.__setattr__(self, "lifetime_support", support)
        if not 0.0 < self.p_a <= 1.0:
            raise ConfigError(f"必须满足 0 < p_a <= 1，当前 {self.p_a}", key="gen.p_a")
        if self.d_max < 1:
            raise ConfigError("必须 >= 1", key="gen.d_max")
        if not (self.b >= 0):
            raise ConfigError(f"缓存容量不能为负，当前 {self.b}", key="gen.b")
        if self.b != math.inf and self.b != int(self.b):
            raise ConfigError(f"缓存容量必须为整数或inf，当前 {self.b}", key="gen.b")

    @property
    def mean_batch_size(self) -> float:
        """E[M]，M 在 {1..M_max} 上均匀"""
        return (self.m_max + 1) / 2.0

    @property
    def mean_lifetime(self) -> float:
        """E[K]，K 在支撑集上均匀"""
        return float(np.mean(self.lifetime_support))


@dataclass(frozen=True)
class SystemState:
    """受控状态 (O, I, E) 与时隙编号"""
    out_contents: LifetimeMultiset = field(default_factory=LifetimeMultiset)
    cache: LifetimeMultiset = field(default_factory=LifetimeMultiset)
    elapsed: int = 0
    slot: int = 0


@dataclass(frozen=True)
class CacheAction:
    """缓存管理器的决策 (A1 下载, A2 移出)"""
    downloads: LifetimeMultiset = field(default_factory=LifetimeMultiset)
    evictions: LifetimeMultiset = field(default_factory=LifetimeMultiset)

    @property
    def n_downloads(self) -> int:
        return len(self.downloads)


NO_ACTION = CacheAction()


def generate_batch(rng: np.random.Generator, params: GenParams) -> LifetimeMultiset:
    """
    生成一个时隙的新内容

    Args:
        rng: 生成随机流
        params: 生成参数

    Returns:
        LifetimeMultiset: 新内容 N_t，|N_t| ~ U{1..M_max}，生命周期 ~ U(支撑集)
    """
    m = int(rng.integers(1, params.m_max + 1))
    lifetimes = rng.choice(np.asarray(params.lifetime_support), size=m)
    return LifetimeMultiset.from_lifetimes(lifetimes)


def sample_access(rng: np.random.Generator, params: GenParams, elapsed: int) -> bool:
    """
    抽取本时隙用户是否接入

    每次调用恰好消耗一个均匀随机数（强制接入时也消耗），
    使接入序列只依赖于随机流本身。

    Args:
        rng: 接入随机流
        params: 生成参数
        elapsed: 上次接入以来的时隙数 E（本时隙开始时）

    Returns:
        bool: 是否接入

    Raises:
        InvariantViolation: 截断模式下 elapsed 越界
    """
    u = rng.random()
    if params.truncate_access:
        if elapsed < 0 or elapsed >= params.d_max:
            raise InvariantViolation(f"elapsed={elapsed} 越界 (d_max={params.d_max})")
        if elapsed == params.d_max - 1:
            return True
    return bool(u < params.p_a)


def access_hazard(params: GenParams, elapsed: int) -> float:
    """给定 elapsed 时本时隙接入的概率"""
    if params.truncate_access and elapsed >= params.d_max - 1:
        return 1.0
    return params.p_a


def truncated_mean_interaccess(p_a: float, d_max: int) -> float:
    """
    截断几何分布的均值 E[D]

    P(D=k) = (1-p)^(k-1) p, k < D_max；P(D=D_max) = (1-p)^(D_max-1)
    """
    q = 1.0 - p_a
    mean = sum(k * q ** (k - 1) * p_a for k in range(1, d_max))
    return mean + d_max * q ** (d_max - 1)


def elapsed_distribution(params: GenParams) -> np.ndarray:
    """
    时隙开始时 elapsed 的平稳分布，正比于 P(D > e)

    仅对截断接入有意义（e 取 0..D_max-1）。
    """
    survival = np.ones(params.d_max)
    for e in range(1, params.d_max):
        survival[e] = survival[e - 1] * (1.0 - access_hazard(params, e - 1))
    return survival / survival.sum()


def forced_action(state: SystemState) -> CacheAction:
    """用户接入时的强制动作：下载全部 O，缓存内容全部交付"""
    return CacheAction(downloads=state.out_contents, evictions=state.cache)


def add_fresh(state: SystemState, fresh: LifetimeMultiset) -> SystemState:
    """把时隙开始时生成的新内容并入 O"""
    return SystemState(state.out_contents.union(fresh), state.cache, state.elapsed, state.slot)


def apply_action(state: SystemState, action: CacheAction, accessed: bool,
                 capacity: Capacity) -> SystemState:
    """
    作用缓存动作，得到时隙内的中间状态

    Args:
        state: 当前状态（O 已含本时隙新内容）
        action: 缓存动作
        accessed: 本时隙用户是否接入
        capacity: 缓存容量 B

    Returns:
        SystemState: 中间状态；接入时 O、I 均被清空

    Raises:
        InvariantViolation: 动作不合法（包含关系或容量）
    """
    if accessed:
        if action != forced_action(state):
            raise InvariantViolation(f"接入时隙必须执行强制动作，收到 {action}")
        return SystemState(EMPTY, EMPTY, state.elapsed, state.slot)

    if not action.downloads.issubset(state.out_contents):
        raise InvariantViolation(f"下载 {action.downloads!r} 不是 O={state.out_contents!r} 的子集")
    if not action.evictions.issubset(state.cache):
        raise InvariantViolation(f"移出 {action.evictions!r} 不是 I={state.cache!r} 的子集")
    new_cache = state.cache.difference(action.evictions).union(action.downloads)
    if len(new_cache) > capacity:
        raise InvariantViolation(f"缓存容量越界: |I'|={len(new_cache)} > B={capacity}")
    new_out = state.out_contents.difference(action.downloads).union(action.evictions)
    return SystemState(new_out, new_cache, state.elapsed, state.slot)


def advance_slot(state: SystemState, fresh: LifetimeMultiset, accessed: bool) -> SystemState:
    """
    时隙结束：生命周期减1并丢弃过期内容，并入下一时隙的新内容

    Args:
        state: 动作作用后的中间状态
        fresh: 下一时隙开始时生成的内容 N_{t+1}
        accessed: 本时隙是否接入

    Returns:
        SystemState: 下一时隙开始时的状态
    """
    return SystemState(
        out_contents=state.out_contents.decrement().union(fresh),
        cache=state.cache.decrement(),
        elapsed=0 if accessed else state.elapsed + 1,
        slot=state.slot + 1,
    )


def slot_cost(action: CacheAction, cost: float) -> float:
    """本时隙能耗 |A1|·C_t"""
    return action.n_downloads * cost
