#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
下界测试：LB-UC 与 LB-NCK 的动态规划、仿真校验以及被动缓存闭式代价
"""

import math

import numpy as np
import pytest

from src.core import bounds
from src.core.channel_model import DiscreteChannel
from src.core.content_dynamics import GenParams
from src.core.simulator import Environment, evaluate
from src.policies.reactive_policy import ReactivePolicy
from src.utils.csv_io import read_csv
from src.utils.errors import ConfigError

CHANNEL = DiscreteChannel([1.0, 2.0, 3.0])


class TestLbucTable:

    def test_base_cases(self):
        table = bounds.lbuc_table(0.25, CHANNEL, 15)
        assert table.w[0] == 0.0
        assert table.w[1] == 0.25 * CHANNEL.mean
        assert table.w[2] == pytest.approx(0.5 + 0.75 * 0.5)

    def test_monotone_and_bounded(self):
        w = bounds.lbuc_table(0.1, CHANNEL, 15).w
        assert np.all(np.diff(w) >= 0)
        assert np.all(w <= CHANNEL.mean + 1e-12)

    def test_certain_access(self):
        table = bounds.lbuc_table(1.0, CHANNEL, 15)
        assert np.allclose(table.w[1:], CHANNEL.mean)
        gen = GenParams(p_a=1.0)
        assert bounds.lbuc_rate(gen, table) == pytest.approx(4.5 * CHANNEL.mean)

    def test_single_lifetime_rate(self):
        gen = GenParams(m_max=1, k_max=5, lifetime_support=(5,))
        table = bounds.lbuc_table(gen.p_a, CHANNEL, 5)
        assert bounds.lbuc_rate(gen, table) == pytest.approx(table.w[5])

    def test_default_rate(self):
        gen = GenParams()
        table = bounds.lbuc_table(gen.p_a, CHANNEL, 15)
        expected = 4.5 * np.mean([table.w[5], table.w[10], table.w[15]])
        assert bounds.lbuc_rate(gen, table) == pytest.approx(expected)

    def test_k_max_mismatch(self):
        table = bounds.lbuc_table(0.25, CHANNEL, 10)
        with pytest.raises(ConfigError):
            bounds.lbuc_rate(GenParams(k_max=15), table)

    def test_thresholds_shift(self):
        table = bounds.lbuc_table(0.25, CHANNEL, 5)
        assert list(table.thresholds()[1:]) == list(table.w[:-1])

    def test_truncated_never_exceeds_mean(self):
        table = bounds.lbuc_table_truncated(0.25, 4, CHANNEL, 10)
        assert table.w.shape == (11, 4)
        assert np.all(table.w <= CHANNEL.mean + 1e-12)
        assert np.allclose(table.w[1:, 3], CHANNEL.mean)
        assert table.elapsed_weights.sum() == pytest.approx(1.0)
        gen = GenParams(k_max=10, d_max=4)
        assert bounds.lbuc_rate(gen, table) >= bounds.lbuc_rate(gen, bounds.lbuc_table(0.25, CHANNEL, 10))

    def test_csv(self, tmp_path):
        path = str(tmp_path / "lbuc.csv")
        bounds.lbuc_table(0.25, CHANNEL, 5).to_csv(path)
        rows = read_csv(path, bounds.LBUC_HEADER)
        assert [int(r["k"]) for r in rows] == list(range(6))

    def test_matches_direct_simulation(self):
        gen = GenParams(p_a=0.25, truncate_access=False, b=math.inf)
        table = bounds.lbuc_table(gen.p_a, CHANNEL, gen.k_max)
        rate = bounds.lbuc_rate(gen, table)
        est = bounds.lbuc_simulate(gen, CHANNEL, table, n_traj=8, horizon=6000, base_seed=3)
        assert abs(est.mean - rate) <= 0.01 * rate + est.ci95


class TestLbnck:

    def test_table(self):
        table = bounds.lbnck_table(CHANNEL, 15)
        assert table.v[0] == CHANNEL.mean
        assert table.v[1] == pytest.approx(5.0 / 3.0)
        assert np.all(np.diff(table.v) <= 1e-12)
        assert table.threshold(0) == math.inf
        assert table.threshold(2) == table.v[1]
        assert table.d_max == 15

    def test_invalid_d_max(self):
        with pytest.raises(ConfigError):
            bounds.lbnck_table(CHANNEL, 0)

    def test_time_to_access(self):
        accesses = np.array([False, True, False, False, True])
        assert list(bounds.time_to_access(accesses, 5)) == [1, 0, 2, 1, 0]

    def test_time_to_access_without_future_access(self):
        accesses = np.array([True, False, False])
        assert list(bounds.time_to_access(accesses, 3)) == [0, 4, 4]

    def test_zero_capacity_equals_reactive(self):
        gen = GenParams(b=0)
        table = bounds.lbnck_table(CHANNEL, gen.d_max)
        lbnck = bounds.lbnck_simulate(gen, CHANNEL, table, n_traj=5, horizon=400, base_seed=1)
        reactive = evaluate(ReactivePolicy(), Environment(gen, CHANNEL), 5, 400, base_seed=1)
        assert lbnck.mean == pytest.approx(reactive.mean, rel=1e-12)

    def test_certain_access_equals_reactive(self):
        gen = GenParams(p_a=1.0)
        table = bounds.lbnck_table(CHANNEL, gen.d_max)
        lbnck = bounds.lbnck_simulate(gen, CHANNEL, table, n_traj=4, horizon=300, base_seed=2)
        reactive = evaluate(ReactivePolicy(), Environment(gen, CHANNEL), 4, 300, base_seed=2)
        assert lbnck.mean == pytest.approx(reactive.mean, rel=1e-12)

    def test_below_reactive(self):
        gen = GenParams(b=30)
        table = bounds.lbnck_table(CHANNEL, gen.d_max)
        lbnck = bounds.lbnck_simulate(gen, CHANNEL, table, n_traj=6, horizon=500, base_seed=5)
        reactive = evaluate(ReactivePolicy(), Environment(gen, CHANNEL), 6, 500, base_seed=5)
        assert lbnck.mean < reactive.mean


class TestReactiveClosedForm:

    def test_certain_access(self):
        gen = GenParams(p_a=1.0)
        assert bounds.reactive_rate_closed_form(gen, 2.0) == pytest.approx(4.5 * 2.0)

    def test_geometric(self):
        gen = GenParams(m_max=1, k_max=5, lifetime_support=(5,), p_a=0.2, truncate_access=False)
        expected = 2.0 * (1 - 0.8 ** 5)
        assert bounds.reactive_rate_closed_form(gen, 2.0) == pytest.approx(expected)

    def test_tiny_instance(self, tiny_gen, tiny_channel):
        rate = bounds.reactive_rate_closed_form(tiny_gen, tiny_channel.mean)
        assert rate == pytest.approx(0.45 * 1.375 / 1.75)

    def test_matches_simulation(self, tiny_gen, tiny_channel):
        rate = bounds.reactive_rate_closed_form(tiny_gen, tiny_channel.mean)
        est = evaluate(ReactivePolicy(), Environment(tiny_gen, tiny_channel), 100, 2000, base_seed=0)
        assert abs(est.mean - rate) <= 2 * est.ci95
