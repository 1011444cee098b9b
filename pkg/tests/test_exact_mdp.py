#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
精确MDP测试：状态枚举、转移核、相对值迭代、穷举校验与阈值结构
"""

import itertools
from collections import Counter

import numpy as np
import pytest

from src.core.bounds import reactive_rate_closed_form
from src.core.channel_model import DiscreteChannel
from src.core.content_dynamics import EMPTY, GenParams, LifetimeMultiset, generate_batch
from src.core.exact_mdp import (
    ExactLisoObjective, SolveResult, batch_distribution, build_mdp, check_threshold_structure,
    check_value_monotonicity, dump_solution_csv, enumerate_states, evaluate_liso, evaluate_policy,
    relative_value_iteration, solution_header, swap_pairs,
)
from src.core.experiment_runner import make_cell, train_liso
from src.core.fdm_optimizer import FdmConfig, train
from src.core.threshold_table import ThresholdTable, initial_table
from src.utils.csv_io import read_csv
from src.utils.errors import ConfigError, StateSpaceTooLargeError
from src.utils.experiment_config import load_config

# 最优策略：寿命1的内容不下载，寿命2的内容在代价 <= E[C] 时下载
TINY_RHO_STAR = 0.58125 / 1.75


def ms(*lifetimes):
    return LifetimeMultiset.from_lifetimes(lifetimes)


class TestEnumeration:

    def test_tiny_state_count(self, tiny_mdp):
        assert tiny_mdp.n_states == 8
        elapsed = Counter(e for _, _, e in tiny_mdp.states)
        assert elapsed == {0: 2, 1: 6}

    def test_batch_distribution_sums_to_one(self):
        gen = GenParams(m_max=3, k_max=3, lifetime_support=(1, 2, 3))
        dist = batch_distribution(gen)
        assert sum(p for _, p in dist) == pytest.approx(1.0)
        assert len({batch for batch, _ in dist}) == len(dist)

    def test_zero_capacity_never_caches(self):
        gen = GenParams(m_max=2, k_max=3, d_max=3, b=0, lifetime_support=(1, 2, 3))
        assert all(not cache for _, cache, _ in enumerate_states(gen))

    def test_more_contents_more_states(self):
        small = GenParams(m_max=1, k_max=2, d_max=2, b=1, lifetime_support=(1, 2))
        large = GenParams(m_max=2, k_max=2, d_max=2, b=1, lifetime_support=(1, 2))
        assert len(enumerate_states(large)) >= len(enumerate_states(small))

    def test_state_limit(self, tiny_gen):
        with pytest.raises(StateSpaceTooLargeError) as exc:
            enumerate_states(tiny_gen, max_states=3)
        assert "exact.max_states" in str(exc.value)

    def test_unbounded_capacity_rejected(self, tiny_channel):
        gen = GenParams(m_max=1, k_max=2, d_max=2, b=float("inf"), lifetime_support=(1, 2))
        with pytest.raises(ConfigError):
            build_mdp(gen, tiny_channel)

    def test_swap_pairs_order(self):
        assert swap_pairs(ms(5, 3), ms(2), 1) == [(2, 5)]
        assert swap_pairs(ms(5, 3, 1), ms(2), 2) == [(0, 5), (2, 3)]
        assert swap_pairs(ms(2), ms(4), 1) == []


class TestKernels:

    def test_rows_sum_to_one(self, tiny_mdp):
        acc, kernels = tiny_mdp.dense_kernels()
        assert np.allclose(acc.sum(axis=1), 1.0)
        for b, kernel in enumerate(kernels):
            rows = (tiny_mdp.hazard < 1.0) & (tiny_mdp.max_swaps >= b)
            assert np.allclose(kernel.sum(axis=1)[rows], 1.0)

    def test_access_lands_in_empty_cache(self, tiny_mdp):
        acc, _ = tiny_mdp.dense_kernels()
        for j in np.nonzero(acc.sum(axis=0))[0]:
            _, cache, e = tiny_mdp.states[j]
            assert not cache and e == 0

    def test_matches_empirical_transitions(self, tiny_mdp, tiny_gen):
        start = (ms(2), EMPTY, 0)
        i = tiny_mdp.index[start]
        acc, kernels = tiny_mdp.dense_kernels()
        h = tiny_mdp.hazard[i]
        row = h * acc[i] + (1.0 - h) * kernels[0][i]

        rng = np.random.default_rng(0)
        n = 20000
        counts = np.zeros(tiny_mdp.n_states)
        for _ in range(n):
            batch = generate_batch(rng, tiny_gen)
            if rng.random() < h:
                key = (batch, EMPTY, 0)
            else:
                key = (ms(2).decrement().union(batch), EMPTY, 1)
            counts[tiny_mdp.index[key]] += 1
        freq = counts / n
        se = np.sqrt(row * (1 - row) / n)
        assert np.all(np.abs(freq - row) <= 4 * se + 1e-12)


class TestSolver:

    def test_tiny_optimum(self, tiny_solution):
        assert tiny_solution.rho_star == pytest.approx(TINY_RHO_STAR, abs=1e-9)
        assert tiny_solution.residual < 1e-9
        assert tiny_solution.values[0] == 0.0

    def test_tiny_policy(self, tiny_mdp, tiny_solution):
        short = tiny_mdp.index[(ms(1), EMPTY, 0)]
        long = tiny_mdp.index[(ms(2), EMPTY, 0)]
        assert list(tiny_solution.policy[short]) == [0] * 8
        assert list(tiny_solution.policy[long]) == [1, 1, 1, 1, 0, 0, 0, 0]

    def test_single_state(self):
        gen = GenParams(m_max=1, k_max=1, d_max=1, b=0, lifetime_support=(1,))
        mdp = build_mdp(gen, DiscreteChannel([0.37]))
        assert mdp.n_states == 1
        result = relative_value_iteration(mdp)
        assert result.rho_star == pytest.approx(0.37)

    def test_zero_capacity_matches_reactive_closed_form(self):
        gen = GenParams(m_max=2, k_max=3, p_a=0.3, d_max=3, b=0, lifetime_support=(1, 2, 3))
        channel = DiscreteChannel([1.0, 2.0, 4.0], [0.5, 0.3, 0.2])
        result = relative_value_iteration(build_mdp(gen, channel), tol=1e-11)
        expected = reactive_rate_closed_form(gen, channel.mean)
        assert result.rho_star == pytest.approx(expected, abs=1e-8)

    def test_evaluate_greedy_policy(self, tiny_mdp, tiny_solution):
        assert evaluate_policy(tiny_mdp, tiny_solution.policy) == pytest.approx(tiny_solution.rho_star, abs=1e-9)

    def test_brute_force_agrees(self, tiny_mdp, tiny_solution):
        decision = np.nonzero(tiny_mdp.hazard < 1.0)[0]
        assert len(decision) == 2
        assert np.all(tiny_mdp.max_swaps[decision] == 1)
        best = np.inf
        counts = np.zeros((tiny_mdp.n_states, tiny_mdp.n_levels), dtype=int)
        for bits in itertools.product((0, 1), repeat=len(decision) * tiny_mdp.n_levels):
            counts[decision] = np.reshape(bits, (len(decision), tiny_mdp.n_levels))
            best = min(best, evaluate_policy(tiny_mdp, counts))
        assert best == pytest.approx(tiny_solution.rho_star, abs=1e-8)

    def test_invalid_policy(self, tiny_mdp):
        with pytest.raises(ValueError):
            evaluate_policy(tiny_mdp, np.zeros((3, 3), dtype=int))
        with pytest.raises(ValueError):
            evaluate_policy(tiny_mdp, np.full((tiny_mdp.n_states, tiny_mdp.n_levels), 2))


class TestStructure:

    def test_nested_thresholds(self, tiny_mdp, tiny_solution):
        report = check_threshold_structure(tiny_solution, tiny_mdp)
        assert report.ok
        assert report.checked_states == 2

    def test_detects_violation(self, tiny_mdp, tiny_solution):
        policy = np.array(tiny_solution.policy)
        long = tiny_mdp.index[(ms(2), EMPTY, 0)]
        policy[long] = [0, 1, 0, 0, 0, 0, 0, 0]
        broken = SolveResult(rho_star=tiny_solution.rho_star, values=tiny_solution.values,
                             policy=policy, iterations=0, residual=0.0)
        report = check_threshold_structure(broken, tiny_mdp)
        assert not report.ok
        assert report.violations[0][0] == long

    def test_single_level_is_vacuous(self, tiny_gen):
        mdp = build_mdp(tiny_gen, DiscreteChannel([0.5]))
        report = check_threshold_structure(relative_value_iteration(mdp), mdp)
        assert report.ok

    def test_value_monotonicity(self, tiny_mdp, tiny_solution):
        assert check_value_monotonicity(tiny_solution, tiny_mdp) == []


class TestLisoOnExactModel:

    def test_optimal_table_reaches_optimum(self, tiny_mdp):
        table = ThresholdTable.from_vector(2, 0.8, [0.0, 0.45, 0.45])
        assert evaluate_liso(tiny_mdp, table) == pytest.approx(TINY_RHO_STAR, abs=1e-9)

    def test_fdm_approaches_optimum(self, tiny_mdp, tiny_channel):
        cfg = FdmConfig(r=0.15, step=0.5, n_perturbations=40, n_estimates=1, n_updates=30)
        init = initial_table(2, tiny_channel.c_max, tiny_channel.median())
        result = train(init, cfg, objective=ExactLisoObjective(tiny_mdp))
        assert evaluate_liso(tiny_mdp, result.table) <= 1.05 * TINY_RHO_STAR

    def test_fdm_on_rollouts_approaches_optimum(self, tiny_mdp):
        config = load_config("preset:tiny")
        cell = make_cell(config, config.sweep_values()[0])
        table = train_liso(cell).table
        assert evaluate_liso(tiny_mdp, table) <= 1.05 * TINY_RHO_STAR


def test_dump_solution(tmp_path, tiny_mdp, tiny_solution):
    path = str(tmp_path / "solution.csv")
    dump_solution_csv(path, tiny_mdp, tiny_solution)
    rows = read_csv(path, solution_header(tiny_mdp))
    assert len(rows) == tiny_mdp.n_states
