#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
内容动态测试：多重集操作、生成与接入、动作作用与时隙推进
"""

import numpy as np
import pytest

from src.core.content_dynamics import (
    EMPTY, CacheAction, GenParams, LifetimeMultiset, SystemState, access_hazard, advance_slot,
    apply_action, elapsed_distribution, forced_action, generate_batch, sample_access,
    slot_cost, truncated_mean_interaccess,
)
from src.utils.errors import ConfigError, InvariantViolation


def ms(*lifetimes):
    return LifetimeMultiset.from_lifetimes(lifetimes)


class TestLifetimeMultiset:

    def test_counts_and_order(self):
        m = ms(3, 1, 3, 2)
        assert len(m) == 4
        assert m.count(3) == 2
        assert list(m) == [1, 2, 3, 3]
        assert list(m.descending()) == [3, 3, 2, 1]
        assert m.max() == 3 and m.min() == 1

    def test_empty_extremes_are_zero(self):
        assert EMPTY.max() == 0
        assert EMPTY.min() == 0
        assert not EMPTY

    def test_decrement_drops_expired(self):
        assert ms(3, 1, 1).decrement() == ms(2)

    def test_union_and_difference(self):
        a = ms(5, 3)
        b = ms(3, 2)
        assert a.union(b) == ms(5, 3, 3, 2)
        assert a.union(b).difference(b) == a
        assert b.issubset(a.union(b))
        assert not ms(4).issubset(a)

    def test_difference_requires_subset(self):
        with pytest.raises(ValueError):
            ms(1).difference(ms(2))

    def test_invalid_lifetime(self):
        with pytest.raises(ValueError):
            ms(0)

    def test_hashable_and_equal(self):
        assert hash(ms(2, 1)) == hash(ms(1, 2))
        assert len({ms(2, 1), ms(1, 2), ms(1)}) == 2

    def test_repr_descending(self):
        assert repr(ms(3, 5)) == "{5,3}"


class TestGenParams:

    def test_default_support(self):
        gen = GenParams()
        assert gen.lifetime_support == (5, 10, 15)
        assert gen.mean_batch_size == pytest.approx(4.5)
        assert gen.mean_lifetime == pytest.approx(10.0)

    def test_k_max_must_be_multiple_of_five(self):
        with pytest.raises(ConfigError) as exc:
            GenParams(k_max=12)
        assert "gen.k_max" in str(exc.value)

    def test_explicit_support(self):
        gen = GenParams(k_max=2, lifetime_support=(2, 1))
        assert gen.lifetime_support == (1, 2)

    def test_support_outside_range(self):
        with pytest.raises(ConfigError):
            GenParams(k_max=5, lifetime_support=(6,))

    @pytest.mark.parametrize("p_a", [0.0, -0.1, 1.5])
    def test_invalid_access_probability(self, p_a):
        with pytest.raises(ConfigError):
            GenParams(p_a=p_a)

    def test_fractional_capacity_rejected(self):
        with pytest.raises(ConfigError):
            GenParams(b=2.5)


class TestGeneration:

    def test_batch_within_bounds(self):
        gen = GenParams(m_max=4)
        rng = np.random.default_rng(1)
        for _ in range(200):
            batch = generate_batch(rng, gen)
            assert 1 <= len(batch) <= 4
            assert set(batch).issubset({5, 10, 15})

    def test_forced_access_at_d_max(self):
        gen = GenParams(p_a=1e-9, d_max=4)
        rng = np.random.default_rng(0)
        assert sample_access(rng, gen, 3)

    def test_access_consumes_one_draw(self):
        gen = GenParams(d_max=4)
        rng = np.random.default_rng(7)
        sample_access(rng, gen, 3)
        reference = np.random.default_rng(7)
        reference.random()
        assert rng.random() == reference.random()

    def test_elapsed_out_of_range(self):
        gen = GenParams(d_max=4)
        with pytest.raises(InvariantViolation):
            sample_access(np.random.default_rng(0), gen, 4)

    def test_untruncated_has_no_cap(self):
        gen = GenParams(p_a=0.2, d_max=2, truncate_access=False)
        assert access_hazard(gen, 10) == pytest.approx(0.2)
        sample_access(np.random.default_rng(0), gen, 50)

    def test_hazard(self):
        gen = GenParams(p_a=0.3, d_max=3)
        assert [access_hazard(gen, e) for e in range(3)] == [0.3, 0.3, 1.0]

    def test_truncated_mean(self):
        p, d = 0.25, 15
        assert truncated_mean_interaccess(p, d) == pytest.approx((1 - (1 - p) ** d) / p)
        assert truncated_mean_interaccess(1.0, 15) == pytest.approx(1.0)
        assert truncated_mean_interaccess(0.4, 1) == pytest.approx(1.0)

    def test_elapsed_distribution(self):
        gen = GenParams(p_a=0.25, d_max=4)
        pi = elapsed_distribution(gen)
        q = 0.75 ** np.arange(4)
        assert pi.sum() == pytest.approx(1.0)
        assert pi == pytest.approx(q / q.sum())


class TestTransitions:

    def test_forced_action_delivers_everything(self):
        state = SystemState(ms(5, 3), ms(2), elapsed=3)
        after = apply_action(state, forced_action(state), True, 1)
        assert not after.out_contents and not after.cache
        nxt = advance_slot(after, ms(4), accessed=True)
        assert nxt.out_contents == ms(4)
        assert nxt.elapsed == 0
        assert nxt.slot == 1

    def test_access_requires_forced_action(self):
        state = SystemState(ms(5), EMPTY)
        with pytest.raises(InvariantViolation):
            apply_action(state, CacheAction(), True, 1)

    def test_swap_moves_contents(self):
        state = SystemState(ms(5, 3), ms(2))
        after = apply_action(state, CacheAction(ms(5), ms(2)), False, 1)
        assert after.cache == ms(5)
        assert after.out_contents == ms(3, 2)
        nxt = advance_slot(after, ms(1), accessed=False)
        assert nxt.cache == ms(4)
        assert nxt.out_contents == ms(2, 1, 1)
        assert nxt.elapsed == 1

    def test_download_must_come_from_outside(self):
        state = SystemState(ms(3), EMPTY)
        with pytest.raises(InvariantViolation):
            apply_action(state, CacheAction(downloads=ms(4)), False, 2)

    def test_capacity_enforced(self):
        state = SystemState(ms(3, 2), ms(1))
        with pytest.raises(InvariantViolation):
            apply_action(state, CacheAction(downloads=ms(3)), False, 1)

    def test_slot_cost(self):
        assert slot_cost(CacheAction(downloads=ms(3, 2)), 0.5) == pytest.approx(1.0)
        assert slot_cost(CacheAction(), 9.0) == 0.0

    def test_three_slot_trajectory(self):
        # B=2；时隙0下载{5}，时隙1用{2,2}换出{4}，时隙2接入
        state = SystemState(ms(5, 3), EMPTY)
        script = [
            (CacheAction(downloads=ms(5)), False, ms(2), 0.5),
            (CacheAction(downloads=ms(2, 2), evictions=ms(4)), False, ms(5, 1), 0.25),
            (None, True, ms(4), 2.0),
        ]
        costs = []
        for action, accessed, fresh, cost in script:
            action = forced_action(state) if action is None else action
            middle = apply_action(state, action, accessed, 2)
            costs.append(slot_cost(action, cost))
            state = advance_slot(middle, fresh, accessed)
            if state.slot == 1:
                assert (state.out_contents, state.cache, state.elapsed) == (ms(2, 2), ms(4), 1)
            elif state.slot == 2:
                assert (state.out_contents, state.cache, state.elapsed) == (ms(5, 3, 1), ms(1, 1), 2)
        assert state == SystemState(ms(4), EMPTY, elapsed=0, slot=3)
        assert costs == pytest.approx([0.5, 0.5, 6.0])
