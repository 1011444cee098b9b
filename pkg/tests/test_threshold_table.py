#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
阈值表与单调投影测试
"""

import numpy as np
import pytest

from src.core.threshold_table import (
    CSV_HEADER, ThresholdTable, initial_table, project_monotone, threshold_pairs,
)
from src.utils.csv_io import read_csv


def table_from_pairs(k_max, c_max, entries):
    values = np.zeros((k_max + 1, k_max + 1))
    for (l, big), v in entries.items():
        values[l, big] = v
    return ThresholdTable(k_max, c_max, values)


def test_parameter_count():
    assert len(threshold_pairs(15)) == 120
    assert ThresholdTable.constant(15, 1.0, 0.5).n_params == 120
    assert threshold_pairs(2) == [(0, 1), (0, 2), (1, 2)]


def test_vector_round_trip():
    table = ThresholdTable.from_vector(2, 1.0, [0.1, 0.2, 0.15])
    assert table.get(0, 1) == 0.1
    assert table.get(0, 2) == 0.2
    assert table.get(1, 2) == 0.15
    assert list(table.as_vector()) == [0.1, 0.2, 0.15]


def test_projection_example():
    table = table_from_pairs(2, 1.0, {(0, 1): 0.5, (0, 2): 0.3, (1, 2): 0.4})
    assert not table.is_feasible()
    projected = project_monotone(table)
    assert projected.is_feasible()
    assert projected.get(0, 2) >= 0.5
    assert projected.get(1, 2) <= projected.get(0, 2)


def test_projection_keeps_feasible_tables():
    table = table_from_pairs(2, 1.0, {(0, 1): 0.2, (0, 2): 0.6, (1, 2): 0.4})
    assert table.is_feasible()
    assert project_monotone(table) == table


def test_projection_clamps_to_bounds():
    table = ThresholdTable.from_vector(2, 1.0, [-0.5, 3.0, 0.2])
    projected = project_monotone(table)
    vec = projected.as_vector()
    assert vec.min() >= 0.0
    assert vec.max() <= 1.0
    assert projected.is_feasible()


def test_projection_idempotent_on_random_tables():
    rng = np.random.default_rng(42)
    for _ in range(50):
        raw = ThresholdTable.from_vector(5, 2.0, rng.uniform(-1.0, 3.0, size=15))
        once = project_monotone(raw)
        assert once.is_feasible()
        assert project_monotone(once) == once


def test_all_zero_table_is_feasible():
    assert ThresholdTable.constant(15, 1.0, 0.0).is_feasible()


def test_initial_table_clipped():
    table = initial_table(5, 1.0, 4.0)
    assert table.is_feasible()
    assert np.all(table.as_vector() == 1.0)


def test_wrong_shape():
    with pytest.raises(ValueError):
        ThresholdTable(2, 1.0, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ThresholdTable.from_vector(2, 1.0, [0.1])


def test_csv_round_trip(tmp_path):
    path = str(tmp_path / "table.csv")
    table = project_monotone(ThresholdTable.from_vector(5, 2.0, np.linspace(0.0, 1.5, 15)))
    table.to_csv(path)
    rows = read_csv(path, CSV_HEADER)
    assert len(rows) == 15
    assert ThresholdTable.from_csv(path, 2.0) == table
