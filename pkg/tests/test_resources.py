import csv
import io

import pytest

from mbqaoa.resources import (
    COSTS,
    METHODS,
    SWEEP_HEADER,
    closed_form_size,
    asymptotic_ratio,
    complete_edges,
    crossover,
    gate_counts,
    gate_counts_by_summation,
    native_cluster_size,
    optimized_gate_counts,
    ratio,
    sweep,
    sweep_csv,
    translated_cluster_size,
)


class TestNative:
    def test_k4(self):
        assert native_cluster_size(4, 6, 4) == 42

    def test_no_edges(self):
        assert native_cluster_size(7, 0, 2) == 21

    def test_k100(self):
        assert native_cluster_size(100, 4950, 2) == 5250

    @pytest.mark.parametrize("K", [1, 3, 6])
    def test_rejects_non_power(self, K):
        with pytest.raises(ValueError):
            native_cluster_size(4, 6, K)


class TestGateCounts:
    def test_examples(self):
        assert gate_counts(4, 6, 4).cnot == 60
        assert gate_counts(4, 1, 2).cnot == 2
        assert gate_counts(4, 6, 4).rx == 8

    @pytest.mark.parametrize("m", range(1, 11))
    def test_closed_form_matches_ladder_sum(self, m):
        assert gate_counts(5, 3, 1 << m) == gate_counts_by_summation(5, 3, 1 << m)

    def test_optimized(self):
        assert optimized_gate_counts(1, 2)[0] == 216
        assert optimized_gate_counts(1, 14)[0] == 2304
        assert optimized_gate_counts(0, 5) == (0, 0)


class TestTranslated:
    def test_emc_k4(self):
        # 8 inputs + 60*2 + 18*2 + 8*2
        assert translated_cluster_size(4, 6, 4, "emc") == 180
        assert translated_cluster_size(4, 6, 4, "emc") == closed_form_size(4, 6, 4, "emc")

    @pytest.mark.parametrize("method", METHODS)
    def test_rx_only_without_edges(self, method):
        c = COSTS[method]
        assert translated_cluster_size(1, 0, 2, method) == 1 + (c.x_rotation - 1)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            translated_cluster_size(4, 6, 4, "native")

    @pytest.mark.parametrize("m", range(1, 11))
    def test_standard_per_edge_numerator(self, m):
        K = 1 << m
        per_edge = 13 * (2 * (m - 1) * K + 2) + 4 * (K - 1)
        assert per_edge == 26 * K * m - 22 * K + 22
        assert translated_cluster_size(0, 1, K, "standard") == per_edge


class TestRatio:
    @pytest.mark.parametrize("method", ["standard", "emc"])
    @pytest.mark.parametrize("V", [10, 100, 1000])
    @pytest.mark.parametrize("K", [2, 4, 16])
    def test_matches_closed_forms(self, method, V, K):
        E = complete_edges(V)
        assert ratio(V, E, K, method) == pytest.approx(ratio(V, E, K, method, "closed-form"), rel=1e-12)

    def test_asymptotic_anchors(self):
        assert asymptotic_ratio("standard", 2) == 30
        assert asymptotic_ratio("emc", 2) == 6
        assert asymptotic_ratio("emc", 4) == pytest.approx(26 / 3)
        assert asymptotic_ratio("emc-m-optimised", 2) == 2654

    @pytest.mark.parametrize("method", ["standard", "emc"])
    def test_sources_agree_in_limit(self, method):
        for m in range(1, 8):
            assert asymptotic_ratio(method, 1 << m, "counts") == pytest.approx(asymptotic_ratio(method, 1 << m))

    def test_finite_ratio_approaches_limit(self):
        r = [ratio(V, complete_edges(V), 2, "standard") for V in (10, 100, 1000, 10000)]
        assert r == sorted(r)
        assert r[-1] == pytest.approx(30, rel=1e-3)

    def test_optimised_sources_differ(self):
        assert closed_form_size(0, 1, 2, "emc-m-optimised") == 2654
        assert translated_cluster_size(0, 1, 2, "emc-m-optimised") == 1678

    def test_crossover(self):
        assert crossover(source="closed-form") == 1 << 16
        assert crossover(source="counts") == 1 << 14
        assert crossover("standard") is None

    def test_asymptotic_rejects_small_k(self):
        with pytest.raises(ValueError):
            asymptotic_ratio("emc", 1)


class TestSweep:
    def test_single_point(self):
        rows = sweep([4], [4])
        assert len(rows) == 1
        assert rows[0]["native"] == 42 and rows[0]["E"] == 6

    def test_standard_increases_with_v(self):
        rows = sweep([2], range(4, 201))
        r = [row["r_standard"] for row in rows]
        assert all(a < b for a, b in zip(r, r[1:]))
        assert r[-1] < 30

    def test_optimised_decreases_with_k(self):
        rows = sweep([1 << m for m in range(1, 17)], [100])
        r = [row["r_emc_m_optimised"] for row in rows]
        assert all(a > b for a, b in zip(r, r[1:]))
        assert r[0] > 1 > r[-1]

    def test_empty(self):
        with pytest.raises(ValueError):
            sweep([], [4])

    def test_csv_header(self):
        text = sweep_csv(sweep([2, 4], [10], edges=12))
        reader = csv.reader(io.StringIO(text))
        assert tuple(next(reader)) == SWEEP_HEADER
        assert len(list(reader)) == 2
