import json
import math

import numpy as np
import pytest

from mbqaoa.graph import Graph, complete_graph, cut_value
from mbqaoa.hamiltonian import EncodingParams, build_target, evaluate_diagonal
from mbqaoa.qaoa import (
    OptimizerConfig,
    QaoaResult,
    approximation_ratio,
    expectation,
    frequency_weighted_cut,
    optimize,
    sample_solutions,
)
from mbqaoa.simulator import QuantumState, reference_evolution


@pytest.fixture(scope="module")
def k4_result():
    return optimize(complete_graph(4), 4, OptimizerConfig(seed=7))


class TestExpectation:
    def test_plus_state_is_mean_cut(self, k4):
        enc = EncodingParams(4, 4)
        st = QuantumState.plus(range(8))
        # each edge is cut with probability 3/4
        assert expectation(st, build_target(k4, enc)) == pytest.approx(4.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(QuantumState.plus([0]), np.zeros(4))

    def test_bounded_by_spectrum(self, k4):
        enc = EncodingParams(4, 4)
        diag = evaluate_diagonal(build_target(k4, enc))
        st = reference_evolution(k4, enc, [0.7], [0.3])
        assert diag.min() <= expectation(st, diag) <= diag.max()


class TestSampling:
    def test_sorted_and_total(self, k4):
        enc = EncodingParams(4, 4)
        st = reference_evolution(k4, enc, [0.5], [0.4])
        samples = sample_solutions(st, 500, 3, enc)
        counts = [c for _, c in samples]
        assert sum(counts) == 500
        assert counts == sorted(counts, reverse=True)
        assert samples == sample_solutions(st, 500, 3, enc)

    def test_shot_mean_within_three_se(self, k4):
        enc = EncodingParams(4, 4)
        st = reference_evolution(k4, enc, [0.5], [0.4])
        mean, se = frequency_weighted_cut(sample_solutions(st, 100_000, 5, enc), k4)
        assert abs(mean - expectation(st, build_target(k4, enc))) < 3 * se

    def test_rejects_zero_shots(self):
        with pytest.raises(ValueError):
            sample_solutions(QuantumState.plus([0]), 0, 0, EncodingParams(2, 1))


class TestOptimize:
    def test_beats_uniform_baseline(self, k4_result):
        assert k4_result.best_expectation > 4.5
        assert k4_result.best_sampled_value == 6
        assert k4_result.optimum == 6
        assert k4_result.approximation_ratio == 1.0

    def test_p1_shot_distribution(self, k4_result):
        # the p=1 optimum puts about 36% on cut 6 and 56% on cut 5
        g = complete_graph(4)
        by_value = {}
        for a, c in k4_result.sampled:
            by_value[cut_value(g, a)] = by_value.get(cut_value(g, a), 0) + c
        assert by_value.get(6.0, 0) >= 300
        assert max(by_value, key=by_value.get) == 5.0

    def test_p2_mode_is_optimum(self):
        g = complete_graph(4)
        res = optimize(g, 4, OptimizerConfig(p=2, seed=7, grid_points=16))
        by_value = {}
        for a, c in res.sampled:
            by_value[cut_value(g, a)] = by_value.get(cut_value(g, a), 0) + c
        assert max(by_value, key=by_value.get) == 6.0

    def test_deterministic(self, k4_result):
        again = optimize(complete_graph(4), 4, OptimizerConfig(seed=7))
        assert again.to_json() == k4_result.to_json()
        assert again.history_csv() == k4_result.history_csv()

    def test_budget_respected(self):
        res = optimize(complete_graph(3), 2, OptimizerConfig(max_evals=50, grid_points=4))
        assert len(res.history) <= 50

    def test_grid_only(self):
        res = optimize(complete_graph(3), 2, OptimizerConfig(method="grid", grid_points=5))
        assert len(res.history) == 25

    def test_mbqc_backend_agrees(self):
        g = complete_graph(3)
        cfg = dict(method="grid", grid_points=4, seed=1)
        ref = optimize(g, 2, OptimizerConfig(**cfg))
        mb = optimize(g, 2, OptimizerConfig(backend="mbqc", **cfg))
        assert mb.best_expectation == pytest.approx(ref.best_expectation, abs=1e-9)

    def test_penalty_prefers_valid_labels(self, k4):
        res = optimize(k4, 3, OptimizerConfig(use_penalty=True, seed=2))
        assert res.best_assignment is not None
        assert max(res.best_assignment) <= 2
        assert res.best_sampled_value == 5

    def test_mbqc_penalty_refused(self, k4):
        with pytest.raises(ValueError):
            optimize(k4, 3, OptimizerConfig(use_penalty=True, backend="mbqc"))

    def test_json_fields(self, k4_result):
        doc = json.loads(k4_result.to_json())
        assert set(doc["best_params"]) == {"gamma", "beta"}
        assert sum(s["count"] for s in doc["samples"]) == 1000

    @pytest.mark.parametrize("bad", [dict(method="adam"), dict(backend="gpu"), dict(p=0), dict(grid_points=1)])
    def test_config_validation(self, bad):
        with pytest.raises(ValueError):
            OptimizerConfig(**bad)


def test_approximation_ratio():
    assert approximation_ratio(5, 6) == pytest.approx(5 / 6)
    assert approximation_ratio(None, 6) is None
    assert approximation_ratio(1, 0) is None


def test_frequency_weighted_cut_single_sample():
    g = Graph(2, ((0, 1, 2.0),))
    mean, se = frequency_weighted_cut([((0, 1), 1)], g)
    assert (mean, se) == (2.0, 0.0)
    assert math.isfinite(mean)


def test_result_history_csv_header():
    res = QaoaResult(((0.1, 0.2), (0.3, 0.4)), 1.0, history=[((0.1, 0.2, 0.3, 0.4), 1.0)])
    assert res.history_csv().splitlines()[0] == "eval,gamma_1,gamma_2,beta_1,beta_2,expectation"
