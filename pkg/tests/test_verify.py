import pytest

from mbqaoa.verify import (
    SELECTORS,
    check_edge_operator,
    check_cut_diagonal,
    check_oracle,
    check_penalty,
    check_projector,
    random_oracle_cases,
    run_checks,
)


@pytest.mark.parametrize("check", [check_edge_operator, check_projector, check_cut_diagonal, check_penalty])
def test_exhaustive_checks_pass(check):
    res = check()
    assert res.passed, res.line()
    assert res.cases > 0


def test_oracle_passes():
    assert check_oracle(cases=12).passed


def test_mutated_calibration_fails():
    res = check_oracle(cases=12, cost_calibration=1.0)
    assert not res.passed
    assert res.counterexamples and "fidelity" in res.counterexamples[0]


def test_mutated_mixer_fails():
    assert not check_oracle(cases=12, mixer_calibration=2.0).passed


def test_cases_respect_bounds():
    cases = list(random_oracle_cases(60, seed=3))
    assert {c.K for c in cases} == {2, 4, 8}
    assert {c.p for c in cases} == {1, 2}
    assert all(c.graph.vertex_count * (c.K - 1).bit_length() <= 12 for c in cases)


def test_selector_and_timing():
    res = run_checks(["projector"])
    assert [r.name for r in res] == ["projector"]
    assert res[0].seconds >= 0
    with pytest.raises(ValueError):
        run_checks(["nope"])
    assert "oracle" in SELECTORS
