import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complementarity.analysis import covariance_condition, is_complementary
from complementarity.errors import InfeasibleConstraints, UnsupportedRuleError
from complementarity.model import System, combine
from complementarity.optimize import (SweepGrid, WeightConstraintSet, complementarity_sweep,
                                      min_variability_threshold, optimal_tabular_weights)
from complementarity.rules import Exemplar, Min, ProbTrust, Tabular

from . import oracles
from .test_analysis import TABLE3
from .test_model import systems


def test_unconstrained_table3_is_min_solution():
    r = optimal_tabular_weights(TABLE3)
    assert r.weights == pytest.approx([0.0, 1.0])
    assert r.average == pytest.approx(0.275, abs=1e-12)
    assert r.strict


def test_require_benefit_table3_reports_boundary():
    r = optimal_tabular_weights(TABLE3, WeightConstraintSet(require_benefit="human"))
    assert r.weights == pytest.approx([0.0, 1.0], abs=1e-9)
    assert r.average == pytest.approx(0.275, abs=1e-9)
    assert not r.strict
    assert "benefit[2] boundary" in r.active
    assert any("benefit[2]" in n for n in r.notes)
    assert oracles.grid_optimum(TABLE3.p, TABLE3.h, TABLE3.a, benefit="human") == \
        pytest.approx(r.average, abs=1e-9)


@pytest.mark.parametrize("a, h", [(0.2, 0.6), (0.6, 0.2), (0.4, 0.4)])
def test_single_regime(a, h):
    r = optimal_tabular_weights(System.build([1.0], [h], [a]))
    assert r.average == pytest.approx(min(a, h))
    if a < h:
        assert r.weights[0] == pytest.approx(0.0)
    elif h < a:
        assert r.weights[0] == pytest.approx(1.0)


def test_disparity_bound_is_respected():
    r = optimal_tabular_weights(TABLE3, WeightConstraintSet(max_combined_disparity=0.05))
    c = combine(TABLE3, Tabular(tuple(r.weights))).losses
    assert c.max() - c.min() <= 0.05 + 1e-9
    assert any(name.startswith("disparity") for name in r.active)
    expected = oracles.grid_optimum(TABLE3.p, TABLE3.h, TABLE3.a, eps=0.05)
    assert r.average == pytest.approx(expected, abs=1e-9)


def test_box_constraints():
    box = ((0.3, 0.6), (0.0, 0.5))
    r = optimal_tabular_weights(TABLE3, WeightConstraintSet(box=box))
    assert r.weights == pytest.approx([0.3, 0.5])
    assert "box[1] lower" in r.active and "box[2] upper" in r.active


def test_infeasible_names_a_pair():
    system = System.build([0.5, 0.5], [1.0, 0.1], [0.9, 0.0])
    constraints = WeightConstraintSet(box=((1.0, 1.0), (0.0, 1.0)), max_combined_disparity=0.2)
    with pytest.raises(InfeasibleConstraints) as err:
        optimal_tabular_weights(system, constraints)
    assert len(err.value.constraints) == 2
    assert any(c.startswith("disparity") for c in err.value.constraints)


def test_infeasible_benefit():
    system = System.build([0.5, 0.5], [0.3, 0.5], [0.6, 0.2])
    constraints = WeightConstraintSet(box=((0.0, 0.2), (0.0, 1.0)), require_benefit="human")
    with pytest.raises(InfeasibleConstraints) as err:
        optimal_tabular_weights(system, constraints)
    assert err.value.constraints == ("box[1]", "benefit[1]")


@pytest.mark.parametrize("kwargs", [
    {"box": ((0.6, 0.4),)}, {"max_combined_disparity": -0.1}, {"require_benefit": "oracle"},
])
def test_constraint_validation(kwargs):
    with pytest.raises(ValueError):
        WeightConstraintSet(**kwargs)


def test_too_many_regimes():
    n = 65
    system = System.build([1 / n] * n, [0.5] * n, [0.4] * n)
    with pytest.raises(ValueError):
        optimal_tabular_weights(system)


@given(systems(max_n=8))
def test_unconstrained_equals_min_rule(system):
    r = optimal_tabular_weights(system)
    assert r.average == pytest.approx(combine(system, Min()).average, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(systems(max_n=4), st.floats(0, 0.5), st.floats(0, 0.5))
def test_monotone_in_disparity_bound(system, e1, e2):
    def best(eps):
        try:
            return optimal_tabular_weights(
                system, WeightConstraintSet(max_combined_disparity=eps)).average
        except InfeasibleConstraints:
            return float("inf")

    loose, tight = max(e1, e2), min(e1, e2)
    assert best(tight) >= best(loose) - 1e-9


@settings(max_examples=60, deadline=None)
@given(systems(max_n=2), st.one_of(st.none(), st.floats(0, 0.6)),
       st.sampled_from([None, "human", "algorithm"]))
def test_oracles_agree_with_brute_force(system, eps, benefit):
    window = oracles.grid_optimum(system.p, system.h, system.a, eps=eps, benefit=benefit)
    naive = oracles.brute_force_optimum(system.p, system.h, system.a, eps=eps, benefit=benefit)
    if naive is not None and window is not None:
        assert window <= naive + 1e-9
        assert naive - window <= 0.03
    if window is None:
        assert naive is None


# variability threshold ---------------------------------------------------------

def test_threshold_reference():
    assert min_variability_threshold(0.75, 0.5, 0.5, 0.25, 0.75) == pytest.approx(0.5)
    assert min_variability_threshold(0.6, 0.6, 0.3, 0.1, 0.9) == 0.0


def test_threshold_grows_as_p_shrinks():
    t_half = min_variability_threshold(0.75, 0.5, 0.5, 0.0, 0.5)
    t_tenth = min_variability_threshold(0.75, 0.5, 0.1, 0.0, 0.5)
    assert t_tenth / t_half == pytest.approx(9.0)


@given(st.floats(0, 1), st.floats(0.01, 2), st.floats(0.05, 0.95), st.floats(0, 1),
       st.floats(0, 1))
def test_threshold_linear_in_gap(A, gap, p, s1, s2):
    if abs(s1 - s2) < 1e-6:
        return
    t1 = min_variability_threshold(A + gap, A, p, s1, s2)
    t2 = min_variability_threshold(A + 2 * gap, A, p, s1, s2)
    assert t2 == pytest.approx(2 * t1, rel=1e-9, abs=1e-12)


def test_threshold_errors():
    with pytest.raises(ValueError):
        min_variability_threshold(0.5, 0.75, 0.5, 0.2, 0.4)
    with pytest.raises(ValueError):
        min_variability_threshold(0.75, 0.5, 1.0, 0.2, 0.4)
    with pytest.raises(ValueError):
        min_variability_threshold(0.75, 0.5, 0.5, 0.3, 0.3)


# sweeps ---------------------------------------------------------------------

def _grid(rule, lo=-0.5, hi=0.75, steps=26, H=0.75, A=0.5, p=0.5):
    return SweepGrid((lo, hi, steps), (lo, hi, steps), H, A, p, rule)


def test_sweep_reference_cell():
    result = complementarity_sweep(_grid(Exemplar(0.5, 0.5)))
    i = int(np.argmin(np.abs(result.delta_a + 0.3)))
    j = int(np.argmin(np.abs(result.delta_h - 0.4)))
    assert result.delta_a[i] == pytest.approx(-0.3) and result.delta_h[j] == pytest.approx(0.4)
    a, h = [0.2, 0.8], [1.15, 0.35]
    s = [oracles.rule_weight("exemplar", {"b": 0.5, "m": 0.5}, ai, hi) for ai, hi in zip(a, h)]
    expected = oracles.mean([0.5, 0.5], oracles.combined_losses(h, a, s))
    assert result.combined[i, j] == pytest.approx(expected, abs=1e-12)
    assert result.complementary[i, j]


def test_sweep_masks_negative_losses():
    result = complementarity_sweep(_grid(Min(), -0.75, 0.75, 31))
    r = 0.5 / 0.5
    for i, da in enumerate(result.delta_a):
        for j, dh in enumerate(result.delta_h):
            negative = min(0.5 + da, 0.5 - r * da, 0.75 + dh, 0.75 - r * dh) < 0
            assert result.masked[i, j] == negative
            if negative:
                assert np.isnan(result.combined[i, j]) and not result.complementary[i, j]


def test_sweep_fully_masked():
    with pytest.raises(ValueError):
        complementarity_sweep(_grid(Min(), 2.0, 3.0, 3))


def test_sweep_rejects_tabular_and_bad_axes():
    with pytest.raises(UnsupportedRuleError):
        _grid(Tabular((0.1, 0.2)))
    with pytest.raises(ValueError):
        SweepGrid((0.0, 1.0, 1), (0.0, 1.0, 3), 0.75, 0.5, 0.5, Min())
    with pytest.raises(ValueError):
        SweepGrid((0.0, 1.0, 3), (0.0, 1.0, 3), 0.75, 0.5, 1.0, Min())


def test_sweep_diagonal_with_equal_averages():
    result = complementarity_sweep(_grid(Exemplar(0.5, 0.5), -0.4, 0.4, 17, H=0.5, A=0.5))
    for k in range(17):
        assert not result.complementary[k, k]
        assert result.combined[k, k] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("rule", [Min(), ProbTrust(0.8), Exemplar(0.5, 0.5)])
def test_sweep_role_swap_symmetry_at_equal_averages(rule):
    result = complementarity_sweep(_grid(rule, -0.4, 0.4, 17, H=0.5, A=0.5))
    assert np.array_equal(result.complementary, result.complementary.T)


@pytest.mark.parametrize("rule", [Min(), ProbTrust(0.8), Exemplar(0.5, 0.5)])
def test_sweep_cells_match_direct_evaluation(rule):
    result = complementarity_sweep(_grid(rule, -0.6, 0.6, 13))
    for i in range(13):
        for j in range(13):
            if result.masked[i, j]:
                continue
            system = result.cell_system(i, j)
            comp = is_complementary(system, rule)
            assert result.combined[i, j] == pytest.approx(comp.lhs, abs=1e-12)
            assert result.complementary[i, j] == comp.satisfied
            if covariance_condition(system, rule).satisfied:
                assert result.complementary[i, j]
