import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complementarity.errors import BoundednessViolation, StructuralError
from complementarity.model import (LossProfile, RegimeDistribution, System, average_loss,
                                   combine, deltas, monte_carlo_average, profile_from_losses,
                                   validate_assumptions, weight_from_combiner)
from complementarity.rules import Constant, Exemplar, Min, ProbTrust, Tabular

from . import oracles

TABLE1 = System.build([0.5, 0.5], [1.0, 0.5], [0.35, 0.65])
TABLE3 = System.build([0.5, 0.5], [1.15, 0.35], [0.2, 0.8])
THIRD = [1 / 3] * 3


@st.composite
def systems(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    total = sum(raw)
    p = [r / total for r in raw]
    h = draw(st.lists(st.floats(0.0, 2.0), min_size=n, max_size=n))
    a = draw(st.lists(st.floats(0.0, 2.0), min_size=n, max_size=n))
    return System.build(p, h, a)


# construction ---------------------------------------------------------------

def test_distribution_rejects_zero_probability():
    with pytest.raises(ValueError):
        RegimeDistribution([1.0, 0.0])


def test_distribution_rejects_bad_sum():
    with pytest.raises(ValueError):
        RegimeDistribution([0.5, 0.6])


def test_profile_rejects_negative_loss():
    with pytest.raises(ValueError):
        LossProfile([0.2, -0.1])


def test_losses_above_one_are_allowed():
    assert TABLE3.h[0] == pytest.approx(1.15)


def test_length_mismatch_is_structural():
    with pytest.raises(StructuralError):
        System.build([0.5, 0.5], [1.0], [0.3, 0.4])
    with pytest.raises(StructuralError):
        average_loss([0.1, 0.2, 0.3], [0.5, 0.5])


def test_arrays_are_read_only():
    with pytest.raises(ValueError):
        TABLE3.h[0] = 3.0


# averages and deltas ----------------------------------------------------------

@pytest.mark.parametrize("p, losses, expected", [
    ([0.5, 0.5], [1.0, 0.5], 0.75),
    ([1.0], [0.42], 0.42),
    (THIRD, [0.85, 0.02, 0.45], 0.44),
])
def test_average_loss(p, losses, expected):
    assert average_loss(losses, p) == pytest.approx(expected, abs=1e-12)


def test_deltas_table3():
    d = deltas([1.15, 0.35], [0.5, 0.5])
    assert d.mean_loss == pytest.approx(0.75)
    assert d.values == pytest.approx([0.4, -0.4])
    d = deltas([0.2, 0.8], [0.5, 0.5])
    assert d.mean_loss == pytest.approx(0.5)
    assert d.values == pytest.approx([-0.3, 0.3])


def test_deltas_of_constant_profile_are_zero():
    assert np.all(deltas([0.5, 0.5, 0.5], THIRD).values == 0)


@given(systems())
def test_deltas_reconstruct_and_center(system):
    for profile in (system.h, system.a):
        d = deltas(profile, system.p)
        assert abs(float(system.p @ d.values)) <= 1e-9
        assert np.max(np.abs(d.mean_loss + d.values - profile)) <= 1e-12


@given(systems(), st.randoms(use_true_random=False))
def test_average_is_permutation_invariant(system, rnd):
    order = list(range(system.n))
    rnd.shuffle(order)
    assert average_loss(system.h[order], system.p[order]) == pytest.approx(
        average_loss(system.h, system.p), abs=1e-12)


# combination ---------------------------------------------------------------

def test_combine_table3():
    c = combine(TABLE3, Tabular((0.25, 0.75)))
    assert c.losses == pytest.approx([0.4375, 0.4625], abs=1e-12)
    assert c.average == pytest.approx(0.45, abs=1e-12)


def test_combine_table1():
    assert combine(TABLE1, Tabular((0.9, 0.1))).average == pytest.approx(0.785, abs=1e-12)


def test_combine_tabular_length_mismatch():
    with pytest.raises(StructuralError):
        combine(TABLE3, Tabular((0.1, 0.2, 0.3)))


@given(systems())
def test_min_rule_takes_the_smaller_loss(system):
    c = combine(system, Min())
    assert np.array_equal(c.losses, np.minimum(system.a, system.h))


@given(systems(), st.floats(-1, 2), st.floats(-3, 3))
def test_combine_respects_band_and_average(system, b, m):
    c = combine(system, Exemplar(b, m))
    lo, hi = np.minimum(system.a, system.h), np.maximum(system.a, system.h)
    assert np.all(c.losses >= lo - 1e-9) and np.all(c.losses <= hi + 1e-9)
    assert c.average == pytest.approx(oracles.mean(system.p, c.losses), abs=1e-9)
    expected = oracles.combined_losses(
        system.h, system.a,
        [oracles.rule_weight("exemplar", {"b": b, "m": m}, a, h)
         for a, h in zip(system.a, system.h)])
    assert c.losses == pytest.approx(expected, abs=1e-12)


# weight extraction -----------------------------------------------------------

@pytest.mark.parametrize("a, h, c, expected", [
    (0.35, 1.0, 0.935, 0.9),
    (0.7, 0.7, 0.7, 0.5),
    (0.02, 0.95, 0.05, 0.03 / 0.93),
])
def test_weight_from_combiner(a, h, c, expected):
    assert weight_from_combiner(a, h, c) == pytest.approx(expected, abs=1e-9)


def test_weight_from_combiner_out_of_band():
    with pytest.raises(BoundednessViolation, match="bounded"):
        weight_from_combiner(0.4, 0.6, 0.3)


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 1))
def test_weight_round_trip(a, h, s):
    c = (1 - s) * a + s * h
    w = weight_from_combiner(a, h, c)
    assert (1 - w) * a + w * h == pytest.approx(c, abs=1e-9)
    if abs(h - a) > 1e-3:
        assert w == pytest.approx(s, abs=1e-9)


def test_profile_from_losses_recovers_weights():
    c = profile_from_losses(TABLE3, [0.4375, 0.4625])
    assert c.weights == pytest.approx([0.25, 0.75], abs=1e-12)
    assert c.average == pytest.approx(0.45)


# assumptions ---------------------------------------------------------------

def test_table2_combined_column_is_valid():
    system = System.build([0.5, 0.5], [1.0, 0.5], [0.35, 0.65])
    report = validate_assumptions(system, [0.5125, 0.5375])
    assert report.satisfied and report.lhs == 0


def test_boundedness_violation_flagged():
    system = System.build([1.0], [0.6], [0.4])
    report = validate_assumptions(system, [0.3])
    assert not report.satisfied
    assert any("regime 1" in n for n in report.notes)


def test_identical_regimes_with_different_output_flagged():
    system = System.build([0.5, 0.5], [0.5, 0.5], [0.3, 0.3])
    report = validate_assumptions(system, [0.35, 0.45])
    assert not report.satisfied
    assert any("regimes 1 and 2" in n for n in report.notes)


# monte carlo ---------------------------------------------------------------

def test_monte_carlo_degenerate_is_exact():
    system = System.build([0.3, 0.7], [0.4, 0.4], [0.4, 0.4])
    for rule in (Min(), ProbTrust(0.3), Constant(0.9)):
        for seed in (0, 1, 2**63 - 1):
            assert monte_carlo_average(system, rule, 1000, seed).mean == 0.4


def test_monte_carlo_table3():
    est = monte_carlo_average(TABLE3, Tabular((0.25, 0.75)), 10**6, seed=0)
    assert abs(est.mean - 0.45) <= 3 * est.stderr


def test_monte_carlo_bernoulli_mean():
    system = System.build([1.0], [1.0], [0.0])
    est = monte_carlo_average(system, Constant(0.3), 10**6, seed=5)
    assert abs(est.mean - 0.3) <= 3 * est.stderr


def test_monte_carlo_is_deterministic():
    a = monte_carlo_average(TABLE1, ProbTrust(0.7), 5000, seed=11)
    b = monte_carlo_average(TABLE1, ProbTrust(0.7), 5000, seed=11)
    assert a == b


def test_monte_carlo_single_sample():
    est = monte_carlo_average(TABLE1, Min(), 1, seed=0)
    assert est.samples == 1 and math.isnan(est.stderr)


def test_monte_carlo_needs_samples():
    with pytest.raises(ValueError):
        monte_carlo_average(TABLE1, Min(), 0)


@settings(max_examples=30, deadline=None)
@given(systems(), st.floats(0, 1), st.integers(0, 2**32))
def test_monte_carlo_tracks_analytic_average(system, p_s, seed):
    rule = ProbTrust(p_s)
    est = monte_carlo_average(system, rule, 20_000, seed)
    analytic = combine(system, rule).average
    if est.stderr == 0 or math.isnan(est.stderr):
        assert est.mean == pytest.approx(analytic, abs=1e-12)
    else:
        assert abs(est.mean - analytic) <= 5 * est.stderr
