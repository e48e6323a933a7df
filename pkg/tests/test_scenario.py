import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import ctxpoly as cp
from ctxpoly.sampling import random_simplest_behavior

TOL = 1e-9


def test_simplest_scenario_counts(b_si):
    assert (b_si.n_preps, b_si.n_meas, b_si.n_outcomes) == (4, 2, 2)
    assert len(b_si.prep_equivs) == 1
    assert len(b_si.meas_equivs) == 0


def test_simplest_scenario_equivalence_weights(b_si):
    equiv = b_si.prep_equivs[0]
    assert np.array_equal(equiv.alpha, [0.5, 0.5, 0.0, 0.0])
    assert np.array_equal(equiv.beta, [0.0, 0.0, 0.5, 0.5])
    assert equiv.nontrivial()


def test_simplest_scenario_validates(b_si):
    assert cp.validate_scenario(b_si).ok


def test_unnormalized_equivalence_reported():
    bad = cp.Scenario(
        4, 2, 2,
        prep_equivs=(cp.EquivalenceVector([0.5, 0.4, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]),),
    )
    report = cp.validate_scenario(bad)
    assert not report.ok
    assert any(v.constraint == "alpha-not-normalized" for v in report.violations)


def test_trivial_equivalence_rejected():
    bad = cp.Scenario(
        4, 2, 2,
        prep_equivs=(cp.EquivalenceVector([0.5, 0.5, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0]),),
    )
    report = cp.validate_scenario(bad)
    assert any(v.constraint == "trivial-equivalence" for v in report.violations)


def test_wrong_length_equivalence_reported():
    bad = cp.Scenario(4, 2, 2, prep_equivs=(cp.EquivalenceVector([1.0, 0.0], [0.0, 1.0]),))
    report = cp.validate_scenario(bad)
    assert any(v.constraint == "equivalence-length" for v in report.violations)


def test_uniform_behavior_valid(b_si):
    assert cp.validate_behavior(b_si, cp.uniform_behavior(b_si), TOL).ok


def test_quantum_behavior_valid(b_si, canonical_behavior):
    assert cp.validate_behavior(b_si, canonical_behavior, TOL).ok


def test_broken_prep_equivalence_detected(b_si):
    probs = np.full((2, 4, 2), 0.5)
    probs[0, 0] = [0.3, 0.7]  # p(1|1,1)+p(1|1,2) != p(1|1,3)+p(1|1,4)
    report = cp.validate_behavior(b_si, cp.Behavior(probs), TOL)
    assert not report.ok
    assert any(v.constraint == "prep-equivalence-0" for v in report.violations)


def test_meas_equivalence_checked():
    equiv = cp.EquivalenceVector([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0])  # [0|M1] ~ [0|M2]
    s = cp.Scenario(2, 2, 2, meas_equivs=(equiv,))
    good = np.full((2, 2, 2), 0.5)
    assert cp.validate_behavior(s, cp.Behavior(good), TOL).ok
    bad = good.copy()
    bad[0, 0] = [0.9, 0.1]
    report = cp.validate_behavior(s, cp.Behavior(bad), TOL)
    assert any(v.constraint == "meas-equivalence-0" for v in report.violations)


def test_shape_mismatch_raises(b_si):
    with pytest.raises(cp.ShapeMismatchError):
        cp.validate_behavior(b_si, cp.Behavior(np.full((2, 3, 2), 0.5)))


def test_out_of_range_probability_reported(b_si):
    probs = np.full((2, 4, 2), 0.5)
    probs[0, 0] = [1.2, -0.2]
    report = cp.validate_behavior(b_si, cp.Behavior(probs))
    assert any(v.constraint == "prob-out-of-range" for v in report.violations)


def test_report_ok_iff_no_violations():
    assert cp.ValidationReport().ok
    assert not cp.ValidationReport((cp.Violation("x", 1.0),)).ok


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_valid_behaviors_validate(seed):
    rng = np.random.default_rng(seed)
    behavior = random_simplest_behavior(rng)
    assert cp.validate_behavior(cp.make_simplest_scenario(), behavior, TOL).ok


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=4, max_size=4),
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=4, max_size=4),
)
def test_equivalence_nontriviality_matches_definition(alpha, beta):
    equiv = cp.EquivalenceVector(np.array(alpha), np.array(beta))
    assert equiv.nontrivial(0.0) == bool(np.any(np.asarray(alpha) != np.asarray(beta)))
