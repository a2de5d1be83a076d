"""Core-model suite: response curve, instances, schemes, payoffs, JSON."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from persuasion import (
    FULLY_RATIONAL,
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    Signal,
    ValidationError,
    censorship_params,
    censorship_params_from_json,
    censorship_params_to_json,
    evaluate_log_payoff,
    evaluate_payoff,
    full_reveal,
    instance_from_json,
    instance_to_json,
    log_response,
    make_censorship,
    make_direct,
    mix,
    no_info,
    response,
    response_derivative,
    scheme_from_json,
    scheme_to_json,
    validate_scheme,
)

# five equal-weight states used throughout; its optimal threshold pool
# pins the canonical worked example for the builders below
FIG = Instance.from_weights(
    [0.2] * 5, [-1.5, 0.5, 1.0, 1.5, 2.0], [1.0] * 5
)

finite_beta = st.floats(min_value=0.0, max_value=50.0, allow_nan=False)
stakes = st.floats(min_value=-40.0, max_value=40.0, allow_nan=False)


# ---------------------------------------------------------------------------
# rationality levels


def test_level_parse_and_normalization():
    assert RationalityLevel.parse("inf").is_fully_rational
    assert RationalityLevel.parse("rational").is_fully_rational
    assert RationalityLevel.parse("2.5").beta == 2.5
    assert RationalityLevel(math.inf).is_fully_rational
    assert RationalityLevel(0.0).beta == 0.0
    assert str(RationalityLevel(None)) == "inf"
    assert str(RationalityLevel(2.0)) == "2.0"


def test_level_rejects_bad_values():
    with pytest.raises(ValidationError):
        RationalityLevel(-1.0)
    with pytest.raises(ValidationError):
        RationalityLevel(math.nan)


def test_error_hierarchy():
    assert issubclass(ValidationError, ValueError)
    assert issubclass(NumericalError, RuntimeError)


# ---------------------------------------------------------------------------
# response curve


def test_response_pinned_values():
    # logistic at beta=1, delta=0.7: 1/(1+e^0.7)
    assert response(RationalityLevel(1.0), 0.7) == pytest.approx(
        0.33181222783183395, abs=1e-15
    )
    assert response(RationalityLevel(3.0), 0.0) == 0.5
    assert response(RationalityLevel(0.0), 12.3) == 0.5


def test_response_step_limit():
    assert response(FULLY_RATIONAL, 0.0) == 1.0
    assert response(FULLY_RATIONAL, -3.0) == 1.0
    assert response(FULLY_RATIONAL, 1e-12) == 0.0


def test_response_derivative_pinned_values():
    assert response_derivative(RationalityLevel(1.0), 3.0) == pytest.approx(
        -0.045176659730912144, abs=1e-15
    )
    assert response_derivative(RationalityLevel(1.0), 0.0) == -0.25
    assert response_derivative(RationalityLevel(2.0), 0.0) == -0.5
    assert response_derivative(RationalityLevel(0.0), 5.0) == 0.0
    with pytest.raises(ValidationError):
        response_derivative(FULLY_RATIONAL, 0.0)


@given(finite_beta, stakes)
def test_response_bounds_and_symmetry(beta, delta):
    level = RationalityLevel(beta)
    w = response(level, delta)
    assert 0.0 <= w <= 1.0
    assert w + response(level, -delta) == pytest.approx(1.0, abs=1e-15)


@given(finite_beta, stakes, stakes)
def test_response_monotone_nonincreasing(beta, d1, d2):
    level = RationalityLevel(beta)
    lo, hi = min(d1, d2), max(d1, d2)
    assert response(level, lo) >= response(level, hi)


@given(finite_beta, stakes)
def test_response_derivative_is_even(beta, delta):
    if beta == 0.0:
        return
    level = RationalityLevel(beta)
    assert response_derivative(level, delta) == response_derivative(level, -delta)


@given(st.floats(min_value=0.01, max_value=20.0), st.floats(min_value=-25.0, max_value=25.0))
def test_response_derivative_matches_finite_difference(beta, delta):
    if abs(beta * delta) > 30.0:
        return
    level = RationalityLevel(beta)
    # difference on the small-W side, where relative precision survives;
    # the derivative is even, so this checks the other side too
    d = abs(delta)
    h = 1e-5 / beta
    fd = (response(level, d + h) - response(level, d - h)) / (2.0 * h)
    assert fd == pytest.approx(response_derivative(level, delta), rel=1e-6, abs=1e-12)


@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.05, max_value=20.0))
def test_response_second_difference_sign(beta, delta):
    # convex right of zero, concave (mirror) left of zero
    level = RationalityLevel(beta)
    h = min(0.01, delta / 2.0)
    right = response(level, delta - h) + response(level, delta + h) - 2.0 * response(level, delta)
    left = response(level, -delta - h) + response(level, -delta + h) - 2.0 * response(level, -delta)
    assert right >= -1e-15
    assert left <= 1e-15


@given(finite_beta, stakes)
def test_log_response_consistent(beta, delta):
    level = RationalityLevel(beta)
    w = response(level, delta)
    lw = log_response(level, delta)
    if w > 1e-300:
        assert lw == pytest.approx(math.log(w), rel=1e-12)
    else:
        assert lw <= -600.0


def test_log_response_step_limit():
    assert log_response(FULLY_RATIONAL, -1.0) == 0.0
    assert log_response(FULLY_RATIONAL, 0.0) == 0.0
    assert log_response(FULLY_RATIONAL, 1.0) == -math.inf


def test_response_rejects_nan():
    with pytest.raises(ValidationError):
        response(RationalityLevel(1.0), math.nan)


# ---------------------------------------------------------------------------
# instances


def test_instance_basic_properties():
    assert FIG.m == 5
    assert FIG.is_sisu
    assert FIG.prior_mean() == pytest.approx(0.7, abs=1e-15)
    mixed = Instance.from_weights([0.5, 0.5], [-1.0, 2.0], [0.0, 1.0])
    assert not mixed.is_sisu


def test_instance_validation_errors():
    with pytest.raises(ValidationError):
        Instance.from_weights([1.0], [math.inf], [1.0])
    with pytest.raises(ValidationError):
        Instance.from_weights([0.5, 0.5], [1.0, 1.0], [1.0, 1.0])  # not increasing
    with pytest.raises(ValidationError):
        Instance.from_weights([0.5, 0.5], [1.0, 2.0], [1.0, -1.0])  # negative payoff
    with pytest.raises(ValidationError):
        Instance.from_weights([0.7, 0.7], [1.0, 2.0], [1.0, 1.0])  # mass != 1
    with pytest.raises(ValidationError):
        Instance.from_weights([-0.5, 1.5], [1.0, 2.0], [1.0, 1.0])  # negative mass


def test_instance_log_weights_normalize():
    inst = Instance.from_log_weights([100.0, 101.0, 99.0], [-1.0, 0.5, 2.0], [1.0] * 3)
    assert inst.log_weight
    total = math.fsum(math.exp(lw) for lw in inst.log_lam)
    assert total == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        Instance.from_log_weights([-math.inf, -math.inf], [0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        Instance.from_log_weights([math.inf, 0.0], [0.0, 1.0], [1.0, 1.0])


def test_instance_log_weights_survive_underflow():
    inst = Instance.from_log_weights([0.0, -2000.0], [-1.0, 1.0], [1.0, 1.0])
    assert inst.lam[1] == 0.0
    assert inst.log_lam[1] < -1500.0
    assert inst.prior_mean() == pytest.approx(-1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# signals and schemes


def test_signal_drops_zero_mass_and_sorts():
    sig = Signal.of(0.5, {3: 0.25, 1: 0.0, 0: 0.75})
    assert sig.mass == ((0, 0.75), (3, 0.25))
    assert sig.support == (0, 3)
    with pytest.raises(ValidationError):
        Signal.of(math.inf, {0: 1.0})
    with pytest.raises(ValidationError):
        Signal.of(0.0, {0: 1.5})
    with pytest.raises(ValidationError):
        Signal.of(0.0, {})


def test_scheme_canonical_merges_and_raw_keeps():
    sigs = [Signal.of(1.0, {0: 0.5}), Signal.of(1.0, {1: 0.5}), Signal.of(2.0, {0: 0.5, 1: 0.5})]
    merged = Scheme.canonical(2, sigs)
    assert len(merged.signals) == 2
    assert merged.signals[0].mass == ((0, 0.5), (1, 0.5))
    raw = Scheme.raw(2, sigs)
    assert len(raw.signals) == 3
    assert merged.state_totals() == pytest.approx([1.0, 1.0])


def test_scheme_state_totals_range_check():
    bad = Scheme.raw(2, [Signal.of(0.0, {5: 1.0})])
    with pytest.raises(ValidationError):
        bad.state_totals()


def test_full_reveal_and_no_info_shapes():
    fr = full_reveal(FIG)
    assert len(fr.signals) == 5
    assert [s.delta for s in fr.signals] == list(FIG.v)
    ni = no_info(FIG)
    assert len(ni.signals) == 1
    assert ni.signals[0].delta == pytest.approx(0.7, abs=1e-15)
    assert validate_scheme(FIG, fr).ok
    assert validate_scheme(FIG, ni).ok


def test_validate_scheme_catches_mass_and_plausibility():
    short = Scheme.canonical(5, [Signal.of(0.7, {i: 1.0 for i in range(4)})])
    rep = validate_scheme(FIG, short)
    assert not rep.ok
    assert rep.max_mass_error > 0.9

    # right masses, wrong signal location
    off = Scheme.canonical(5, [Signal.of(0.0, {i: 1.0 for i in range(5)})])
    rep2 = validate_scheme(FIG, off)
    assert not rep2.ok
    assert rep2.max_bayes_residual == pytest.approx(0.7, abs=1e-12)

    wrong_m = Scheme.canonical(3, [Signal.of(0.0, {i: 1.0 for i in range(3)})])
    assert not validate_scheme(FIG, wrong_m).ok


# ---------------------------------------------------------------------------
# payoffs


def test_payoff_pinned_binary_value():
    inst = Instance.from_weights([0.5, 0.5], [1.0, 2.0], [0.0, 1.0])
    val = evaluate_payoff(inst, RationalityLevel(1.0), full_reveal(inst))
    assert val == pytest.approx(0.5 / (1.0 + math.exp(2.0)), abs=1e-16)
    assert val == pytest.approx(0.05960146101105877, abs=1e-16)


def test_payoff_fully_rational_threshold_pool():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    scheme = make_censorship(FIG, params)
    assert evaluate_payoff(FIG, FULLY_RATIONAL, scheme) == pytest.approx(0.6, abs=1e-12)


def test_payoff_rejects_invalid_scheme():
    broken = Scheme.canonical(5, [Signal.of(0.0, {i: 1.0 for i in range(5)})])
    with pytest.raises(ValidationError):
        evaluate_payoff(FIG, RationalityLevel(1.0), broken)


def test_log_payoff_matches_linear_payoff():
    level = RationalityLevel(2.0)
    for scheme in (full_reveal(FIG), no_info(FIG)):
        lp = evaluate_log_payoff(FIG, level, scheme)
        assert math.exp(lp) == pytest.approx(
            evaluate_payoff(FIG, level, scheme), rel=1e-12
        )


def test_log_payoff_handles_underflowed_weights():
    inst = Instance.from_log_weights([0.0, -2000.0], [-1.0, 1.0], [1.0, 1.0])
    lp = evaluate_log_payoff(inst, RationalityLevel(1.0), full_reveal(inst))
    # the heavy state dominates: log(W(-1)) plus a vanishing correction
    assert lp == pytest.approx(math.log(response(RationalityLevel(1.0), -1.0)), abs=1e-9)


def test_mix_is_linear_in_payoff():
    rng = np.random.default_rng(5)
    level = RationalityLevel(1.5)
    a, b = full_reveal(FIG), no_info(FIG)
    for _ in range(5):
        w = float(rng.uniform(0.0, 1.0))
        blended = mix([a, b], [w, 1.0 - w])
        target = w * evaluate_payoff(FIG, level, a) + (1.0 - w) * evaluate_payoff(FIG, level, b)
        assert evaluate_payoff(FIG, level, blended) == pytest.approx(target, abs=1e-14)


def test_mix_validates_weights():
    a, b = full_reveal(FIG), no_info(FIG)
    with pytest.raises(ValidationError):
        mix([a, b], [0.7, 0.7])
    with pytest.raises(ValidationError):
        mix([a, b], [-0.1, 1.1])
    only_a = mix([a, b], [1.0, 0.0])
    assert len(only_a.signals) == len(a.signals)


# ---------------------------------------------------------------------------
# threshold-pool builders


def test_censorship_params_pinned_example():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    assert params.threshold_state == 3
    assert params.threshold_prob == 0.0
    assert abs(params.pooling_signal) <= 1e-12
    assert params.high_states == frozenset({0, 1, 2})


def test_censorship_params_validation():
    with pytest.raises(ValidationError):
        censorship_params(FIG, {0, 3}, 3, 0.5)  # threshold inside the pool
    with pytest.raises(ValidationError):
        censorship_params(FIG, {9}, 3, 0.5)  # out of range
    with pytest.raises(ValidationError):
        censorship_params(FIG, set(), 3, math.nan)
    clipped = censorship_params(FIG, {0}, 1, 1.0 + 5e-13)
    assert clipped.threshold_prob == 1.0


def test_censorship_params_zero_mass_pool():
    padded = Instance.from_weights(
        [0.0, 0.2, 0.2, 0.2, 0.2, 0.2], [-9.0, -1.5, 0.5, 1.0, 1.5, 2.0], [1.0] * 6
    )
    params = censorship_params(padded, {0}, 1, 0.0)
    assert params.pooling_signal is None
    with pytest.raises(ValidationError):
        censorship_params(padded, set(), 0, 0.5)  # slice of a weightless state

    # a slice of a massive state keeps the pool well defined
    ok = censorship_params(padded, {0}, 1, 0.5)
    assert ok.pooling_signal == pytest.approx(-1.5)


def test_make_censorship_pinned_shape():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    scheme = make_censorship(FIG, params)
    assert validate_scheme(FIG, scheme).ok
    assert len(scheme.signals) == 3
    assert scheme.signals[0].delta == pytest.approx(0.0, abs=1e-12)
    assert scheme.signals[0].support == (0, 1, 2)
    assert scheme.signals[1].delta == 1.5
    assert scheme.signals[2].delta == 2.0


def test_make_censorship_zero_mass_pool_reveals():
    padded = Instance.from_weights(
        [0.0, 0.2, 0.2, 0.2, 0.2, 0.2], [-9.0, -1.5, 0.5, 1.0, 1.5, 2.0], [1.0] * 6
    )
    scheme = make_censorship(padded, censorship_params(padded, {0}, 1, 0.0))
    assert validate_scheme(padded, scheme).ok
    assert [s.delta for s in scheme.signals] == list(padded.v)


def test_make_direct_pinned_shape():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    scheme = make_direct(FIG, params)
    assert validate_scheme(FIG, scheme).ok
    assert len(scheme.signals) == 2
    assert scheme.signals[0].delta == pytest.approx(0.0, abs=1e-12)
    assert scheme.signals[1].delta == pytest.approx(1.75, abs=1e-12)
    assert scheme.signals[1].support == (3, 4)


def test_make_direct_empty_pool_is_single_signal():
    params = censorship_params(FIG, set(), 0, 0.0)
    scheme = make_direct(FIG, params)
    assert len(scheme.signals) == 1
    assert scheme.signals[0].delta == pytest.approx(0.7, abs=1e-15)


def test_make_direct_full_slice_leaves_no_leftover():
    params = censorship_params(FIG, {0}, 1, 1.0)
    scheme = make_direct(FIG, params)
    assert validate_scheme(FIG, scheme).ok
    assert len(scheme.signals) == 2
    assert scheme.signals[0].support == (0, 1)


# ---------------------------------------------------------------------------
# JSON round trips


def test_instance_json_round_trip():
    for inst in (
        FIG,
        Instance.from_log_weights([0.0, -2000.0], [-1.0, 1.0], [1.0, 0.5]),
    ):
        text = instance_to_json(inst)
        back = instance_from_json(text)
        assert instance_to_json(back) == text
        assert back.v == inst.v and back.u == inst.u
        assert back.log_weight == inst.log_weight
    payload = json.loads(instance_to_json(FIG))
    assert set(payload) == {"states"}
    assert set(payload["states"][0]) == {"lambda", "v", "u"}


def test_scheme_json_round_trip_uses_one_based_states():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    scheme = make_censorship(FIG, params)
    text = scheme_to_json(scheme)
    payload = json.loads(text)
    assert set(payload["signals"][0]["mass"]) == {"1", "2", "3"}
    back = scheme_from_json(text, num_states=5)
    assert scheme_to_json(back) == text
    inferred = scheme_from_json(text)
    assert inferred.num_states == 5


def test_censorship_params_json_round_trip():
    params = censorship_params(FIG, {0, 1, 2}, 3, 0.0)
    text = censorship_params_to_json(params)
    payload = json.loads(text)
    assert payload["i_dagger"] == 4
    assert payload["high_states"] == [1, 2, 3]
    back = censorship_params_from_json(text)
    assert back.threshold_state == 3
    assert back.high_states == params.high_states
    assert censorship_params_to_json(back) == text

    empty = CensorshipParams(threshold_state=0, threshold_prob=0.0, pooling_signal=None)
    round2 = censorship_params_from_json(censorship_params_to_json(empty))
    assert round2.pooling_signal is None
