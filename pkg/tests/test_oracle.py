"""Oracle suite: simplex determinism and duality, grid LP, brute-force
binary search, and the Gumbel-shock receiver simulation."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from persuasion import (
    FULLY_RATIONAL,
    Instance,
    RationalityLevel,
    Scheme,
    Signal,
    ValidationError,
    evaluate_payoff,
    full_reveal,
    no_info,
    response,
    validate_scheme,
)
from persuasion.oracle import (
    InfeasibleError,
    UnboundedError,
    build_grid,
    exhaustive_binary_search,
    grid_lp_optimal,
    gumbel_simulate,
    simplex_solve,
)

from helpers import random_sisu_instance

FIG = Instance.from_weights([0.2] * 5, [-1.5, 0.5, 1.0, 1.5, 2.0], [1.0] * 5)
EXAMPLE_BINARY = Instance.from_weights([0.5, 0.5], [1.0, 2.0], [0.0, 1.0])


# ---------------------------------------------------------------------------
# simplex


def test_simplex_known_box_lp():
    res = simplex_solve(
        [1.0, 1.0],
        a_ub=[[1.0, 0.0], [0.0, 1.0]],
        b_ub=[1.0, 2.0],
    )
    assert res.value == pytest.approx(3.0, abs=1e-12)
    assert res.x == pytest.approx((1.0, 2.0))
    assert res.y_ub == pytest.approx((1.0, 1.0))
    assert res.duality_gap <= 1e-12


def test_simplex_equality_lp_with_duals():
    # max 2x + y  s.t.  x + y = 1,  x <= 0.6
    res = simplex_solve(
        [2.0, 1.0],
        a_ub=[[1.0, 0.0]],
        b_ub=[0.6],
        a_eq=[[1.0, 1.0]],
        b_eq=[1.0],
    )
    assert res.value == pytest.approx(1.6, abs=1e-12)
    assert res.x == pytest.approx((0.6, 0.4))
    # dual: eq row worth 1, the x-cap worth the extra unit of x
    assert res.y_eq == pytest.approx((1.0,))
    assert res.y_ub == pytest.approx((1.0,))
    assert res.dual_value == pytest.approx(1.6, abs=1e-12)


def test_simplex_minimize_orientation():
    res = simplex_solve(
        [1.0, 2.0],
        a_ub=[[-1.0, -1.0]],
        b_ub=[-1.0],
        maximize=False,
    )
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.x == pytest.approx((1.0, 0.0))


def test_simplex_unbounded_and_infeasible():
    with pytest.raises(UnboundedError):
        simplex_solve([1.0], a_ub=[[-1.0]], b_ub=[0.0])
    with pytest.raises(InfeasibleError):
        simplex_solve(
            [1.0],
            a_ub=[[1.0], [-1.0]],
            b_ub=[1.0, -2.0],  # x <= 1 and x >= 2
        )


def test_simplex_shape_mismatch():
    with pytest.raises(ValidationError):
        simplex_solve([1.0, 1.0], a_ub=[[1.0]], b_ub=[1.0])


def test_simplex_deterministic():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 4))
    x0 = rng.uniform(0.5, 1.0, size=4)
    b = a @ x0 + rng.uniform(0.1, 1.0, size=6)
    c = rng.normal(size=4)
    first = simplex_solve(c, a_ub=np.vstack([a, np.eye(4)]), b_ub=np.concatenate([b, x0 + 5.0]))
    second = simplex_solve(c, a_ub=np.vstack([a, np.eye(4)]), b_ub=np.concatenate([b, x0 + 5.0]))
    assert first.x == second.x
    assert first.value == second.value
    assert first.iterations == second.iterations


def _vertex_enum_max(c, a_ub, b_ub):
    """Enumerate all vertices of {a_ub x <= b_ub, x >= 0} and maximize c.x."""
    n = len(c)
    rows = [list(r) for r in a_ub] + [
        [-1.0 if j == k else 0.0 for j in range(n)] for k in range(n)
    ]
    rhs = list(b_ub) + [0.0] * n
    best = None
    for picks in combinations(range(len(rows)), n):
        a = np.array([rows[r] for r in picks])
        b = np.array([rhs[r] for r in picks])
        if abs(np.linalg.det(a)) < 1e-9:
            continue
        x = np.linalg.solve(a, b)
        if np.all(np.array(rows) @ x <= np.array(rhs) + 1e-9):
            val = float(np.dot(c, x))
            if best is None or val > best:
                best = val
    return best


def test_simplex_matches_vertex_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = 3
        a = rng.normal(size=(5, n))
        x0 = rng.uniform(0.2, 1.0, size=n)
        b = a @ x0 + rng.uniform(0.05, 0.5, size=5)
        cap = np.full(n, 4.0)
        a_full = np.vstack([a, np.eye(n)])
        b_full = np.concatenate([b, cap])
        c = rng.normal(size=n)
        res = simplex_solve(c, a_ub=a_full, b_ub=b_full)
        truth = _vertex_enum_max(c, a_full.tolist(), b_full.tolist())
        assert res.value == pytest.approx(truth, abs=1e-8)
        assert res.duality_gap <= 1e-8 * (1.0 + abs(res.value))


def test_simplex_duality_certificate_medium_lp():
    rng = np.random.default_rng(11)
    n, n_ub, n_eq = 12, 24, 4
    a_ub = rng.normal(size=(n_ub, n))
    a_eq = rng.normal(size=(n_eq, n))
    x0 = rng.uniform(0.2, 1.0, size=n)
    b_ub = a_ub @ x0 + rng.uniform(0.05, 1.0, size=n_ub)
    b_eq = a_eq @ x0
    a_ub_full = np.vstack([a_ub, np.eye(n)])
    b_ub_full = np.concatenate([b_ub, x0 + 5.0])
    c = rng.normal(size=n)
    res = simplex_solve(c, a_ub=a_ub_full, b_ub=b_ub_full, a_eq=a_eq, b_eq=b_eq)

    x = np.asarray(res.x)
    assert np.all(x >= -1e-9)
    assert np.all(a_ub_full @ x <= b_ub_full + 1e-8)
    assert np.abs(a_eq @ x - b_eq).max() <= 1e-8
    # dual feasibility certificate for the max orientation
    y_ub = np.asarray(res.y_ub)
    y_eq = np.asarray(res.y_eq)
    assert np.all(y_ub >= -1e-9)
    reduced = c - a_ub_full.T @ y_ub - a_eq.T @ y_eq
    assert np.all(reduced <= 1e-7)
    assert res.duality_gap <= 1e-8 * (1.0 + abs(res.value))


# ---------------------------------------------------------------------------
# grid LP


def test_build_grid_contains_specials():
    grid = build_grid(FIG, RationalityLevel(1.0), grid_points=51, extra_points=(0.123,))
    assert 0.0 in grid
    assert 0.123 in grid
    for v in FIG.v:
        assert v in grid
    assert list(grid) == sorted(set(grid))
    assert grid[0] == pytest.approx(-3.5)
    assert grid[-1] == pytest.approx(4.0)
    with pytest.raises(ValidationError):
        build_grid(FIG, RationalityLevel(1.0), grid_points=1)
    with pytest.raises(ValidationError):
        build_grid(FIG, RationalityLevel(1.0), grid_points=11, extra_points=(math.inf,))


def test_grid_lp_fully_rational_pinned_value():
    res = grid_lp_optimal(FIG, FULLY_RATIONAL, grid_points=101)
    assert res.value == pytest.approx(0.6, abs=1e-9)
    assert validate_scheme(FIG, res.scheme).ok
    assert evaluate_payoff(FIG, FULLY_RATIONAL, res.scheme) == pytest.approx(
        res.value, abs=1e-9
    )
    assert res.duality_gap <= 1e-9
    assert res.primal_residual <= 1e-9
    assert res.dual_residual <= 1e-8


def test_grid_lp_binary_pinned_value():
    res = grid_lp_optimal(EXAMPLE_BINARY, RationalityLevel(1.0), grid_points=401)
    assert res.value == pytest.approx(0.09121276190317824, abs=1e-10)
    assert res.duality_gap <= 1e-9
    assert res.dual_residual <= 1e-8


def test_grid_lp_beats_reference_schemes():
    rng = np.random.default_rng(23)
    for _ in range(3):
        inst = random_sisu_instance(rng, 4)
        level = RationalityLevel(2.0)
        # the prior mean must be a grid point for the single-pool scheme
        # to be representable
        res = grid_lp_optimal(
            inst, level, grid_points=101, extra_points=(inst.prior_mean(),)
        )
        for scheme in (full_reveal(inst), no_info(inst)):
            assert res.value >= evaluate_payoff(inst, level, scheme) - 1e-9


def test_grid_lp_refinement_weakly_improves():
    level = RationalityLevel(1.0)
    vals = [
        grid_lp_optimal(EXAMPLE_BINARY, level, grid_points=g).value
        for g in (101, 201, 401)
    ]
    assert vals[0] <= vals[1] + 1e-9
    assert vals[1] <= vals[2] + 1e-9


def test_grid_lp_presolves_weightless_states():
    padded = Instance.from_weights(
        [0.0, 0.2, 0.2, 0.2, 0.2, 0.2], [-9.0, -1.5, 0.5, 1.0, 1.5, 2.0], [1.0] * 6
    )
    res = grid_lp_optimal(padded, FULLY_RATIONAL, grid_points=101)
    assert res.value == pytest.approx(0.6, abs=1e-9)
    assert validate_scheme(padded, res.scheme).ok
    totals = res.scheme.state_totals()
    assert totals[0] == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# exhaustive binary search


def test_exhaustive_binary_no_info_case():
    # prior mean 1.5 > 0 but pooling everything still beats any split here
    params, value = exhaustive_binary_search(EXAMPLE_BINARY, RationalityLevel(1.0))
    assert params.threshold_prob == pytest.approx(1.0, abs=1e-6)
    assert value == pytest.approx(0.09121276190317824, abs=1e-9)
    assert params.pooling_signal == pytest.approx(1.5, abs=1e-6)


def test_exhaustive_binary_single_point_grid():
    inst = Instance.from_weights([0.4, 0.6], [-1.0, 2.0], [1.0, 1.0])
    params, value = exhaustive_binary_search(
        inst, RationalityLevel(1.0), delta_grid=[inst.v[0]]
    )
    assert params.threshold_prob == 0.0
    assert value == pytest.approx(
        evaluate_payoff(inst, RationalityLevel(1.0), full_reveal(inst)), abs=1e-12
    )


def test_exhaustive_binary_rejects_wrong_size():
    with pytest.raises(ValidationError):
        exhaustive_binary_search(FIG, RationalityLevel(1.0))


# ---------------------------------------------------------------------------
# receiver simulation


def test_gumbel_simulation_pinned_rates():
    report = gumbel_simulate(FIG, RationalityLevel(1.0), no_info(FIG), 1_000_000, 7)
    assert report.rates == (0.33192,)
    assert report.expected[0] == pytest.approx(0.33181222783183395, abs=1e-15)
    bound = 4.0 * math.sqrt(report.expected[0] * (1 - report.expected[0]) / report.n)
    assert abs(report.rates[0] - report.expected[0]) <= bound


def test_gumbel_simulation_level_zero_is_a_coin():
    report = gumbel_simulate(FIG, RationalityLevel(0.0), no_info(FIG), 1_000_000, 7)
    assert report.rates == (0.500128,)


def test_gumbel_simulation_extreme_stakes_saturate():
    inst = Instance.from_weights([0.5, 0.5], [-10.0, 10.0], [1.0, 1.0])
    report = gumbel_simulate(
        inst, RationalityLevel(2.0), full_reveal(inst), 100_000, 11
    )
    assert report.rates == (1.0, 0.0)


def test_gumbel_simulation_deterministic():
    a = gumbel_simulate(FIG, RationalityLevel(1.0), no_info(FIG), 10_000, 42)
    b = gumbel_simulate(FIG, RationalityLevel(1.0), no_info(FIG), 10_000, 42)
    assert a == b


def test_gumbel_simulation_argument_errors():
    with pytest.raises(ValidationError):
        gumbel_simulate(FIG, FULLY_RATIONAL, no_info(FIG), 100, 1)
    with pytest.raises(ValidationError):
        gumbel_simulate(FIG, RationalityLevel(1.0), no_info(FIG), 0, 1)
