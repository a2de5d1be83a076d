"""Threshold-pool solvers for a state-independent sender payoff.

At every rationality level the sender's optimum pools the low-ranked
states (plus a fractional slice of one threshold state) at a single
nonpositive signal and reveals the rest. `rational_optimal` computes the
step-response optimum in closed form; `quantal_optimal` pins the finite-
level optimum through the tangency anchor of the response curve. The
module also ships the padding helper that puts a zero-weight state on
each side of zero, a monotonicity sweep for the threshold as the level
rises, a benchmark search over two-pool schemes, and the instance family
on which two-pool schemes trail the optimum by a factor that grows with
the state count.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass

from ._util import (
    golden_max,
    log1pexp,
    log_weighted_mean,
    logsumexp,
    shifted_weight_sum,
)
from .model import (
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    ValidationError,
    censorship_params,
    evaluate_log_payoff,
    evaluate_payoff,
    log_response,
    make_censorship,
    make_direct,
    response,
    response_derivative,
)

__all__ = [
    "TangentSolution",
    "SisuSolution",
    "MonotonicityReport",
    "SearchResult",
    "rational_optimal",
    "kappa",
    "kappa_inverse",
    "pool_probability",
    "normalize_instance",
    "quantal_optimal",
    "threshold_monotonicity_check",
    "direct_lowerbound_instance",
    "best_direct",
]

_RESIDUAL_TOL = 1e-8    # optimality-system constraints at the returned solution
_TANGENT_TOL = 1e-10    # tangency residual the anchor bisection must reach
_BISECT_CAP = 200       # bracket expansions / bisection steps before giving up


@dataclass(frozen=True)
class TangentSolution:
    """Finite-level threshold solution in boundary/anchor coordinates.

    delta_dd >= 0 is the revealed-side boundary, delta_d <= 0 the pooling
    point (where the tangent of the response curve at delta_d passes
    through the curve at delta_dd). residuals holds the five optimality-
    system checks: threshold slack, tangency, boundary window, pooling
    anchor and sign, and slice range; each is <= 1e-8 on construction.
    """

    delta_dd: float
    delta_d: float
    threshold_state: int
    threshold_prob: float
    residuals: tuple[float, float, float, float, float]


@dataclass(frozen=True)
class SisuSolution:
    """A solved instance: parametric form, scheme, and diagnostics.

    direct_scheme is the payoff-equal two-pool twin (step-response level
    only); tangent carries the boundary/anchor coordinates at finite
    positive levels; note flags conventions such as the level-0 tie.
    """

    params: CensorshipParams
    scheme: Scheme
    direct_scheme: Scheme | None = None
    tangent: TangentSolution | None = None
    note: str | None = None


@dataclass(frozen=True)
class MonotonicityReport:
    """Threshold sweep over an ascending level grid.

    thresholds[k] = (threshold_state, threshold_prob) at levels[k]; ok
    means the pairs never move lexicographically backwards.
    """

    ok: bool
    levels: tuple[RationalityLevel, ...]
    thresholds: tuple[tuple[int, float], ...]
    violations: tuple[str, ...]
    notes: tuple[str, ...]


@dataclass(frozen=True)
class SearchResult:
    """Best scheme found by a benchmark search, with both payoff scales."""

    params: CensorshipParams
    scheme: Scheme
    payoff: float
    log_payoff: float


# ---------------------------------------------------------------------------
# step-response optimum


def _ratio(v: float, u: float) -> float:
    """Pooling rank v/u; payoff-free states sort by the sign of their stake."""
    if u > 0.0:
        return v / u
    return math.inf if v > 0.0 else -math.inf


def rational_optimal(instance: Instance) -> SisuSolution:
    """Optimal scheme for the step-response receiver, in threshold form.

    States are ranked by v_i/u_i (ties broken by index); the threshold is
    the largest-ranked state whose strictly-lower-ranked states have a
    nonpositive pooled stake sum, and the threshold slice is the largest
    that keeps the pool's stake sum nonpositive. Handles state-dependent
    payoffs too, so the pairing pipeline can reuse it at the step limit.
    """
    m = instance.m
    ratios = [_ratio(instance.v[i], instance.u[i]) for i in range(m)]
    below_sets = [
        [j for j in range(m) if ratios[j] < ratios[i]] for i in range(m)
    ]
    best: int | None = None
    for i in range(m):
        below = below_sets[i]
        log_w = [instance.log_lam[j] for j in below]
        shift, acc = shifted_weight_sum(log_w, [instance.v[j] for j in below])
        _, acc_abs = shifted_weight_sum(log_w, [abs(instance.v[j]) for j in below])
        if shift != -math.inf and acc > 1e-12 * acc_abs:
            continue
        if (
            best is None
            or ratios[i] > ratios[best]
            or (ratios[i] == ratios[best] and i < best)
        ):
            best = i
    if best is None:
        raise NumericalError("no admissible threshold state")

    below = below_sets[best]
    log_w = [instance.log_lam[j] for j in below]
    shift, acc = shifted_weight_sum(log_w, [instance.v[j] for j in below])
    if instance.v[best] <= 0.0 or instance.log_lam[best] == -math.inf:
        p = 1.0
    elif shift == -math.inf or acc == 0.0:
        p = 0.0
    else:
        den_log = instance.log_lam[best] + math.log(instance.v[best])
        try:
            mag = math.exp(shift + math.log(abs(acc)) - den_log)
        except OverflowError:
            mag = math.inf
        p = min(max(math.copysign(mag, -acc), 0.0), 1.0) + 0.0

    params = censorship_params(instance, below, best, p)
    if params.pooling_signal is not None and params.pooling_signal > 0.0:
        # the exact pooled stake sum is <= 0 by construction, so a positive
        # computed mean is roundoff; the step receiver must not see it
        params = dataclasses.replace(params, pooling_signal=0.0)
    return SisuSolution(
        params=params,
        scheme=make_censorship(instance, params),
        direct_scheme=make_direct(instance, params),
    )


# ---------------------------------------------------------------------------
# tangency anchor


def _require_finite_positive(level: RationalityLevel) -> float:
    if level.is_fully_rational or level.beta == 0.0:
        raise ValidationError("tangency needs a finite positive rationality level")
    return level.beta


def kappa(level: RationalityLevel, delta_dd: float) -> float:
    """Tangency anchor: the unique k <= 0 whose tangent line on the response
    curve passes through the curve point at delta_dd >= 0.

    Solves W'(k) = (W(delta_dd) - W(k)) / (delta_dd - k) by bisection with
    bracket expansion; decreasing in delta_dd with kappa(level, 0) = 0.
    Raises NumericalError if the tangency residual cannot reach 1e-10.
    """
    beta = _require_finite_positive(level)
    if math.isnan(delta_dd) or delta_dd < 0.0:
        raise ValidationError(f"boundary point must be >= 0, got {delta_dd!r}")
    if delta_dd == 0.0 or math.isinf(delta_dd):
        if math.isinf(delta_dd):
            raise ValidationError("boundary point must be finite")
        return 0.0
    w_dd = response(level, delta_dd)

    def residual(k: float) -> float:
        return (w_dd - response(level, k)) - response_derivative(level, k) * (
            delta_dd - k
        )

    # residual(0) >= 0 always; expand left until it goes negative
    hi = 0.0
    lo = -1.0 / beta
    for _ in range(_BISECT_CAP):
        if residual(lo) < 0.0:
            break
        hi = lo
        lo *= 2.0
    else:
        raise NumericalError("tangency bracket expansion failed")
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    k = hi if abs(residual(hi)) <= abs(residual(lo)) else lo
    if abs(residual(k)) > _TANGENT_TOL:
        raise NumericalError(
            f"tangency residual {residual(k)!r} at anchor {k!r} exceeds {_TANGENT_TOL}"
        )
    return k


def kappa_inverse(level: RationalityLevel, anchor: float) -> float:
    """Boundary point whose tangency anchor equals `anchor` <= 0.

    Outer bisection on the (decreasing) anchor map. The bracket starts at
    the flat-tail solution anchor + (1 + e^{-beta * anchor}) / beta, which
    is exact once the response at the boundary underflows, and expands by
    doubling from there; kappa_inverse(level, 0) = 0.
    """
    beta = _require_finite_positive(level)
    if math.isnan(anchor) or anchor > 0.0:
        raise ValidationError(f"anchor must be <= 0, got {anchor!r}")
    if anchor == 0.0:
        return 0.0
    if math.isinf(anchor):
        raise ValidationError("anchor must be finite")
    lo = 0.0
    try:
        hi = max(1.0 / beta, anchor + (1.0 + math.exp(-beta * anchor)) / beta)
    except OverflowError:
        raise NumericalError(
            "anchor inversion exceeds the representable boundary range"
        ) from None
    for _ in range(_BISECT_CAP):
        if math.isinf(hi):
            raise NumericalError(
                "anchor inversion exceeds the representable boundary range"
            )
        if kappa(level, hi) <= anchor:
            break
        lo = hi
        hi *= 2.0
    else:
        raise NumericalError("anchor inversion bracket expansion failed")
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if kappa(level, mid) <= anchor:
            hi = mid
        else:
            lo = mid
    if abs(kappa(level, hi) - anchor) <= abs(kappa(level, lo) - anchor):
        return hi
    return lo


def pool_probability(instance: Instance, level: RationalityLevel, state: int) -> float:
    """Slice of `state` that joins the pool when the boundary sits at its stake.

    p = -(sum_{j<state} lam_j (v_j - k)) / (lam_state (v_state - k)) with
    k the tangency anchor of v_state; may be negative or exceed 1 (the
    caller interprets). Signed zeros are meaningful: +0.0 comes from an
    empty or weightless prefix, -0.0 from a true negative that underflows.
    """
    if not 0 <= state < instance.m:
        raise ValidationError(f"state {state} out of range")
    v_i = instance.v[state]
    if v_i < 0.0:
        raise ValidationError(
            f"boundary state must have a nonnegative stake, got {v_i!r}"
        )
    k = kappa(level, v_i)
    shift, acc = shifted_weight_sum(
        instance.log_lam[:state], [v - k for v in instance.v[:state]]
    )
    if shift == -math.inf or acc == 0.0:
        return 0.0
    gap = v_i - k
    den_log = instance.log_lam[state] + (math.log(gap) if gap > 0.0 else -math.inf)
    if den_log == -math.inf:
        return math.copysign(math.inf, -acc)
    try:
        mag = math.exp(shift + math.log(abs(acc)) - den_log)
    except OverflowError:
        mag = math.inf
    return math.copysign(mag, -acc)


# ---------------------------------------------------------------------------
# padding


def normalize_instance(instance: Instance) -> Instance:
    """Pad with zero-weight states until the stakes straddle zero strictly.

    The padding states carry no prior mass, so every scheme's payoff is
    unchanged; they only give the threshold scan a state on each side of
    zero. Their sender payoff copies u_1, keeping a state-independent
    instance state independent.
    """
    v = list(instance.v)
    u = list(instance.u)
    lam = list(instance.lam)
    log_lam = list(instance.log_lam)
    changed = False
    if v[0] >= 0.0:
        v.insert(0, min(v[0], 0.0) - 1.0)
        u.insert(0, u[0])
        lam.insert(0, 0.0)
        log_lam.insert(0, -math.inf)
        changed = True
    if v[-1] <= 0.0:
        v.append(1.0)
        u.append(u[0])
        lam.append(0.0)
        log_lam.append(-math.inf)
        changed = True
    if not changed:
        return instance
    return Instance(
        v=tuple(v),
        u=tuple(u),
        lam=tuple(lam),
        log_lam=tuple(log_lam),
        log_weight=instance.log_weight,
    )


# ---------------------------------------------------------------------------
# finite-level optimum


def _full_prefix_solution(
    instance: Instance, level: RationalityLevel
) -> tuple[int, float, float, float]:
    """Threshold with a full slice: pool states 0..c entirely.

    Picks the c whose pooled mean, pushed through the inverse anchor map,
    lands the boundary inside [v_c, v_{c+1}); smallest window violation
    wins, larger c breaking ties. Candidates are screened in anchor space
    (the anchor map is decreasing, so the window pulls back to an anchor
    interval) and only the winner's boundary is actually inverted, keeping
    hopeless candidates from demanding astronomically large boundaries.
    """
    best: tuple[float, int, float] | None = None
    for c in range(instance.m):
        mean = log_weighted_mean(instance.log_lam[: c + 1], instance.v[: c + 1])
        if math.isnan(mean):
            continue
        if mean > 1e-12 * (1.0 + abs(instance.v[c])):
            continue
        anchor = min(mean, 0.0)
        upper = instance.v[c + 1] if c + 1 < instance.m else math.inf
        if upper <= 0.0:
            viol = math.inf  # boundary must be >= 0, window ends below it
        else:
            viol = max(0.0, anchor - kappa(level, max(instance.v[c], 0.0)))
            if not math.isinf(upper):
                viol = max(viol, kappa(level, upper) - anchor)
        if best is None or (viol, -c) < (best[0], -best[1]):
            best = (viol, c, anchor)
    if best is None:
        raise NumericalError("no full-prefix pool has a nonpositive mean")
    _, c, anchor = best
    boundary = kappa_inverse(level, anchor)
    upper = instance.v[c + 1] if c + 1 < instance.m else math.inf
    viol = max(0.0, instance.v[c] - boundary, boundary - upper)
    if viol > 1e-9 * (1.0 + abs(instance.v[c])):
        raise NumericalError(
            f"full-slice boundary misses its stake window by {viol!r}"
        )
    return c, 1.0, anchor, boundary


def _checked_tangent(
    instance: Instance,
    level: RationalityLevel,
    i_t: int,
    p_t: float,
    d_d: float,
    d_dd: float,
    params: CensorshipParams,
) -> TangentSolution:
    """Assemble the tangent solution and verify its five constraints."""
    w_dd = response(level, d_dd)
    w_d = response(level, d_d)
    slope = response_derivative(level, d_d)
    r_slack = abs((1.0 - p_t) * (d_dd - instance.v[i_t]))
    r_tangent = abs((w_dd - w_d) - slope * (d_dd - d_d))
    nxt = instance.v[i_t + 1] if i_t + 1 < instance.m else math.inf
    r_window = max(0.0, instance.v[i_t] - d_dd, d_dd - nxt)
    r_anchor = max(0.0, d_d, -d_dd)
    if params.pooling_signal is not None:
        r_anchor = max(r_anchor, abs(params.pooling_signal - d_d))
    r_range = max(0.0, -p_t, p_t - 1.0)
    residuals = (r_slack, r_tangent, r_window, r_anchor, r_range)
    worst = max(residuals)
    if worst > _RESIDUAL_TOL:
        raise NumericalError(
            f"threshold solution violates its optimality system by {worst!r}"
        )
    return TangentSolution(
        delta_dd=d_dd,
        delta_d=d_d,
        threshold_state=i_t,
        threshold_prob=p_t,
        residuals=residuals,
    )


def quantal_optimal(instance: Instance, level: RationalityLevel) -> SisuSolution:
    """Optimal threshold pool at the given rationality level.

    Requires a state-independent sender payoff and stakes that straddle
    zero (see normalize_instance). Scans boundary candidates v_i >= 0 in
    increasing order, keeps the largest whose pool slice is nonnegative
    (IEEE sign decides exact zeros), and either uses that slice directly
    (slice <= 1) or pools a full prefix whose mean inverts onto the
    boundary window (slice > 1, or no admissible candidate). The result
    satisfies the optimality system's five constraints within 1e-8.
    """
    if not instance.is_sisu:
        raise ValidationError(
            "sender payoff is state dependent; use the pairing pipeline in sdsu"
        )
    if level.is_fully_rational:
        return rational_optimal(instance)
    if instance.v[0] >= 0.0 or instance.v[-1] <= 0.0:
        raise ValidationError(
            "stakes must straddle zero; pad the instance with normalize_instance"
        )
    if level.beta == 0.0:
        params = censorship_params(
            instance, range(instance.m - 1), instance.m - 1, 1.0
        )
        return SisuSolution(
            params=params,
            scheme=make_censorship(instance, params),
            note=(
                "level-0 receiver: every scheme earns half the expected sender"
                " payoff; returning the single pool by convention"
            ),
        )

    chosen: tuple[int, float] | None = None
    for i in range(instance.m):
        if instance.v[i] < 0.0:
            continue
        p = pool_probability(instance, level, i)
        if math.copysign(1.0, p) > 0.0:
            chosen = (i, p)
    if chosen is not None and chosen[1] <= 1.0:
        i_t, p_t = chosen
        d_dd = instance.v[i_t]
        d_d = kappa(level, d_dd)
    else:
        i_t, p_t, d_d, d_dd = _full_prefix_solution(instance, level)

    params = censorship_params(instance, range(i_t), i_t, p_t)
    tangent = _checked_tangent(instance, level, i_t, p_t, d_d, d_dd, params)
    return SisuSolution(
        params=params,
        scheme=make_censorship(instance, params),
        tangent=tangent,
    )


# ---------------------------------------------------------------------------
# threshold monotonicity sweep


def threshold_monotonicity_check(
    instance: Instance,
    beta_grid: Sequence[RationalityLevel | float | None],
) -> MonotonicityReport:
    """Solve along an ascending level grid and check the threshold pair
    (state, slice) never moves lexicographically backwards.

    Level 0 entries are skipped with a note (every scheme ties there);
    the step-response limit may close the grid.
    """
    levels = [
        b if isinstance(b, RationalityLevel) else RationalityLevel(b)
        for b in beta_grid
    ]
    if not levels:
        raise ValidationError("level grid must be nonempty")
    keys = [math.inf if lvl.is_fully_rational else lvl.beta for lvl in levels]
    if any(keys[i] > keys[i + 1] for i in range(len(keys) - 1)):
        raise ValidationError("level grid must be sorted ascending")

    norm = normalize_instance(instance)
    notes: list[str] = []
    used: list[RationalityLevel] = []
    thresholds: list[tuple[int, float]] = []
    for lvl, key in zip(levels, keys):
        if key == 0.0:
            notes.append("level 0 skipped: every scheme ties, no canonical threshold")
            continue
        sol = (
            rational_optimal(norm)
            if lvl.is_fully_rational
            else quantal_optimal(norm, lvl)
        )
        used.append(lvl)
        thresholds.append((sol.params.threshold_state, sol.params.threshold_prob))

    violations: list[str] = []
    for a in range(len(used) - 1):
        (i0, p0), (i1, p1) = thresholds[a], thresholds[a + 1]
        if i1 < i0 or (i1 == i0 and p1 < p0 - 1e-9):
            violations.append(
                f"threshold moved from (state {i0}, slice {p0!r}) at level "
                f"{used[a]} back to (state {i1}, slice {p1!r}) at level {used[a + 1]}"
            )
    return MonotonicityReport(
        ok=not violations,
        levels=tuple(used),
        thresholds=tuple(thresholds),
        violations=tuple(violations),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# the family where two-pool schemes trail by a growing factor


def direct_lowerbound_instance(m: int) -> tuple[Instance, RationalityLevel]:
    """Family on which the best two-pool scheme loses a factor ~m.

    m >= 2 states with stakes v_i = i, flat sender payoff, level e^m, and
    log-domain prior weights proportional to exp(level * i) + 1. The
    weights underflow linear space for moderate m, so payoffs must be
    compared through their logarithms.
    """
    if m < 2:
        raise ValidationError(f"the family needs at least 2 states, got {m}")
    beta = math.exp(m)
    log_raw = [log1pexp(beta * i) for i in range(1, m + 1)]
    inst = Instance.from_log_weights(
        log_raw, [float(i) for i in range(1, m + 1)], [1.0] * m
    )
    return inst, RationalityLevel(beta)


# ---------------------------------------------------------------------------
# benchmark search over two-pool schemes


def _direct_log_payoff(
    instance: Instance, level: RationalityLevel, i_t: int, p_t: float
) -> float:
    """Log payoff of the two-pool scheme (threshold i_t, slice p_t)."""
    log_lam, v, u = instance.log_lam, instance.v, instance.u
    log_p = math.log(p_t) if p_t > 0.0 else -math.inf
    log_q = math.log1p(-p_t) if p_t < 1.0 else -math.inf
    low_w = list(log_lam[:i_t]) + [log_lam[i_t] + log_p]
    low_v = list(v[: i_t + 1])
    low_u = list(u[: i_t + 1])
    high_w = [log_lam[i_t] + log_q] + list(log_lam[i_t + 1 :])
    high_v = list(v[i_t:])
    high_u = list(u[i_t:])
    terms = []
    for side_w, side_v, side_u in ((low_w, low_v, low_u), (high_w, high_v, high_u)):
        mean = log_weighted_mean(side_w, side_v)
        if math.isnan(mean):
            continue
        gain = logsumexp(
            [
                w + math.log(uu)
                for w, uu in zip(side_w, side_u)
                if uu > 0.0 and w > -math.inf
            ]
        )
        if gain == -math.inf:
            continue
        terms.append(gain + log_response(level, mean))
    return logsumexp(terms)


def best_direct(
    instance: Instance, level: RationalityLevel, grid_points: int = 10_000
) -> SearchResult:
    """Best two-pool scheme found over all thresholds and a slice grid.

    For each threshold state the slice runs over `grid_points` values on
    [0, 1], then the best cell is refined by golden section, so the result
    is at least as good as the all-in-one pool and as every grid point.
    """
    if grid_points < 2:
        raise ValidationError("the slice grid needs at least 2 points")
    step = 1.0 / (grid_points - 1)
    best: tuple[float, int, float] | None = None
    for i_t in range(instance.m):

        def objective(p: float, i_t: int = i_t) -> float:
            return _direct_log_payoff(instance, level, i_t, p)

        cell_p, cell_v = 0.0, objective(0.0)
        for j in range(1, grid_points):
            p = 1.0 if j == grid_points - 1 else j * step
            val = objective(p)
            if val > cell_v:
                cell_p, cell_v = p, val
        ref_p, ref_v = golden_max(
            objective, max(0.0, cell_p - step), min(1.0, cell_p + step)
        )
        if ref_v > cell_v:
            cell_p, cell_v = ref_p, ref_v
        if best is None or cell_v > best[0]:
            best = (cell_v, i_t, cell_p)

    _, i_t, p_t = best
    params = censorship_params(instance, range(i_t), i_t, p_t)
    scheme = make_direct(instance, params)
    return SearchResult(
        params=params,
        scheme=scheme,
        payoff=evaluate_payoff(instance, level, scheme),
        log_payoff=evaluate_log_payoff(instance, level, scheme),
    )
