"""Solvers for a state-dependent sender payoff.

With two states the optimum is still a censorship scheme; `binary_optimal`
pins it by root-finding a monotone trade-off curve. For more states the
module follows the constructive pipeline: decompose any scheme into
signals carried by at most two states, re-optimize every state pair in
isolation, and round the resulting pair structure through an assignment
LP into a guaranteed 4-approximation with at most 2m signals. Two single-
pair reductions squeeze the same structure into a censorship or a two-pool
scheme at an O(m) factor. The module also ships the instance family whose
optimum needs many signals per state, together with its two-state pooling
schemes and the many-signal witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._util import log_weighted_mean, logsumexp
from .model import (
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    Signal,
    ValidationError,
    censorship_params,
    full_reveal,
    log_response,
    make_censorship,
    no_info,
    response,
)
from .oracle import SimplexResult, grid_lp_optimal, simplex_solve
from .sisu import rational_optimal

__all__ = [
    "BinarySolution",
    "GammaCurve",
    "PairLP",
    "binary_gamma",
    "binary_optimal",
    "build_gap_lp",
    "censorship_m_approx",
    "decompose_binary_support",
    "direct_m_approx",
    "four_approx",
    "lowerbound_instance",
    "lowerbound_witness",
    "optimal_pairwise",
    "pair_pool_scheme",
    "pairwise_reoptimize",
    "solve_gap_fractional",
    "solve_gap_integral",
]

_BISECT_CAP = 200       # bisection steps for the trade-off root
_HALF_TOL = 1e-9        # slack allowed in the integral >= fractional/2 check
_INTEGRAL_STATE_CAP = 10  # branch-and-bound assignment scales to this many states

REGIME_FULL_REVEAL = "full-reveal"
REGIME_PARTIAL = "partial"
REGIME_NO_INFO = "no-info"


# ---------------------------------------------------------------------------
# two states: the exact censorship optimum


def _require_finite_positive(level: RationalityLevel) -> float:
    if level.is_fully_rational:
        raise ValidationError("level must be finite; the step response has no trade-off curve")
    if level.beta <= 0.0:
        raise ValidationError(f"level must be positive, got {level.beta!r}")
    return level.beta


def _require_binary(instance: Instance) -> None:
    if instance.m != 2:
        raise ValidationError(f"two-state solver got {instance.m} states")


def _slope_over_tangent(beta: float, level: RationalityLevel, delta: float, v2: float) -> float:
    """(W(v2) - W(delta)) / (v2 - delta) divided by W'(delta), in stable form.

    Equals expm1(x)/x * W(v2)/W(delta) with x = beta (v2 - delta); always
    positive, and +inf once the log-domain value overflows.
    """
    x = beta * (v2 - delta)
    if x <= 30.0:
        log_ratio = math.log(math.expm1(x)) - math.log(x)
    else:
        # expm1 overflows long before the ratio does
        log_ratio = x - math.log(x) + math.log1p(-math.exp(-x))
    log_s = log_ratio + log_response(level, v2) - log_response(level, delta)
    try:
        return math.exp(log_s)
    except OverflowError:
        return math.inf


def binary_gamma(instance: Instance, level: RationalityLevel, delta: float) -> float:
    """Trade-off curve between the two states at pool position delta.

    The pooled signal is worth deepening exactly while gamma(delta) stays
    above u1/u2; the curve is strictly decreasing on (v1, v2). +inf when
    the value overflows (possible far below zero); never NaN.
    """
    _require_binary(instance)
    beta = _require_finite_positive(level)
    v1, v2 = instance.v
    if not v1 < delta < v2:
        raise ValidationError(
            f"pool position must lie strictly between the stakes, got {delta!r}"
        )
    r = (v1 - delta) / (v2 - delta)
    s = _slope_over_tangent(beta, level, delta, v2)
    if math.isinf(s):
        return math.inf
    return r + s * (1.0 - r)


@dataclass(frozen=True)
class GammaCurve:
    """Evaluable trade-off curve of a two-state instance at a fixed level.

    Construction samples the open stake interval and insists the curve is
    strictly decreasing; a violation is numerical trouble, not bad input.
    """

    instance: Instance
    level: RationalityLevel

    def __post_init__(self) -> None:
        _require_binary(self.instance)
        _require_finite_positive(self.level)
        values = self.samples(17)
        if any(a <= b for a, b in zip(values, values[1:])):
            raise NumericalError("trade-off curve failed the decreasing check")

    def __call__(self, delta: float) -> float:
        return binary_gamma(self.instance, self.level, delta)

    def samples(self, n: int = 17) -> tuple[float, ...]:
        """Curve values on n points of the open stake interval, ascending."""
        if n < 2:
            raise ValidationError("sampling needs at least 2 points")
        v1, v2 = self.instance.v
        pad = 1e-9 * (v2 - v1)
        step = (v2 - v1 - 2.0 * pad) / (n - 1)
        return tuple(self(v1 + pad + k * step) for k in range(n))


@dataclass(frozen=True)
class BinarySolution:
    """Two-state censorship optimum: parametric form, scheme, diagnostics.

    regime records which branch produced the pool: full revelation, a
    partial interior pool, or pooling everything at the prior mean.
    delta_hat is the interior root of the trade-off curve when one was
    bracketed, None otherwise.
    """

    params: CensorshipParams
    scheme: Scheme
    regime: str
    delta_hat: float | None = None
    note: str | None = None


def _binary_params(instance: Instance, threshold_prob: float) -> CensorshipParams:
    # state 0 pools fully, state 1 contributes the threshold_prob slice
    return censorship_params(instance, {0}, 1, threshold_prob)


def _regime_of(scheme: Scheme) -> str:
    if all(len(sig.support) == 1 for sig in scheme.signals):
        return REGIME_FULL_REVEAL
    if len(scheme.signals) == 1:
        return REGIME_NO_INFO
    return REGIME_PARTIAL


def binary_optimal(instance: Instance, level: RationalityLevel) -> BinarySolution:
    """Exact two-state optimum: pool state 0 plus a slice of state 1.

    Root-finds the trade-off curve at u1/u2 and clamps the pool position
    into [v1, prior mean]; the slice follows from plausibility. The step-
    response limit delegates to the ranked-threshold solver, level 0 ties
    every scheme, and a payoff-free high state makes revelation exact.
    """
    _require_binary(instance)
    v1, v2 = instance.v
    u1, u2 = instance.u

    if level.is_fully_rational:
        sol = rational_optimal(instance)
        return BinarySolution(
            params=sol.params,
            scheme=sol.scheme,
            regime=_regime_of(sol.scheme),
            note="step-response limit solved by the ranked-threshold rule",
        )
    if level.beta == 0.0:
        return BinarySolution(
            params=_binary_params(instance, 1.0),
            scheme=no_info(instance),
            regime=REGIME_NO_INFO,
            note="level 0 responds 1/2 to every signal; all schemes tie",
        )

    if instance.lam[0] == 0.0 or instance.lam[1] == 0.0:
        params = _binary_params(instance, 0.0)
        return BinarySolution(
            params=params,
            scheme=make_censorship(instance, params),
            regime=REGIME_FULL_REVEAL,
            note="one state carries no prior weight; revelation is optimal",
        )
    if u1 == 0.0 and u2 == 0.0:
        params = _binary_params(instance, 0.0)
        return BinarySolution(
            params=params,
            scheme=make_censorship(instance, params),
            regime=REGIME_FULL_REVEAL,
            note="sender payoff is identically zero; every scheme ties",
        )
    if u2 == 0.0:
        # only the low state pays; its signals cannot sit below v1, so
        # revelation is exactly optimal
        params = _binary_params(instance, 0.0)
        return BinarySolution(
            params=params,
            scheme=make_censorship(instance, params),
            regime=REGIME_FULL_REVEAL,
            note="payoff-free high state; revelation is exact",
        )

    target = u1 / u2
    mean = instance.prior_mean()
    pad = 1e-12 * (v2 - v1)
    lo, hi = v1 + pad, v2 - pad
    delta_hat: float | None = None
    if binary_gamma(instance, level, lo) <= target:
        # the curve starts at or below the target: pooling never pays
        delta_dag = v1
        regime = REGIME_FULL_REVEAL
    elif binary_gamma(instance, level, hi) >= target:
        # the curve never reaches the target: pool everything
        delta_dag = mean
        regime = REGIME_NO_INFO
    else:
        for _ in range(_BISECT_CAP):
            mid = 0.5 * (lo + hi)
            if binary_gamma(instance, level, mid) > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * (1.0 + abs(v1) + abs(v2)):
                break
        delta_hat = 0.5 * (lo + hi)
        if delta_hat >= mean:
            delta_dag = mean
            regime = REGIME_NO_INFO
        else:
            delta_dag = delta_hat
            regime = REGIME_PARTIAL

    l1, l2 = instance.lam
    if regime == REGIME_NO_INFO:
        prob = 1.0  # the full pool sits exactly at the prior mean
    else:
        prob = l1 * (delta_dag - v1) / (l2 * (v2 - delta_dag))
    params = _binary_params(instance, min(max(prob, 0.0), 1.0))
    return BinarySolution(
        params=params,
        scheme=make_censorship(instance, params),
        regime=regime,
        delta_hat=delta_hat,
    )


# ---------------------------------------------------------------------------
# any scheme -> signals carried by at most two states


def decompose_binary_support(
    instance: Instance, level: RationalityLevel, scheme: Scheme
) -> Scheme:
    """Split every signal into sub-signals carried by at most two states.

    Each sub-signal keeps the parent's position, so plausibility forces
    the same response weight and the payoff is preserved exactly; per-
    state masses telescope back to the parent's. Pairing is greedy: one
    state from each side of the position, matched by prior-weighted
    moment, at most support-1 sub-signals per parent.
    """
    out: list[Signal] = []
    for sig in scheme.signals:
        if len(sig.support) <= 2:
            out.append(sig)
            continue
        out.extend(_split_signal(instance, sig))
    return Scheme.raw(scheme.num_states, out)


def _split_signal(instance: Instance, sig: Signal) -> list[Signal]:
    delta = sig.delta
    pieces: list[tuple[float, dict[int, float]]] = []
    below: list[list[float]] = []  # [state, mass, moment], moment > 0
    above: list[list[float]] = []
    for state, mass in sig.mass:
        weight = instance.lam[state]
        moment = weight * mass * abs(instance.v[state] - delta)
        if instance.v[state] == delta or weight == 0.0 or moment == 0.0:
            # carries no moment: plausible on its own at the parent position
            pieces.append((delta, {state: mass}))
        elif instance.v[state] < delta:
            below.append([state, mass, moment])
        else:
            above.append([state, mass, moment])

    last_with: dict[int, int] = {}  # state -> index in pieces of its last pair
    while below and above:
        b, a = below[0], above[0]
        if len(below) == 1 and len(above) == 1:
            # flush both remainders; the parent's slack lands here
            pieces.append((delta, {int(b[0]): b[1], int(a[0]): a[1]}))
            last_with[int(b[0])] = last_with[int(a[0])] = len(pieces) - 1
            below.pop(0)
            above.pop(0)
            continue
        if b[2] <= a[2]:
            frac = b[2] / a[2]
            used = a[1] * frac
            pieces.append((delta, {int(b[0]): b[1], int(a[0]): used}))
            last_with[int(b[0])] = last_with[int(a[0])] = len(pieces) - 1
            a[1] -= used
            a[2] -= b[2]
            below.pop(0)
            if a[1] <= 0.0 or a[2] <= 0.0:
                above.pop(0)
        else:
            frac = a[2] / b[2]
            used = b[1] * frac
            pieces.append((delta, {int(b[0]): used, int(a[0]): a[1]}))
            last_with[int(b[0])] = last_with[int(a[0])] = len(pieces) - 1
            b[1] -= used
            b[2] -= a[2]
            above.pop(0)
            if b[1] <= 0.0 or b[2] <= 0.0:
                below.pop(0)
    for state, mass, _ in below + above:
        # roundoff stragglers: fold into the state's last pair, else stand
        # alone (their moment is within the parent's plausibility slack)
        state = int(state)
        if mass <= 0.0:
            continue
        if state in last_with:
            _, acc = pieces[last_with[state]]
            acc[state] = acc.get(state, 0.0) + mass
        else:
            pieces.append((delta, {state: mass}))
    return [Signal.of(d, masses) for d, masses in pieces]


# ---------------------------------------------------------------------------
# re-optimize every pooled pair in isolation


def _pair_instance(instance: Instance, i: int, j: int, wi: float, wj: float) -> Instance:
    """Two-state instance seen inside a pool of states i and j.

    wi, wj are the pooled prior masses; the constructor renormalizes.
    """
    v = (instance.v[i], instance.v[j])
    u = (instance.u[i], instance.u[j])
    log_w = []
    for state, w in ((i, wi), (j, wj)):
        if w > 0.0:
            log_w.append(instance.log_lam[state] + math.log(w))
        else:
            log_w.append(-math.inf)
    return Instance.from_log_weights(log_w, v, u)


def pairwise_reoptimize(
    instance: Instance, level: RationalityLevel, scheme: Scheme
) -> Scheme:
    """Replace each pair's pooled signals by that pair's exact optimum.

    Aggregates the masses every unordered state pair sends to shared
    signals, solves the two-state instance those masses induce, and scales
    the solution back. Payoff never decreases; the output pools each pair
    on at most one signal and otherwise reveals, so it carries at most
    m(m+1)/2 signals.
    """
    singleton = [0.0] * instance.m
    pairs: dict[tuple[int, int], list[float]] = {}
    passthrough: list[Signal] = []
    for sig in scheme.signals:
        supp = sig.support
        if len(supp) == 1:
            singleton[supp[0]] += sig.mass[0][1]
        elif len(supp) == 2:
            i, j = supp
            acc = pairs.setdefault((i, j), [0.0, 0.0])
            acc[0] += sig.mass[0][1]
            acc[1] += sig.mass[1][1]
        else:
            raise ValidationError(
                "signals must be carried by at most two states; "
                "run decompose_binary_support first"
            )

    out: list[Signal] = []
    for (i, j), (pi, pj) in sorted(pairs.items()):
        if instance.log_lam[i] == -math.inf and instance.log_lam[j] == -math.inf:
            # no prior weight anywhere in the pair: keep its signals verbatim
            passthrough.extend(
                sig for sig in scheme.signals if sig.support == (i, j)
            )
            continue
        sub = binary_optimal(_pair_instance(instance, i, j, pi, pj), level)
        for sig in sub.scheme.signals:
            scaled: dict[int, float] = {}
            for state, mass in sig.mass:
                full_state, pool_mass = ((i, pi), (j, pj))[state]
                if pool_mass * mass > 0.0:
                    scaled[full_state] = pool_mass * mass
            if not scaled:
                continue
            if len(scaled) == 1:
                ((state, mass),) = scaled.items()
                singleton[state] += mass
            else:
                out.append(Signal.of(sig.delta, scaled))
    for state, mass in enumerate(singleton):
        if mass > 0.0:
            out.append(Signal.of(instance.v[state], {state: mass}))
    return Scheme.raw(instance.m, out + passthrough)


def optimal_pairwise(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: tuple[float, ...] = (),
) -> Scheme:
    """Best pair-structured scheme: grid seed, decompose, re-optimize pairs.

    The result's payoff is at least the grid LP's, every signal is carried
    by at most two states, and each pair pools on at most one signal.
    """
    seed = grid_lp_optimal(instance, level, grid_points, extra_points)
    split = decompose_binary_support(instance, level, seed.scheme)
    return pairwise_reoptimize(instance, level, split)


# ---------------------------------------------------------------------------
# assignment LP over the pair structure


@dataclass(frozen=True)
class PairLP:
    """Assignment relaxation of a pair-structured scheme.

    Edge (i, j) stands for the signal the pair pools on, oriented so state
    i carries at least state j's emission mass there; i == j stands for a
    state's revealed mass. reward is the signal's payoff rate per unit of
    state-i mass, cost the mass ratio that a unit of state i drags along
    from state j, and mass state i's actual emission (the embedding that
    makes the source scheme a feasible assignment).
    """

    num_states: int
    edges: tuple[tuple[int, int], ...]
    sigma: tuple[float, ...]
    reward: tuple[float, ...]
    cost: tuple[float, ...]
    mass: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.edges)
        if not (len(self.sigma) == len(self.reward) == len(self.cost) == len(self.mass) == n):
            raise ValidationError("edge attribute lengths must agree")
        seen = set()
        for (i, j), reward, cost in zip(self.edges, self.reward, self.cost):
            if not (0 <= i < self.num_states and 0 <= j < self.num_states):
                raise ValidationError("edge state out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValidationError(f"duplicate edge for pair {key}")
            seen.add(key)
            if reward < 0.0 or math.isnan(reward):
                raise ValidationError("edge rewards must be nonnegative")
            if not 0.0 < cost <= 1.0 + 1e-12:
                raise ValidationError("edge cost ratios must lie in (0, 1]")


def build_gap_lp(
    instance: Instance, level: RationalityLevel, scheme: Scheme
) -> PairLP:
    """Assignment LP of a pair-structured scheme's signals.

    Pooled signals become pair edges keyed by the heavier state; revealed
    mass becomes a self edge per state at unit cost. The scheme must pool
    each pair on at most one signal.
    """
    reveal = [0.0] * instance.m
    edges: list[tuple[int, int]] = []
    sigma: list[float] = []
    cost: list[float] = []
    mass: list[float] = []
    seen: set[tuple[int, int]] = set()
    for sig in scheme.signals:
        supp = sig.support
        if len(supp) == 1:
            reveal[supp[0]] += sig.mass[0][1]
            continue
        if len(supp) != 2:
            raise ValidationError(
                "signals must be carried by at most two states; "
                "run decompose_binary_support first"
            )
        a, b = supp
        ma, mb = sig.mass[0][1], sig.mass[1][1]
        if (a, b) in seen:
            raise ValidationError(
                f"pair {(a, b)} pools on more than one signal; "
                "run pairwise_reoptimize first"
            )
        seen.add((a, b))
        if ma >= mb:
            item, other, mi, mo = a, b, ma, mb
        else:
            item, other, mi, mo = b, a, mb, ma
        edges.append((item, other))
        sigma.append(sig.delta)
        cost.append(mo / mi)
        mass.append(mi)
    for state, total in enumerate(reveal):
        if total > 0.0:
            edges.append((state, state))
            sigma.append(instance.v[state])
            cost.append(1.0)
            mass.append(total)
    reward = tuple(
        response(level, s)
        * (
            instance.lam[i] * instance.u[i]
            + (instance.lam[j] * instance.u[j] * c if j != i else 0.0)
        )
        for (i, j), s, c in zip(edges, sigma, cost)
    )
    return PairLP(
        num_states=instance.m,
        edges=tuple(edges),
        sigma=tuple(sigma),
        reward=reward,
        cost=tuple(cost),
        mass=tuple(mass),
    )


def _budget_rows(lp: PairLP) -> tuple[list[list[float]], list[float]]:
    states = sorted({s for e in lp.edges for s in e})
    rows: list[list[float]] = []
    for s in states:
        row = [1.0 if i == s else 0.0 for i, _ in lp.edges]
        if any(row):
            rows.append(row)
    for s in states:
        row = [c if j == s else 0.0 for (_, j), c in zip(lp.edges, lp.cost)]
        if any(row):
            rows.append(row)
    return rows, [1.0] * len(rows)


def solve_gap_fractional(lp: PairLP) -> SimplexResult:
    """Fractional optimum of the assignment LP (x in [0,1]^E)."""
    if not lp.edges:
        return SimplexResult((), 0.0, (), (), 0.0, 0)
    a_ub, b_ub = _budget_rows(lp)
    return simplex_solve(lp.reward, a_ub=a_ub, b_ub=b_ub, maximize=True)


def solve_gap_integral(lp: PairLP) -> tuple[tuple[float, ...], float]:
    """Best 0/1 assignment, by branch and bound over the edges.

    Capped at 10 states; beyond that use solve_gap_fractional and accept
    the factor-2 relation instead.
    """
    if lp.num_states > _INTEGRAL_STATE_CAP:
        raise ValidationError(
            f"integral assignment handles at most {_INTEGRAL_STATE_CAP} states; "
            "use solve_gap_fractional"
        )
    n = len(lp.edges)
    order = sorted(range(n), key=lambda e: (-lp.reward[e], e))
    # each selected edge consumes its item state fully, so any item
    # contributes at most its best remaining edge to the bound
    suffix_bound = [0.0] * (n + 1)
    best_per_item: dict[int, float] = {}
    for pos in range(n - 1, -1, -1):
        e = order[pos]
        item = lp.edges[e][0]
        prev = best_per_item.get(item, 0.0)
        best_per_item[item] = max(prev, lp.reward[e])
        suffix_bound[pos] = suffix_bound[pos + 1] + best_per_item[item] - prev

    best_value = -math.inf
    best_pick: set[int] = set()
    item_free = [True] * lp.num_states
    bin_left = [1.0] * lp.num_states

    def walk(pos: int, value: float, picked: set[int]) -> None:
        nonlocal best_value, best_pick
        if value + suffix_bound[pos] <= best_value:
            return
        if pos == n:
            if value > best_value:
                best_value = value
                best_pick = set(picked)
            return
        e = order[pos]
        (item, target), c = lp.edges[e], lp.cost[e]
        if item_free[item] and bin_left[target] >= c - 1e-12:
            item_free[item] = False
            bin_left[target] -= c
            picked.add(e)
            walk(pos + 1, value + lp.reward[e], picked)
            picked.discard(e)
            bin_left[target] += c
            item_free[item] = True
        walk(pos + 1, value, picked)

    walk(0, 0.0, set())
    x = tuple(1.0 if e in best_pick else 0.0 for e in range(n))
    return x, (best_value if best_value > -math.inf else 0.0)


def four_approx(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: tuple[float, ...] = (),
) -> Scheme:
    """Scheme within factor 4 of the grid optimum, using at most 2m signals.

    Rounds the pair structure through the assignment LP: each selected
    pair edge emits its signal at half the item mass (the partner scaled
    by the cost ratio, keeping the position plausible), and every state
    reveals its leftover. The integral assignment is checked against half
    the fractional bound.
    """
    seed = optimal_pairwise(instance, level, grid_points, extra_points)
    lp = build_gap_lp(instance, level, seed)
    frac = solve_gap_fractional(lp)
    x, value = solve_gap_integral(lp)
    if value < 0.5 * frac.value - _HALF_TOL * (1.0 + abs(frac.value)):
        raise NumericalError(
            "integral assignment fell below half the fractional bound"
        )
    emitted = [0.0] * instance.m
    signals: list[Signal] = []
    for e, picked in enumerate(x):
        if picked <= 0.0:
            continue
        (i, j), c = lp.edges[e], lp.cost[e]
        if i == j:
            continue  # revealed mass arrives with the top-up below
        mi = 0.5 * picked
        mj = 0.5 * picked * c
        signals.append(Signal.of(lp.sigma[e], {i: mi, j: mj}))
        emitted[i] += mi
        emitted[j] += mj
    for state in range(instance.m):
        left = 1.0 - emitted[state]
        if left > 0.0:
            signals.append(Signal.of(instance.v[state], {state: left}))
    return Scheme.raw(instance.m, signals)


# ---------------------------------------------------------------------------
# single-pair O(m) reductions


def censorship_m_approx(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: tuple[float, ...] = (),
) -> Scheme:
    """Censorship scheme within an O(m) factor of the grid optimum.

    Tallies each pair's payoff contribution inside the 4-approximation,
    re-solves the best pair exactly as a two-state instance, and reveals
    every other state. A best self pair means revelation already carries
    the value.
    """
    base = four_approx(instance, level, grid_points, extra_points)
    tally: dict[tuple[int, int], float] = {}
    for sig in base.signals:
        w = response(level, sig.delta)
        supp = sig.support
        key = (supp[0], supp[-1])
        gain = w * math.fsum(
            instance.lam[s] * instance.u[s] * p for s, p in sig.mass
        )
        tally[key] = tally.get(key, 0.0) + gain
    best_key = min(tally, key=lambda k: (-tally[k], k))
    i, j = best_key
    if i == j:
        return full_reveal(instance)
    if instance.log_weight:
        sub = Instance.from_log_weights(
            [instance.log_lam[i], instance.log_lam[j]],
            [instance.v[i], instance.v[j]],
            [instance.u[i], instance.u[j]],
        )
    else:
        w = instance.lam[i] + instance.lam[j]
        sub = Instance.from_weights(
            [instance.lam[i] / w, instance.lam[j] / w],
            [instance.v[i], instance.v[j]],
            [instance.u[i], instance.u[j]],
        )
    pair = binary_optimal(sub, level)
    signals = [
        Signal.of(sig.delta, {(i, j)[state]: mass for state, mass in sig.mass})
        for sig in pair.scheme.signals
    ]
    signals.extend(
        Signal.of(instance.v[s], {s: 1.0}) for s in range(instance.m) if s not in (i, j)
    )
    return Scheme.raw(instance.m, signals)


def direct_m_approx(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: tuple[float, ...] = (),
) -> Scheme:
    """Two-pool scheme within an O(m) factor of the grid optimum.

    Keeps the single most valuable signal of the 4-approximation verbatim
    and pools all remaining mass at its own mean.
    """
    base = four_approx(instance, level, grid_points, extra_points)
    gains = [
        response(level, sig.delta)
        * math.fsum(instance.lam[s] * instance.u[s] * p for s, p in sig.mass)
        for sig in base.signals
    ]
    keep = base.signals[max(range(len(gains)), key=lambda k: (gains[k], -k))]
    kept = keep.mass_dict
    rest = {
        s: 1.0 - kept.get(s, 0.0)
        for s in range(instance.m)
        if 1.0 - kept.get(s, 0.0) > 0.0
    }
    signals = [keep]
    if rest:
        weighted = [
            (instance.log_lam[s] + math.log(p), instance.v[s])
            for s, p in sorted(rest.items())
            if instance.log_lam[s] > -math.inf
        ]
        mean = (
            log_weighted_mean([lw for lw, _ in weighted], [v for _, v in weighted])
            if weighted
            else math.nan
        )
        if math.isnan(mean):
            # leftover mass carries no prior weight: reveal it
            signals.extend(
                Signal.of(instance.v[s], {s: p}) for s, p in sorted(rest.items())
            )
        else:
            signals.append(Signal.of(mean, rest))
    return Scheme.raw(instance.m, signals)


# ---------------------------------------------------------------------------
# the many-signal instance family


def lowerbound_instance(m: int) -> tuple[Instance, RationalityLevel]:
    """Instance whose optimum needs many signals per state, with its level.

    States sit at 1..m, only the top state pays, and the prior decays so
    fast that each low state prefers its own pooled signal with the top
    state. The level is the smallest beta with beta / log(beta) >= 2m.
    """
    if m < 3:
        raise ValidationError(f"the family needs at least 3 states, got {m}")
    lo, hi = 2.0 * m, 4.0 * m * math.log(2.0 * m)
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if mid - 2.0 * m * math.log(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    beta = 0.5 * (lo + hi)
    log_s1 = logsumexp([beta * i for i in range(1, m)])
    log_t = logsumexp(
        [math.log(beta * (m - i - 1.0 / beta)) + beta * i for i in range(1, m)]
    )
    log_k2 = -math.log1p(math.exp(log_t - log_s1))
    log_lam = [
        -log_s1 + log_k2 + math.log(beta * (m - i - 1.0 / beta)) + beta * i
        for i in range(1, m)
    ]
    log_lam.append(log_k2)
    v = [float(i) for i in range(1, m + 1)]
    u = [0.0] * (m - 1) + [1.0]
    return Instance.from_log_weights(log_lam, v, u), RationalityLevel(beta)


def lowerbound_witness(instance: Instance, level: RationalityLevel) -> Scheme:
    """Many-signal scheme for the family: one pool per non-top state.

    Each state i < m pools fully with a geometrically weighted slice of
    the top state at position i + 1/beta; the slices sum to one, so the
    top state emits nothing else.
    """
    beta = _require_finite_positive(level)
    m = instance.m
    if m < 3:
        raise ValidationError(f"the family needs at least 3 states, got {m}")
    log_s1 = logsumexp([beta * i for i in range(1, m)])
    signals = [
        Signal.of(
            i + 1.0 / beta,
            {i - 1: 1.0, m - 1: math.exp(beta * i - log_s1)},
        )
        for i in range(1, m)
    ]
    return Scheme.raw(m, signals)


def pair_pool_scheme(instance: Instance, i: int, delta: float) -> Scheme:
    """Pool state i with the top state at position delta, reveal the rest.

    Below the pair's prior mean, state i pools fully and the top state
    contributes the plausibility-matching slice; above it the roles flip.
    Ties go to the first branch (the formulas agree there).
    """
    m = instance.m
    if not 0 <= i < m - 1:
        raise ValidationError(f"pool state must be below the top state, got {i}")
    top = m - 1
    vi, vm = instance.v[i], instance.v[top]
    if not vi <= delta <= vm:
        raise ValidationError(
            f"pool position must lie between the two stakes, got {delta!r}"
        )
    if instance.log_lam[i] == -math.inf or instance.log_lam[top] == -math.inf:
        raise ValidationError("pooling needs prior weight on both states")
    pair_mean = log_weighted_mean(
        [instance.log_lam[i], instance.log_lam[top]], [vi, vm]
    )
    signals: list[Signal] = []
    if delta <= pair_mean:
        if delta <= vi:
            slice_top = 0.0
        elif vm - delta <= 0.0:
            slice_top = 1.0  # the pair mean rounded onto the top stake
        else:
            slice_top = math.exp(
                instance.log_lam[i]
                - instance.log_lam[top]
                + math.log(delta - vi)
                - math.log(vm - delta)
            )
        slice_top = min(slice_top, 1.0)
        pooled = {i: 1.0}
        if slice_top > 0.0:
            pooled[top] = slice_top
        signals.append(Signal.of(delta, pooled))
        if slice_top < 1.0:
            signals.append(Signal.of(vm, {top: 1.0 - slice_top}))
    else:
        if delta >= vm:
            slice_low = 0.0
        elif delta - vi <= 0.0:
            slice_low = 1.0  # the pair mean rounded onto the low stake
        else:
            slice_low = math.exp(
                instance.log_lam[top]
                - instance.log_lam[i]
                + math.log(vm - delta)
                - math.log(delta - vi)
            )
        slice_low = min(slice_low, 1.0)
        pooled = {top: 1.0}
        if slice_low > 0.0:
            pooled[i] = slice_low
        signals.append(Signal.of(delta, pooled))
        if slice_low < 1.0:
            signals.append(Signal.of(vi, {i: 1.0 - slice_low}))
    for state in range(m):
        if state not in (i, top):
            signals.append(Signal.of(instance.v[state], {state: 1.0}))
    return Scheme.raw(m, signals)
