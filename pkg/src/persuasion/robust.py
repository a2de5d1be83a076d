"""Scheme performance across unknown rationality levels.

A scheme tuned to one response level can collapse at another, so this
module measures and designs against that: a worst-case ratio report over
a level set, the step-optimal censorship whose ratio never exceeds 2 when
the sender payoff is state-independent, named gap instances exhibiting
the matching lower bounds, a factor-revealing LP that lower-bounds the
ratio any scheme can achieve on the two-state hard instance, and a mixed
censorship design for a two-state instance when the level is known up to
a multiplicative window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from ._util import logsumexp
from .model import (
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    ValidationError,
    censorship_params,
    evaluate_log_payoff,
    full_reveal,
    log_response,
    make_censorship,
    mix,
)
from .oracle import simplex_solve
from .sdsu import binary_optimal, optimal_pairwise
from .sisu import quantal_optimal, rational_optimal

__all__ = [
    "BinaryRobustDesign",
    "RobustReport",
    "binary_robust_scheme",
    "factor_revealing_bound",
    "lowerbound_instances",
    "robust_ratio",
    "sisu_robust_scheme",
]

_RATIO_TOL = 1e-9      # slack allowed before a sub-1 ratio is an error


def _json_num(x: float) -> float | str:
    return "inf" if math.isinf(x) else x


@dataclass(frozen=True)
class RobustReport:
    """Worst-case payoff ratio of one scheme over a set of levels.

    Per level: the optimal payoff, the scheme's payoff, their ratio, and
    the solver that produced the optimum. `gamma` is the largest ratio.
    Ratios are formed in log domain, so underflowing payoffs still
    compare exactly; a zero scheme payoff against a positive optimum is
    reported as an explicit infinity.
    """

    beta_set: tuple[RationalityLevel, ...]
    optimal: tuple[float, ...]
    achieved: tuple[float, ...]
    ratios: tuple[float, ...]
    gamma: float
    solvers: tuple[str, ...]

    def __post_init__(self) -> None:
        n = len(self.beta_set)
        if not (len(self.optimal) == len(self.achieved) == len(self.ratios) == len(self.solvers) == n):
            raise ValidationError("one row per level required")
        if n == 0:
            raise ValidationError("the level set must not be empty")
        if self.gamma != max(self.ratios):
            raise ValidationError("gamma must equal the largest ratio")
        if self.gamma < 1.0 - _RATIO_TOL:
            raise NumericalError(
                "per-level optimum fell below the scheme payoff; "
                "refine the solver grid"
            )

    def to_json(self) -> dict:
        rows = [
            {
                "beta": "inf" if b.is_fully_rational else b.beta,
                "optimal": self.optimal[k],
                "achieved": self.achieved[k],
                "ratio": _json_num(self.ratios[k]),
                "solver": self.solvers[k],
            }
            for k, b in enumerate(self.beta_set)
        ]
        return {"rows": rows, "gamma": _json_num(self.gamma)}


def _optimal_log_payoff(
    instance: Instance, level: RationalityLevel, grid_points: int
) -> tuple[float, str]:
    """Best achievable log payoff at one level, with the solver recorded."""
    if max(instance.u) == 0.0:
        return -math.inf, "zero-payoff"
    if level.is_fully_rational:
        sol = rational_optimal(instance)
        return evaluate_log_payoff(instance, level, sol.scheme), "step-threshold"
    if level.beta == 0.0:
        # flat response: every plausible scheme pays sum(lam u)/2
        terms = [
            instance.log_lam[i] + math.log(instance.u[i])
            for i in range(instance.m)
            if instance.u[i] > 0.0 and instance.log_lam[i] != -math.inf
        ]
        value = logsumexp(terms) - math.log(2.0) if terms else -math.inf
        return value, "uniform-tie"
    if instance.m == 2:
        sol = binary_optimal(instance, level)
        return evaluate_log_payoff(instance, level, sol.scheme), "binary-censorship"
    if all(u == instance.u[0] for u in instance.u):
        sol = quantal_optimal(instance, level)
        return evaluate_log_payoff(instance, level, sol.scheme), "threshold-censorship"
    scheme = optimal_pairwise(instance, level, grid_points)
    return evaluate_log_payoff(instance, level, scheme), f"pairwise-grid:{grid_points}"


def robust_ratio(
    instance: Instance,
    scheme: Scheme,
    beta_set: Sequence[RationalityLevel],
    grid_points: int = 2001,
) -> RobustReport:
    """Worst-case ratio of the per-level optimum to the scheme's payoff.

    The optimum at each level comes from the exact solver where one
    exists (step receiver at the infinite level, two states, or a
    state-independent sender payoff) and from the pair-structured grid
    pipeline otherwise; `grid_points` sizes that grid. Both payoffs of a
    0/0 row count as a tie (ratio 1); a zero scheme payoff against a
    positive optimum yields an infinite ratio, never an exception.
    """
    if not beta_set:
        raise ValidationError("the level set must not be empty")
    optimal: list[float] = []
    achieved: list[float] = []
    ratios: list[float] = []
    solvers: list[str] = []
    for level in beta_set:
        log_opt, solver = _optimal_log_payoff(instance, level, grid_points)
        log_got = evaluate_log_payoff(instance, level, scheme)
        if log_opt == -math.inf and log_got == -math.inf:
            ratio = 1.0
        elif log_got == -math.inf:
            ratio = math.inf
        else:
            try:
                ratio = math.exp(log_opt - log_got)
            except OverflowError:
                ratio = math.inf
        optimal.append(math.exp(log_opt) if log_opt != -math.inf else 0.0)
        achieved.append(math.exp(log_got) if log_got != -math.inf else 0.0)
        ratios.append(ratio)
        solvers.append(solver)
    return RobustReport(
        beta_set=tuple(beta_set),
        optimal=tuple(optimal),
        achieved=tuple(achieved),
        ratios=tuple(ratios),
        gamma=max(ratios),
        solvers=tuple(solvers),
    )


# ---------------------------------------------------------------------------
# state-independent payoff: one scheme for every level


def sisu_robust_scheme(instance: Instance) -> Scheme:
    """Censorship that is optimal for the step receiver, used at every level.

    With a state-independent sender payoff its worst-case ratio over all
    levels is at most 2: the step optimum pools the most states of any
    level's optimum, and its pool sits at a nonpositive position where
    the response is at least half its supremum.
    """
    if any(u != instance.u[0] for u in instance.u):
        raise ValidationError(
            "the 2-robust guarantee needs a state-independent sender payoff"
        )
    return rational_optimal(instance).scheme


# ---------------------------------------------------------------------------
# named gap instances


def _censorship_gap(eps: float) -> Instance:
    """Two states where the step-optimal censorship is the full pool but a
    slightly noisy receiver is served almost perfectly by full revelation;
    the ratio at level 1 approaches 2 as eps drops."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps!r}")
    lam2 = eps / (4.0 - eps)
    lam1 = 1.0 - lam2
    v1 = math.log(lam2)
    v2 = -lam1 * v1 / lam2
    return Instance.from_weights([lam1, lam2], [v1, v2], [1.0, 1.0])


def _direct_gap(eps: float) -> Instance:
    """Three states where the step-optimal two-pool scheme leans on a
    vanishing-mass state; at moderate levels its ratio grows like 1/eps."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps!r}")
    half = (1.0 - eps) / 2.0
    return Instance.from_weights(
        [eps, half, half], [-0.01, 0.01, 3.0], [1.0, 1.0, 1.0]
    )


def _impossibility() -> Instance:
    """Two states, payoff only on the high one, both stakes positive: the
    optimum pools just above the low stake and shrinks like 1/(b e^b), so
    no single scheme tracks it across widely separated levels."""
    return Instance.from_weights([0.5, 0.5], [1.0, 2.0], [0.0, 1.0])


def lowerbound_instances() -> Mapping[str, Callable[..., Instance]]:
    """Named generators for the gap instances used in the ratio bounds.

    "censorship-gap" and "direct-gap" take an eps in (0, 1);
    "impossibility" takes no arguments.
    """
    return {
        "censorship-gap": _censorship_gap,
        "direct-gap": _direct_gap,
        "impossibility": _impossibility,
    }


# ---------------------------------------------------------------------------
# factor-revealing lower bound


def factor_revealing_bound(
    levels: Sequence[RationalityLevel], grid: Sequence[float]
) -> float:
    """Lower bound on the worst-case ratio any scheme achieves on the
    two-state hard instance, over signals restricted to a grid.

    Solves the discretized LP: maximize g subject to signal masses that
    are nonnegative, sum to one per state, never understate the position
    (the position may only sit at or above the posterior mean), and pay
    at least g / (b e^b) at every level b. Returns 1/g*, which grows
    as levels are appended (at a fixed grid). The grid is augmented with
    each level's near-optimal position (b+2)/(b+1) and both stakes.
    """
    if not levels:
        raise ValidationError("the level set must not be empty")
    for level in levels:
        if level.is_fully_rational or level.beta <= 0.0:
            raise ValidationError("the payoff floor needs a finite positive level")
    instance = _impossibility()
    v1, v2 = instance.v
    points = {float(d) for d in grid}
    for d in points:
        if not math.isfinite(d):
            raise ValidationError(f"grid positions must be finite, got {d!r}")
    points.update((level.beta + 2.0) / (level.beta + 1.0) for level in levels)
    points.update((2.0, v1, v2))
    pts = sorted(points)
    n = len(pts)

    # variables: [g, mass of state 1 per point, mass of state 2 per point]
    c = [1.0] + [0.0] * (2 * n)
    a_eq = [
        [0.0] + [1.0] * n + [0.0] * n,
        [0.0] + [0.0] * n + [1.0] * n,
    ]
    b_eq = [1.0, 1.0]
    a_ub: list[list[float]] = []
    b_ub: list[float] = []
    for g, d in enumerate(pts):
        row = [0.0] * (1 + 2 * n)
        row[1 + g] = -instance.lam[0] * (d - v1)
        row[1 + n + g] = -instance.lam[1] * (d - v2)
        a_ub.append(row)
        b_ub.append(0.0)
    for level in levels:
        # scaled by the floor b e^b, so the g coefficient is exactly 1
        log_floor_inv = math.log(level.beta) + level.beta
        row = [1.0] + [0.0] * (2 * n)
        for i in range(2):
            if instance.u[i] == 0.0:
                continue
            base = math.log(instance.lam[i] * instance.u[i]) + log_floor_inv
            for g, d in enumerate(pts):
                try:
                    row[1 + i * n + g] = -math.exp(base + log_response(level, d))
                except OverflowError:
                    raise ValidationError(
                        "level/grid combination overflows the floor scaling"
                    ) from None
        a_ub.append(row)
        b_ub.append(0.0)

    result = simplex_solve(c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq, maximize=True)
    return math.inf if result.value <= 0.0 else 1.0 / result.value


# ---------------------------------------------------------------------------
# two-state design for a level window


@dataclass(frozen=True)
class BinaryRobustDesign:
    """A mixed scheme for a two-state instance with a level window.

    `scheme` mixes a censorship pooled near the low stake (weight
    `mix_weight`, pool described by `params`) with full revelation;
    `bound` certifies the worst-case ratio over the whole window.
    """

    scheme: Scheme
    bound: float
    mix_weight: float
    params: CensorshipParams


def binary_robust_scheme(
    instance: Instance, beta0: float, window: float
) -> BinaryRobustDesign:
    """Design for levels known to lie in [beta0, window * beta0].

    Pools the low state (plus the matching slice of the high one) at
    min{prior mean, max{v1, 0} + 1/(window * beta0)} and mixes that with
    full revelation at the weight balancing the two failure modes; the
    certified worst-case ratio is (4 sqrt(e window) + 1)^2. Requires
    beta0 at or above the instance's own scale (lam2/lam1) / (v2 -
    max{v1, 0}) when v2 > 0, below which no guarantee is known.
    """
    if instance.m != 2:
        raise ValidationError(f"two-state design got {instance.m} states")
    if not window >= 1.0:
        raise ValidationError(f"the window factor must be at least 1, got {window!r}")
    if not (math.isfinite(beta0) and beta0 > 0.0):
        raise ValidationError(f"the base level must be finite positive, got {beta0!r}")
    lam1, lam2 = instance.lam
    v1, v2 = instance.v
    if v2 > 0.0:
        scale = math.inf if lam1 == 0.0 else (lam2 / lam1) / (v2 - max(v1, 0.0))
        if beta0 < scale:
            raise ValidationError(
                f"base level {beta0!r} sits below the instance scale {scale!r}"
            )
    mean = lam1 * v1 + lam2 * v2
    delta = min(mean, max(v1, 0.0) + 1.0 / (window * beta0))
    if delta >= mean:
        prob = 1.0  # the whole prior pools at its mean
    else:
        prob = lam1 * (delta - v1) / (lam2 * (v2 - delta))
        prob = min(max(prob, 0.0), 1.0)
    params = censorship_params(instance, {0}, 1, prob)
    pooled = make_censorship(instance, params)
    root = math.sqrt(16.0 * math.e * window)
    weight = root / (1.0 + root)
    scheme = mix([pooled, full_reveal(instance)], [weight, 1.0 - weight])
    bound = (4.0 * math.sqrt(math.e * window) + 1.0) ** 2
    return BinaryRobustDesign(
        scheme=scheme, bound=bound, mix_weight=weight, params=params
    )
