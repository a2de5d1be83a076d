"""Independent verification oracles: a dense simplex LP solver, a finite-grid
LP relaxation of the signaling problem, exhaustive binary-instance search, and
a Gumbel-shock Monte Carlo of the receiver.

These are deliberately separate from the analytic solvers they certify; they
share only the core types and the response curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .model import (
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    Signal,
    ValidationError,
    censorship_params,
    response,
)

__all__ = [
    "UnboundedError",
    "InfeasibleError",
    "SimplexResult",
    "simplex_solve",
    "GridLP",
    "build_grid",
    "grid_lp_optimal",
    "exhaustive_binary_search",
    "SimulationReport",
    "gumbel_simulate",
]

_PIVOT_TOL = 1e-11        # entries smaller than this cannot be pivots
_REDUCED_TOL = 1e-10      # reduced costs within this of 0 count as optimal
_FEAS_TOL = 1e-8          # phase-1 objective above this means infeasible
_MASS_DUST = 1e-12        # conditional signal mass below this is roundoff
_REFRESH_EVERY = 256      # minimum pivots between tableau refactorizations
_RETRY_REFRESH = 32       # tight refactorization cadence for the retry pass
_MAX_ITERS = 100_000


class _BasisError(NumericalError):
    """Numerically singular basis; the solve is retried before surfacing."""


class UnboundedError(NumericalError):
    """The LP objective is unbounded in the optimization direction."""


class InfeasibleError(NumericalError):
    """The LP constraint system has no feasible point."""


@dataclass(frozen=True)
class SimplexResult:
    """Optimal basic solution of a linear program.

    value is in the caller's orientation (max or min); y_ub / y_eq are the
    dual multipliers of the inequality / equality rows, oriented so that
    dual_value = y_ub . b_ub + y_eq . b_eq equals value at optimality.
    """

    x: tuple[float, ...]
    value: float
    y_ub: tuple[float, ...]
    y_eq: tuple[float, ...]
    dual_value: float
    iterations: int

    @property
    def duality_gap(self) -> float:
        return abs(self.value - self.dual_value)


def simplex_solve(
    c: Sequence[float],
    a_ub: Sequence[Sequence[float]] | None = None,
    b_ub: Sequence[float] | None = None,
    a_eq: Sequence[Sequence[float]] | None = None,
    b_eq: Sequence[float] | None = None,
    maximize: bool = True,
) -> SimplexResult:
    """Dense two-phase simplex over a_ub x <= b_ub, a_eq x = b_eq, x >= 0.

    Deterministic: Dantzig pricing with lowest-index tie breaking and the
    lexicographic ratio test (the artificial block of the tableau is B^-1,
    so the classical rule applies verbatim), which keeps highly degenerate
    programs from cycling or stalling on roundoff ties. Raises
    InfeasibleError / UnboundedError; NumericalError if the iteration cap
    is hit.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub_m = np.zeros((0, n)) if a_ub is None else np.asarray(a_ub, dtype=float)
    b_ub_m = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq_m = np.zeros((0, n)) if a_eq is None else np.asarray(a_eq, dtype=float)
    b_eq_m = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    if a_ub_m.shape != (b_ub_m.size, n) or a_eq_m.shape != (b_eq_m.size, n):
        raise ValidationError("constraint matrix shapes do not match c / b")

    n_ub, n_eq = b_ub_m.size, b_eq_m.size
    n_rows = n_ub + n_eq
    cost = -c if maximize else c.copy()

    # standard form: [x | slacks | artificials], every row gets an artificial
    a = np.zeros((n_rows, n + n_ub + n_rows))
    b = np.concatenate([b_ub_m, b_eq_m]).astype(float)
    a[:n_ub, :n] = a_ub_m
    a[n_ub:, :n] = a_eq_m
    a[:n_ub, n : n + n_ub] = np.eye(n_ub)
    flipped = b < 0.0
    a[flipped] *= -1.0
    b[flipped] *= -1.0
    art0 = n + n_ub
    a[:, art0 : art0 + n_rows] = np.eye(n_rows)

    # row equilibration over the structural columns: harmless to the primal,
    # undone on the duals; tames the ratio test on badly scaled rows
    row_scale = np.ones(n_rows)
    for i in range(n_rows):
        s = float(np.abs(a[i, :n]).max(initial=0.0))
        if s > 0.0:
            row_scale[i] = s
            a[i, :art0] /= s
            b[i] /= s

    n_cols = a.shape[1]
    a0 = np.concatenate([a, b[:, None]], axis=1)  # pristine rows, for refactoring
    phase2_cost = np.zeros(n_cols)
    phase2_cost[:n] = cost

    def run_attempt(refresh: int) -> tuple[np.ndarray, list[int], int]:
        tableau = np.zeros((n_rows + 1, n_cols + 1))
        tableau[:n_rows, :n_cols] = a
        tableau[:n_rows, -1] = b
        basis = list(range(art0, art0 + n_rows))
        iterations = 0

        def refactor() -> None:
            # rebuild B^-1 [A | b] from the pristine rows to shed elimination drift
            try:
                tableau[:n_rows, :] = np.linalg.solve(a0[:, basis], a0)
            except np.linalg.LinAlgError as exc:
                raise _BasisError("singular basis during refactorization") from exc

        def rebuild_reduced(costs: np.ndarray) -> None:
            cb = costs[basis]
            tableau[-1, :] = 0.0
            tableau[-1, :n_cols] = costs - cb @ tableau[:n_rows, :n_cols]
            tableau[-1, -1] = -(cb @ tableau[:n_rows, -1])

        def lex_leave(tied: np.ndarray, col: np.ndarray) -> int:
            # break ratio ties lexicographically on [B^-1 b | B^-1] / pivot
            # entry; B^-1 sits in the artificial block, so ties cannot
            # survive every column
            survivors = tied
            for j in range(-1, n_rows):
                if survivors.size == 1:
                    break
                column = n_cols if j < 0 else art0 + j
                vals = tableau[survivors, column] / col[survivors]
                low = float(vals.min())
                survivors = survivors[vals <= low + 1e-12 * (1.0 + abs(low))]
            return int(survivors[0])

        def run_phase(costs: np.ndarray, barred: np.ndarray) -> None:
            nonlocal iterations
            rebuild_reduced(costs)
            stale = 1  # force a refactor before trusting optimality / unboundedness
            while True:
                r = tableau[-1, :n_cols]
                candidates = np.where((r < -_REDUCED_TOL) & ~barred)[0]
                if candidates.size == 0:
                    if stale == 0:
                        return
                    refactor()
                    rebuild_reduced(costs)
                    stale = 0
                    continue
                k = int(candidates[np.argmin(r[candidates])])
                col = tableau[:n_rows, k]
                rows = np.where(col > _PIVOT_TOL)[0]
                if rows.size == 0:
                    if stale > 0:
                        refactor()
                        rebuild_reduced(costs)
                        stale = 0
                        continue
                    raise UnboundedError("unbounded objective direction")
                ratios = tableau[rows, -1] / col[rows]
                best = float(ratios.min())
                tied = rows[ratios <= best + 1e-9 * (1.0 + abs(best))]
                leave = lex_leave(tied, col) if tied.size > 1 else int(tied[0])
                piv = tableau[leave, k]
                tableau[leave, :] /= piv
                colvals = tableau[:, k].copy()
                colvals[leave] = 0.0
                tableau[:, :] -= np.outer(colvals, tableau[leave, :])
                basis[leave] = k
                iterations += 1
                stale += 1
                if stale >= refresh:
                    refactor()
                    rebuild_reduced(costs)
                    stale = 0
                if iterations > _MAX_ITERS:
                    raise NumericalError("simplex iteration cap exceeded")

        # phase 1: drive artificials to zero
        phase1_cost = np.zeros(n_cols)
        phase1_cost[art0:] = 1.0
        run_phase(phase1_cost, np.zeros(n_cols, dtype=bool))
        if -tableau[-1, -1] > _FEAS_TOL * (1.0 + float(np.abs(b).max(initial=0.0))):
            raise InfeasibleError(f"phase-1 optimum {-tableau[-1, -1]!r} > 0")

        # pivot lingering artificials out of the basis where possible
        for row in range(n_rows):
            if basis[row] >= art0:
                entries = np.abs(tableau[row, :art0])
                k = int(np.argmax(entries))
                if entries[k] > _PIVOT_TOL:
                    piv = tableau[row, k]
                    tableau[row, :] /= piv
                    colvals = tableau[:, k].copy()
                    colvals[row] = 0.0
                    tableau[:, :] -= np.outer(colvals, tableau[row, :])
                    basis[row] = k

        # phase 2: real costs, artificials barred from entering
        barred = np.zeros(n_cols, dtype=bool)
        barred[art0:] = True
        run_phase(phase2_cost, barred)
        return tableau, basis, iterations

    # if elimination drift wedges the basis between refactorizations, redo
    # the whole solve with a tight refactorization cadence before surfacing
    try:
        tableau, basis, iterations = run_attempt(_REFRESH_EVERY)
    except _BasisError:
        tableau, basis, iterations = run_attempt(_RETRY_REFRESH)

    x = np.zeros(n_cols)
    for row, var in enumerate(basis):
        x[var] = tableau[row, -1]
    x_primal = np.maximum(x[:n], 0.0)
    value_min = float(phase2_cost[:n] @ x_primal)

    # duals: reduced cost of row i's artificial is -y_i (artificial cost 0)
    y = -tableau[-1, art0 : art0 + n_rows].copy()
    y /= row_scale
    y[flipped] *= -1.0
    if maximize:
        y = -y
    value = -value_min if maximize else value_min
    y_ub = tuple(float(t) for t in y[:n_ub])
    y_eq = tuple(float(t) for t in y[n_ub:])
    dual_value = float(y[:n_ub] @ b_ub_m + y[n_ub:] @ b_eq_m)
    return SimplexResult(
        x=tuple(float(t) for t in x_primal),
        value=value,
        y_ub=y_ub,
        y_eq=y_eq,
        dual_value=dual_value,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# finite-grid LP relaxation of the signaling problem


@dataclass(frozen=True)
class GridLP:
    """Grid-LP solve: optimal grid-supported scheme plus LP certificates.

    alpha are the plausibility-row duals (one per grid point), eta the
    per-state mass-row duals; value = sum(eta) at optimality (duality_gap
    measures the difference). dual_residual is the worst violation of the
    dual feasibility rows lam_i (v_i - delta) alpha + eta_i >= lam_i u_i W;
    primal_residual the worst primal constraint violation.
    """

    grid: tuple[float, ...]
    value: float
    scheme: Scheme
    alpha: tuple[float, ...]
    eta: tuple[float, ...]
    duality_gap: float
    primal_residual: float
    dual_residual: float
    iterations: int


def build_grid(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: Sequence[float] = (),
) -> tuple[float, ...]:
    """Signal grid: uniform points over the stake range padded by 2/beta,
    plus 0, every v_i, and any caller-supplied points (kept exactly)."""
    if grid_points < 2:
        raise ValidationError("grid needs at least 2 points")
    margin = 0.0
    if not level.is_fully_rational and level.beta > 0.0:
        margin = 2.0 / level.beta
    lo = min(instance.v) - margin
    hi = max(instance.v) + margin
    special = sorted(set(instance.v) | {0.0} | {float(x) for x in extra_points})
    if any(math.isnan(x) or math.isinf(x) for x in special):
        raise ValidationError("grid points must be finite")
    uniform = np.linspace(lo, hi, grid_points)
    spec_arr = np.asarray(special)
    keep = [
        float(x)
        for x in uniform
        if np.abs(spec_arr - x).min() > 1e-12
    ]
    return tuple(sorted(keep + special))


def grid_lp_optimal(
    instance: Instance,
    level: RationalityLevel,
    grid_points: int = 2001,
    extra_points: Sequence[float] = (),
) -> GridLP:
    """Best scheme whose signals live on the finite grid, solved as an LP.

    Value is a lower bound on the true optimum and an upper bound on the
    value of every grid-supported scheme. States with zero prior weight are
    presolved out and revealed at their own stake.
    """
    grid = build_grid(instance, level, grid_points, extra_points)
    g = len(grid)
    w = np.array([response(level, d) for d in grid])
    live = [i for i in range(instance.m) if instance.lam[i] > 0.0]
    nl = len(live)
    nvar = nl * g

    a_eq = np.zeros((g + nl, nvar))
    b_eq = np.zeros(g + nl)
    c = np.zeros(nvar)
    grid_arr = np.asarray(grid)
    for idx, i in enumerate(live):
        cols = slice(idx * g, (idx + 1) * g)
        a_eq[:g, cols] = np.diag(instance.lam[i] * (instance.v[i] - grid_arr))
        a_eq[g + idx, cols] = 1.0
        b_eq[g + idx] = 1.0
        c[cols] = instance.lam[i] * instance.u[i] * w
    res = simplex_solve(c, a_eq=a_eq, b_eq=b_eq, maximize=True)

    x = np.asarray(res.x)
    signals: list[Signal] = []
    for idx, i in enumerate(live):
        xs = x[idx * g : (idx + 1) * g]
        xs = np.where(xs > _MASS_DUST, xs, 0.0)  # drop basic-solution roundoff
        total = xs.sum()
        if total <= 0.0:
            raise NumericalError(f"state {i} received no mass from the LP")
        xs = xs / total
        for gi in np.nonzero(xs)[0]:
            signals.append(Signal.of(grid[gi], {i: float(xs[gi])}))
    for i in range(instance.m):
        if instance.lam[i] == 0.0:
            signals.append(Signal.of(instance.v[i], {i: 1.0}))
    scheme = Scheme.canonical(instance.m, signals)

    alpha = res.y_eq[:g]
    eta = res.y_eq[g:]
    primal_residual = float(np.abs(a_eq @ x - b_eq).max())
    slack = np.array(
        [
            instance.lam[i] * (instance.v[i] - grid_arr) * alpha
            + eta[idx]
            - instance.lam[i] * instance.u[i] * w
            for idx, i in enumerate(live)
        ]
    )
    dual_residual = float(max(0.0, -slack.min()))
    return GridLP(
        grid=grid,
        value=res.value,
        scheme=scheme,
        alpha=alpha,
        eta=eta,
        duality_gap=res.duality_gap,
        primal_residual=primal_residual,
        dual_residual=dual_residual,
        iterations=res.iterations,
    )


# ---------------------------------------------------------------------------
# exhaustive search over binary censorship schemes


def exhaustive_binary_search(
    instance: Instance,
    level: RationalityLevel,
    num_points: int = 10_000,
    delta_grid: Sequence[float] | None = None,
) -> tuple[CensorshipParams, float]:
    """Brute-force the best binary censorship: scan pooled-signal positions
    delta in [v_1, prior mean], infer the threshold slice p from
    plausibility, evaluate, and keep the best. Two-state instances only."""
    if instance.m != 2:
        raise ValidationError("exhaustive binary search needs exactly 2 states")
    l1, l2 = instance.lam
    v1, v2 = instance.v
    u1, u2 = instance.u
    mean = instance.prior_mean()
    if delta_grid is None:
        delta_grid = np.linspace(v1, mean, num_points)
    best_p, best_delta, best_value = 0.0, v1, -math.inf
    w2 = response(level, v2)
    for d in delta_grid:
        num = l1 * (d - v1)
        den = l2 * (v2 - d)
        if den <= 0.0:
            p = 1.0
        else:
            p = min(max(num / den, 0.0), 1.0)
        pool = l1 + p * l2
        d_exact = (l1 * v1 + p * l2 * v2) / pool if pool > 0.0 else v2
        wd = response(level, d_exact)
        value = l1 * u1 * wd + l2 * u2 * (p * wd + (1.0 - p) * w2)
        if value > best_value:
            best_p, best_delta, best_value = p, d_exact, value
    params = censorship_params(instance, {0}, 1, best_p)
    return params, best_value


# ---------------------------------------------------------------------------
# Gumbel-shock Monte Carlo of the receiver


@dataclass(frozen=True)
class SimulationReport:
    """Per-signal empirical action-1 rates from Gumbel-shock receiver draws."""

    deltas: tuple[float, ...]
    rates: tuple[float, ...]
    expected: tuple[float, ...]
    n: int
    seed: int


def gumbel_simulate(
    instance: Instance,
    level: RationalityLevel,
    scheme: Scheme,
    n: int,
    seed: int,
) -> SimulationReport:
    """Simulate the receiver: i.i.d. Gumbel shocks on both actions, action 1
    taken iff eps1 - eps0 >= beta * delta. The empirical rate per signal
    estimates W(delta). Finite beta only; n >= 1; fully seeded."""
    if level.is_fully_rational:
        raise ValidationError("simulation requires a finite rationality level")
    if n < 1:
        raise ValidationError(f"need at least one draw, got n={n}")
    rng = np.random.default_rng(seed)
    deltas, rates, expected = [], [], []
    with np.errstate(divide="ignore"):
        for sig in scheme.signals:
            eps0 = -np.log(-np.log(rng.random(n)))
            eps1 = -np.log(-np.log(rng.random(n)))
            hits = int(np.count_nonzero(eps1 - eps0 >= level.beta * sig.delta))
            deltas.append(sig.delta)
            rates.append(hits / n)
            expected.append(response(level, sig.delta))
    return SimulationReport(
        deltas=tuple(deltas),
        rates=tuple(rates),
        expected=tuple(expected),
        n=n,
        seed=seed,
    )
