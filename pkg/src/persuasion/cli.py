"""Command-line front end: solve instances, sweep rationality levels,
benchmark the separation families, and cross-check against the oracles.

Output is JSON by default, plot-ready CSV with --csv ('.' decimal, 17
significant digits). Identical configuration and seed give byte-identical
output. Exit codes: 0 success, 2 input error (machine-readable error
JSON on stdout), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .model import (
    FULLY_RATIONAL,
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    ValidationError,
    censorship_params,
    censorship_params_to_json,
    evaluate_log_payoff,
    evaluate_payoff,
    full_reveal,
    instance_from_json,
    make_censorship,
    make_direct,
    no_info,
    scheme_from_json,
    scheme_to_json,
    validate_scheme,
)
from .oracle import grid_lp_optimal, gumbel_simulate
from .robust import (
    binary_robust_scheme,
    factor_revealing_bound,
    lowerbound_instances,
    robust_ratio,
)
from .sdsu import (
    binary_optimal,
    censorship_m_approx,
    direct_m_approx,
    four_approx,
    lowerbound_instance,
    lowerbound_witness,
    optimal_pairwise,
)
from .sisu import (
    best_direct,
    direct_lowerbound_instance,
    normalize_instance,
    quantal_optimal,
    rational_optimal,
)

__all__ = [
    "RunConfig",
    "build_parser",
    "cmd_bench",
    "cmd_oracle",
    "cmd_robust",
    "cmd_simulate",
    "cmd_solve",
    "main",
    "parse_levels",
    "parse_m_range",
]

_COMMANDS = ("solve", "robust", "bench", "oracle", "simulate")
_MODES = (
    "sisu",
    "sdsu-binary",
    "pairwise",
    "four-approx",
    "censorship-approx",
    "direct-approx",
    "rational",
)
_FAMILIES = ("sisu-direct", "sdsu-lower", "impossibility")
# family size cap: the family priors grow exponentially in m
_MAX_FAMILY_SIZE = 8
# the factor-revealing LP gets at most this many caller grid points
_BOUND_GRID_CAP = 101


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """One parsed invocation: the command plus every flag it consumes."""

    command: str
    instance: str | None = None
    levels: tuple[RationalityLevel, ...] = ()
    mode: str | None = None
    scheme: str | None = None
    grid_points: int = 2001
    augment_analytic: bool = False
    n: int | None = None
    seed: int = 0
    csv: bool = False
    family: str | None = None
    m_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.command not in _COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")


def parse_levels(spec: str) -> tuple[RationalityLevel, ...]:
    """Expand a level spec into an ordered, de-duplicated level tuple.

    Tokens are comma separated: a finite number, "inf" for the fully
    rational receiver, "A:B:N" for N linearly spaced points, or
    "A:B:Nlog" for N log-spaced points. The result must be nonempty.
    """
    out: list[RationalityLevel] = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            raise ValidationError(f"empty token in level spec {spec!r}")
        if token.lower() == "inf":
            out.append(FULLY_RATIONAL)
        elif ":" in token:
            out.extend(_parse_level_range(token))
        else:
            out.append(RationalityLevel(_parse_float(token, "level")))
    seen: set[float | None] = set()
    levels: list[RationalityLevel] = []
    for level in out:
        if level.beta not in seen:
            seen.add(level.beta)
            levels.append(level)
    if not levels:
        raise ValidationError("the level spec must produce at least one level")
    return tuple(levels)


def _parse_level_range(token: str) -> list[RationalityLevel]:
    parts = token.split(":")
    if len(parts) != 3:
        raise ValidationError(f"level range {token!r} is not of the form A:B:N")
    count_text = parts[2]
    log_spaced = count_text.endswith("log")
    if log_spaced:
        count_text = count_text[: -len("log")]
    try:
        n = int(count_text)
    except ValueError as exc:
        raise ValidationError(f"bad point count in level range {token!r}") from exc
    if n < 2:
        raise ValidationError(f"a level range needs at least 2 points, got {n}")
    a = _parse_float(parts[0], "range start")
    b = _parse_float(parts[1], "range end")
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ValidationError(f"level range {token!r} needs finite start < end")
    if log_spaced and a <= 0.0:
        raise ValidationError(f"log-spaced range {token!r} needs a positive start")
    points = [
        a * (b / a) ** (k / (n - 1)) if log_spaced else a + (b - a) * k / (n - 1)
        for k in range(n)
    ]
    points[0], points[-1] = a, b
    return [RationalityLevel(p) for p in points]


def parse_m_range(spec: str) -> tuple[int, int]:
    """Parse "A..B" (inclusive; empty when A > B) or a single "A"."""
    try:
        if ".." in spec:
            lo_text, hi_text = spec.split("..", 1)
            return int(lo_text), int(hi_text)
        return int(spec), int(spec)
    except ValueError as exc:
        raise ValidationError(f"bad size range {spec!r}; expected A..B") from exc


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ValidationError(f"bad {what} {text!r}") from exc


# ---------------------------------------------------------------------------
# shared plumbing


def _load_instance(config: RunConfig) -> Instance:
    if not config.instance:
        raise ValidationError("this command needs --instance")
    try:
        with open(config.instance, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ValidationError(
            f"cannot read instance file {config.instance!r}: {exc}"
        ) from exc
    return instance_from_json(text)


def _single_level(config: RunConfig) -> RationalityLevel:
    if len(config.levels) != 1:
        raise ValidationError(
            f"this command takes exactly one level, got {len(config.levels)}"
        )
    return config.levels[0]


def _finite_level(config: RunConfig) -> RationalityLevel:
    level = _single_level(config)
    if level.is_fully_rational:
        raise ValidationError("this command needs a finite level")
    return level


def _resolve_scheme(
    name: str, instance: Instance, levels: Sequence[RationalityLevel]
) -> tuple[Scheme, str]:
    """A scheme from a built-in name or a JSON file, plus a source label.

    Built-in names win over files of the same name. The binary-robust
    design anchors its pool at the smallest finite level in the sweep.
    """
    if name == "full-reveal":
        return full_reveal(instance), "full-reveal"
    if name == "no-info":
        return no_info(instance), "no-info"
    if name == "rational-censorship":
        return rational_optimal(instance).scheme, "rational-censorship"
    if name.startswith("binary-robust:K="):
        window = _parse_float(name[len("binary-robust:K=") :], "design window")
        finite = [lvl.beta for lvl in levels if not lvl.is_fully_rational]
        finite = [b for b in finite if b is not None and b > 0.0]
        if not finite:
            raise ValidationError(
                "the binary-robust design needs a finite positive level in the sweep"
            )
        design = binary_robust_scheme(instance, min(finite), window)
        return design.scheme, name
    if os.path.exists(name):
        with open(name, encoding="utf-8") as handle:
            scheme = scheme_from_json(handle.read(), num_states=instance.m)
        validate_scheme(instance, scheme)
        return scheme, name
    raise ValidationError(
        f"scheme {name!r} is neither a built-in name nor a readable file"
    )


def _strip_padding(scheme: Scheme, original: Instance, padded: Instance) -> Scheme:
    """Map a scheme on the padded instance back to the original states.

    Padding states carry no prior mass, so dropping their entries leaves
    every original state's signal distribution intact.
    """
    if padded.m == original.m:
        return scheme
    offset = 1 if padded.v[0] != original.v[0] else 0
    signals = []
    for sig in scheme.signals:
        kept = {
            state - offset: p
            for state, p in sig.mass
            if 0 <= state - offset < original.m and p > 0.0
        }
        if kept:
            signals.append(type(sig).of(sig.delta, kept))
    return Scheme.raw(original.m, signals)


def _shift_params(
    params: CensorshipParams, original: Instance, padded: Instance
) -> CensorshipParams | None:
    """Re-index censorship parameters from the padded to the original
    instance; None when the threshold itself was a padding state."""
    if padded.m == original.m:
        return params
    offset = 1 if padded.v[0] != original.v[0] else 0
    threshold = params.threshold_state - offset
    if not 0 <= threshold < original.m:
        return None
    high = frozenset(
        i - offset for i in params.high_states if 0 <= i - offset < original.m
    )
    return CensorshipParams(
        threshold_state=threshold,
        threshold_prob=params.threshold_prob,
        pooling_signal=params.pooling_signal,
        high_states=high,
    )


def _level_value(level: RationalityLevel) -> float | str:
    return "inf" if level.is_fully_rational else float(level.beta)


def _scheme_payload(scheme: Scheme) -> dict:
    return json.loads(scheme_to_json(scheme))


def _params_payload(params: CensorshipParams | None) -> dict | None:
    return None if params is None else json.loads(censorship_params_to_json(params))


# ---------------------------------------------------------------------------
# solve


def cmd_solve(config: RunConfig) -> tuple[dict, tuple[list[str], list[list]]]:
    """Run one solver mode on one instance at one level."""
    instance = _load_instance(config)
    level = _single_level(config)
    mode = config.mode
    if mode not in _MODES:
        raise ValidationError(f"unknown mode {mode!r}; choose one of {_MODES}")

    params: CensorshipParams | None = None
    regime: str | None = None
    note: str | None = None
    uses_grid = False
    if mode == "rational":
        if not level.is_fully_rational:
            raise ValidationError("mode 'rational' takes the level 'inf'")
        solution = rational_optimal(instance)
        scheme, params, note = solution.scheme, solution.params, solution.note
    elif mode == "sisu":
        padded = normalize_instance(instance)
        solution = quantal_optimal(padded, level)
        scheme = _strip_padding(solution.scheme, instance, padded)
        params = _shift_params(solution.params, instance, padded)
        note = solution.note
    elif mode == "sdsu-binary":
        solution = binary_optimal(instance, level)
        scheme, params, regime = solution.scheme, solution.params, solution.regime
    else:
        solver: Callable[..., Scheme] = {
            "pairwise": optimal_pairwise,
            "four-approx": four_approx,
            "censorship-approx": censorship_m_approx,
            "direct-approx": direct_m_approx,
        }[mode]
        scheme = solver(instance, level, grid_points=config.grid_points)
        uses_grid = True

    validate_scheme(instance, scheme)
    payoff = evaluate_payoff(instance, level, scheme)
    log_payoff = evaluate_log_payoff(instance, level, scheme)
    payload = {
        "command": "solve",
        "mode": mode,
        "beta": _level_value(level),
        "payoff": payoff,
        "log_payoff": log_payoff,
        "scheme": _scheme_payload(scheme),
        "params": _params_payload(params),
        "regime": regime,
        "note": note,
    }
    if uses_grid:
        payload["grid_points"] = config.grid_points

    header = ["mode", "beta", "payoff", "log_payoff", "signal", "delta", "state", "mass"]
    rows: list[list] = []
    for index, sig in enumerate(scheme.signals, start=1):
        for state, p in sig.mass:
            rows.append(
                [mode, _level_value(level), payoff, log_payoff, index, sig.delta, state + 1, p]
            )
    return payload, (header, rows)


# ---------------------------------------------------------------------------
# robust


def cmd_robust(config: RunConfig) -> tuple[dict, tuple[list[str], list[list]]]:
    """Sweep one scheme across a level set and report per-level ratios."""
    instance = _load_instance(config)
    if not config.scheme:
        raise ValidationError("this command needs --scheme")
    scheme, source = _resolve_scheme(config.scheme, instance, config.levels)
    report = robust_ratio(
        instance, scheme, config.levels, grid_points=config.grid_points
    )
    payload = {
        "command": "robust",
        "scheme_source": source,
        "grid_points": config.grid_points,
        "report": report.to_json(),
    }
    header = ["beta", "optimal", "achieved", "ratio", "solver"]
    rows = [
        [
            _level_value(level),
            report.optimal[i],
            report.achieved[i],
            report.ratios[i],
            report.solvers[i],
        ]
        for i, level in enumerate(report.beta_set)
    ]
    return payload, (header, rows)


# ---------------------------------------------------------------------------
# bench


def _scan_split(
    instance: Instance,
    level: RationalityLevel,
    builder: Callable[[Instance, CensorshipParams], Scheme],
    slices: int,
) -> float:
    """Best log payoff of a threshold/slice family over a grid scan with
    golden-section polish. builder is make_censorship or make_direct."""

    def log_pay(threshold: int, prob: float) -> float:
        pars = censorship_params(
            instance, range(threshold + 1, instance.m), threshold, prob
        )
        return evaluate_log_payoff(instance, level, builder(instance, pars))

    slices = max(2, slices)
    step = 1.0 / (slices - 1)
    best = -math.inf
    for threshold in range(instance.m):
        values = [log_pay(threshold, k * step) for k in range(slices)]
        peak = max(range(slices), key=lambda k: values[k])
        best = max(best, values[peak])
        lo = max(0.0, (peak - 1) * step)
        hi = min(1.0, (peak + 1) * step)
        best = max(best, _golden_max(lambda p: log_pay(threshold, p), lo, hi))
    return best


def _golden_max(objective: Callable[[float], float], lo: float, hi: float) -> float:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(90):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = objective(d)
    mid = 0.5 * (a + b)
    return objective(mid)


def _bench_sizes(config: RunConfig) -> range:
    if config.m_range is None:
        raise ValidationError("this command needs --m")
    lo, hi = config.m_range
    sizes = range(lo, hi + 1)
    for m in sizes:
        if m > _MAX_FAMILY_SIZE:
            raise ValidationError(
                f"the benchmark families cap at m = {_MAX_FAMILY_SIZE}, got {m}"
            )
    return sizes


def _bench_sisu_direct(config: RunConfig) -> tuple[list[str], list[list]]:
    header = [
        "m",
        "beta",
        "opt_log_payoff",
        "censorship_log_payoff",
        "direct_log_payoff",
        "direct_ratio",
        "ratio_floor",
    ]
    rows: list[list] = []
    for m in _bench_sizes(config):
        instance, level = direct_lowerbound_instance(m)
        padded = normalize_instance(instance)
        scheme = _strip_padding(quantal_optimal(padded, level).scheme, instance, padded)
        opt_log = evaluate_log_payoff(instance, level, scheme)
        direct_log = best_direct(instance, level, config.grid_points).log_payoff
        rows.append(
            [
                m,
                level.beta,
                opt_log,
                opt_log,
                direct_log,
                math.exp(opt_log - direct_log),
                m / (4.0 * math.e + 1.0),
            ]
        )
    return header, rows


def _bench_sdsu_lower(config: RunConfig) -> tuple[list[str], list[list]]:
    header = [
        "m",
        "beta",
        "witness_log_payoff",
        "censorship_log_payoff",
        "direct_log_payoff",
        "censorship_ratio",
        "direct_ratio",
    ]
    rows: list[list] = []
    for m in _bench_sizes(config):
        instance, level = lowerbound_instance(m)
        witness_log = evaluate_log_payoff(
            instance, level, lowerbound_witness(instance, level)
        )
        cens_log = _scan_split(instance, level, make_censorship, config.grid_points)
        direct_log = _scan_split(instance, level, make_direct, config.grid_points)
        rows.append(
            [
                m,
                level.beta,
                witness_log,
                cens_log,
                direct_log,
                math.exp(witness_log - cens_log),
                math.exp(witness_log - direct_log),
            ]
        )
    return header, rows


def _bench_impossibility(config: RunConfig) -> tuple[list[str], list[list]]:
    """Level-robustness family: m indexes the level 3^m, the base scheme
    is optimal at level 3, and the bound column is the factor-revealing
    LP value for the level set {3^1, ..., 3^m}."""
    header = [
        "m",
        "beta",
        "opt_log_payoff",
        "base_scheme_log_payoff",
        "ratio",
        "factor_bound",
    ]
    instance = lowerbound_instances()["impossibility"]()
    base = binary_optimal(instance, RationalityLevel(3.0)).scheme
    points = max(2, min(config.grid_points, _BOUND_GRID_CAP))
    span = instance.v[-1] - instance.v[0]
    grid = [instance.v[0] + span * k / (points - 1) for k in range(points)]
    rows: list[list] = []
    for m in _bench_sizes(config):
        if m < 1:
            raise ValidationError(f"the level exponent must be positive, got {m}")
        level = RationalityLevel(3.0**m)
        opt_log = evaluate_log_payoff(
            instance, level, binary_optimal(instance, level).scheme
        )
        base_log = evaluate_log_payoff(instance, level, base)
        levels = [RationalityLevel(3.0**k) for k in range(1, m + 1)]
        rows.append(
            [
                m,
                level.beta,
                opt_log,
                base_log,
                math.exp(opt_log - base_log),
                factor_revealing_bound(levels, grid),
            ]
        )
    return header, rows


def cmd_bench(config: RunConfig) -> tuple[dict, tuple[list[str], list[list]]]:
    """Tabulate one separation family over a size range."""
    benches = {
        "sisu-direct": _bench_sisu_direct,
        "sdsu-lower": _bench_sdsu_lower,
        "impossibility": _bench_impossibility,
    }
    if config.family not in benches:
        raise ValidationError(
            f"unknown family {config.family!r}; choose one of {_FAMILIES}"
        )
    header, rows = benches[config.family](config)
    payload = {
        "command": "bench",
        "family": config.family,
        "m_range": list(config.m_range or ()),
        "grid_points": config.grid_points,
        "columns": header,
        "rows": rows,
    }
    return payload, (header, rows)


# ---------------------------------------------------------------------------
# oracle and simulate


def cmd_oracle(config: RunConfig) -> tuple[dict, tuple[list[str], list[list]]]:
    """Grid-LP reference solve, optionally anchored by the exact solver."""
    instance = _load_instance(config)
    level = _finite_level(config)

    augment = None
    extra: tuple[float, ...] = ()
    if config.augment_analytic:
        if instance.m == 2:
            anchor = binary_optimal(instance, level).scheme
            solver = "binary-censorship"
        elif instance.is_sisu:
            padded = normalize_instance(instance)
            anchor = _strip_padding(
                quantal_optimal(padded, level).scheme, instance, padded
            )
            solver = "threshold-censorship"
        else:
            raise ValidationError(
                "analytic augmentation needs a two-state or a flat-payoff instance"
            )
        solver_payoff = evaluate_payoff(instance, level, anchor)
        extra = tuple(sig.delta for sig in anchor.signals)
        augment = {"solver": solver, "solver_payoff": solver_payoff}

    result = grid_lp_optimal(
        instance, level, grid_points=config.grid_points, extra_points=extra
    )
    if augment is not None:
        augment["gap"] = augment["solver_payoff"] - result.value

    payload = {
        "command": "oracle",
        "beta": _level_value(level),
        "grid_points": config.grid_points,
        "grid_size": len(result.grid),
        "value": result.value,
        "log_value": math.log(result.value) if result.value > 0.0 else -math.inf,
        "duality_gap": result.duality_gap,
        "primal_residual": result.primal_residual,
        "dual_residual": result.dual_residual,
        "iterations": result.iterations,
        "scheme": _scheme_payload(result.scheme),
        "augment": augment,
    }
    header = [
        "beta",
        "grid_points",
        "grid_size",
        "value",
        "duality_gap",
        "solver_payoff",
        "gap",
    ]
    row = [
        _level_value(level),
        config.grid_points,
        len(result.grid),
        result.value,
        result.duality_gap,
        augment["solver_payoff"] if augment else None,
        augment["gap"] if augment else None,
    ]
    return payload, (header, [row])


def cmd_simulate(config: RunConfig) -> tuple[dict, tuple[list[str], list[list]]]:
    """Estimate per-signal action rates with the seeded shock sampler."""
    instance = _load_instance(config)
    level = _finite_level(config)
    if config.n is None:
        raise ValidationError("this command needs --n")
    scheme, source = _resolve_scheme(
        config.scheme or "full-reveal", instance, config.levels
    )
    report = gumbel_simulate(instance, level, scheme, config.n, config.seed)
    signals = [
        {
            "delta": report.deltas[i],
            "expected": report.expected[i],
            "empirical": report.rates[i],
            "abs_error": abs(report.rates[i] - report.expected[i]),
        }
        for i in range(len(report.deltas))
    ]
    payload = {
        "command": "simulate",
        "beta": _level_value(level),
        "scheme_source": source,
        "n": report.n,
        "seed": report.seed,
        "signals": signals,
    }
    header = ["signal", "delta", "expected", "empirical", "abs_error", "n", "seed"]
    rows = [
        [i + 1, s["delta"], s["expected"], s["empirical"], s["abs_error"], report.n, report.seed]
        for i, s in enumerate(signals)
    ]
    return payload, (header, rows)


# ---------------------------------------------------------------------------
# wiring


_DISPATCH: dict[str, Callable[[RunConfig], tuple[dict, tuple[list[str], list[list]]]]] = {
    "solve": cmd_solve,
    "robust": cmd_robust,
    "bench": cmd_bench,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persuasion",
        description="Signaling-scheme solvers for boundedly rational receivers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver mode on an instance")
    solve.add_argument("--instance", required=True, help="instance JSON file")
    solve.add_argument("--mode", required=True, help=f"one of {', '.join(_MODES)}")
    solve.add_argument("--beta", default="inf", help="level spec (single level)")
    solve.add_argument("--grid-points", type=int, default=2001)
    solve.add_argument("--csv", action="store_true")

    robust = sub.add_parser("robust", help="sweep a scheme across levels")
    robust.add_argument("--instance", required=True, help="instance JSON file")
    robust.add_argument(
        "--scheme",
        required=True,
        help="scheme JSON file, or full-reveal | no-info | rational-censorship"
        " | binary-robust:K=...",
    )
    robust.add_argument("--beta", required=True, help="level spec (set)")
    robust.add_argument("--grid-points", type=int, default=2001)
    robust.add_argument("--csv", action="store_true")

    bench = sub.add_parser("bench", help="tabulate a separation family")
    bench.add_argument("--family", required=True, help=f"one of {', '.join(_FAMILIES)}")
    bench.add_argument("--m", required=True, help="size range A..B (inclusive)")
    bench.add_argument("--grid-points", type=int, default=2001)
    bench.add_argument("--csv", action="store_true")

    oracle = sub.add_parser("oracle", help="grid-LP reference solve")
    oracle.add_argument("--instance", required=True, help="instance JSON file")
    oracle.add_argument("--beta", required=True, help="level spec (single finite)")
    oracle.add_argument("--grid-points", type=int, default=2001)
    oracle.add_argument(
        "--augment-analytic",
        action="store_true",
        help="add the exact solver's signals to the grid and report the gap",
    )
    oracle.add_argument("--csv", action="store_true")

    simulate = sub.add_parser("simulate", help="seeded receiver simulation")
    simulate.add_argument("--instance", required=True, help="instance JSON file")
    simulate.add_argument("--beta", required=True, help="level spec (single finite)")
    simulate.add_argument("--scheme", default="full-reveal")
    simulate.add_argument("--n", type=int, required=True, help="number of draws")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--csv", action="store_true")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        instance=getattr(args, "instance", None),
        levels=parse_levels(args.beta) if getattr(args, "beta", None) else (),
        mode=getattr(args, "mode", None),
        scheme=getattr(args, "scheme", None),
        grid_points=getattr(args, "grid_points", 2001),
        augment_analytic=getattr(args, "augment_analytic", False),
        n=getattr(args, "n", None),
        seed=getattr(args, "seed", 0),
        csv=getattr(args, "csv", False),
        family=getattr(args, "family", None),
        m_range=parse_m_range(args.m) if getattr(args, "m", None) else None,
    )


def _jsonify(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0.0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {key: _jsonify(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(item) for item in value]
    return value


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _emit(config: RunConfig, payload: dict, table: tuple[list[str], list[list]]) -> None:
    if config.csv:
        header, rows = table
        lines = [",".join(header)]
        lines.extend(",".join(_csv_cell(cell) for cell in row) for row in rows)
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        sys.stdout.write(json.dumps(_jsonify(payload), indent=2, sort_keys=True) + "\n")


def _error_payload(kind: str, exc: Exception) -> str:
    body = {"error": {"type": kind, "message": str(exc)}}
    return json.dumps(body, sort_keys=True) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        payload, table = _DISPATCH[config.command](config)
    except ValidationError as exc:
        sys.stdout.write(_error_payload("validation", exc))
        return 2
    except NumericalError as exc:
        sys.stdout.write(_error_payload("numeric", exc))
        return 3
    _emit(config, payload, table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
