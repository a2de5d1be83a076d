"""Core types for persuasion against a logit (quantal-response) receiver.

An instance has m states with prior weights lam (summing to 1), strictly
increasing receiver stakes v (the receiver prefers action 0 at state i iff
v_i > 0), and nonnegative sender payoffs u earned when action 1 is taken.
A scheme sends signals; each signal is identified by the posterior stake
mean delta it induces and by the per-state emission probabilities. The
receiver takes action 1 with probability W(delta) = 1/(1 + exp(beta*delta)),
the fully rational limit being the step 1{delta <= 0}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from collections.abc import Iterable, Mapping, Sequence

from ._util import log1pexp, log_weighted_mean, logsumexp, shifted_weight_sum

__all__ = [
    "ValidationError",
    "NumericalError",
    "RationalityLevel",
    "FULLY_RATIONAL",
    "Instance",
    "Signal",
    "Scheme",
    "SchemeReport",
    "CensorshipParams",
    "response",
    "response_derivative",
    "log_response",
    "full_reveal",
    "no_info",
    "validate_scheme",
    "evaluate_payoff",
    "evaluate_log_payoff",
    "censorship_params",
    "make_censorship",
    "make_direct",
    "mix",
    "instance_to_json",
    "instance_from_json",
    "scheme_to_json",
    "scheme_from_json",
    "censorship_params_to_json",
    "censorship_params_from_json",
]

MASS_TOL = 1e-12         # per-state emission totals must hit 1 this tightly
BAYES_TOL = 1e-9         # absolute plausibility residual allowed per signal
MERGE_TOL = 1e-12        # signals closer than this in delta are one signal
POOL_MATCH_TOL = 1e-10   # stored pooling signal vs recomputed pooled mean


class ValidationError(ValueError):
    """Raised when an input object violates a structural contract."""


class NumericalError(RuntimeError):
    """Raised when an iterative routine fails to reach its residual target."""


# ---------------------------------------------------------------------------
# rationality level and the response curve


@dataclass(frozen=True)
class RationalityLevel:
    """Receiver rationality: finite beta >= 0, or None for the rational limit.

    beta = 0 is the uniform coin (acts 1 with prob 1/2 regardless of the
    signal); beta = inf is normalized to the fully rational step response.
    """

    beta: float | None = None

    def __post_init__(self) -> None:
        if self.beta is None:
            return
        b = float(self.beta)
        if math.isnan(b):
            raise ValidationError("rationality level must not be NaN")
        if b == math.inf:
            object.__setattr__(self, "beta", None)
            return
        if b < 0.0:
            raise ValidationError(f"rationality level must be >= 0, got {b}")
        object.__setattr__(self, "beta", b)

    @property
    def is_fully_rational(self) -> bool:
        return self.beta is None

    @classmethod
    def parse(cls, token: str) -> "RationalityLevel":
        """Parse 'inf' or a float literal."""
        t = token.strip().lower()
        if t in ("inf", "infinity", "rational"):
            return cls(None)
        return cls(float(t))

    def __str__(self) -> str:
        return "inf" if self.beta is None else repr(self.beta)


FULLY_RATIONAL = RationalityLevel(None)


def response(level: RationalityLevel, delta: float) -> float:
    """Action-1 probability W(delta) at the given rationality level.

    W(delta) = 1/(1 + exp(beta*delta)) for finite beta; the fully rational
    receiver plays the step 1{delta <= 0} (ties go to action 1).
    """
    if math.isnan(delta):
        raise ValidationError("delta must not be NaN")
    if level.is_fully_rational:
        return 1.0 if delta <= 0.0 else 0.0
    x = level.beta * delta
    if x >= 0.0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def response_derivative(level: RationalityLevel, delta: float) -> float:
    """d/d(delta) of the response: -beta * W(delta) * W(-delta).

    Even in delta by construction. Errors at the fully rational level,
    where the response is a step and has no derivative.
    """
    if level.is_fully_rational:
        raise ValidationError("the step response has no derivative")
    if math.isnan(delta):
        raise ValidationError("delta must not be NaN")
    e = math.exp(-abs(level.beta * delta))
    return -level.beta * e / ((1.0 + e) * (1.0 + e))


def log_response(level: RationalityLevel, delta: float) -> float:
    """log W(delta), computed without underflow for large beta*delta."""
    if level.is_fully_rational:
        if delta <= 0.0:
            return 0.0
        return -math.inf
    return -log1pexp(level.beta * delta)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    """A prior over m states: weights lam, stakes v, sender payoffs u.

    log_lam always holds the normalized log weights; lam = exp(log_lam) may
    underflow to 0 for extreme instances, in which case log_weight marks the
    instance as one whose payoffs must be accumulated in log domain.
    """

    v: tuple[float, ...]
    u: tuple[float, ...]
    lam: tuple[float, ...]
    log_lam: tuple[float, ...]
    log_weight: bool = False

    def __post_init__(self) -> None:
        m = len(self.v)
        if m == 0:
            raise ValidationError("instance needs at least one state")
        if not (len(self.u) == len(self.lam) == len(self.log_lam) == m):
            raise ValidationError("v, u, lam, log_lam must share a length")
        for name, xs in (("v", self.v), ("u", self.u)):
            if any(math.isnan(x) or math.isinf(x) for x in xs):
                raise ValidationError(f"{name} entries must be finite")
        if any(self.v[i] >= self.v[i + 1] for i in range(m - 1)):
            raise ValidationError("v must be strictly increasing")
        if any(x < 0.0 for x in self.u):
            raise ValidationError("u entries must be nonnegative")
        if any(x < 0.0 or math.isnan(x) for x in self.lam):
            raise ValidationError("lam entries must be nonnegative")
        total = math.fsum(self.lam)
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(
                f"lam must sum to 1 within {MASS_TOL}, got {total!r}"
            )

    @classmethod
    def from_weights(
        cls, lam: Sequence[float], v: Sequence[float], u: Sequence[float]
    ) -> "Instance":
        """Standard constructor from linear-space prior weights."""
        lam_t = tuple(float(x) for x in lam)
        log_lam = tuple(
            math.log(x) if x > 0.0 else -math.inf for x in lam_t
        )
        return cls(
            v=tuple(float(x) for x in v),
            u=tuple(float(x) for x in u),
            lam=lam_t,
            log_lam=log_lam,
            log_weight=False,
        )

    @classmethod
    def from_log_weights(
        cls, log_lam: Sequence[float], v: Sequence[float], u: Sequence[float]
    ) -> "Instance":
        """Constructor from unnormalized log weights.

        Weights are shifted so that logsumexp(log_lam) == 0; the linear-space
        lam of extreme states may underflow to exactly 0.0, which downstream
        log-domain evaluators tolerate.
        """
        raw = [float(x) for x in log_lam]
        if any(math.isnan(x) or x == math.inf for x in raw):
            raise ValidationError("log weights must be < inf and not NaN")
        norm = logsumexp(raw)
        if norm == -math.inf:
            raise ValidationError("log weights must not all be -inf")
        shifted = tuple(x - norm for x in raw)
        return cls(
            v=tuple(float(x) for x in v),
            u=tuple(float(x) for x in u),
            lam=tuple(math.exp(x) for x in shifted),
            log_lam=shifted,
            log_weight=True,
        )

    @property
    def m(self) -> int:
        return len(self.v)

    @property
    def is_sisu(self) -> bool:
        """True when the sender payoff is state independent (all u equal)."""
        return all(x == self.u[0] for x in self.u)

    def prior_mean(self) -> float:
        """Prior stake mean, robust to log-weight scaling."""
        return log_weighted_mean(self.log_lam, self.v)


# ---------------------------------------------------------------------------
# signals and schemes


def _canon_mass(mass: Mapping[int, float] | Iterable[tuple[int, float]]):
    items = mass.items() if isinstance(mass, Mapping) else mass
    out = []
    for state, p in sorted(items):
        p = float(p)
        if math.isnan(p) or p < -MASS_TOL or p > 1.0 + MASS_TOL:
            raise ValidationError(f"emission probability out of range: {p!r}")
        if p <= 0.0:
            continue
        out.append((int(state), min(p, 1.0)))
    return tuple(out)


@dataclass(frozen=True)
class Signal:
    """One signal: induced stake mean delta plus per-state emission probs.

    mass holds (state, probability) pairs, 0-based states, sorted, zeros
    dropped; the support must be nonempty.
    """

    delta: float
    mass: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if math.isnan(self.delta) or math.isinf(self.delta):
            raise ValidationError("signal delta must be finite")
        if not self.mass:
            raise ValidationError("signal support must be nonempty")

    @classmethod
    def of(
        cls, delta: float, mass: Mapping[int, float] | Iterable[tuple[int, float]]
    ) -> "Signal":
        return cls(delta=float(delta), mass=_canon_mass(mass))

    @property
    def mass_dict(self) -> dict[int, float]:
        return dict(self.mass)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.mass)


@dataclass(frozen=True)
class Scheme:
    """A signaling scheme: signals sorted by delta.

    Built via `canonical` (signals within MERGE_TOL of each other in delta
    are merged, the canonical form) or `raw` (kept separate, needed when a
    scheme is deliberately decomposed into sub-signals sharing a delta).
    """

    num_states: int
    signals: tuple[Signal, ...]

    @classmethod
    def canonical(cls, num_states: int, signals: Iterable[Signal]) -> "Scheme":
        ordered = sorted(signals, key=lambda s: s.delta)
        merged: list[tuple[float, dict[int, float]]] = []
        for sig in ordered:
            if merged and sig.delta - merged[-1][0] <= MERGE_TOL:
                acc = merged[-1][1]
                for state, p in sig.mass:
                    acc[state] = acc.get(state, 0.0) + p
            else:
                merged.append((sig.delta, dict(sig.mass)))
        return cls(
            num_states=num_states,
            signals=tuple(Signal.of(d, mass) for d, mass in merged),
        )

    @classmethod
    def raw(cls, num_states: int, signals: Iterable[Signal]) -> "Scheme":
        ordered = tuple(sorted(signals, key=lambda s: s.delta))
        return cls(num_states=num_states, signals=ordered)

    def state_totals(self) -> list[float]:
        totals = [0.0] * self.num_states
        for sig in self.signals:
            for state, p in sig.mass:
                if not 0 <= state < self.num_states:
                    raise ValidationError(
                        f"signal references state {state} outside 0..{self.num_states - 1}"
                    )
                totals[state] += p
        return totals


def full_reveal(instance: Instance) -> Scheme:
    """Reveal every state: one signal per state at delta = v_i."""
    return Scheme.canonical(
        instance.m,
        (Signal.of(instance.v[i], {i: 1.0}) for i in range(instance.m)),
    )


def no_info(instance: Instance) -> Scheme:
    """Pool everything at the prior mean."""
    mean = instance.prior_mean()
    return Scheme.canonical(
        instance.m,
        [Signal.of(mean, {i: 1.0 for i in range(instance.m)})],
    )


# ---------------------------------------------------------------------------
# validation and payoff


@dataclass(frozen=True)
class SchemeReport:
    """validate_scheme outcome: residuals plus human-readable messages."""

    ok: bool
    max_mass_error: float
    max_bayes_residual: float
    bayes_residuals: tuple[float, ...]
    messages: tuple[str, ...]


def validate_scheme(instance: Instance, scheme: Scheme) -> SchemeReport:
    """Check a scheme against an instance; reports, never raises.

    Valid means: per-state emission totals equal 1 within 1e-12, every
    signal's plausibility residual sum_i lam_i (v_i - delta) pi_i is within
    1e-9 in absolute value, and all emission probabilities are in [0, 1].
    """
    messages: list[str] = []
    if scheme.num_states != instance.m:
        messages.append(
            f"scheme is over {scheme.num_states} states, instance has {instance.m}"
        )
        return SchemeReport(False, math.inf, math.inf, (), tuple(messages))

    try:
        totals = scheme.state_totals()
    except ValidationError as exc:
        return SchemeReport(False, math.inf, math.inf, (), (str(exc),))

    max_mass_err = max(abs(t - 1.0) for t in totals) if totals else math.inf
    if max_mass_err > MASS_TOL:
        worst = max(range(len(totals)), key=lambda i: abs(totals[i] - 1.0))
        messages.append(
            f"state {worst} emits total mass {totals[worst]!r}, expected 1"
        )

    residuals = []
    for sig in scheme.signals:
        res = math.fsum(
            instance.lam[state] * (instance.v[state] - sig.delta) * p
            for state, p in sig.mass
        )
        residuals.append(res)
        if abs(res) > BAYES_TOL:
            messages.append(
                f"signal at delta={sig.delta!r} has plausibility residual {res!r}"
            )
    max_bayes = max((abs(r) for r in residuals), default=0.0)

    ok = not messages
    return SchemeReport(
        ok=ok,
        max_mass_error=max_mass_err,
        max_bayes_residual=max_bayes,
        bayes_residuals=tuple(residuals),
        messages=tuple(messages),
    )


def _require_valid(instance: Instance, scheme: Scheme) -> None:
    report = validate_scheme(instance, scheme)
    if not report.ok:
        raise ValidationError("; ".join(report.messages))


def evaluate_log_payoff(
    instance: Instance, level: RationalityLevel, scheme: Scheme
) -> float:
    """log of the sender's expected payoff; -inf when the payoff is 0.

    Accumulated in log domain so that instances whose weights underflow in
    linear space still yield meaningful ratios.
    """
    _require_valid(instance, scheme)
    terms = []
    for sig in scheme.signals:
        lw = log_response(level, sig.delta)
        if lw == -math.inf:
            continue
        for state, p in sig.mass:
            if instance.u[state] <= 0.0 or instance.log_lam[state] == -math.inf:
                continue
            terms.append(
                instance.log_lam[state]
                + math.log(instance.u[state])
                + math.log(p)
                + lw
            )
    return logsumexp(terms)


def evaluate_payoff(
    instance: Instance, level: RationalityLevel, scheme: Scheme
) -> float:
    """Sender's expected payoff sum_sigma W(delta_sigma) sum_i lam_i u_i pi_i.

    The scheme must pass validate_scheme; raises ValidationError otherwise.
    """
    if instance.log_weight:
        lp = evaluate_log_payoff(instance, level, scheme)
        return 0.0 if lp == -math.inf else math.exp(lp)
    _require_valid(instance, scheme)
    return math.fsum(
        response(level, sig.delta)
        * math.fsum(instance.lam[state] * instance.u[state] * p for state, p in sig.mass)
        for sig in scheme.signals
    )


# ---------------------------------------------------------------------------
# censorship and direct schemes


@dataclass(frozen=True)
class CensorshipParams:
    """A censorship-style scheme in parametric form.

    high_states are pooled together with a threshold_prob slice of
    threshold_state at pooling_signal (the pooled stake mean); the remaining
    states are revealed (censorship) or pooled on the other side (direct).
    pooling_signal is None when the pooled prior mass is zero.
    """

    threshold_state: int
    threshold_prob: float
    pooling_signal: float | None
    high_states: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        p = float(self.threshold_prob)
        if math.isnan(p) or p < -MASS_TOL or p > 1.0 + MASS_TOL:
            raise ValidationError(f"threshold_prob must lie in [0, 1], got {p!r}")
        # + 0.0 canonicalizes -0.0 so serialized params are byte-stable
        object.__setattr__(self, "threshold_prob", min(max(p, 0.0), 1.0) + 0.0)
        object.__setattr__(self, "high_states", frozenset(self.high_states))
        if self.threshold_state in self.high_states:
            raise ValidationError("threshold_state must not be in high_states")


def _pooled_mean(
    instance: Instance, states: Iterable[int], extra: tuple[int, float] | None
) -> float | None:
    """Prior-weighted stake mean of `states` plus an optional fractional slice.

    None when the pooled prior mass is zero.
    """
    log_w = [instance.log_lam[i] for i in states]
    vals = [instance.v[i] for i in states]
    if extra is not None:
        state, frac = extra
        if frac > 0.0:
            log_w.append(instance.log_lam[state] + math.log(frac))
            vals.append(instance.v[state])
    mean = log_weighted_mean(log_w, vals)
    return None if math.isnan(mean) else mean


def censorship_params(
    instance: Instance,
    high_states: Iterable[int],
    threshold_state: int,
    threshold_prob: float,
) -> CensorshipParams:
    """Build CensorshipParams with the pooled mean computed from the instance.

    Errors when threshold_prob > 0 but the pooled prior mass is zero (the
    pooled mean would be undefined).
    """
    high = frozenset(int(i) for i in high_states)
    i_t = int(threshold_state)
    if not all(0 <= i < instance.m for i in high) or not 0 <= i_t < instance.m:
        raise ValidationError("state indices out of range")
    p = float(threshold_prob)
    if math.isnan(p) or p < -MASS_TOL or p > 1.0 + MASS_TOL:
        raise ValidationError(f"threshold_prob must lie in [0, 1], got {p!r}")
    p = min(max(p, 0.0), 1.0) + 0.0
    mean = _pooled_mean(instance, sorted(high), (i_t, p))
    if mean is None and p > 0.0:
        raise ValidationError(
            "pooled prior mass is zero but threshold_prob > 0; pooled mean undefined"
        )
    return CensorshipParams(
        threshold_state=i_t,
        threshold_prob=p,
        pooling_signal=mean,
        high_states=high,
    )


def _check_pool_matches(instance: Instance, params: CensorshipParams) -> float | None:
    mean = _pooled_mean(
        instance, sorted(params.high_states), (params.threshold_state, params.threshold_prob)
    )
    if mean is None:
        if params.threshold_prob > 0.0:
            raise ValidationError(
                "pooled prior mass is zero but threshold_prob > 0; pooled mean undefined"
            )
        if params.pooling_signal is not None:
            raise ValidationError(
                "pooling_signal set but the pooled prior mass is zero"
            )
        return None
    if params.pooling_signal is None or abs(mean - params.pooling_signal) > POOL_MATCH_TOL:
        raise ValidationError(
            f"pooling_signal {params.pooling_signal!r} does not match the "
            f"pooled prior mean {mean!r}"
        )
    return mean


def make_censorship(instance: Instance, params: CensorshipParams) -> Scheme:
    """Censorship scheme: pool high_states plus a threshold_prob slice of the
    threshold state at the pooled mean; reveal everything else.

    Zero-prior pooled states with threshold_prob = 0 are revealed instead
    (their posterior is unconstrained). The pool is labeled with the stored
    pooling_signal, which must match the recomputed mean within 1e-10; the
    stored value is authoritative so solvers can pin an exact boundary label.
    """
    for i in params.high_states:
        if not 0 <= i < instance.m:
            raise ValidationError(f"high state {i} out of range")
    if not 0 <= params.threshold_state < instance.m:
        raise ValidationError(f"threshold state {params.threshold_state} out of range")
    mean = _check_pool_matches(instance, params)

    signals: list[Signal] = []
    pooled: dict[int, float] = {}
    if mean is not None:
        pooled = {i: 1.0 for i in params.high_states}
        if params.threshold_prob > 0.0:
            pooled[params.threshold_state] = params.threshold_prob
        signals.append(Signal.of(params.pooling_signal, pooled))
    else:
        # zero-mass pool: reveal its states individually
        for i in sorted(params.high_states):
            signals.append(Signal.of(instance.v[i], {i: 1.0}))

    leftover = 1.0 - params.threshold_prob if mean is not None else 1.0
    if leftover > 0.0:
        signals.append(
            Signal.of(instance.v[params.threshold_state], {params.threshold_state: leftover})
        )
    for i in range(instance.m):
        if i == params.threshold_state or i in params.high_states:
            continue
        signals.append(Signal.of(instance.v[i], {i: 1.0}))
    return Scheme.canonical(instance.m, signals)


def make_direct(instance: Instance, params: CensorshipParams) -> Scheme:
    """Direct scheme: pool high_states plus a threshold_prob slice of the
    threshold state on one side, and all remaining mass on the other side
    at its own pooled mean. Two signals when both pools carry mass.
    """
    for i in params.high_states:
        if not 0 <= i < instance.m:
            raise ValidationError(f"high state {i} out of range")
    if not 0 <= params.threshold_state < instance.m:
        raise ValidationError(f"threshold state {params.threshold_state} out of range")
    mean_high = _check_pool_matches(instance, params)

    low_states = [
        i
        for i in range(instance.m)
        if i != params.threshold_state and i not in params.high_states
    ]
    leftover = 1.0 - params.threshold_prob
    mean_low = _pooled_mean(
        instance, low_states, (params.threshold_state, leftover)
    )

    signals: list[Signal] = []
    if mean_high is not None:
        pooled = {i: 1.0 for i in params.high_states}
        if params.threshold_prob > 0.0:
            pooled[params.threshold_state] = params.threshold_prob
        signals.append(Signal.of(params.pooling_signal, pooled))
    else:
        for i in sorted(params.high_states):
            signals.append(Signal.of(instance.v[i], {i: 1.0}))

    if mean_low is not None:
        pooled_low = {i: 1.0 for i in low_states}
        if leftover > 0.0:
            pooled_low[params.threshold_state] = leftover
        signals.append(Signal.of(mean_low, pooled_low))
    else:
        # zero-mass low pool: reveal its states individually
        for i in low_states:
            signals.append(Signal.of(instance.v[i], {i: 1.0}))
        if leftover > 0.0:
            signals.append(
                Signal.of(
                    instance.v[params.threshold_state],
                    {params.threshold_state: leftover},
                )
            )
    return Scheme.canonical(instance.m, signals)


def mix(schemes: Sequence[Scheme], weights: Sequence[float]) -> Scheme:
    """Convex combination of schemes; signals with equal delta are merged.

    Weights must be nonnegative and sum to 1 within 1e-12.
    """
    if not schemes:
        raise ValidationError("mix needs at least one scheme")
    if len(schemes) != len(weights):
        raise ValidationError("one weight per scheme required")
    if any(w < 0.0 or math.isnan(w) for w in weights):
        raise ValidationError("weights must be nonnegative")
    if abs(math.fsum(weights) - 1.0) > MASS_TOL:
        raise ValidationError(f"weights must sum to 1, got {math.fsum(weights)!r}")
    num_states = schemes[0].num_states
    if any(s.num_states != num_states for s in schemes):
        raise ValidationError("schemes must share the state space")
    signals = [
        Signal.of(sig.delta, {state: w * p for state, p in sig.mass})
        for scheme, w in zip(schemes, weights)
        if w > 0.0
        for sig in scheme.signals
    ]
    return Scheme.canonical(num_states, signals)


# ---------------------------------------------------------------------------
# JSON serialization (floats round-trip exactly via repr)


def instance_to_json(instance: Instance) -> str:
    states = []
    for i in range(instance.m):
        entry: dict[str, float] = {}
        if instance.log_weight:
            entry["log_lambda"] = instance.log_lam[i]
        else:
            entry["lambda"] = instance.lam[i]
        entry["v"] = instance.v[i]
        entry["u"] = instance.u[i]
        states.append(entry)
    return json.dumps({"states": states}, sort_keys=True, separators=(",", ":"))


def instance_from_json(text: str) -> Instance:
    try:
        data = json.loads(text)
        states = data["states"]
        if not isinstance(states, list) or not states:
            raise ValidationError("instance JSON needs a nonempty 'states' list")
        v = [float(s["v"]) for s in states]
        u = [float(s["u"]) for s in states]
        if all("log_lambda" in s for s in states):
            return Instance.from_log_weights(
                [float(s["log_lambda"]) for s in states], v, u
            )
        if all("lambda" in s for s in states):
            return Instance.from_weights([float(s["lambda"]) for s in states], v, u)
        raise ValidationError(
            "every state needs 'lambda', or every state needs 'log_lambda'"
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed instance JSON: {exc}") from exc


def scheme_to_json(scheme: Scheme) -> str:
    signals = [
        {
            "delta": sig.delta,
            "mass": {str(state + 1): p for state, p in sig.mass},
        }
        for sig in scheme.signals
    ]
    return json.dumps({"signals": signals}, sort_keys=True, separators=(",", ":"))


def scheme_from_json(text: str, num_states: int | None = None) -> Scheme:
    """Load a scheme; states are 1-based in JSON. Signals are kept separate
    (no merging), so a serialized decomposition round-trips."""
    try:
        data = json.loads(text)
        raw = data["signals"]
        if not isinstance(raw, list) or not raw:
            raise ValidationError("scheme JSON needs a nonempty 'signals' list")
        signals = [
            Signal.of(
                float(entry["delta"]),
                {int(k) - 1: float(p) for k, p in entry["mass"].items()},
            )
            for entry in raw
        ]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed scheme JSON: {exc}") from exc
    if num_states is None:
        num_states = 1 + max(state for sig in signals for state, _ in sig.mass)
    return Scheme.raw(num_states, signals)


def censorship_params_to_json(params: CensorshipParams) -> str:
    return json.dumps(
        {
            "i_dagger": params.threshold_state + 1,
            "p_dagger": params.threshold_prob,
            "delta_dagger": params.pooling_signal,
            "high_states": sorted(i + 1 for i in params.high_states),
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def censorship_params_from_json(text: str) -> CensorshipParams:
    try:
        data = json.loads(text)
        return CensorshipParams(
            threshold_state=int(data["i_dagger"]) - 1,
            threshold_prob=float(data["p_dagger"]),
            pooling_signal=(
                None if data.get("delta_dagger") is None else float(data["delta_dagger"])
            ),
            high_states=frozenset(int(i) - 1 for i in data["high_states"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed censorship params JSON: {exc}") from exc
