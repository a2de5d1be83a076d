"""Seeded random-instance generators shared across the test suites."""

from __future__ import annotations

import numpy as np

from persuasion import Instance


def random_sisu_instance(
    rng: np.random.Generator, m: int, spread: float = 3.0
) -> Instance:
    """Random flat-payoff instance whose stakes straddle zero.

    Stakes are sorted uniforms on [-spread, spread] redrawn until they are
    well separated with a strictly negative first and strictly positive
    last entry; weights are positive and normalized.
    """
    for _ in range(1000):
        v = np.sort(rng.uniform(-spread, spread, size=m))
        if v[0] < -1e-3 and v[-1] > 1e-3 and np.min(np.diff(v)) > 1e-4:
            break
    else:
        raise AssertionError("could not draw straddling stakes")
    w = rng.uniform(0.05, 1.0, size=m)
    lam = w / w.sum()
    return Instance.from_weights(lam.tolist(), v.tolist(), [1.0] * m)


def random_instance(
    rng: np.random.Generator, m: int, spread: float = 3.0
) -> Instance:
    """Random instance with state-dependent sender payoffs in [0, 2]."""
    base = random_sisu_instance(rng, m, spread)
    u = rng.uniform(0.0, 2.0, size=m)
    return Instance.from_weights(base.lam, base.v, u.tolist())


def random_binary_instance(
    rng: np.random.Generator,
    spread: float = 3.0,
    allow_zero_u: bool = False,
) -> Instance:
    """Random two-state instance with v1 < 0 < v2."""
    v1 = -float(rng.uniform(0.05, spread))
    v2 = float(rng.uniform(0.05, spread))
    lam1 = float(rng.uniform(0.05, 0.95))
    u = rng.uniform(0.0 if allow_zero_u else 0.1, 2.0, size=2)
    return Instance.from_weights([lam1, 1.0 - lam1], [v1, v2], u.tolist())


def random_scheme(
    rng: np.random.Generator, instance: Instance, moves: int = 3
) -> "Scheme":
    """Random plausible scheme: start revealed, pool random slices.

    Each move takes a random fraction of the remaining mass of a random
    state subset and pools it at the subset's prior-weighted mean, which
    keeps the scheme plausible by construction.
    """
    from persuasion import Scheme, Signal

    m = instance.m
    left = [1.0] * m
    signals = []
    for _ in range(moves):
        size = int(rng.integers(2, m + 1))
        states = sorted(rng.choice(m, size=size, replace=False).tolist())
        frac = float(rng.uniform(0.2, 0.9))
        mass = {s: frac * left[s] for s in states if left[s] > 0.0}
        if len(mass) < 2:
            continue
        weight = sum(instance.lam[s] * p for s, p in mass.items())
        if weight <= 0.0:
            continue
        mean = sum(instance.lam[s] * p * instance.v[s] for s, p in mass.items()) / weight
        signals.append(Signal.of(mean, mass))
        for s in mass:
            left[s] -= mass[s]
    for s in range(m):
        if left[s] > 0.0:
            signals.append(Signal.of(instance.v[s], {s: left[s]}))
    return Scheme.raw(m, signals)
