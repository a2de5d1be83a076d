"""Shared numeric helpers: log-domain sums, weighted means, scalar search."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

__all__ = [
    "logsumexp",
    "log1pexp",
    "shifted_weight_sum",
    "log_weighted_mean",
    "golden_max",
]


def logsumexp(xs: Sequence[float]) -> float:
    """log(sum_i exp(xs[i])), stable under a shift by the running maximum.

    Empty input and all -inf both return -inf.
    """
    m = -math.inf
    for x in xs:
        if x > m:
            m = x
    if m == -math.inf:
        return -math.inf
    acc = 0.0
    for x in xs:
        acc += math.exp(x - m)
    return m + math.log(acc)


def log1pexp(x: float) -> float:
    """log(1 + exp(x)) without overflow for large x or cancellation for small x."""
    if x <= 0.0:
        return math.log1p(math.exp(x))
    return x + math.log1p(math.exp(-x))


def shifted_weight_sum(
    log_w: Sequence[float], values: Sequence[float]
) -> tuple[float, float]:
    """Represent sum_i exp(log_w[i]) * values[i] as exp(shift) * acc.

    Returns (shift, acc) with shift = max(log_w); acc keeps its sign, so the
    caller can form ratios of sums whose common scale exp(shift) underflows.
    (-inf, 0.0) when every weight is zero or the input is empty.
    """
    m = -math.inf
    for lw in log_w:
        if lw > m:
            m = lw
    if m == -math.inf:
        return -math.inf, 0.0
    acc = 0.0
    for lw, v in zip(log_w, values):
        if lw == -math.inf:
            continue
        acc += v * math.exp(lw - m)
    return m, acc


def log_weighted_mean(log_w: Sequence[float], values: Sequence[float]) -> float:
    """Weighted mean of `values` under weights exp(log_w), robust to a common
    scale that underflows in linear space. NaN when the total weight is zero."""
    shift, num = shifted_weight_sum(log_w, values)
    if shift == -math.inf:
        return math.nan
    den = 0.0
    for lw in log_w:
        if lw > -math.inf:
            den += math.exp(lw - shift)
    return num / den


def golden_max(
    f: Callable[[float], float], lo: float, hi: float, iters: int = 80
) -> tuple[float, float]:
    """Golden-section maximization of f on [lo, hi].

    Assumes unimodality on the bracket; returns the best probed (x, f(x)),
    which for a non-unimodal f is still a valid lower bound on the maximum.
    """
    if hi < lo:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        for x, fx in ((c, fc), (d, fd)):
            if fx > best_f:
                best_x, best_f = x, fx
    return best_x, best_f
