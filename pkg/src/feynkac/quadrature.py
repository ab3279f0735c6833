"""Gauss-Legendre rules on the reference interval [0, 1].

Nodes and weights are computed once per order with mpmath Newton iteration
and rounded to float64 / double-double, so both precision modes quadrate
with the same rule (the dd pair just keeps more of it).  Order 5 is the
assembly default: exact for polynomial integrands up to degree 9, which
covers every product of P1 hats with the polynomial data of the benchmark
problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .ddreal import DD, dd_from_mp

DEFAULT_ORDER = 5


@dataclass(frozen=True)
class GaussRule:
    """Points/weights on [0, 1]; weights sum to 1."""

    order: int
    points: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def _mp_rule(order: int):
    if order < 1:
        raise ValueError("Gauss rule order must be >= 1")
    with mpmath.workprec(200):
        n = order
        xs = []
        for k in range(1, n + 1):
            x = mpmath.cos(mpmath.pi * (4 * k - 1) / (4 * n + 2))
            for _ in range(60):
                p = mpmath.legendre(n, x)
                dp = n * (x * mpmath.legendre(n, x) - mpmath.legendre(n - 1, x)) / (x * x - 1)
                step = p / dp
                x = x - step
                if abs(step) < mpmath.mpf(10) ** -60:
                    break
            xs.append(x)
        xs = sorted(xs)
        pts, wts = [], []
        for x in xs:
            dp = n * (x * mpmath.legendre(n, x) - mpmath.legendre(n - 1, x)) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            pts.append((x + 1) / 2)   # map [-1,1] -> [0,1]
            wts.append(w / 2)
        return tuple(pts), tuple(wts)


@lru_cache(maxsize=None)
def gauss_rule(order: int = DEFAULT_ORDER) -> GaussRule:
    pts, wts = _mp_rule(order)
    return GaussRule(order,
                     np.array([float(p) for p in pts]),
                     np.array([float(w) for w in wts]))


@lru_cache(maxsize=None)
def gauss_rule_dd(order: int = DEFAULT_ORDER) -> tuple[DD, DD]:
    """Same rule with nodes/weights as double-double arrays."""
    pts, wts = _mp_rule(order)
    p = DD.zeros((order,))
    w = DD.zeros((order,))
    for i in range(order):
        p[i] = dd_from_mp(pts[i])
        w[i] = dd_from_mp(wts[i])
    return p, w
