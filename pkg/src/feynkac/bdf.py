"""BDF generating polynomials, convolution-quadrature weights, corrections.

The order-k backward differentiation symbol is

    delta_k(zeta) = sum_{i=1}^{k} (1 - zeta)^i / i,       k = 1..6,

and the fractional weights d_i are the power-series coefficients of
(delta_k(zeta)/tau)^gamma, computed by the J.C.P. Miller recurrence for
powers of a polynomial with nonzero constant term:

    q_0 = p_0^gamma,
    n p_0 q_n = sum_{j=1}^{min(n,k)} ((gamma+1) j - n) p_j q_{n-j}.

gamma = alpha gives the fractional-derivative weights, gamma = alpha - 1
the fractional-integral ones; the same recurrence covers both.

Correction coefficients are stored as exact Fractions and converted to the
active scalar type at use sites.  Note: the k=5 value a_4 = -251/720; the
order conditions pin it uniquely (a symbolic re-derivation confirms all
table entries, see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ddreal import DD, EXTENDED, STD64, dd_from_mp
from .errors import NonPositiveTau, UnsupportedOrder

MAX_ORDER = 6


def _check_order(k: int):
    if not (1 <= int(k) <= MAX_ORDER):
        raise UnsupportedOrder(f"BDF order must be in 1..{MAX_ORDER}, got {k}")


@dataclass(frozen=True)
class BdfSymbol:
    """delta_k as exact rational coefficients in ascending powers of zeta."""

    k: int
    coeffs: tuple[Fraction, ...]

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __call__(self, zeta):
        """Horner evaluation; accepts scalars or numpy arrays."""
        acc = np.zeros_like(np.asarray(zeta)) if isinstance(zeta, np.ndarray) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * zeta + float(c)
        return acc


@lru_cache(maxsize=None)
def bdf_symbol(k: int) -> BdfSymbol:
    _check_order(k)
    coeffs = [Fraction(0)] * (k + 1)
    for i in range(1, k + 1):
        # (1-zeta)^i / i
        for j in range(i + 1):
            coeffs[j] += Fraction((-1) ** j * math.comb(i, j), i)
    return BdfSymbol(k, tuple(coeffs))


@dataclass
class CqWeightTable:
    """Weights d_i of (delta_{tau,k})^gamma, i = 0..N; d carries tau^-gamma."""

    k: int
    gamma: float
    tau: float
    d: np.ndarray | DD

    def as_float(self) -> np.ndarray:
        return self.d.to_float() if isinstance(self.d, DD) else self.d


def _series_coeffs_float(p: np.ndarray, gamma: float, n_terms: int) -> np.ndarray:
    k = len(p) - 1
    q = np.zeros(n_terms)
    q[0] = p[0] ** gamma
    for n in range(1, n_terms):
        s = 0.0
        for j in range(1, min(n, k) + 1):
            s += ((gamma + 1.0) * j - n) * p[j] * q[n - j]
        q[n] = s / (n * p[0])
    return q


def _series_coeffs_dd(p_exact: tuple[Fraction, ...], gamma: float, n_terms: int) -> DD:
    import mpmath

    from .ddreal import sc_add, sc_div, sc_from_float, sc_mul

    k = len(p_exact) - 1

    def frac_dd(f: Fraction):
        v = dd_from_mp(mpmath.mpf(f.numerator) / f.denominator)
        return (float(v.hi), float(v.lo))

    with mpmath.workprec(130):
        p = [frac_dd(c) for c in p_exact]
        q0 = mpmath.power(mpmath.mpf(p_exact[0].numerator) / p_exact[0].denominator, gamma)
        q = [(0.0, 0.0)] * n_terms
        v0 = dd_from_mp(q0)
        q[0] = (float(v0.hi), float(v0.lo))
    g1 = sc_add(sc_from_float(gamma), sc_from_float(1.0))
    for n in range(1, n_terms):
        s = (0.0, 0.0)
        for j in range(1, min(n, k) + 1):
            c = sc_add(sc_mul(g1, sc_from_float(float(j))), sc_from_float(-float(n)))
            s = sc_add(s, sc_mul(sc_mul(c, p[j]), q[n - j]))
        q[n] = sc_div(s, sc_mul(p[0], sc_from_float(float(n))))
    out = DD.zeros((n_terms,))
    arr = np.array(q)
    out.data[:, 0] = arr[:, 0]
    out.data[:, 1] = arr[:, 1]
    return out


def cq_weights(k: int, gamma: float, tau: float | Fraction, N: int,
               mode: str = STD64) -> CqWeightTable:
    """Convolution-quadrature weights of (delta_{tau,k})^gamma, i = 0..N.

    In extended mode tau may be an exact Fraction so the tau^-gamma scale
    carries full dd accuracy.
    """
    _check_order(k)
    if tau <= 0:
        raise NonPositiveTau(f"tau must be > 0, got {tau}")
    if N < 0:
        raise ValueError("N must be >= 0")
    sym = bdf_symbol(k)
    if mode == EXTENDED:
        import mpmath
        q = _series_coeffs_dd(sym.coeffs, gamma, N + 1)
        with mpmath.workprec(130):
            if isinstance(tau, Fraction):
                tmp = mpmath.mpf(tau.numerator) / tau.denominator
            else:
                tmp = mpmath.mpf(tau)
            scale = dd_from_mp(mpmath.power(tmp, -gamma))
        d = q * scale
    else:
        q = _series_coeffs_float(sym.as_float(), gamma, N + 1)
        d = q * float(tau) ** (-gamma)
    return CqWeightTable(k, gamma, float(tau), d)


# --- correction coefficient tables -------------------------------------------
# a_j^{(k)}, j = 1..k-1, and b_{l,j}^{(k)}, l = 1..k-2, j = 1..k-1.
# Exact rationals; validated against the mu/eta order conditions in tests.

F = Fraction

_A_TABLE: dict[int, tuple[Fraction, ...]] = {
    1: (),
    2: (F(1, 2),),
    3: (F(11, 12), F(-5, 12)),
    4: (F(31, 24), F(-7, 6), F(3, 8)),
    5: (F(1181, 720), F(-177, 80), F(341, 240), F(-251, 720)),
    6: (F(2837, 1440), F(-2543, 720), F(17, 5), F(-1201, 720), F(95, 288)),
}

_B_TABLE: dict[int, tuple[tuple[Fraction, ...], ...]] = {
    1: (),
    2: (),
    3: ((F(1, 12), F(0)),),
    4: ((F(1, 6), F(-1, 12), F(0)),
        (F(0), F(0), F(0))),
    5: ((F(59, 240), F(-29, 120), F(19, 240), F(0)),
        (F(1, 240), F(-1, 240), F(0), F(0)),
        (F(-1, 720), F(0), F(0), F(0))),
    6: ((F(77, 240), F(-7, 15), F(73, 240), F(-3, 40), F(0)),
        (F(1, 96), F(-1, 60), F(1, 160), F(0), F(0)),
        (F(-1, 360), F(1, 720), F(0), F(0), F(0)),
        (F(0), F(0), F(0), F(0), F(0))),
}


@dataclass(frozen=True)
class CorrectionCoeffs:
    """Exact starting-correction coefficients for order k (empty for k=1)."""

    k: int
    a: tuple[Fraction, ...]                  # a[j-1] = a_j^{(k)}
    b: tuple[tuple[Fraction, ...], ...]      # b[l-1][j-1] = b_{l,j}^{(k)}

    def a_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.a])

    def b_float(self) -> np.ndarray:
        if not self.b:
            return np.zeros((0, max(self.k - 1, 0)))
        return np.array([[float(x) for x in row] for row in self.b])


@lru_cache(maxsize=None)
def correction_coeffs(k: int) -> CorrectionCoeffs:
    _check_order(k)
    return CorrectionCoeffs(k, _A_TABLE[k], _B_TABLE[k])


def grunwald_weights(gamma: float, n_terms: int) -> np.ndarray:
    """(-1)^i binom(gamma, i) by the exact product recurrence (k=1 oracle)."""
    w = np.empty(n_terms)
    w[0] = 1.0
    for i in range(1, n_terms):
        w[i] = w[i - 1] * (i - 1 - gamma) / i
    return w
