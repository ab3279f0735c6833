"""Direct scaled DFT used as an independent oracle for power-series weights.

Given samples g(r * e^{2 pi i m / N}), m = 0..N-1, the scaled DFT

    c_j = (1/N) * sum_m samples_m * e^{-2 pi i j m / N} / r^j

approximates the Taylor coefficients of g at 0.  The radius trades series
truncation (aliasing of coefficients beyond N) against roundoff blow-up of
the 1/r^j rescaling; r = eps^(1/(2N)) balances the two at ~sqrt(eps).
Summation is direct O(N^2) in j-chunks -- desk scale, no FFT.
"""

from __future__ import annotations

import numpy as np


def balanced_radius(n: int, eps: float = np.finfo(np.float64).eps) -> float:
    return float(eps ** (1.0 / (2.0 * n)))


def dft_coefficients(samples: np.ndarray, radius: float = 1.0,
                     n_coeffs: int | None = None) -> np.ndarray:
    """Approximate power-series coefficients from unit-circle-scaled samples."""
    samples = np.asarray(samples, dtype=np.complex128)
    n = samples.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    if not (0.0 < radius <= 1.0):
        raise ValueError("radius must lie in (0, 1]")
    if n_coeffs is None:
        n_coeffs = n
    m = np.arange(n)
    out = np.empty(n_coeffs, dtype=np.complex128)
    chunk = max(1, (1 << 22) // n)   # cap the phase matrix at ~64 MB
    for j0 in range(0, n_coeffs, chunk):
        j = np.arange(j0, min(j0 + chunk, n_coeffs))
        phase = np.exp(-2j * np.pi * np.einsum("j,m->jm", j, m) / n)
        out[j] = (phase @ samples) / n
    out /= radius ** np.arange(n_coeffs)
    return out


def circle_samples(fn, n: int, radius: float) -> np.ndarray:
    """Evaluate fn at the n scaled roots of unity (convenience for oracles)."""
    zeta = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return np.asarray(fn(zeta), dtype=np.complex128)
