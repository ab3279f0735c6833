"""Problem definition: one PDE instance of the separated equation form.

The equation solved is the equivalent separated form of the backward
fractional Feynman-Kac problem on (0, L) x (0, T]:

    D_t^{alpha,x} G - Laplace G
        = e^{-rho U(x) t} D_t^alpha G(0) + I_t^{1-alpha,x} f,
    G(., 0) = G0,  G = 0 on the boundary,

with D_t^{alpha,x} the fractional substantial derivative
e^{-t rho U}. D_t^alpha (e^{t rho U} .) and rho a complex Fourier variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MissingDerivatives
from .mesh import SpatialFn

MAX_SOURCE_DERIVATIVE = 5


@dataclass
class SourceTerm:
    """Source f with time-derivative data at t=0 for the corrections.

    kind tags the time structure so the stepping engines can build value
    tables efficiently (and exactly in extended precision):

    * "zero"    -- f = 0
    * "one"     -- f(x,t) = spatial(x)
    * "exp"     -- f(x,t) = spatial(x) * e^{c t}
    * "expRhoU" -- f(x,t) = spatial(x) * e^{-rho U(x) t} with the problem's
                   own rho and U; d_t^l f(0) = (-rho U)^l spatial
    * "custom"  -- arbitrary callables (std64 evaluation only)
    """

    kind: str
    spatial: SpatialFn | None = None
    c: complex = 0.0
    eval_fn: Callable[[float], SpatialFn] | None = None
    deriv_fn: Callable[[int], SpatialFn] | None = None
    max_derivative: int = MAX_SOURCE_DERIVATIVE

    @staticmethod
    def zero() -> "SourceTerm":
        return SourceTerm(kind="zero", spatial=SpatialFn.zero())

    @staticmethod
    def separable(spatial: SpatialFn, kind: str = "one", c: complex = 0.0) -> "SourceTerm":
        if kind not in ("one", "exp", "expRhoU"):
            raise ValueError(f"unknown separable source kind {kind!r}")
        return SourceTerm(kind=kind, spatial=spatial, c=complex(c))

    @staticmethod
    def custom(eval_fn, deriv_fn, max_derivative: int = MAX_SOURCE_DERIVATIVE) -> "SourceTerm":
        return SourceTerm(kind="custom", eval_fn=eval_fn, deriv_fn=deriv_fn,
                          max_derivative=max_derivative)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def breakpoints(self, problem: "ProblemSpec") -> tuple[float, ...]:
        if self.kind == "zero":
            return ()
        bps = tuple(self.spatial.breakpoints) if self.spatial is not None else ()
        if self.kind == "expRhoU":
            bps += tuple(problem.potential.breakpoints)
        return bps

    def check_derivatives(self, up_to: int):
        if up_to > self.max_derivative:
            raise MissingDerivatives(
                f"source provides derivatives up to order {self.max_derivative}, "
                f"scheme needs {up_to}")

    # std64 evaluation helpers ------------------------------------------------
    def values_at(self, t: float, x: np.ndarray, problem: "ProblemSpec") -> np.ndarray:
        """f(t) at the points x (complex128)."""
        if self.kind == "zero":
            return np.zeros(np.shape(x), dtype=np.complex128)
        if self.kind == "custom":
            return np.asarray(self.eval_fn(t)(x), dtype=np.complex128)
        s = np.asarray(self.spatial(x), dtype=np.complex128)
        if self.kind == "one":
            return s
        if self.kind == "exp":
            return s * np.exp(self.c * t)
        u = np.asarray(problem.potential(x), dtype=np.complex128)
        return s * np.exp(-problem.rho * u * t)

    def derivative_at_zero(self, l: int, x: np.ndarray, problem: "ProblemSpec") -> np.ndarray:
        """d_t^l f(0) at the points x."""
        if l == 0:
            return self.values_at(0.0, x, problem)
        if self.kind == "zero":
            return np.zeros(np.shape(x), dtype=np.complex128)
        if self.kind == "custom":
            self.check_derivatives(l)
            return np.asarray(self.deriv_fn(l)(x), dtype=np.complex128)
        s = np.asarray(self.spatial(x), dtype=np.complex128)
        if self.kind == "one":
            return np.zeros_like(s)
        if self.kind == "exp":
            return s * self.c ** l
        u = np.asarray(problem.potential(x), dtype=np.complex128)
        return s * (-problem.rho * u) ** l

    # spec-facing surface -------------------------------------------------------
    def eval(self, t: float, problem: "ProblemSpec") -> SpatialFn:
        """f(t, .) as a SpatialFn."""
        bps = self.breakpoints(problem)
        return SpatialFn(fn=lambda x: self.values_at(t, x, problem),
                         breakpoints=bps, degree=None)

    def dt_at_zero(self, l: int, problem: "ProblemSpec") -> SpatialFn:
        bps = self.breakpoints(problem)
        return SpatialFn(fn=lambda x: self.derivative_at_zero(l, x, problem),
                         breakpoints=bps, degree=None)


@dataclass
class ProblemSpec:
    """One instance of the separated backward Feynman-Kac problem."""

    alpha: float
    rho: complex
    potential: SpatialFn            # U, bounded on [0, L]
    initial: SpatialFn              # G0
    source: SourceTerm = field(default_factory=SourceTerm.zero)
    final_time: float = 1.0
    length: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        if self.final_time <= 0:
            raise ValueError("final time must be positive")
        self.rho = complex(self.rho)

    def breakpoints(self) -> tuple[float, ...]:
        bps = tuple(self.potential.breakpoints) + tuple(self.initial.breakpoints)
        bps += self.source.breakpoints(self)
        return tuple(sorted({b for b in bps if 0.0 < b < self.length}))
