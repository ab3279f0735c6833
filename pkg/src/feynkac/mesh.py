"""Uniform 1D meshes and spatial data functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as exprmod
from .ddreal import CDD, DD
from .errors import BreakpointMisaligned, MeshTooCoarse, NotNested

_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of (0, length) into n_elems cells.

    Every declared breakpoint (a discontinuity of U or G0) must coincide
    with a node; constructors reject misaligned configurations so that
    per-element Gauss quadrature stays exact for piecewise data.
    """

    length: float
    n_elems: int
    nodes: np.ndarray
    breakpoints: tuple[float, ...] = ()

    @staticmethod
    def uniform(n_elems: int, length: float = 1.0,
                breakpoints: tuple[float, ...] = ()) -> "Mesh1D":
        if n_elems < 2:
            raise MeshTooCoarse(f"need at least 2 elements, got {n_elems}")
        nodes = np.linspace(0.0, length, n_elems + 1)
        mesh = Mesh1D(length, n_elems, nodes, tuple(sorted(set(breakpoints))))
        mesh.check_alignment(mesh.breakpoints)
        return mesh

    @property
    def h(self) -> float:
        return self.length / self.n_elems

    @property
    def n_interior(self) -> int:
        return self.n_elems - 1

    def check_alignment(self, breakpoints) -> None:
        for b in breakpoints:
            if b <= 0.0 or b >= self.length:
                continue
            ratio = b / self.h
            if abs(ratio - round(ratio)) > _ALIGN_TOL:
                raise BreakpointMisaligned(
                    f"breakpoint {b} does not sit on a node of the 1/{self.n_elems} mesh")

    def refinement_ratio(self, fine: "Mesh1D") -> int:
        """Ratio fine/self if fine is a dyadic refinement, else NotNested."""
        if fine.length != self.length or fine.n_elems % self.n_elems:
            raise NotNested("meshes are not nested")
        r = fine.n_elems // self.n_elems
        if r & (r - 1):
            raise NotNested(f"refinement ratio {r} is not a power of two")
        return r


@dataclass
class SpatialFn:
    """Function of x on [0, length] with declared breakpoints and degree hint.

    `degree` is the polynomial degree per smooth piece (None when a piece is
    not polynomial); it is informational -- assembly always uses the fixed
    Gauss rule.  `dd_fn` evaluates exactly in double-double; absent that,
    extended-mode evaluation falls back to the float64 values.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    degree: int | None = None
    dd_fn: Callable[[DD], CDD] | None = None
    text: str | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)))

    def eval_dd(self, x: DD) -> CDD:
        if self.dd_fn is not None:
            return self.dd_fn(x)
        vals = np.asarray(self.fn(x.to_float()))
        return CDD.from_complex(vals.astype(np.complex128))

    @staticmethod
    def from_expression(text: str) -> "SpatialFn":
        node = exprmod.parse_expression(text)
        bps = tuple(sorted(set(node.breakpoints())))

        def dd_eval(x: DD) -> CDD:
            return CDD.from_dd(node.eval_dd(x))

        return SpatialFn(fn=node.eval, breakpoints=bps, degree=node.degree(),
                         dd_fn=dd_eval, text=node.text())

    @staticmethod
    def zero() -> "SpatialFn":
        return SpatialFn(fn=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                         degree=0,
                         dd_fn=lambda x: CDD.zeros(x.shape),
                         text="0")

    @staticmethod
    def constant(value: float) -> "SpatialFn":
        v = float(value)
        return SpatialFn(fn=lambda x: np.full(np.shape(x), v),
                         degree=0,
                         dd_fn=lambda x: CDD.from_dd(DD.from_float(np.full(x.shape, v))),
                         text=repr(v))

    def is_zero(self) -> bool:
        return self.text == "0"
