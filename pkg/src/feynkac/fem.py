"""P1 finite elements on a uniform mesh: assembly, weighted inner products,
projection, norms, nested transfer, and the exponential quadrature cache.

The scheme works on interior nodes only; the Dirichlet values at both ends
are hard zeros.  On a uniform mesh the interior mass matrix has diagonal
2h/3 and off-diagonal h/6, the stiffness 2/h and -1/h; both are assembled
exactly.  Everything integral-shaped is computed by the fixed per-element
Gauss rule of :mod:`feynkac.quadrature` at the cached global points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ddreal import CDD, DD, cdd_exp_mp
from .errors import CacheTimeMismatch, MeshMismatch, MeshTooCoarse, NotNested, SingularMass
from .mesh import Mesh1D, SpatialFn
from .quadrature import DEFAULT_ORDER, gauss_rule, gauss_rule_dd
from .tridiag import TriDiagonalSystem


@dataclass
class FemFunction:
    """Interior nodal values (boundary entries are implicit zeros)."""

    mesh: Mesh1D
    values: np.ndarray | CDD

    def to_complex(self) -> np.ndarray:
        if isinstance(self.values, CDD):
            return self.values.to_complex()
        return np.asarray(self.values, dtype=np.complex128)

    def full_values(self) -> np.ndarray:
        v = self.to_complex()
        return np.concatenate([[0.0], v, [0.0]])

    def copy(self) -> "FemFunction":
        return FemFunction(self.mesh, self.values.copy())


def interpolant(mesh: Mesh1D, g: SpatialFn) -> FemFunction:
    """P1 nodal interpolant of g with Dirichlet ends zeroed."""
    vals = np.asarray(g(mesh.nodes[1:-1]), dtype=np.complex128)
    return FemFunction(mesh, vals)


@dataclass
class FemOperators:
    """Mass, stiffness and the factored stepping matrix K = d0*M + S."""

    mesh: Mesh1D
    d0: float
    mass: TriDiagonalSystem
    stiffness: TriDiagonalSystem
    system: TriDiagonalSystem

    @property
    def factor_count(self) -> int:
        return self.system.factor_count


def _const_tridiag(n: int, diag: float, off: float) -> TriDiagonalSystem:
    return TriDiagonalSystem(
        sub=np.full(n, off, dtype=np.complex128),
        diag=np.full(n, diag, dtype=np.complex128),
        sup=np.full(n, off, dtype=np.complex128),
    )


def assemble_operators(mesh: Mesh1D, d0: float) -> FemOperators:
    if mesh.n_elems < 2:
        raise MeshTooCoarse("mesh must have at least 2 elements")
    if d0 < 0:
        raise ValueError("d0 must be >= 0")
    h = mesh.h
    n = mesh.n_interior
    mass = _const_tridiag(n, 2.0 * h / 3.0, h / 6.0)
    stiff = _const_tridiag(n, 2.0 / h, -1.0 / h)
    system = TriDiagonalSystem(
        sub=d0 * mass.sub + stiff.sub,
        diag=d0 * mass.diag + stiff.diag,
        sup=d0 * mass.sup + stiff.sup,
    ).factor()
    return FemOperators(mesh, d0, mass, stiff, system)


# --- quadrature-point machinery -----------------------------------------------

def quad_points(mesh: Mesh1D, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Global quadrature points, element-major: shape (n_elems*order,)."""
    rule = gauss_rule(order)
    elems = np.arange(mesh.n_elems)[:, None]
    return ((elems + rule.points[None, :]) * mesh.h).ravel()


def quad_points_dd(mesh: Mesh1D, order: int = DEFAULT_ORDER) -> DD:
    pts, _ = gauss_rule_dd(order)
    h = DD.from_float(mesh.length) / float(mesh.n_elems)
    out = DD.zeros((mesh.n_elems * order,))
    for e in range(mesh.n_elems):
        block = (pts + float(e)) * h
        out.data[e * order:(e + 1) * order] = block.data
    return out


def assemble_from_quad(mesh: Mesh1D, integrand_q: np.ndarray,
                       order: int = DEFAULT_ORDER) -> np.ndarray:
    """Interior load vector sum_q w_q f(x_q) phi_j(x_q) from quad values."""
    rule = gauss_rule(order)
    h = mesh.h
    vals = integrand_q.reshape(mesh.n_elems, order)
    wl = h * rule.weights * (1.0 - rule.points)
    wr = h * rule.weights * rule.points
    left = vals @ wl
    right = vals @ wr
    full = np.zeros(mesh.n_elems + 1, dtype=np.complex128)
    full[:-1] += left
    full[1:] += right
    return full[1:-1]


def interp_at_quad(mesh: Mesh1D, values: np.ndarray,
                   order: int = DEFAULT_ORDER) -> np.ndarray:
    """Values of the P1 function (interior dofs) at the quadrature points."""
    rule = gauss_rule(order)
    full = np.concatenate([[0.0], np.asarray(values, dtype=np.complex128), [0.0]])
    a = full[:-1, None] * (1.0 - rule.points)[None, :]
    b = full[1:, None] * rule.points[None, :]
    return (a + b).ravel()


class QuadCache:
    """Exponential substantial weights e^{-t_i rho U(x_q)} at quad points.

    Advanced one step at a time by multiplying with e^{-tau rho U(x_q)} and
    recomputed from scratch every `refresh_every` steps to kill drift.
    Single-writer: one stepping run owns one cache.
    """

    def __init__(self, mesh: Mesh1D, potential: SpatialFn, rho: complex,
                 tau: float, order: int = DEFAULT_ORDER, refresh_every: int = 64):
        mesh.check_alignment(potential.breakpoints)
        self.mesh = mesh
        self.rho = complex(rho)
        self.tau = float(tau)
        self.order = order
        self.refresh_every = refresh_every
        self.xq = quad_points(mesh, order)
        self.Uq = np.asarray(potential(self.xq), dtype=np.complex128)
        self.step_factor = np.exp(-self.tau * self.rho * self.Uq)
        self.index = 0
        self.current = np.ones_like(self.Uq)

    @property
    def time(self) -> float:
        return self.index * self.tau

    def reset(self):
        self.index = 0
        self.current = np.ones_like(self.Uq)

    def advance(self):
        self.index += 1
        if self.index % self.refresh_every == 0:
            self.current = np.exp(-(self.index * self.tau) * self.rho * self.Uq)
        else:
            self.current = self.current * self.step_factor

    def advance_to(self, t: float):
        target = int(round(t / self.tau))
        if target < self.index:
            self.reset()
        while self.index < target:
            self.advance()

    def weights_at(self, t: float) -> np.ndarray:
        if abs(t - self.time) > 1e-12 * max(1.0, abs(t)):
            raise CacheTimeMismatch(f"cache at t={self.time}, requested t={t}")
        return self.current

    def table(self, n_rows: int) -> np.ndarray:
        """Rows 0..n_rows of weights, built by the same advance/refresh walk."""
        out = np.empty((n_rows + 1, self.Uq.shape[0]), dtype=np.complex128)
        self.reset()
        out[0] = self.current
        for i in range(1, n_rows + 1):
            self.advance()
            out[i] = self.current
        return out


def exp_table_dd(mesh: Mesh1D, potential: SpatialFn, rho: complex, tau_dd: DD,
                 n_rows: int, order: int = DEFAULT_ORDER,
                 refresh_every: int = 64) -> CDD:
    """Double-double weight table e^{-t_i rho U(x_q)}, i = 0..n_rows.

    Step products run in dd; exact rows are reseeded from mpmath every
    `refresh_every` steps (and used for the step factor itself).
    """
    from . import ddkernels

    xq = quad_points_dd(mesh, order)
    Uq = potential.eval_dd(xq)
    Q = Uq.shape[0]
    rho_c = CDD.from_complex(complex(rho))

    def exact_row(i: int) -> CDD:
        t_i = tau_dd * float(i)
        z = -(Uq * rho_c) * t_i
        out = CDD.zeros((Q,))
        for q in range(Q):
            out.data[q] = cdd_exp_mp(z[q]).data
        return out

    estep = exact_row(1)
    n_refresh = n_rows // refresh_every
    refresh = np.zeros((n_refresh, Q, 4))
    for j in range(n_refresh):
        refresh[j] = exact_row((j + 1) * refresh_every).data
    out = np.empty((n_rows + 1, Q, 4))
    ddkernels.power_table(np.ascontiguousarray(estep.data), refresh,
                          refresh_every, out)
    return CDD(out)


# --- spec-facing operations -----------------------------------------------------

def load_vector(mesh: Mesh1D, g: SpatialFn, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Unweighted load (g, phi_j) over interior nodes."""
    xq = quad_points(mesh, order)
    return assemble_from_quad(mesh, np.asarray(g(xq), dtype=np.complex128), order)


def weighted_load(t: float, g: SpatialFn, cache: QuadCache) -> np.ndarray:
    """(e^{-t rho U} g, phi_j) using the cache positioned at time t."""
    w = cache.weights_at(t)
    gq = np.asarray(g(cache.xq), dtype=np.complex128)
    return assemble_from_quad(cache.mesh, w * gq, cache.order)


def weighted_mass_apply(t: float, u: FemFunction, cache: QuadCache) -> np.ndarray:
    """(e^{-t rho U} u_h, phi_j) for a P1 function u_h."""
    if u.mesh is not cache.mesh and u.mesh.n_elems != cache.mesh.n_elems:
        raise MeshMismatch("function and cache live on different meshes")
    w = cache.weights_at(t)
    vq = interp_at_quad(cache.mesh, u.to_complex(), cache.order)
    return assemble_from_quad(cache.mesh, w * vq, cache.order)


def l2_project(g: SpatialFn, ops: FemOperators, order: int = DEFAULT_ORDER) -> FemFunction:
    """L2-orthogonal projection onto the P1 space (interior dofs)."""
    b = load_vector(ops.mesh, g, order)
    try:
        c = ops.mass.solve(b)
    except Exception as exc:   # pragma: no cover - defensive
        raise SingularMass(str(exc)) from exc
    return FemFunction(ops.mesh, c)


def norms(u: FemFunction, ops: FemOperators | None = None,
          full_h1: bool = False) -> tuple[float, float]:
    """(L2 norm, H1 seminorm) via the exact mass/stiffness quadratic forms.

    full_h1=True reports sqrt(l2^2 + |u|_{H1}^2) instead of the seminorm.
    """
    mesh = u.mesh if ops is None else ops.mesh
    if ops is not None and ops.mesh.n_elems != u.mesh.n_elems:
        raise MeshMismatch("function and operators live on different meshes")
    h = mesh.h
    if isinstance(u.values, CDD):
        from . import ddkernels
        data = np.ascontiguousarray(u.values.data)
        out = np.zeros(2)
        h_dd = DD.from_float(mesh.length) / float(mesh.n_elems)
        a = h_dd * (2.0 / 3.0)
        bq = h_dd / 6.0
        ddkernels.symm_tridiag_quadform(data, float(a.hi), float(a.lo),
                                        float(bq.hi), float(bq.lo), out)
        l2sq = out[0] + out[1]
        inv_h = 1.0 / h_dd
        a = inv_h * 2.0
        bq = -inv_h
        ddkernels.symm_tridiag_quadform(data, float(a.hi), float(a.lo),
                                        float(bq.hi), float(bq.lo), out)
        h1sq = out[0] + out[1]
    else:
        v = np.asarray(u.values, dtype=np.complex128)
        mv = (2.0 * h / 3.0) * v
        mv[:-1] += (h / 6.0) * v[1:]
        mv[1:] += (h / 6.0) * v[:-1]
        l2sq = float(np.real(np.vdot(v, mv)))
        sv = (2.0 / h) * v
        sv[:-1] -= (1.0 / h) * v[1:]
        sv[1:] -= (1.0 / h) * v[:-1]
        h1sq = float(np.real(np.vdot(v, sv)))
    l2 = float(np.sqrt(max(l2sq, 0.0)))
    h1 = float(np.sqrt(max(h1sq, 0.0)))
    if full_h1:
        h1 = float(np.sqrt(max(l2sq + h1sq, 0.0)))
    return l2, h1


def transfer(u: FemFunction, fine: Mesh1D) -> FemFunction:
    """Exact P1 interpolation onto a nested dyadic refinement."""
    r = u.mesh.refinement_ratio(fine)
    coarse_full = u.full_values()
    if r == 1:
        return FemFunction(fine, coarse_full[1:-1])
    s = np.arange(r) / r
    left = coarse_full[:-1, None] * (1.0 - s)[None, :]
    right = coarse_full[1:, None] * s[None, :]
    fine_full = np.empty(fine.n_elems + 1, dtype=np.complex128)
    fine_full[:-1] = (left + right).ravel()
    fine_full[-1] = coarse_full[-1]
    return FemFunction(fine, fine_full[1:-1])


def l2_difference(a: FemFunction, b: FemFunction) -> float:
    """|| a - b ||_L2 after transferring the coarser one to the finer mesh."""
    if a.mesh.n_elems == b.mesh.n_elems:
        if isinstance(a.values, CDD) or isinstance(b.values, CDD):
            av = a.values if isinstance(a.values, CDD) else CDD.from_complex(a.values)
            bv = b.values if isinstance(b.values, CDD) else CDD.from_complex(b.values)
            diff = FemFunction(a.mesh, av - bv)
        else:
            diff = FemFunction(a.mesh, a.values - b.values)
        return norms(diff)[0]
    if a.mesh.n_elems < b.mesh.n_elems:
        a = transfer(FemFunction(a.mesh, a.to_complex()), b.mesh)
        return l2_difference(a, FemFunction(b.mesh, b.to_complex()))
    b = transfer(FemFunction(b.mesh, b.to_complex()), a.mesh)
    return l2_difference(FemFunction(a.mesh, a.to_complex()), b)
