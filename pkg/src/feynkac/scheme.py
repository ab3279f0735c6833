"""Fully discrete time-stepping schemes.

Four variants share one engine:

* ``corrected``   -- BDF-k convolution quadrature with the all-step starting
  corrections (a_j on the initial data, a_j/b_{l,j} on the source); the
  production scheme, order k in time for nonsmooth data.
* ``uncorrected`` -- the same recursion with every correction sum removed.
* ``comparison_initial`` -- homogeneous-problem variant that projects the
  weighted initial data into the FE space and corrects only the first k-1
  steps through an extra stiffness term; reproduces the degraded O(h) L2
  behaviour.
* ``comparison_source`` -- inhomogeneous variant that L2-projects f before
  applying the exponential weight inside the inner products.

Step n solves (d_0 M + S) G^n = rhs where rhs collects, at the quadrature
point level, minus the weighted solution history, the initial-data terms,
the weighted source history and the correction terms; the system matrix is
factored exactly once per run.  History summation is direct (O(n) per
step).  Both precision modes run the same recursion: complex128 numpy with
einsum reductions, or double-double arrays driven by the numba kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import ddkernels
from .bdf import correction_coeffs, cq_weights
from .ddreal import (CDD, DD, EXTENDED, STD64, cdd_from_mpc, csc_mul, dd_from_mp,
                     sc_add, sc_mul)
from .errors import (MeshBreakpointMisaligned, NonzeroInitialUnsupported,
                     NonzeroSourceUnsupported, UnsupportedOrder)
from .fem import (FemFunction, QuadCache, assemble_from_quad,
                  assemble_operators, interp_at_quad, interpolant, exp_table_dd,
                  quad_points_dd)
from .mesh import Mesh1D
from .problem import ProblemSpec
from .quadrature import DEFAULT_ORDER, gauss_rule_dd

VARIANTS = ("corrected", "uncorrected", "comparison_initial", "comparison_source")


@dataclass
class Trajectory:
    """All time levels of one run; step 0 is the P1 interpolant of G0."""

    problem: ProblemSpec
    k: int
    tau: float
    n_steps: int
    variant: str
    mode: str
    mesh: Mesh1D
    steps: list[FemFunction]
    factor_count: int = 1

    @property
    def final(self) -> FemFunction:
        return self.steps[-1]

    def step(self, n: int) -> FemFunction:
        return self.steps[n]


def run_corrected(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D,
                  mode: str = STD64, order: int = DEFAULT_ORDER) -> Trajectory:
    return _run(p, k, n_steps, mesh, "corrected", mode, order)


def run_uncorrected(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D,
                    mode: str = STD64, order: int = DEFAULT_ORDER) -> Trajectory:
    return _run(p, k, n_steps, mesh, "uncorrected", mode, order)


def run_comparison_initial(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D,
                           mode: str = STD64, order: int = DEFAULT_ORDER) -> Trajectory:
    return _run(p, k, n_steps, mesh, "comparison_initial", mode, order)


def run_comparison_source(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D,
                          mode: str = STD64, order: int = DEFAULT_ORDER) -> Trajectory:
    return _run(p, k, n_steps, mesh, "comparison_source", mode, order)


def run_scheme(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D, variant: str,
               mode: str = STD64, order: int = DEFAULT_ORDER) -> Trajectory:
    return _run(p, k, n_steps, mesh, variant, mode, order)


def _validate(p: ProblemSpec, k: int, n_steps: int, mesh: Mesh1D, variant: str):
    if variant not in VARIANTS:
        raise ValueError(f"unknown scheme variant {variant!r}")
    if not (1 <= k <= 6):
        raise UnsupportedOrder(f"BDF order must be in 1..6, got {k}")
    if n_steps < k:
        raise ValueError(f"need n_steps >= k, got {n_steps} < {k}")
    try:
        mesh.check_alignment(p.breakpoints())
    except MeshBreakpointMisaligned:
        raise
    if variant == "corrected" and not p.source.is_zero:
        p.source.check_derivatives(max(k - 2, 0))


def _run(p, k, n_steps, mesh, variant, mode, order) -> Trajectory:
    _validate(p, k, n_steps, mesh, variant)
    if mode == EXTENDED:
        return _run_dd(p, k, n_steps, mesh, variant, order)
    return _run_std64(p, k, n_steps, mesh, variant, order)


# --- standard (complex128) engine ------------------------------------------------

def _run_std64(p: ProblemSpec, k: int, N: int, mesh: Mesh1D, variant: str,
               order: int) -> Trajectory:
    tau = p.final_time / N
    alpha = p.alpha
    da = np.asarray(cq_weights(k, alpha, tau, N).d)
    ds = np.asarray(cq_weights(k, alpha - 1.0, tau, N).d)
    cum = np.zeros(N + 1)
    cum[1:] = np.cumsum(da)

    ops = assemble_operators(mesh, d0=float(da[0]))
    cache = QuadCache(mesh, p.potential, p.rho, tau, order)
    E = cache.table(N)
    xq = cache.xq
    Q = xq.shape[0]

    coeffs = correction_coeffs(k)
    a = coeffs.a_float()
    b = coeffs.b_float()
    corrected = variant in ("corrected", "comparison_source")

    G0q = np.asarray(p.initial(xq), dtype=np.complex128)
    has_init = bool(np.any(G0q != 0.0))
    has_src = not p.source.is_zero
    if variant == "comparison_source" and has_init:
        raise NonzeroInitialUnsupported("comparison_source requires G0 = 0")
    if variant == "comparison_initial" and has_src:
        raise NonzeroSourceUnsupported("comparison_initial requires f = 0")

    # per-step scalar in front of the (e^{-t_n rho U} G0, phi_j) term
    cinit = cum.astype(np.complex128)
    if variant == "corrected":
        for j in range(1, k):
            cinit[j:] += a[j - 1] * da[:N + 1 - j]

    DPa = da[:, None] * E
    DPs = None
    F = None
    CF = None
    if has_src:
        F = np.empty((N + 1, Q), dtype=np.complex128)
        if variant == "comparison_source":
            for m in range(N + 1):
                fm = p.source.values_at(m * tau, xq, p)
                proj = ops.mass.solve(assemble_from_quad(mesh, fm, order))
                F[m] = interp_at_quad(mesh, proj, order)
        else:
            for m in range(N + 1):
                F[m] = p.source.values_at(m * tau, xq, p)
        DPs = ds[:, None] * E
        if corrected and k >= 2:
            p.source.check_derivatives(k - 2)
            CF = np.zeros((k, Q), dtype=np.complex128)
            Fl = {0: F[0]}
            for l in range(1, k - 1):
                fl = p.source.derivative_at_zero(l, xq, p)
                if variant == "comparison_source":
                    proj = ops.mass.solve(assemble_from_quad(mesh, fl, order))
                    fl = interp_at_quad(mesh, proj, order)
                Fl[l] = fl
            for j in range(1, k):
                CF[j] = a[j - 1] * Fl[0]
                for l in range(1, k - 1):
                    CF[j] = CF[j] + (b[l - 1, j - 1] * tau ** l) * Fl[l]

    V = np.zeros((N + 1, Q), dtype=np.complex128)
    steps = [interpolant(mesh, p.initial)]
    for n in range(1, N + 1):
        I = np.zeros(Q, dtype=np.complex128)
        if n > 1:
            I -= np.einsum("iq,iq->q", DPa[1:n], V[n - 1:0:-1])
        if has_src:
            I += np.einsum("iq,iq->q", DPs[0:n], F[n:0:-1])
        if has_init and variant != "comparison_initial":
            I += cinit[n] * (E[n] * G0q)
        if CF is not None:
            for j in range(1, min(k - 1, n) + 1):
                I += ds[n - j] * (E[n - j] * CF[j])
        rhs = assemble_from_quad(mesh, I, order)
        if variant == "comparison_initial" and has_init:
            proj = ops.mass.solve(assemble_from_quad(mesh, E[n] * G0q, order))
            rhs = rhs + cum[n] * ops.mass.matvec(proj)
            if n <= k - 1:
                rhs = rhs - a[n - 1] * ops.stiffness.matvec(proj)
        g = ops.system.solve(rhs)
        V[n] = interp_at_quad(mesh, g, order)
        steps.append(FemFunction(mesh, g))
    return Trajectory(p, k, tau, N, variant, STD64, mesh, steps,
                      factor_count=ops.system.factor_count)


# --- extended (double-double) engine ----------------------------------------------

def _dd_tuple(x: DD):
    return (float(x.hi), float(x.lo))


def _frac_dd(f: Fraction) -> DD:
    with mpmath.workprec(130):
        return dd_from_mp(mpmath.mpf(f.numerator) / f.denominator)


def _scalar_exp_powers(c_tau: complex, N: int, refresh_every: int = 64) -> np.ndarray:
    """(N+1, 4) complex dd powers e^{c tau m} with periodic mpmath reseeding."""
    out = np.zeros((N + 1, 4))
    out[0, 0] = 1.0
    with mpmath.workprec(130):
        step = cdd_from_mpc(mpmath.exp(mpmath.mpc(c_tau))).data
        cur = (1.0, 0.0, 0.0, 0.0)
        stp = (step[0], step[1], step[2], step[3])
        for m in range(1, N + 1):
            if m % refresh_every == 0:
                row = cdd_from_mpc(mpmath.exp(mpmath.mpc(c_tau) * m)).data
                cur = (row[0], row[1], row[2], row[3])
            else:
                cur = csc_mul(cur, stp)
            out[m] = cur
    return out


def _dd_mass_stiffness(mesh: Mesh1D):
    """Interior mass/stiffness diagonals as dd (n,2) arrays."""
    n = mesh.n_interior
    h = DD.from_float(mesh.length) / float(mesh.n_elems)
    m_d = h * (2.0 / 3.0)
    m_o = h / 6.0
    s_d = 2.0 / h
    s_o = -(1.0 / h)

    def const(n_, val):
        arr = np.zeros((n_, 2))
        arr[:, 0] = float(val.hi)
        arr[:, 1] = float(val.lo)
        return arr

    return (const(n, m_d), const(n, m_o)), (const(n, s_d), const(n, s_o))


def _dd_tridiag_matvec(diag, off, x: CDD) -> CDD:
    """Constant symmetric tridiagonal times complex dd vector (class ops)."""
    y = x * diag
    if x.shape[0] > 1:
        y[:-1] = y[:-1] + x[1:] * off
        y[1:] = y[1:] + x[:-1] * off
    return y


def _run_dd(p: ProblemSpec, k: int, N: int, mesh: Mesh1D, variant: str,
            order: int) -> Trajectory:
    alpha = p.alpha
    tau_frac = Fraction(p.final_time) / N
    tau = float(tau_frac)
    tau_dd = _frac_dd(tau_frac)

    da_dd = cq_weights(k, alpha, tau_frac, N, mode=EXTENDED).d
    ds_dd = cq_weights(k, alpha - 1.0, tau_frac, N, mode=EXTENDED).d
    da = np.ascontiguousarray(da_dd.data)
    ds = np.ascontiguousarray(ds_dd.data)

    coeffs = correction_coeffs(k)
    a_dd = [_dd_tuple(_frac_dd(x)) for x in coeffs.a]
    corrected = variant in ("corrected", "comparison_source")

    # cumulative sums and initial-data scalars (hi, lo) per step
    cum = np.zeros((N + 1, 2))
    acc = (0.0, 0.0)
    for n in range(1, N + 1):
        acc = sc_add(acc, (da[n - 1, 0], da[n - 1, 1]))
        cum[n] = acc
    cinit = cum.copy()
    if variant == "corrected":
        for n in range(1, N + 1):
            s = (cinit[n, 0], cinit[n, 1])
            for j in range(1, min(k - 1, n) + 1):
                s = sc_add(s, sc_mul(a_dd[j - 1], (da[n - j, 0], da[n - j, 1])))
            cinit[n] = s

    # operators in dd
    (m_diag, m_off), (s_diag, s_off) = _dd_mass_stiffness(mesh)
    nin = mesh.n_interior
    d0 = (da[0, 0], da[0, 1])
    k_diag = np.zeros((nin, 2))
    k_off = np.zeros((nin, 2))
    for arr, m_arr, s_arr in ((k_diag, m_diag, s_diag), (k_off, m_off, s_off)):
        for i in range(nin):
            arr[i] = sc_add(sc_mul(d0, (m_arr[i, 0], m_arr[i, 1])), (s_arr[i, 0], s_arr[i, 1]))
    lfac = np.zeros((nin, 2))
    dfac = np.zeros((nin, 2))
    ddkernels.thomas_factor(k_off, k_diag, k_off, lfac, dfac)
    m_lfac = np.zeros((nin, 2))
    m_dfac = np.zeros((nin, 2))
    need_mass_solve = variant in ("comparison_initial", "comparison_source")
    if need_mass_solve:
        ddkernels.thomas_factor(m_off, m_diag, m_off, m_lfac, m_dfac)

    # quadrature geometry
    rule_pts, rule_wts = gauss_rule_dd(order)
    h_dd = DD.from_float(mesh.length) / float(mesh.n_elems)
    nq = order
    wl = np.zeros((nq, 2))
    wr = np.zeros((nq, 2))
    xil = np.zeros((nq, 2))
    xir = np.zeros((nq, 2))
    for r in range(nq):
        xi = rule_pts[r]
        w = rule_wts[r] * h_dd
        one_minus = DD.from_float(1.0) - xi
        wl[r] = (w * one_minus).data
        wr[r] = (w * xi).data
        xil[r] = one_minus.data
        xir[r] = xi.data

    xq_dd = quad_points_dd(mesh, order)
    Q = xq_dd.shape[0]
    E = exp_table_dd(mesh, p.potential, p.rho, tau_dd, N, order)
    Edata = np.ascontiguousarray(E.data)

    G0 = p.initial.eval_dd(xq_dd)
    has_init = bool(np.any(G0.data != 0.0))
    has_src = not p.source.is_zero
    if variant == "comparison_source" and has_init:
        raise NonzeroInitialUnsupported("comparison_source requires G0 = 0")
    if variant == "comparison_initial" and has_src:
        raise NonzeroSourceUnsupported("comparison_initial requires f = 0")
    G0data = np.ascontiguousarray(G0.data) if has_init else np.zeros((0, 4))

    DPa = np.empty((N + 1, Q, 4))
    ddkernels.scale_rows(Edata, da, DPa)

    DPs = np.zeros((0, Q, 4))
    Fdata = np.zeros((0, Q, 4))
    CFdata = np.zeros((0, Q, 4))
    if has_src:
        Fdata = _dd_source_table(p, mesh, xq_dd, Edata, tau_dd, N, order)
        if variant == "comparison_source":
            _project_rows_dd(Fdata, mesh, wl, wr, xil, xir, m_lfac, m_dfac, m_off)
        DPs = np.empty((N + 1, Q, 4))
        ddkernels.scale_rows(Edata, ds, DPs)
        if corrected and k >= 2:
            p.source.check_derivatives(k - 2)
            CFdata = _dd_correction_table(p, mesh, xq_dd, Fdata, tau_dd, k, coeffs,
                                          variant, wl, wr, xil, xir,
                                          m_lfac, m_dfac, m_off, order)

    V = np.zeros((N + 1, Q, 4))
    Iq = np.zeros((Q, 4))
    rhs = np.zeros((nin, 4))
    x = np.zeros((nin, 4))
    steps = [interpolant(mesh, p.initial)]
    for n in range(1, N + 1):
        cin = cinit[n] if (has_init and variant != "comparison_initial") else (0.0, 0.0)
        ddkernels.step_rhs(DPa, V, DPs, Fdata, Edata, G0data, CFdata, ds,
                           float(cin[0]), float(cin[1]), n, k - 1, Iq)
        ddkernels.assemble(Iq, wl, wr, rhs)
        if variant == "comparison_initial" and has_init:
            row = CDD(Edata[n]) * G0
            ddkernels.assemble(np.ascontiguousarray(row.data), wl, wr, x)
            proj = np.zeros((nin, 4))
            ddkernels.thomas_solve(m_lfac, m_dfac, m_off, x, proj)
            proj_c = CDD(proj)
            mv = _dd_tridiag_matvec(DD(m_diag[0]), DD(m_off[0]), proj_c)
            rhs_c = CDD(rhs) + mv * DD(np.array(cum[n]))
            if n <= k - 1:
                sv = _dd_tridiag_matvec(DD(s_diag[0]), DD(s_off[0]), proj_c)
                rhs_c = rhs_c - sv * DD(np.array(a_dd[n - 1]))
            rhs = np.ascontiguousarray(rhs_c.data)
        ddkernels.thomas_solve(lfac, dfac, k_off, rhs, x)
        ddkernels.interp_quad(x, xil, xir, V[n])
        steps.append(FemFunction(mesh, CDD(x.copy())))
    return Trajectory(p, k, tau, N, variant, EXTENDED, mesh, steps, factor_count=1)


def _dd_source_table(p: ProblemSpec, mesh: Mesh1D, xq_dd: DD, Edata, tau_dd: DD,
                     N: int, order: int) -> np.ndarray:
    """(N+1, Q, 4) table of f(t_m, x_q) in complex dd."""
    src = p.source
    Q = xq_dd.shape[0]
    out = np.empty((N + 1, Q, 4))
    if src.kind == "expRhoU":
        # the time factor is exactly the substantial weight table
        s = np.ascontiguousarray(src.spatial.eval_dd(xq_dd).data)
        ddkernels.colwise_cmul(Edata, s, out)
        return out
    if src.kind == "one":
        s = src.spatial.eval_dd(xq_dd).data
        out[:] = s[None, :, :]
        return out
    if src.kind == "exp":
        s = src.spatial.eval_dd(xq_dd)
        powers = _scalar_exp_powers(complex(src.c) * float(tau_dd.to_float()), N)
        for m in range(N + 1):
            out[m] = (s * CDD(powers[m])).data
        return out
    # custom sources: float64 values promoted (documented fallback)
    xq = xq_dd.to_float()
    for m in range(N + 1):
        out[m] = CDD.from_complex(src.values_at(m * float(tau_dd.to_float()), xq, p)).data
    return out


def _project_rows_dd(Fdata, mesh, wl, wr, xil, xir, m_lfac, m_dfac, m_off):
    """Replace each row by its L2 projection re-interpolated at quad points."""
    nin = mesh.n_interior
    rhs = np.zeros((nin, 4))
    proj = np.zeros((nin, 4))
    for m in range(Fdata.shape[0]):
        ddkernels.assemble(np.ascontiguousarray(Fdata[m]), wl, wr, rhs)
        ddkernels.thomas_solve(m_lfac, m_dfac, m_off, rhs, proj)
        ddkernels.interp_quad(proj, xil, xir, Fdata[m])


def _dd_correction_table(p, mesh, xq_dd, Fdata, tau_dd, k, coeffs, variant,
                         wl, wr, xil, xir, m_lfac, m_dfac, m_off, order) -> np.ndarray:
    """CF[j] = a_j f(0) + sum_l b_{l,j} tau^l d_t^l f(0), complex dd rows."""
    Q = xq_dd.shape[0]
    CF = np.zeros((k, Q, 4))
    F0 = CDD(np.ascontiguousarray(Fdata[0].copy()))
    rows = {0: F0}
    for l in range(1, k - 1):
        fl = _dd_source_derivative(p, xq_dd, l)
        if variant == "comparison_source":
            data = np.ascontiguousarray(fl.data.copy())
            tmp = np.zeros((mesh.n_interior, 4))
            proj = np.zeros((mesh.n_interior, 4))
            ddkernels.assemble(data, wl, wr, tmp)
            ddkernels.thomas_solve(m_lfac, m_dfac, m_off, tmp, proj)
            ddkernels.interp_quad(proj, xil, xir, data)
            fl = CDD(data)
        rows[l] = fl
    tau_pow = DD.from_float(1.0)
    tau_pows = [tau_pow]
    for l in range(1, k - 1):
        tau_pows.append(tau_pows[-1] * tau_dd)
    for j in range(1, k):
        acc = rows[0] * _frac_dd(coeffs.a[j - 1])
        for l in range(1, k - 1):
            blj = coeffs.b[l - 1][j - 1]
            if blj != 0:
                acc = acc + rows[l] * (_frac_dd(blj) * tau_pows[l])
        CF[j] = acc.data
    return CF


def _dd_source_derivative(p: ProblemSpec, xq_dd: DD, l: int) -> CDD:
    src = p.source
    if src.kind == "zero" or src.kind == "one":
        return CDD.zeros(xq_dd.shape)
    if src.kind == "exp":
        s = src.spatial.eval_dd(xq_dd)
        factor = CDD.from_complex(np.complex128(src.c) ** l)
        return s * CDD(np.broadcast_to(factor.data, s.shape + (4,)).copy())
    if src.kind == "expRhoU":
        s = src.spatial.eval_dd(xq_dd)
        u = p.potential.eval_dd(xq_dd)
        base = u * CDD.from_complex(-p.rho)
        acc = s
        for _ in range(l):
            acc = acc * base
        return acc
    xq = xq_dd.to_float()
    return CDD.from_complex(src.derivative_at_zero(l, xq, p))
