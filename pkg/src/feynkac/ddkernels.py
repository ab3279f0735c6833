"""Numba kernels for the double-double stepping path.

Layout convention (matches :mod:`feynkac.ddreal`): a complex double-double
array is float64 with trailing axis 4 = (re_hi, re_lo, im_hi, im_lo); a real
one has trailing axis 2 = (hi, lo).  Kernels never reassociate sums: history
reductions run in ascending index order per quadrature point, so results are
bit-reproducible regardless of thread count.

fastmath stays off everywhere -- it would break the error-free transforms.
"""

import numpy as np
from numba import njit, prange


@njit(inline="always")
def _ts(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(inline="always")
def _qts(a, b):
    s = a + b
    return s, b - (s - a)


@njit(inline="always")
def _tp(a, b):
    p = a * b
    c = 134217729.0 * a
    ahi = c - (c - a)
    alo = a - ahi
    c = 134217729.0 * b
    bhi = c - (c - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


@njit(inline="always")
def _dadd(xh, xl, yh, yl):
    s, e = _ts(xh, yh)
    t, f = _ts(xl, yl)
    e += t
    s, e = _qts(s, e)
    e += f
    return _qts(s, e)


@njit(inline="always")
def _dmul(xh, xl, yh, yl):
    p, e = _tp(xh, yh)
    e += xh * yl + xl * yh
    return _qts(p, e)


@njit(inline="always")
def _ddiv(xh, xl, yh, yl):
    q1 = xh / yh
    ph, pl = _dmul(yh, yl, q1, 0.0)
    rh, rl = _dadd(xh, xl, -ph, -pl)
    q2 = rh / yh
    ph, pl = _dmul(yh, yl, q2, 0.0)
    rh, rl = _dadd(rh, rl, -ph, -pl)
    q3 = rh / yh
    h, l = _qts(q1, q2)
    return _dadd(h, l, q3, 0.0)


@njit(inline="always")
def _cmul(a0, a1, a2, a3, b0, b1, b2, b3):
    # (a0+a1 + i(a2+a3)) * (b0+b1 + i(b2+b3))
    p0, p1 = _dmul(a0, a1, b0, b1)
    q0, q1 = _dmul(a2, a3, b2, b3)
    r0, r1 = _dmul(a0, a1, b2, b3)
    s0, s1 = _dmul(a2, a3, b0, b1)
    reh, rel = _dadd(p0, p1, -q0, -q1)
    imh, iml = _dadd(r0, r1, s0, s1)
    return reh, rel, imh, iml


@njit(cache=True, parallel=True)
def step_rhs(DPa, V, DPs, F, E, G0q, CF, ds, cin_h, cin_l, n, jmax, out):
    """Per-step RHS integrand at every quadrature point (complex dd).

    out[q] = - sum_{i=1}^{n-1} DPa[i,q] * V[n-i,q]
             + sum_{i=0}^{n-1} DPs[i,q] * F[n-i,q]            (if source tables given)
             + (cin_h + cin_l) * E[n,q] * G0q[q]               (if G0q given)
             + sum_{j=1}^{min(jmax,n)} ds[n-j] * E[n-j,q] * CF[j,q]   (if CF given)
    """
    Q = out.shape[0]
    has_src = DPs.shape[0] > 0
    has_init = G0q.shape[0] > 0
    has_corr = CF.shape[0] > 0
    for q in prange(Q):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        for i in range(1, n):
            m = n - i
            p0, p1, p2, p3 = _cmul(
                DPa[i, q, 0], DPa[i, q, 1], DPa[i, q, 2], DPa[i, q, 3],
                V[m, q, 0], V[m, q, 1], V[m, q, 2], V[m, q, 3])
            a0, a1 = _dadd(a0, a1, -p0, -p1)
            a2, a3 = _dadd(a2, a3, -p2, -p3)
        if has_src:
            for i in range(0, n):
                m = n - i
                p0, p1, p2, p3 = _cmul(
                    DPs[i, q, 0], DPs[i, q, 1], DPs[i, q, 2], DPs[i, q, 3],
                    F[m, q, 0], F[m, q, 1], F[m, q, 2], F[m, q, 3])
                a0, a1 = _dadd(a0, a1, p0, p1)
                a2, a3 = _dadd(a2, a3, p2, p3)
        if has_init:
            p0, p1, p2, p3 = _cmul(
                E[n, q, 0], E[n, q, 1], E[n, q, 2], E[n, q, 3],
                G0q[q, 0], G0q[q, 1], G0q[q, 2], G0q[q, 3])
            r0, r1 = _dmul(p0, p1, cin_h, cin_l)
            r2, r3 = _dmul(p2, p3, cin_h, cin_l)
            a0, a1 = _dadd(a0, a1, r0, r1)
            a2, a3 = _dadd(a2, a3, r2, r3)
        if has_corr:
            jm = jmax if jmax < n else n
            for j in range(1, jm + 1):
                m = n - j
                p0, p1, p2, p3 = _cmul(
                    E[m, q, 0], E[m, q, 1], E[m, q, 2], E[m, q, 3],
                    CF[j, q, 0], CF[j, q, 1], CF[j, q, 2], CF[j, q, 3])
                r0, r1 = _dmul(p0, p1, ds[m, 0], ds[m, 1])
                r2, r3 = _dmul(p2, p3, ds[m, 0], ds[m, 1])
                a0, a1 = _dadd(a0, a1, r0, r1)
                a2, a3 = _dadd(a2, a3, r2, r3)
        out[q, 0] = a0
        out[q, 1] = a1
        out[q, 2] = a2
        out[q, 3] = a3


@njit(cache=True, parallel=True)
def scale_rows(E, s, out):
    """out[i,q] = (s[i] as dd) * E[i,q], rows scaled by real dd scalars."""
    for i in prange(E.shape[0]):
        sh = s[i, 0]
        sl = s[i, 1]
        for q in range(E.shape[1]):
            r0, r1 = _dmul(E[i, q, 0], E[i, q, 1], sh, sl)
            r2, r3 = _dmul(E[i, q, 2], E[i, q, 3], sh, sl)
            out[i, q, 0] = r0
            out[i, q, 1] = r1
            out[i, q, 2] = r2
            out[i, q, 3] = r3


@njit(cache=True, parallel=True)
def colwise_cmul(E, s, out):
    """out[i,q] = E[i,q] * s[q] (complex dd columns scaled by a complex row)."""
    for i in prange(E.shape[0]):
        for q in range(E.shape[1]):
            r0, r1, r2, r3 = _cmul(
                E[i, q, 0], E[i, q, 1], E[i, q, 2], E[i, q, 3],
                s[q, 0], s[q, 1], s[q, 2], s[q, 3])
            out[i, q, 0] = r0
            out[i, q, 1] = r1
            out[i, q, 2] = r2
            out[i, q, 3] = r3


@njit(cache=True)
def power_table(estep, refresh, every, out):
    """out[i,q] = estep[q]**i by running products, reseeded every `every` rows.

    refresh[j] holds the exact row for index (j+1)*every.
    """
    N1 = out.shape[0]
    Q = out.shape[1]
    for q in range(Q):
        out[0, q, 0] = 1.0
        out[0, q, 1] = 0.0
        out[0, q, 2] = 0.0
        out[0, q, 3] = 0.0
    for i in range(1, N1):
        if i % every == 0 and (i // every - 1) < refresh.shape[0]:
            j = i // every - 1
            for q in range(Q):
                out[i, q, 0] = refresh[j, q, 0]
                out[i, q, 1] = refresh[j, q, 1]
                out[i, q, 2] = refresh[j, q, 2]
                out[i, q, 3] = refresh[j, q, 3]
        else:
            for q in range(Q):
                r0, r1, r2, r3 = _cmul(
                    out[i - 1, q, 0], out[i - 1, q, 1], out[i - 1, q, 2], out[i - 1, q, 3],
                    estep[q, 0], estep[q, 1], estep[q, 2], estep[q, 3])
                out[i, q, 0] = r0
                out[i, q, 1] = r1
                out[i, q, 2] = r2
                out[i, q, 3] = r3


@njit(cache=True)
def assemble(Iq, wl, wr, out):
    """Scatter quadrature integrand into interior nodal load values.

    Iq: (Q,4) with Q = n_elems*nq; wl/wr: (nq,2) dd hat-function weights
    (element-length factor folded in); out: (n_elems-1, 4), overwritten.
    """
    nq = wl.shape[0]
    n_elems = Iq.shape[0] // nq
    for j in range(out.shape[0]):
        for c in range(4):
            out[j, c] = 0.0
    for e in range(n_elems):
        l0 = 0.0
        l1 = 0.0
        l2 = 0.0
        l3 = 0.0
        r0 = 0.0
        r1 = 0.0
        r2 = 0.0
        r3 = 0.0
        for r in range(nq):
            v0 = Iq[e * nq + r, 0]
            v1 = Iq[e * nq + r, 1]
            v2 = Iq[e * nq + r, 2]
            v3 = Iq[e * nq + r, 3]
            p0, p1 = _dmul(v0, v1, wl[r, 0], wl[r, 1])
            p2, p3 = _dmul(v2, v3, wl[r, 0], wl[r, 1])
            l0, l1 = _dadd(l0, l1, p0, p1)
            l2, l3 = _dadd(l2, l3, p2, p3)
            p0, p1 = _dmul(v0, v1, wr[r, 0], wr[r, 1])
            p2, p3 = _dmul(v2, v3, wr[r, 0], wr[r, 1])
            r0, r1 = _dadd(r0, r1, p0, p1)
            r2, r3 = _dadd(r2, r3, p2, p3)
        if e >= 1:
            out[e - 1, 0], out[e - 1, 1] = _dadd(out[e - 1, 0], out[e - 1, 1], l0, l1)
            out[e - 1, 2], out[e - 1, 3] = _dadd(out[e - 1, 2], out[e - 1, 3], l2, l3)
        if e + 1 <= out.shape[0]:
            out[e, 0], out[e, 1] = _dadd(out[e, 0], out[e, 1], r0, r1)
            out[e, 2], out[e, 3] = _dadd(out[e, 2], out[e, 3], r2, r3)


@njit(cache=True)
def thomas_factor(sub, diag, sup, lfac, dfac):
    """LU factors of a real dd tridiagonal matrix (no pivoting)."""
    n = diag.shape[0]
    dfac[0, 0] = diag[0, 0]
    dfac[0, 1] = diag[0, 1]
    for i in range(1, n):
        lh, ll = _ddiv(sub[i, 0], sub[i, 1], dfac[i - 1, 0], dfac[i - 1, 1])
        lfac[i, 0] = lh
        lfac[i, 1] = ll
        ph, pl = _dmul(lh, ll, sup[i - 1, 0], sup[i - 1, 1])
        dh, dl = _dadd(diag[i, 0], diag[i, 1], -ph, -pl)
        dfac[i, 0] = dh
        dfac[i, 1] = dl


@njit(cache=True)
def thomas_solve(lfac, dfac, sup, rhs, x):
    """Solve the factored real dd tridiagonal system for a complex dd rhs."""
    n = dfac.shape[0]
    # forward sweep
    x[0, 0] = rhs[0, 0]
    x[0, 1] = rhs[0, 1]
    x[0, 2] = rhs[0, 2]
    x[0, 3] = rhs[0, 3]
    for i in range(1, n):
        p0, p1 = _dmul(lfac[i, 0], lfac[i, 1], x[i - 1, 0], x[i - 1, 1])
        p2, p3 = _dmul(lfac[i, 0], lfac[i, 1], x[i - 1, 2], x[i - 1, 3])
        x[i, 0], x[i, 1] = _dadd(rhs[i, 0], rhs[i, 1], -p0, -p1)
        x[i, 2], x[i, 3] = _dadd(rhs[i, 2], rhs[i, 3], -p2, -p3)
    # back substitution
    x[n - 1, 0], x[n - 1, 1] = _ddiv(x[n - 1, 0], x[n - 1, 1], dfac[n - 1, 0], dfac[n - 1, 1])
    x[n - 1, 2], x[n - 1, 3] = _ddiv(x[n - 1, 2], x[n - 1, 3], dfac[n - 1, 0], dfac[n - 1, 1])
    for i in range(n - 2, -1, -1):
        p0, p1 = _dmul(sup[i, 0], sup[i, 1], x[i + 1, 0], x[i + 1, 1])
        p2, p3 = _dmul(sup[i, 0], sup[i, 1], x[i + 1, 2], x[i + 1, 3])
        t0, t1 = _dadd(x[i, 0], x[i, 1], -p0, -p1)
        t2, t3 = _dadd(x[i, 2], x[i, 3], -p2, -p3)
        x[i, 0], x[i, 1] = _ddiv(t0, t1, dfac[i, 0], dfac[i, 1])
        x[i, 2], x[i, 3] = _ddiv(t2, t3, dfac[i, 0], dfac[i, 1])


@njit(cache=True)
def interp_quad(xin, xil, xir, out):
    """P1 interpolation of interior nodal values onto quadrature points.

    xin: (n_elems-1, 4); xil/xir: (nq,2) dd values of 1-xi and xi;
    out: (n_elems*nq, 4).  Boundary nodes are hard zeros.
    """
    nq = xil.shape[0]
    n_elems = out.shape[0] // nq
    for e in range(n_elems):
        if e == 0:
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
        else:
            a0 = xin[e - 1, 0]
            a1 = xin[e - 1, 1]
            a2 = xin[e - 1, 2]
            a3 = xin[e - 1, 3]
        if e == n_elems - 1:
            b0 = 0.0
            b1 = 0.0
            b2 = 0.0
            b3 = 0.0
        else:
            b0 = xin[e, 0]
            b1 = xin[e, 1]
            b2 = xin[e, 2]
            b3 = xin[e, 3]
        for r in range(nq):
            p0, p1 = _dmul(a0, a1, xil[r, 0], xil[r, 1])
            p2, p3 = _dmul(a2, a3, xil[r, 0], xil[r, 1])
            q0, q1 = _dmul(b0, b1, xir[r, 0], xir[r, 1])
            q2, q3 = _dmul(b2, b3, xir[r, 0], xir[r, 1])
            s0, s1 = _dadd(p0, p1, q0, q1)
            s2, s3 = _dadd(p2, p3, q2, q3)
            out[e * nq + r, 0] = s0
            out[e * nq + r, 1] = s1
            out[e * nq + r, 2] = s2
            out[e * nq + r, 3] = s3


@njit(cache=True)
def symm_tridiag_quadform(u, ah, al, bh, bl, out):
    """Re(u^H T u) for constant symmetric tridiagonal T (diag a, off b), dd.

    u: (n,4); out: (2,) dd accumulator.
    """
    n = u.shape[0]
    s0 = 0.0
    s1 = 0.0
    for j in range(n):
        # diagonal: a * |u_j|^2
        m0, m1 = _dmul(u[j, 0], u[j, 1], u[j, 0], u[j, 1])
        m2, m3 = _dmul(u[j, 2], u[j, 3], u[j, 2], u[j, 3])
        d0, d1 = _dadd(m0, m1, m2, m3)
        d0, d1 = _dmul(d0, d1, ah, al)
        s0, s1 = _dadd(s0, s1, d0, d1)
        # off-diagonal: 2*b*Re(conj(u_j) u_{j+1})
        if j + 1 < n:
            m0, m1 = _dmul(u[j, 0], u[j, 1], u[j + 1, 0], u[j + 1, 1])
            m2, m3 = _dmul(u[j, 2], u[j, 3], u[j + 1, 2], u[j + 1, 3])
            d0, d1 = _dadd(m0, m1, m2, m3)
            d0, d1 = _dmul(d0, d1, bh, bl)
            d0, d1 = _dadd(d0, d1, d0, d1)
            s0, s1 = _dadd(s0, s1, d0, d1)
    out[0] = s0
    out[1] = s1
