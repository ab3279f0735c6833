"""Double-double arithmetic on numpy arrays.

The two precision modes of the library are

* ``"std64"``   -- IEEE binary64 / complex128 numpy arrays,
* ``"extended"``-- double-double: an unevaluated sum ``hi + lo`` of two
  binary64 values per number (>= 106 significand bits, comfortably more
  than the 64-bit significand of an x87 80-bit float).

A :class:`DD` stores the pair as the trailing axis of one float64 array of
shape ``(..., 2)``; :class:`CDD` stores a complex value as ``(..., 4)`` with
components ``(re_hi, re_lo, im_hi, im_lo)``.  That packing is what the
numba stepping kernels index directly, so class methods never copy when
handing data to them.

All operations use the classic error-free transformations (Dekker split,
Knuth two-sum); products use the split form because numpy exposes no fma.
Transcendentals are not implemented here: scalar seeds (exp, log, gamma,
quadrature nodes) come from mpmath via :func:`dd_from_mp` and friends.
Everything is deterministic for fixed inputs.
"""

from __future__ import annotations

import numpy as np
import mpmath

STD64 = "std64"
EXTENDED = "extended"

_SPLITTER = 134217729.0  # 2**27 + 1, exact in binary64
_MP_PREC = 130           # bits used when seeding from mpmath


# --- error-free transformations (work on floats and ndarrays alike) ---------

def two_sum(a, b):
    """(s, e) with s = fl(a+b) and s + e == a + b exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    """two_sum assuming |a| >= |b|."""
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """(p, e) with p = fl(a*b) and p + e == a * b exactly (Dekker)."""
    p = a * b
    ahi, alo = split(a)
    bhi, blo = split(b)
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


# --- raw pair kernels --------------------------------------------------------

def _dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    t, f = two_sum(xl, yl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def _dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return quick_two_sum(p, e)


def _dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    # r = x - q1*y, computed in dd
    ph, pl = _dd_mul(yh, yl, q1, np.zeros_like(q1) if isinstance(q1, np.ndarray) else 0.0)
    rh, rl = _dd_add(xh, xl, -ph, -pl)
    q2 = rh / yh
    ph, pl = _dd_mul(yh, yl, q2, np.zeros_like(q2) if isinstance(q2, np.ndarray) else 0.0)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    q3 = rh / yh
    h, l = quick_two_sum(q1, q2)
    return _dd_add(h, l, q3, np.zeros_like(q3) if isinstance(q3, np.ndarray) else 0.0)


class DD:
    """Real double-double array.  Backing store: float64 array (..., 2)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        self.data = data

    # construction -----------------------------------------------------------
    @staticmethod
    def from_float(x) -> "DD":
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape + (2,))
        out[..., 0] = x
        return DD(out)

    @staticmethod
    def from_pair(hi, lo) -> "DD":
        hi = np.asarray(hi, dtype=np.float64)
        out = np.empty(hi.shape + (2,))
        out[..., 0], out[..., 1] = quick_two_sum(hi, np.asarray(lo, dtype=np.float64))
        return DD(out)

    @staticmethod
    def zeros(shape) -> "DD":
        if isinstance(shape, int):
            shape = (shape,)
        return DD(np.zeros(tuple(shape) + (2,)))

    @property
    def hi(self):
        return self.data[..., 0]

    @property
    def lo(self):
        return self.data[..., 1]

    @property
    def shape(self):
        return self.data.shape[:-1]

    def copy(self) -> "DD":
        return DD(self.data.copy())

    def to_float(self) -> np.ndarray:
        return self.hi + self.lo

    def __getitem__(self, idx) -> "DD":
        return DD(self.data[idx])

    def __setitem__(self, idx, value: "DD"):
        self.data[idx] = value.data

    def __len__(self):
        return self.data.shape[0]

    def __repr__(self):
        return f"DD({self.hi!r} + {self.lo!r})"

    # arithmetic ---------------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, DD):
            return other
        return DD.from_float(other)

    def __add__(self, other):
        o = self._coerce(other)
        h, l = _dd_add(self.hi, self.lo, o.hi, o.lo)
        return DD(np.stack([h, l], axis=-1))

    __radd__ = __add__

    def __neg__(self):
        return DD(np.stack([-self.hi, -self.lo], axis=-1))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        h, l = _dd_mul(self.hi, self.lo, o.hi, o.lo)
        return DD(np.stack([h, l], axis=-1))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        h, l = _dd_div(self.hi, self.lo, o.hi, o.lo)
        return DD(np.stack([h, l], axis=-1))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def abs(self) -> "DD":
        sign = np.where(self.hi < 0, -1.0, 1.0)
        return DD(self.data * sign[..., None])

    def sqrt(self) -> "DD":
        # one Newton step on y ~ sqrt(x) doubles the working precision
        y = np.sqrt(self.hi)
        ydd = DD.from_float(y)
        return (ydd + self / ydd) * 0.5

    def sum(self, axis: int = 0) -> "DD":
        """Pairwise (deterministic) reduction along one axis."""
        cur = self
        if axis != 0:
            cur = DD(np.moveaxis(self.data, axis, 0))
        while cur.data.shape[0] > 1:
            n = cur.data.shape[0]
            m = n // 2
            head = cur[:m] + cur[m:2 * m]
            if n % 2:
                head0 = head[:1] + cur[n - 1:n]
                head = DD(np.concatenate([head0.data, head.data[1:]], axis=0))
            cur = head
        return cur[0]

    # comparisons (hi first, lo breaks ties) -----------------------------------
    def _cmp_key(self):
        return self.hi, self.lo

    def __lt__(self, other):
        o = self._coerce(other)
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo < o.lo))

    def __le__(self, other):
        o = self._coerce(other)
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo <= o.lo))

    def __gt__(self, other):
        return self._coerce(other) < self

    def __ge__(self, other):
        return self._coerce(other) <= self


class CDD:
    """Complex double-double array.  Backing store: float64 (..., 4)."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        self.data = data

    @staticmethod
    def from_complex(z) -> "CDD":
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape + (4,))
        out[..., 0] = z.real
        out[..., 2] = z.imag
        return CDD(out)

    @staticmethod
    def from_dd(re: DD, im: DD | None = None) -> "CDD":
        out = np.zeros(re.shape + (4,))
        out[..., 0:2] = re.data
        if im is not None:
            out[..., 2:4] = im.data
        return CDD(out)

    @staticmethod
    def zeros(shape) -> "CDD":
        if isinstance(shape, int):
            shape = (shape,)
        return CDD(np.zeros(tuple(shape) + (4,)))

    @property
    def re(self) -> DD:
        return DD(self.data[..., 0:2])

    @property
    def im(self) -> DD:
        return DD(self.data[..., 2:4])

    @property
    def shape(self):
        return self.data.shape[:-1]

    def copy(self) -> "CDD":
        return CDD(self.data.copy())

    def to_complex(self) -> np.ndarray:
        return (self.data[..., 0] + self.data[..., 1]) + 1j * (self.data[..., 2] + self.data[..., 3])

    def __getitem__(self, idx) -> "CDD":
        return CDD(self.data[idx])

    def __setitem__(self, idx, value: "CDD"):
        self.data[idx] = value.data

    def __len__(self):
        return self.data.shape[0]

    def __repr__(self):
        return f"CDD({self.to_complex()!r})"

    @staticmethod
    def _coerce(other):
        if isinstance(other, CDD):
            return other
        if isinstance(other, DD):
            return CDD.from_dd(other)
        return CDD.from_complex(other)

    def __add__(self, other):
        o = self._coerce(other)
        re = self.re + o.re
        im = self.im + o.im
        return CDD.from_dd(re, im)

    __radd__ = __add__

    def __neg__(self):
        return CDD(-self.data)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, DD) or np.isscalar(other) or (
            isinstance(other, np.ndarray) and other.dtype != np.complex128
        ):
            s = other if isinstance(other, DD) else DD.from_float(other)
            return CDD.from_dd(self.re * s, self.im * s)
        o = self._coerce(other)
        re = self.re * o.re - self.im * o.im
        im = self.re * o.im + self.im * o.re
        return CDD.from_dd(re, im)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DD):
            return CDD.from_dd(self.re / other, self.im / other)
        o = self._coerce(other)
        den = o.re * o.re + o.im * o.im
        re = (self.re * o.re + self.im * o.im) / den
        im = (self.im * o.re - self.re * o.im) / den
        return CDD.from_dd(re, im)

    def conj(self) -> "CDD":
        out = self.data.copy()
        out[..., 2:4] = -out[..., 2:4]
        return CDD(out)

    def abs2(self) -> DD:
        return self.re * self.re + self.im * self.im

    def abs(self) -> DD:
        return self.abs2().sqrt()

    def sum(self, axis: int = 0) -> "CDD":
        cur = self
        if axis != 0:
            cur = CDD(np.moveaxis(self.data, axis, 0))
        while cur.data.shape[0] > 1:
            n = cur.data.shape[0]
            m = n // 2
            head = cur[:m] + cur[m:2 * m]
            if n % 2:
                head0 = head[:1] + cur[n - 1:n]
                head = CDD(np.concatenate([head0.data, head.data[1:]], axis=0))
            cur = head
        return cur[0]


# --- scalar pair helpers -------------------------------------------------------
# Plain-float (hi, lo) tuples for tight Python loops (weight recurrences,
# per-step scalar coefficients); ~100x faster than 0-d array class ops.

def sc_from_float(x: float):
    return (float(x), 0.0)


def sc_add(x, y):
    h, l = _dd_add(x[0], x[1], y[0], y[1])
    return (h, l)


def sc_sub(x, y):
    h, l = _dd_add(x[0], x[1], -y[0], -y[1])
    return (h, l)


def sc_mul(x, y):
    h, l = _dd_mul(x[0], x[1], y[0], y[1])
    return (h, l)


def sc_div(x, y):
    q1 = x[0] / y[0]
    ph, pl = _dd_mul(y[0], y[1], q1, 0.0)
    rh, rl = _dd_add(x[0], x[1], -ph, -pl)
    q2 = rh / y[0]
    ph, pl = _dd_mul(y[0], y[1], q2, 0.0)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    q3 = rh / y[0]
    h, l = quick_two_sum(q1, q2)
    return sc_add((h, l), (q3, 0.0))


def sc_to_float(x) -> float:
    return x[0] + x[1]


def csc_mul(a, b):
    """Complex scalar pair product; operands are (re_hi, re_lo, im_hi, im_lo)."""
    re = sc_sub(sc_mul((a[0], a[1]), (b[0], b[1])), sc_mul((a[2], a[3]), (b[2], b[3])))
    im = sc_add(sc_mul((a[0], a[1]), (b[2], b[3])), sc_mul((a[2], a[3]), (b[0], b[1])))
    return (re[0], re[1], im[0], im[1])


# --- mpmath seeding ----------------------------------------------------------

def dd_from_mp(x) -> DD:
    """Round one mpmath real (or exact string/fraction) to double-double."""
    with mpmath.workprec(_MP_PREC):
        v = mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x
        hi = float(v)
        lo = float(v - hi)
    return DD.from_pair(np.float64(hi), np.float64(lo))


def cdd_from_mpc(z) -> CDD:
    with mpmath.workprec(_MP_PREC):
        zz = mpmath.mpc(z)
        rh = float(zz.real)
        rl = float(zz.real - rh)
        ih = float(zz.imag)
        il = float(zz.imag - ih)
    out = np.array([rh, rl, ih, il])
    return CDD(out)


def dd_to_mp(x: DD):
    """Scalar DD -> mpmath value at working precision (for oracles)."""
    return mpmath.mpf(float(x.hi)) + mpmath.mpf(float(x.lo))


def cdd_exp_mp(z: CDD) -> CDD:
    """exp of a scalar complex DD via mpmath (used for cache refresh seeds)."""
    with mpmath.workprec(_MP_PREC):
        zz = mpmath.mpc(mpmath.mpf(float(z.re.hi)) + mpmath.mpf(float(z.re.lo)),
                        mpmath.mpf(float(z.im.hi)) + mpmath.mpf(float(z.im.lo)))
        return cdd_from_mpc(mpmath.exp(zz))


def exp_cdd_rows(zs: CDD) -> CDD:
    """Elementwise mpmath exp over a (small) 1-d CDD array."""
    n = zs.data.shape[0]
    out = CDD.zeros((n,))
    for q in range(n):
        out.data[q] = cdd_exp_mp(zs[q]).data
    return out
