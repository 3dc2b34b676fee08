# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernel (Cython twin of ``_pk``).

Same stepper, same dense-output layout, same potential evaluators; the
Butcher tableau is imported from ``_tableau`` so both backends step
identically.  See ``_pk.py`` for the reference semantics.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, fmax, fmin, isfinite, pow, sin, sqrt

cnp.import_array()

from . import _tableau as _T

BACKEND_NAME = "c"

DEF MAXCOMP = 8
DEF NSTAGE = 7

# tableau constants copied into C storage at module init
cdef double C2 = _T.C2, C3 = _T.C3, C4 = _T.C4, C5 = _T.C5
cdef double A21 = _T.A21
cdef double A31 = _T.A31, A32 = _T.A32
cdef double A41 = _T.A41, A42 = _T.A42, A43 = _T.A43
cdef double A51 = _T.A51, A52 = _T.A52, A53 = _T.A53, A54 = _T.A54
cdef double A61 = _T.A61, A62 = _T.A62, A63 = _T.A63, A64 = _T.A64, A65 = _T.A65
cdef double B1 = _T.B1, B3 = _T.B3, B4 = _T.B4, B5 = _T.B5, B6 = _T.B6
cdef double E1 = _T.E1, E3 = _T.E3, E4 = _T.E4, E5 = _T.E5, E6 = _T.E6, E7 = _T.E7
cdef double[7][4] PMAT
for _j in range(7):
    for _m in range(4):
        PMAT[_j][_m] = _T.P[_j][_m]

cdef double SAFETY = _T.SAFETY
cdef double MIN_FACTOR = _T.MIN_FACTOR
cdef double MAX_FACTOR = _T.MAX_FACTOR
cdef double BLOWUP_LIMIT = _T.BLOWUP_LIMIT

OK = _T.OK
BLOWUP = _T.BLOWUP
STEP_UNDERFLOW = _T.STEP_UNDERFLOW
TOO_MANY_STEPS = _T.TOO_MANY_STEPS

cdef int _OK = _T.OK
cdef int _BLOWUP = _T.BLOWUP
cdef int _STEP_UNDERFLOW = _T.STEP_UNDERFLOW
cdef int _TOO_MANY_STEPS = _T.TOO_MANY_STEPS


cdef class DenseSolution:
    """Piecewise-quartic dense output; see the pure-Python twin."""

    cdef double[::1] _xs
    cdef double complex[:, :, ::1] _coef
    cdef readonly int n_seg
    cdef readonly int n_comp

    def __init__(self, xs, coef):
        self._xs = np.ascontiguousarray(xs, dtype=np.float64)
        self._coef = np.ascontiguousarray(coef, dtype=np.complex128)
        self.n_seg = self._xs.shape[0] - 1
        self.n_comp = self._coef.shape[1]

    @property
    def xs(self):
        return np.asarray(self._xs)

    @property
    def coef(self):
        return np.asarray(self._coef)

    @property
    def x_min(self):
        return self._xs[0]

    @property
    def x_max(self):
        return self._xs[self.n_seg]

    cdef inline int _segment(self, double x) noexcept:
        cdef int lo = 0, hi = self.n_seg, mid
        if x <= self._xs[0]:
            return 0
        if x >= self._xs[self.n_seg]:
            return self.n_seg - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if self._xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        return lo

    cdef double complex c_eval(self, double x, int comp) noexcept:
        cdef int k = self._segment(x)
        cdef double h = self._xs[k + 1] - self._xs[k]
        cdef double s = (x - self._xs[k]) / h
        cdef double complex c0 = self._coef[k, comp, 0]
        cdef double complex c1 = self._coef[k, comp, 1]
        cdef double complex c2 = self._coef[k, comp, 2]
        cdef double complex c3 = self._coef[k, comp, 3]
        cdef double complex c4 = self._coef[k, comp, 4]
        return c0 + s * (c1 + s * (c2 + s * (c3 + s * c4)))

    def eval(self, double x, int comp):
        cdef double span = self._xs[self.n_seg] - self._xs[0]
        if x < self._xs[0] - 1e-9 * span or x > self._xs[self.n_seg] + 1e-9 * span:
            raise ValueError(f"dense evaluation outside range: x={x!r}")
        return self.c_eval(x, comp)

    def sample(self, xs, int comp):
        cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
        cdef cnp.ndarray out = np.empty(xv.shape[0], dtype=np.complex128)
        cdef double complex[::1] ov = out
        cdef Py_ssize_t i
        for i in range(xv.shape[0]):
            ov[i] = self.c_eval(xv[i], comp)
        return out


# ---------------------------------------------------------------------------
# potential evaluators
# ---------------------------------------------------------------------------


cdef class Potential:
    cdef double complex c_eval(self, double x) noexcept:
        return 0.0

    def eval(self, double x):
        return self.c_eval(x)

    def sample(self, xs):
        cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
        cdef cnp.ndarray out = np.empty(xv.shape[0], dtype=np.complex128)
        cdef double complex[::1] ov = out
        cdef Py_ssize_t i
        for i in range(xv.shape[0]):
            ov[i] = self.c_eval(xv[i])
        return out


cdef class ConstPotential(Potential):
    cdef double complex value

    def __init__(self, value):
        self.value = value

    cdef double complex c_eval(self, double x) noexcept:
        return self.value


cdef class TrigPTPotential(Potential):
    cdef double A, B, num

    def __init__(self, double A, double B):
        self.A = A
        self.B = B
        self.num = 2.0 * A * A * (A * A - B * B)

    cdef double complex c_eval(self, double x) noexcept:
        cdef double complex d
        d = self.A * cos(self.A * x) + 1j * self.B * sin(self.A * x)
        return self.num / (d * d)


cdef class BackwardPartnerPotential(Potential):
    cdef double kappa, a, t_switch, v0, v2

    def __init__(self, double kappa, double a, double t_switch, double v0, double v2):
        self.kappa = kappa
        self.a = a
        self.t_switch = t_switch
        self.v0 = v0
        self.v2 = v2

    cdef double complex c_eval(self, double x) noexcept:
        cdef double t = x - self.a
        cdef double k = self.kappa
        cdef double num, den
        if t < self.t_switch:
            if t <= 0.0:
                return 1e308 * 1e308  # inf
            return 6.0 / (t * t) + self.v0 + self.v2 * t * t
        num = (k * k - 1.0) * (
            k * k - 1.0 - k * k * cos(2.0 * x) + cos(2.0 * k * x + 2.0 * k * 3.14159265358979323846)
        )
        den = (
            k * cos(k * x + k * 3.14159265358979323846) * sin(x)
            - sin(k * x + k * 3.14159265358979323846) * cos(x)
        )
        return num / (den * den)


cdef class TripleChainPotential(Potential):
    cdef double complex c_eval(self, double x) noexcept:
        cdef double complex z = cos(x) + 1j * sin(x)
        cdef double complex z2 = z * z
        cdef double complex z3 = z2 * z
        cdef double complex num = 6.0 * (
            25.0 * z + 324.0 * z2 + 1350.0 * z3 + 2500.0 * z2 * z2 + 2025.0 * z2 * z3
        )
        cdef double complex den = 3.0 + 25.0 * z + 81.0 * z2 + 75.0 * z3
        return num / (den * den)


cdef class SplinePotential(Potential):
    cdef double[::1] breaks
    cdef double complex[:, ::1] coef
    cdef int n_seg

    def __init__(self, breaks, coef):
        self.breaks = np.ascontiguousarray(breaks, dtype=np.float64)
        self.coef = np.ascontiguousarray(coef, dtype=np.complex128)
        self.n_seg = self.breaks.shape[0] - 1

    cdef double complex c_eval(self, double x) noexcept:
        cdef int lo = 0, hi = self.n_seg, mid
        cdef double d
        if x <= self.breaks[0]:
            lo = 0
        elif x >= self.breaks[self.n_seg]:
            lo = self.n_seg - 1
        else:
            while hi - lo > 1:
                mid = (lo + hi) >> 1
                if self.breaks[mid] <= x:
                    lo = mid
                else:
                    hi = mid
        d = x - self.breaks[lo]
        return self.coef[lo, 0] + d * (self.coef[lo, 1] + d * (self.coef[lo, 2] + d * self.coef[lo, 3]))


cdef class DarbouxPotential(Potential):
    cdef Potential parent
    cdef DenseSolution du1, du2, dw
    cdef double complex alpha1, alpha2
    cdef double a, b
    cdef bint has_sl, has_sr
    cdef double sl_t, sr_t
    cdef double complex sl_v0, sl_v2, sr_v0, sr_v2

    def __init__(self, Potential parent, DenseSolution du1, DenseSolution du2,
                 DenseSolution dw, alpha1, alpha2, double a, double b,
                 sing_left=None, sing_right=None):
        self.parent = parent
        self.du1 = du1
        self.du2 = du2
        self.dw = dw
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.a = a
        self.b = b
        self.has_sl = sing_left is not None
        if self.has_sl:
            self.sl_t = sing_left[0]
            self.sl_v0 = sing_left[1]
            self.sl_v2 = sing_left[2]
        self.has_sr = sing_right is not None
        if self.has_sr:
            self.sr_t = sing_right[0]
            self.sr_v0 = sing_right[1]
            self.sr_v2 = sing_right[2]

    cdef double complex c_eval(self, double x) noexcept:
        cdef double t
        cdef double complex u1, u1p, u2, u2p, w, dal, r1, r2
        if self.has_sl:
            t = x - self.a
            if t < self.sl_t:
                if t <= 0.0:
                    return 1e308 * 1e308
                return 6.0 / (t * t) + self.sl_v0 + self.sl_v2 * t * t
        if self.has_sr:
            t = self.b - x
            if t < self.sr_t:
                if t <= 0.0:
                    return 1e308 * 1e308
                return 6.0 / (t * t) + self.sr_v0 + self.sr_v2 * t * t
        u1 = self.du1.c_eval(x, 0)
        u1p = self.du1.c_eval(x, 1)
        u2 = self.du2.c_eval(x, 0)
        u2p = self.du2.c_eval(x, 1)
        w = self.dw.c_eval(x, 0)
        dal = self.alpha1 - self.alpha2
        r1 = dal * (u1p * u2 + u1 * u2p) / w
        r2 = dal * u1 * u2 / w
        return self.parent.c_eval(x) - 2.0 * (r1 - r2 * r2)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


class KernelResult:
    __slots__ = ("status", "x_fail", "y_final", "values", "dense", "n_steps", "n_rejected")

    def __init__(self, status, x_fail, y_final, values, dense, n_steps, n_rejected):
        self.status = status
        self.x_fail = x_fail
        self.y_final = y_final
        self.values = values
        self.dense = dense
        self.n_steps = n_steps
        self.n_rejected = n_rejected


cdef class _System:
    """RHS dispatch without Python overhead in the stepping loop."""

    cdef int n

    cdef void rhs(self, double x, double complex* y, double complex* out) noexcept:
        pass


cdef class _ChainSystem(_System):
    cdef Potential pot
    cdef double complex E
    cdef int depth
    cdef DenseSolution forcing
    cdef int forcing_comp
    cdef bint has_forcing

    def __init__(self, Potential pot, E, int depth, forcing, int forcing_comp):
        self.pot = pot
        self.E = E
        self.depth = depth
        self.n = 2 * depth
        self.has_forcing = forcing is not None
        self.forcing = forcing if self.has_forcing else None
        self.forcing_comp = forcing_comp

    cdef void rhs(self, double x, double complex* y, double complex* out) noexcept:
        cdef double complex v = self.pot.c_eval(x) - self.E
        cdef double complex acc
        cdef int j
        for j in range(self.depth):
            out[2 * j] = y[2 * j + 1]
            acc = v * y[2 * j]
            if j > 0:
                acc = acc - y[2 * j - 2]
            elif self.has_forcing:
                acc = acc - self.forcing.c_eval(x, self.forcing_comp)
            out[2 * j + 1] = acc


cdef class _QuadSystem(_System):
    cdef int mode
    cdef DenseSolution d1, d2
    cdef int c1, c2
    cdef double complex scale

    def __init__(self, int mode, DenseSolution d1, int c1, d2, int c2, scale):
        self.mode = mode
        self.d1 = d1
        self.c1 = c1
        self.d2 = d2 if d2 is not None else None
        self.c2 = c2
        self.scale = scale
        self.n = 1

    cdef void rhs(self, double x, double complex* y, double complex* out) noexcept:
        cdef double complex v
        if self.mode == 0:
            out[0] = self.scale * self.d1.c_eval(x, self.c1) * self.d2.c_eval(x, self.c2)
        else:
            v = self.d1.c_eval(x, self.c1)
            out[0] = self.scale / (v * v)


cdef double _initial_step(_System sys, double x0, double complex* y0,
                          double complex* f0, double b, double rtol, double atol):
    cdef int n = sys.n
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, h0, h1, dm
    cdef double complex[MAXCOMP] y1
    cdef double complex[MAXCOMP] f1
    cdef int i
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d0 += (abs(y0[i]) / sc) ** 2
        d1 += (abs(f0[i]) / sc) ** 2
    d0 = sqrt(d0 / n)
    d1 = sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = fmin(h0, b - x0)
    for i in range(n):
        y1[i] = y0[i] + h0 * f0[i]
    sys.rhs(x0 + h0, y1, f1)
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d2 += (abs((f1[i] - f0[i]) / sc)) ** 2
    d2 = sqrt(d2 / n) / h0
    dm = fmax(d1, d2)
    h1 = fmax(1e-6, h0 * 1e-3) if dm <= 1e-15 else pow(0.01 / dm, 0.2)
    return fmin(fmin(100 * h0, h1), b - x0)


def _drive(_System sys, y0_list, double a, double b, double rtol, double atol,
           grid, bint want_dense, long max_steps):
    cdef int n = sys.n
    cdef double complex[MAXCOMP] y
    cdef double complex[MAXCOMP] ynew
    cdef double complex[MAXCOMP] yt
    cdef double complex[NSTAGE][MAXCOMP] K
    cdef double complex err, acc
    cdef double x = a, h, sc, errnorm, fac, mag, span, hmin_floor, s, lim, xh
    cdef long n_steps = 0, n_rejected = 0
    cdef int i, j, m
    cdef Py_ssize_t gi = 0, ngrid = 0

    for i in range(n):
        y[i] = y0_list[i]

    cdef double complex[MAXCOMP] f0
    sys.rhs(x, y, f0)
    h = _initial_step(sys, x, y, f0, b, rtol, atol)

    cdef const double[::1] gv = None
    values = None
    cdef double complex[:, ::1] vv = None
    if grid is not None:
        gv = np.ascontiguousarray(grid, dtype=np.float64)
        ngrid = gv.shape[0]
        values = np.empty((n, ngrid), dtype=np.complex128)
        vv = values
    span = b - a
    if gv is not None:
        while gi < ngrid and gv[gi] <= a + 1e-12 * span:
            for i in range(n):
                vv[i, gi] = y[i]
            gi += 1

    cdef Py_ssize_t cap = 512, nseg = 0
    seg_xs_arr = np.empty(cap + 1, dtype=np.float64) if want_dense else None
    seg_cf_arr = np.empty((cap, n, 5), dtype=np.complex128) if want_dense else None
    cdef double[::1] sx = seg_xs_arr if want_dense else None
    cdef double complex[:, :, ::1] scf = seg_cf_arr if want_dense else None
    if want_dense:
        sx[0] = a

    # per-step dense coefficients (also used for grid sampling)
    cdef double complex[MAXCOMP][5] cf
    cdef bint need_cf

    hmin_floor = 1e-15 * fmax(1.0, fmax(fabs(a), fabs(b)))

    while x < b - 1e-14 * span:
        if n_steps + n_rejected > max_steps:
            return KernelResult(_TOO_MANY_STEPS, x, [y[i] for i in range(n)],
                                values, None, n_steps, n_rejected)
        if h < hmin_floor:
            return KernelResult(_STEP_UNDERFLOW, x, [y[i] for i in range(n)],
                                values, None, n_steps, n_rejected)
        if h > b - x:
            h = b - x

        for i in range(n):
            K[0][i] = f0[i]
        for i in range(n):
            yt[i] = y[i] + h * (A21 * K[0][i])
        sys.rhs(x + C2 * h, yt, K[1])
        for i in range(n):
            yt[i] = y[i] + h * (A31 * K[0][i] + A32 * K[1][i])
        sys.rhs(x + C3 * h, yt, K[2])
        for i in range(n):
            yt[i] = y[i] + h * (A41 * K[0][i] + A42 * K[1][i] + A43 * K[2][i])
        sys.rhs(x + C4 * h, yt, K[3])
        for i in range(n):
            yt[i] = y[i] + h * (A51 * K[0][i] + A52 * K[1][i] + A53 * K[2][i] + A54 * K[3][i])
        sys.rhs(x + C5 * h, yt, K[4])
        for i in range(n):
            yt[i] = y[i] + h * (A61 * K[0][i] + A62 * K[1][i] + A63 * K[2][i]
                                + A64 * K[3][i] + A65 * K[4][i])
        sys.rhs(x + h, yt, K[5])
        for i in range(n):
            ynew[i] = y[i] + h * (B1 * K[0][i] + B3 * K[2][i] + B4 * K[3][i]
                                  + B5 * K[4][i] + B6 * K[5][i])
        sys.rhs(x + h, ynew, K[6])

        errnorm = 0.0
        for i in range(n):
            err = h * (E1 * K[0][i] + E3 * K[2][i] + E4 * K[3][i]
                       + E5 * K[4][i] + E6 * K[5][i] + E7 * K[6][i])
            sc = atol + rtol * fmax(abs(y[i]), abs(ynew[i]))
            errnorm += (abs(err) / sc) ** 2
        errnorm = sqrt(errnorm / n)

        if errnorm <= 1.0:
            need_cf = want_dense or (gv is not None and gi < ngrid)
            if need_cf:
                for i in range(n):
                    cf[i][0] = y[i]
                    for m in range(4):
                        acc = 0.0
                        for j in range(NSTAGE):
                            acc = acc + K[j][i] * PMAT[j][m]
                        cf[i][m + 1] = h * acc
                if want_dense:
                    if nseg >= cap:
                        cap *= 2
                        seg_xs_arr = _grow1(seg_xs_arr, cap + 1)
                        seg_cf_arr = _grow3(seg_cf_arr, cap, n)
                        sx = seg_xs_arr
                        scf = seg_cf_arr
                    sx[nseg + 1] = x + h
                    for i in range(n):
                        for m in range(5):
                            scf[nseg, i, m] = cf[i][m]
                    nseg += 1
                if gv is not None:
                    xh = x + h
                    lim = xh + 1e-12 * span if xh < b - 1e-12 * span else b + 1e-9 * span
                    while gi < ngrid and gv[gi] <= lim:
                        s = (gv[gi] - x) / h
                        for i in range(n):
                            vv[i, gi] = cf[i][0] + s * (cf[i][1] + s * (cf[i][2] + s * (cf[i][3] + s * cf[i][4])))
                        gi += 1
            x += h
            for i in range(n):
                y[i] = ynew[i]
                f0[i] = K[6][i]
            n_steps += 1

            mag = 0.0
            for i in range(n):
                mag += abs(y[i])
            if mag > BLOWUP_LIMIT or not isfinite(mag):
                return KernelResult(_BLOWUP, x, [y[i] for i in range(n)],
                                    values, None, n_steps, n_rejected)

            fac = SAFETY * pow(errnorm, -0.2) if errnorm > 0.0 else MAX_FACTOR
            h *= fmin(MAX_FACTOR, fmax(MIN_FACTOR, fac))
        else:
            n_rejected += 1
            h *= fmax(MIN_FACTOR, SAFETY * pow(errnorm, -0.2))

    dense = None
    if want_dense:
        dense = DenseSolution(seg_xs_arr[: nseg + 1].copy(),
                              seg_cf_arr[:nseg].copy())
    return KernelResult(_OK, b, [y[i] for i in range(n)], values, dense,
                        n_steps, n_rejected)


def _grow1(arr, Py_ssize_t new_len):
    out = np.empty(new_len, dtype=np.float64)
    out[: arr.shape[0]] = arr
    return out


def _grow3(arr, Py_ssize_t new_cap, Py_ssize_t n):
    out = np.empty((new_cap, n, 5), dtype=np.complex128)
    out[: arr.shape[0]] = arr
    return out


def solve_chain(Potential pot, E, int depth, y0, double a, double b,
                double rtol, double atol, forcing=None, int forcing_comp=0,
                grid=None, bint want_dense=False, long max_steps=0):
    if not 1 <= depth <= MAXCOMP // 2:
        raise ValueError(f"depth must be 1..{MAXCOMP // 2}, got {depth}")
    if len(y0) != 2 * depth:
        raise ValueError(f"y0 must have {2 * depth} entries")
    if max_steps <= 0:
        max_steps = _T.MAX_STEPS_DEFAULT
    sys = _ChainSystem(pot, complex(E), depth, forcing, forcing_comp)
    return _drive(sys, [complex(v) for v in y0], a, b, rtol, atol, grid,
                  want_dense, max_steps)


def solve_quad(int mode, DenseSolution d1, int c1, d2, int c2, scale,
               double a, double b, double rtol, double atol, y0=0j,
               grid=None, bint want_dense=False, long max_steps=0):
    if max_steps <= 0:
        max_steps = _T.MAX_STEPS_DEFAULT
    if mode not in (0, 1):
        raise ValueError(f"unknown quadrature mode {mode}")
    sys = _QuadSystem(mode, d1, c1, d2, c2, complex(scale))
    return _drive(sys, [complex(y0)], a, b, rtol, atol, grid, want_dense, max_steps)
