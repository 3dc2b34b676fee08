"""Pure-Python integration kernel.

Mirrors the compiled kernel in ``_ck.pyx``: same stepper (Dormand-Prince 5(4)
with quartic dense output), same potential evaluators, same result layout.
Scalar complex arithmetic on short lists is deliberate -- for systems of at
most eight components it beats numpy's per-call overhead by a wide margin,
though the compiled kernel is still 1-2 orders of magnitude faster.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from . import _tableau as T

BACKEND_NAME = "python"


class DenseSolution:
    """Piecewise-quartic dense output of one integration run.

    Component values (including carried first derivatives -- they are stored
    as their own components) are evaluated exactly from the step polynomials;
    nothing is ever differentiated numerically.
    """

    __slots__ = ("xs", "coef", "n_seg", "n_comp")

    def __init__(self, xs, coef):
        self.xs = np.asarray(xs, dtype=float)
        self.coef = np.asarray(coef, dtype=complex)  # (n_seg, n_comp, 5)
        self.n_seg = len(self.xs) - 1
        self.n_comp = self.coef.shape[1]

    @property
    def x_min(self):
        return self.xs[0]

    @property
    def x_max(self):
        return self.xs[-1]

    def _segment(self, x):
        xs = self.xs
        if x <= xs[0]:
            return 0
        if x >= xs[-1]:
            return self.n_seg - 1
        return int(np.searchsorted(xs, x, side="right")) - 1

    def eval(self, x, comp):
        span = self.xs[-1] - self.xs[0]
        if x < self.xs[0] - 1e-9 * span or x > self.xs[-1] + 1e-9 * span:
            raise ValueError(f"dense evaluation outside range: x={x!r}")
        k = self._segment(x)
        h = self.xs[k + 1] - self.xs[k]
        s = (x - self.xs[k]) / h
        c = self.coef[k, comp]
        return c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * c[4])))

    def sample(self, xs, comp):
        out = np.empty(len(xs), dtype=complex)
        for i, x in enumerate(xs):
            out[i] = self.eval(x, comp)
        return out


# ---------------------------------------------------------------------------
# potential evaluators
# ---------------------------------------------------------------------------


class ConstPotential:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = complex(value)

    def eval(self, x):
        return self.value

    def sample(self, xs):
        return np.full(len(xs), self.value, dtype=complex)


class TrigPTPotential:
    """2 A^2 (A^2 - B^2) / (A cos(Ax) + i B sin(Ax))^2."""

    __slots__ = ("A", "B", "num")

    def __init__(self, A, B):
        self.A = float(A)
        self.B = float(B)
        self.num = 2.0 * A * A * (A * A - B * B)

    def eval(self, x):
        d = self.A * math.cos(self.A * x) + 1j * self.B * math.sin(self.A * x)
        return self.num / (d * d)

    def sample(self, xs):
        return np.array([self.eval(x) for x in xs], dtype=complex)


class BackwardPartnerPotential:
    """Real second-step closed form, with its left-endpoint double pole.

    Near x = a the direct formula cancels catastrophically; there the local
    expansion 6/t^2 + v0 + v2*t^2 (t = x - a) is used instead.
    """

    __slots__ = ("kappa", "a", "t_switch", "v0", "v2")

    def __init__(self, kappa, a, t_switch, v0, v2):
        self.kappa = float(kappa)
        self.a = float(a)
        self.t_switch = float(t_switch)
        self.v0 = float(v0)
        self.v2 = float(v2)

    def eval(self, x):
        t = x - self.a
        if t < self.t_switch:
            if t <= 0.0:
                return complex(math.inf)
            return complex(6.0 / (t * t) + self.v0 + self.v2 * t * t)
        k = self.kappa
        num = (k * k - 1.0) * (
            k * k - 1.0 - k * k * math.cos(2.0 * x) + math.cos(2.0 * k * x + 2.0 * k * math.pi)
        )
        den = (
            k * math.cos(k * x + k * math.pi) * math.sin(x)
            - math.sin(k * x + k * math.pi) * math.cos(x)
        )
        return complex(num / (den * den))

    def sample(self, xs):
        return np.array([self.eval(x) for x in xs], dtype=complex)


class TripleChainPotential:
    """Fixed complex trigonometric potential with a length-3 root chain."""

    __slots__ = ()

    def eval(self, x):
        z = cmath.exp(1j * x)
        z2 = z * z
        z3 = z2 * z
        num = 6.0 * (25.0 * z + 324.0 * z2 + 1350.0 * z3 + 2500.0 * z2 * z2 + 2025.0 * z2 * z3)
        den = 3.0 + 25.0 * z + 81.0 * z2 + 75.0 * z3
        return num / (den * den)

    def sample(self, xs):
        return np.array([self.eval(x) for x in xs], dtype=complex)


class SplinePotential:
    """Cubic-spline interpolant of tabulated complex samples."""

    __slots__ = ("breaks", "coef", "n_seg")

    def __init__(self, breaks, coef):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coef = np.asarray(coef, dtype=complex)  # (n_seg, 4): c0..c3 in (x - x_k)
        self.n_seg = len(self.breaks) - 1

    def eval(self, x):
        b = self.breaks
        if x <= b[0]:
            k = 0
        elif x >= b[-1]:
            k = self.n_seg - 1
        else:
            k = int(np.searchsorted(b, x, side="right")) - 1
        d = x - b[k]
        c = self.coef[k]
        return c[0] + d * (c[1] + d * (c[2] + d * c[3]))

    def sample(self, xs):
        return np.array([self.eval(x) for x in xs], dtype=complex)


class DarbouxPotential:
    """Potential obtained from a parent by one second-order transformation.

    Evaluates V = V_parent - 2 [ W''/W - (W'/W)^2 ] with
    W' = (a1 - a2) u1 u2 and W'' = (a1 - a2) (u1' u2 + u1 u2'), so no
    numerical differentiation is involved.  W itself comes from a dedicated
    quadrature component integrated alongside (cancellation-free near
    endpoint zeros).  Endpoints where both u1 and u2 vanish are handled by
    the local series 6/t^2 + v0 + v2 t^2.
    """

    __slots__ = (
        "parent",
        "du1",
        "du2",
        "dw",
        "alpha1",
        "alpha2",
        "a",
        "b",
        "sing_left",
        "sing_right",
    )

    def __init__(self, parent, du1, du2, dw, alpha1, alpha2, a, b, sing_left=None, sing_right=None):
        self.parent = parent
        self.du1 = du1
        self.du2 = du2
        self.dw = dw
        self.alpha1 = complex(alpha1)
        self.alpha2 = complex(alpha2)
        self.a = float(a)
        self.b = float(b)
        self.sing_left = sing_left  # (t_switch, v0, v2) or None
        self.sing_right = sing_right

    def eval(self, x):
        if self.sing_left is not None:
            t = x - self.a
            if t < self.sing_left[0]:
                if t <= 0.0:
                    return complex(math.inf)
                return complex(6.0 / (t * t) + self.sing_left[1] + self.sing_left[2] * t * t)
        if self.sing_right is not None:
            t = self.b - x
            if t < self.sing_right[0]:
                if t <= 0.0:
                    return complex(math.inf)
                return complex(6.0 / (t * t) + self.sing_right[1] + self.sing_right[2] * t * t)
        u1 = self.du1.eval(x, 0)
        u1p = self.du1.eval(x, 1)
        u2 = self.du2.eval(x, 0)
        u2p = self.du2.eval(x, 1)
        w = self.dw.eval(x, 0)
        dal = self.alpha1 - self.alpha2
        r1 = dal * (u1p * u2 + u1 * u2p) / w
        r2 = dal * u1 * u2 / w
        return self.parent.eval(x) - 2.0 * (r1 - r2 * r2)

    def sample(self, xs):
        return np.array([self.eval(x) for x in xs], dtype=complex)


# ---------------------------------------------------------------------------
# adaptive Dormand-Prince driver
# ---------------------------------------------------------------------------

_PMAT = T.P


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


def _initial_step(rhs, x0, y0, f0, b, rtol, atol):
    n = len(y0)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d0 += abs(y0[i] / sc) ** 2
        d1 += abs(f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / n)
    d1 = math.sqrt(d1 / n)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, b - x0)
    y1 = [y0[i] + h0 * f0[i] for i in range(n)]
    f1 = rhs(x0 + h0, y1)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d2 += abs((f1[i] - f0[i]) / sc) ** 2
    d2 = math.sqrt(d2 / n) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, b - x0)


def _drive(rhs, y0, a, b, rtol, atol, grid, want_dense, max_steps):
    """Generic adaptive run of y' = rhs(x, y) from a to b (a < b)."""
    n = len(y0)
    x = a
    y = list(y0)
    f0 = rhs(x, y)
    h = _initial_step(rhs, x, y, f0, b, rtol, atol)

    grid_arr = None
    gi = 0
    values = None
    if grid is not None:
        grid_arr = np.asarray(grid, dtype=float)
        values = np.empty((n, len(grid_arr)), dtype=complex)
        span = b - a
        while gi < len(grid_arr) and grid_arr[gi] <= a + 1e-12 * span:
            for c in range(n):
                values[c, gi] = y[c]
            gi += 1

    seg_xs = [a] if want_dense else None
    seg_coef = [] if want_dense else None

    n_steps = 0
    n_rejected = 0
    K = [None] * 7
    span = b - a
    hmin_floor = 1e-15 * max(1.0, abs(a), abs(b))

    while x < b - 1e-14 * span:
        if n_steps + n_rejected > max_steps:
            return KernelResult(T.TOO_MANY_STEPS, x, y, values, None, n_steps, n_rejected)
        if h < hmin_floor:
            return KernelResult(T.STEP_UNDERFLOW, x, y, values, None, n_steps, n_rejected)
        h = min(h, b - x)

        K[0] = f0
        yt = [y[i] + h * T.A21 * K[0][i] for i in range(n)]
        K[1] = rhs(x + T.C2 * h, yt)
        yt = [y[i] + h * (T.A31 * K[0][i] + T.A32 * K[1][i]) for i in range(n)]
        K[2] = rhs(x + T.C3 * h, yt)
        yt = [y[i] + h * (T.A41 * K[0][i] + T.A42 * K[1][i] + T.A43 * K[2][i]) for i in range(n)]
        K[3] = rhs(x + T.C4 * h, yt)
        yt = [
            y[i]
            + h * (T.A51 * K[0][i] + T.A52 * K[1][i] + T.A53 * K[2][i] + T.A54 * K[3][i])
            for i in range(n)
        ]
        K[4] = rhs(x + T.C5 * h, yt)
        yt = [
            y[i]
            + h
            * (
                T.A61 * K[0][i]
                + T.A62 * K[1][i]
                + T.A63 * K[2][i]
                + T.A64 * K[3][i]
                + T.A65 * K[4][i]
            )
            for i in range(n)
        ]
        K[5] = rhs(x + h, yt)
        ynew = [
            y[i]
            + h
            * (
                T.B1 * K[0][i]
                + T.B3 * K[2][i]
                + T.B4 * K[3][i]
                + T.B5 * K[4][i]
                + T.B6 * K[5][i]
            )
            for i in range(n)
        ]
        K[6] = rhs(x + h, ynew)

        errnorm = 0.0
        for i in range(n):
            err = h * (
                T.E1 * K[0][i]
                + T.E3 * K[2][i]
                + T.E4 * K[3][i]
                + T.E5 * K[4][i]
                + T.E6 * K[5][i]
                + T.E7 * K[6][i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            errnorm += (abs(err) / sc) ** 2
        errnorm = math.sqrt(errnorm / n)

        if errnorm <= 1.0:
            if want_dense or (grid_arr is not None and gi < len(grid_arr)):
                coef = np.empty((n, 5), dtype=complex)
                for c in range(n):
                    coef[c, 0] = y[c]
                    for m in range(4):
                        acc = 0.0 + 0.0j
                        for j in range(7):
                            acc += K[j][c] * _PMAT[j][m]
                        coef[c, m + 1] = h * acc
                if want_dense:
                    seg_xs.append(x + h)
                    seg_coef.append(coef)
                if grid_arr is not None:
                    xh = x + h
                    lim = xh + 1e-12 * span if xh < b - 1e-12 * span else b + 1e-9 * span
                    while gi < len(grid_arr) and grid_arr[gi] <= lim:
                        s = (grid_arr[gi] - x) / h
                        for c in range(n):
                            cc = coef[c]
                            values[c, gi] = cc[0] + s * (cc[1] + s * (cc[2] + s * (cc[3] + s * cc[4])))
                        gi += 1
            x += h
            y = ynew
            f0 = K[6]
            n_steps += 1

            mag = 0.0
            for i in range(n):
                mag += abs(y[i])
            if mag > T.BLOWUP_LIMIT:
                return KernelResult(T.BLOWUP, x, y, values, None, n_steps, n_rejected)

            fac = T.SAFETY * errnorm**T.ORDER_EXP if errnorm > 0.0 else T.MAX_FACTOR
            h *= min(T.MAX_FACTOR, max(T.MIN_FACTOR, fac))
        else:
            n_rejected += 1
            h *= max(T.MIN_FACTOR, T.SAFETY * errnorm**T.ORDER_EXP)

    dense = None
    if want_dense:
        dense = DenseSolution(np.array(seg_xs), np.array(seg_coef))
    return KernelResult(T.OK, b, y, values, dense, n_steps, n_rejected)


def solve_chain(
    pot,
    E,
    depth,
    y0,
    a,
    b,
    rtol,
    atol,
    forcing=None,
    forcing_comp=0,
    grid=None,
    want_dense=False,
    max_steps=T.MAX_STEPS_DEFAULT,
):
    """Integrate the coupled chain  y_j'' = (V - E) y_j - y_{j-1}.

    Components are laid out (y_0, y_0', y_1, y_1', ...).  y_{-1} is the
    optional forcing (component ``forcing_comp`` of a dense solution), which
    turns level 0 into the inhomogeneous equation -y'' + (V - E) y = f.
    """
    if not 1 <= depth <= 4:
        raise ValueError(f"depth must be 1..4, got {depth}")
    if len(y0) != 2 * depth:
        raise ValueError(f"y0 must have {2 * depth} entries")
    E = complex(E)
    pe = pot.eval
    if depth == 1 and forcing is None:

        def rhs(x, y):
            return [y[1], (pe(x) - E) * y[0]]

    else:
        fe = forcing.eval if forcing is not None else None

        def rhs(x, y):
            v = pe(x) - E
            out = [0j] * (2 * depth)
            for j in range(depth):
                out[2 * j] = y[2 * j + 1]
                acc = v * y[2 * j]
                if j > 0:
                    acc -= y[2 * j - 2]
                elif fe is not None:
                    acc -= fe(x, forcing_comp)
                out[2 * j + 1] = acc
            return out

    return _drive(rhs, [complex(v) for v in y0], a, b, rtol, atol, grid, want_dense, max_steps)


def solve_quad(
    mode,
    d1,
    c1,
    d2,
    c2,
    scale,
    a,
    b,
    rtol,
    atol,
    y0=0j,
    grid=None,
    want_dense=False,
    max_steps=T.MAX_STEPS_DEFAULT,
):
    """Integrate w' = integrand(x) where the integrand is built from dense data.

    mode 0:  scale * d1[c1] * d2[c2]      (Wronskian carrier, W' identity)
    mode 1:  scale / d1[c1]**2            (reduction-of-order integral)
    """
    scale = complex(scale)
    if mode == 0:

        def rhs(x, y):
            return [scale * d1.eval(x, c1) * d2.eval(x, c2)]

    elif mode == 1:

        def rhs(x, y):
            v = d1.eval(x, c1)
            return [scale / (v * v)]

    else:
        raise ValueError(f"unknown quadrature mode {mode}")

    return _drive(rhs, [complex(y0)], a, b, rtol, atol, grid, want_dense, max_steps)
