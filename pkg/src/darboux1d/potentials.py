"""Potential specifications: closed-form, tabulated and Darboux-derived.

Every spec owns a kernel-side evaluator (``self.kernel``) usable from the hot
integration loops, plus metadata: its interval, an optional endpoint-
singularity record, and a provenance string for run records.

Endpoint singularities arise only in Darboux-derived potentials whose
transformation Wronskian has a double zero of the pair (u1, u2) at an
endpoint; there V ~ 6/t^2 + v0 + v2 t^2 with t the distance to the endpoint.
Such potentials are regular on the open interval and flagged, not rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import backend as K
from .errors import DegenerateCaseError, PotentialRegularityError
from .grid import Interval, default_interval

_POLE_GUARD = 1e100


@dataclass(frozen=True)
class EndpointSingularity:
    """Local data of a 6/t^2 endpoint pole: series V = 6/t^2 + v0 + v2 t^2."""

    t_switch: float
    v0: complex
    v2: complex


class PotentialSpec:
    """Base class; concrete specs populate ``kernel`` and call ``_check_regular``."""

    kind = "abstract"

    def __init__(self, interval: Interval, kernel, singular_left=None, singular_right=None):
        self.interval = interval
        self.kernel = kernel
        self.singular_left: EndpointSingularity | None = singular_left
        self.singular_right: EndpointSingularity | None = singular_right
        self.extras: dict = {}
        self._grid_values = None

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, x):
        """V(x) for scalar or array x inside [a, b]."""
        if np.isscalar(x):
            return self.kernel.eval(float(x))
        return self.kernel.sample(np.asarray(x, dtype=float))

    def grid_values(self) -> np.ndarray:
        """V on the interval nodes (cached); singular endpoint nodes give inf."""
        if self._grid_values is None:
            self._grid_values = self.kernel.sample(self.interval.nodes)
        return self._grid_values

    def finite_grid_values(self) -> tuple[np.ndarray, np.ndarray]:
        """(nodes, values) with flagged singular endpoint nodes dropped."""
        nodes = self.interval.nodes
        vals = self.grid_values()
        lo = 1 if self.singular_left is not None else 0
        hi = len(nodes) - (1 if self.singular_right is not None else 0)
        return nodes[lo:hi], vals[lo:hi]

    def is_real(self, tol: float = 1e-12) -> bool:
        _, vals = self.finite_grid_values()
        return float(np.max(np.abs(vals.imag))) < tol

    def second_derivative(self, x: float) -> complex:
        """V''(x); analytic where the closed form allows, else one-sided FD
        pointing into the interval (endpoint-safe)."""
        h = 1e-2
        into = 1.0 if (x - self.interval.a) < (self.interval.b - x) else -1.0
        f = [self.kernel.eval(x + into * k * h) for k in range(6)]
        return (
            15 / 4 * f[0] - 77 / 6 * f[1] + 107 / 6 * f[2] - 13 * f[3]
            + 61 / 12 * f[4] - 5 / 6 * f[5]
        ) / (h * h)

    def describe(self) -> str:
        return self.kind

    # -- construction helpers --------------------------------------------------
    def _check_regular(self):
        nodes, vals = self.finite_grid_values()
        bad = ~np.isfinite(vals) | (np.abs(vals) > _POLE_GUARD)
        if np.any(bad):
            x = nodes[np.argmax(bad)]
            raise PotentialRegularityError(
                f"{self.kind}: potential not finite at x = {x:.12g} (pole on [a, b])"
            )


class ConstantPotential(PotentialSpec):
    kind = "constant"

    def __init__(self, value=0.0, interval: Interval | None = None):
        interval = interval or default_interval()
        self.value = complex(value)
        super().__init__(interval, K.ConstPotential(self.value))

    def second_derivative(self, x):
        return 0j

    def describe(self):
        return f"constant(value={self.value})"


def zero_potential(interval: Interval | None = None) -> ConstantPotential:
    return ConstantPotential(0.0, interval)


class TrigPTPotential(PotentialSpec):
    """2 A^2 (A^2 - B^2) / (A cos(Ax) + i B sin(Ax))^2 -- PT-symmetric for real A, B.

    This is the partner of the zero potential built from sin(Ax) at energy A^2
    and exp(-iBx) at energy B^2.  For B = 0 the denominator reduces to
    (A cos(Ax))^2 and vanishes on the interval, which is a pole error.
    """

    kind = "pt-trig"

    def __init__(self, A: float, B: float, interval: Interval | None = None):
        interval = interval or default_interval()
        self.A = float(A)
        self.B = float(B)
        if self.A == 0.0:
            raise PotentialRegularityError("pt-trig: A must be nonzero")
        super().__init__(interval, K.TrigPTPotential(self.A, self.B))
        if self.B == 0.0:
            # pole wherever cos(Ax) = 0 on [a, b]
            k = math.ceil((self.A * interval.a / math.pi) - 0.5)
            x_pole = (k + 0.5) * math.pi / self.A
            if x_pole <= interval.b:
                raise PotentialRegularityError(
                    f"pt-trig: B = 0 and cos(Ax) vanishes at x = {x_pole:.12g}"
                )
        self._check_regular()

    def second_derivative(self, x):
        A, B = self.A, self.B
        num = 2.0 * A * A * (A * A - B * B)
        d = A * math.cos(A * x) + 1j * B * math.sin(A * x)
        dp = A * (-A * math.sin(A * x) + 1j * B * math.cos(A * x))
        # V = num / d^2, d'' = -A^2 d  =>  V'' = 2 num (A^2 d^2 + 3 d'^2) / d^4
        return 2.0 * num * (A * A * d * d + 3.0 * dp * dp) / d**4

    def describe(self):
        return f"pt-trig(A={self.A}, B={self.B})"


# regularity window of the backward closed form
KAPPA_MIN, KAPPA_MAX = 0.5, 1.5
SING_T_SWITCH = 0.12


def _backward_series_coefficients(kappa: float) -> tuple[float, float]:
    """(v0, v2) of the left-endpoint series of the backward closed form.

    Derived from its representation as the transform of the zero potential by
    the pair (sin x at energy 1, sin(kappa (x+pi)) at energy kappa^2), whose
    Wronskian vanishes cubically at x = -pi.
    """
    k2 = kappa * kappa
    v0 = (2.0 + 2.0 * k2) / 5.0
    p = -(1.0 + k2) / 10.0
    a3 = -1.0 / 6.0
    b3 = -k2 / 6.0
    a5 = 0.3 * a3 * a3
    b5 = 0.3 * b3 * b3
    r = (3.0 / 7.0) * (a5 + b5 + a3 * b3)
    v2 = -24.0 * r + 12.0 * p * p
    return v0, v2


class BackwardPartnerPotential(PotentialSpec):
    """Real closed form of the second (backward) transformation step.

    Regular on the open interval for 0.5 <= kappa <= 1.5, kappa != 1, but
    carries an intrinsic 6/(x+pi)^2 pole at the left endpoint: the second
    step's Wronskian necessarily vanishes there because both transformation
    functions do.  kappa = 1 degenerates (the mapped left-vanishing solution
    is identically zero); the construction then goes through the exceptional
    solution at the first step's factorization energy and undoes that step.
    """

    kind = "backward-partner"

    def __init__(self, kappa: float, interval: Interval | None = None):
        interval = interval or default_interval()
        if abs(interval.a + math.pi) > 1e-12 or abs(interval.b - math.pi) > 1e-12:
            raise PotentialRegularityError(
                "backward-partner: closed form is specific to the interval [-pi, pi]"
            )
        self.kappa = float(kappa)
        if self.kappa == 1.0:
            raise DegenerateCaseError(
                "backward-partner: kappa = 1 is degenerate; build the second step "
                "from the exceptional solution at the first step's factorization "
                "energy instead (the transform then undoes the first step)"
            )
        if not (KAPPA_MIN <= self.kappa <= KAPPA_MAX):
            raise PotentialRegularityError(
                f"backward-partner: kappa = {self.kappa} outside the regularity "
                f"window [{KAPPA_MIN}, {KAPPA_MAX}]"
            )
        v0, v2 = _backward_series_coefficients(self.kappa)
        sing = EndpointSingularity(SING_T_SWITCH, v0, v2)
        super().__init__(
            interval,
            K.BackwardPartnerPotential(self.kappa, interval.a, SING_T_SWITCH, v0, v2),
            singular_left=sing,
        )
        self._check_regular()

    def describe(self):
        return f"backward-partner(kappa={self.kappa})"


class TripleChainPotential(PotentialSpec):
    """Fixed complex trigonometric potential whose level at 4 carries a
    three-dimensional root subspace."""

    kind = "triple-chain"

    def __init__(self, interval: Interval | None = None):
        interval = interval or default_interval()
        super().__init__(interval, K.TripleChainPotential())
        self._check_regular()

    def describe(self):
        return "triple-chain()"


class TabulatedPotential(PotentialSpec):
    """Complex samples on the interval nodes, interpolated by a natural cubic spline."""

    kind = "table"

    def __init__(self, interval: Interval, samples):
        samples = np.asarray(samples, dtype=complex)
        if samples.shape != (interval.n_nodes,):
            raise ValueError(
                f"table: need {interval.n_nodes} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            i = int(np.argmax(~np.isfinite(samples)))
            raise PotentialRegularityError(
                f"table: sample not finite at x = {interval.nodes[i]:.12g}"
            )
        self.samples = samples
        coef = _natural_cubic_coefficients(interval.nodes, samples)
        super().__init__(interval, K.SplinePotential(interval.nodes.copy(), coef))

    def describe(self):
        return f"table(n={self.interval.n_nodes})"


def _natural_cubic_coefficients(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Natural cubic spline; returns (n-1, 4) coefficients in (x - x_k)."""
    n = len(xs)
    h = np.diff(xs)
    m = np.zeros(n, dtype=complex)  # second derivatives, natural ends stay 0
    if n > 2:
        diag = 2.0 * (h[:-1] + h[1:])
        rhs = 6.0 * ((ys[2:] - ys[1:-1]) / h[1:] - (ys[1:-1] - ys[:-2]) / h[:-1])
        lower = h[:-1].astype(complex).copy()
        upper = h[1:].astype(complex).copy()
        d = diag.astype(complex).copy()
        r = rhs.astype(complex).copy()
        for i in range(1, len(d)):  # Thomas elimination
            w = lower[i] / d[i - 1]
            d[i] -= w * upper[i - 1]
            r[i] -= w * r[i - 1]
        sol = np.zeros(len(d), dtype=complex)
        sol[-1] = r[-1] / d[-1]
        for i in range(len(d) - 2, -1, -1):
            sol[i] = (r[i] - upper[i] * sol[i + 1]) / d[i]
        m[1:-1] = sol
    coef = np.empty((n - 1, 4), dtype=complex)
    coef[:, 0] = ys[:-1]
    coef[:, 1] = (ys[1:] - ys[:-1]) / h - h * (2.0 * m[:-1] + m[1:]) / 6.0
    coef[:, 2] = m[:-1] / 2.0
    coef[:, 3] = (m[1:] - m[:-1]) / (6.0 * h)
    return coef


class DarbouxDerivedPotential(PotentialSpec):
    """V = V_parent - 2 (log W(u1, u2))'' carried as dense-output callables.

    Constructed by :func:`darboux1d.darboux.darboux_potential`; downstream
    integrations evaluate it at arbitrary points between grid nodes.
    """

    kind = "darboux"

    def __init__(
        self,
        parent: PotentialSpec,
        u1,
        u2,
        w_dense,
        alpha1: complex,
        alpha2: complex,
        singular_left: EndpointSingularity | None = None,
        singular_right: EndpointSingularity | None = None,
    ):
        interval = parent.interval
        self.parent = parent
        self.u1 = u1
        self.u2 = u2
        self.w_dense = w_dense
        self.alpha1 = complex(alpha1)
        self.alpha2 = complex(alpha2)
        sl = None if singular_left is None else (
            singular_left.t_switch, singular_left.v0, singular_left.v2)
        sr = None if singular_right is None else (
            singular_right.t_switch, singular_right.v0, singular_right.v2)
        kernel = K.DarbouxPotential(
            parent.kernel,
            u1.dense,
            u2.dense,
            w_dense,
            self.alpha1,
            self.alpha2,
            interval.a,
            interval.b,
            sl,
            sr,
        )
        super().__init__(interval, kernel, singular_left, singular_right)
        self._check_regular()

    def describe(self):
        return (
            f"darboux(parent={self.parent.describe()}, alpha1={self.alpha1}, "
            f"alpha2={self.alpha2})"
        )
