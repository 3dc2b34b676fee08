"""Dirichlet spectral analysis via the characteristic function D(E).

D(E) is the endpoint value psi_E(b) of the solution normalized at the left
endpoint (psi(a) = 0, psi'(a) = 1 for regular potentials).  Its zeros are the
Dirichlet eigenvalues; zero multiplicity equals the level's algebraic
multiplicity and is measured by contour winding of D'/D.

Potentials flagged with a left-endpoint 6/t^2 pole are handled by starting
the shooting on the regular (t^3) branch a small offset inside the interval,
with series initial data; D is then entire in E with zeros at the spectrum of
the limit-point realization.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernel import backend as K
from .errors import (
    AmbiguousWindingError,
    NotAnEigenvalueError,
    NumericsError,
    RootOnContourError,
    ScanWarning,
)
from .integrate import DEFAULT_ATOL, DEFAULT_RTOL, WaveSolution, _raise_on_status
from .potentials import PotentialSpec

ROOT_TOL_COEF = 1e-8          # |D| < coef * (1 + |D'| |E|) declares an eigenvalue
SCAN_STEP_DEFAULT = 0.05
REFINE_TOL = 1e-11
SINGULAR_START_OFFSET = 1e-3  # shooting offset from a flagged endpoint
_MAX_CONTOUR_SAMPLES = 8192
_WINDING_INT_TOL = 0.05


@dataclass(frozen=True)
class CharacteristicSample:
    """One evaluation of the characteristic function and its E-derivative."""

    E: complex
    D: complex
    Dprime: complex

    def is_root(self) -> bool:
        return abs(self.D) < ROOT_TOL_COEF * (1.0 + abs(self.Dprime) * abs(self.E))


@dataclass
class SpectrumLevel:
    E: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    eigenfunction: WaveSolution | None
    abs_D: float
    n_interior_nodes: int | None = None


@dataclass
class SpectrumReport:
    levels: list[SpectrumLevel] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def energies(self) -> list[complex]:
        return [lv.E for lv in self.levels]

    def sort(self):
        self.levels.sort(key=lambda lv: (lv.E.real, lv.E.imag))
        return self


# ---------------------------------------------------------------------------
# characteristic function
# ---------------------------------------------------------------------------


def _start_data(V: PotentialSpec, E: complex, order: int):
    """(x_start, y0) for the chain system of given derivative order.

    Regular left endpoint: psi(a) = 0, psi'(a) = 1 and zero data for the
    energy-derivative members.  Flagged 6/t^2 endpoint: series data of the
    regular branch psi = t^3 (1 + c2 t^2 + c4 t^4) at a small offset, with
    exact E-derivatives of the series.
    """
    a = V.interval.a
    if V.singular_right is not None:
        raise NumericsError("right-endpoint singular spectral problems not supported")
    if V.singular_left is None:
        y0 = [0j, 1.0 + 0j] + [0j] * (2 * order)
        return a, y0
    t = SINGULAR_START_OFFSET
    v0 = V.singular_left.v0
    v2 = V.singular_left.v2
    c2 = (v0 - E) / 14.0
    c4 = ((v0 - E) * c2 + v2) / 36.0
    t2, t3, t4, t5, t6, t7 = t * t, t**3, t**4, t**5, t**6, t**7
    y0 = [
        t3 + c2 * t5 + c4 * t7,
        3.0 * t2 + 5.0 * c2 * t4 + 7.0 * c4 * t6,
    ]
    if order >= 1:
        dc4 = -(v0 - E) / 252.0
        y0 += [-t5 / 14.0 + dc4 * t7, -5.0 * t4 / 14.0 + 7.0 * dc4 * t6]
    if order >= 2:
        y0 += [t7 / 504.0, t6 / 72.0]
    if order >= 3:
        y0 += [0j, 0j]
    return a + t, y0


def characteristic(
    V: PotentialSpec,
    E: complex,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> CharacteristicSample:
    """D(E) and dD/dE from one pass of the augmented system."""
    d = characteristic_derivatives(V, E, order=1, rtol=rtol, atol=atol)
    return CharacteristicSample(complex(E), d[0], d[1])


def characteristic_derivatives(
    V: PotentialSpec,
    E: complex,
    order: int,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> list[complex]:
    """[D, D', D''/2!, ...] up to ``order`` from nested augmented systems."""
    if not (1 <= order <= 3):
        raise ValueError("order must be 1, 2 or 3")
    E = complex(E)
    start, y0 = _start_data(V, E, order)
    iv = V.interval
    res = K.solve_chain(V.kernel, E, order + 1, y0, start, iv.b, rtol, atol)
    _raise_on_status(res, f"characteristic at E={E}")
    return [res.y_final[2 * j] for j in range(order + 1)]


def characteristic_scale(V: PotentialSpec, E: complex, delta: float = 0.3) -> float:
    """Local magnitude estimate of D near E (used for margin statements)."""
    s1 = characteristic(V, E + delta)
    s2 = characteristic(V, E - delta)
    return 0.5 * (abs(s1.D) + abs(s2.D))


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------


def eigenfunction(
    V: PotentialSpec,
    E: complex,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    check: bool = True,
) -> WaveSolution:
    """Normalized Dirichlet eigenfunction at E (unit L2 norm, phase fixed).

    The phase convention makes psi'(a) real positive; for a flagged singular
    endpoint the role of psi'(a) is played by the (real positive) coefficient
    of the regular t^3 branch, so no extra rotation is applied there.
    """
    cs = characteristic(V, E, rtol=rtol, atol=atol)
    if check and not cs.is_root():
        raise NotAnEigenvalueError(
            f"E = {E} is not an eigenvalue: |D| = {abs(cs.D):.3e} exceeds "
            f"{ROOT_TOL_COEF * (1.0 + abs(cs.Dprime) * abs(E)):.3e}"
        )
    ws = _grid_solution(V, E, rtol, atol)
    norm = ws.l2_norm()
    if norm == 0.0:
        raise NumericsError("eigenfunction: zero norm")
    phase = 1.0 + 0j
    if V.singular_left is None:
        dp = ws.derivs[0]
        if dp != 0:
            phase = abs(dp) / dp
    out = ws.scaled(phase / norm)
    out.label = f"eigenfunction(E={E})"
    return out


def _grid_solution(V, E, rtol, atol, order: int = 0):
    """IVP solution (chain of given order) sampled on the full grid."""
    E = complex(E)
    start, y0 = _start_data(V, E, order)
    iv = V.interval
    nodes = iv.nodes
    if V.singular_left is None:
        grid = nodes
        skip = 0
    else:
        skip = int(np.searchsorted(nodes, start, side="left"))
        grid = nodes[skip:]
    res = K.solve_chain(V.kernel, E, order + 1, y0, start, iv.b, rtol, atol,
                        grid=grid, want_dense=True)
    _raise_on_status(res, f"grid solution at E={E}")
    members = []
    for j in range(order + 1):
        vals = np.zeros(iv.n_nodes, dtype=complex)
        ders = np.zeros(iv.n_nodes, dtype=complex)
        vals[skip:] = res.values[2 * j]
        ders[skip:] = res.values[2 * j + 1]
        ws = WaveSolution(E, iv, vals, ders, None, V)
        members.append(ws)
    from .integrate import _component_view

    for j, ws in enumerate(members):
        ws.dense = _component_view(res.dense, 2 * j)
    return members[0] if order == 0 else members


def interior_node_count(ws: WaveSolution) -> int:
    """Sign changes of Re(psi) strictly inside the interval."""
    v = ws.values.real[1:-1]
    s = np.sign(v)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


# ---------------------------------------------------------------------------
# real spectrum by scan + bracket refinement
# ---------------------------------------------------------------------------


def find_real_spectrum(
    V: PotentialSpec,
    e_min: float,
    e_max: float,
    scan_step: float = SCAN_STEP_DEFAULT,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    with_eigenfunctions: bool = True,
) -> SpectrumReport:
    """Scan [e_min, e_max] for real Dirichlet eigenvalues of a real potential."""
    report = SpectrumReport(meta={
        "window": (e_min, e_max), "scan_step": scan_step, "rtol": rtol, "atol": atol,
    })
    if e_min >= e_max:
        return report
    if not V.is_real(1e-12):
        raise NumericsError("find_real_spectrum: potential is not real-valued")

    n_scan = max(2, int(math.ceil((e_max - e_min) / scan_step)) + 1)
    es = np.linspace(e_min, e_max, n_scan)
    samples = [characteristic(V, float(e), rtol, atol) for e in es]
    for cs in samples:
        if abs(cs.D.imag) > 1e-6 * (1.0 + abs(cs.D)):
            raise NumericsError("find_real_spectrum: characteristic function not real")

    roots: list[float] = []
    for i in range(n_scan - 1):
        d0, d1 = samples[i].D.real, samples[i + 1].D.real
        if d0 == 0.0:
            if not roots or abs(es[i] - roots[-1]) > 1e-9:
                roots.append(float(es[i]))
            continue
        if d0 * d1 < 0.0:
            roots.append(_refine_real_root(V, float(es[i]), float(es[i + 1]),
                                           d0, rtol, atol))
    if samples[-1].D.real == 0.0:
        roots.append(float(es[-1]))

    levels = []
    for r in roots:
        cs = characteristic(V, r, rtol, atol)
        ef = eigenfunction(V, r, rtol, atol, check=False) if with_eigenfunctions else None
        nodes = interior_node_count(ef) if ef is not None else None
        levels.append(SpectrumLevel(complex(r), 1, 1, ef, abs(cs.D), nodes))
    report.levels = levels
    report.sort()

    counts = [lv.n_interior_nodes for lv in report.levels]
    if counts and all(c is not None for c in counts):
        # Sturm oscillation check: the zero count of the shooting solution at
        # e_min is the number of levels below the window, hence the expected
        # index of the first root; consecutive roots must step the count by 1
        base = interior_node_count(_grid_solution(V, e_min, rtol, atol))
        gaps = [c1 - c0 for c0, c1 in zip([base - 1] + counts[:-1], counts)]
        if any(g != 1 for g in gaps):
            warnings.warn(
                "scan step too coarse: eigenfunction node counts "
                f"{counts} (expected to start at {base} and step by 1); "
                "roots have probably been missed",
                ScanWarning,
            )
    return report


def _refine_real_root(V, lo, hi, flo, rtol, atol) -> float:
    """Bracketed refinement to |dE| < 1e-11: Newton when it stays inside,
    bisection otherwise."""
    x = 0.5 * (lo + hi)
    for _ in range(200):
        cs = characteristic(V, x, rtol, atol)
        f = cs.D.real
        if f == 0.0:
            return x
        if f * flo < 0.0:
            hi = x
        else:
            lo, flo = x, f
        if hi - lo < REFINE_TOL:
            return 0.5 * (lo + hi)
        step_ok = False
        fp = cs.Dprime.real
        if fp != 0.0:
            xn = x - f / fp
            if lo + 0.05 * (hi - lo) < xn < hi - 0.05 * (hi - lo):
                x, step_ok = xn, True
        if not step_ok:
            x = 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# winding numbers and the complex spectrum
# ---------------------------------------------------------------------------


def _winding_of_path(V, path, rtol, atol):
    """Winding of D along a closed piecewise-linear path in the E plane.

    The integer count comes from phase unwrapping (refined until adjacent
    phase jumps are below pi/2, which makes the unwrap unambiguous); the
    trapezoid quadrature of D'/D is refined where its local increments are
    largest until it lands within 0.05 of that integer, as a cross-check.
    Returns (integer, trapezoid value, samples).
    """
    pts = list(path)
    vals = [characteristic(V, e, rtol, atol) for e in pts]

    def _refine_phase():
        i = 0
        while i < len(pts) - 1:
            d0, d1 = vals[i].D, vals[i + 1].D
            if d0 == 0 or d1 == 0:
                raise RootOnContourError("characteristic function vanishes on contour")
            dphi = abs(cmath.phase(d1 / d0))
            if dphi >= 0.5 * math.pi and abs(pts[i + 1] - pts[i]) > 1e-13:
                mid = 0.5 * (pts[i] + pts[i + 1])
                pts.insert(i + 1, mid)
                vals.insert(i + 1, characteristic(V, mid, rtol, atol))
            else:
                i += 1
            if len(pts) > _MAX_CONTOUR_SAMPLES:
                raise AmbiguousWindingError("ambiguous winding: contour refinement stalled")

    def _totals():
        total = 0.0
        trap = 0j
        for i in range(len(pts) - 1):
            total += cmath.phase(vals[i + 1].D / vals[i].D)
            f0 = vals[i].Dprime / vals[i].D
            f1 = vals[i + 1].Dprime / vals[i + 1].D
            trap += 0.5 * (f0 + f1) * (pts[i + 1] - pts[i])
        return total, (trap / (2j * math.pi)).real

    _refine_phase()
    total, trap_w = _totals()
    n = int(round(total / (2.0 * math.pi)))
    while abs(trap_w - n) > _WINDING_INT_TOL:
        if len(pts) > _MAX_CONTOUR_SAMPLES:
            raise AmbiguousWindingError(
                f"ambiguous winding: phase-unwrap gives {n}, trapezoid stalls at {trap_w:.4f}"
            )
        # bisect the segments with the largest first-order trapezoid variation
        var = []
        for i in range(len(pts) - 1):
            f0 = vals[i].Dprime / vals[i].D
            f1 = vals[i + 1].Dprime / vals[i + 1].D
            var.append((abs(f1 - f0) * abs(pts[i + 1] - pts[i]), i))
        var.sort(reverse=True)
        worst = sorted((i for _, i in var[: max(4, len(var) // 8)]), reverse=True)
        for i in worst:
            mid = 0.5 * (pts[i] + pts[i + 1])
            pts.insert(i + 1, mid)
            vals.insert(i + 1, characteristic(V, mid, rtol, atol))
        _refine_phase()
        total, trap_w = _totals()
        n = int(round(total / (2.0 * math.pi)))
    return n, trap_w, vals


def _rect_contour(re0, re1, im0, im1, per_edge=8):
    pts = []
    corners = [complex(re0, im0), complex(re1, im0), complex(re1, im1), complex(re0, im1)]
    for c0, c1 in zip(corners, corners[1:] + corners[:1]):
        for k in range(per_edge):
            pts.append(c0 + (c1 - c0) * k / per_edge)
    pts.append(corners[0])
    return pts


def _contour_guard(vals):
    mags = [abs(v.D) for v in vals]
    return min(mags) > 1e-10 * max(mags)


def root_multiplicity(
    V: PotentialSpec,
    E0: complex,
    radius: float | None = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> int:
    """Zero count of D (with multiplicity) inside the circle |E - E0| = radius.

    Uses the theta-parametrized trapezoid of (1/2pi i) oint D'/D dE, which is
    exact for the pole contribution of a root at the center and geometrically
    convergent otherwise, cross-checked against phase unwrapping.
    """
    E0 = complex(E0)
    if radius is None:
        radius = 1e-3 * max(1.0, abs(E0))
    last_err = None
    for attempt in range(5):
        r = radius * (1.0 + 0.23 * attempt)
        try:
            return _winding_circle(V, E0, r, rtol, atol)
        except (RootOnContourError, AmbiguousWindingError) as err:
            last_err = err
    raise RootOnContourError(
        f"root on contour around E0 = {E0} after 5 perturbations: {last_err}"
    )


def _winding_circle(V, center, radius, rtol, atol, n_start=32):
    n = n_start
    while True:
        theta = [2.0 * math.pi * k / n for k in range(n)]
        es = [center + radius * cmath.exp(1j * t) for t in theta]
        vals = [characteristic(V, e, rtol, atol) for e in es]
        if not _contour_guard(vals):
            raise RootOnContourError("characteristic nearly vanishes on circle")
        total = 0.0
        trap = 0j
        ok_phase = True
        for k in range(n):
            k1 = (k + 1) % n
            dphi = cmath.phase(vals[k1].D / vals[k].D)
            if abs(dphi) >= 0.5 * math.pi:
                ok_phase = False
                break
            total += dphi
            # dE = i r e^{i theta} dtheta; uniform-theta periodic trapezoid
            trap += (vals[k].Dprime / vals[k].D) * 1j * (es[k] - center)
        if ok_phase:
            trap_w = (trap * (2.0 * math.pi / n) / (2j * math.pi)).real
            m = int(round(total / (2.0 * math.pi)))
            if abs(trap_w - m) <= _WINDING_INT_TOL:
                return m
        n *= 2
        if n > 4096:
            raise AmbiguousWindingError(
                "ambiguous winding: circle quadrature refinement stalled"
            )


def _polish_simple(V, E, rtol, atol, max_iter=60):
    for _ in range(max_iter):
        cs = characteristic(V, E, rtol, atol)
        if cs.Dprime == 0:
            break
        step = cs.D / cs.Dprime
        E = E - step
        if abs(step) < 1e-13 * max(1.0, abs(E)):
            break
    return E


def _polish_multiple(V, E, m, rtol, atol, max_iter=60):
    """Newton on the (m-1)-th derivative of D, which has a simple zero."""
    for _ in range(max_iter):
        d = characteristic_derivatives(V, E, order=min(3, m), rtol=rtol, atol=atol)
        g = d[m - 1]
        gp = m * d[m] if m < len(d) else None
        if gp is None or gp == 0:
            break
        step = g / gp
        E = E - step
        if abs(step) < 1e-13 * max(1.0, abs(E)):
            break
    return E


def find_complex_spectrum(
    V: PotentialSpec,
    region: tuple[float, float, float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    with_eigenfunctions: bool = True,
) -> SpectrumReport:
    """All roots of D (with multiplicities) in a rectangle of the E plane.

    Counts by the argument principle, subdivides cells until each holds a
    single (possibly multiple) root, polishes by Newton on D or on the
    appropriate derivative, and confirms each multiplicity with a small
    enclosing circle.
    """
    re0, re1, im0, im1 = map(float, region)
    report = SpectrumReport(meta={"region": region, "rtol": rtol, "atol": atol})

    def cell_winding(c):
        a0, a1, b0, b1 = c
        pts = _rect_contour(a0, a1, b0, b1)
        n, _, vals = _winding_of_path(V, pts, rtol, atol)
        if not _contour_guard(vals):
            raise RootOnContourError("characteristic nearly vanishes on cell boundary")
        return n

    def outer_winding(c):
        last = None
        cc = c
        for attempt in range(5):
            try:
                return cc, cell_winding(cc)
            except (RootOnContourError, AmbiguousWindingError) as err:
                last = err
                g = 0.0137 * (attempt + 1) * max(cc[1] - cc[0], cc[3] - cc[2])
                cc = (cc[0] - g, cc[1] + g, cc[2] - g, cc[3] + g)
        raise RootOnContourError(f"root on region boundary after 5 retries: {last}")

    region0, n_total = outer_winding((re0, re1, im0, im1))
    found: list[tuple[complex, int]] = []
    if n_total == 0:
        return report

    def split_and_count(cell, m):
        """Split the cell on a root-free line and return both halves counted.

        A line through (or numerically near) a root reveals itself when the
        child boundary walk fails; alternative cut fractions are then tried.
        """
        a0, a1, b0, b1 = cell
        horizontal = (a1 - a0) >= (b1 - b0)
        last = None
        for frac in (0.5, 0.43, 0.57, 0.36, 0.64, 0.29, 0.71):
            cut = a0 + frac * (a1 - a0) if horizontal else b0 + frac * (b1 - b0)
            seg = (
                [complex(cut, b0 + (b1 - b0) * k / 8) for k in range(9)]
                if horizontal
                else [complex(a0 + (a1 - a0) * k / 8, cut) for k in range(9)]
            )
            vals = [characteristic(V, e, rtol, atol) for e in seg]
            if not _contour_guard(vals):
                continue
            if horizontal:
                c1, c2 = (a0, cut, b0, b1), (cut, a1, b0, b1)
            else:
                c1, c2 = (a0, a1, b0, cut), (a0, a1, cut, b1)
            try:
                w1 = cell_winding(c1)
            except (RootOnContourError, AmbiguousWindingError) as err:
                last = err
                continue
            return c1, w1, c2, m - w1
        raise RootOnContourError(
            f"could not place a root-free subdivision line in cell {cell}: {last}"
        )

    def try_polish(cell, m):
        a0, a1, b0, b1 = cell
        center = complex(0.5 * (a0 + a1), 0.5 * (b0 + b1))
        E = _polish_simple(V, center, rtol, atol) if m == 1 else _polish_multiple(
            V, center, min(m, 3), rtol, atol)
        pad = 1e-9 + 1e-9 * abs(E)
        if not (a0 - pad <= E.real <= a1 + pad and b0 - pad <= E.imag <= b1 + pad):
            return None
        cs = characteristic(V, E, rtol, atol)
        if not cs.is_root():
            return None
        try:
            mc = root_multiplicity(V, E, rtol=rtol, atol=atol)
        except (RootOnContourError, AmbiguousWindingError):
            return None
        if mc != m:
            return None
        return E

    stack = [(region0, n_total)]
    while stack:
        cell, m = stack.pop()
        if m == 0:
            continue
        if m <= 3:
            E = try_polish(cell, m)
            if E is not None:
                found.append((E, m))
                continue
        diag = math.hypot(cell[1] - cell[0], cell[3] - cell[2])
        if diag < 1e-6:
            raise NumericsError(
                f"complex spectrum: could not resolve winding-{m} cell near {cell}"
            )
        c1, w1, c2, w2 = split_and_count(cell, m)
        stack.append((c1, w1))
        stack.append((c2, w2))

    merged: list[tuple[complex, int]] = []
    for E, m in sorted(found, key=lambda t: (t[0].real, t[0].imag)):
        if merged and abs(E - merged[-1][0]) < 1e-8 * max(1.0, abs(E)):
            merged[-1] = (merged[-1][0], merged[-1][1] + m)
        else:
            merged.append((E, m))
    if sum(m for _, m in merged) != n_total:
        raise NumericsError(
            f"complex spectrum: found multiplicities {merged} do not add up to the "
            f"total region winding {n_total}"
        )

    for E, m in merged:
        cs = characteristic(V, E, rtol, atol)
        ef = None
        if with_eigenfunctions:
            ef = eigenfunction(V, E, rtol, atol, check=False)
        report.levels.append(SpectrumLevel(E, m, 1, ef, abs(cs.D)))
    return report.sort()
