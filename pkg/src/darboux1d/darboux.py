"""Second-order Darboux transformation engine.

Builds transformation-function pairs (u1, u2) at factorization energies
(alpha1, alpha2), derives the partner potential

    V_out = V_in - 2 [log W(u1, u2)]''

without any numerical differentiation (all second derivatives are eliminated
through the equation, and W is carried as its own integration component), maps
solutions through the intertwiner in its first-derivative-only form, and
verifies the intertwining relation by honest finite-difference residuals.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernel import backend as K
from .errors import (
    DegenerateCaseError,
    NumericsError,
    WronskianZeroError,
)
from .integrate import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    WaveSolution,
    _fd1,
    _raise_on_status,
    integrate,
    wronskian2,
)
from .potentials import (
    DarbouxDerivedPotential,
    EndpointSingularity,
    PotentialSpec,
)
from .residuals import apply_h_minus_e, interior_mask
from .spectral import characteristic, eigenfunction, find_real_spectrum

W_ATOL = 1e-16            # absolute tolerance of the Wronskian carrier component
SING_DETECT_TOL = 1e-10   # |u(a)| below this times max|u| flags an endpoint zero
ALPHA_MATCH_TOL = 1e-6
T_SWITCH_DEFAULT = 0.12   # endpoint-series window of derived singular potentials


# ---------------------------------------------------------------------------
# transformation-function recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenfunctionRecipe:
    """Normalized eigenfunction, selected by 1-based level index or by energy."""

    index: int | None = None
    energy: complex | None = None

    def __post_init__(self):
        if (self.index is None) == (self.energy is None):
            raise ValueError("give exactly one of index / energy")


@dataclass(frozen=True)
class CombinationRecipe:
    """u = psi_l + i c q where q is the second solution with q(a)=1, q'(a)=0.

    psi_l is the normalized eigenfunction at the level selected like in
    EigenfunctionRecipe; q is real for real potentials, which makes u the
    complex combination that produces genuinely complex partner potentials.
    """

    c: complex
    index: int | None = None
    energy: complex | None = None

    def __post_init__(self):
        if (self.index is None) == (self.energy is None):
            raise ValueError("give exactly one of index / energy")


@dataclass(frozen=True)
class ExplicitRecipe:
    """Solution fixed by initial data (value, derivative) at x = a."""

    value: complex
    derivative: complex


@dataclass(frozen=True)
class TransformationSpec:
    alpha1: complex
    u1_recipe: object
    alpha2: complex
    u2_recipe: object

    def __post_init__(self):
        if abs(complex(self.alpha1) - complex(self.alpha2)) < 1e-12:
            raise ValueError("alpha1 and alpha2 must differ (no confluent transforms)")


@dataclass
class DarbouxResult:
    """One validated transformation step."""

    potential: DarbouxDerivedPotential
    u1: WaveSolution
    u2: WaveSolution
    wronskian: np.ndarray
    w_dense: object
    nodeless: bool
    spec: TransformationSpec | None = None
    meta: dict = field(default_factory=dict)

    @property
    def alpha1(self):
        return self.u1.energy

    @property
    def alpha2(self):
        return self.u2.energy

    @property
    def parent(self):
        return self.potential.parent


def _locate_level(V, index, energy, rtol, atol):
    """Refined eigenvalue by index (real scan) or by polishing a guess.

    A guess already sitting on a multiple root makes Newton on D a ratio of
    noise terms, so the multiplicity is probed first and the polish runs on
    the appropriate derivative."""
    if index is not None:
        e_max = 4.0
        for _ in range(8):
            rep = find_real_spectrum(V, min(0.0, -0.5), e_max, rtol=rtol, atol=atol,
                                     with_eigenfunctions=False)
            if len(rep.levels) >= index:
                return rep.levels[index - 1].E
            e_max *= 2.0
        raise NumericsError(f"eigenfunction recipe: fewer than {index} levels found")
    from .spectral import _polish_multiple, _polish_simple, root_multiplicity

    E = complex(energy)
    cs = characteristic(V, E, rtol, atol)
    if cs.is_root():
        try:
            m = root_multiplicity(V, E, rtol=rtol, atol=atol)
        except NumericsError:
            m = 1
        if m >= 2:
            return _polish_multiple(V, E, min(m, 3), rtol, atol)
    return _polish_simple(V, E, rtol, atol)


def build_transformation_function(
    V: PotentialSpec,
    alpha: complex,
    recipe,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> WaveSolution:
    """Materialize a transformation function at factorization energy alpha."""
    if isinstance(recipe, ExplicitRecipe):
        u = integrate(V, complex(alpha), recipe.value, recipe.derivative,
                      rtol=rtol, atol=atol)
        u.label = "explicit"
        return u

    if isinstance(recipe, (EigenfunctionRecipe, CombinationRecipe)):
        E = _locate_level(V, recipe.index, recipe.energy, rtol, atol)
        if abs(E - complex(alpha)) > ALPHA_MATCH_TOL * (1.0 + abs(E)):
            raise NumericsError(
                f"alpha mismatch: recipe selects E = {E}, but alpha = {alpha}"
            )
        base = eigenfunction(V, E, rtol=rtol, atol=atol)
        if isinstance(recipe, EigenfunctionRecipe):
            return base
        c = complex(recipe.c)
        if c == 0:
            return base
        # base + i c q solves the same equation; one IVP with combined data
        # (base(a) = 0 exactly, q(a) = 1, q'(a) = 0)
        u = integrate(V, E, 1j * c, base.derivs[0], rtol=rtol, atol=atol)
        u.label = f"combination(c={recipe.c})"
        return u

    raise TypeError(f"unknown recipe type {type(recipe).__name__}")


# ---------------------------------------------------------------------------
# the transformation itself
# ---------------------------------------------------------------------------


def _endpoint_series(parent: PotentialSpec, x0: float, alpha1, alpha2):
    """(v0, v2) of V_out = 6/t^2 + v0 + v2 t^2 near an endpoint where W ~ t^3.

    Only the parent's value and curvature at the endpoint enter (the linear
    term of the series cancels identically).
    """
    vp = complex(parent.evaluate(x0))
    vp2 = complex(parent.second_derivative(x0))
    v0 = (vp + 2.0 * (alpha1 + alpha2)) / 5.0
    p = (2.0 * vp - alpha1 - alpha2) / 10.0
    a3 = (vp - alpha1) / 6.0
    b3 = (vp - alpha2) / 6.0
    a5 = 0.3 * a3 * a3 + vp2 / 40.0
    b5 = 0.3 * b3 * b3 + vp2 / 40.0
    r = (3.0 / 7.0) * (a5 + b5 + a3 * b3)
    v2 = vp2 / 2.0 - 24.0 * r + 12.0 * p * p
    return v0, v2


def darboux_potential(
    u1: WaveSolution,
    u2: WaveSolution,
    parent: PotentialSpec,
    spec: TransformationSpec | None = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    t_switch: float = T_SWITCH_DEFAULT,
) -> DarbouxResult:
    """Derive the partner potential from a validated pair (u1, u2).

    The Wronskian is carried as an extra integration component w with
    w' = (alpha1 - alpha2) u1 u2 and w(a) from the initial data, which keeps
    it accurate even where the product form u1 u2' - u1' u2 cancels.  A zero
    of W inside (a, b) invalidates the transformation; a zero AT an endpoint
    (both u's vanishing there) is legitimate and produces a potential with a
    6/t^2 endpoint pole, which is flagged, not rejected.
    """
    alpha1, alpha2 = complex(u1.energy), complex(u2.energy)
    if abs(alpha1 - alpha2) < 1e-12:
        raise NumericsError("darboux_potential: alpha1 = alpha2 (confluent case unsupported)")
    if not u1.interval.same_grid(u2.interval):
        raise NumericsError("darboux_potential: u1 and u2 live on different grids")
    if u1.dense is None or u2.dense is None:
        raise NumericsError("darboux_potential: transformation functions need dense output")
    iv = u1.interval

    w_grid = wronskian2(u1, u2)

    # gate: dW/dx must equal (alpha1 - alpha2) u1 u2 (catches wrong-alpha input)
    dw_fd = _fd1(w_grid, iv.h)
    dw_exact = (alpha1 - alpha2) * u1.values * u2.values
    scale = max(float(np.max(np.abs(dw_exact))), 1e-300)
    gate = float(np.max(np.abs(dw_fd[3:-3] - dw_exact[3:-3])) / scale)
    if gate > 1e-5:
        raise NumericsError(
            f"darboux_potential: Wronskian-derivative identity violated "
            f"(relative error {gate:.2e}); are u1, u2 solutions of this potential?"
        )

    w0 = u1.values[0] * u2.derivs[0] - u1.derivs[0] * u2.values[0]
    res = K.solve_quad(
        0, u1.dense, 0, u2.dense, 0, alpha1 - alpha2, iv.a, iv.b,
        rtol, W_ATOL, y0=w0, grid=iv.nodes, want_dense=True,
    )
    _raise_on_status(res, "Wronskian carrier integration")
    w_carried = res.values[0]
    w_dense = res.dense

    # endpoint double zeros of the pair
    s1 = float(np.max(np.abs(u1.values)))
    s2 = float(np.max(np.abs(u2.values)))
    sing_left = sing_right = None
    left_zero = abs(u1.values[0]) < SING_DETECT_TOL * s1 and abs(u2.values[0]) < SING_DETECT_TOL * s2
    right_zero = abs(u1.values[-1]) < SING_DETECT_TOL * s1 and abs(u2.values[-1]) < SING_DETECT_TOL * s2
    if left_zero:
        if parent.singular_left is not None:
            raise NumericsError("nested endpoint singularities are not supported")
        v0, v2 = _endpoint_series(parent, iv.a, alpha1, alpha2)
        sing_left = EndpointSingularity(t_switch, v0, v2)
    if right_zero:
        if parent.singular_right is not None:
            raise NumericsError("nested endpoint singularities are not supported")
        v0, v2 = _endpoint_series(parent, iv.b, alpha1, alpha2)
        sing_right = EndpointSingularity(t_switch, v0, v2)
    if (abs(w_carried[0]) < 1e-12 * float(np.max(np.abs(w_carried)))) and not left_zero:
        raise WronskianZeroError(iv.a, "simple Wronskian zero at the left endpoint")
    if (abs(w_carried[-1]) < 1e-12 * float(np.max(np.abs(w_carried)))) and not right_zero:
        raise WronskianZeroError(iv.b, "simple Wronskian zero at the right endpoint")

    _check_nodeless(w_dense, w_carried, u1.dense, u2.dense, alpha1 - alpha2,
                    iv, sing_left, sing_right, t_switch)

    potential = DarbouxDerivedPotential(
        parent, u1, u2, w_dense, alpha1, alpha2, sing_left, sing_right
    )
    return DarbouxResult(
        potential=potential,
        u1=u1,
        u2=u2,
        wronskian=w_carried,
        w_dense=w_dense,
        nodeless=True,
        spec=spec,
        meta={"w_gate": gate},
    )


def _check_nodeless(w_dense, w_grid, du1, du2, dal, iv, sing_left, sing_right, t_switch):
    """|W| > 0 on the open interval.

    A zero of the complex W between grid nodes is a simultaneous zero of two
    real functions, so grids can miss it.  Every dip of |W| is therefore
    refined by a 64-point resample and then polished by a Newton iteration on
    the real line (using W' = (a1 - a2) u1 u2 from the dense data).  For a
    genuine zero the polished residual collapses to the data noise; for a
    mere near-miss it stalls at |W'| times the distance of the true complex
    zero from the real axis.
    """
    nodes = iv.nodes
    mask = np.ones(len(nodes), dtype=bool)
    if sing_left is not None:
        mask &= nodes - iv.a >= t_switch
    if sing_right is not None:
        mask &= iv.b - nodes >= t_switch
    mask[0] = mask[-1] = False  # endpoint zeros are allowed by construction
    mags = np.abs(w_grid)
    med = float(np.median(mags[mask]))
    if med == 0.0:
        raise WronskianZeroError(float(nodes[len(nodes) // 2]), "Wronskian vanishes identically")

    # clamp all refinement to the region where an interior zero would be a
    # genuine defect (the cubically vanishing endpoint layers are legitimate)
    x_lo = iv.a + t_switch if sing_left is not None else float(nodes[1])
    x_hi = iv.b - t_switch if sing_right is not None else float(nodes[-2])

    def _polish(x):
        for _ in range(50):
            w = w_dense.eval(x, 0)
            wp = dal * du1.eval(x, 0) * du2.eval(x, 0)
            if wp == 0:
                return x, abs(w)
            step = (w / wp).real
            xn = min(max(x - step, x_lo), x_hi)
            if abs(xn - x) < 1e-15 * max(1.0, abs(x)):
                x = xn
                break
            x = xn
        return x, abs(w_dense.eval(x, 0))

    idx = np.nonzero(mask)[0]
    for i in idx:
        if mags[i] < 1e-3 * med:
            lo = max(float(nodes[max(i - 1, 1)]), x_lo)
            hi = min(float(nodes[min(i + 1, len(nodes) - 2)]), x_hi)
            fine = np.linspace(lo, hi, 64)
            fm = np.abs(w_dense.sample(fine, 0))
            x0 = float(fine[int(np.argmin(fm))])
            x_star, residual = _polish(x0)
            if residual < 1e-7 * med and x_lo < x_star < x_hi:
                raise WronskianZeroError(float(x_star))


# ---------------------------------------------------------------------------
# mapping solutions through the intertwiner
# ---------------------------------------------------------------------------


def darboux_map(
    result: DarbouxResult,
    psi: WaveSolution,
    E: complex | None = None,
    source: WaveSolution | None = None,
    allow_factorization_energy: bool = False,
) -> WaveSolution:
    """Map psi through L in the first-derivative-only form.

    For a solution of the parent equation at E (E distinct from both
    factorization energies),

        L psi = [ (W E + a2 u1' u2 - a1 u1 u2') psi + (a1 - a2) u1 u2 psi' ] / W

    and (h_out - E) L psi = 0.  With ``source`` given, psi is treated as a
    member of an inhomogeneous chain, (h_in - E) psi = source, and the image
    L psi = source + [same expression] solves (h_out - E) L psi = L source.
    The derivative of the image is evaluated analytically (second derivatives
    replaced through the equation); no differencing.

    At the factorization energies the generic route is refused (the images of
    the u-directions vanish identically; use darboux_exceptional) unless
    ``allow_factorization_energy`` is set, which is legitimate exactly for
    mapping the Dirichlet solution at a created level.
    """
    E = complex(psi.energy if E is None else E)
    a1, a2 = complex(result.alpha1), complex(result.alpha2)
    if source is None and not allow_factorization_energy:
        for alpha, name in ((a1, "alpha1"), (a2, "alpha2")):
            if abs(E - alpha) < 1e-9 * (1.0 + abs(alpha)):
                raise DegenerateCaseError(
                    f"darboux_map: E coincides with {name}; use darboux_exceptional"
                )
    iv = psi.interval
    if not iv.same_grid(result.potential.interval):
        raise NumericsError("darboux_map: psi on a different grid")

    u1v, u1p = result.u1.values, result.u1.derivs
    u2v, u2p = result.u2.values, result.u2.derivs
    w = result.wronskian
    vp = result.parent.grid_values()

    g0 = a2 * u1p * u2v - a1 * u1v * u2p
    g = w * E + g0
    hh = (a1 - a2) * u1v * u2v           # = W'
    gp = (a1 - a2) * (u1v * u2v * (E - vp) - u1p * u2p)
    hp = (a1 - a2) * (u1p * u2v + u1v * u2p)  # = W''

    with np.errstate(divide="ignore", invalid="ignore"):
        num = g * psi.values + hh * psi.derivs
        phi = num / w
        psi_pp = (vp - E) * psi.values
        if source is not None:
            psi_pp = psi_pp - source.values
        phi_p = (gp * psi.values + (g + hp) * psi.derivs + hh * psi_pp) / w - num * hh / (w * w)

    if source is not None:
        phi = source.values + phi
        phi_p = source.derivs + phi_p

    # at a flagged endpoint the limit of the image of a vanishing function is 0
    if result.potential.singular_left is not None:
        phi[0] = 0.0
        phi_p[0] = 0.0
    if result.potential.singular_right is not None:
        phi[-1] = 0.0
        phi_p[-1] = 0.0

    out = WaveSolution(E, iv, phi, phi_p, None, result.potential,
                       label=f"mapped(E={E})")
    return out


def darboux_exceptional(result: DarbouxResult) -> tuple[WaveSolution, WaveSolution]:
    """The images at the factorization energies: u2/W at alpha1, u1/W at alpha2.

    Derivatives use the quotient rule with W' = (a1 - a2) u1 u2.  At a
    flagged endpoint these solutions genuinely diverge (like t^-2); the
    values there are whatever the arithmetic gives (inf/nan) and are excluded
    from residual checks by the caller's interior mask.
    """
    a1, a2 = complex(result.alpha1), complex(result.alpha2)
    u1v, u1p = result.u1.values, result.u1.derivs
    u2v, u2p = result.u2.values, result.u2.derivs
    w = result.wronskian
    iv = result.u1.interval
    with np.errstate(divide="ignore", invalid="ignore"):
        wp_over_w = (a1 - a2) * u1v * u2v / w
        phi1v = u2v / w
        phi1p = (u2p - u2v * wp_over_w) / w
        phi2v = u1v / w
        phi2p = (u1p - u1v * wp_over_w) / w
    phi1 = WaveSolution(a1, iv, phi1v, phi1p, None, result.potential, label="phi_alpha1")
    phi2 = WaveSolution(a2, iv, phi2v, phi2p, None, result.potential, label="phi_alpha2")
    return phi1, phi2


def exceptional_initial_data(result: DarbouxResult, which: int) -> tuple[complex, complex]:
    """Initial data (value, derivative) at x = a of u2/W (which=1) or u1/W (which=2).

    Useful to rebuild an exceptional solution as a dense-output IVP solution
    of the derived potential.
    """
    a1, a2 = complex(result.alpha1), complex(result.alpha2)
    u1v, u1p = result.u1.values[0], result.u1.derivs[0]
    u2v, u2p = result.u2.values[0], result.u2.derivs[0]
    w0 = result.wronskian[0]
    if w0 == 0:
        raise NumericsError("exceptional data undefined: W(a) = 0")
    wp0 = (a1 - a2) * u1v * u2v
    if which == 1:
        return u2v / w0, (u2p - u2v * wp0 / w0) / w0
    return u1v / w0, (u1p - u1v * wp0 / w0) / w0


# ---------------------------------------------------------------------------
# verification operations
# ---------------------------------------------------------------------------


def second_solution_check(
    V_out: PotentialSpec,
    phi1: WaveSolution,
    tol: float = 1e-6,
    rtol: float = DEFAULT_RTOL,
) -> tuple[bool, dict]:
    """Does the reduction-of-order partner of a nodeless solution vanish at b?

    phi2(x) = phi1(x) * integral_a^x dy / phi1(y)^2 vanishes at a by
    construction; its value at b decides whether phi1's energy is an
    eigenvalue (both boundary solutions vanishing).  Returns (is_eigenvalue,
    details).
    """
    if phi1.dense is None:
        raise NumericsError("second_solution_check: phi1 needs dense output")
    iv = phi1.interval
    mags = np.abs(phi1.values)
    mmax = float(np.max(mags))
    imin = int(np.argmin(mags))
    if mags[imin] < 1e-9 * mmax:
        raise NumericsError(
            f"second_solution_check: node of phi1 at x = {iv.nodes[imin]:.12g}; "
            "the reduction integral diverges"
        )
    res = K.solve_quad(1, phi1.dense, 0, None, 0, 1.0, iv.a, iv.b,
                       rtol, 1e-15, y0=0j, grid=iv.nodes, want_dense=False)
    _raise_on_status(res, "reduction-of-order quadrature")
    phi2 = phi1.values * res.values[0]
    scale = float(np.max(np.abs(phi2)))
    value_b = complex(phi2[-1])
    return bool(abs(value_b) < tol * scale), {
        "phi2_b": value_b,
        "phi2_scale": scale,
        "phi2": phi2,
    }


def verify_intertwining(
    result: DarbouxResult,
    energies,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> dict:
    """Max relative residual of (h_out - E) L psi over two independent psi per E.

    The operator is applied by 4th-order finite differences (the mapped
    functions are checked as bare grid data, independently of the identities
    used to build them).

    Near a flagged endpoint pole the image of a generic solution diverges
    like t^-2, so the finite-difference truncation there grows like h^4/t^8;
    the residual is measured outside a 0.5-wide margin in that case (the
    endpoint layer itself is covered by the series construction and the
    spectral checks of the derived problem).
    """
    V_out = result.potential
    V_in = result.parent
    mask = interior_mask(V_out).copy()
    nodes = V_out.interval.nodes
    if V_out.singular_left is not None:
        mask &= nodes - V_out.interval.a >= 0.5
    if V_out.singular_right is not None:
        mask &= V_out.interval.b - nodes >= 0.5
    per_energy = {}
    worst = 0.0
    for E in energies:
        E = complex(E)
        r_e = 0.0
        for data in ((0.0, 1.0), (1.0, 0.0)):
            psi = integrate(V_in, E, data[0], data[1], rtol=rtol, atol=atol,
                            want_dense=False)
            phi = darboux_map(result, psi)
            applied = apply_h_minus_e(V_out, phi.values, E)
            scale = max(float(np.max(np.abs(phi.values[mask]))), 1e-300)
            r_e = max(r_e, float(np.max(np.abs(applied[mask])) / scale))
        per_energy[E] = r_e
        worst = max(worst, r_e)
    return {"per_energy": per_energy, "max_residual": worst}
