"""Closed-form potentials and end-to-end scenario runners.

The scenarios rebuild the library's flagship constructions from scratch and
check every stage against closed forms and spectral predictions, emitting a
pass/fail table.  They are the integration-level ground truth for the whole
pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .darboux import (
    CombinationRecipe,
    EigenfunctionRecipe,
    ExplicitRecipe,
    build_transformation_function,
    darboux_potential,
    second_solution_check,
    verify_intertwining,
)
from .errors import ConfigError
from .grid import Interval, default_interval
from .integrate import VERIFY_ATOL, VERIFY_RTOL, integrate
from .jordan import background_emergence_check, diagnose_level
from .potentials import (
    BackwardPartnerPotential,
    PotentialSpec,
    TripleChainPotential,
    TrigPTPotential,
    zero_potential,
)
from .residuals import apply_h_minus_e, interior_mask
from .spectral import (
    characteristic,
    characteristic_scale,
    eigenfunction,
    find_complex_spectrum,
    find_real_spectrum,
    root_multiplicity,
)

SCENARIO_IDS = ("forward-B2", "forward-Bgeneric", "backward-V2", "chain-dim3")


@dataclass
class ScenarioCheck:
    name: str
    passed: bool
    observed: str
    required: str
    note: str = ""


@dataclass
class ScenarioReport:
    name: str
    params: dict
    checks: list[ScenarioCheck] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    def add(self, name, passed, observed, required, note=""):
        self.checks.append(ScenarioCheck(name, bool(passed), str(observed), str(required), note))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> str:
        lines = [f"scenario {self.name}  params={self.params}"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            line = f"  [{mark}] {c.name}: observed {c.observed} (required {c.required})"
            if c.note:
                line += f"  -- {c.note}"
            lines.append(line)
        lines.append(f"  => {'ALL PASSED' if self.all_passed else 'FAILURES PRESENT'}")
        return "\n".join(lines)


def _match_levels(found, expected, tol):
    """Greedy 1-1 match of found (E, mult) pairs against expected ones."""
    pool = list(found)
    for e_exp, m_exp in expected:
        hit = None
        for i, (e, m) in enumerate(pool):
            if abs(e - e_exp) <= tol and m == m_exp:
                hit = i
                break
        if hit is None:
            return False
        pool.pop(hit)
    return not pool


def _spectrum_pairs(report):
    return [(lv.E, lv.algebraic_multiplicity) for lv in report.levels]


def _fmt_pairs(pairs):
    return "{" + ", ".join(
        f"{e.real:.8f}{'' if m == 1 else f'(x{m})'}" + (f"{e.imag:+.1e}i" if abs(e.imag) > 1e-10 else "")
        for e, m in pairs
    ) + "}"


# ---------------------------------------------------------------------------
# forward scenarios: zero potential -> complex partner
# ---------------------------------------------------------------------------


def _build_forward(B: float, interval: Interval, rtol, atol):
    V0 = zero_potential(interval)
    u1 = build_transformation_function(V0, 1.0, EigenfunctionRecipe(index=2),
                                       rtol=rtol, atol=atol)
    if abs(B - 2.0) < 1e-12:
        base = build_transformation_function(V0, 4.0, EigenfunctionRecipe(index=4),
                                             rtol=rtol, atol=atol)
        c = float(base.derivs[0].real) / B
        u2 = build_transformation_function(V0, 4.0, CombinationRecipe(c=c, index=4),
                                           rtol=rtol, atol=atol)
    else:
        data = ExplicitRecipe(np.exp(1j * B * np.pi), -1j * B * np.exp(1j * B * np.pi))
        u2 = build_transformation_function(V0, B * B, data, rtol=rtol, atol=atol)
    return V0, darboux_potential(u1, u2, V0, rtol=rtol)


def run_forward_b2(interval: Interval | None = None) -> ScenarioReport:
    """Doubled level: the transform of the zero potential that merges the
    created level with an existing one and loses diagonalizability there."""
    interval = interval or default_interval()
    rep = ScenarioReport("forward-B2", {"A": 1.0, "B": 2.0})
    rtol, atol = VERIFY_RTOL, VERIFY_ATOL

    V0, res = _build_forward(2.0, interval, rtol, atol)
    V1 = res.potential
    closed = TrigPTPotential(1.0, 2.0, interval)
    rep.artifacts.update(result=res, potential=V1, closed_form=closed)

    base = find_real_spectrum(V0, 0.0, 17.0, with_eigenfunctions=False)
    want = [(n * n / 4.0, 1) for n in range(1, 9)]
    ok = _match_levels([(lv.E.real, 1) for lv in base.levels[:8]],
                       want, 1e-9)
    rep.add("base spectrum n^2/4 (8 levels, tol 1e-9)", ok,
            _fmt_pairs(_spectrum_pairs(base)), "{0.25, 1, 2.25, 4, ..., 16}")

    diff = float(np.max(np.abs(V1.grid_values() - closed.grid_values())))
    rep.add("derived potential matches closed form", diff <= 1e-8,
            f"max diff {diff:.2e}", "<= 1e-8")

    xs = interval.nodes
    pt = float(np.max(np.abs(closed.evaluate(-xs) - np.conj(closed.evaluate(xs)))))
    rep.add("PT symmetry of closed form", pt < 1e-10, f"{pt:.2e}", "< 1e-10")

    spec = find_complex_spectrum(closed, (0.1, 7.0, -1.0, 1.0),
                                 with_eigenfunctions=False)
    pairs = _spectrum_pairs(spec)
    ok = _match_levels([(e, m) for e, m in pairs],
                       [(0.25, 1), (2.25, 1), (4.0, 2), (6.25, 1)], 1e-8)
    im_ok = all(abs(e.imag) < 1e-8 for e, _ in pairs)
    rep.add("spectrum {0.25, 2.25, 4(x2), 6.25}, Im < 1e-8", ok and im_ok,
            _fmt_pairs(pairs), "exact set with multiplicity 2 at 4")

    ds = characteristic(closed, 4.0, rtol, atol)
    tol_d = 1e-8 * (1.0 + abs(ds.Dprime) * 4.0)
    rep.add("|D(4)|, |D'(4)| below scale-aware tolerance",
            abs(ds.D) < tol_d and abs(ds.Dprime) < 1e-6,
            f"|D|={abs(ds.D):.2e}, |D'|={abs(ds.Dprime):.2e}", f"|D| < {tol_d:.1e}")

    m4 = root_multiplicity(closed, 4.0, rtol=rtol, atol=atol)
    rep.add("winding multiplicity at 4", m4 == 2, str(m4), "2")

    diag = diagnose_level(closed, 4.0, rtol, atol)
    chi_norm = diag.chain[1].max_norm()
    rep.add("chain residual |(h-4)chi - phi|/|phi|",
            diag.chain_residuals[0] <= 1e-6,
            f"{diag.chain_residuals[0]:.2e}", "<= 1e-6")
    rep.add("nilpotency |(h-4)^2 chi|/|chi|",
            diag.nilpotency_residual <= 1e-5,
            f"{diag.nilpotency_residual:.2e}", "<= 1e-5")
    bmax = max(diag.boundary_residuals[1])
    rep.add("chain boundary values |chi(+-pi)|",
            bmax <= 1e-7 * chi_norm, f"{bmax:.2e}", f"<= {1e-7 * chi_norm:.1e}")
    rep.artifacts["diagnosis"] = diag

    # level removal at alpha1 = 1
    from .darboux import exceptional_initial_data

    v0d, dv0 = exceptional_initial_data(res, 1)
    phi1 = integrate(V1, 1.0, v0d, dv0, rtol=rtol, atol=atol)
    is_ev, det = second_solution_check(V1, phi1)
    cs1 = characteristic(closed, 1.0, rtol, atol)
    scale1 = characteristic_scale(closed, 1.0)
    rep.add("level 1 removed: second solution nonzero at b", not is_ev,
            f"|phi2(b)|/scale = {abs(det['phi2_b']) / det['phi2_scale']:.3f}", "> 1e-6")
    rep.add("level 1 removed: |D(1)| away from zero",
            abs(cs1.D) > 0.01 * scale1,
            f"|D(1)| = {abs(cs1.D):.3f} vs scale {scale1:.3f}", "> 0.01 * local scale")

    it = verify_intertwining(res, [0.7, 3.3, 5 + 0.5j], rtol=rtol, atol=atol)
    rep.add("intertwining residuals at {0.7, 3.3, 5+0.5i}",
            it["max_residual"] < 1e-6, f"max {it['max_residual']:.2e}", "< 1e-6")
    return rep


def run_forward_bgeneric(B: float = 1.3, interval: Interval | None = None) -> ScenarioReport:
    """Generic second factorization energy: diagonalizable partner with the
    created level at B^2."""
    interval = interval or default_interval()
    rep = ScenarioReport("forward-Bgeneric", {"A": 1.0, "B": B})
    rtol, atol = VERIFY_RTOL, VERIFY_ATOL
    if abs(B - round(2 * B) / 2) < 1e-9:
        raise ConfigError("forward-Bgeneric needs B != n/2 (diagonalizable branch)")

    V0, res = _build_forward(B, interval, rtol, atol)
    V1 = res.potential
    closed = TrigPTPotential(1.0, B, interval)
    rep.artifacts.update(result=res, potential=V1, closed_form=closed)

    diff = float(np.max(np.abs(V1.grid_values() - closed.grid_values())))
    rep.add("derived potential matches closed form", diff <= 1e-8,
            f"max diff {diff:.2e}", "<= 1e-8")

    spec = find_complex_spectrum(closed, (0.1, 7.0, -1.0, 1.0),
                                 with_eigenfunctions=False)
    pairs = _spectrum_pairs(spec)
    expected = [(0.25, 1), (B * B, 1), (2.25, 1), (4.0, 1), (6.25, 1)]
    ok = _match_levels(pairs, expected, 1e-8)
    rep.add(f"simple spectrum incl. created level at B^2 = {B * B:.4f}", ok,
            _fmt_pairs(pairs), _fmt_pairs([(complex(e), m) for e, m in expected]))

    all_simple = all(m == 1 for _, m in pairs)
    rep.add("all multiplicities 1", all_simple,
            str([m for _, m in pairs]), "all 1")
    return rep


# ---------------------------------------------------------------------------
# backward scenario: removing the defective level
# ---------------------------------------------------------------------------


def run_backward_v2(kappa: float = 1.2, interval: Interval | None = None) -> ScenarioReport:
    """Second transformation step. u1 is the eigenfunction at the defective
    level, u2 the left-vanishing solution at kappa^2.

    The resulting potential necessarily carries a 6/(x+pi)^2 pole at the left
    endpoint (both transformation functions vanish there), so the spectral
    problem is the limit-point realization started on its regular branch.
    The stated-set spectrum check and the closed-form comparison are emitted
    separately, as is the degenerate kappa = 1 construction.
    """
    interval = interval or default_interval()
    rep = ScenarioReport("backward-V2", {"kappa": kappa})
    rtol, atol = VERIFY_RTOL, VERIFY_ATOL
    if kappa == 1.0:
        return _run_backward_degenerate(interval, rep)
    if not (0.5 <= kappa <= 1.5):
        raise ConfigError(
            f"backward-V2: kappa = {kappa} outside the regularity window [0.5, 1.5]; "
            "the transformation Wronskian acquires interior zeros there"
        )

    V1 = TrigPTPotential(1.0, 2.0, interval)
    u2 = integrate(V1, kappa * kappa, 0.0, 1.0, rtol=rtol, atol=atol)
    em = background_emergence_check(V1, 4.0, u2, rtol=rtol, atol=atol)
    V2 = em["potential"]
    rep.artifacts.update(emergence=em, potential=V2)

    nodes, vals = V2.finite_grid_values()
    im = float(np.max(np.abs(vals.imag)))
    rep.add("derived potential real: max|Im V|", im < 1e-8, f"{im:.2e}", "< 1e-8")

    spec = find_complex_spectrum(V2, (0.05, 7.0, -1.0, 1.0),
                                 rtol=rtol, atol=atol, with_eigenfunctions=False)
    pairs = _spectrum_pairs(spec)
    stated = [(0.25, 1), (kappa * kappa, 1), (2.25, 1), (4.0, 1), (6.25, 1)]
    ok_stated = _match_levels(pairs, stated, 1e-7)
    rep.add(
        "spectrum over [0,7] equals stated set incl. kappa^2",
        ok_stated,
        _fmt_pairs(pairs),
        _fmt_pairs([(complex(e), m) for e, m in stated]),
        note=(
            "the left-endpoint pole makes the problem limit-point there; the "
            "candidate solution at kappa^2 behaves like (x+pi)^-2 and is not "
            "an eigenfunction, so the created level is absent"
        ) if not ok_stated else "",
    )
    limit_point = [(0.25, 1), (2.25, 1), (4.0, 1), (6.25, 1)]
    rep.add(
        "spectrum equals limit-point prediction (kappa^2 absent)",
        _match_levels(pairs, limit_point, 1e-7),
        _fmt_pairs(pairs), _fmt_pairs([(complex(e), m) for e, m in limit_point]),
    )

    rep.add("multiplicity at 4 drops 2 -> 1",
            em["multiplicity_before"] == 2 and em["multiplicity_after"] == 1,
            f"{em['multiplicity_before']} -> {em['multiplicity_after']}", "2 -> 1")
    rep.add("level 4 still present", em["still_root"],
            f"|D2(4)| = {em['abs_D2']:.2e}", "root of D2")
    rep.add("image of associated function is the new eigenfunction",
            em["emerged_residual"] < 1e-6,
            f"collinearity residual {em['emerged_residual']:.2e} "
            f"(FD residual {em['emerged_residual_fd']:.2e})", "< 1e-6")

    closed = BackwardPartnerPotential(kappa, interval)
    cv = closed.grid_values()
    pv = V2.grid_values()
    sel = np.isfinite(cv) & np.isfinite(pv)
    scaled = float(np.max(np.abs(pv[sel] - cv[sel]) / (1.0 + np.abs(cv[sel]))))
    rep.add("closed-form match (reported separately, scale-aware)",
            scaled <= 1e-7, f"max scaled diff {scaled:.2e}", "<= 1e-7")
    rep.artifacts["closed_form"] = closed
    return rep


def _run_backward_degenerate(interval, rep):
    """kappa = 1: the mapped left-vanishing solution vanishes identically;
    the exceptional solution at the first step's factorization energy is used
    instead, and the second step undoes the first (zero potential back)."""
    rtol, atol = VERIFY_RTOL, VERIFY_ATOL
    V1 = TrigPTPotential(1.0, 2.0, interval)
    phi4 = eigenfunction(V1, _refine_double_root(V1, 4.0, rtol, atol),
                         rtol=rtol, atol=atol, check=False)
    u2 = integrate(V1, 1.0, 1.0, -2j, rtol=rtol, atol=atol)
    res = darboux_potential(phi4, u2, V1, rtol=rtol)
    vmax = float(np.max(np.abs(res.potential.grid_values())))
    rep.add("degenerate route: derived potential is zero", vmax < 1e-6,
            f"max|V| = {vmax:.2e}", "< 1e-6 (transform undone)")
    rep.artifacts["potential"] = res.potential
    return rep


def _refine_double_root(V, E, rtol, atol):
    from .spectral import _polish_multiple

    return _polish_multiple(V, complex(E), 2, rtol, atol)


def probe_degenerate_limit(delta: float = 1e-4, interval: Interval | None = None) -> dict:
    """max|V| of the backward closed form at kappa = 1 +- delta.

    The closed-form family does NOT tend to zero pointwise as kappa -> 1 (its
    limit is the confluent transform built on sin x and its energy
    derivative); only the alternative kappa = 1 construction gives zero.  The
    probe reports the actual grid maxima.
    """
    interval = interval or default_interval()
    out = {}
    for kappa in (1.0 - delta, 1.0 + delta):
        V = BackwardPartnerPotential(kappa, interval)
        _, vals = V.finite_grid_values()
        out[kappa] = float(np.max(np.abs(vals)))
    return out


# ---------------------------------------------------------------------------
# dimension-3 scenario: enlarging the root subspace
# ---------------------------------------------------------------------------


def dim3_u2_closed_form(x):
    """Second transformation function of the dimension-3 step."""
    x = np.asarray(x, dtype=float)
    return (9.0 - np.exp(-2j * x)) / (1.0 - 3.0 * np.exp(2j * x))


def _dim3_u2_derivative(x):
    x = np.asarray(x, dtype=float)
    num = 2j * np.exp(-2j * x) + 54j * np.exp(2j * x) - 12j
    return num / (1.0 - 3.0 * np.exp(2j * x)) ** 2


def fit_solution_energy(V: PotentialSpec, values: np.ndarray) -> tuple[complex, float]:
    """Least-squares energy E with (h - E) u = 0 plus the residual after the fit.

    Rayleigh quotient with h applied by finite differences; used to verify
    closed-form transformation functions whose energy is not given."""
    hu = apply_h_minus_e(V, values, 0.0)
    m = interior_mask(V)
    num = np.sum(np.conj(values[m]) * hu[m])
    den = np.sum(np.abs(values[m]) ** 2)
    E = complex(num / den)
    res = float(np.max(np.abs(hu[m] - E * values[m])) / np.max(np.abs(values[m])))
    return E, res


def run_chain_dim3(interval: Interval | None = None) -> ScenarioReport:
    """Grow the root subspace at the defective level from dimension 2 to 3."""
    interval = interval or default_interval()
    rep = ScenarioReport("chain-dim3", {})
    rtol, atol = VERIFY_RTOL, VERIFY_ATOL

    V1 = TrigPTPotential(1.0, 2.0, interval)
    closed = TripleChainPotential(interval)
    rep.artifacts["closed_form"] = closed

    # the closed-form u2 of this step comes without a stated energy: verify it
    # solves the intermediate problem and report the fitted energy
    u2_vals = dim3_u2_closed_form(interval.nodes)
    e_fit, res_fit = fit_solution_energy(V1, u2_vals)
    rep.add("u2 closed form solves the intermediate problem",
            res_fit < 1e-5, f"fitted E = {e_fit:.8f}, residual {res_fit:.2e}",
            "residual < 1e-5; fitted E reported, not assumed")

    e_star = _refine_double_root(V1, 4.0, rtol, atol)
    rep.add("fitted energy agrees with the defective level",
            abs(e_fit - e_star) < 1e-5,
            f"|E_fit - E*| = {abs(e_fit - e_star):.2e}", "< 1e-5")

    u1 = eigenfunction(V1, 0.25, rtol=rtol, atol=atol, check=False)
    a = interval.a
    u2 = integrate(V1, e_star, complex(dim3_u2_closed_form(a)),
                   complex(_dim3_u2_derivative(a)), rtol=rtol, atol=atol)
    udiff = float(np.max(np.abs(u2.values - u2_vals)))
    rep.add("u2 rebuilt from initial data matches closed form",
            udiff < 1e-7, f"max diff {udiff:.2e}", "< 1e-7")

    res3 = darboux_potential(u1, u2, V1, rtol=rtol)
    V2 = res3.potential
    rep.artifacts.update(result=res3, potential=V2)

    diff = float(np.max(np.abs(V2.grid_values() - closed.grid_values())))
    rep.add("derived potential matches closed form", diff <= 1e-7,
            f"max diff {diff:.2e}", "<= 1e-7")

    xs = interval.nodes
    pt = float(np.max(np.abs(closed.evaluate(-xs) - np.conj(closed.evaluate(xs)))))
    rep.add("PT symmetry of closed form", pt < 1e-10, f"{pt:.2e}", "< 1e-10")

    spec = find_complex_spectrum(closed, (0.1, 10.0, -1.0, 1.0),
                                 with_eigenfunctions=False)
    pairs = _spectrum_pairs(spec)
    ok = _match_levels(pairs, [(2.25, 1), (4.0, 3), (6.25, 1), (9.0, 1)], 1e-7)
    rep.add("spectrum {2.25, 4(x3), 6.25, 9}", ok, _fmt_pairs(pairs),
            "winding multiplicity 3 at 4")

    for e_absent in (0.25, 1.0):
        cs = characteristic(closed, e_absent)
        rep.add(f"E = {e_absent} not a root", abs(cs.D) > 0.01,
                f"|D| = {abs(cs.D):.3f}", "> 0.01")

    diag = diagnose_level(closed, 4.0, rtol, atol)
    rep.artifacts["diagnosis"] = diag
    rep.add("chain length at 4", diag.algebraic_multiplicity == 3,
            str(diag.algebraic_multiplicity), "3")
    rep.add("chain residuals", max(diag.chain_residuals) <= 1e-6,
            "[" + ", ".join(f"{r:.2e}" for r in diag.chain_residuals) + "]", "<= 1e-6")
    bmax = max(max(b) for b in diag.boundary_residuals)
    scale = max(w.max_norm() for w in diag.chain)
    rep.add("chain boundary values", bmax <= 1e-7 * scale,
            f"{bmax:.2e}", f"<= {1e-7 * scale:.1e}")
    return rep


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def reproduce_scenario(name: str, interval: Interval | None = None, **params) -> ScenarioReport:
    """Run one named scenario and return its pass/fail report."""
    if name == "forward-B2":
        return run_forward_b2(interval)
    if name == "forward-Bgeneric":
        return run_forward_bgeneric(float(params.get("B", 1.3)), interval)
    if name == "backward-V2":
        return run_backward_v2(float(params.get("kappa", 1.2)), interval)
    if name == "chain-dim3":
        return run_chain_dim3(interval)
    raise ConfigError(
        f"unknown scenario {name!r}; valid ids: {', '.join(SCENARIO_IDS)}"
    )
