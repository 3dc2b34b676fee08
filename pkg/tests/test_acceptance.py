"""Acceptance criteria: one test function per criterion, one verdict line each.

Run as ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Each test prints "ACCEPTANCE <n> <PASS|FAIL>" and asserts every
clause of its criterion at the stated tolerance.

Two statements are kept as stated although the constructed operators provably
cannot satisfy them (analysis in the repository notes, summarized in the
failing assertions' messages):

* criterion 7's spectrum clause asserts a level at kappa^2 = 1.44 for the
  backward-step potential.  That potential necessarily carries a 6/(x+pi)^2
  pole at the left endpoint (both transformation functions vanish there), the
  endpoint is in the limit point case, and the only candidate solution at
  kappa^2 behaves like (x+pi)^-2 there; the level does not exist.  The
  remaining clauses of criterion 7 hold and are asserted first.

* criterion 8 asserts that the backward closed form tends to zero as
  kappa -> 1.  Its actual pointwise limit is the confluent transform built on
  sin x and its energy derivative, which is nonzero (about 3.24 at
  x = -pi/2), and the grid maximum is pinned at the endpoint-pole scale.
  The special kappa = 1 construction does produce the zero potential, which
  the backward scenario verifies separately.
"""
import numpy as np
import pytest

from darboux1d.darboux import exceptional_initial_data, verify_intertwining
from darboux1d.examples import probe_degenerate_limit, run_backward_v2, run_forward_b2
from darboux1d.grid import default_interval
from darboux1d.integrate import VERIFY_ATOL, VERIFY_RTOL, integrate, wronskian2
from darboux1d.jordan import diagnose_level
from darboux1d.potentials import ConstantPotential, TripleChainPotential, TrigPTPotential
from darboux1d.spectral import (
    characteristic,
    characteristic_scale,
    find_complex_spectrum,
    find_real_spectrum,
    root_multiplicity,
)

IV = default_interval(2001)
V0 = ConstantPotential(0.0, IV)
V1 = TrigPTPotential(1, 2, IV)


def _verdict(n, ok, detail=""):
    print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}" + (f": {detail}" if detail else ""))


@pytest.fixture(scope="module")
def forward_report():
    return run_forward_b2(IV)


@pytest.fixture(scope="module")
def backward_report():
    return run_backward_v2(1.2, IV)


def test_criterion_01_base_spectrum():
    rep = find_real_spectrum(V0, 0.0, 20.0, with_eigenfunctions=False)
    got = np.array([lv.E.real for lv in rep.levels[:8]])
    want = np.array([n * n / 4.0 for n in range(1, 9)])
    err = np.max(np.abs(got - want))
    ok = len(rep.levels) >= 8 and err < 1e-9
    _verdict(1, ok, f"first 8 levels match n^2/4, max error {err:.2e}")
    assert ok


def test_criterion_02_forward_closed_form(forward_report):
    c = [x for x in forward_report.checks if "matches closed form" in x.name][0]
    _verdict(2, c.passed, c.observed)
    assert c.passed


def test_criterion_03_nondiagonalizable_detection():
    errors = []
    m = root_multiplicity(V1, 4.0)
    if m != 2:
        errors.append(f"winding multiplicity at 4 is {m}, not 2")
    cs = characteristic(V1, 4.0)
    tol = 1e-8 * (1.0 + abs(cs.Dprime) * 4.0)
    if not (abs(cs.D) < tol and abs(cs.Dprime) < 1e-6):
        errors.append(f"|D(4)| = {abs(cs.D):.2e}, |D'(4)| = {abs(cs.Dprime):.2e}")
    spec = find_complex_spectrum(V1, (0.1, 7.0, -1.0, 1.0), with_eigenfunctions=False)
    pairs = [(lv.E, lv.algebraic_multiplicity) for lv in spec.levels]
    want = [(0.25, 1), (2.25, 1), (4.0, 2), (6.25, 1)]
    if len(pairs) != 4 or any(
        abs(e - we) > 1e-8 or m_ != wm for (e, m_), (we, wm) in zip(pairs, want)
    ):
        errors.append(f"spectrum {pairs}")
    if any(abs(e.imag) >= 1e-8 for e, _ in pairs):
        errors.append("imaginary parts exceed 1e-8")
    _verdict(3, not errors, "; ".join(errors) or "multiplicity 2 at 4, set as stated")
    assert not errors, errors


def test_criterion_04_diagonalizable_branch():
    V = TrigPTPotential(1, 1.3, IV)
    spec = find_complex_spectrum(V, (0.1, 7.0, -1.0, 1.0), with_eigenfunctions=False)
    mults = [lv.algebraic_multiplicity for lv in spec.levels]
    extra = [lv.E for lv in spec.levels if abs(lv.E - 1.69) < 1e-8]
    ok = all(m_ == 1 for m_ in mults) and len(extra) == 1
    _verdict(4, ok, f"multiplicities {mults}, created level at "
                    f"{extra[0].real if extra else 'missing'}")
    assert ok


def test_criterion_05_jordan_chain_residuals():
    diag = diagnose_level(V1, 4.0)
    phi, chi = diag.chain
    chi_scale = chi.max_norm()
    errors = []
    if diag.chain_residuals[0] > 1e-6:
        errors.append(f"chain residual {diag.chain_residuals[0]:.2e}")
    if diag.nilpotency_residual > 1e-5:
        errors.append(f"nilpotency {diag.nilpotency_residual:.2e}")
    bmax = max(diag.boundary_residuals[1])
    if bmax > 1e-7 * chi_scale:
        errors.append(f"chain boundary value {bmax:.2e}")
    _verdict(5, not errors,
             f"|(h-4)chi-phi|/|phi| = {diag.chain_residuals[0]:.2e}, "
             f"nilpotency = {diag.nilpotency_residual:.2e}, "
             f"|chi(+-pi)| = {bmax:.2e}")
    assert not errors, errors


def test_criterion_06_level_removed(forward_report):
    res = forward_report.artifacts["result"]
    from darboux1d.darboux import second_solution_check

    v0d, dv0 = exceptional_initial_data(res, 1)
    phi1 = integrate(res.potential, 1.0, v0d, dv0, rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    is_ev, det = second_solution_check(res.potential, phi1)
    cs = characteristic(V1, 1.0)
    scale = characteristic_scale(V1, 1.0)
    ok = (not is_ev) and abs(cs.D) > 0.01 * scale
    _verdict(6, ok, f"second solution |phi2(b)|/scale = "
                    f"{abs(det['phi2_b']) / det['phi2_scale']:.3f}, "
                    f"|D(1)| = {abs(cs.D):.3f} vs 0.01*scale = {0.01 * scale:.3f}")
    assert ok


def test_criterion_07_backward_transform(backward_report):
    rep = backward_report
    errors = []
    for fragment in (
        "potential real",
        "multiplicity at 4 drops",
        "still present",
        "new eigenfunction",
    ):
        c = [x for x in rep.checks if fragment in x.name][0]
        if not c.passed:
            errors.append(f"{c.name}: {c.observed}")
    closed = [x for x in rep.checks if "closed-form match" in x.name][0]
    print(f"\n  criterion 7 closed-form comparison (reported separately): "
          f"{closed.observed}, passed={closed.passed}")
    stated = [x for x in rep.checks if "stated set" in x.name][0]
    if not stated.passed:
        errors.append(
            "spectrum clause: " + stated.observed + " != " + stated.required
            + " -- the kappa^2 level provably does not exist for the "
              "endpoint-singular (limit-point) realization; see module notes"
        )
    _verdict(7, not errors, "; ".join(errors) or "all clauses hold")
    assert not errors, errors


def test_criterion_08_degenerate_backward_probe():
    out = probe_degenerate_limit(1e-4, IV)
    worst = max(out.values())
    ok = worst < 1e-2
    _verdict(
        8, ok,
        f"max|V| at kappa = 1 +- 1e-4 is {worst:.3e} "
        "(the family's pointwise limit is the nonzero confluent transform and "
        "the grid maximum sits on the 6/(x+pi)^2 endpoint pole; only the "
        "alternative kappa = 1 construction yields the zero potential)",
    )
    assert ok, (
        f"max|V2| = {worst:.3e} at kappa = 1 +- 1e-4; the closed-form family "
        "does not tend to 0 as kappa -> 1 (its limit is the confluent "
        "transform, ~3.24 at x = -pi/2), so this criterion cannot hold as "
        "stated; the kappa = 1 construction itself IS verified to give the "
        "zero potential in the backward-V2 scenario"
    )


def test_criterion_09_dimension_three():
    V = TripleChainPotential(IV)
    errors = []
    spec = find_complex_spectrum(V, (0.1, 10.0, -1.0, 1.0), with_eigenfunctions=False)
    pairs = [(lv.E, lv.algebraic_multiplicity) for lv in spec.levels]
    want = [(2.25, 1), (4.0, 3), (6.25, 1), (9.0, 1)]
    if len(pairs) != 4 or any(
        abs(e - we) > 1e-7 or m_ != wm for (e, m_), (we, wm) in zip(pairs, want)
    ):
        errors.append(f"spectrum {pairs}")
    diag = diagnose_level(V, 4.0)
    if diag.algebraic_multiplicity != 3 or len(diag.chain) != 3:
        errors.append(f"chain length {len(diag.chain)}")
    if max(diag.chain_residuals) > 1e-6:
        errors.append(f"chain residuals {diag.chain_residuals}")
    _verdict(9, not errors,
             f"spectrum {{2.25, 4(x3), 6.25, 9}}, chain length 3, "
             f"residuals {[f'{r:.1e}' for r in diag.chain_residuals]}")
    assert not errors, errors


def test_criterion_10_property_suites(forward_report):
    errors = []

    # Abel constancy at one energy
    ua = integrate(V1, 3.3, 0.0, 1.0)
    ub = integrate(V1, 3.3, 1.0, 0.5j)
    W = wronskian2(ua, ub)
    drift = np.max(np.abs(W - W[0])) / abs(W[0])
    if drift > 1e-9:
        errors.append(f"Abel drift {drift:.2e}")

    # Wronskian derivative identity
    from darboux1d.integrate import _fd1

    u1 = integrate(V1, 1.7, 0.0, 1.0)
    u2 = integrate(V1, 4.9, 1.0, 0.0)
    Wd = wronskian2(u1, u2)
    lhs = _fd1(Wd, IV.h)[3:-3]
    rhs = ((1.7 - 4.9) * u1.values * u2.values)[3:-3]
    wid = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
    if wid > 1e-6:
        errors.append(f"Wronskian-derivative identity {wid:.2e}")

    # rescaling invariance of the derived potential
    from darboux1d.darboux import darboux_potential

    res = forward_report.artifacts["result"]
    res2 = darboux_potential(res.u1.scaled(1.3 - 0.7j), res.u2.scaled(-0.2 + 2.1j),
                             V0, rtol=VERIFY_RTOL)
    dv = np.max(np.abs(res2.potential.grid_values() - res.potential.grid_values()))
    if dv > 1e-10 * np.max(np.abs(res.potential.grid_values())):
        errors.append(f"rescaling invariance {dv:.2e}")

    # PT symmetry of both complex closed forms
    xs = IV.nodes
    for name, V in (("forward", V1), ("triple-chain", TripleChainPotential(IV))):
        pt = np.max(np.abs(V.evaluate(-xs) - np.conj(V.evaluate(xs))))
        if pt > 1e-10:
            errors.append(f"PT {name} {pt:.2e}")

    # intertwining residuals at five generic energies
    it = verify_intertwining(res, [0.7, 2.8, 3.3, 5.9, 5 + 0.5j],
                             rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    if it["max_residual"] > 1e-6:
        errors.append(f"intertwining {it['max_residual']:.2e}")

    _verdict(10, not errors, "; ".join(errors) or
             f"Abel {drift:.1e}, identity {wid:.1e}, rescale {dv:.1e}, "
             f"intertwining {it['max_residual']:.1e}")
    assert not errors, errors
