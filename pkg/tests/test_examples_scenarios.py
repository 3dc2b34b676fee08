import pytest

from darboux1d.errors import ConfigError
from darboux1d.examples import (
    dim3_u2_closed_form,
    fit_solution_energy,
    probe_degenerate_limit,
    reproduce_scenario,
    run_backward_v2,
    run_chain_dim3,
    run_forward_b2,
    run_forward_bgeneric,
)
from darboux1d.grid import default_interval
from darboux1d.potentials import TrigPTPotential

IV = default_interval(2001)


@pytest.fixture(scope="module")
def forward_b2_report():
    return run_forward_b2(IV)


@pytest.fixture(scope="module")
def backward_report():
    return run_backward_v2(1.2, IV)


def _check(report, fragment):
    hits = [c for c in report.checks if fragment in c.name]
    assert hits, f"no check matching {fragment!r} in {[c.name for c in report.checks]}"
    return hits[0]


def test_forward_b2_all_pass(forward_b2_report):
    assert forward_b2_report.all_passed, forward_b2_report.table()


def test_forward_bgeneric_all_pass():
    rep = run_forward_bgeneric(1.3, IV)
    assert rep.all_passed, rep.table()


def test_forward_bgeneric_rejects_half_integers():
    with pytest.raises(ConfigError):
        run_forward_bgeneric(2.0, IV)


def test_backward_passing_clauses(backward_report):
    rep = backward_report
    assert _check(rep, "potential real").passed
    assert _check(rep, "multiplicity at 4 drops").passed
    assert _check(rep, "still present").passed
    assert _check(rep, "new eigenfunction").passed
    assert _check(rep, "closed-form match").passed
    assert _check(rep, "limit-point prediction").passed


def test_backward_stated_set_clause_fails_honestly(backward_report):
    # The claimed extra level at kappa^2 does not exist for the limit-point
    # realization forced by the endpoint pole (the would-be eigenfunction
    # behaves like (x+pi)^-2 there).  The scenario records the discrepancy
    # rather than papering over it.
    c = _check(backward_report, "stated set")
    assert not c.passed
    assert "limit-point" in c.note


def test_backward_scenario_exit_state(backward_report):
    assert not backward_report.all_passed


def test_backward_degenerate_kappa_one():
    rep = run_backward_v2(1.0, IV)
    assert rep.all_passed, rep.table()


def test_backward_kappa_outside_window_rejected():
    with pytest.raises(ConfigError, match="regularity window"):
        reproduce_scenario("backward-V2", IV, kappa=0.4)


def test_interior_zero_detected_outside_window():
    # building the second step directly at kappa = 0.4 must trip the
    # interior-Wronskian-zero detector (the closed form has interior poles)
    from darboux1d.darboux import darboux_potential
    from darboux1d.errors import WronskianZeroError
    from darboux1d.integrate import integrate
    from darboux1d.jordan import diagnose_level

    V1 = TrigPTPotential(1, 2, IV)
    diag = diagnose_level(V1, 4.0)
    u2 = integrate(V1, 0.16, 0.0, 1.0)
    with pytest.raises(WronskianZeroError):
        darboux_potential(diag.chain[0], u2, V1)


def test_degenerate_limit_probe_documents_the_pole():
    # the closed-form family does NOT tend to zero as kappa -> 1: the grid
    # maximum stays at the endpoint-pole scale 6/h^2
    out = probe_degenerate_limit(1e-4, IV)
    for v in out.values():
        assert v > 1e4


def test_chain_dim3_all_pass():
    rep = run_chain_dim3(IV)
    assert rep.all_passed, rep.table()


def test_dim3_u2_fitted_energy():
    V1 = TrigPTPotential(1, 2, IV)
    e_fit, res = fit_solution_energy(V1, dim3_u2_closed_form(IV.nodes))
    assert res < 1e-5
    assert abs(e_fit - 4.0) < 1e-6


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError, match="unknown scenario"):
        reproduce_scenario("no-such-scenario", IV)
