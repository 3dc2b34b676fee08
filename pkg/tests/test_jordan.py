import numpy as np
import pytest

from darboux1d.darboux import darboux_map, darboux_potential
from darboux1d.errors import NotAnEigenvalueError
from darboux1d.grid import default_interval
from darboux1d.integrate import (
    VERIFY_ATOL,
    VERIFY_RTOL,
    integrate,
    integrate_with_energy_derivative,
    solve_inhomogeneous,
)
from darboux1d.jordan import background_emergence_check, diagnose_level, is_diagonalizable
from darboux1d.potentials import ConstantPotential, TripleChainPotential, TrigPTPotential

from helpers import project_out

IV = default_interval(2001)
V0 = ConstantPotential(0.0, IV)
V1 = TrigPTPotential(1, 2, IV)


@pytest.fixture(scope="module")
def diag4():
    return diagnose_level(V1, 4.0)


def test_simple_level_free():
    r = diagnose_level(V0, 1.0)
    assert r.algebraic_multiplicity == 1
    assert r.geometric_multiplicity == 1
    assert len(r.chain) == 1
    assert r.diagonalizable_here


def test_not_a_level_rejected():
    with pytest.raises(NotAnEigenvalueError):
        diagnose_level(V0, 0.8)


def test_double_level_chain(diag4):
    assert diag4.algebraic_multiplicity == 2
    assert len(diag4.chain) == 2
    phi, chi = diag4.chain
    assert diag4.chain_residuals[0] <= 1e-6
    assert diag4.nilpotency_residual <= 1e-5
    scale = chi.max_norm()
    for end in diag4.boundary_residuals[1]:
        assert end <= 1e-7 * scale


def test_chain_gauge_orthogonality(diag4):
    phi, chi = diag4.chain
    w = np.ones(IV.n_nodes)
    w[1:-1:2], w[2:-2:2] = 4.0, 2.0
    inner = np.sum(w * np.conj(phi.values) * chi.values)
    norm = np.sum(w * np.abs(phi.values) ** 2)
    assert abs(inner) / norm < 1e-10


def test_associated_function_against_inhomogeneous_solve(diag4):
    # independent oracle: solve (h - 4) y = phi directly and compare modulo
    # the multiple-of-phi gauge freedom
    phi, chi = diag4.chain
    y = solve_inhomogeneous(V1, diag4.E, phi, 0.0, 0.0,
                            rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    da = project_out(y.values, phi.values, IV.h)
    db = project_out(chi.values, phi.values, IV.h)
    assert np.max(np.abs(da - db)) < 1e-6 * np.max(np.abs(db))


def test_upstream_consistency_chi_is_image_of_energy_derivative(diag4):
    # chi of the derived problem equals the image of dpsi/dE of the base
    # problem, up to the same multiple-of-phi gauge freedom
    from darboux1d.darboux import (
        CombinationRecipe,
        EigenfunctionRecipe,
        build_transformation_function,
    )

    u1 = build_transformation_function(V0, 1.0, EigenfunctionRecipe(index=2),
                                       rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    base = build_transformation_function(V0, 4.0, EigenfunctionRecipe(index=4),
                                         rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    c = float(base.derivs[0].real) / 2.0
    u2 = build_transformation_function(V0, 4.0, CombinationRecipe(c=c, index=4),
                                       rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    res = darboux_potential(u1, u2, V0, rtol=VERIFY_RTOL)

    psi, psi_t = integrate_with_energy_derivative(V0, diag4.E, 0.0, 1.0,
                                                  rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    # the map at the created level applied to the Dirichlet solution is the
    # eigenfunction route; applied to dpsi/dE it gives the associated function
    lpsi = darboux_map(res, psi, diag4.E, allow_factorization_energy=True)
    lpsi_t = darboux_map(res, psi_t, diag4.E, source=psi)
    phi, chi = diag4.chain
    i0 = np.argmax(np.abs(phi.values))
    scale = lpsi.values[i0] / phi.values[i0]
    assert np.max(np.abs(lpsi.values / scale - phi.values)) < 1e-7 * np.max(np.abs(phi.values))
    da = project_out(lpsi_t.values / scale, phi.values, IV.h)
    db = project_out(chi.values, phi.values, IV.h)
    assert np.max(np.abs(da - db)) < 1e-6 * np.max(np.abs(db))


def test_triple_level_chain():
    r = diagnose_level(TripleChainPotential(IV), 4.0)
    assert r.algebraic_multiplicity == 3
    assert len(r.chain) == 3
    assert max(r.chain_residuals) <= 1e-6
    assert r.nilpotency_residual <= 1e-5
    scale = max(w.max_norm() for w in r.chain)
    for member in r.boundary_residuals:
        for end in member:
            assert end <= 1e-7 * scale


def test_is_diagonalizable_verdicts():
    ok0, reps0 = is_diagonalizable(V0, (0.1, 5.0, -1.0, 1.0))
    assert ok0 and all(r.algebraic_multiplicity == 1 for r in reps0)
    ok1, reps1 = is_diagonalizable(V1, (0.1, 7.0, -1.0, 1.0))
    assert not ok1
    bad = [r for r in reps1 if r.algebraic_multiplicity == 2]
    assert len(bad) == 1 and abs(bad[0].E - 4.0) < 1e-8


def test_is_diagonalizable_backward_branch():
    V = TrigPTPotential(1, 1.3, IV)
    ok, reps = is_diagonalizable(V, (0.1, 7.0, -1.0, 1.0))
    assert ok


def test_background_emergence():
    u2 = integrate(V1, 1.44, 0.0, 1.0, rtol=VERIFY_RTOL, atol=VERIFY_ATOL)
    rep = background_emergence_check(V1, 4.0, u2)
    assert rep["multiplicity_before"] == 2
    assert rep["multiplicity_after"] == 1
    assert rep["still_root"]
    assert rep["emerged_residual"] < 1e-6
    assert rep["note"] is None
    scale = np.max(np.abs(rep["emerged_eigenfunction"].values[np.isfinite(
        rep["emerged_eigenfunction"].values)]))
    for end in rep["emerged_boundary"]:
        assert end < 1e-7 * scale
