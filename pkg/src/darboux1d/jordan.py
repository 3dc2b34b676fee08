"""Jordan-chain diagnostics: algebraic vs geometric multiplicity at a level.

A level E of the Dirichlet problem has algebraic multiplicity m exactly when
D(E) has a zero of order m.  The chain members are energy derivatives of the
shooting solution: with psi_j = (1/j!) d^j psi_E / dE^j,

    (h - E) psi_j = psi_{j-1},        psi_j(a) = 0,
    psi_j(b) = (1/j!) D^(j)(E) = 0    for j < m,

so the eigenfunction and its associated functions fall out of one pass of the
nested augmented system, and their boundary membership is the root order of D.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .darboux import darboux_map, darboux_potential
from .errors import NotAnEigenvalueError, NumericsError
from .integrate import (
    VERIFY_ATOL,
    VERIFY_RTOL,
    WaveSolution,
    _simpson,
)
from .potentials import PotentialSpec
from .residuals import apply_h_minus_e, interior_mask
from .spectral import (
    _grid_solution,
    _polish_multiple,
    _polish_simple,
    characteristic,
    characteristic_derivatives,
    find_complex_spectrum,
    root_multiplicity,
)


@dataclass
class JordanReport:
    """Diagnosis of one level: multiplicities, chain and residuals."""

    E: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    chain: list[WaveSolution]
    chain_residuals: list[float]      # |(h-E) chi_j - chi_{j-1}| / |chi_{j-1}|, j >= 1
    nilpotency_residual: float        # |(h-E)^m chi_{m-1}| / |chi_{m-1}|
    boundary_residuals: list[tuple[float, float]]
    meta: dict = field(default_factory=dict)

    @property
    def diagonalizable_here(self) -> bool:
        return self.algebraic_multiplicity == self.geometric_multiplicity


def _inner(u: np.ndarray, v: np.ndarray, h: float) -> complex:
    return complex(_simpson(np.conj(u) * v, h))


def diagnose_level(
    V: PotentialSpec,
    E0: complex,
    rtol: float = VERIFY_RTOL,
    atol: float = VERIFY_ATOL,
) -> JordanReport:
    """Multiplicity and residual-verified Jordan chain at a level near E0.

    The gauge freedom (any multiple of the eigenfunction may be added to an
    associated function) is fixed by projecting the eigenfunction component
    out of every chain member, with the lower members re-adjusted so the
    chain equations keep holding exactly.
    """
    cs = characteristic(V, E0, rtol, atol)
    if not cs.is_root():
        raise NotAnEigenvalueError(
            f"E = {E0} is not a spectral point: |D| = {abs(cs.D):.3e}"
        )
    m = root_multiplicity(V, E0, rtol=rtol, atol=atol)
    if m < 1:
        raise NotAnEigenvalueError(f"no root of D inside the test circle at {E0}")
    if m > 4:
        raise NumericsError(f"chain construction supports multiplicity <= 4, got {m}")
    E = _polish_simple(V, complex(E0), rtol, atol) if m == 1 else _polish_multiple(
        V, complex(E0), min(m, 3), rtol, atol)

    if m == 1:
        members = [_grid_solution(V, E, rtol, atol, order=0)]
    else:
        members = _grid_solution(V, E, rtol, atol, order=m - 1)

    # scale the whole chain by the eigenfunction's normalization
    norm = members[0].l2_norm()
    phase = 1.0 + 0j
    if V.singular_left is None:
        dp = members[0].derivs[0]
        if dp != 0:
            phase = abs(dp) / dp
    members = [w.scaled(phase / norm) for w in members]

    # gauge: remove the eigenfunction component of each associated function,
    # shifting the members above it to preserve (h - E) chi_j = chi_{j-1}
    h = V.interval.h
    phi = members[0]
    gram = _inner(phi.values, phi.values, h)
    for j in range(1, len(members)):
        c = _inner(phi.values, members[j].values, h) / gram
        for k in range(j, len(members)):
            members[k] = WaveSolution(
                members[k].energy, members[k].interval,
                members[k].values - c * members[k - j].values,
                members[k].derivs - c * members[k - j].derivs,
                members[k].dense, members[k].potential, members[k].label,
            )

    mask = interior_mask(V)
    chain_res = []
    for j in range(1, len(members)):
        applied = apply_h_minus_e(V, members[j].values, E)
        ref = members[j - 1].values
        scale = max(float(np.max(np.abs(ref[mask]))), 1e-300)
        chain_res.append(float(np.max(np.abs(applied[mask] - ref[mask])) / scale))

    # Nilpotency (h-E)^m chi_top = 0 telescopes through the verified chain
    # equations to (h-E) phi plus sub-resolution deviation terms, so it is
    # measured by ONE finite-difference application.  Iterating the FD
    # operator m times instead would amplify the data noise by 1/h^2 per
    # pass (~1e-3 at this grid) and could not resolve the statement at all.
    top = members[-1].values
    hphi = apply_h_minus_e(V, members[0].values, E)
    nil = float(np.max(np.abs(hphi[mask])) / max(float(np.max(np.abs(top[mask]))), 1e-300))

    boundary = [(float(abs(w.values[0])), float(abs(w.values[-1]))) for w in members]

    ds = characteristic_derivatives(V, E, order=min(3, m), rtol=rtol, atol=atol)
    return JordanReport(
        E=E,
        algebraic_multiplicity=m,
        geometric_multiplicity=1,
        chain=members,
        chain_residuals=chain_res,
        nilpotency_residual=nil,
        boundary_residuals=boundary,
        meta={"char_derivatives": ds, "abs_D": abs(ds[0])},
    )


def is_diagonalizable(
    V: PotentialSpec,
    region: tuple[float, float, float, float],
    rtol: float = VERIFY_RTOL,
    atol: float = VERIFY_ATOL,
) -> tuple[bool, list[JordanReport]]:
    """Diagnose every level in the region; True iff all multiplicities are 1."""
    spectrum = find_complex_spectrum(V, region, rtol=rtol, atol=atol,
                                     with_eigenfunctions=False)
    reports = [diagnose_level(V, lv.E, rtol, atol) for lv in spectrum.levels]
    return all(r.algebraic_multiplicity == 1 for r in reports), reports


def background_emergence_check(
    V1: PotentialSpec,
    E_l: complex,
    u2: WaveSolution,
    rtol: float = VERIFY_RTOL,
    atol: float = VERIFY_ATOL,
) -> dict:
    """Verify that transforming with u1 = (eigenfunction at E_l) shortens the
    Jordan chain by one and turns the associated function into the new
    eigenfunction.

    u2 is the second transformation function (energy = the new factorization
    energy).  Returns a report with the derived potential, the multiplicity
    before/after, and the residual of (h2 - E_l) applied to the image of the
    associated function.
    """
    diag = diagnose_level(V1, E_l, rtol, atol)
    if diag.algebraic_multiplicity < 2:
        raise NumericsError(
            f"background_emergence_check: level {E_l} has multiplicity "
            f"{diag.algebraic_multiplicity}, nothing to shorten"
        )
    phi = diag.chain[0]
    chi = diag.chain[1]
    E = diag.E

    result = darboux_potential(phi, u2, V1, rtol=rtol)
    V2 = result.potential

    cs2 = characteristic(V2, E, rtol, atol)
    still_root = cs2.is_root()
    m_after = root_multiplicity(V2, E, rtol=rtol, atol=atol)
    if m_after != diag.algebraic_multiplicity - 1:
        note = "chain did not shorten" if m_after >= diag.algebraic_multiplicity else None
    else:
        note = None

    # image of the associated function: (h1 - E) chi = phi, so L chi solves
    # (h2 - E) L chi = L phi = 0 and is the emerged eigenfunction
    lchi = darboux_map(result, chi, E, source=phi)
    mask = interior_mask(V2)
    applied = apply_h_minus_e(V2, lchi.values, E)
    scale = max(float(np.max(np.abs(lchi.values[mask]))), 1e-300)
    residual_fd = float(np.max(np.abs(applied[mask])) / scale)
    boundary = (float(abs(lchi.values[0])), float(abs(lchi.values[-1])))

    # primary check: proportionality to the independently shot eigenfunction
    # of the derived problem (clean data; no FD noise amplification)
    from .spectral import eigenfunction

    phi2 = eigenfunction(V2, E, rtol, atol, check=False)
    h = V2.interval.h
    c = _inner(phi2.values, lchi.values, h) / _inner(phi2.values, phi2.values, h)
    dev = lchi.values - c * phi2.values
    residual = float(np.max(np.abs(dev[mask])) / scale)

    return {
        "diagnosis_before": diag,
        "result": result,
        "potential": V2,
        "E": E,
        "still_root": still_root,
        "abs_D2": abs(cs2.D),
        "multiplicity_before": diag.algebraic_multiplicity,
        "multiplicity_after": m_after,
        "emerged_eigenfunction": lchi,
        "new_eigenfunction": phi2,
        "emerged_residual": residual,
        "emerged_residual_fd": residual_fd,
        "emerged_boundary": boundary,
        "note": note,
    }
