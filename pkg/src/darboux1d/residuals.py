"""Finite-difference application of h - E to grid functions.

Chain members and mapped functions are generally NOT solutions of the
homogeneous equation, so residual checks must apply the operator honestly:
4th-order centered differences inside, one-sided at the two nodes next to
each boundary.  Potentials flagged with an endpoint pole get a margin
excluded (the potential magnitude there amplifies data error without limit).
"""
from __future__ import annotations

import numpy as np

from .potentials import PotentialSpec

SINGULAR_MARGIN = 0.05  # interval excluded next to a flagged endpoint pole


def _onesided_d2_weights(n_points: int) -> np.ndarray:
    """Forward-difference weights for f'' at node 0, exact through x^(n-1),
    solved from the Vandermonde moment conditions."""
    k = np.arange(n_points, dtype=float)
    m = np.vander(k, n_points, increasing=True).T
    rhs = np.zeros(n_points)
    rhs[2] = 2.0
    return np.linalg.solve(m, rhs)


_FWD2 = _onesided_d2_weights(6)

# Residual norms are taken over interior nodes only: one-sided stencils at the
# boundary amplify the dense-output data noise by an order of magnitude, which
# measures the integrator, not the functions under test.  The differential
# equation is a statement about the open interval; endpoint membership is
# checked separately through the boundary values themselves.
EDGE_EXCLUDE = 3


def fd2(y: np.ndarray, h: float) -> np.ndarray:
    """2nd derivative on a uniform grid: centered 4th-order inside,
    one-sided at the two nodes next to each boundary."""
    n = len(y)
    w = len(_FWD2)
    if n < w + 2:
        raise ValueError(f"fd2 needs at least {w + 2} nodes, got {n}")
    d = np.empty(n, dtype=complex)
    d[2:-2] = (-y[:-4] + 16.0 * y[1:-3] - 30.0 * y[2:-2] + 16.0 * y[3:-1] - y[4:]) / (
        12.0 * h * h
    )
    for i in (0, 1):
        d[i] = np.dot(_FWD2, y[i : i + w]) / (h * h)
    for i in (n - 2, n - 1):
        d[i] = np.dot(_FWD2, y[i : i - w : -1]) / (h * h)
    return d


def interior_mask(V: PotentialSpec) -> np.ndarray:
    """Nodes on which FD residuals of functions over V are meaningful."""
    nodes = V.interval.nodes
    mask = np.ones(len(nodes), dtype=bool)
    mask[:EDGE_EXCLUDE] = False
    mask[-EDGE_EXCLUDE:] = False
    if V.singular_left is not None:
        mask &= nodes - V.interval.a >= SINGULAR_MARGIN
    if V.singular_right is not None:
        mask &= V.interval.b - nodes >= SINGULAR_MARGIN
    return mask


def apply_h_minus_e(V: PotentialSpec, values: np.ndarray, E: complex) -> np.ndarray:
    """(h - E) f = -f'' + (V - E) f with f'' by finite differences.

    At a flagged endpoint node V is infinite; the product there is left to
    the arithmetic (inf/nan) and such nodes are outside ``interior_mask``.
    """
    vg = V.grid_values()
    with np.errstate(invalid="ignore", over="ignore"):
        out = -fd2(values, V.interval.h) + (vg - complex(E)) * values
    return out


def relative_residual(V: PotentialSpec, applied: np.ndarray, reference: np.ndarray) -> float:
    """max |applied - reference| / max |reference| over the meaningful nodes."""
    m = interior_mask(V)
    scale = float(np.max(np.abs(reference[m])))
    if scale == 0.0:
        scale = 1.0
    return float(np.max(np.abs(applied[m] - reference[m])) / scale)
