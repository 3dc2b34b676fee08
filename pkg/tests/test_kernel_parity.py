"""Compiled kernel vs pure-Python fallback: same algorithm, same answers."""
import numpy as np
import pytest

from darboux1d._kernel import get_backend

try:
    CK = get_backend("c")
except ImportError:
    CK = None
PK = get_backend("python")

needs_c = pytest.mark.skipif(CK is None, reason="compiled kernel not built")

A, B = -np.pi, np.pi


def _run_chain(mod, pot_args, E, depth, y0, **kw):
    pot = mod.TrigPTPotential(*pot_args) if pot_args else mod.ConstPotential(0.0)
    return mod.solve_chain(pot, E, depth, y0, A, B, 1e-11, 1e-13, **kw)


@needs_c
def test_same_step_sequences_free():
    rc = _run_chain(CK, None, 1.0, 2, [0, 1, 0, 0])
    rp = _run_chain(PK, None, 1.0, 2, [0, 1, 0, 0])
    assert rc.n_steps == rp.n_steps
    assert rc.n_rejected == rp.n_rejected
    for a, b in zip(rc.y_final, rp.y_final):
        assert abs(complex(a) - complex(b)) < 1e-13


@needs_c
def test_same_values_transformed_potential():
    grid = np.linspace(A, B, 501)
    rc = _run_chain(CK, (1.0, 2.0), 5.5 + 0.25j, 1, [0, 1], grid=grid)
    rp = _run_chain(PK, (1.0, 2.0), 5.5 + 0.25j, 1, [0, 1], grid=grid)
    scale = np.max(np.abs(rc.values))
    assert np.max(np.abs(rc.values - rp.values)) < 1e-12 * scale


@needs_c
def test_same_dense_output():
    rc = _run_chain(CK, (1.0, 2.0), 2.0, 1, [0, 1], want_dense=True)
    rp = _run_chain(PK, (1.0, 2.0), 2.0, 1, [0, 1], want_dense=True)
    xs = np.linspace(A + 0.01, B - 0.01, 357)
    vc = rc.dense.sample(xs, 0)
    vp = rp.dense.sample(xs, 0)
    assert np.max(np.abs(vc - vp)) < 1e-12 * np.max(np.abs(vc))


@needs_c
def test_same_quadrature():
    rc1 = _run_chain(CK, None, 1.0, 1, [0, 1], want_dense=True)
    rp1 = _run_chain(PK, None, 1.0, 1, [0, 1], want_dense=True)
    rc2 = _run_chain(CK, None, 4.0, 1, [1, 0], want_dense=True)
    rp2 = _run_chain(PK, None, 4.0, 1, [1, 0], want_dense=True)
    qc = CK.solve_quad(0, rc1.dense, 0, rc2.dense, 0, -3.0, A, B, 1e-11, 1e-16)
    qp = PK.solve_quad(0, rp1.dense, 0, rp2.dense, 0, -3.0, A, B, 1e-11, 1e-16)
    assert abs(complex(qc.y_final[0]) - complex(qp.y_final[0])) < 1e-12


@needs_c
def test_potential_evaluators_agree():
    xs = np.linspace(A, B, 211)
    pairs = [
        (CK.TrigPTPotential(1.0, 2.0), PK.TrigPTPotential(1.0, 2.0)),
        (CK.TripleChainPotential(), PK.TripleChainPotential()),
        (CK.BackwardPartnerPotential(1.2, A, 0.12, 0.976, 0.039552),
         PK.BackwardPartnerPotential(1.2, A, 0.12, 0.976, 0.039552)),
        (CK.ConstPotential(1.5 - 0.5j), PK.ConstPotential(1.5 - 0.5j)),
    ]
    for pc, pp in pairs:
        vc = pc.sample(xs[1:])  # skip the singular endpoint
        vp = pp.sample(xs[1:])
        ok = np.isfinite(vc) & np.isfinite(vp)
        assert np.max(np.abs(vc[ok] - vp[ok])) < 1e-10 * max(1.0, np.max(np.abs(vp[ok])))


@needs_c
def test_package_level_backend_report():
    import darboux1d

    assert darboux1d.kernel_backend() in ("c", "python")
