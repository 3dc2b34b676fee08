"""Kernel backend selection.

The hot loops (adaptive integration, dense-output evaluation, potential
evaluation) exist twice: a Cython extension ``_ck`` and a pure-Python mirror
``_pk`` with identical semantics.  The compiled one is preferred; set
``DARBOUX1D_BACKEND=python`` to force the fallback (used by the parity tests
and the benchmark).

Backend API (both modules):

    BACKEND_NAME                          "c" | "python"
    DenseSolution(xs, coef)               .eval(x, comp), .sample(xs, comp)
    ConstPotential(value)
    TrigPTPotential(A, B)
    BackwardPartnerPotential(kappa, a, t_switch, v0, v2)
    TripleChainPotential()
    SplinePotential(breaks, coef)
    DarbouxPotential(parent, du1, du2, dw, a1, a2, a, b, sing_l, sing_r)
    solve_chain(pot, E, depth, y0, a, b, rtol, atol, ...)   -> KernelResult
    solve_quad(mode, d1, c1, d2, c2, scale, a, b, rtol, atol, ...) -> KernelResult

KernelResult carries (status, x_fail, y_final, values, dense, n_steps,
n_rejected); statuses are in ``_tableau``.
"""
import os

from . import _pk

_requested = os.environ.get("DARBOUX1D_BACKEND", "").strip().lower()

if _requested == "python":
    backend = _pk
else:
    try:
        from . import _ck as backend  # type: ignore[no-redef]
    except ImportError:
        if _requested == "c":
            raise ImportError(
                "DARBOUX1D_BACKEND=c requested but the compiled kernel is not "
                "built; run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        backend = _pk

BACKEND_NAME = backend.BACKEND_NAME


def get_backend(name=None):
    """Return a kernel module by name ("c", "python" or None for the active one)."""
    if name is None:
        return backend
    if name == "python":
        return _pk
    if name == "c":
        from . import _ck

        return _ck
    raise ValueError(f"unknown backend {name!r}")
