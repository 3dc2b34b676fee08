import numpy as np
import pytest

from darboux1d.errors import DegenerateCaseError, PotentialRegularityError
from darboux1d.grid import Interval, default_interval
from darboux1d.potentials import (
    BackwardPartnerPotential,
    ConstantPotential,
    TabulatedPotential,
    TripleChainPotential,
    TrigPTPotential,
)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(0.0, 1.0, 2)
    iv = Interval(-np.pi, np.pi, 2001)
    assert len(iv.nodes) == 2001
    assert iv.nodes[0] == -np.pi and iv.nodes[-1] == np.pi
    assert np.allclose(np.diff(iv.nodes), iv.h, rtol=0, atol=1e-15)


def test_trig_pt_point_values():
    V = TrigPTPotential(1, 2, default_interval(201))
    assert V.evaluate(0.0) == pytest.approx(-6.0 + 0j, abs=1e-14)
    assert V.evaluate(np.pi / 2) == pytest.approx(1.5 + 0j, abs=1e-14)


def test_trig_pt_degenerate_parameters_zero():
    V = TrigPTPotential(1.3, 1.3, default_interval(201))
    assert np.max(np.abs(V.grid_values())) < 1e-14


def test_trig_pt_b_zero_pole_rejected():
    with pytest.raises(PotentialRegularityError, match="cos"):
        TrigPTPotential(1.0, 0.0, default_interval(201))


def test_trig_pt_symmetry():
    iv = default_interval(801)
    V = TrigPTPotential(1, 2, iv)
    xs = iv.nodes
    assert np.max(np.abs(V.evaluate(-xs) - np.conj(V.evaluate(xs)))) < 1e-10


def test_trig_pt_analytic_curvature_matches_fd():
    iv = default_interval(201)
    V = TrigPTPotential(1, 2, iv)
    h = 1e-4
    for x in (-np.pi, 0.4, 1.9):
        fd = (V.evaluate(min(x + h, np.pi)) - 2 * V.evaluate(x) + V.evaluate(x - h)) / h**2 \
            if x + h <= np.pi else None
        if fd is not None:
            assert V.second_derivative(x) == pytest.approx(fd, rel=1e-5)
    assert V.second_derivative(-np.pi) == pytest.approx(132.0 + 0j, abs=1e-9)


def test_backward_partner_window():
    with pytest.raises(PotentialRegularityError):
        BackwardPartnerPotential(0.4)
    with pytest.raises(PotentialRegularityError):
        BackwardPartnerPotential(1.6)
    with pytest.raises(DegenerateCaseError):
        BackwardPartnerPotential(1.0)


def test_backward_partner_real_and_singular():
    V = BackwardPartnerPotential(1.2)
    assert V.singular_left is not None
    nodes, vals = V.finite_grid_values()
    assert np.max(np.abs(vals.imag)) == 0.0  # real arithmetic throughout
    # left-endpoint pole: 6/t^2 leading behavior
    t = 1e-3
    assert V.evaluate(-np.pi + t) == pytest.approx(6.0 / t**2, rel=1e-5)
    # value from the direct formula region
    k = 1.2
    x = 0.0
    num = (k**2 - 1) * (k**2 - 1 - k**2 * np.cos(2 * x) + np.cos(2 * k * x + 2 * k * np.pi))
    den = (k * np.cos(k * x + k * np.pi) * np.sin(x) - np.sin(k * x + k * np.pi) * np.cos(x)) ** 2
    assert V.evaluate(0.0) == pytest.approx(num / den, rel=1e-12)


def test_backward_partner_series_consistent_with_formula():
    # the endpoint series and the direct formula must agree in the overlap
    V = BackwardPartnerPotential(1.2)
    ts = V.singular_left.t_switch
    k = 1.2
    for t in (ts * 1.01, ts * 1.3, 0.3):
        x = -np.pi + t
        num = (k**2 - 1) * (k**2 - 1 - k**2 * np.cos(2 * x) + np.cos(2 * k * x + 2 * k * np.pi))
        den = (k * np.cos(k * x + k * np.pi) * np.sin(x)
               - np.sin(k * x + k * np.pi) * np.cos(x)) ** 2
        direct = num / den
        series = 6.0 / t**2 + V.singular_left.v0 + V.singular_left.v2 * t * t
        assert abs(series - direct) / abs(direct) < 2e-4


def test_triple_chain_pt_symmetric():
    iv = default_interval(801)
    V = TripleChainPotential(iv)
    xs = iv.nodes
    assert np.max(np.abs(V.evaluate(-xs) - np.conj(V.evaluate(xs)))) < 1e-10


def test_tabulated_cubic_interpolation():
    iv = default_interval(401)
    exact = lambda x: np.exp(0.3j * x) * np.sin(x) + 0.1 * x**2
    V = TabulatedPotential(iv, exact(iv.nodes))
    # interior: full 4th-order accuracy of the cubic spline on h ~ 1.6e-2
    xs = np.linspace(-np.pi + 0.3, np.pi - 0.3, 500)
    assert np.max(np.abs(V.evaluate(xs) - exact(xs))) < 5e-8
    # natural end conditions cost accuracy in a boundary layer, bounded still
    xs_all = np.linspace(-np.pi, np.pi, 900)
    assert np.max(np.abs(V.evaluate(xs_all) - exact(xs_all))) < 2e-5
    # reproduces the samples at the nodes
    assert np.max(np.abs(V.grid_values() - exact(iv.nodes))) < 1e-14


def test_tabulated_rejects_nonfinite():
    iv = default_interval(101)
    samples = np.ones(101, dtype=complex)
    samples[50] = np.inf
    with pytest.raises(PotentialRegularityError):
        TabulatedPotential(iv, samples)


def test_constant_shift_is_exact():
    V = ConstantPotential(2.5 + 0.5j, default_interval(101))
    assert V.evaluate(0.7) == 2.5 + 0.5j
