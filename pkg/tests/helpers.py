"""Shared test utilities, including an independent fixed-step RK4 oracle.

The oracle integrator shares no code with the package kernel (classical RK4,
fixed steps, Richardson extrapolation); derived expected values in the tests
come from it, never from the code path under test.
"""
import numpy as np


def rk4_endpoint(v_func, E, y_a, dy_a, a, b, n_steps):
    """Classical fixed-step RK4 for -y'' + V y = E y; returns (y(b), y'(b))."""
    h = (b - a) / n_steps
    y = complex(y_a)
    p = complex(dy_a)
    x = a

    def f(x, y, p):
        return p, (v_func(x) - E) * y

    for _ in range(n_steps):
        k1y, k1p = f(x, y, p)
        k2y, k2p = f(x + h / 2, y + h / 2 * k1y, p + h / 2 * k1p)
        k3y, k3p = f(x + h / 2, y + h / 2 * k2y, p + h / 2 * k2p)
        k4y, k4p = f(x + h, y + h * k3y, p + h * k3p)
        y = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        x += h
    return y, p


def rk4_richardson_endpoint(v_func, E, y_a, dy_a, a, b, n_steps):
    """Richardson-extrapolated RK4 endpoint value (order ~5)."""
    y1, _ = rk4_endpoint(v_func, E, y_a, dy_a, a, b, n_steps)
    y2, _ = rk4_endpoint(v_func, E, y_a, dy_a, a, b, 2 * n_steps)
    return y2 + (y2 - y1) / 15.0


def v1ex_closed(x, A=1.0, B=2.0):
    """Closed form of the forward-step partner potential."""
    x = np.asarray(x, dtype=float)
    return 2 * A**2 * (A**2 - B**2) / (A * np.cos(A * x) + 1j * B * np.sin(A * x)) ** 2


def project_out(target, direction, h):
    """target minus its L2 projection on direction (uniform-grid Simpson)."""
    w = np.ones(len(target))
    w[1:-1:2] = 4.0
    w[2:-2:2] = 2.0
    num = np.sum(w * np.conj(direction) * target)
    den = np.sum(w * np.conj(direction) * direction)
    return target - (num / den) * direction
