"""Independent reference computations used by the tests.

None of these touch the package kernels: quadrature goes through a
Richardson-extrapolated midpoint rule or mpmath, and trajectories through
scipy's ``solve_ivp`` at tight tolerances.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp


def richardson_midpoint(f, a: float, b: float, levels: int = 12) -> float:
    """Integrate ``f`` on ``[a, b]`` with an inverse-square-root singularity at
    ``b`` allowed: substitute ``s = b - t**2`` and extrapolate composite
    midpoint sums (error series in even powers of the step)."""
    L = math.sqrt(b - a)

    def g(t):
        return 2.0 * t * f(b - t * t)

    table = []
    for k in range(levels):
        n = 2 ** k
        hstep = L / n
        t = (np.arange(n) + 0.5) * hstep
        row = [hstep * float(np.sum(g(t)))]
        for j in range(1, k + 1):
            fac = 4.0 ** j
            row.append((fac * row[j - 1] - table[k - 1][j - 1]) / (fac - 1.0))
        table.append(row)
    return table[-1][-1]


def mp_time_partial(lam: float, p: float, u0: float, ul: float = 0.0, dps: int = 30) -> float:
    """Time from ``u = ul`` to the turning point ``(u0, 0)`` of the nonlinear
    system, integrated in the original ``u`` variable."""
    with mp.workdps(dps):
        lam_, p_, u0_ = mp.mpf(lam), mp.mpf(p), mp.mpf(u0)
        e0 = lam_ * u0_ ** 2 / 2 + u0_ ** (p_ + 1) / (p_ + 1)

        def f(u):
            d = e0 - lam_ * u ** 2 / 2 - u ** (p_ + 1) / (p_ + 1)
            # nodes within rounding of the turning point carry no weight
            return 1 / mp.sqrt(2 * d) if d > 0 else mp.mpf(0)

        val = mp.quad(f, [mp.mpf(ul), u0_])
        return float(val)


def mp_phi(R: float, theta: float, lam: float, p: float, dps: int = 30) -> float:
    with mp.workdps(dps):
        c = mp.cos(mp.mpf(theta))
        k = 2 * mp.mpf(R) ** (p - 1) * c ** (p - 1) / (mp.mpf(lam) * (p + 1))
        val = 2 * mp.quad(lambda s: 1 / mp.sqrt(1 / c ** 2 - s ** 2 + k * (1 - s ** (p + 1))), [0, 1])
        return float(val)


def _rhs(lam: float, p: float):
    def f(x, y):
        u, v = y
        return [v, -lam * u - abs(u) ** (p - 1.0) * u]
    return f


def rk_flow(u: float, v: float, dx: float, lam: float, p: float) -> tuple[float, float]:
    """State after signed time ``dx`` of the nonlinear system."""
    sol = solve_ivp(_rhs(lam, p), (0.0, dx), [u, v], method="DOP853", rtol=1e-13, atol=1e-14)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def rk_time_to_u(u: float, v: float, target: float, lam: float, p: float,
                 direction: float = 1.0, t_max: float = 50.0) -> float:
    """Elapsed time until ``u`` first crosses ``target`` (forward or backward)."""
    def ev(x, y):
        return y[0] - target
    ev.terminal = True
    span = (0.0, direction * t_max)
    sol = solve_ivp(_rhs(lam, p), span, [u, v], method="DOP853", rtol=1e-13, atol=1e-14, events=ev)
    if not sol.t_events[0].size:
        raise RuntimeError("target not reached")
    return abs(float(sol.t_events[0][0]))


def rk_shoot(v0: float, lam: float, p: float, h: float) -> tuple[float, float]:
    """Terminal ``(u(1), u'(1))`` of the piecewise system, all three arcs by RK."""
    xl, xr = 0.5 * (1.0 - h), 0.5 * (1.0 + h)
    u, v = rk_flow(0.0, v0, xl, lam, p)
    lin = solve_ivp(lambda x, y: [y[1], -lam * y[0]], (xl, xr), [u, v], method="DOP853",
                    rtol=1e-13, atol=1e-14)
    u, v = float(lin.y[0, -1]), float(lin.y[1, -1])
    return rk_flow(u, v, 1.0 - xr, lam, p)
