"""Phase-plane shooting and the Green-operator fixed-point oracle.

The nonlinear arcs are integrated with an adaptive Dormand-Prince 8(5,3)
scheme (compiled when available); the linear arc uses exact propagators.
The nonlinearity is extended oddly, ``|u|**(p-1) u``, so that the terminal
value depends continuously on the initial slope even for trajectories that
leave the positive half-plane; positivity is tracked separately.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import _backend
from .core import PhaseState, PositiveSolution, ProblemParams, Regime, Symmetry, TrajectoryArc
from .errors import DomainError, IntegrationError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-6


@dataclass(frozen=True)
class FlowConfig:
    """Integrator and sampling settings.

    Parameters
    ----------
    rk_abs_tol, rk_rel_tol : float
        Local error tolerances of the Runge-Kutta pair.
    max_step : float
        Upper bound on the step length.
    dense_output : bool
        Whether :func:`shoot` records samples along the arcs.
    samples_per_unit : int
        Sample density per unit length of ``x``.
    min_arc_samples : int
        Lower bound on samples per arc.
    """

    rk_abs_tol: float = 1e-11
    rk_rel_tol: float = 1e-11
    max_step: float = math.inf
    dense_output: bool = True
    samples_per_unit: int = 2000
    min_arc_samples: int = 129

    def __post_init__(self) -> None:
        if not (self.rk_abs_tol > 0 and self.rk_rel_tol > 0):
            raise DomainError("integrator tolerances must be positive")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")
        if self.min_arc_samples < 2 or self.samples_per_unit < 1:
            raise DomainError("sampling density too small")


DEFAULT_FLOW = FlowConfig()


@dataclass(frozen=True)
class ArcFlow:
    """Result of one nonlinear integration."""

    end: PhaseState
    samples: np.ndarray
    zero_x: float | None
    drift: float
    steps: int


def _run_nonlinear(u: float, v: float, x0: float, x1: float, lam: float, p: float,
                   cfg: FlowConfig, sample_x: np.ndarray | None = None,
                   stop_at_zero: bool = False) -> ArcFlow:
    res = _backend.integrate_nonlinear(float(u), float(v), float(x0), float(x1), float(lam),
                                       float(p), cfg.rk_rel_tol, cfg.rk_abs_tol,
                                       float(cfg.max_step), sample_x, stop_at_zero)
    ue, ve, nacc, nrej, zx, drift, escale, samples, status = res
    if status == 3:
        raise IntegrationError(f"step size collapsed near x={x1!r} (lambda={lam!r}, p={p!r})")
    if status == 4:
        raise IntegrationError("step budget exhausted")
    if not (math.isfinite(ue) and math.isfinite(ve)):
        raise IntegrationError("trajectory left the representable range")
    rel = float(drift) / float(escale) if escale > 0 else 0.0
    zero = None if zx != zx else float(zx)
    return ArcFlow(PhaseState(float(x1), float(ue), float(ve)), samples, zero, rel, int(nacc))


def nonlinear_flow(start: PhaseState, delta_x: float, lam: float, p: float,
                   cfg: FlowConfig = DEFAULT_FLOW, backward: bool = False,
                   sample_x: Sequence[float] | None = None,
                   with_info: bool = False):
    """Flow of ``u' = v, v' = -lam u - |u|**(p-1) u`` over ``delta_x >= 0``.

    ``backward=True`` runs the reversed flow, ending at ``start.x - delta_x``.
    With ``with_info`` an :class:`ArcFlow` is returned instead of the end state;
    its ``samples`` hold ``(u, v)`` at ``sample_x`` and ``zero_x`` the first
    point where ``u`` falls from positive to non-positive.
    """
    if delta_x < 0:
        raise DomainError("delta_x must be non-negative; use backward=True")
    x1 = start.x - delta_x if backward else start.x + delta_x
    sx = None if sample_x is None else np.asarray(sample_x, dtype=float)
    info = _run_nonlinear(start.u, start.v, start.x, x1, lam, p, cfg, sx)
    return info if with_info else info.end


def linear_propagate(u: float, v: float, s, lam: float):
    """Exact solution of ``u' = v, v' = -lam u`` after signed time ``s``.

    ``s`` may be an array; returns ``(u, v)`` of matching shape.
    """
    s = np.asarray(s, dtype=float)
    if lam > 0.0:
        w = math.sqrt(lam)
        c, sn = np.cos(w * s), np.sin(w * s)
        return u * c + (v / w) * sn, -u * w * sn + v * c
    if lam == 0.0:
        return u + v * s, v + 0.0 * s
    k = math.sqrt(-lam)
    c, sh = np.cosh(k * s), np.sinh(k * s)
    return u * c + (v / k) * sh, u * k * sh + v * c


def linear_flow(start: PhaseState, delta_x: float, lam: float, backward: bool = False) -> PhaseState:
    """Exact flow of the linear system (rotation, shear or hyperbolic map)."""
    s = -delta_x if backward else delta_x
    u, v = linear_propagate(start.u, start.v, s, lam)
    return PhaseState(start.x + s, float(u), float(v))


def _linear_first_zero(u: float, v: float, length: float, lam: float) -> float | None:
    """First ``s`` in ``(0, length)`` where the linear trajectory from a state
    with ``u > 0`` reaches zero, if any."""
    if u <= 0.0:
        return 0.0
    if lam > 0.0:
        w = math.sqrt(lam)
        s = math.atan2(u * w, -v) / w
    elif lam == 0.0:
        s = -u / v if v < 0.0 else math.inf
    else:
        k = math.sqrt(-lam)
        r = u * k / -v if v < 0.0 else math.inf
        s = math.atanh(r) / k if r < 1.0 else math.inf
    return s if s < length else None


@dataclass(frozen=True)
class ShotResult:
    """Outcome of one shot from ``(0, v0)``.

    ``candidate`` is populated only for strongly positive trajectories shot
    with ``build=True``.
    """

    params: ProblemParams
    v0: float
    terminal: PhaseState
    positive: bool
    zero_crossing: float | None
    arcs: tuple | None
    energy_drift: float
    candidate: PositiveSolution | None = field(default=None, repr=False)


def _grid(a: float, b: float, cfg: FlowConfig, extra: Sequence[float]) -> np.ndarray:
    n = max(cfg.min_arc_samples, int(math.ceil((b - a) * cfg.samples_per_unit)) + 1)
    g = np.linspace(a, b, n)
    ins = [e for e in extra if a < e < b]
    if ins:
        g = np.unique(np.concatenate([g, ins]))
    return g


def terminal_state(v0: float, params: ProblemParams, cfg: FlowConfig = DEFAULT_FLOW) -> PhaseState:
    """Terminal state ``(1, u(1), u'(1))`` of the shot from ``(0, v0)``, no samples."""
    lam, p = params.lam, params.p
    a = _run_nonlinear(0.0, v0, 0.0, params.x_left, lam, p, cfg).end
    u, v = linear_propagate(a.u, a.v, params.h, lam)
    return _run_nonlinear(float(u), float(v), params.x_right, 1.0, lam, p, cfg).end


def terminal_residual(v0: float, params: ProblemParams, cfg: FlowConfig = DEFAULT_FLOW) -> float:
    """``u(1)`` as a function of the initial slope."""
    return terminal_state(v0, params, cfg).u


def scan_residual(v0: float, params: ProblemParams, cfg: FlowConfig = DEFAULT_FLOW) -> float:
    """Residual for root scans that stops at the first zero of ``u``.

    Equals ``u(1)`` when ``u > 0`` on ``(0, 1)``. Otherwise it is
    ``-(1 - x_z) |u'(x_z)|`` at the first zero ``x_z``: negative, and
    continuous with ``u(1)`` where the zero leaves through ``x = 1``.
    Trajectories that oscillate after their first zero are never followed.
    """
    lam, p = params.lam, params.p
    xl = params.x_left
    f1 = _run_nonlinear(0.0, v0, 0.0, xl, lam, p, cfg, stop_at_zero=True)
    if f1.zero_x is not None:
        return -(1.0 - f1.zero_x) * abs(f1.end.v)
    a = f1.end
    sz = _linear_first_zero(a.u, a.v, params.h, lam)
    if sz is not None:
        vz = float(linear_propagate(a.u, a.v, sz, lam)[1])
        return -(1.0 - xl - sz) * abs(vz)
    u2, v2 = linear_propagate(a.u, a.v, params.h, lam)
    f3 = _run_nonlinear(float(u2), float(v2), params.x_right, 1.0, lam, p, cfg, stop_at_zero=True)
    if f3.zero_x is not None:
        return -(1.0 - f3.zero_x) * abs(f3.end.v)
    return f3.end.u


def shoot(v0: float, params: ProblemParams, cfg: FlowConfig = DEFAULT_FLOW, *,
          build: bool = True, extra_x: Sequence[float] = ()) -> ShotResult:
    """Shoot from ``(0, v0)`` across the three arcs.

    Parameters
    ----------
    v0 : float
        Initial slope, positive.
    params : ProblemParams
    cfg : FlowConfig
    build : bool
        Assemble a :class:`PositiveSolution` (with Green residual) when the
        trajectory is strongly positive.
    extra_x : sequence of float
        Additional abscissae to sample exactly (for example probe points).
    """
    if not v0 > 0.0:
        raise DomainError(f"v0 must be positive, got {v0!r}")
    lam, p = params.lam, params.p
    xl, xr = params.x_left, params.x_right
    dense = cfg.dense_output or build
    g1 = _grid(0.0, xl, cfg, extra_x) if dense else None
    g2 = _grid(xl, xr, cfg, extra_x) if dense else None
    g3 = _grid(xr, 1.0, cfg, extra_x) if dense else None

    f1 = _run_nonlinear(0.0, v0, 0.0, xl, lam, p, cfg, g1)
    a = f1.end
    zero = f1.zero_x
    if zero is None:
        s = _linear_first_zero(a.u, a.v, params.h, lam)
        if s is not None:
            zero = xl + s
    u2, v2 = linear_propagate(a.u, a.v, params.h, lam)
    f3 = _run_nonlinear(float(u2), float(v2), xr, 1.0, lam, p, cfg, g3)
    term = f3.end
    if zero is None and f3.zero_x is not None:
        # ignore only the crossing a near-solution makes at x = 1 through roundoff
        # (the noise floor grows with the solution size, seen here at the gates)
        cap = 1e-6 * max(1.0, abs(a.u), abs(float(u2)))
        margin = min(cap, max(1e-9, 10.0 * abs(term.u) / max(abs(term.v), 1e-300)))
        if f3.zero_x < 1.0 - margin:
            zero = f3.zero_x
    drift = max(f1.drift, f3.drift)

    arcs = None
    positive = zero is None and term.v < 0.0
    if dense:
        lu, lv = linear_propagate(a.u, a.v, g2 - xl, lam)
        e_lin = 0.5 * lv * lv + 0.5 * lam * lu * lu
        scale = max(float(np.max(np.abs(0.5 * lv * lv))), float(np.max(np.abs(0.5 * lam * lu * lu))), 1e-300)
        drift = max(drift, float(np.max(np.abs(e_lin - e_lin[0]))) / scale)
        arcs = (TrajectoryArc(Regime.NONLINEAR, 0.0, xl, g1, f1.samples[:, 0], f1.samples[:, 1]),
                TrajectoryArc(Regime.LINEAR, xl, xr, g2, lu, lv),
                TrajectoryArc(Regime.NONLINEAR, xr, 1.0, g3, f3.samples[:, 0], f3.samples[:, 1]))
        if positive:
            interior = np.concatenate([a_.u[(a_.x > 0.0) & (a_.x < 1.0)] for a_ in arcs])
            positive = bool(np.all(interior > 0.0))
    cand = None
    if positive and build:
        cand = build_solution(params, v0, arcs, term, drift, cfg)
    return ShotResult(params, float(v0), term, positive, zero, arcs, drift, cand)


def _refine_max(params: ProblemParams, arcs: tuple, cfg: FlowConfig) -> tuple[float, float]:
    xs, us, vs = (np.concatenate([a.x for a in arcs]), np.concatenate([a.u for a in arcs]),
                  np.concatenate([a.v for a in arcs]))
    i = int(np.argmax(us))
    best_u, best_x = float(us[i]), float(xs[i])
    # locate the arc that owns sample i and bracket a sign change of v
    offs = np.cumsum([0] + [a.x.size for a in arcs])
    k = int(np.searchsorted(offs, i, side="right") - 1)
    arc = arcs[k]
    j = i - offs[k]
    lo = max(j - 1, 0)
    hi = min(j + 1, arc.x.size - 1)
    for a_, b_ in ((lo, j), (j, hi)):
        if a_ == b_ or not (arc.v[a_] > 0.0 >= arc.v[b_]):
            continue
        start = PhaseState(float(arc.x[a_]), float(arc.u[a_]), float(arc.v[a_]))
        span = float(arc.x[b_] - arc.x[a_])
        if arc.regime is Regime.LINEAR:
            def vel(s: float) -> float:
                return float(linear_propagate(start.u, start.v, s, params.lam)[1])

            def pos(s: float) -> float:
                return float(linear_propagate(start.u, start.v, s, params.lam)[0])
        else:
            def vel(s: float) -> float:
                return nonlinear_flow(start, s, params.lam, params.p, cfg).v if s > 0 else start.v

            def pos(s: float) -> float:
                return nonlinear_flow(start, s, params.lam, params.p, cfg).u if s > 0 else start.u
        s_star = brentq(vel, 0.0, span, xtol=1e-15, rtol=1e-15, maxiter=200)
        u_star = pos(s_star)
        if u_star >= best_u:
            best_u, best_x = u_star, start.x + s_star
        break
    return best_u, best_x


def classify(v0: float, terminal_v: float, x_max: float) -> Symmetry:
    """Symmetry class from the slope mismatch ``|v0 + u'(1)|``."""
    if abs(v0 + terminal_v) <= SYMMETRY_TOL * max(1.0, v0):
        return Symmetry.SYMMETRIC
    return Symmetry.ASYMMETRIC_LEFT if x_max < 0.5 else Symmetry.ASYMMETRIC_RIGHT


def build_solution(params: ProblemParams, v0: float, arcs: tuple, terminal: PhaseState,
                   drift: float, cfg: FlowConfig = DEFAULT_FLOW) -> PositiveSolution:
    r_max, x_max = _refine_max(params, arcs, cfg)
    sym = classify(v0, terminal.v, x_max)
    sol = PositiveSolution(params=params, v0=float(v0), arcs=arcs, r_max=r_max, x_max=x_max,
                           symmetry=sym, shoot_residual=abs(terminal.u), fixed_point_residual=0.0,
                           terminal_slope=terminal.v, energy_drift=drift)
    object.__setattr__(sol, "fixed_point_residual", fixed_point_residual(sol))
    return sol


def _segments(x: np.ndarray) -> list[slice]:
    cuts = np.flatnonzero(np.diff(x) == 0.0) + 1
    bounds = [0, *cuts.tolist(), x.size]
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def green_apply(f: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Apply the inverse of ``-d2/dx2`` with zero Dirichlet data on ``[0, 1]``.

    ``(K f)(x) = int_0^x (y - x) f dy - x int_0^1 (y - 1) f dy``, evaluated
    with piecewise cubic-spline antiderivatives. A repeated abscissa in
    ``grid`` marks a jump of ``f``; the pieces are integrated separately.
    """
    x = np.asarray(grid, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.shape != f.shape or x.ndim != 1:
        raise DomainError("f and grid must be 1-d arrays of equal length")
    if x[0] != 0.0 or x[-1] != 1.0 or np.any(np.diff(x) < 0):
        raise DomainError("grid must be non-decreasing and span [0, 1]")
    F0 = np.empty_like(x)
    F1 = np.empty_like(x)
    c0 = c1 = 0.0
    for sl in _segments(x):
        xs, fs = x[sl], f[sl]
        if xs.size == 1:
            F0[sl], F1[sl] = c0, c1
            continue
        kind = "not-a-knot" if xs.size >= 4 else "natural"
        i0 = CubicSpline(xs, fs, bc_type=kind).antiderivative()
        i1 = CubicSpline(xs, xs * fs, bc_type=kind).antiderivative()
        F0[sl] = c0 + (i0(xs) - i0(xs[0]))
        F1[sl] = c1 + (i1(xs) - i1(xs[0]))
        c0, c1 = float(F0[sl][-1]), float(F1[sl][-1])
    total = c1 - c0
    return F1 - x * F0 - x * total


def fixed_point_residual(sol: PositiveSolution | None = None, *, x: np.ndarray | None = None,
                         u: np.ndarray | None = None, params: ProblemParams | None = None) -> float:
    """Sup over the samples of ``|u - K(lam u + a_h u**p)|``.

    Pass a solution, or raw ``x``/``u`` arrays with ``params``.
    """
    if sol is not None:
        params = sol.params
        x, u, _ = sol.stacked()
        a = np.concatenate([np.full(arc.x.size, 1.0 if arc.regime is Regime.NONLINEAR else 0.0)
                            for arc in sol.arcs])
    else:
        if x is None or u is None or params is None:
            raise DomainError("need a solution or x, u and params")
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        a = np.where((x > params.x_left) & (x < params.x_right), 0.0, 1.0)
    rhs = params.lam * u + a * np.sign(u) * np.abs(u) ** params.p
    return float(np.max(np.abs(u - green_apply(rhs, x))))


def shoot_verify(sol: PositiveSolution, cfg: FlowConfig = DEFAULT_FLOW) -> float:
    """Re-shoot ``sol.v0`` without sampling and return ``|u(1)|``."""
    return abs(terminal_residual(sol.v0, sol.params, cfg))


def sample_function(sol: PositiveSolution) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise cubic interpolant of ``u`` built per arc (for plotting and comparisons)."""
    splines = [(arc.x_start, arc.x_end, CubicSpline(arc.x, arc.u)) for arc in sol.arcs]

    def u_of(xq):
        xq = np.asarray(xq, dtype=float)
        out = np.empty_like(xq)
        for a, b, sp in splines:
            m = (xq >= a) & (xq <= b)
            out[m] = sp(xq[m])
        return out

    return u_of
