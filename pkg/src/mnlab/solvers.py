"""Construction of positive solutions.

Three independent routes are implemented:

* symmetric solutions from time-map equations (one scalar root per case of
  the sign of ``lam``),
* every positive solution from a scan of the shooting residual
  ``v0 -> u(1)`` followed by Brent refinement,
* asymmetric solutions for ``pi**2/4 < lam < pi**2`` from the angle
  landscape of ``phi(R, .)`` and its equal-level pairing.

Every returned :class:`~mnlab.core.PositiveSolution` comes from an actual
shot and carries both verification residuals.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import PI2, PhaseState, PositiveSolution, ProblemParams, Symmetry, TrajectoryArc
from .errors import (BracketError, DomainError, IntegrationError, LandscapeError,
                     UnsupportedLandscapeError, VerificationError)
from .quadrature import DEFAULT_QUAD, QuadratureConfig, beta_integral
from .shooting import (DEFAULT_FLOW, FlowConfig, fixed_point_residual, nonlinear_flow,
                       scan_residual, shoot, terminal_state)
from .timemaps import (HALF_PI, homoclinic_crossing, linear_gate_ratio, phi, phi_dtheta,
                       time_L_ratio, time_N_full, time_N_partial, _q0)

logger = logging.getLogger(__name__)

SHOOT_TOL = 1e-7
FIXED_POINT_TOL = 1e-6
ROOT_TOL = 1e-9


def residual_scale(r_max: float) -> float:
    """Absolute residual thresholds are multiplied by ``max(1, r_max)``."""
    return max(1.0, r_max)


def _require_verified(sol: PositiveSolution, shoot_tol: float = SHOOT_TOL,
                      fp_tol: float = FIXED_POINT_TOL) -> None:
    sc = residual_scale(sol.r_max)
    if not sol.shoot_residual < shoot_tol * sc:
        raise VerificationError(
            f"shoot residual {sol.shoot_residual:.3e} exceeds {shoot_tol * sc:.3e}")
    if not sol.fixed_point_residual < fp_tol * sc:
        raise VerificationError(
            f"fixed-point residual {sol.fixed_point_residual:.3e} exceeds {fp_tol * sc:.3e}")


# ---------------------------------------------------------------- symmetric


@dataclass(frozen=True)
class SymmetricData:
    """Time-map description of the symmetric solution.

    ``amplitude`` is the maximum of ``u``; ``u_gate`` the value at the
    interfaces.
    """

    params: ProblemParams
    v0: float
    amplitude: float
    u_gate: float


def _gate_value(lam: float, p: float, u0: float, C: float) -> float:
    # interface value s in (0, u0): lam s^2/(2C^2) + s^(p+1)/(p+1) = E(u0)
    e0 = lam * u0 * u0 / 2.0 + u0 ** (p + 1.0) / (p + 1.0)

    def g(s: float) -> float:
        return lam * s * s / (2.0 * C * C) + s ** (p + 1.0) / (p + 1.0) - e0

    return brentq(g, 0.0, u0, xtol=1e-15 * u0, rtol=1e-15, maxiter=300)


def symmetric_data(params: ProblemParams, quad: QuadratureConfig = DEFAULT_QUAD) -> SymmetricData:
    """Solve the time-map equation of the symmetric solution (no shooting)."""
    params.require_solvable()
    lam, p, h = params.lam, params.p, params.h
    half = 0.5 * (1.0 - h)
    if lam < 0.0:
        uh = homoclinic_crossing(lam, p)
        C = linear_gate_ratio(lam, h)

        def F(y: float) -> float:
            u0 = uh * (1.0 + math.exp(y))
            ul = _gate_value(lam, p, u0, C)
            # C rounds to 1 for tiny |lam|: the interface is the turning point
            tp = time_N_partial(lam, p, u0, ul, quad) if ul < u0 else 0.0
            return time_N_full(lam, p, u0, quad) + tp - half

        y_lo = math.log(1e-13)
        if not F(y_lo) > 0.0:
            raise BracketError("symmetric time map below target at the homoclinic limit",
                               lam=lam, h=h, y=y_lo)
        y_hi = 0.0
        while F(y_hi) > 0.0:
            y_hi += 2.0
            if y_hi > 200.0:
                raise BracketError("no upper bracket for the amplitude", lam=lam, h=h)
        y = brentq(F, y_lo, y_hi, xtol=1e-14, rtol=1e-15, maxiter=300)
        u0 = uh * (1.0 + math.exp(y))
        ul = _gate_value(lam, p, u0, C)
        v0 = u0 * math.sqrt(_q0(lam, p, u0))
        return SymmetricData(params, v0, u0, ul)
    if lam == 0.0:
        u0 = (math.sqrt(0.5 * (p + 1.0)) * beta_integral(p, quad) / half) ** (2.0 / (p - 1.0))
        v0 = math.sqrt(2.0 / (p + 1.0)) * u0 ** (0.5 * (p + 1.0))
        return SymmetricData(params, v0, u0, u0)
    sq = math.sqrt(lam)
    theta = 0.5 * h * sq
    target = (1.0 - h) * sq

    def G(logR: float) -> float:
        return phi(math.exp(logR), theta, lam, p, quad) - target

    lo, hi = -5.0, 5.0
    while G(lo) < 0.0:
        lo -= 10.0
        if lo < -700:
            raise BracketError("no small-amplitude bracket", lam=lam, h=h)
    while G(hi) > 0.0:
        hi += 5.0
        if hi > 700:
            raise BracketError("no large-amplitude bracket", lam=lam, h=h)
    R = math.exp(brentq(G, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300))
    ul = R * math.cos(theta)
    v0 = math.sqrt(lam * R * R + 2.0 * ul ** (p + 1.0) / (p + 1.0))
    return SymmetricData(params, v0, R, ul)


def solve_symmetric(params: ProblemParams, quad: QuadratureConfig = DEFAULT_QUAD,
                    flow: FlowConfig = DEFAULT_FLOW, verify: bool = True) -> PositiveSolution:
    """Return the symmetric positive solution, built from the time maps and
    verified by shooting and by the Green fixed-point residual.

    Raises
    ------
    NoSolutionError
        If ``lam >= pi**2``.
    BracketError
        If the time-map equation cannot be bracketed.
    VerificationError
        If ``verify`` and a residual exceeds its threshold (scaled by
        ``max(1, r_max)``).
    """
    data = symmetric_data(params, quad)
    shot = shoot(data.v0, params, flow)
    if shot.candidate is None:
        raise VerificationError(
            f"symmetric construction is not positive (zero at x={shot.zero_crossing})")
    sol = shot.candidate
    if verify:
        _require_verified(sol)
        if sol.symmetry is not Symmetry.SYMMETRIC:
            raise VerificationError("time-map solution failed the symmetry check")
    return sol


# ----------------------------------------------------------- shooting scan


def first_arc_bound(params: ProblemParams, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Largest initial slope whose trajectory stays positive on the left arc.

    The orbit through ``(0, v)`` returns to ``u = 0`` after ``2 T(u0(v))``;
    positive solutions need this to exceed ``(1-h)/2``.
    """
    lam, p, h = params.lam, params.p, params.h
    quarter = 0.25 * (1.0 - h)
    if lam == 0.0:
        u0 = (math.sqrt(0.5 * (p + 1.0)) * beta_integral(p, quad) / quarter) ** (2.0 / (p - 1.0))
        return math.sqrt(2.0 / (p + 1.0)) * u0 ** (0.5 * (p + 1.0))
    if lam < 0.0:
        uh = homoclinic_crossing(lam, p)

        def F(y: float) -> float:
            return time_N_full(lam, p, uh * (1.0 + math.exp(y)), quad) - quarter

        lo = math.log(1e-13)
        if F(lo) < 0.0:
            raise BracketError("first-arc bound below the homoclinic limit", lam=lam, h=h)
        hi = 0.0
        while F(hi) > 0.0:
            hi += 2.0
        u0 = uh * (1.0 + math.exp(brentq(F, lo, hi, xtol=1e-14, rtol=1e-15)))
        return u0 * math.sqrt(_q0(lam, p, u0))

    def G(logu: float) -> float:
        return time_N_full(lam, p, math.exp(logu), quad) - quarter

    lo, hi = -5.0, 5.0
    while G(lo) < 0.0:
        lo -= 10.0
    while G(hi) > 0.0:
        hi += 5.0
    u0 = math.exp(brentq(G, lo, hi, xtol=1e-15, rtol=1e-15))
    return u0 * math.sqrt(_q0(lam, p, u0))


def _safe_residual(v: float, params: ProblemParams, flow: FlowConfig) -> float:
    try:
        return scan_residual(v, params, flow)
    except IntegrationError:
        return math.nan


def _plain(v: float, params: ProblemParams, flow: FlowConfig) -> float:
    try:
        return terminal_state(v, params, flow).u
    except IntegrationError:
        return math.nan


def _refine(a: float, b: float, fa: float, fb: float, params: ProblemParams,
            flow: FlowConfig) -> float:
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b

    def f(v: float) -> float:
        r = _safe_residual(v, params, flow)
        if r != r:
            raise IntegrationError(f"integration failed at v0={v!r}")
        return r

    r = brentq(f, a, b, xtol=1e-14 * max(1.0, b), rtol=1e-15, maxiter=300)
    # the scan residual locates zeros by interpolation; finish on u(1) itself
    for w in (1e-11, 1e-9, 1e-7):
        lo, hi = r * (1.0 - w), r * (1.0 + w)
        ulo, uhi = _plain(lo, params, flow), _plain(hi, params, flow)
        if ulo * uhi < 0.0:
            return brentq(lambda v: terminal_state(v, params, flow).u, lo, hi,
                          xtol=1e-14 * max(1.0, hi), rtol=1e-15, maxiter=300)
    return r


def _scan_roots(a: float, b: float, n: int, params: ProblemParams, flow: FlowConfig,
                depth: int = 0) -> list[float]:
    vs = np.linspace(a, b, n + 1)
    us = np.array([_safe_residual(v, params, flow) for v in vs])
    roots = []
    for i in range(n):
        ua, ub = us[i], us[i + 1]
        if not (math.isfinite(ua) and math.isfinite(ub)):
            continue
        if ua == 0.0:
            roots.append(float(vs[i]))
        if ua * ub < 0.0:
            r = _refine(float(vs[i]), float(vs[i + 1]), ua, ub, params, flow)
            roots.append(r)
            if depth < 2:
                # a cell may hide two further roots next to the one found
                roots.extend(_scan_roots(float(vs[i]), float(vs[i + 1]), 32, params, flow, depth + 1))
    if math.isfinite(us[-1]) and us[-1] == 0.0:
        roots.append(float(vs[-1]))
    roots.extend(_hidden_pairs(vs, us, params, flow))
    return roots


def _hidden_pairs(vs: np.ndarray, us: np.ndarray, params: ProblemParams,
                  flow: FlowConfig) -> list[float]:
    """Roots inside sampled extrema that do not reach zero.

    A negative local maximum (or positive local minimum) of the sampled
    residual may hide a narrow excursion across zero; the extremum is
    located by a bounded Brent search and, if it changes sign, both
    crossings are refined.
    """
    found = []
    for i in range(1, len(vs) - 1):
        a, m, b = us[i - 1], us[i], us[i + 1]
        if not (math.isfinite(a) and math.isfinite(m) and math.isfinite(b)):
            continue
        if m < 0.0 and m > a and m >= b:
            sign = 1.0
        elif m > 0.0 and m < a and m <= b:
            sign = -1.0
        else:
            continue
        lo, hi = float(vs[i - 1]), float(vs[i + 1])

        def g(v: float) -> float:
            r = _safe_residual(v, params, flow)
            return math.inf if r != r else -sign * r

        res = minimize_scalar(g, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * hi, "maxiter": 200})
        ve = float(res.x)
        fe = _safe_residual(ve, params, flow)
        if not sign * fe > 0.0:
            continue
        found.append(_refine(lo, ve, float(a), fe, params, flow))
        found.append(_refine(ve, hi, fe, float(b), params, flow))
    return found


def _slope(v: float, params: ProblemParams, flow: FlowConfig) -> float:
    d = 1e-6 * max(v, 1e-3)
    return (_safe_residual(v + d, params, flow) - _safe_residual(v - d, params, flow)) / (2 * d)


def _split_around(r: float, lo: float, hi: float, params: ProblemParams,
                  flow: FlowConfig) -> list[float]:
    """Roots beside a root ``r`` of the wrong slope sign (``u(1)`` increasing).

    The residual is positive for tiny slopes and, at the first-arc bound,
    the lone symmetric root would have to be a downward crossing; an upward
    crossing therefore forces a root on each side.
    """
    found = []
    for side in (-1.0, 1.0):
        edge = lo if side < 0 else hi
        for k in range(40):
            d = abs(r) * 1e-2 * 0.5 ** k
            x = r + side * d
            if not lo < x < hi:
                continue
            ux = _safe_residual(x, params, flow)
            ue = _safe_residual(edge, params, flow)
            if side * ux > 0.0 and ux * ue < 0.0:
                a, b = (edge, x) if side < 0 else (x, edge)
                fa, fb = (ue, ux) if side < 0 else (ux, ue)
                found.append(_refine(a, b, fa, fb, params, flow))
                break
            if side * ux < 0.0:
                continue
    return found


def find_all_positive(params: ProblemParams, v0_max: float | None = None, n_scan: int = 400,
                      quad: QuadratureConfig = DEFAULT_QUAD,
                      flow: FlowConfig = DEFAULT_FLOW) -> list[PositiveSolution]:
    """Find positive solutions by scanning ``v0 -> u(1)`` on ``(0, v0_max]``.

    Parameters
    ----------
    params : ProblemParams
    v0_max : float, optional
        Upper end of the scan. Defaults to (and is capped at) the first-arc
        bound beyond which no trajectory stays positive on ``[0, (1-h)/2]``.
    n_scan : int
        Number of scan cells, at least 100.

    Returns
    -------
    list of PositiveSolution
        Sorted by ``v0``; asymmetric solutions are completed by their
        reflections when the scan resolves them.
    """
    params.require_solvable()
    if n_scan < 100:
        raise DomainError("n_scan must be at least 100")
    bound = first_arc_bound(params, quad) * (1.0 + 1e-9)
    if v0_max is not None:
        if not v0_max > 0:
            raise DomainError("v0_max must be positive")
        bound = min(bound, v0_max)
    start = bound / (n_scan * 64.0)
    roots = _scan_roots(start, bound, n_scan, params, flow)
    roots = sorted(set(roots))
    extra = []
    for r in roots:
        if _slope(r, params, flow) > 0.0:
            extra.extend(_split_around(r, start, bound, params, flow))
    roots = sorted(set(roots + extra))

    sols: list[PositiveSolution] = []
    for r in roots:
        sol = _accept(r, params, flow)
        if sol is None:
            continue
        if sols and abs(sols[-1].v0 - sol.v0) <= ROOT_TOL * max(1.0, sol.v0):
            continue
        sols.append(sol)
    sols = _complete_pairs(sols, params, flow)
    return sorted(sols, key=lambda s: s.v0)


def _accept(v0: float, params: ProblemParams, flow: FlowConfig) -> PositiveSolution | None:
    try:
        shot = shoot(v0, params, flow)
    except IntegrationError:
        return None
    sol = shot.candidate
    if sol is None:
        return None
    # Brent drives |u(1)| toward ROOT_TOL, but amplification across the
    # window can leave an integration noise floor above it; accept on the
    # verification thresholds instead.
    try:
        _require_verified(sol)
    except VerificationError:
        return None
    return sol


def _is_mirror(s: PositiveSolution, t: PositiveSolution, tol: float = 1e-7) -> bool:
    # either direction may be the better conditioned one
    if s.symmetry is Symmetry.SYMMETRIC or t.symmetry is Symmetry.SYMMETRIC or s is t:
        return False
    a = -s.terminal_slope
    b = -t.terminal_slope
    return (abs(t.v0 - a) <= tol * max(1.0, a)) or (abs(s.v0 - b) <= tol * max(1.0, b))


def _complete_pairs(sols: list[PositiveSolution], params: ProblemParams,
                    flow: FlowConfig) -> list[PositiveSolution]:
    out = list(sols)
    for s in sols:
        if s.symmetry is Symmetry.SYMMETRIC or any(_is_mirror(s, t) for t in out):
            continue
        # the scan missed the mirror image; look for it right where it must be
        target = -s.terminal_slope
        for w in (1e-8, 1e-6, 1e-4):
            a, b = target * (1 - w), target * (1 + w)
            fa, fb = _safe_residual(a, params, flow), _safe_residual(b, params, flow)
            if fa * fb < 0.0:
                cand = _accept(_refine(a, b, fa, fb, params, flow), params, flow)
                if cand is not None and not any(
                        abs(cand.v0 - t.v0) <= ROOT_TOL * max(1.0, t.v0) for t in out):
                    out.append(cand)
                break
    return out


def reflection_pairs(sols: list[PositiveSolution], tol: float = 1e-7) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)``, ``i < j``, with ``sols[j]`` the mirror image of
    ``sols[i]`` (matched on ``v0`` against the other's ``-u'(1)``)."""
    return [(i, j) for i in range(len(sols)) for j in range(i + 1, len(sols))
            if _is_mirror(sols[i], sols[j], tol)]


# --------------------------------------------------------------- reflection


def _reflect_arc(arc: TrajectoryArc) -> TrajectoryArc:
    return TrajectoryArc(arc.regime, 1.0 - arc.x_end, 1.0 - arc.x_start,
                         (1.0 - arc.x)[::-1], arc.u[::-1], -arc.v[::-1])


def reflect(sol: PositiveSolution) -> PositiveSolution:
    """Mirror image ``x -> 1 - x``.

    Symmetric solutions are returned unchanged; the mirror of a mirror is
    the original object.
    """
    if sol.symmetry is Symmetry.SYMMETRIC:
        return sol
    if sol._mirror is not None:
        return sol._mirror
    arcs = tuple(_reflect_arc(a) for a in reversed(sol.arcs))
    sym = (Symmetry.ASYMMETRIC_RIGHT if sol.symmetry is Symmetry.ASYMMETRIC_LEFT
           else Symmetry.ASYMMETRIC_LEFT)
    out = PositiveSolution(params=sol.params, v0=-sol.terminal_slope, arcs=arcs, r_max=sol.r_max,
                           x_max=1.0 - sol.x_max, symmetry=sym, shoot_residual=sol.shoot_residual,
                           fixed_point_residual=0.0, terminal_slope=-sol.v0,
                           energy_drift=sol.energy_drift, _mirror=sol)
    object.__setattr__(out, "fixed_point_residual", fixed_point_residual(out))
    return out


# ---------------------------------------------------------------- landscape


@dataclass(frozen=True)
class PhiLandscape:
    """Critical structure of ``theta -> phi(R, theta)`` on ``[0, pi/2]``."""

    R: float
    epsilon: float
    theta_m: float
    phi_m: float
    theta_M: float
    phi_M: float
    theta_bar: float
    lam: float
    p: float


EPSILON_DEFAULT = 0.05


def _monotone_violation(R: float, a: float, b: float, lam: float, p: float,
                        quad: QuadratureConfig, n: int = 200) -> tuple[float, float] | None:
    th = np.linspace(a, b, n)
    vals = np.array([phi(R, float(t), lam, p, quad) for t in th])
    bad = np.flatnonzero(np.diff(vals) <= 0.0)
    if bad.size:
        return float(th[bad[0]]), float(th[bad[-1] + 1])
    return None


def _build_landscape(R: float, lam: float, p: float, eps: float,
                     quad: QuadratureConfig) -> PhiLandscape:
    if not 0.0 < eps < 0.25 * math.pi:
        raise DomainError("epsilon must lie in (0, pi/4)")
    bad = _monotone_violation(R, eps, HALF_PI - eps, lam, p, quad)
    if bad is not None:
        raise LandscapeError(
            f"R below R*: phi(R, .) is not increasing on [{bad[0]:.6g}, {bad[1]:.6g}] "
            f"within [epsilon, pi/2 - epsilon] (R={R}, epsilon={eps})")

    def f(t: float) -> float:
        return phi(R, t, lam, p, quad)

    def df(t: float) -> float:
        return phi_dtheta(R, t, lam, p, quad)

    # minimum on [0, eps]
    th = np.linspace(0.0, eps, 201)
    vals = np.array([f(float(t)) for t in th])
    i = int(np.argmin(vals))
    if i == 0:
        # the minimum may sit below the first sample spacing
        a, b = 1e-6, float(th[1])
        theta_m = brentq(df, a, b, xtol=1e-15, rtol=1e-15) if df(a) < 0.0 < df(b) else 0.0
    else:
        a = max(float(th[i - 1]), 1e-6)
        b = float(th[min(i + 1, th.size - 1)])
        theta_m = brentq(df, a, b, xtol=1e-15, rtol=1e-15) if df(a) < 0.0 < df(b) else float(th[i])
    phi_m = f(theta_m)

    # maximum on [pi/2 - eps, pi/2)
    th = np.linspace(HALF_PI - eps, HALF_PI, 401)
    vals = np.array([f(float(t)) for t in th])
    peaks = np.flatnonzero((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1
    if peaks.size > 1:
        raise UnsupportedLandscapeError(
            f"phi(R, .) has {peaks.size} interior maxima near pi/2 (R={R})")
    i = int(np.argmax(vals))
    if i == 0:
        raise LandscapeError(
            f"maximum of phi(R, .) lies below pi/2 - epsilon (R={R}, epsilon={eps})")
    a, b = float(th[i - 1]), float(th[i + 1])
    theta_M = brentq(df, a, b, xtol=1e-15, rtol=1e-15)
    phi_M = f(theta_M)
    if not phi_M >= f(HALF_PI - eps) > phi_m:
        raise LandscapeError("landscape ordering phi_M >= phi(pi/2-eps) > phi_m fails")
    theta_bar = brentq(lambda t: f(t) - phi_m, theta_M, HALF_PI, xtol=1e-15, rtol=1e-15)
    return PhiLandscape(R=R, epsilon=eps, theta_m=theta_m, phi_m=phi_m, theta_M=theta_M,
                        phi_M=phi_M, theta_bar=theta_bar, lam=lam, p=p)


def phi_landscape(R: float, lam: float, p: float, epsilon: float | None = None,
                  quad: QuadratureConfig = DEFAULT_QUAD) -> PhiLandscape:
    """Locate ``theta_m, theta_M, theta_bar`` and the levels ``phi_m, phi_M``.

    With ``epsilon=None`` the default 0.05 is tried first and then doubled
    (at most three times) while the increasing-middle check or the location
    of the maximum fails. An explicit ``epsilon`` is used as given.

    Raises
    ------
    LandscapeError
        If ``phi(R, .)`` is not increasing on ``[eps, pi/2 - eps]`` (R too
        small) or the maximum lies outside ``[pi/2 - eps, pi/2)``.
    UnsupportedLandscapeError
        If more than one interior maximum is detected.
    """
    if not lam > 0.0:
        raise DomainError("the landscape requires lambda > 0")
    if epsilon is not None:
        return _build_landscape(R, lam, p, float(epsilon), quad)
    eps = EPSILON_DEFAULT
    first_err: LandscapeError | None = None
    for _ in range(4):
        try:
            return _build_landscape(R, lam, p, eps, quad)
        except UnsupportedLandscapeError:
            raise
        except LandscapeError as exc:
            first_err = first_err or exc
            eps *= 2.0
    assert first_err is not None
    raise first_err


@functools.lru_cache(maxsize=64)
def _branch_check(ls: PhiLandscape, quad: QuadratureConfig) -> None:
    th = np.linspace(ls.theta_m, ls.theta_M, 400)
    up = np.array([phi(ls.R, float(t), ls.lam, ls.p, quad) for t in th])
    if np.any(np.diff(up) <= 0.0):
        raise UnsupportedLandscapeError("phi(R, .) is not increasing on [theta_m, theta_M]")
    th = np.linspace(ls.theta_M, ls.theta_bar, 400)
    down = np.array([phi(ls.R, float(t), ls.lam, ls.p, quad) for t in th])
    if np.any(np.diff(down) >= 0.0):
        raise UnsupportedLandscapeError("phi(R, .) is not decreasing on [theta_M, theta_bar]")


def climb_pair(landscape: PhiLandscape, level: float, lam: float | None = None,
               p: float | None = None, quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[float, float]:
    """Return ``(theta_left, theta_right)`` on either side of the peak with
    ``phi(R, theta) = level``."""
    ls = landscape
    if lam is not None and lam != ls.lam or p is not None and p != ls.p:
        raise DomainError("lambda and p must match the landscape")
    if not ls.phi_m < level < ls.phi_M:
        raise DomainError(f"level {level!r} outside (phi_m, phi_M) = ({ls.phi_m!r}, {ls.phi_M!r})")
    _branch_check(ls, quad)

    def f(t: float) -> float:
        return phi(ls.R, t, ls.lam, ls.p, quad) - level

    left = brentq(f, ls.theta_m, ls.theta_M, xtol=1e-15, rtol=1e-15, maxiter=300)
    right = brentq(f, ls.theta_M, ls.theta_bar, xtol=1e-15, rtol=1e-15, maxiter=300)
    return left, right


# ----------------------------------------------------------------- matching


@dataclass(frozen=True)
class MatchingSolution:
    """Angles ``theta0, theta1`` at the interfaces, window width ``h`` and the
    climbing parameter ``s_hat`` at amplitude ``R``.

    ``matching_residual`` is the largest defect of the two matching
    equations; ``shoot_residual`` is ``|u(1)|`` of the reconstructed
    solution (``nan`` if not reconstructed).
    """

    theta0: float
    theta1: float
    h: float
    R: float
    s_hat: float
    lam: float
    p: float
    matching_residual: float
    shoot_residual: float = float("nan")

    @property
    def residuals(self) -> tuple[float, float]:
        return self.matching_residual, self.shoot_residual

    def swapped(self) -> "MatchingSolution":
        return replace(self, theta0=self.theta1, theta1=self.theta0)


def matching_residual(theta0: float, theta1: float, h: float, R: float, lam: float, p: float,
                      quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    sq = math.sqrt(lam)
    level = (1.0 - h) * sq
    return max(abs(theta0 + theta1 - h * sq), abs(phi(R, theta0, lam, p, quad) - level),
               abs(phi(R, theta1, lam, p, quad) - level))


def solve_matching(lam: float, p: float, R: float, epsilon: float | None = None,
                   quad: QuadratureConfig = DEFAULT_QUAD, flow: FlowConfig = DEFAULT_FLOW,
                   reconstruct: bool = True) -> MatchingSolution:
    """Solve the matching system at amplitude ``R`` by bisection on the
    climbing parameter.

    Raises
    ------
    DomainError
        If ``lam`` is not in ``(pi**2/4, pi**2)``.
    LandscapeError
        If the landscape cannot be built or the end-point sign conditions
        fail ("R too small for lambda").
    """
    if not 0.25 * PI2 < lam < PI2:
        raise DomainError("matching requires pi^2/4 < lambda < pi^2")
    ls = phi_landscape(R, lam, p, epsilon, quad)
    sq = math.sqrt(lam)
    span = ls.phi_M - ls.phi_m

    def g(s: float) -> float:
        if s <= 0.0:
            return ls.theta_m + ls.theta_bar + ls.phi_m - sq
        if s >= 1.0:
            return 2.0 * ls.theta_M + ls.phi_M - sq
        a, b = climb_pair(ls, ls.phi_m + s * span, quad=quad)
        return a + b + phi(R, a, lam, p, quad) - sq

    g0, g1 = g(0.0), g(1.0)
    if not (g0 < 0.0 < g1):
        raise LandscapeError(f"R too small for lambda: g(0)-sqrt(lam)={g0:.3e}, g(1)-sqrt(lam)={g1:.3e}")
    s_hat = brentq(g, 0.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=300)
    th0, th1 = climb_pair(ls, ls.phi_m + s_hat * span, quad=quad)
    h = 1.0 - phi(R, th0, lam, p, quad) / sq
    m = MatchingSolution(theta0=th0, theta1=th1, h=h, R=R, s_hat=s_hat, lam=lam, p=p,
                         matching_residual=matching_residual(th0, th1, h, R, lam, p, quad))
    if reconstruct:
        sol = matching_to_solution(m, lam, p, flow, verify=False)
        m = replace(m, shoot_residual=sol.shoot_residual)
    return m


MATCH_SHOOT_TOL = 1e-6


def matching_to_solution(m: MatchingSolution, lam: float | None = None, p: float | None = None,
                         flow: FlowConfig = DEFAULT_FLOW, verify: bool = True) -> PositiveSolution:
    """Rebuild the trajectory of a matching solution and verify it by shooting.

    The state entering the window is ``(R cos theta0, sqrt(lam) R sin theta0)``;
    ``v0`` is recovered by flowing it backwards across the left arc.
    """
    lam = m.lam if lam is None else lam
    p = m.p if p is None else p
    params = ProblemParams(lam, p, m.h)
    sq = math.sqrt(lam)
    gate = PhaseState(params.x_left, m.R * math.cos(m.theta0), sq * m.R * math.sin(m.theta0))
    back = nonlinear_flow(gate, params.x_left, lam, p, flow, backward=True)
    v0 = back.v
    if not v0 > 0.0:
        raise VerificationError(f"backward flow reached the axis with slope {v0!r}")
    shot = shoot(v0, params, flow)
    if shot.candidate is None:
        raise VerificationError(f"reconstructed trajectory not positive (zero at {shot.zero_crossing})")
    sol = shot.candidate
    if verify:
        sc = residual_scale(m.R / 300.0)
        if not sol.shoot_residual < MATCH_SHOOT_TOL * sc:
            raise VerificationError(f"shoot residual {sol.shoot_residual:.3e} exceeds {MATCH_SHOOT_TOL * sc:.3e}")
        if not params.x_left < sol.x_max < params.x_right:
            raise VerificationError(f"maximum at x={sol.x_max} lies outside the linear window")
        if abs(sol.r_max - m.R) > 1e-3 * m.R:
            raise VerificationError(f"sup norm {sol.r_max} differs from R={m.R} by more than 0.1%")
    return sol


# ---------------------------------------------------------- connection data


@dataclass(frozen=True)
class ConnectionData:
    """Quantities of the asymmetric construction for ``lam < 0``.

    ``u0`` and ``u1`` have turning times ``(1-h)/4`` and ``(1-h)/2``;
    ``u_hat`` is the crossing of the reflected image of the left-arc curve
    with the linear level ``v**2 = -lam (u**2 - u1**2)`` (``nan`` if not
    found) and ``t_link`` the linear time from ``(u1, 0)`` to ``u_hat``.
    """

    lam: float
    p: float
    h: float
    u0: float
    u1: float
    kappa0: float
    kappa1: float
    lower_bound: float
    u_hat: float
    t_link: float


def connection_data(lam: float, p: float, h: float, quad: QuadratureConfig = DEFAULT_QUAD,
                    flow: FlowConfig = DEFAULT_FLOW, n_scan: int = 400) -> ConnectionData:
    if not lam < 0.0:
        raise DomainError("connection data requires lambda < 0")
    params = ProblemParams(lam, p, h)
    uh = homoclinic_crossing(lam, p)
    half = 0.5 * (1.0 - h)

    def amp(target: float) -> float:
        F = lambda y: time_N_full(lam, p, uh * (1.0 + math.exp(y)), quad) - target  # noqa: E731
        lo, hi = math.log(1e-13), 0.0
        if F(lo) < 0.0:
            raise BracketError("turning-time target not reachable", lam=lam, h=h)
        while F(hi) > 0.0:
            hi += 2.0
        return uh * (1.0 + math.exp(brentq(F, lo, hi, xtol=1e-14, rtol=1e-15)))

    u0 = amp(0.5 * half)
    u1 = amp(half)
    scale = (-lam) ** (-1.0 / (p - 1.0))
    v1 = u1 * math.sqrt(_q0(lam, p, u1))
    v0 = u0 * math.sqrt(_q0(lam, p, u0))

    def defect(vs: float) -> float:
        end = nonlinear_flow(PhaseState(0.0, 0.0, vs), half, lam, p, flow)
        return end.v * end.v + lam * (end.u * end.u - u1 * u1)

    vs = np.linspace(v1, v0, n_scan + 1)[1:]
    ds = [defect(float(v)) for v in vs]
    u_hat = math.nan
    for a, b, fa, fb in zip(vs[:-1], vs[1:], ds[:-1], ds[1:]):
        if fa * fb < 0.0:
            root = brentq(defect, float(a), float(b), xtol=1e-14 * b, rtol=1e-15)
            end = nonlinear_flow(PhaseState(0.0, 0.0, root), half, lam, p, flow)
            if end.v < 0.0 and end.u > u1:
                u_hat = end.u
                break
    t_link = time_L_ratio(lam, u_hat / u1) if u_hat == u_hat else math.nan
    return ConnectionData(lam=lam, p=p, h=h, u0=u0, u1=u1, kappa0=u0 * scale, kappa1=u1 * scale,
                          lower_bound=uh, u_hat=u_hat, t_link=t_link)


__all__ = [
    "ConnectionData", "MatchingSolution", "PhiLandscape", "SymmetricData", "climb_pair",
    "connection_data", "find_all_positive", "first_arc_bound", "matching_residual",
    "matching_to_solution", "phi_landscape", "reflect", "reflection_pairs", "solve_matching",
    "solve_symmetric", "symmetric_data",
]
