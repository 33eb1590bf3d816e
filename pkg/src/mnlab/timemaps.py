"""Time-of-flight maps of the nonlinear and linear phase-plane systems.

Nonlinear system ``u' = v, v' = -lam u - u**p``; linear system
``u' = v, v' = -lam u``. Every nonlinear time map reduces to one member of
the family evaluated by :func:`mnlab.quadrature.timemap`; the linear ones
have closed forms, each paired here with an independent quadrature route.

The rescaled map ``phi(R, theta)`` is evaluated in the form

    phi = 2 c int_0^1 ds / sqrt(1 - c**2 s**2 + kappa c**(p+1) (1 - s**(p+1)))

with ``c = cos(theta)`` and ``kappa = 2 R**(p-1) / (lam (p+1))``, which is
algebraically identical to the secant form and stays finite at
``theta = pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ConvergenceError, DomainError
from .quadrature import DEFAULT_QUAD, QuadratureConfig, beta_integral, integrate_endpoint_singular, timemap

HALF_PI = 0.5 * math.pi
THETA_DERIV_MIN = 1e-6


@dataclass(frozen=True)
class TimeMapPoint:
    """A nonlinear time map sampled at amplitude ``u0``."""

    u0: float
    time: float

    def __post_init__(self) -> None:
        if not self.time > 0:
            raise DomainError("time must be positive")


@dataclass(frozen=True)
class PhiValue:
    """``phi(R, theta)`` at one point."""

    R: float
    theta: float
    value: float


def _kappa(u: float, p: float) -> float:
    return 2.0 * u ** (p - 1.0) / (p + 1.0)


def homoclinic_crossing(lam: float, p: float) -> float:
    """u-axis crossing of the zero-energy loop, ``(-lam (p+1)/2)**(1/(p-1))``."""
    if lam >= 0.0:
        raise DomainError("homoclinic crossing requires lambda < 0")
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    return (-lam * (p + 1.0) / 2.0) ** (1.0 / (p - 1.0))


def equilibrium(lam: float, p: float) -> float:
    """Positive equilibrium ``(-lam)**(1/(p-1))`` of the nonlinear system."""
    if lam >= 0.0:
        raise DomainError("equilibrium requires lambda < 0")
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    return (-lam) ** (1.0 / (p - 1.0))


def _check_amplitude(lam: float, p: float, u0: float) -> None:
    if not p > 1.0:
        raise DomainError("p must exceed 1")
    if lam < 0.0:
        uh = homoclinic_crossing(lam, p)
        if not u0 > uh:
            raise DomainError(f"u0={u0!r} must exceed the homoclinic crossing {uh!r}")
    elif not u0 > 0.0:
        raise DomainError(f"u0 must be positive, got {u0!r}")


def _q0(lam: float, p: float, u0: float) -> float:
    # lam + 2 u0**(p-1)/(p+1) written without cancellation near the homoclinic crossing
    if lam < 0.0:
        return -lam * math.expm1((p - 1.0) * math.log(u0 / homoclinic_crossing(lam, p)))
    return lam + _kappa(u0, p)


def time_N_full(lam: float, p: float, u0: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Time from the v-axis to the turning point ``(u0, 0)``.

    Strictly decreasing in ``u0``; diverges as ``u0`` approaches the
    homoclinic crossing when ``lam < 0``.
    """
    _check_amplitude(lam, p, u0)
    return timemap(0.0, 0.0, lam, _kappa(u0, p), p, q0=_q0(lam, p, u0), cfg=cfg)


def time_N_partial(lam: float, p: float, u0: float, u_l: float,
                   cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Time from ``u = u_l`` to the turning point ``(u0, 0)``."""
    _check_amplitude(lam, p, u0)
    if not 0.0 <= u_l < u0:
        raise DomainError(f"need 0 <= u_l < u0, got u_l={u_l!r}, u0={u0!r}")
    return timemap(u_l / u0, 0.0, lam, _kappa(u0, p), p, q0=_q0(lam, p, u0), cfg=cfg)


def time_N_from_axis(lam: float, p: float, u_omega: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Time from the v-axis to the point of abscissa ``u_omega`` on the
    unstable manifold ``v = sqrt(-lam) u`` of the origin."""
    if lam >= 0.0:
        raise DomainError("time_N_from_axis requires lambda < 0")
    if not u_omega > 0.0:
        raise DomainError("u_omega must be positive")
    return timemap(0.0, -lam, lam, _kappa(u_omega, p), p, q0=_kappa(u_omega, p), cfg=cfg)


def unstable_crossing(lam: float, p: float, u_plus: float) -> float:
    """Abscissa where the orbit with turning point ``u_plus`` meets ``v = sqrt(-lam) u``."""
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    uh = homoclinic_crossing(lam, p)
    if not u_plus > uh:
        raise DomainError(f"u_plus={u_plus!r} must exceed the homoclinic crossing {uh!r}")
    # 1 + (p+1) lam u^(1-p) / 2 = 1 - (uh/u)^(p-1), kept accurate near uh
    ratio = (-math.expm1((p - 1.0) * math.log(uh / u_plus))) ** (1.0 / (p + 1.0))
    return u_plus * ratio


def time_N_unstable_to_axis(lam: float, p: float, u_plus: float,
                            cfg: QuadratureConfig = DEFAULT_QUAD) -> tuple[float, float]:
    """Return ``(u_omega, time)`` for the piece of orbit from the unstable
    manifold crossing to the turning point ``(u_plus, 0)``."""
    u_om = unstable_crossing(lam, p, u_plus)
    return u_om, time_N_partial(lam, p, u_plus, u_om, cfg=cfg)


def time_L_hyperbolic(lam: float, u_plus: float, u_l: float) -> float:
    """Linear-system time from ``(u_plus, 0)`` out to abscissa ``u_l``."""
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    if not 0.0 < u_plus < u_l:
        if u_plus > 0.0 and u_l == u_plus:
            return 0.0
        raise DomainError(f"need 0 < u_plus < u_l, got {u_plus!r}, {u_l!r}")
    return math.acosh(u_l / u_plus) / math.sqrt(-lam)


def time_L_hyperbolic_quadrature(lam: float, u_plus: float, u_l: float,
                                 cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Quadrature route for :func:`time_L_hyperbolic`.

    Integrates ``du / sqrt(-lam (u**2 - u_plus**2))`` after ``u = u_plus / s``.
    """
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    if not 0.0 < u_plus < u_l:
        raise DomainError(f"need 0 < u_plus < u_l, got {u_plus!r}, {u_l!r}")
    k = math.sqrt(-lam)

    def f(s: float) -> float:
        return 1.0 / (s * k * math.sqrt((1.0 - s) * (1.0 + s)))

    return integrate_endpoint_singular(f, u_plus / u_l, 1.0, cfg)


def time_L_ratio(lam: float, ratio: float) -> float:
    """Linear time between ``(u1, 0)`` and abscissa ``ratio * u1``."""
    return time_L_hyperbolic(lam, 1.0, ratio)


def time_L_to_axis(lam: float, u_r: float, v_minus: float) -> float:
    """Linear-system time from the v-axis point ``(0, v_minus)`` to abscissa
    ``u_r`` (traversed backwards). Uses ``|v_minus|``."""
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    if u_r < 0.0 or not v_minus < 0.0:
        raise DomainError("need u_r >= 0 and v_minus < 0")
    k = math.sqrt(-lam)
    return math.asinh(k * u_r / abs(v_minus)) / k


def time_L_to_axis_quadrature(lam: float, u_r: float, v_minus: float,
                              cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Quadrature route for :func:`time_L_to_axis`: ``int_0^u_r du / sqrt(v**2 - lam u**2)``."""
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    if u_r < 0.0 or not v_minus < 0.0:
        raise DomainError("need u_r >= 0 and v_minus < 0")
    if u_r == 0.0:
        return 0.0
    vv = v_minus * v_minus
    return integrate_endpoint_singular(lambda u: 1.0 / math.sqrt(vv - lam * u * u), 0.0, u_r, cfg)


def _g_inverse(target: float, kind: str) -> float:
    """Invert ``g(s) = ln(s + sqrt(s**2 -+ 1))`` by safeguarded Newton.

    ``kind='cosh'`` uses the minus sign (domain ``s >= 1``), ``'sinh'`` the
    plus sign (``s >= 0``).
    """
    if target < 0.0:
        raise DomainError("g-inverse target must be non-negative")
    if kind == "cosh":
        def g(s):
            return math.log(s + math.sqrt((s - 1.0) * (s + 1.0)))

        def dg(s):
            return 1.0 / math.sqrt((s - 1.0) * (s + 1.0))
        lo = 1.0
    else:
        def g(s):
            return math.log(s + math.sqrt(s * s + 1.0))

        def dg(s):
            return 1.0 / math.sqrt(s * s + 1.0)
        lo = 0.0
    if target == 0.0:
        return lo
    hi = lo + 1.0
    while g(hi) < target:
        hi = lo + 2.0 * (hi - lo)
    s = 0.5 * (lo + hi)
    for _ in range(200):
        r = g(s) - target
        if r > 0.0:
            hi = s
        else:
            lo = s
        if r == 0.0:
            return s
        d = dg(s)
        step = r / d if math.isfinite(d) and d > 0.0 else math.inf
        cand = s - step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        if abs(cand - s) <= 4.0 * 2.2e-16 * abs(cand):
            return cand
        s = cand
    return s


def _check_lh(lam: float, h: float) -> None:
    if lam >= 0.0:
        raise DomainError("requires lambda < 0")
    if not 0.0 < h <= 1.0:
        raise DomainError(f"h must lie in (0, 1], got {h!r}")


def linear_gate_ratio(lam: float, h: float) -> float:
    """Ratio ``C = u_l / u_plus > 1`` for which the linear half-crossing takes ``h/2``."""
    _check_lh(lam, h)
    return _g_inverse(0.5 * h * math.sqrt(-lam), "cosh")


def cone_slope(lam: float, h: float) -> float:
    """Slope ``m_h = sqrt(|lam| (D(h) + 1))`` with ``D(h) = g^{-1}(sqrt|lam| h)**-2``.

    Analytically equal to ``sqrt|lam| coth(sqrt|lam| h)``.
    """
    _check_lh(lam, h)
    s = _g_inverse(math.sqrt(-lam) * h, "sinh")
    return math.sqrt(-lam * (s ** -2 + 1.0))


def time_N_from_line(lam: float, p: float, u_line: float, theta: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Nonlinear time from the v-axis to ``u_line`` (``lam > 0``), where the
    orbit reaches ``u_line`` with slope ``sqrt(lam) u_line tan(theta)``.

    This is the half-width of the outer interval for a symmetric solution
    whose linear arc has polar half-angle ``theta``.
    """
    if lam <= 0.0:
        raise DomainError("requires lambda > 0")
    if not 0.0 <= theta < HALF_PI:
        raise DomainError("theta must lie in [0, pi/2)")
    if not u_line > 0.0:
        raise DomainError("u_line must be positive")
    tan2 = math.tan(theta) ** 2
    return timemap(0.0, tan2, 1.0, 2.0 * u_line ** (p - 1.0) / (lam * (p + 1.0)), p,
                   cfg=cfg) / math.sqrt(lam)


def scaled_time(lam: float, R: float, theta: float, p: float,
                cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``S(lam, R, theta)``: :func:`time_N_from_line` at ``u_line = R cos(theta)``."""
    return time_N_from_line(lam, p, R * math.cos(theta), theta, cfg=cfg)


def _check_phi(R: float, theta: float, lam: float, p: float) -> None:
    if not R > 0.0:
        raise DomainError("R must be positive")
    if not 0.0 <= theta <= HALF_PI:
        raise DomainError("theta must lie in [0, pi/2]")
    if not lam > 0.0:
        raise DomainError("phi requires lambda > 0")
    if not p > 1.0:
        raise DomainError("p must exceed 1")


def _phi_coeffs(R: float, theta: float, lam: float, p: float) -> tuple[float, float, float, float]:
    c = math.cos(theta)
    kap = 2.0 * R ** (p - 1.0) / (lam * (p + 1.0))
    return c, math.sin(theta) ** 2, c * c, kap * c ** (p + 1.0)


def phi(R: float, theta: float, lam: float, p: float,
        cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Rescaled time map ``phi(R, theta)``; zero at ``theta = pi/2``."""
    _check_phi(R, theta, lam, p)
    if theta == HALF_PI:
        return 0.0
    c, a0, a2, ap = _phi_coeffs(R, theta, lam, p)
    return 2.0 * c * timemap(0.0, a0, a2, ap, p, cfg=cfg)


def phi_dtheta(R: float, theta: float, lam: float, p: float,
               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Partial derivative of :func:`phi` in ``theta``.

    Computed as

        2 sin(theta) int_0^1 (((p-1)/2) kappa c**(p+1) w - 1) / Q**1.5 ds

    with ``w = 1 - s**(p+1)`` and ``Q`` the radicand of :func:`phi`. Equals
    -2 at ``theta = pi/2``. Refused below ``theta = 1e-6``.
    """
    _check_phi(R, theta, lam, p)
    if theta < THETA_DERIV_MIN:
        raise DomainError(f"phi_dtheta is not evaluated below theta={THETA_DERIV_MIN}")
    if theta == HALF_PI:
        return -2.0
    c, a0, a2, ap = _phi_coeffs(R, theta, lam, p)
    val = timemap(0.0, a0, a2, ap, p, n0=-1.0, n1=0.5 * (p - 1.0) * ap, kpow=1.5, cfg=cfg)
    return 2.0 * math.sin(theta) * val


def phi_asymptotic(R: float, theta: float, lam: float, p: float) -> float:
    """Large-``R`` profile ``R**(-(p-1)/2) sqrt(2 lam (p+1) / c**(p-1)) I_p``.

    ``I_p`` is :func:`~mnlab.quadrature.beta_integral`.
    """
    if not 0.0 <= theta < HALF_PI:
        raise DomainError("theta must lie in [0, pi/2)")
    c = math.cos(theta)
    return R ** (-0.5 * (p - 1.0)) * math.sqrt(2.0 * lam * (p + 1.0) / c ** (p - 1.0)) * beta_integral(p)


def phi_dtheta_asymptotic(R: float, theta: float, lam: float, p: float) -> float:
    """Derivative in ``theta`` of :func:`phi_asymptotic`."""
    if not 0.0 <= theta < HALF_PI:
        raise DomainError("theta must lie in [0, pi/2)")
    c = math.cos(theta)
    return (R ** (-0.5 * (p - 1.0)) * 0.5 * (p - 1.0) * math.sin(theta)
            * math.sqrt(2.0 * lam * (p + 1.0) / c ** (p + 1.0)) * beta_integral(p))


def phi_curve(R: float, thetas: Iterable[float], lam: float, p: float,
              cfg: QuadratureConfig = DEFAULT_QUAD) -> list[PhiValue]:
    return [PhiValue(R, float(t), phi(R, float(t), lam, p, cfg)) for t in thetas]


def time_map_curve(lam: float, p: float, amplitudes: Iterable[float],
                   cfg: QuadratureConfig = DEFAULT_QUAD) -> list[TimeMapPoint]:
    return [TimeMapPoint(float(u), time_N_full(lam, p, float(u), cfg)) for u in amplitudes]


def safe_time_N_full(lam: float, p: float, u0: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """:func:`time_N_full` that reports an unconverged quadrature by its best estimate.

    Used only inside root brackets where the sign, not the last digit, matters.
    """
    try:
        return time_N_full(lam, p, u0, cfg)
    except ConvergenceError as exc:
        return exc.estimate
