"""Quadrature for integrands with inverse-square-root endpoint singularities.

Two independent routes are provided:

* :func:`integrate_endpoint_singular` takes an arbitrary callback, removes the
  endpoint singularity with ``s = b - t**2`` and runs adaptive 21-point
  Gauss-Kronrod on the smooth transformed integrand.
* :func:`timemap` evaluates the fixed rational-power family used by every
  time map with a tanh-sinh rule in the same ``t`` variable, computing
  ``1 - s**2`` and ``1 - s**(p+1)`` without cancellation. It runs in the
  compiled kernel when available.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError

_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525634718, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338])

# full symmetric 21-point rule on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GW = np.zeros(21)
_GW[1:10:2] = _WG
_GW[11:20:2] = _WG[::-1]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for both quadrature routes.

    ``max_levels`` bounds the bisection depth of the adaptive Gauss-Kronrod
    route and the number of step halvings of the tanh-sinh route.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_levels: int = 12

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_levels) != self.max_levels or self.max_levels < 1:
            raise DomainError("max_levels must be an integer >= 1")


DEFAULT_QUAD = QuadratureConfig()


def _gk21(g: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    vals = np.empty(21)
    for i, xi in enumerate(_NODES):
        vals[i] = g(c + r * xi)
    k = r * float(_KW @ vals)
    gauss = r * float(_GW @ vals)
    return k, abs(k - gauss)


def _adaptive(g: Callable[[float], float], lo: float, hi: float, cfg: QuadratureConfig) -> tuple[float, float]:
    val, err = _gk21(g, lo, hi)
    heap = [(-err, lo, hi, val, 0)]
    total, total_err = val, err
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        neg_err, a, b, v, depth = heapq.heappop(heap)
        if depth >= cfg.max_levels:
            heapq.heappush(heap, (neg_err, a, b, v, depth))
            raise ConvergenceError(
                f"adaptive quadrature did not converge within {cfg.max_levels} levels",
                estimate=total, error_bound=total_err)
        m = 0.5 * (a + b)
        v1, e1 = _gk21(g, a, m)
        v2, e2 = _gk21(g, m, b)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, a, m, v1, depth + 1))
        heapq.heappush(heap, (-e2, m, b, v2, depth + 1))
    # re-sum to shed accumulated rounding from the running updates
    total = math.fsum(item[3] for item in heap)
    return total, total_err


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(s: float) -> float:
        val = float(f(s))
        if not math.isfinite(val):
            raise DomainError(f"integrand is not finite at interior node s={s!r} (value {val!r})")
        return val
    return wrapped


def integrate_endpoint_singular(f: Callable[[float], float], a: float, b: float,
                                cfg: QuadratureConfig = DEFAULT_QUAD,
                                singular_left: bool = False,
                                return_error: bool = False):
    """Integrate ``f`` over ``[a, b]`` allowing ``|b - s|**-1/2`` blow-up.

    Parameters
    ----------
    f : callable
        Scalar integrand. It is never evaluated at ``a`` or ``b``.
    a, b : float
        Integration limits, ``a < b``.
    cfg : QuadratureConfig
    singular_left : bool
        Also treat ``a`` as an inverse-square-root singularity.
    return_error : bool
        Return ``(value, error_estimate)`` instead of the value.

    Raises
    ------
    DomainError
        If ``a >= b`` or ``f`` is not finite at a quadrature node.
    ConvergenceError
        If the tolerance is not met within ``cfg.max_levels`` bisections.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    fc = _checked(f)
    split = 0.5 * (a + b) if singular_left else a

    def right(t: float) -> float:
        s = b - t * t
        te = math.sqrt(b - s)
        return 2.0 * te * fc(s) if te > 0.0 else 0.0

    val, err = _adaptive(right, 0.0, math.sqrt(b - split), cfg)
    if singular_left:
        def left(t: float) -> float:
            s = a + t * t
            te = math.sqrt(s - a)
            return 2.0 * te * fc(s) if te > 0.0 else 0.0

        v2, e2 = _adaptive(left, 0.0, math.sqrt(split - a), cfg)
        val += v2
        err += e2
    return (val, err) if return_error else val


def timemap(lo: float, a0: float, a2: float, ap: float, p: float, *,
            n0: float = 1.0, n1: float = 0.0, kpow: float = 0.5, q0: float | None = None,
            cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Evaluate ``int_lo^1 (n0 + n1 w(s)) / Q(s)**kpow ds``.

    Here ``w(s) = 1 - s**(p+1)`` and ``Q(s) = a0 + a2 (1 - s**2) + ap w(s)``.
    ``kpow`` must be 0.5 or 1.5. ``Q`` must stay positive on ``(lo, 1)``.
    ``q0`` is ``Q(0)``; pass it when ``a0 + a2 + ap`` suffers cancellation.
    """
    if kpow not in (0.5, 1.5):
        raise DomainError("kpow must be 0.5 or 1.5")
    if not 0.0 <= lo < 1.0:
        raise DomainError(f"lower limit must lie in [0, 1), got {lo}")
    if q0 is None:
        q0 = a0 + a2 + ap
    val, err, _, status = _backend.timemap_integral(
        float(lo), float(a0), float(a2), float(ap), float(q0), float(p), float(n0), float(n1),
        float(kpow), cfg.abs_tol, cfg.rel_tol, int(cfg.max_levels))
    if status == 2:
        raise DomainError(
            f"time-map integrand not real at interior node t={err!r} "
            f"(a0={a0!r}, a2={a2!r}, ap={ap!r}, lo={lo!r})")
    if status == 1:
        raise ConvergenceError("tanh-sinh quadrature did not converge",
                               estimate=float(val), error_bound=float(err))
    return float(val)


def beta_integral(p: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Return ``int_0^1 ds / sqrt(1 - s**(p+1))`` for ``p > 1``.

    Equals ``B(1/(p+1), 1/2) / (p+1)``.
    """
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p}")
    return timemap(0.0, 0.0, 0.0, 1.0, p, cfg=cfg)
