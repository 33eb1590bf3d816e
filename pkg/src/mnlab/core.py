"""Domain types, the piecewise weight, and the two phase-plane energies.

The boundary-value problem is

    -u'' = lam * u + a_h(x) * u**p,    u(0) = u(1) = 0,

where ``a_h`` equals 1 on the closed outer intervals ``[0, (1-h)/2]`` and
``[(1+h)/2, 1]`` and vanishes on the open window between them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

PI2 = math.pi ** 2


class Regime(str, enum.Enum):
    """Which of the two autonomous systems governs an arc."""

    NONLINEAR = "nonlinear"
    LINEAR = "linear"


class Symmetry(str, enum.Enum):
    """Symmetry class of a positive solution about x = 1/2."""

    SYMMETRIC = "symmetric"
    ASYMMETRIC_LEFT = "asymmetric_left"
    ASYMMETRIC_RIGHT = "asymmetric_right"


@dataclass(frozen=True)
class ProblemParams:
    """Problem identity ``(lam, p, h)``.

    Parameters
    ----------
    lam : float
        Spectral parameter. Values at or above pi**2 are accepted here but
        rejected by every solver.
    p : float
        Exponent of the nonlinearity, ``p > 1``.
    h : float
        Width of the linear window, ``0 < h < 1``.
    """

    lam: float
    p: float
    h: float

    def __post_init__(self) -> None:
        for name in ("lam", "p", "h"):
            val = getattr(self, name)
            if not isinstance(val, (int, float, np.floating, np.integer)) or not math.isfinite(val):
                raise DomainError(f"{name} must be a finite real, got {val!r}")
            object.__setattr__(self, name, float(val))
        if not self.p > 1.0:
            raise DomainError(f"p must exceed 1, got {self.p}")
        if not 0.0 < self.h < 1.0:
            raise DomainError(f"h must lie in (0, 1), got {self.h}")

    @property
    def x_left(self) -> float:
        """Right end of the left nonlinear interval."""
        return 0.5 * (1.0 - self.h)

    @property
    def x_right(self) -> float:
        """Left end of the right nonlinear interval."""
        return 0.5 * (1.0 + self.h)

    @property
    def u_ho(self) -> float | None:
        """u-axis crossing of the homoclinic loop (``lam < 0`` only)."""
        if self.lam >= 0.0:
            return None
        return (-self.lam * (self.p + 1.0) / 2.0) ** (1.0 / (self.p - 1.0))

    @property
    def omega(self) -> float | None:
        """Positive equilibrium of the nonlinear system (``lam < 0`` only)."""
        if self.lam >= 0.0:
            return None
        return (-self.lam) ** (1.0 / (self.p - 1.0))

    def require_solvable(self) -> None:
        """Raise :class:`~mnlab.errors.NoSolutionError` unless ``lam < pi**2``."""
        from .errors import NoSolutionError

        if not self.lam < PI2:
            raise NoSolutionError(
                f"positive solutions require lambda < pi^2 = {PI2:.17g}, got {self.lam:.17g}")

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "p": self.p, "h": self.h}


@dataclass(frozen=True)
class PhaseState:
    """A point ``(x, u, v)`` on a trajectory, with ``v = u'``."""

    x: float
    u: float
    v: float


@dataclass(frozen=True)
class EnergyValue:
    """An energy level tagged with the regime it belongs to."""

    value: float
    regime: Regime


@dataclass(frozen=True, eq=False)
class TrajectoryArc:
    """One regime-homogeneous piece of a trajectory.

    ``x``, ``u`` and ``v`` are read-only float arrays of equal length whose
    first and last entries sit at ``x_start`` and ``x_end``.
    """

    regime: Regime
    x_start: float
    x_end: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        for name in ("x", "u", "v"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.x.shape == self.u.shape == self.v.shape) or self.x.size < 2:
            raise DomainError("arc sample arrays must share a length of at least 2")
        if not self.x_start < self.x_end:
            raise DomainError("arc requires x_start < x_end")

    @property
    def samples(self) -> list[PhaseState]:
        return [PhaseState(float(a), float(b), float(c)) for a, b, c in zip(self.x, self.u, self.v)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrajectoryArc):
            return NotImplemented
        return (self.regime == other.regime and self.x_start == other.x_start
                and self.x_end == other.x_end and np.array_equal(self.x, other.x)
                and np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class PositiveSolution:
    """A verified positive solution.

    Attributes
    ----------
    params : ProblemParams
    v0 : float
        Initial slope ``u'(0)``.
    arcs : tuple of TrajectoryArc
        Nonlinear, linear, nonlinear arcs in increasing ``x``.
    r_max, x_max : float
        Sup norm and a maximizer.
    symmetry : Symmetry
    shoot_residual : float
        ``|u(1)|``.
    fixed_point_residual : float
        Sup-norm defect of the Green fixed-point identity on the samples.
    terminal_slope : float
        ``u'(1)``.
    energy_drift : float
        Worst per-arc relative energy drift along the trajectory.
    """

    params: ProblemParams
    v0: float
    arcs: tuple
    r_max: float
    x_max: float
    symmetry: Symmetry
    shoot_residual: float
    fixed_point_residual: float
    terminal_slope: float = float("nan")
    energy_drift: float = 0.0
    _mirror: object = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.arcs) != 3:
            raise DomainError("a positive solution has exactly three arcs")
        object.__setattr__(self, "arcs", tuple(self.arcs))

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Concatenated ``(x, u, v)`` samples; interface points appear twice."""
        return (np.concatenate([a.x for a in self.arcs]),
                np.concatenate([a.u for a in self.arcs]),
                np.concatenate([a.v for a in self.arcs]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PositiveSolution):
            return NotImplemented
        return (self.params == other.params and self.v0 == other.v0
                and self.arcs == other.arcs and self.r_max == other.r_max
                and self.x_max == other.x_max and self.symmetry == other.symmetry
                and self.shoot_residual == other.shoot_residual
                and self.fixed_point_residual == other.fixed_point_residual)

    __hash__ = None  # type: ignore[assignment]


def weight(x: float, params: ProblemParams) -> float:
    """Return ``a_h(x)``: 1 on the closed outer intervals, 0 in the window."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    return 0.0 if params.x_left < x < params.x_right else 1.0


def weight_array(x: Sequence[float] | np.ndarray, params: ProblemParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    return np.where((x > params.x_left) & (x < params.x_right), 0.0, 1.0)


def energy_linear(u: float, v: float, lam: float) -> float:
    """Energy ``v**2/2 + lam*u**2/2`` of the linear system."""
    return 0.5 * v * v + 0.5 * lam * u * u


def energy_nonlinear(u: float, v: float, params: ProblemParams) -> float:
    """Energy ``v**2/2 + lam*u**2/2 + u**(p+1)/(p+1)`` of the nonlinear system."""
    if u < 0.0:
        raise DomainError(f"u must be non-negative, got {u}")
    p = params.p
    return energy_linear(u, v, params.lam) + u ** (p + 1.0) / (p + 1.0)


def energy(u: float, v: float, params: ProblemParams, regime: Regime) -> EnergyValue:
    if regime is Regime.NONLINEAR:
        return EnergyValue(energy_nonlinear(u, v, params), regime)
    return EnergyValue(energy_linear(u, v, params.lam), regime)
