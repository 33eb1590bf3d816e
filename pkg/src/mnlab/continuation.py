"""Parameter studies built on the solvers.

Sweeps in ``lam``, blow-up tables in ``h``, metasolution sequences and
empirical thresholds. Independent points run on a thread pool; the compiled
kernels release the GIL so this gives real parallelism. ``MNLAB_THREADS``
caps the number of workers.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
from scipy.optimize import brentq

from .core import PI2, ProblemParams, Symmetry
from .errors import (DomainError, LandscapeError, MNLabError, NumericalError,
                     ThresholdNotFoundError)
from .quadrature import DEFAULT_QUAD, QuadratureConfig
from .shooting import DEFAULT_FLOW, FlowConfig, sample_function
from .solvers import (FIXED_POINT_TOL, SHOOT_TOL, find_all_positive, residual_scale,
                      solve_matching, solve_symmetric, symmetric_data)

logger = logging.getLogger(__name__)

AMPLITUDE_GUARD = 1e12

T = TypeVar("T")
R_ = TypeVar("R_")


def worker_count(requested: int | None = None) -> int:
    """Number of workers: ``requested`` (default: CPU count) capped by
    ``MNLAB_THREADS`` when set."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    env = os.environ.get("MNLAB_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"MNLAB_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise DomainError("MNLAB_THREADS must be at least 1")
        n = min(n, cap)
    return max(1, n)


def parallel_map(fn: Callable[[T], R_], items: Sequence[T], workers: int | None = None) -> list[R_]:
    """Order-preserving map over a thread pool."""
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    h: float
    p: float
    r_max: float
    v0: float
    symmetry: Symmetry
    shoot_residual: float
    fixed_point_residual: float

    @property
    def residuals(self) -> tuple[float, float]:
        return self.shoot_residual, self.fixed_point_residual

    @property
    def verified(self) -> bool:
        sc = residual_scale(self.r_max)
        return self.shoot_residual < SHOOT_TOL * sc and self.fixed_point_residual < FIXED_POINT_TOL * sc

    @classmethod
    def from_solution(cls, sol) -> "BranchPoint":
        pr = sol.params
        return cls(lam=pr.lam, h=pr.h, p=pr.p, r_max=sol.r_max, v0=sol.v0, symmetry=sol.symmetry,
                   shoot_residual=sol.shoot_residual, fixed_point_residual=sol.fixed_point_residual)


@dataclass(frozen=True)
class PointFailure:
    lam: float
    h: float
    reason: str


@dataclass(frozen=True)
class SweepResult:
    """Branch points sorted by ``(lam, v0)`` plus the points that failed.

    Iterating, indexing and ``len`` act on ``points``.
    """

    points: tuple[BranchPoint, ...]
    failures: tuple[PointFailure, ...] = ()

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def symmetric(self) -> list[BranchPoint]:
        return [b for b in self.points if b.symmetry is Symmetry.SYMMETRIC]


def _sweep_point(lam: float, p: float, h: float, asymmetric: bool, quad: QuadratureConfig,
                 flow: FlowConfig) -> tuple[list[BranchPoint], PointFailure | None]:
    params = ProblemParams(lam, p, h)
    try:
        sym = solve_symmetric(params, quad, flow)
    except MNLabError as exc:
        return [], PointFailure(lam, h, f"{type(exc).__name__}: {exc}")
    out = [BranchPoint.from_solution(sym)]
    if asymmetric:
        try:
            for s in find_all_positive(params, quad=quad, flow=flow):
                if s.symmetry is not Symmetry.SYMMETRIC:
                    out.append(BranchPoint.from_solution(s))
        except MNLabError as exc:
            return out, PointFailure(lam, h, f"asymmetric scan: {type(exc).__name__}: {exc}")
    return out, None


def sweep_lambda(p: float, h: float, lambda_grid: Iterable[float], asymmetric: bool = True,
                 quad: QuadratureConfig = DEFAULT_QUAD, flow: FlowConfig = DEFAULT_FLOW,
                 workers: int | None = None) -> SweepResult:
    """Solve the symmetric branch at every ``lam`` in the grid and append the
    asymmetric solutions found by the shooting scan.

    Failed points are recorded in ``failures`` and the sweep continues.
    """
    grid = sorted(float(x) for x in lambda_grid)
    if not grid:
        raise DomainError("lambda grid is empty")
    if grid[-1] >= PI2:
        raise DomainError(f"every lambda must be below pi^2, got {grid[-1]}")
    ProblemParams(grid[0], p, h)
    results = parallel_map(lambda lam: _sweep_point(lam, p, h, asymmetric, quad, flow), grid, workers)
    points: list[BranchPoint] = []
    failures: list[PointFailure] = []
    for pts, fail in results:
        points.extend(pts)
        if fail is not None:
            logger.warning("sweep point lambda=%r failed: %s", fail.lam, fail.reason)
            failures.append(fail)
    points.sort(key=lambda b: (b.lam, b.v0))
    return SweepResult(tuple(points), tuple(failures))


# ------------------------------------------------------------------ blow-up


@dataclass(frozen=True)
class BlowupTable:
    """``values[i, j] = u_{h_i}(x_j)``; ``r_max[i]`` is the sup norm.

    Rows stop at the last ``h`` that solved; ``failure`` names the first
    ``h`` that did not, if any.
    """

    lam: float
    p: float
    h_grid: tuple[float, ...]
    x_probes: tuple[float, ...]
    values: np.ndarray
    r_max: np.ndarray
    failure: str | None = None

    def column(self, x: float) -> np.ndarray:
        return self.values[:, self.x_probes.index(x)]


def blowup_study(lam: float, p: float, h_grid: Sequence[float], x_probes: Sequence[float],
                 quad: QuadratureConfig = DEFAULT_QUAD, flow: FlowConfig = DEFAULT_FLOW) -> BlowupTable:
    hs = tuple(float(h) for h in h_grid)
    xs = tuple(float(x) for x in x_probes)
    if not hs or any(b <= a for a, b in zip(hs, hs[1:])):
        raise DomainError("h_grid must be non-empty and strictly increasing")
    if not xs or any(not 0.0 < x < 1.0 for x in xs):
        raise DomainError("probes must lie in (0, 1)")
    if not lam < PI2:
        raise DomainError("blow-up study requires lambda < pi^2")
    rows, amps = [], []
    failure = None
    for h in hs:
        try:
            sol = solve_symmetric(ProblemParams(lam, p, h), quad, flow)
        except MNLabError as exc:
            last = hs[len(rows) - 1] if rows else None
            failure = f"h={h!r}: {type(exc).__name__}: {exc} (last solved h={last!r})"
            logger.warning("blow-up study stopped: %s", failure)
            break
        if sol.r_max > AMPLITUDE_GUARD:
            failure = f"h={h!r}: amplitude {sol.r_max:.3e} above guard {AMPLITUDE_GUARD:.0e}"
            break
        rows.append(sample_function(sol)(np.array(xs)))
        amps.append(sol.r_max)
    vals = np.array(rows).reshape(len(rows), len(xs))
    return BlowupTable(lam=float(lam), p=float(p), h_grid=hs[:len(rows)], x_probes=xs,
                       values=vals, r_max=np.array(amps), failure=failure)


# ------------------------------------------------------------- metasolution


@dataclass(frozen=True)
class SequenceRow:
    n: int
    h: float
    lam: float
    r_max: float
    sup_error: float


def _amplitude(lam: float, p: float, h: float, quad: QuadratureConfig) -> float:
    return symmetric_data(ProblemParams(lam, p, h), quad).amplitude


def metasolution_sequence(alpha: float, p: float, n_max: int,
                          quad: QuadratureConfig = DEFAULT_QUAD,
                          flow: FlowConfig = DEFAULT_FLOW) -> list[SequenceRow]:
    """Symmetric solutions of amplitude ``alpha`` with ``h_n -> 1``, ``lam_n -> pi^2``.

    ``h_n`` starts at ``1 - 1/(2n)`` and moves toward 1 until the amplitude at
    ``lam = pi^2 - 1/n`` exceeds ``alpha``; ``lam_n`` then solves
    ``r_max = alpha`` on ``(pi^2 - 1/n, pi^2)``. ``sup_error`` is
    ``max |u - alpha sin(pi x)|`` over the trajectory samples.
    The list is truncated at the first failure.
    """
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    rows: list[SequenceRow] = []
    h_prev = 0.0
    for n in range(1, n_max + 1):
        try:
            # stay as far from h = 1 as the construction allows; conditioning
            # worsens as lam_n approaches pi^2
            h = max(1.0 - 0.5 / n, h_prev + 1e-3 * (1.0 - h_prev))
            lo = PI2 - 1.0 / n
            while _amplitude(lo, p, h, quad) < alpha:
                h = 1.0 - 0.5 * (1.0 - h)
                if 1.0 - h < 1e-12:
                    raise NumericalError("no h below 1 reaches the amplitude")
            hi = PI2 * (1.0 - 1e-15)
            if _amplitude(hi, p, h, quad) > alpha:
                raise NumericalError("amplitude stays above alpha up to pi^2")
            lam = brentq(lambda l: _amplitude(l, p, h, quad) - alpha, lo, hi,
                         xtol=1e-14, rtol=1e-15, maxiter=300)
            sol = solve_symmetric(ProblemParams(lam, p, h), quad, flow)
        except MNLabError as exc:
            logger.warning("metasolution sequence truncated at n=%d: %s", n, exc)
            break
        x, u, _ = sol.stacked()
        err = float(np.max(np.abs(u - alpha * np.sin(math.pi * x))))
        rows.append(SequenceRow(n=n, h=h, lam=lam, r_max=sol.r_max, sup_error=err))
        h_prev = h
    return rows


# --------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class ThresholdEstimate:
    """An empirical threshold bracketed in ``[lower, upper]``.

    ``value`` is the midpoint; no exact reference value exists.
    """

    value: float
    lower: float
    upper: float
    kind: str
    notes: tuple[str, ...] = field(default=())

    @property
    def resolution(self) -> float:
        return self.upper - self.lower

    def __float__(self) -> float:
        return self.value


def _count(lam: float, p: float, h: float, n_scan: int, quad: QuadratureConfig,
           flow: FlowConfig) -> int:
    return len(find_all_positive(ProblemParams(lam, p, h), n_scan=n_scan, quad=quad, flow=flow))


def estimate_pitchfork(p: float, h: float, lambda_lo: float, lambda_hi: float,
                       resolution: float = 1e-3, n_scan: int = 400,
                       quad: QuadratureConfig = DEFAULT_QUAD,
                       flow: FlowConfig = DEFAULT_FLOW) -> ThresholdEstimate:
    """Bisect on whether the scan finds at least three positive solutions.

    Raises
    ------
    ThresholdNotFoundError
        If the count does not change between ``lambda_lo`` and ``lambda_hi``.
    """
    if not lambda_lo < lambda_hi < PI2:
        raise DomainError("need lambda_lo < lambda_hi < pi^2")
    multi = lambda lam: _count(lam, p, h, n_scan, quad, flow) >= 3  # noqa: E731
    lo, hi = float(lambda_lo), float(lambda_hi)
    if not multi(lo) or multi(hi):
        raise ThresholdNotFoundError(
            f"no transition from >=3 to fewer solutions on [{lo}, {hi}] (p={p}, h={h})")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if multi(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdEstimate(0.5 * (lo + hi), lo, hi, "pitchfork (empirical)")


def estimate_min_R(lam: float, p: float, epsilon: float | None = None, R_start: float = 10.0,
                   R_cap: float = 1e7, quad: QuadratureConfig = DEFAULT_QUAD,
                   flow: FlowConfig = DEFAULT_FLOW) -> ThresholdEstimate:
    """Doubling search for the least tested ``R`` where matching succeeds.

    The returned bracket is ``[R/2, R]``. Success at ``2R`` is checked and a
    failure there is recorded in ``notes``.
    """
    if not 0.25 * PI2 < lam < PI2:
        raise DomainError("need pi^2/4 < lambda < pi^2")

    def ok(R: float) -> bool:
        try:
            solve_matching(lam, p, R, epsilon, quad, flow, reconstruct=False)
            return True
        except (LandscapeError, NumericalError, DomainError):
            return False

    R = float(R_start)
    while not ok(R):
        R *= 2.0
        if R > R_cap:
            raise ThresholdNotFoundError(f"matching failed for every tested R up to {R_cap:g}")
    notes = []
    if not ok(2.0 * R):
        notes.append(f"matching fails at 2R={2 * R:g} although it succeeds at R={R:g}")
        logger.warning(notes[-1])
    lower = R / 2.0 if R > R_start else 0.0
    return ThresholdEstimate(R, lower, R, "min R for matching (empirical)", tuple(notes))


__all__ = [
    "AMPLITUDE_GUARD", "BlowupTable", "BranchPoint", "PointFailure", "SequenceRow", "SweepResult",
    "ThresholdEstimate", "blowup_study", "estimate_min_R", "estimate_pitchfork",
    "metasolution_sequence", "parallel_map", "sweep_lambda", "worker_count",
]
