"""Replicator flow on the simplex and its Lotka-Volterra chart.

All user-facing simulation runs in simplex coordinates. The chart
``X = x2/x1, Y = x3/x1`` maps the replicator field onto the planar system
``X' = X(a + bX)``, ``Y' = Y(d + eX + fY)`` up to the positive time change
``dt_lv = x1 dt``; :func:`integrate_lv` can undo that change so the two
integrations share a clock.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .model import (
    EPS_COND,
    ModelParams,
    NormalizedMatrix,
    PayoffMatrix,
    PointLike,
    SimplexPoint,
    as_simplex_array,
    normalized_matrix,
)

CHART_TOL = 1e-12
VERTEX_LABELS = ("e1", "e2", "e3")

MatrixLike = Union[NormalizedMatrix, PayoffMatrix, np.ndarray]


class IntegrationError(RuntimeError):
    pass


class ChartError(ValueError):
    """Point lies outside the domain of the Lotka-Volterra chart."""


class LVDivergence(IntegrationError):
    """LV coordinates blew up; ``trajectory`` holds the part computed so far."""

    def __init__(self, message: str, trajectory: "LVTrajectory"):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 0.01
    t_max: float = 10000.0
    eps_conv: float = 1e-6
    stride: int = 10
    stop_at_sink: bool = True

    def __post_init__(self):
        for name in ("h", "t_max", "eps_conv"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if isinstance(self.stride, bool) or not isinstance(self.stride, int) or self.stride < 1:
            raise ValueError(f"stride must be a positive integer, got {self.stride!r}")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_max / self.h - 1e-9)))


@dataclass(frozen=True)
class Outcome:
    """Terminal classification of a trajectory.

    ``label`` is ``None`` for an unresolved run; otherwise it names the
    stationary state reached (``"e1"``, ``"edge_e1e2"``, ...).
    """

    label: Optional[str]
    attracting: bool = False
    distance: float = math.nan

    @classmethod
    def unresolved(cls) -> "Outcome":
        return cls(None)

    @property
    def converged(self) -> bool:
        return self.label is not None

    def __str__(self) -> str:
        if self.label is None:
            return "Unresolved"
        suffix = "" if self.attracting else ", non-attracting"
        return f"ConvergedTo({self.label}{suffix})"


@dataclass(frozen=True)
class Trajectory:
    params: Optional[ModelParams]
    times: np.ndarray
    states: np.ndarray
    outcome: Outcome
    min_pre_projection: float
    max_sum_deviation: float
    config: IntegratorConfig = field(default_factory=IntegratorConfig)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class LVPoint:
    X: float
    Y: float

    def __post_init__(self):
        if not (math.isfinite(self.X) and math.isfinite(self.Y)):
            raise ChartError(f"non-finite LV point ({self.X}, {self.Y})")
        if self.X < 0 or self.Y < 0:
            raise ChartError(f"LV coordinates must be nonnegative, got ({self.X}, {self.Y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y])


@dataclass(frozen=True)
class LVTrajectory:
    times: np.ndarray
    points: np.ndarray
    rescaled: bool


@dataclass(frozen=True)
class BatchResult:
    """Terminal data for many independent integrations, in input order."""

    status: np.ndarray
    final: np.ndarray
    steps: np.ndarray
    min_pre_projection: np.ndarray
    max_sum_deviation: np.ndarray
    sinks: tuple


def as_matrix(B: MatrixLike) -> np.ndarray:
    if isinstance(B, NormalizedMatrix):
        return B.as_array()
    arr = np.array(B, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {arr.shape}")
    return arr


def thread_count() -> int:
    raw = os.environ.get("REPLIDYN_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"REPLIDYN_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def replicator_rhs(B: MatrixLike, x: PointLike) -> np.ndarray:
    """Velocity ``x_i ((Bx)_i - x.Bx)`` of the replicator equation at ``x``."""
    M = as_matrix(B)
    xa = as_simplex_array(x)
    return np.array(_kernels.replicator_field(M, xa[0], xa[1], xa[2]))


def attracting_vertices(B: MatrixLike) -> list[str]:
    """Vertices whose transversal eigenvalues ``B[j,i] - B[i,i]`` are all negative."""
    M = as_matrix(B)
    out = []
    for i, name in enumerate(VERTEX_LABELS):
        eig = [M[j, i] - M[i, i] for j in range(3) if j != i]
        if all(v < -EPS_COND for v in eig):
            out.append(name)
    return out


def _sink_array(B: np.ndarray, cfg: IntegratorConfig) -> tuple[tuple, np.ndarray]:
    if not cfg.stop_at_sink:
        return (), np.zeros((0, 3))
    names = tuple(attracting_vertices(B))
    coords = np.array([np.eye(3)[VERTEX_LABELS.index(nm)] for nm in names]).reshape(-1, 3)
    return names, coords


def integrate(params: ModelParams, x0: PointLike, cfg: IntegratorConfig = IntegratorConfig(),
              matrix: Optional[MatrixLike] = None) -> Trajectory:
    """Integrate the replicator equation from ``x0`` with fixed-step RK4.

    After every step, components in ``[-1e-12, 0)`` are clamped to zero and
    the state is renormalized. Integration stops once the state has stayed
    within ``cfg.eps_conv`` of an attracting vertex for ``cfg.stride``
    consecutive steps, or at ``cfg.t_max``.

    ``matrix`` overrides the normalized matrix derived from ``params``.
    """
    xa = as_simplex_array(x0)
    B = as_matrix(normalized_matrix(params) if matrix is None else matrix)
    names, sinks = _sink_array(B, cfg)
    n_steps = cfg.n_steps
    buf = np.empty((n_steps // cfg.stride + 2, 4))
    n_rec, _, status, xf, min_pre, max_dev = _kernels.run_replicator(
        B, xa, cfg.h, n_steps, cfg.stride, cfg.eps_conv, sinks, buf, True)
    _raise_on_status(status, xf, xa)
    rec = buf[:n_rec]
    if status >= 0:
        outcome = Outcome(names[status], True, float(np.linalg.norm(xf - sinks[status])))
    else:
        outcome = Outcome.unresolved()
    return Trajectory(params=params, times=rec[:, 0] * cfg.h, states=rec[:, 1:].copy(),
                      outcome=outcome, min_pre_projection=float(min_pre),
                      max_sum_deviation=float(max_dev), config=cfg)


def _raise_on_status(status: int, xf: np.ndarray, x0: np.ndarray) -> None:
    if status == _kernels.NONFINITE:
        raise IntegrationError(f"non-finite state while integrating from {tuple(x0)}")
    if status == _kernels.LEFT_SIMPLEX:
        raise IntegrationError(
            f"state {tuple(xf)} left the simplex (integrating from {tuple(x0)}); reduce h")


def integrate_many(B: MatrixLike, starts: np.ndarray, cfg: IntegratorConfig = IntegratorConfig(),
                   threads: Optional[int] = None) -> BatchResult:
    """Integrate every row of ``starts`` and keep only terminal data.

    Each start is integrated independently and written to its own slot, so
    results do not depend on ``threads``.
    """
    M = as_matrix(B)
    starts = np.asarray(starts, dtype=float).reshape(-1, 3)
    for row in starts:
        as_simplex_array(row)
    names, sinks = _sink_array(M, cfg)
    n = len(starts)
    status = np.empty(n, dtype=np.int64)
    final = np.empty((n, 3))
    steps = np.empty(n, dtype=np.int64)
    min_pre = np.empty(n)
    max_dev = np.empty(n)
    dummy = np.empty((1, 4))
    n_steps = cfg.n_steps

    def work(idx: Iterable[int]) -> None:
        for i in idx:
            _, st, code, xf, mp, md = _kernels.run_replicator(
                M, starts[i], cfg.h, n_steps, cfg.stride, cfg.eps_conv, sinks, dummy, False)
            status[i] = code
            final[i] = xf
            steps[i] = st
            min_pre[i] = mp
            max_dev[i] = md

    workers = min(threads or thread_count(), max(n, 1))
    if workers <= 1 or n < 2:
        work(range(n))
    else:
        chunks = [range(k, n, workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))
    for i in range(n):
        _raise_on_status(int(status[i]), final[i], starts[i])
    return BatchResult(status, final, steps, min_pre, max_dev, names)


def to_lv(x: PointLike) -> LVPoint:
    xa = as_simplex_array(x)
    if xa[0] < CHART_TOL:
        raise ChartError("LV chart undefined on the x1 = 0 face")
    return LVPoint(xa[1] / xa[0], xa[2] / xa[0])


def from_lv(p: Union[LVPoint, Sequence[float]]) -> SimplexPoint:
    if not isinstance(p, LVPoint):
        p = LVPoint(float(p[0]), float(p[1]))
    s = 1.0 + p.X + p.Y
    return SimplexPoint(1.0 / s, p.X / s, p.Y / s)


def lv_rhs(B: NormalizedMatrix, p: Union[LVPoint, Sequence[float]]) -> np.ndarray:
    if not isinstance(p, LVPoint):
        p = LVPoint(float(p[0]), float(p[1]))
    X, Y = p.X, p.Y
    return np.array([X * (B.a + B.b * X), Y * (B.d + B.e * X + B.f * Y)])


def integrate_lv(B: NormalizedMatrix, p0: Union[LVPoint, Sequence[float]],
                 cfg: IntegratorConfig = IntegratorConfig(), clock: str = "lv") -> LVTrajectory:
    """RK4 integration of the Lotka-Volterra system in the chart coordinates.

    ``clock="lv"`` integrates the system as written. ``clock="replicator"``
    divides the field by ``1 + X + Y`` (that is, multiplies by ``x1``) so
    that the time axis matches :func:`integrate`. Runs the full ``t_max``;
    raises :class:`LVDivergence` if the coordinates blow up.
    """
    if clock not in ("lv", "replicator"):
        raise ValueError(f"clock must be 'lv' or 'replicator', got {clock!r}")
    if not isinstance(p0, LVPoint):
        p0 = LVPoint(float(p0[0]), float(p0[1]))
    n_steps = cfg.n_steps
    buf = np.empty((n_steps // cfg.stride + 2, 3))
    n_rec, steps, status = _kernels.run_lv(B.a, B.b, B.d, B.e, B.f, p0.X, p0.Y, cfg.h,
                                          n_steps, cfg.stride, clock == "replicator", buf)
    rec = buf[:n_rec]
    traj = LVTrajectory(times=rec[:, 0] * cfg.h, points=rec[:, 1:].copy(),
                        rescaled=clock == "replicator")
    if status == _kernels.NONFINITE:
        raise LVDivergence(f"LV coordinates diverged at t = {steps * cfg.h:.6g} "
                           f"(trajectory approaching the x1 = 0 face)", traj)
    return traj


def classify_terminal(traj: Trajectory, states: Sequence, eps_conv: Optional[float] = None) -> Outcome:
    """Match the final state of ``traj`` to the nearest stationary state.

    ``states`` holds objects with ``label``, ``location`` and ``attracting``
    attributes (see :class:`replidyn.equilibria.StationaryState`).
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    radius = traj.config.eps_conv if eps_conv is None else eps_conv
    xf = np.asarray(traj.final, dtype=float)
    best = None
    best_dist = math.inf
    for s in states:
        dist = float(np.linalg.norm(xf - np.asarray(as_simplex_array(s.location))))
        if dist < best_dist:
            best, best_dist = s, dist
    if best is None or best_dist >= radius:
        return Outcome.unresolved()
    return Outcome(best.label, bool(best.attracting), best_dist)
