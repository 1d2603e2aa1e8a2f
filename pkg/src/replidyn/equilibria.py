"""Stationary states of the replicator flow and their stability.

Each state carries two independent stability verdicts: an analytic class
read off the sign conditions on the normalized matrix entries, and the
eigenvalues of a finite-difference Jacobian of the flow restricted to the
simplex. Closed-form eigenvalues are reported in replicator time; states
located through the Lotka-Volterra chart pick up the factor ``x1`` from
the time change.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .dynamics import MatrixLike, as_matrix, from_lv
from .model import (
    EPS_COND,
    ModelParams,
    SimplexPoint,
    as_simplex_array,
    build_payoff_matrix,
    check_assumptions,
    ep_np,
    normalized_matrix,
)

log = logging.getLogger(__name__)

FD_STEP = 1e-6
STATIONARY_TOL = 1e-8
# finite differences resolve eigenvalues to roughly 1e-10
NUMERIC_EIG_TOL = 1e-8


class Kind(enum.Enum):
    E1 = "e1"
    E2 = "e2"
    E3 = "e3"
    EDGE_E1E2 = "edge_e1e2"
    EDGE_E1E3 = "edge_e1e3"
    EDGE_E2E3 = "edge_e2e3"
    INTERIOR = "interior"


class StabilityClass(enum.Enum):
    SINK = "sink"
    SOURCE = "source"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


class NonStationaryError(ValueError):
    pass


class AssumptionError(ValueError):
    pass


def classify_signs(eigs, tol: float = EPS_COND) -> StabilityClass:
    eigs = [float(v) for v in eigs]
    if any(abs(v) < tol for v in eigs):
        return StabilityClass.DEGENERATE
    if all(v < 0 for v in eigs):
        return StabilityClass.SINK
    if all(v > 0 for v in eigs):
        return StabilityClass.SOURCE
    return StabilityClass.SADDLE


@dataclass(frozen=True)
class StationaryState:
    kind: Kind
    location: SimplexPoint
    analytic_class: StabilityClass
    analytic_eigenvalues: tuple
    numeric_eigenvalues: tuple
    degenerate: bool = False

    @property
    def label(self) -> str:
        return self.kind.value

    @property
    def attracting(self) -> bool:
        return self.analytic_class is StabilityClass.SINK

    @property
    def numeric_class(self) -> StabilityClass:
        return classify_signs(self.numeric_eigenvalues, NUMERIC_EIG_TOL)

    def as_dict(self) -> dict:
        return {
            "kind": self.label,
            "location": list(self.location),
            "analytic_class": self.analytic_class.value,
            "analytic_eigenvalues": list(self.analytic_eigenvalues),
            "numeric_eigenvalues": list(self.numeric_eigenvalues),
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ParetoReport:
    dominates_e1_over_e2: bool
    dominates_e2_over_e1: bool
    dominates_e1_over_e3: bool
    dominates_e2_over_e3: bool
    welfare_e1: float
    welfare_e2: float
    welfare_e3: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class EquilibriumReport:
    states: tuple
    degenerate: bool
    notes: tuple = field(default=())

    def get(self, label: str) -> Optional[StationaryState]:
        for s in self.states:
            if s.label == label:
                return s
        return None


def _field(M: np.ndarray, x) -> np.ndarray:
    return np.array(_kernels.replicator_field(M, float(x[0]), float(x[1]), float(x[2])))


def numeric_jacobian(B: MatrixLike, x) -> np.ndarray:
    """Central-difference Jacobian of the flow in the chart ``(x1, x2)``."""
    M = as_matrix(B)
    xa = as_simplex_array(x)
    v = _field(M, xa)
    if np.max(np.abs(v)) > STATIONARY_TOL:
        raise NonStationaryError(f"{tuple(xa)} is not stationary (|rhs| = {np.max(np.abs(v)):.3g})")
    u1, u2 = xa[0], xa[1]
    J = np.empty((2, 2))
    for k in range(2):
        du = np.zeros(2)
        du[k] = FD_STEP
        p = (u1 + du[0], u2 + du[1])
        m = (u1 - du[0], u2 - du[1])
        fp = _field(M, (p[0], p[1], 1.0 - p[0] - p[1]))[:2]
        fm = _field(M, (m[0], m[1], 1.0 - m[0] - m[1]))[:2]
        J[:, k] = (fp - fm) / (2 * FD_STEP)
    return J


def jacobian_spectrum(B: MatrixLike, x) -> np.ndarray:
    return np.linalg.eigvals(numeric_jacobian(B, x))


def numeric_jacobian_eigenvalues(B: MatrixLike, x) -> np.ndarray:
    """Eigenvalues of the restricted Jacobian, ascending.

    Complex pairs (a sign of near-degeneracy for this field) are reduced to
    their real parts.
    """
    return np.sort(jacobian_spectrum(B, x).real)


def _make_state(kind: Kind, loc: SimplexPoint, analytic_class: StabilityClass,
                analytic_eigs, M: np.ndarray, degenerate: bool = False) -> StationaryState:
    spec = jacobian_spectrum(M, loc)
    if np.max(np.abs(spec.imag)) > NUMERIC_EIG_TOL:
        degenerate = True
    numeric = tuple(float(v) for v in np.sort(spec.real))
    analytic = tuple(float(v) for v in sorted(analytic_eigs))
    if analytic_class is StabilityClass.DEGENERATE:
        degenerate = True
    return StationaryState(kind, loc, analytic_class, analytic, numeric, degenerate)


def vertex_stability(params: ModelParams) -> list[StationaryState]:
    """States e1, e2, e3 with their stability.

    Transversal eigenvalues are ``(a, d)`` at e1, ``(-b, e - b)`` at e2 and
    ``(-f, -f)`` at e3. Under Assumptions I and II this makes e1 a sink iff
    ``d < 0``, e2 a sink iff ``e - b < 0``, and e3 always a sink.
    """
    B = normalized_matrix(params)
    M = B.as_array()
    eig = {
        Kind.E1: (B.a, B.d),
        Kind.E2: (-B.b, B.e - B.b),
        Kind.E3: (-B.f, B.c - B.f),
    }
    out = []
    for i, kind in enumerate((Kind.E1, Kind.E2, Kind.E3)):
        loc = SimplexPoint(*np.eye(3)[i])
        out.append(_make_state(kind, loc, classify_signs(eig[kind]), eig[kind], M))
    return out


def interior_equilibrium(params: ModelParams) -> Optional[StationaryState]:
    """Unique interior rest point, present iff ``a*e - b*d > 0``.

    Requires Assumptions I and II; returns ``None`` otherwise. The state is
    always a source.
    """
    B = normalized_matrix(params)
    if not check_assumptions(params).both_hold:
        log.info("interior equilibrium not analysed: Assumptions I-II fail")
        return None
    disc = B.interior_discriminant
    if disc <= 0:
        return None
    X = -B.a / B.b
    Y = disc / (B.b * B.f)
    loc = from_lv((X, Y))
    eigs = (loc.x1 * B.b * X, loc.x1 * B.f * Y)
    cls = StabilityClass.DEGENERATE if disc < EPS_COND else StabilityClass.SOURCE
    return _make_state(Kind.INTERIOR, loc, cls, eigs, B.as_array())


def edge_e1e2_equilibrium(params: ModelParams) -> StationaryState:
    """Rest point on the SN-NS edge at ``X = -a/b``.

    A saddle when the interior rest point exists, otherwise a source.
    """
    rep = check_assumptions(params)
    if not rep.both_hold:
        raise AssumptionError(
            "edge e1-e2 equilibrium requires Assumptions I and II "
            f"(margins {rep.margin_I:.6g}, {rep.margin_II:.6g})")
    B = normalized_matrix(params)
    x1 = B.b / (B.b - B.a)
    loc = SimplexPoint(x1, -B.a / (B.b - B.a), 0.0)
    disc = B.interior_discriminant
    if abs(disc) < EPS_COND:
        cls = StabilityClass.DEGENERATE
    elif disc > 0:
        cls = StabilityClass.SADDLE
    else:
        cls = StabilityClass.SOURCE
    eigs = (x1 * -B.a, x1 * -disc / B.b)
    return _make_state(Kind.EDGE_E1E2, loc, cls, eigs, B.as_array())


def edge_e1e3_equilibrium(params: ModelParams) -> Optional[StationaryState]:
    """Rest point on the SN-NP edge, present iff ``d < 0``; a saddle."""
    B = normalized_matrix(params)
    if B.d >= 0:
        return None
    x1 = B.f / (B.f - B.d)
    loc = SimplexPoint(x1, 0.0, -B.d / (B.f - B.d))
    eigs = (x1 * B.a, x1 * -B.d)
    cls = classify_signs(eigs) if abs(B.d) >= EPS_COND else StabilityClass.DEGENERATE
    return _make_state(Kind.EDGE_E1E3, loc, cls, eigs, B.as_array())


def edge_e2e3_equilibrium(params: ModelParams) -> Optional[StationaryState]:
    """Rest point on the NS-NP edge, present iff ``e - b < 0``; a saddle.

    Found from ``EP_NS = EP_NP`` on ``x1 = 0``, which gives
    ``x2 = alpha / (eta l)``. The LV chart does not reach this face.
    """
    B = normalized_matrix(params)
    if B.e - B.b >= 0:
        return None
    p = params
    x2 = p.alpha / (p.eta * p.l)
    loc = SimplexPoint(0.0, x2, 1.0 - x2)
    along = x2 * (1 - x2) * (B.b - B.e + B.f)
    eigs = (along, -B.b * x2)
    cls = classify_signs(eigs) if abs(B.e - B.b) >= EPS_COND else StabilityClass.DEGENERATE
    return _make_state(Kind.EDGE_E2E3, loc, cls, eigs, B.as_array())


def stationary_states(params: ModelParams) -> EquilibriumReport:
    """Enumerate every stationary state of the flow.

    The e1-e2 edge point and the interior point are only enumerated under
    Assumptions I and II.
    """
    B = normalized_matrix(params)
    rep = check_assumptions(params)
    notes = []
    states = list(vertex_stability(params))
    for fn in (edge_e1e3_equilibrium, edge_e2e3_equilibrium):
        s = fn(params)
        if s is not None:
            states.append(s)
    degenerate = rep.degenerate or abs(B.d) < EPS_COND or abs(B.e - B.b) < EPS_COND
    if rep.both_hold:
        states.append(edge_e1e2_equilibrium(params))
        inner = interior_equilibrium(params)
        if inner is not None:
            states.append(inner)
        degenerate = degenerate or abs(B.interior_discriminant) < EPS_COND
    else:
        notes.append("Assumptions I-II fail: e1-e2 edge and interior states not enumerated")
    degenerate = degenerate or any(s.degenerate for s in states)
    order = list(Kind)
    states.sort(key=lambda s: order.index(s.kind))
    return EquilibriumReport(tuple(states), degenerate, tuple(notes))


def pareto_report(params: ModelParams) -> ParetoReport:
    p = params
    sn = p.beta * p.n ** 2 + p.gamma * (1 - p.n) ** 2
    w1 = (1 - p.l) * p.alpha + p.beta * p.l ** 2 * p.n ** 2 + p.gamma * p.l ** 2 * (1 - p.n) ** 2
    w2 = (1 - p.l) * p.alpha + p.eta * p.l ** 2
    return ParetoReport(
        dominates_e1_over_e2=p.eta < sn,
        dominates_e2_over_e1=p.eta > sn,
        dominates_e1_over_e3=p.alpha < p.beta * p.l * p.n ** 2 + p.gamma * p.l * (1 - p.n) ** 2,
        dominates_e2_over_e3=p.alpha < p.eta * p.l,
        welfare_e1=w1,
        welfare_e2=w2,
        welfare_e3=ep_np(p),
    )


def is_nash(params: ModelParams, x, tol: float = 1e-12) -> bool:
    """True if no pure strategy earns strictly more than the population at ``x``."""
    A = np.asarray(build_payoff_matrix(params))
    xa = as_simplex_array(x)
    payoffs = A @ xa
    return bool(np.all(payoffs <= float(xa @ payoffs) + tol))
