"""Parameters, payoffs and payoff matrices of the SN / NS / NP game.

Strategy indices follow the population vector ``x = (x1, x2, x3)``:

* 0 -- SN, social participation online and face-to-face
* 1 -- NS, face-to-face participation only
* 2 -- NP, no social participation (constant payoff ``alpha``)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence, Union

import numpy as np

SIMPLEX_TOL = 1e-9
NEG_TOL = 1e-12
EPS_COND = 1e-12


class ParameterError(ValueError):
    """Invalid model parameter; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.reason = message


class SimplexError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    eta: float
    l: float
    n: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ParameterError(f.name, f"expected a real number, got {v!r}")
            if not math.isfinite(v):
                raise ParameterError(f.name, f"must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        if not self.alpha > 0:
            raise ParameterError("alpha", f"must be strictly positive, got {self.alpha!r}")
        if not 0 < self.l < 1:
            raise ParameterError("l", f"must lie in the open interval (0,1), got {self.l!r}")
        if not 0 < self.n < 1:
            raise ParameterError("n", f"must lie in the open interval (0,1), got {self.n!r}")

    def replace(self, **changes) -> "ModelParams":
        d = self.as_dict()
        d.update(changes)
        return ModelParams(**d)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class SimplexPoint:
    """Population shares of SN, NS and NP."""

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        vals = tuple(float(v) for v in (self.x1, self.x2, self.x3))
        for name, v in zip(("x1", "x2", "x3"), vals):
            object.__setattr__(self, name, v)
        if not all(math.isfinite(v) for v in vals):
            raise SimplexError(f"non-finite simplex point {vals}")
        if min(vals) < -NEG_TOL:
            raise SimplexError(f"negative share in {vals}")
        if abs(sum(vals) - 1.0) > SIMPLEX_TOL:
            raise SimplexError(f"shares {vals} do not sum to 1")

    @classmethod
    def of(cls, x: Sequence[float]) -> "SimplexPoint":
        x1, x2, x3 = (float(v) for v in x)
        return cls(x1, x2, x3)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))


PointLike = Union[SimplexPoint, Sequence[float], np.ndarray]


def as_simplex_array(x: PointLike) -> np.ndarray:
    """Validate ``x`` as a simplex point and return it as a float array."""
    if isinstance(x, SimplexPoint):
        return x.as_array()
    arr = np.asarray(x, dtype=float)
    if arr.shape != (3,):
        raise SimplexError(f"expected three shares, got shape {arr.shape}")
    SimplexPoint(*arr)
    return arr


@dataclass(frozen=True)
class PayoffMatrix:
    """Row ``i`` holds the payoff of strategy ``i`` against a population
    concentrated on strategy ``j``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (3, 3):
            raise ValueError(f"payoff matrix must be 3x3, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __getitem__(self, idx):
        return self.values[idx]


@dataclass(frozen=True)
class NormalizedMatrix:
    """Payoff matrix with its first row shifted to zero.

    ``[[0, 0, 0], [a, b, c], [d, e, f]]`` generates the same replicator
    flow as the raw payoff matrix.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def as_array(self) -> np.ndarray:
        return np.array([[0.0, 0.0, 0.0],
                         [self.a, self.b, self.c],
                         [self.d, self.e, self.f]])

    @property
    def interior_discriminant(self) -> float:
        """``a*e - b*d``; positive exactly when an interior rest point exists."""
        return self.a * self.e - self.b * self.d


@dataclass(frozen=True)
class AssumptionReport:
    assumption_I_holds: bool
    assumption_II_holds: bool
    margin_I: float
    margin_II: float
    degenerate: bool

    @property
    def both_hold(self) -> bool:
        return self.assumption_I_holds and self.assumption_II_holds


def ep_sn(params: ModelParams, x: PointLike) -> float:
    """Expected payoff of an SN player."""
    x1, x2, _ = as_simplex_array(x)
    p = params
    l2 = p.l * p.l
    return ((1 - p.l) * p.alpha
            + p.beta * l2 * p.n ** 2 * x1
            + p.gamma * l2 * (1 - p.n) ** 2 * x1
            + p.delta * l2 * (1 - p.n) * x2)


def ep_ns(params: ModelParams, x: PointLike) -> float:
    """Expected payoff of an NS player."""
    x1, x2, _ = as_simplex_array(x)
    p = params
    l2 = p.l * p.l
    return (1 - p.l) * p.alpha + p.epsilon * l2 * (1 - p.n) * x1 + p.eta * l2 * x2


def ep_np(params: ModelParams) -> float:
    """Expected payoff of an NP player; independent of the population state."""
    return params.alpha


def mean_payoff(params: ModelParams, x: PointLike) -> float:
    arr = as_simplex_array(x)
    return arr[0] * ep_sn(params, arr) + arr[1] * ep_ns(params, arr) + arr[2] * ep_np(params)


def build_payoff_matrix(params: ModelParams) -> PayoffMatrix:
    p = params
    l2 = p.l * p.l
    base = (1 - p.l) * p.alpha
    return PayoffMatrix(np.array([
        [base + p.beta * l2 * p.n ** 2 + p.gamma * l2 * (1 - p.n) ** 2,
         base + p.delta * l2 * (1 - p.n),
         base],
        [base + p.epsilon * l2 * (1 - p.n), base + p.eta * l2, base],
        [p.alpha, p.alpha, p.alpha],
    ]))


def normalize(A: PayoffMatrix) -> NormalizedMatrix:
    """Subtract the first row from every row of ``A`` (a column-wise shift)."""
    v = np.asarray(A, dtype=float)
    B = v - v[0]
    return NormalizedMatrix(a=B[1, 0], b=B[1, 1], c=B[1, 2],
                            d=B[2, 0], e=B[2, 1], f=B[2, 2])


def normalized_matrix(params: ModelParams) -> NormalizedMatrix:
    """Closed-form entries of the normalized matrix.

    Computed directly from the parameters; :func:`normalize` applied to
    :func:`build_payoff_matrix` agrees up to rounding.
    """
    p = params
    l2 = p.l * p.l
    sn_self = p.beta * l2 * p.n ** 2 + p.gamma * l2 * (1 - p.n) ** 2
    return NormalizedMatrix(
        a=p.epsilon * l2 * (1 - p.n) - sn_self,
        b=p.eta * l2 - p.delta * l2 * (1 - p.n),
        c=0.0,
        d=p.alpha * p.l - sn_self,
        e=p.alpha * p.l - p.delta * l2 * (1 - p.n),
        f=p.l * p.alpha,
    )


def check_assumptions(params: ModelParams) -> AssumptionReport:
    """Report whether SN beats NS at e1 (I) and NS beats SN at e2 (II).

    Margins are signed slacks; a margin within ``EPS_COND`` of zero counts
    as failing and sets ``degenerate``.
    """
    p = params
    margin_I = p.beta * p.n ** 2 + p.gamma * (1 - p.n) ** 2 - p.epsilon * (1 - p.n)
    margin_II = p.eta - p.delta * (1 - p.n)
    degenerate = abs(margin_I) < EPS_COND or abs(margin_II) < EPS_COND
    return AssumptionReport(
        assumption_I_holds=bool(margin_I >= EPS_COND),
        assumption_II_holds=bool(margin_II >= EPS_COND),
        margin_I=margin_I,
        margin_II=margin_II,
        degenerate=degenerate,
    )
