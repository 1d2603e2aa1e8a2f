"""Executable property suite shared by the ``verify`` command and the tests.

Each check returns a :class:`PropertyResult`; failing cases carry the
parameters and start point needed to replay them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (
    IntegratorConfig,
    LVDivergence,
    Trajectory,
    integrate,
    integrate_lv,
    replicator_rhs,
    to_lv,
)
from .equilibria import StabilityClass, pareto_report, stationary_states
from .model import ModelParams, build_payoff_matrix, check_assumptions, normalized_matrix

CONSERVATION_TOL = 1e-9
NEG_TOL = 1e-12
CHART_TOL = 1e-5
SHIFT_TOL = 1e-12
SIGN_MARGIN = 1e-6

SIM_CFG = IntegratorConfig()
CHART_CFG = IntegratorConfig(h=0.001, t_max=50.0, stride=10, stop_at_sink=False)

RANGES = {
    "alpha": (0.5, 3.0),
    "beta": (-5.0, 5.0),
    "gamma": (-5.0, 5.0),
    "delta": (-5.0, 5.0),
    "epsilon": (-5.0, 5.0),
    "eta": (-5.0, 5.0),
    "l": (0.1, 0.9),
    "n": (0.1, 0.9),
}


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, params: ModelParams, start=None, **detail) -> None:
        case = {"params": params.as_dict()}
        if start is not None:
            case["start"] = [float(v) for v in start]
        case.update(detail)
        self.failures.append(case)

    def as_dict(self) -> dict:
        return {"property": self.name, "passed": self.passed, "checked": self.checked,
                "failed": len(self.failures), "failures": self.failures[:5]}


def random_params(rng: np.random.Generator, assumptions: bool = False,
                  margin: float = 0.0) -> ModelParams:
    """Draw parameters uniformly from :data:`RANGES`.

    With ``assumptions`` the draw is redrawn until Assumptions I-II hold and
    every classification quantity (``a``, ``b``, ``d``, ``e - b``,
    ``a*e - b*d``) is at least ``margin`` away from zero.
    """
    while True:
        p = ModelParams(**{k: float(rng.uniform(lo, hi)) for k, (lo, hi) in RANGES.items()})
        if not assumptions:
            return p
        B = normalized_matrix(p)
        if not check_assumptions(p).both_hold:
            continue
        qs = (B.a, B.b, B.d, B.e - B.b, B.interior_discriminant)
        if min(abs(q) for q in qs) > margin:
            return p


def interior_starts(rng: np.random.Generator, count: int) -> np.ndarray:
    pts = rng.dirichlet(np.ones(3), size=count)
    return pts[np.all(pts > 0, axis=1)]


def check_conservation(cases: Sequence[tuple], cfg: IntegratorConfig = SIM_CFG) -> PropertyResult:
    """``cases`` holds ``(params, start)`` pairs."""
    res = PropertyResult("conservation")
    for params, x0 in cases:
        tr = integrate(params, x0, cfg)
        res.checked += 1
        drift = np.abs(tr.states.sum(axis=1) - 1.0).max()
        if (tr.max_sum_deviation > CONSERVATION_TOL or drift > CONSERVATION_TOL
                or tr.min_pre_projection < -NEG_TOL or tr.states.min() < 0):
            res.fail(params, x0, max_sum_deviation=tr.max_sum_deviation,
                     min_pre_projection=tr.min_pre_projection)
    return res


@dataclass(frozen=True)
class ChartComparison:
    trajectory: Trajectory
    simplex_gap: float
    lv_gap: float


def chart_comparison(params: ModelParams, x0, cfg: IntegratorConfig = CHART_CFG,
                     matrix: Optional[np.ndarray] = None) -> ChartComparison:
    """Compare a replicator run with the LV run from ``to_lv(x0)``.

    ``simplex_gap`` is the sup-norm gap after mapping the LV run back to the
    simplex; ``lv_gap`` compares LV coordinates relative to ``1 + |X|``.
    Both are infinite if the LV run diverges. ``matrix`` replaces the
    matrix used on the replicator side only.
    """
    B = normalized_matrix(params)
    tr = integrate(params, x0, cfg, matrix=matrix)
    try:
        lv = integrate_lv(B, to_lv(x0), cfg, clock="replicator")
    except LVDivergence:
        return ChartComparison(tr, np.inf, np.inf)
    n = min(len(tr.times), len(lv.times))
    if n == 0 or not np.array_equal(tr.times[:n], lv.times[:n]):
        return ChartComparison(tr, np.inf, np.inf)
    X, Y = lv.points[:n, 0], lv.points[:n, 1]
    back = np.column_stack([np.ones(n), X, Y]) / (1.0 + X + Y)[:, None]
    simplex_gap = float(np.abs(back - tr.states[:n]).max())
    xs = tr.states[:n]
    with np.errstate(divide="ignore", invalid="ignore"):
        Xr, Yr = xs[:, 1] / xs[:, 0], xs[:, 2] / xs[:, 0]
    lv_gap = float(max(np.max(np.abs(Xr - X) / (1 + np.abs(X))),
                       np.max(np.abs(Yr - Y) / (1 + np.abs(Y)))))
    return ChartComparison(tr, simplex_gap, lv_gap)


def chart_error(params: ModelParams, x0, cfg: IntegratorConfig = CHART_CFG,
                matrix: Optional[np.ndarray] = None) -> tuple[float, float]:
    """``(simplex_gap, lv_gap)`` of :func:`chart_comparison`."""
    c = chart_comparison(params, x0, cfg, matrix)
    return c.simplex_gap, c.lv_gap


def check_chart_equivalence(cases: Sequence[tuple], cfg: IntegratorConfig = CHART_CFG,
                            corrupt: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                            tol: float = CHART_TOL) -> PropertyResult:
    res = PropertyResult("chart_equivalence")
    for params, x0 in cases:
        M = None
        if corrupt is not None:
            M = corrupt(normalized_matrix(params).as_array().copy())
        gap, lv_gap = chart_error(params, x0, cfg, matrix=M)
        res.checked += 1
        if not (gap <= tol and lv_gap <= tol):
            res.fail(params, x0, simplex_gap=gap, lv_gap=lv_gap)
    return res


def check_sign_invariance(cases: Sequence[tuple],
                          cfg: IntegratorConfig = IntegratorConfig(stride=1)) -> PropertyResult:
    """The sign of ``a*x1 + b*x2`` (that is, of ``EP_NS - EP_SN``) never changes."""
    res = PropertyResult("sign_invariance")
    for params, x0 in cases:
        B = normalized_matrix(params)
        g0 = B.a * x0[0] + B.b * x0[1]
        if abs(g0) <= SIGN_MARGIN:
            continue
        tr = integrate(params, x0, cfg)
        res.checked += 1
        g = B.a * tr.states[:, 0] + B.b * tr.states[:, 1]
        if np.any(np.sign(g) != np.sign(g0)):
            res.fail(params, x0, first_flip_time=float(tr.times[np.argmax(np.sign(g) != np.sign(g0))]))
        elif g0 > 0 and tr.outcome.label == "e1":
            res.fail(params, x0, reached="e1")
    return res


def check_stability_agreement(param_list: Sequence[ModelParams]) -> PropertyResult:
    res = PropertyResult("stability_agreement")
    for params in param_list:
        report = stationary_states(params)
        for s in report.states:
            res.checked += 1
            if s.degenerate or s.analytic_class is StabilityClass.DEGENERATE:
                res.fail(params, list(s.location), state=s.label, reason="degenerate")
            elif s.numeric_class is not s.analytic_class:
                res.fail(params, list(s.location), state=s.label,
                         analytic=s.analytic_class.value,
                         numeric=list(s.numeric_eigenvalues))
    return res


def check_pareto_identity(param_list: Sequence[ModelParams]) -> PropertyResult:
    res = PropertyResult("pareto_stability_identity")
    for params in param_list:
        pr = pareto_report(params)
        B = normalized_matrix(params)
        res.checked += 1
        c5 = B.d < 0
        c6 = B.e - B.b < 0
        if pr.dominates_e1_over_e3 != c5 or pr.dominates_e2_over_e3 != c6:
            res.fail(params, e1_sink=c5, e1_dominates_e3=pr.dominates_e1_over_e3,
                     e2_sink=c6, e2_dominates_e3=pr.dominates_e2_over_e3)
    return res


def check_column_shift(param_list: Sequence[ModelParams], rng: np.random.Generator,
                       points_per_draw: int = 100, tol: float = SHIFT_TOL) -> PropertyResult:
    res = PropertyResult("column_shift_invariance")
    for params in param_list:
        A = np.asarray(build_payoff_matrix(params))
        shifted = A + rng.uniform(-10, 10, size=3)[None, :]
        for x in interior_starts(rng, points_per_draw):
            res.checked += 1
            gap = np.abs(replicator_rhs(A, x) - replicator_rhs(shifted, x)).max()
            if gap > tol:
                res.fail(params, x, gap=float(gap))
    return res


def run_suite(param_list: Sequence[ModelParams], seed: int = 42, starts_per_draw: int = 5,
              chart_starts_per_draw: int = 2,
              corrupt: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> list[PropertyResult]:
    """Run every property over ``param_list`` with seeded interior starts.

    Dynamic properties that need Assumptions I-II skip draws where they fail.
    """
    rng = np.random.default_rng(seed)
    sim_cases, chart_cases, sign_cases, classified = [], [], [], []
    for p in param_list:
        starts = interior_starts(rng, starts_per_draw + chart_starts_per_draw)
        sim_cases += [(p, x) for x in starts[:starts_per_draw]]
        chart_cases += [(p, x) for x in starts[starts_per_draw:]]
        if check_assumptions(p).both_hold:
            sign_cases += [(p, x) for x in starts[:starts_per_draw]]
            classified.append(p)
    return [
        check_conservation(sim_cases),
        check_chart_equivalence(chart_cases, corrupt=corrupt),
        check_sign_invariance(sign_cases),
        check_stability_agreement(classified),
        check_pareto_identity(param_list),
        check_column_shift(param_list, rng),
    ]
