"""Regime classification, basin estimation and the NS-advantage prediction check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import IntegratorConfig, integrate, integrate_many
from .model import EPS_COND, ModelParams, check_assumptions, normalized_matrix

BASIN_LABELS = ("e1", "e2", "e3", "unresolved")

PORTRAITS = {
    # regime: (no interior state, interior state)
    "R1": ("PP35", "PP7"),
    "R2": ("PP37", "PP9"),
    "R3": ("PP37", "PP9"),
    "R4": ("PP42", "PP42"),
}


class ClassificationRefused(ValueError):
    """Parameters outside the domain where the regime taxonomy applies."""


class AssumptionsViolated(ClassificationRefused):
    pass


class DegenerateParameters(ClassificationRefused):
    pass


@dataclass(frozen=True)
class RegimeLabel:
    regime: str
    interior_exists: bool
    bomze_portrait: str

    def as_dict(self) -> dict:
        return {"regime": self.regime, "interior_exists": self.interior_exists,
                "bomze_portrait": self.bomze_portrait}


def condition_margins(params: ModelParams) -> dict:
    """Signed quantities whose signs drive the classification.

    Assumption I holds iff ``a < 0``, Assumption II iff ``b > 0``, e1 is a
    sink iff ``d < 0``, e2 iff ``e - b < 0``, and an interior state exists
    iff ``a*e - b*d > 0``.
    """
    B = normalized_matrix(params)
    return {"a": B.a, "b": B.b, "d": B.d, "e_minus_b": B.e - B.b,
            "interior": B.interior_discriminant}


def classify_regime(params: ModelParams) -> RegimeLabel:
    rep = check_assumptions(params)
    if rep.degenerate:
        raise DegenerateParameters(
            f"assumption margins on the boundary ({rep.margin_I:.3g}, {rep.margin_II:.3g})")
    if not rep.both_hold:
        failing = [name for name, ok in (("I", rep.assumption_I_holds),
                                         ("II", rep.assumption_II_holds)) if not ok]
        raise AssumptionsViolated(f"Assumption(s) {', '.join(failing)} fail; "
                                  "the regime taxonomy requires both")
    m = condition_margins(params)
    near = [k for k, v in m.items() if abs(v) < EPS_COND]
    if near:
        raise DegenerateParameters(f"conditions at equality: {', '.join(near)}")
    c5 = m["d"] < 0
    c6 = m["e_minus_b"] < 0
    regime = {(True, True): "R1", (True, False): "R2",
              (False, True): "R3", (False, False): "R4"}[(c5, c6)]
    interior = m["interior"] > 0
    return RegimeLabel(regime, interior, PORTRAITS[regime][int(interior)])


def check_r4_consistency(params: ModelParams) -> bool:
    """In Regime 4 no interior state can exist: ``a*e - b*d <= 0``."""
    label = classify_regime(params)
    if label.regime != "R4":
        raise ValueError(f"check applies to Regime 4 only, got {label.regime}")
    return normalized_matrix(params).interior_discriminant <= 0


@dataclass(frozen=True)
class BasinMap:
    """Terminal attractor of every strict-interior lattice point.

    ``fractions`` are shares of the resolved points; unresolved points are
    only counted.
    """

    resolution: int
    points: np.ndarray
    labels: tuple
    final_states: np.ndarray
    fractions: dict
    unresolved: int
    min_pre_projection: float
    max_sum_deviation: float

    @property
    def counts(self) -> dict:
        return {lab: self.labels.count(lab) for lab in BASIN_LABELS}


def lattice_points(resolution: int) -> np.ndarray:
    """Barycentric lattice ``(i, j, k) / R`` with ``i, j, k >= 1``."""
    R = resolution
    pts = [(i / R, j / R, (R - i - j) / R)
           for i in range(1, R - 1) for j in range(1, R - i)]
    return np.array(pts, dtype=float).reshape(-1, 3)


def estimate_basins(params: ModelParams, resolution: int = 100,
                    cfg: IntegratorConfig = IntegratorConfig(),
                    threads: Optional[int] = None) -> BasinMap:
    if resolution < 3:
        raise ValueError("resolution must be at least 3 to have interior lattice points")
    pts = lattice_points(resolution)
    B = normalized_matrix(params)
    res = integrate_many(B, pts, cfg, threads=threads)
    labels = tuple(res.sinks[s] if s >= 0 else "unresolved" for s in res.status)
    resolved = sum(1 for lab in labels if lab != "unresolved")
    fractions = {v: (labels.count(v) / resolved if resolved else 0.0) for v in ("e1", "e2", "e3")}
    return BasinMap(
        resolution=resolution,
        points=pts,
        labels=labels,
        final_states=res.final,
        fractions=fractions,
        unresolved=len(labels) - resolved,
        min_pre_projection=float(res.min_pre_projection.min()) if len(pts) else 0.0,
        max_sum_deviation=float(res.max_sum_deviation.max()) if len(pts) else 0.0,
    )


@dataclass(frozen=True)
class PredictionReport:
    region: str
    samples: int
    counts: dict
    sign_changes: int
    forbidden_vertex: str
    min_pre_projection: float = 0.0
    max_sum_deviation: float = 0.0

    @property
    def holds(self) -> bool:
        return self.counts.get(self.forbidden_vertex, 0) == 0 and self.sign_changes == 0

    def as_dict(self) -> dict:
        return {"region": self.region, "samples": self.samples, "counts": dict(self.counts),
                "sign_changes": self.sign_changes, "forbidden_vertex": self.forbidden_vertex,
                "min_pre_projection": self.min_pre_projection,
                "max_sum_deviation": self.max_sum_deviation, "holds": self.holds}


def sample_region(params: ModelParams, count: int, seed: int = 42, region: str = "ns",
                  margin: float = 1e-6) -> np.ndarray:
    """Uniform interior starts where NS out-earns SN (``a*x1 + b*x2 > margin``),
    or the reverse for ``region="sn"``."""
    if region not in ("ns", "sn"):
        raise ValueError(f"region must be 'ns' or 'sn', got {region!r}")
    B = normalized_matrix(params)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        cand = rng.dirichlet(np.ones(3), size=max(64, 2 * count))
        g = B.a * cand[:, 0] + B.b * cand[:, 1]
        keep = cand[g > margin] if region == "ns" else cand[g < -margin]
        out.extend(keep[np.all(keep > 0, axis=1)])
    return np.array(out[:count])


def prediction_check(params: ModelParams, sample_count: int = 1000,
                     cfg: IntegratorConfig = IntegratorConfig(stride=1), seed: int = 42,
                     region: str = "ns") -> PredictionReport:
    """Starts where NS out-earns SN never reach e1, and the sign of
    ``a*x1 + b*x2`` never changes along the way.

    ``region="sn"`` runs the mirrored check: starts where SN out-earns NS
    never reach e2.
    """
    rep = check_assumptions(params)
    if not rep.both_hold:
        raise AssumptionsViolated("prediction check requires Assumptions I and II")
    B = normalized_matrix(params)
    starts = sample_region(params, sample_count, seed, region)
    counts = {lab: 0 for lab in BASIN_LABELS}
    flips = 0
    min_pre, max_dev = np.inf, 0.0
    for x0 in starts:
        tr = integrate(params, x0, cfg)
        min_pre = min(min_pre, tr.min_pre_projection)
        max_dev = max(max_dev, tr.max_sum_deviation)
        counts[tr.outcome.label or "unresolved"] += 1
        g = B.a * tr.states[:, 0] + B.b * tr.states[:, 1]
        want = 1.0 if region == "ns" else -1.0
        if np.any(np.sign(g) != want):
            flips += 1
    return PredictionReport(region, len(starts), counts, flips,
                            "e1" if region == "ns" else "e2", float(min_pre), max_dev)
