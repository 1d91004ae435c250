"""Brute-force certification of the closed-form prevalence bounds.

The oracle never uses the monotonicity argument behind the closed forms. It
enumerates sensitivity and specificity on a grid, inverts the test yield at
every grid point, and extremizes prevalence over the untested-side share.

Parameterizing by (sigma, pi, p0) instead of full joints P(a, c, t) loses
nothing: within the tested population the law of total probability fixes
``p1 = P(c=1|t=1)`` from (sigma, pi, gamma), while the untested population
carries no test information, so prevalence depends on the joint only
through ``tau * p1 + (1 - tau) * p0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    NO_ASSUMPTION,
    AccuracyBand,
    ObservedCounty,
    PrevalenceInterval,
    ScenarioSet,
    Selection,
    SelectionBand,
    scenario_bounds,
)
from .errors import EmptyInput, EmptyScenarioSet, ValidationError

# Tolerance for floating-point noise in containment checks, probability units.
CONTAINMENT_SLACK = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    """Grid resolution and acceptance slack.

    ``tolerance=None`` means one grid spacing of the widest enumerated axis,
    the untested share spanning [0, 1]; see :attr:`slack`.
    """

    grid_steps: int = 501
    tolerance: float | None = None

    def __post_init__(self):
        if isinstance(self.grid_steps, bool) or not isinstance(self.grid_steps, int):
            raise ValidationError(f"grid_steps must be an integer, got {self.grid_steps!r}")
        if self.grid_steps < 2:
            raise ValidationError(f"grid_steps must be >= 2, got {self.grid_steps}")
        if self.tolerance is None:
            return
        if not (isinstance(self.tolerance, (int, float)) and self.tolerance >= 0):
            raise ValidationError(f"tolerance must be a nonnegative number, got {self.tolerance!r}")
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def spacing(self) -> float:
        return 1.0 / (self.grid_steps - 1)

    @property
    def slack(self) -> float:
        """Tolerance in effect: the explicit one, else one grid spacing."""
        return self.spacing if self.tolerance is None else self.tolerance


def _untested_range(selection: Selection, p1: np.ndarray):
    if selection is NO_ASSUMPTION:
        return np.zeros_like(p1), np.ones_like(p1)
    lo = np.minimum(1.0, selection.kappa_lo * p1)
    if selection.unbounded:
        hi = np.ones_like(p1)
    else:
        hi = np.minimum(1.0, selection.kappa_hi * p1)
    return lo, hi


def oracle_bounds(
    county: ObservedCounty,
    acc: AccuracyBand,
    sel: Selection,
    cfg: OracleConfig = OracleConfig(),
    *,
    enumerate_untested: bool = False,
) -> PrevalenceInterval:
    """Grid-extremized prevalence interval.

    Every (sigma, pi) pair of an endpoint-inclusive grid is visited. Prevalence
    is affine in the untested share p0 with coefficient ``1 - tau >= 0``, so
    over any p0 grid containing its endpoints the extremes sit on the first
    and last node; only those two nodes are evaluated unless
    ``enumerate_untested`` asks for the whole p0 grid as well (slow, used to
    check that reduction).
    """
    acc.require_informative()
    n = cfg.grid_steps
    sigma = np.linspace(acc.sigma_lo, acc.sigma_hi, n)
    pi = np.linspace(acc.pi_lo, acc.pi_hi, n)
    S, P = np.meshgrid(sigma, pi, indexing="ij")
    p1 = np.clip((county.gamma + (P - 1.0)) / (S + (P - 1.0)), 0.0, 1.0)
    p0_lo, p0_hi = _untested_range(sel, p1)
    tau = county.tau

    if enumerate_untested:
        t = np.linspace(0.0, 1.0, n)
        lo, hi = np.inf, -np.inf
        for i in range(n):
            # lo*(1-t) + hi*t hits both endpoints exactly at t = 0 and t = 1
            p0 = p0_lo[i, :, None] * (1.0 - t) + p0_hi[i, :, None] * t
            rho = tau * p1[i, :, None] + (1.0 - tau) * p0
            lo = min(lo, float(rho.min()))
            hi = max(hi, float(rho.max()))
    else:
        lo = float((tau * p1 + (1.0 - tau) * p0_lo).min())
        hi = float((tau * p1 + (1.0 - tau) * p0_hi).max())
    return PrevalenceInterval(min(1.0, max(0.0, lo)), min(1.0, max(0.0, hi)))


@dataclass(frozen=True)
class CertificationCell:
    county: str
    scenario: str
    analytic: PrevalenceInterval
    oracle: PrevalenceInterval
    gap: float
    contained: bool
    passed: bool


@dataclass(frozen=True)
class CertificationReport:
    cells: tuple
    grid_steps: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.cells)

    @property
    def max_gap(self) -> float:
        return max((c.gap for c in self.cells), default=0.0)


def compare(analytic: PrevalenceInterval, oracle: PrevalenceInterval, tolerance: float):
    """Return ``(gap, contained, passed)`` for one analytic/oracle pair."""
    gap = max(abs(analytic.lo - oracle.lo), abs(analytic.hi - oracle.hi))
    contained = analytic.contains(oracle, slack=CONTAINMENT_SLACK)
    return gap, contained, contained and gap <= tolerance


def certify(
    counties, acc: AccuracyBand, scenarios: ScenarioSet, cfg: OracleConfig = OracleConfig()
) -> CertificationReport:
    """Check analytic bounds against the oracle for every (county, scenario).

    Failures are recorded in the report rather than raised.
    """
    counties = list(counties)
    if not counties:
        raise EmptyInput("no counties")
    if len(scenarios) == 0:
        raise EmptyScenarioSet("scenario set is empty")
    cells = []
    for county in counties:
        for scenario in scenarios:
            analytic = scenario_bounds(county, acc, scenario.selection)
            oracle = oracle_bounds(county, acc, scenario.selection, cfg)
            gap, contained, passed = compare(analytic, oracle, cfg.slack)
            cells.append(
                CertificationCell(county.name, scenario.name, analytic, oracle, gap, contained, passed)
            )
    return CertificationReport(tuple(cells), cfg.grid_steps, cfg.slack)


def random_instance(rng: np.random.Generator):
    """Draw a valid (county, accuracy band, selection) triple.

    Bands are rejection-sampled until informative by a margin of 0.01 so
    that the yield inversion stays well conditioned.
    """
    gamma, tau = rng.uniform(0.0, 1.0, size=2)
    while True:
        s_lo, s_hi = np.sort(rng.uniform(0.0, 1.0, size=2))
        p_lo, p_hi = np.sort(rng.uniform(0.0, 1.0, size=2))
        if s_lo + p_lo - 1.0 > 0.01:
            break
    acc = AccuracyBand(float(s_lo), float(s_hi), float(p_lo), float(p_hi))
    kind = rng.integers(0, 4)
    if kind == 0:
        sel = NO_ASSUMPTION
    else:
        k_lo = float(rng.uniform(0.0, 2.0))
        k_hi = float("inf") if kind == 1 else k_lo + float(rng.exponential(1.0))
        sel = SelectionBand(k_lo, k_hi)
    return ObservedCounty("random", float(gamma), float(tau)), acc, sel


@dataclass(frozen=True)
class SweepResult:
    n_instances: int
    spacing: float
    gaps: tuple = field(repr=False)
    all_contained: bool = True

    @property
    def max_gap(self) -> float:
        return max(self.gaps, default=0.0)

    @property
    def passed(self) -> bool:
        return self.all_contained and self.max_gap <= self.spacing


def random_sweep(n_instances: int, cfg: OracleConfig = OracleConfig(), seed: int = 0) -> SweepResult:
    """Oracle vs analytic on ``n_instances`` random valid problems."""
    rng = np.random.default_rng(seed)
    gaps = []
    contained = True
    for _ in range(n_instances):
        county, acc, sel = random_instance(rng)
        analytic = scenario_bounds(county, acc, sel)
        oracle = oracle_bounds(county, acc, sel, cfg)
        gap, ok, _ = compare(analytic, oracle, cfg.spacing)
        gaps.append(gap)
        contained = contained and ok
    return SweepResult(n_instances, cfg.spacing, tuple(gaps), contained)
