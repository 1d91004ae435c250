"""Sharp bounds on prevalence under imperfect tests and selection into testing.

Notation used throughout, for one county:

* ``c`` -- person is infected, ``t`` -- person took the test,
  ``a`` -- person tested positive (only observable when ``t = 1``).
* ``gamma = P(a=1 | t=1)`` is the test yield, ``tau = P(t=1)`` the share of
  the population tested, ``rho = P(c=1)`` the prevalence we bound.
* ``sigma`` and ``pi`` are sensitivity and specificity, only known to lie in
  an :class:`AccuracyBand`.
* ``kappa = P(c=1 | t=0) / P(c=1 | t=1)`` is the selection ratio, only known
  to lie in a :class:`SelectionBand`.

For fixed (sigma, pi) the tested-side prevalence is pinned down by
``gamma = sigma * p1 + (1 - pi) * (1 - p1)``. The untested side is free in
[0, 1] without a selection assumption, or in [kappa_lo * p1, kappa_hi * p1]
(capped at 1) with one, and ``rho = tau * p1 + (1 - tau) * p0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import EmptyScenarioSet, InfeasibleAccuracy, ValidationError

UNBOUNDED = math.inf


def _probability(value, label):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{label} must be a number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{label} must lie in [0, 1], got {value!r}")
    return value


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class ObservedCounty:
    """Observed testing outcome of one county.

    ``gamma`` is the share of positives among tested people and ``tau`` the
    share of the population that was tested.
    """

    name: str
    gamma: float
    tau: float

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValidationError(f"county name must be non-empty text, got {self.name!r}")
        object.__setattr__(self, "gamma", _probability(self.gamma, "gamma"))
        object.__setattr__(self, "tau", _probability(self.tau, "tau"))


@dataclass(frozen=True)
class AccuracyBand:
    """Interval knowledge of sensitivity and specificity.

    Construction only checks that both intervals are well-formed
    probabilities. Informativeness (``sigma_lo + pi_lo > 1``) is enforced by
    the bound computations and by config parsing, because a band derived
    from an imperfect reference study may legitimately fail it.
    """

    sigma_lo: float
    sigma_hi: float
    pi_lo: float
    pi_hi: float

    def __post_init__(self):
        for field in ("sigma_lo", "sigma_hi", "pi_lo", "pi_hi"):
            object.__setattr__(self, field, _probability(getattr(self, field), field))
        if self.sigma_lo > self.sigma_hi:
            raise ValidationError(f"sigma_lo {self.sigma_lo} exceeds sigma_hi {self.sigma_hi}")
        if self.pi_lo > self.pi_hi:
            raise ValidationError(f"pi_lo {self.pi_lo} exceeds pi_hi {self.pi_hi}")

    @classmethod
    def point(cls, sigma: float, pi: float) -> "AccuracyBand":
        return cls(sigma, sigma, pi, pi)

    @property
    def informativeness(self) -> float:
        """Smallest value of ``sigma + pi - 1`` over the band."""
        return self.sigma_lo + self.pi_lo - 1.0

    @property
    def is_informative(self) -> bool:
        return self.informativeness > 0.0

    def require_informative(self) -> None:
        if not self.is_informative:
            raise InfeasibleAccuracy(
                f"sigma_lo + pi_lo - 1 = {self.informativeness:.6g} must be > 0 "
                "(test no better than chance somewhere in the band)"
            )

    def contains(self, other: "AccuracyBand") -> bool:
        return (
            self.sigma_lo <= other.sigma_lo
            and other.sigma_hi <= self.sigma_hi
            and self.pi_lo <= other.pi_lo
            and other.pi_hi <= self.pi_hi
        )


@dataclass(frozen=True)
class SelectionBand:
    """Bounds on ``P(c=1|t=0) / P(c=1|t=1)``; ``kappa_hi`` may be UNBOUNDED."""

    kappa_lo: float
    kappa_hi: float = UNBOUNDED

    def __post_init__(self):
        for field in ("kappa_lo", "kappa_hi"):
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or math.isnan(value):
                raise ValidationError(f"{field} must be a number, got {value!r}")
            if value < 0:
                raise ValidationError(f"{field} must be nonnegative, got {value!r}")
            object.__setattr__(self, field, float(value))
        if math.isinf(self.kappa_lo):
            raise ValidationError("kappa_lo must be finite")
        if self.kappa_lo > self.kappa_hi:
            raise ValidationError(f"kappa_lo {self.kappa_lo} exceeds kappa_hi {self.kappa_hi}")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.kappa_hi)

    def contains(self, other: "SelectionBand") -> bool:
        return self.kappa_lo <= other.kappa_lo and other.kappa_hi <= self.kappa_hi


@dataclass(frozen=True)
class ConditionalPrevalence:
    """Bounds on prevalence among the tested, ``P(c=1 | t=1)``."""

    p1_lo: float
    p1_hi: float

    def __post_init__(self):
        if not 0.0 <= self.p1_lo <= self.p1_hi <= 1.0:
            raise ValidationError(f"invalid conditional prevalence [{self.p1_lo}, {self.p1_hi}]")


@dataclass(frozen=True)
class PrevalenceInterval:
    """Identified set ``[lo, hi]`` for the prevalence ``P(c=1)``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValidationError(f"invalid prevalence interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "PrevalenceInterval", slack: float = 0.0) -> bool:
        return self.lo - slack <= other.lo and other.hi <= self.hi + slack

    def __iter__(self):
        yield self.lo
        yield self.hi


class _Marker(enum.Enum):
    NO_ASSUMPTION = "no assumption"

    def __repr__(self):
        return "NO_ASSUMPTION"


NO_ASSUMPTION = _Marker.NO_ASSUMPTION

Selection = Union[SelectionBand, _Marker]


@dataclass(frozen=True)
class Scenario:
    name: str
    selection: Selection

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValidationError("scenario name must be non-empty text")
        if not (self.selection is NO_ASSUMPTION or isinstance(self.selection, SelectionBand)):
            raise ValidationError(f"scenario {self.name!r}: bad selection {self.selection!r}")


@dataclass(frozen=True)
class ScenarioSet:
    """Ordered, uniquely named selection assumptions."""

    entries: tuple

    def __init__(self, entries: Iterable):
        items = []
        for entry in entries:
            if not isinstance(entry, Scenario):
                entry = Scenario(*entry)
            items.append(entry)
        names = [s.name for s in items]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValidationError(f"duplicate scenario names: {', '.join(dupes)}")
        object.__setattr__(self, "entries", tuple(items))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.entries]


# Standard Q antigen test bounds after adjusting for imperfect PCR sensitivity.
STANDARD_Q_BAND = AccuracyBand(0.5358, 0.8765, 0.9953, 1.0)

STANDARD_SCENARIOS = ScenarioSet(
    [
        ("No Assumption", NO_ASSUMPTION),
        ("No Selection", SelectionBand(1.0, 1.0)),
        ("Negative Selection", SelectionBand(1.0, UNBOUNDED)),
        ("Restricted Negative Selection", SelectionBand(1.0, 2.0)),
        ("Small Ambiguous Selection", SelectionBand(0.95, 1.05)),
    ]
)


def conditional_prevalence(gamma: float, acc: AccuracyBand) -> ConditionalPrevalence:
    """Bounds on ``P(c=1|t=1)`` from inverting the test yield.

    The inverse ``(gamma + pi - 1) / (sigma + pi - 1)`` is smallest at
    ``(sigma_hi, pi_lo)`` and largest at ``(sigma_lo, pi_hi)`` once clamped to
    [0, 1]. Values outside [0, 1] occur when the (rounded) yield is not
    reachable by every test in the band; they are clamped, not rejected.
    """
    gamma = _probability(gamma, "gamma")
    acc.require_informative()
    # pi - 1 is exact in binary for pi in [0.5, 1], so evaluate it first
    lo = (gamma + (acc.pi_lo - 1.0)) / (acc.sigma_hi + (acc.pi_lo - 1.0))
    hi = (gamma + (acc.pi_hi - 1.0)) / (acc.sigma_lo + (acc.pi_hi - 1.0))
    return ConditionalPrevalence(_clamp01(lo), _clamp01(hi))


def bounds_no_assumption(county: ObservedCounty, acc: AccuracyBand) -> PrevalenceInterval:
    """Prevalence bounds when nothing is known about the untested."""
    p1 = conditional_prevalence(county.gamma, acc)
    tau = county.tau
    return PrevalenceInterval(
        _clamp01(tau * p1.p1_lo),
        _clamp01(tau * p1.p1_hi + (1.0 - tau)),
    )


def _untested_share(kappa: float, p1: float) -> float:
    # An unbounded ratio leaves P(c=1|t=0) free up to 1, also when p1 == 0
    # (the ratio is undefined there and imposes nothing).
    if math.isinf(kappa):
        return 1.0
    return min(1.0, kappa * p1)


def bounds_with_selection(
    county: ObservedCounty, acc: AccuracyBand, sel: SelectionBand
) -> PrevalenceInterval:
    """Prevalence bounds under a selection-ratio band.

    The untested-side prevalence ``kappa * p1`` saturates at 1. When it
    saturates at the upper end the bound coincides with
    :func:`bounds_no_assumption`, so ``SelectionBand(0, UNBOUNDED)`` reproduces
    it exactly.
    """
    p1 = conditional_prevalence(county.gamma, acc)
    tau = county.tau
    lo = tau * p1.p1_lo + (1.0 - tau) * _untested_share(sel.kappa_lo, p1.p1_lo)
    hi = tau * p1.p1_hi + (1.0 - tau) * _untested_share(sel.kappa_hi, p1.p1_hi)
    return PrevalenceInterval(_clamp01(lo), _clamp01(hi))


def scenario_bounds(county: ObservedCounty, acc: AccuracyBand, selection: Selection) -> PrevalenceInterval:
    if selection is NO_ASSUMPTION:
        return bounds_no_assumption(county, acc)
    return bounds_with_selection(county, acc, selection)


def run_scenarios(
    county: ObservedCounty, acc: AccuracyBand, scenarios: ScenarioSet
) -> list[tuple[str, PrevalenceInterval]]:
    """Evaluate every scenario for one county, in scenario order.

    An error in any scenario is re-raised with the scenario name attached.
    """
    if len(scenarios) == 0:
        raise EmptyScenarioSet("scenario set is empty")
    out = []
    for scenario in scenarios:
        try:
            out.append((scenario.name, scenario_bounds(county, acc, scenario.selection)))
        except ValidationError as exc:
            raise type(exc)(f"county {county.name!r}, scenario {scenario.name!r}: {exc}") from exc
    return out


def bounds_table(
    counties: Sequence[ObservedCounty], acc: AccuracyBand, scenarios: ScenarioSet
) -> list[list[tuple[str, PrevalenceInterval]]]:
    """:func:`run_scenarios` over many counties, results in input order."""
    return [run_scenarios(county, acc, scenarios) for county in counties]
