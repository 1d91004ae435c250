"""Accuracy bands for a field test validated against an imperfect reference.

A validation study reports the field test's *apparent* sensitivity and
specificity, i.e. agreement with a reference test ``r`` rather than with the
infection status ``c``. If the reference itself misses infections, the true
accuracy of the field test is only set-identified. This module computes the
interval hull of (sigma, pi) over every joint distribution P(a, r, c)
consistent with the study.

Fixing the reference sensitivity ``s`` and the study prevalence ``p`` pins
the four (r, c) cell masses. The apparent accuracies then fix how much of
``a = 1`` falls in each reference stratum, leaving two free masses:

* ``y = P(a=1, r=1, c=1)`` with ``P(a=1, r=1, c=0) = P(a=1, r=1) - y``
* ``x = P(a=1, r=0, c=1)`` with ``P(a=1, r=0, c=0) = P(a=1, r=0) - x``

Both live in boxes set by the cell masses, and sigma and pi are both affine
and increasing in ``x + y``. The grid therefore runs over (s, p) only; within
each grid cell the extremes are taken exactly at the box corners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AccuracyBand, _probability
from .errors import NoFeasibleDistribution, ValidationError

DEFAULT_GRID_STEPS = 1001

# Feasibility slack for box bounds that coincide up to rounding.
_EPS = 1e-12


@dataclass(frozen=True)
class ReferenceStudy:
    """Apparent accuracy of a field test plus what is known of the reference.

    ``ref_positive_share`` is P(r=1) in the study; leave it ``None`` when the
    study composition is unknown.
    """

    apparent_sens: float
    apparent_spec: float
    ref_sens_lo: float
    ref_sens_hi: float
    ref_spec: float = 1.0
    ref_positive_share: float | None = None

    def __post_init__(self):
        for name in ("apparent_sens", "apparent_spec", "ref_sens_lo", "ref_sens_hi", "ref_spec"):
            object.__setattr__(self, name, _probability(getattr(self, name), name))
        if self.ref_positive_share is not None:
            object.__setattr__(
                self, "ref_positive_share", _probability(self.ref_positive_share, "ref_positive_share")
            )
        if self.ref_sens_lo > self.ref_sens_hi:
            raise ValidationError(
                f"ref_sens_lo {self.ref_sens_lo} exceeds ref_sens_hi {self.ref_sens_hi}"
            )


def study_grid(study: ReferenceStudy, grid_steps: int):
    """Grid nodes ``(s, p)`` visited by :func:`derive_accuracy_band`.

    ``s`` runs over an endpoint-inclusive grid of the reference sensitivity
    band. Without a known composition, ``p`` runs over ``k / (n + 1)`` for
    ``k = 1..n`` (the open unit interval). With ``ref_positive_share`` the
    study prevalence follows from ``P(r=1) = s p + (1 - ref_spec)(1 - p)``
    and nodes with ``p`` outside (0, 1) are dropped.
    """
    if isinstance(grid_steps, bool) or not isinstance(grid_steps, int) or grid_steps < 2:
        raise ValidationError(f"grid_steps must be an integer >= 2, got {grid_steps!r}")
    s = np.linspace(study.ref_sens_lo, study.ref_sens_hi, grid_steps)
    false_pos = 1.0 - study.ref_spec
    q = study.ref_positive_share
    if q is None:
        p = np.arange(1, grid_steps + 1) / (grid_steps + 1)
        S, P = np.meshgrid(s, p, indexing="ij")
        return S.ravel(), P.ravel()
    denom = s - false_pos
    degenerate = np.abs(denom) < _EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (q - false_pos) / denom
    keep = ~degenerate & (p > 0.0) & (p < 1.0)
    S, P = s[keep], p[keep]
    if degenerate.any() and abs(q - false_pos) < _EPS:
        # P(r=1) does not depend on p here, so p stays free
        p_free = np.arange(1, grid_steps + 1) / (grid_steps + 1)
        s_deg = s[degenerate]
        Sd, Pd = np.meshgrid(s_deg, p_free, indexing="ij")
        S = np.concatenate([S, Sd.ravel()])
        P = np.concatenate([P, Pd.ravel()])
    return S, P


def accuracy_ranges(study: ReferenceStudy, s: np.ndarray, p: np.ndarray):
    """Per-node sensitivity/specificity ranges and a feasibility mask.

    Returns ``(sigma_lo, sigma_hi, pi_lo, pi_hi, feasible)`` arrays aligned
    with ``s`` and ``p``.
    """
    rs = study.ref_spec
    m11 = s * p                     # r=1, c=1
    m10 = (1.0 - rs) * (1.0 - p)    # r=1, c=0
    m01 = (1.0 - s) * p             # r=0, c=1
    m00 = rs * (1.0 - p)            # r=0, c=0
    pos_r1 = study.apparent_sens * (m11 + m10)
    pos_r0 = (1.0 - study.apparent_spec) * (m01 + m00)

    y_lo = np.maximum(0.0, pos_r1 - m10)
    y_hi = np.minimum(m11, pos_r1)
    x_lo = np.maximum(0.0, pos_r0 - m00)
    x_hi = np.minimum(m01, pos_r0)
    feasible = (y_lo <= y_hi + _EPS) & (x_lo <= x_hi + _EPS)

    a_pos = pos_r1 + pos_r0
    tp_lo, tp_hi = x_lo + y_lo, np.maximum(x_lo + y_lo, x_hi + y_hi)
    sigma_lo = tp_lo / p
    sigma_hi = tp_hi / p
    pi_lo = 1.0 - (a_pos - tp_lo) / (1.0 - p)
    pi_hi = 1.0 - (a_pos - tp_hi) / (1.0 - p)
    return sigma_lo, sigma_hi, pi_lo, pi_hi, feasible


def derive_accuracy_band(study: ReferenceStudy, grid_steps: int = DEFAULT_GRID_STEPS) -> AccuracyBand:
    """Sharp (sigma, pi) hull consistent with ``study``, by grid extremization.

    Raises :class:`NoFeasibleDistribution` when no grid node admits a joint
    distribution. The result is not guaranteed to be informative: with the
    study composition unknown the specificity can fall towards 0 as the
    study prevalence approaches 1.
    """
    s, p = study_grid(study, grid_steps)
    if s.size == 0:
        raise NoFeasibleDistribution(
            "reference positive share is incompatible with every study prevalence in (0, 1)"
        )
    sigma_lo, sigma_hi, pi_lo, pi_hi, feasible = accuracy_ranges(study, s, p)
    if not feasible.any():
        raise NoFeasibleDistribution("apparent accuracy is incompatible with the reference band")
    clip = lambda v: float(min(1.0, max(0.0, v)))
    return AccuracyBand(
        clip(sigma_lo[feasible].min()),
        clip(sigma_hi[feasible].max()),
        clip(pi_lo[feasible].min()),
        clip(pi_hi[feasible].max()),
    )
