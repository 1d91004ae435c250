import itertools
import math

import numpy as np
import pytest

from prevbounds import (
    NO_ASSUMPTION,
    STANDARD_SCENARIOS,
    STANDARD_Q_BAND,
    UNBOUNDED,
    AccuracyBand,
    EmptyScenarioSet,
    InfeasibleAccuracy,
    ObservedCounty,
    PrevalenceInterval,
    ScenarioSet,
    SelectionBand,
    ValidationError,
    bounds_no_assumption,
    bounds_table,
    bounds_with_selection,
    conditional_prevalence,
    run_scenarios,
)

GRAZ = ObservedCounty("Graz-Stadt", 0.0090, 0.2065)
WIEN = ObservedCounty("Wien", 0.0032, 0.1310)
PERFECT = AccuracyBand(1.0, 1.0, 1.0, 1.0)


def pct(x):
    return round(100 * x, 2)


def brute_rho(county, acc, kappa=None, n=201):
    """Pure-Python grid over (sigma, pi, p0); independent of the package oracle."""
    lo, hi = math.inf, -math.inf
    sig = np.linspace(acc.sigma_lo, acc.sigma_hi, n)
    pis = np.linspace(acc.pi_lo, acc.pi_hi, n)
    for s, p in itertools.product(sig, pis):
        p1 = min(1.0, max(0.0, (county.gamma + p - 1) / (s + p - 1)))
        if kappa is None:
            p0s = (0.0, 1.0)
        else:
            p0s = (min(1.0, kappa[0] * p1), min(1.0, kappa[1] * p1))
        for p0 in p0s:
            rho = county.tau * p1 + (1 - county.tau) * p0
            lo, hi = min(lo, rho), max(hi, rho)
    return lo, hi


class TestConditionalPrevalence:
    def test_graz(self):
        p1 = conditional_prevalence(0.0090, STANDARD_Q_BAND)
        assert p1.p1_lo == pytest.approx(0.004932, abs=5e-7)
        assert p1.p1_hi == pytest.approx(0.016797, abs=5e-7)
        # times one: No Selection column for Graz-Stadt
        assert (pct(p1.p1_lo), pct(p1.p1_hi)) == (0.49, 1.68)

    def test_perfect_test_is_identity(self):
        p1 = conditional_prevalence(0.30, PERFECT)
        assert (p1.p1_lo, p1.p1_hi) == (0.30, 0.30)

    def test_negative_numerator_clamps_to_zero(self):
        p1 = conditional_prevalence(0.0021, STANDARD_Q_BAND)
        assert p1.p1_lo == 0.0
        # grid check: the unclamped inverse does go negative in the band, and
        # nothing below zero survives clamping
        s, p = np.meshgrid(np.linspace(0.5358, 0.8765, 101), np.linspace(0.9953, 1.0, 101))
        raw = (0.0021 + p - 1) / (s + p - 1)
        assert raw.min() < 0
        assert np.clip(raw, 0, 1).min() == 0.0

    def test_yield_above_sensitivity_clamps_to_one(self):
        p1 = conditional_prevalence(0.85, AccuracyBand(0.6, 0.9, 0.8, 1.0))
        assert p1.p1_hi == 1.0
        assert p1.p1_lo == pytest.approx((0.85 + 0.8 - 1) / (0.9 + 0.8 - 1))

    @pytest.mark.parametrize("band", [(0.4, 0.5, 0.4, 0.5), (0.5, 0.9, 0.5, 1.0)])
    def test_uninformative_band_rejected(self, band):
        with pytest.raises(InfeasibleAccuracy):
            conditional_prevalence(0.1, AccuracyBand(*band))


class TestNoAssumption:
    def test_graz(self):
        iv = bounds_no_assumption(GRAZ, STANDARD_Q_BAND)
        assert (pct(iv.lo), pct(iv.hi)) == (0.10, 79.70)

    def test_wien(self):
        iv = bounds_no_assumption(WIEN, STANDARD_Q_BAND)
        assert (pct(iv.lo), pct(iv.hi)) == (0.00, 86.98)

    def test_full_participation_point_identifies(self):
        iv = bounds_no_assumption(ObservedCounty("x", 0.30, 1.0), PERFECT)
        assert (iv.lo, iv.hi) == (0.30, 0.30)

    def test_matches_closed_form(self):
        # lower and upper bound in closed form, no clamping needed here
        g, t = GRAZ.gamma, GRAZ.tau
        b = STANDARD_Q_BAND
        lo = t * (g + b.pi_lo - 1) / (b.sigma_hi + b.pi_lo - 1)
        hi = t * (g + b.pi_hi - 1) / (b.sigma_lo + b.pi_hi - 1) + (1 - t)
        iv = bounds_no_assumption(GRAZ, b)
        assert iv.lo == pytest.approx(lo, abs=1e-15)
        assert iv.hi == pytest.approx(hi, abs=1e-15)

    def test_grid_oracle(self):
        iv = bounds_no_assumption(GRAZ, STANDARD_Q_BAND)
        lo, hi = brute_rho(GRAZ, STANDARD_Q_BAND)
        assert iv.lo == pytest.approx(lo, abs=1e-12)
        assert iv.hi == pytest.approx(hi, abs=1e-12)


class TestWithSelection:
    @pytest.mark.parametrize(
        "kappa, expected",
        [
            ((1, 1), (0.49, 1.68)),
            ((1, 2), (0.49, 3.01)),
            ((0.95, 1.05), (0.47, 1.75)),
            ((1, UNBOUNDED), (0.49, 79.70)),
        ],
    )
    def test_graz_published(self, kappa, expected):
        iv = bounds_with_selection(GRAZ, STANDARD_Q_BAND, SelectionBand(*kappa))
        assert (pct(iv.lo), pct(iv.hi)) == expected

    @pytest.mark.parametrize("county", [GRAZ, WIEN, ObservedCounty("z", 0.0, 0.4), ObservedCounty("o", 1.0, 0.3)])
    def test_vacuous_selection_reduces_exactly(self, county):
        a = bounds_with_selection(county, STANDARD_Q_BAND, SelectionBand(0, UNBOUNDED))
        b = bounds_no_assumption(county, STANDARD_Q_BAND)
        assert (a.lo, a.hi) == (b.lo, b.hi)

    def test_closed_form_when_cap_holds(self):
        # cap condition kappa_hi <= (sigma+pi-1)/(gamma+pi-1) at the upper corner
        b = STANDARD_Q_BAND
        g, t = GRAZ.gamma, GRAZ.tau
        k_lo, k_hi = 0.95, 1.05
        assert k_hi <= (b.sigma_lo + b.pi_hi - 1) / (g + b.pi_hi - 1)
        lo = (t + (1 - t) * k_lo) * (g + b.pi_lo - 1) / (b.sigma_hi + b.pi_lo - 1)
        hi = (t + (1 - t) * k_hi) * (g + b.pi_hi - 1) / (b.sigma_lo + b.pi_hi - 1)
        iv = bounds_with_selection(GRAZ, b, SelectionBand(k_lo, k_hi))
        assert iv.lo == pytest.approx(lo, rel=1e-12)
        assert iv.hi == pytest.approx(hi, rel=1e-12)

    def test_cap_violated_falls_back_to_no_assumption_upper(self):
        b = STANDARD_Q_BAND
        cap = (b.sigma_lo + b.pi_hi - 1) / (GRAZ.gamma + b.pi_hi - 1)
        iv = bounds_with_selection(GRAZ, b, SelectionBand(1, cap * 1.5))
        assert iv.hi == pytest.approx(bounds_no_assumption(GRAZ, b).hi, abs=1e-15)

    def test_unbounded_with_zero_tested_prevalence(self):
        county = ObservedCounty("zero", 0.0, 0.25)
        unb = bounds_with_selection(county, STANDARD_Q_BAND, SelectionBand(1, UNBOUNDED))
        fin = bounds_with_selection(county, STANDARD_Q_BAND, SelectionBand(1, 50))
        assert (unb.lo, unb.hi) == (0.0, 0.75)
        assert (fin.lo, fin.hi) == (0.0, 0.0)

    def test_custom_half_ratio(self):
        iv = bounds_with_selection(GRAZ, STANDARD_Q_BAND, SelectionBand(0.5, 0.5))
        assert (pct(iv.lo), pct(iv.hi)) == (0.30, 1.01)
        lo, hi = brute_rho(GRAZ, STANDARD_Q_BAND, (0.5, 0.5))
        assert (iv.lo, iv.hi) == pytest.approx((lo, hi), abs=1e-12)
        p1 = conditional_prevalence(GRAZ.gamma, STANDARD_Q_BAND)
        factor = GRAZ.tau + (1 - GRAZ.tau) * 0.5
        assert iv.lo == pytest.approx(factor * p1.p1_lo, rel=1e-12)
        assert iv.hi == pytest.approx(factor * p1.p1_hi, rel=1e-12)


class TestScenarios:
    def test_graz_five_presets(self):
        out = run_scenarios(GRAZ, STANDARD_Q_BAND, STANDARD_SCENARIOS)
        assert [name for name, _ in out] == STANDARD_SCENARIOS.names
        assert [(pct(iv.lo), pct(iv.hi)) for _, iv in out] == [
            (0.10, 79.70), (0.49, 1.68), (0.49, 79.70), (0.49, 3.01), (0.47, 1.75),
        ]

    def test_empty_set(self):
        with pytest.raises(EmptyScenarioSet):
            run_scenarios(GRAZ, STANDARD_Q_BAND, ScenarioSet([]))

    def test_error_names_scenario(self):
        bad = AccuracyBand(0.4, 0.5, 0.4, 0.5)
        with pytest.raises(InfeasibleAccuracy, match="No Assumption"):
            run_scenarios(GRAZ, bad, STANDARD_SCENARIOS)

    def test_duplicate_names(self):
        with pytest.raises(ValidationError, match="duplicate"):
            ScenarioSet([("a", NO_ASSUMPTION), ("a", SelectionBand(1, 1))])

    def test_table_keeps_order(self):
        out = bounds_table([WIEN, GRAZ], STANDARD_Q_BAND, STANDARD_SCENARIOS)
        assert out[1] == run_scenarios(GRAZ, STANDARD_Q_BAND, STANDARD_SCENARIOS)


class TestTypes:
    @pytest.mark.parametrize("gamma, tau", [(-0.1, 0.5), (0.5, 1.1), (float("nan"), 0.5), ("0.5", 0.5)])
    def test_county_rejects(self, gamma, tau):
        with pytest.raises(ValidationError):
            ObservedCounty("x", gamma, tau)

    def test_county_needs_name(self):
        with pytest.raises(ValidationError):
            ObservedCounty("  ", 0.1, 0.1)

    @pytest.mark.parametrize("band", [(0.9, 0.8, 0.9, 1.0), (0.8, 0.9, 1.0, 0.99), (0.8, 1.2, 0.9, 1.0)])
    def test_accuracy_rejects(self, band):
        with pytest.raises(ValidationError):
            AccuracyBand(*band)

    def test_point_band_allowed(self):
        band = AccuracyBand.point(0.8, 0.99)
        assert band.is_informative and band.sigma_lo == band.sigma_hi

    @pytest.mark.parametrize("kappa", [(2, 1), (-1, 1), (UNBOUNDED, UNBOUNDED), (float("nan"), 1)])
    def test_selection_rejects(self, kappa):
        with pytest.raises(ValidationError):
            SelectionBand(*kappa)

    def test_unbounded_orders_above_finite(self):
        assert SelectionBand(0, UNBOUNDED).contains(SelectionBand(1, 1e300))

    def test_interval_rejects(self):
        with pytest.raises(ValidationError):
            PrevalenceInterval(0.5, 0.4)
