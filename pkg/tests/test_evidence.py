"""Evidence layer: tail risks, their ratio, tipping point, discrete tables."""
from __future__ import annotations

import math

import numpy as np
import pytest

from tailratio import (
    BloodTypeTable,
    DomainError,
    MixtureModel,
    NoTippingPointError,
    REFERENCE_NONMATED_MODEL,
    ToyScenario,
    alpha_tail,
    beta_tail,
    discrete_woe,
    evidence_numbers,
    score_lr,
    specific_source_lr,
    tipping_score,
)

REF = REFERENCE_NONMATED_MODEL
MATED_20_8 = MixtureModel.from_parts([1.0], [20.0], [8.0], origin="mated")

ABO = BloodTypeTable.from_mapping({"O": 0.44, "A": 0.42, "B": 0.10, "AB": 0.04})


class TestTails:
    def test_alpha_is_left_tail_of_mated(self):
        assert alpha_tail(MATED_20_8, 0.0) == pytest.approx(0.07585818002124355, rel=1e-12)

    def test_beta_is_right_tail_of_nonmated(self):
        assert beta_tail(REF, 0.0) == pytest.approx(0.0007371214611347743, rel=1e-12)

    def test_evidence_numbers_at_zero(self):
        rep = evidence_numbers(MATED_20_8, REF, 0.0)
        assert rep.ratio == pytest.approx(102.91137081324747, rel=1e-12)
        assert rep.ratio == rep.alpha / rep.beta
        assert not rep.saturated
        assert rep.slr == pytest.approx(130.4607158687933, rel=1e-9)

    def test_ratio_and_slr_disagree_in_general(self):
        rep = evidence_numbers(MATED_20_8, REF, 0.0)
        assert abs(math.log(rep.ratio) - math.log(rep.slr)) > 0.1

    def test_saturation_reports_inf_with_flag(self):
        rep = evidence_numbers(MATED_20_8, REF, 50_000.0)
        assert rep.beta == 0.0
        assert rep.ratio == math.inf
        assert rep.saturated

    def test_score_lr_saturates_to_inf(self):
        assert score_lr(MATED_20_8, REF, 50_000.0) == math.inf


class TestTippingPoint:
    def test_crossing_found_with_tight_gap(self):
        tp = tipping_score(MATED_20_8, REF)
        assert tp.score == pytest.approx(-21.847819474212805, abs=1e-6)
        assert abs(tp.alpha - tp.beta) < 1e-9

    def test_slr_at_crossing_is_not_one(self):
        # equal tail risks do not imply equal densities
        tp = tipping_score(MATED_20_8, REF)
        assert tp.slr == pytest.approx(1.39350598503488, abs=1e-6)
        assert tp.slr != pytest.approx(1.0, abs=0.1)

    def test_identical_models_cross_at_median_with_slr_one(self):
        tp = tipping_score(REF, REF)
        assert alpha_tail(REF, tp.score) == pytest.approx(0.5, abs=1e-9)
        assert tp.slr == pytest.approx(1.0, rel=1e-9)


class TestDiscreteWoe:
    def test_correspondence_ratio(self):
        woe = discrete_woe(ABO)
        assert woe.correspondence_ratio == pytest.approx(2.620545073375262, rel=1e-12)

    def test_per_type_ratios(self):
        woe = discrete_woe(ABO)
        assert woe.per_type_lr["O"] == pytest.approx(25.0 / 11.0, rel=1e-12)
        assert woe.per_type_lr["A"] == pytest.approx(100.0 / 42.0, rel=1e-12)
        assert woe.per_type_lr["B"] == pytest.approx(10.0, rel=1e-12)
        assert woe.per_type_lr["AB"] == pytest.approx(25.0, rel=1e-12)

    def test_unknown_type_rejected(self):
        with pytest.raises(DomainError):
            discrete_woe(ABO, observed_type="C")

    def test_table_frequencies_must_sum_to_one(self):
        with pytest.raises(DomainError):
            BloodTypeTable.from_mapping({"X": 0.5, "Y": 0.4})

    def test_single_type_population_allowed(self):
        woe = discrete_woe(BloodTypeTable.from_mapping({"only": 1.0}))
        assert woe.correspondence_ratio == pytest.approx(1.0)


class TestToyScenario:
    def test_total_sd_is_hypotenuse(self):
        sc = ToyScenario(pop_mean=0.0, between_sd=3.0, within_sd=4.0, source_mean=0.0)
        assert sc.total_sd == pytest.approx(5.0)

    def test_rejects_doubly_degenerate(self):
        with pytest.raises(DomainError):
            ToyScenario(pop_mean=0.0, between_sd=0.0, within_sd=0.0, source_mean=0.0)

    def test_hypothesis_label_checked(self):
        with pytest.raises(DomainError):
            ToyScenario(pop_mean=0.0, between_sd=1.0, within_sd=0.5, source_mean=0.0, hypothesis="H2")

    def test_specific_source_lr_peaks_at_source(self):
        sc = ToyScenario(pop_mean=0.0, between_sd=1.0, within_sd=0.5, source_mean=0.0)
        at_source = specific_source_lr(sc, 0.0)
        assert at_source > specific_source_lr(sc, 1.0) > specific_source_lr(sc, 2.0)
        # closed form at the source mean: ratio of the two peak densities
        assert at_source == pytest.approx(sc.total_sd / sc.within_sd, rel=1e-12)

    def test_specific_source_lr_needs_positive_within(self):
        sc = ToyScenario(pop_mean=0.0, between_sd=1.0, within_sd=0.0, source_mean=0.0)
        with pytest.raises(DomainError):
            specific_source_lr(sc, 0.0)
