"""
test_productivity.py — FSS at SDS, UDA and university level.

The two_university_dataset fixture is small enough to check by hand:
baselines are 20 for both (2005, CAT_A) and (2005, CAT_B); every researcher
costs 5 salary units over the period.

Run:  python -m pytest tests/test_productivity.py -v
"""

import math

import pandas as pd
import pytest

from conftest import make_dataset, make_pub
from errors import DomainError
from model import OVERALL_SCOPE, AcademicRank, Level, Researcher
from normalize import build_baselines
from productivity import (
    ScoreSet, compute_national_means, compute_sds_scores, compute_uda_scores,
    compute_university_scores, fss_sds, fss_uda, fss_university, national_mean_fss_sds,
)
from reports import write_csv


@pytest.fixture
def scored(two_university_dataset):
    ds = two_university_dataset
    baselines = build_baselines(ds)
    sds = compute_sds_scores(ds, baselines)
    means = compute_national_means(sds)
    return ds, baselines, sds, means


# =========================================================================
# SDS level
# =========================================================================

class TestSdsScores:
    def test_hand_computed_cells(self, scored):
        _, _, sds, _ = scored
        assert sds.scores[("U1", "S1")] == pytest.approx(0.05)
        assert sds.scores[("U2", "S1")] == pytest.approx(0.3)
        assert sds.scores[("U1", "S2")] == pytest.approx(0.1)
        assert sds.scores[("U2", "S2")] == pytest.approx(0.2)
        assert sds.salary_mass[("U1", "S1")] == pytest.approx(10.0)

    def test_single_cell(self, scored):
        ds, baselines, _, _ = scored
        assert fss_sds(ds, baselines, "U2", "S1") == pytest.approx(0.3)

    def test_empty_cell(self, scored):
        ds, baselines, _, _ = scored
        with pytest.raises(DomainError):
            fss_sds(ds, baselines, "U3", "S1")

    def test_workers_do_not_change_results(self, scored):
        ds, baselines, sds, _ = scored
        assert compute_sds_scores(ds, baselines, workers=4).scores == sds.scores

    def test_co_authors_in_one_cell_are_counted_once_each(self, dataset_factory):
        researchers = [
            Researcher("R1", "U1", "S1", AcademicRank.ASSISTANT),
            Researcher("R2", "U1", "S1", AcademicRank.ASSISTANT),
        ]
        pubs = [make_pub("P1", [("R1", "U1"), ("R2", "U1"), (None, "X")], citations=5)]
        ds = dataset_factory(researchers, pubs)
        scores = compute_sds_scores(ds, build_baselines(ds))
        assert scores.scores[("U1", "S1")] == pytest.approx((2 / 3) / 10)


# =========================================================================
# National means and roll-ups
# =========================================================================

class TestRollups:
    def test_national_means(self, scored):
        _, _, sds, means = scored
        assert means["S1"] == pytest.approx(2 / 15)
        assert means["S2"] == pytest.approx(0.15)
        assert national_mean_fss_sds(sds, "S1") == means["S1"]

    def test_no_productive_university(self):
        scores = ScoreSet(Level.SDS, {("U1", "S1"): 0.0}, {("U1", "S1"): 5.0})
        with pytest.raises(DomainError):
            national_mean_fss_sds(scores, "S1")
        assert "S1" not in compute_national_means(scores)

    def test_university_scores(self, scored):
        ds, _, sds, means = scored
        assert fss_university(ds, sds, means, "U1") == pytest.approx(7.0833333333 / 15)
        assert fss_university(ds, sds, means, "U2") == pytest.approx(1.7916666667)

    def test_uda_equals_university_with_one_uda(self, scored):
        ds, _, sds, means = scored
        assert fss_uda(ds, sds, means, "U1", "UDA_1") == pytest.approx(fss_university(ds, sds, means, "U1"))

    def test_weighted_mean_closure(self, scored):
        ds, _, sds, means = scored
        univ = compute_university_scores(ds, sds, means)
        total = math.fsum(f * univ.salary_mass[k] for k, f in univ.scores.items())
        mass = math.fsum(univ.salary_mass.values())
        assert total / mass == pytest.approx(1.0, abs=1e-9)

    def test_score_set_scopes(self, scored):
        ds, _, sds, means = scored
        uda = compute_uda_scores(ds, sds, means)
        univ = compute_university_scores(ds, sds, means)
        assert uda.level is Level.UDA and uda.scope_codes == ["UDA_1"]
        assert univ.scope_codes == [OVERALL_SCOPE]


# =========================================================================
# Frames
# =========================================================================

class TestScoreFrames:
    def test_frame_round_trip(self, scored):
        _, _, sds, _ = scored
        [again] = ScoreSet.from_frame(sds.to_frame())
        assert again == sds

    def test_mismatched_keys_rejected(self):
        with pytest.raises(DomainError):
            ScoreSet(Level.SDS, {("U1", "S1"): 1.0}, {})

    def test_csv_text_round_trip_is_exact(self, tmp_path):
        keys = [("U1", "S1"), ("U2", "S1"), ("U3", "S1")]
        scores = ScoreSet(Level.SDS, dict(zip(keys, [0.04547774665421725, 1 / 3, 2 / 7])),
                          dict(zip(keys, [5.0, 12.5, 0.1 + 0.2])))
        path = write_csv(scores.to_frame(), tmp_path / "scores_sds.csv")
        [again] = ScoreSet.from_frame(pd.read_csv(path, dtype=str, keep_default_na=False))
        assert dict(again.scores) == dict(scores.scores)
        assert dict(again.salary_mass) == dict(scores.salary_mass)
