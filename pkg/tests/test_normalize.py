"""
test_normalize.py — Citation baselines and field-normalized citations.

Run:  python -m pytest tests/test_normalize.py -v
"""

import pytest

from conftest import make_dataset, make_pub
from errors import AnalysisError
from model import AcademicRank, AnalysisConfig, BaselineScope, MultiCategoryRule, Researcher
from normalize import build_baselines, scaled_citation, scaled_citations

RESEARCHERS = [Researcher("R1", "U1", "S1", AcademicRank.FULL)]


def dataset(pubs, **config):
    return make_dataset(RESEARCHERS, pubs, config=AnalysisConfig(**config))


PUBS = [
    make_pub("P1", [("R1", "U1")], citations=10, categories=("A",)),
    make_pub("P2", [("R1", "U1")], citations=30, categories=("A",)),
    make_pub("P3", [("R1", "U1")], citations=0, categories=("A",)),
    make_pub("P4", [("R1", "U1")], citations=8, categories=("A", "B")),
    make_pub("P5", [("R1", "U1")], citations=4, categories=("B",)),
    make_pub("P6", [("R1", "U1")], citations=6, categories=("A",), year=2006),
]


# =========================================================================
# Baselines
# =========================================================================

class TestBaselines:
    def test_cited_only_skips_uncited(self):
        baselines = build_baselines(dataset(PUBS))
        assert baselines.mean(2005, "A") == pytest.approx((10 + 30 + 8) / 3)
        assert baselines.counts[(2005, "A")] == 3
        assert baselines.mean(2005, "B") == pytest.approx(6.0)
        assert baselines.mean(2006, "A") == pytest.approx(6.0)

    def test_all_scope_counts_uncited(self):
        baselines = build_baselines(dataset(PUBS, baseline_scope=BaselineScope.ALL))
        assert baselines.mean(2005, "A") == pytest.approx(48 / 4)

    def test_all_scope_skips_cells_with_no_citations(self):
        pubs = [make_pub("P1", [("R1", "U1")], citations=0, categories=("Z",))]
        baselines = build_baselines(dataset(pubs, baseline_scope=BaselineScope.ALL))
        assert baselines.mean(2005, "Z") is None

    def test_unknown_cell(self):
        assert build_baselines(dataset(PUBS)).mean(1999, "A") is None


# =========================================================================
# Scaled citations
# =========================================================================

class TestScaledCitation:
    def test_single_category(self):
        baselines = build_baselines(dataset(PUBS))
        assert scaled_citation(PUBS[1], baselines) == pytest.approx(30 / 16)

    def test_uncited_is_zero(self):
        baselines = build_baselines(dataset(PUBS))
        assert scaled_citation(PUBS[2], baselines) == 0.0

    def test_mean_of_ratios(self):
        baselines = build_baselines(dataset(PUBS))
        expected = (8 / 16 + 8 / 6) / 2
        assert scaled_citation(PUBS[3], baselines) == pytest.approx(expected)

    def test_primary_category(self):
        ds = dataset(PUBS, multi_category_rule=MultiCategoryRule.PRIMARY_CATEGORY)
        assert scaled_citation(PUBS[3], build_baselines(ds)) == pytest.approx(8 / 16)

    def test_mean_scaled_citation_of_a_cell_is_one(self):
        ds = dataset(PUBS)
        scaled = scaled_citations(ds, build_baselines(ds))
        cited_2006 = [scaled["P6"]]
        assert sum(cited_2006) / len(cited_2006) == pytest.approx(1.0)

    def test_cited_publication_without_baseline(self):
        baselines = build_baselines(dataset(PUBS[:1]))
        stray = make_pub("PX", [("R1", "U1")], citations=3, categories=("Q",))
        with pytest.raises(AnalysisError, match="PX"):
            scaled_citation(stray, baselines)
