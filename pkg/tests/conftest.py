"""
conftest.py — Shared setup for the offline test suite.

No network access or proprietary data required.
"""

import sys
from pathlib import Path

import pytest

# ---------------------------------------------------------------------------
# Make tools/ importable
# ---------------------------------------------------------------------------
TOOLS_DIR = Path(__file__).resolve().parent.parent / "tools"
sys.path.insert(0, str(TOOLS_DIR))

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"

from model import (  # noqa: E402
    AcademicRank, AnalysisConfig, Authorship, BylineConvention, Publication, Researcher,
    SalaryTable, SdsEntry, Taxonomy,
)


def make_pub(pub_id, authors, year=2005, citations=10, categories=("CAT_A",)):
    """authors: list of (researcher_id or None, affiliation or None)."""
    byline = tuple(
        Authorship(i + 1, f"k_{pub_id}_{i + 1}", rid, aff) for i, (rid, aff) in enumerate(authors)
    )
    return Publication(pub_id, year, citations, tuple(categories), byline)


SALARIES = {AcademicRank.ASSISTANT: 1.0, AcademicRank.ASSOCIATE: 1.4, AcademicRank.FULL: 2.0}


def make_dataset(researchers, publications, taxonomy=None, config=None, salaries=None):
    from ingest import Dataset

    if taxonomy is None:
        codes = sorted({r.sds_code for r in researchers})
        taxonomy = Taxonomy(tuple(SdsEntry(s, "UDA_1", BylineConvention.ALPHABETICAL) for s in codes))
    return Dataset(
        taxonomy=taxonomy,
        universities=frozenset(r.university_id for r in researchers),
        researchers=tuple(researchers),
        publications=tuple(publications),
        salary_table=SalaryTable(salaries or SALARIES),
        config=config or AnalysisConfig(min_staff_university=1, min_staff_uda=1),
    )


@pytest.fixture
def pub_factory():
    return make_pub


@pytest.fixture
def dataset_factory():
    return make_dataset


@pytest.fixture
def two_university_dataset():
    """Two universities, two SDSs in one UDA, alphabetical bylines, hand-checkable numbers.

    Every researcher is an assistant (salary 1 per year, 5 years = 5 per head).
    """
    researchers = [
        Researcher("R1", "U1", "S1", AcademicRank.ASSISTANT),
        Researcher("R2", "U1", "S1", AcademicRank.ASSISTANT),
        Researcher("R3", "U2", "S1", AcademicRank.ASSISTANT),
        Researcher("R4", "U1", "S2", AcademicRank.ASSISTANT),
        Researcher("R5", "U2", "S2", AcademicRank.ASSISTANT),
    ]
    pubs = [
        make_pub("P1", [("R1", "U1"), ("R2", "U1")], citations=10),
        make_pub("P2", [("R3", "U2")], citations=30),
        make_pub("P3", [("R4", "U1"), (None, "X")], citations=20, categories=("CAT_B",)),
        make_pub("P4", [("R5", "U2")], citations=20, categories=("CAT_B",)),
        make_pub("P5", [("R1", "U1")], citations=0),
    ]
    return make_dataset(researchers, pubs)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR
