"""
ranking.py — Percentile ranking lists and quintile classes per scope.

Within a scope, universities are sorted by FSS ascending (ties by university_id),
rank 1 is the worst, percentile = 100·(rank−1)/(N−1), and classes are read off
the percentile: E = [0,20], D = (20,40], C = (40,60], B = (60,80], A = (80,100].
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import pandas as pd

from model import OVERALL_SCOPE, Level, QuintileClass
from productivity import ScoreSet

logger = logging.getLogger(__name__)

RANKING_COLUMNS = ["level", "scope_code", "university_id", "fss", "rank", "percentile", "class"]


@dataclass(frozen=True)
class RankingEntry:
    university_id: str
    fss: float
    rank: int
    percentile: float
    quintile: QuintileClass


@dataclass(frozen=True)
class RankingList:
    level: Level
    scope_code: str
    entries: tuple[RankingEntry, ...]

    @property
    def scope(self) -> tuple[Level, str]:
        return self.level, self.scope_code

    def __len__(self) -> int:
        return len(self.entries)

    def class_of(self, university_id: str) -> QuintileClass | None:
        for entry in self.entries:
            if entry.university_id == university_id:
                return entry.quintile
        return None

    def class_counts(self) -> dict[QuintileClass, int]:
        counts = Counter(e.quintile for e in self.entries)
        return {q: counts.get(q, 0) for q in QuintileClass}

    def values(self) -> dict[str, float]:
        return {e.university_id: e.fss for e in self.entries}

    def to_rows(self) -> list[list]:
        return [
            [self.level.value, self.scope_code, e.university_id, e.fss, e.rank, e.percentile, e.quintile.letter]
            for e in self.entries
        ]


def sort_key(university_id: str, fss: float) -> tuple[float, str]:
    """Scores equal to 12 significant digits tie and fall back to university_id."""
    return float(f"{fss:.12g}"), university_id


def rank_values(level: Level, scope_code: str, values: Mapping[str, float]) -> RankingList | None:
    """Rank a {university_id: fss} mapping. None (with a warning) when fewer than 2 entries."""
    n = len(values)
    if n < 2:
        logger.warning("Skipping %s scope %s: %d rankable universit%s",
                       level.value, scope_code, n, "y" if n == 1 else "ies")
        return None
    ordered = sorted(values.items(), key=lambda item: sort_key(*item))
    entries = []
    for i, (univ, fss) in enumerate(ordered):
        rank = i + 1
        percentile = 100 * (rank - 1) / (n - 1)
        entries.append(RankingEntry(univ, fss, rank, percentile, QuintileClass.from_percentile(percentile)))
    return RankingList(level, scope_code, tuple(entries))


def rank_and_classify(scores: ScoreSet, scope_code: str, eligible=None) -> RankingList | None:
    """Ranking list for one scope of a ScoreSet, optionally restricted to eligible universities."""
    values = scores.for_scope(scope_code)
    if eligible is not None:
        values = {u: f for u, f in values.items() if u in eligible}
    return rank_values(scores.level, scope_code, values)


def eligible_universities(ds, level: Level, scope_code: str = OVERALL_SCOPE) -> frozenset[str]:
    """Universities with enough research staff to be ranked in the scope.

    University level: headcount over all analyzed SDSs >= min_staff_university.
    UDA level: headcount in the UDA >= min_staff_uda. SDS level: every active university.
    """
    if level is Level.SDS:
        return frozenset(univ for univ, sds in ds.cells if sds == scope_code)
    if level is Level.UDA:
        threshold = ds.config.min_staff_uda
        members = [r for r in ds.researchers if ds.taxonomy.uda_of(r.sds_code) == scope_code]
    else:
        threshold = ds.config.min_staff_university
        members = list(ds.researchers)
    headcount = Counter(r.university_id for r in members)
    return frozenset(univ for univ, count in headcount.items() if count >= threshold)


def rank_all(ds, scores: ScoreSet) -> list[RankingList]:
    """Rank every scope of a ScoreSet, applying the staff thresholds of its level."""
    rankings = []
    for scope in scores.scope_codes:
        ranking = rank_and_classify(scores, scope, eligible_universities(ds, scores.level, scope))
        if ranking is not None:
            rankings.append(ranking)
    logger.info("Ranked %d %s scope(s)", len(rankings), scores.level.value)
    return rankings


def rankings_frame(rankings: list[RankingList]) -> pd.DataFrame:
    rows = [row for ranking in rankings for row in ranking.to_rows()]
    return pd.DataFrame(rows, columns=RANKING_COLUMNS)


def rankings_from_frame(df: pd.DataFrame) -> list[RankingList]:
    """Rebuild ranking lists from a rankings.csv frame (read with dtype=str)."""
    rankings = []
    for (level, scope), part in df.groupby(["level", "scope_code"], sort=True):
        entries = tuple(
            RankingEntry(str(row["university_id"]), float(row["fss"]), int(row["rank"]),
                         float(row["percentile"]), QuintileClass.from_letter(str(row["class"])))
            for row in part.sort_values("rank", key=lambda s: s.astype(int)).to_dict("records")
        )
        rankings.append(RankingList(Level(level), str(scope), entries))
    return rankings
