"""
productivity.py — Fractional Scientific Strength at SDS, UDA and university level.

FSS_S of a (university, SDS) cell is the field-normalized, fractionally credited
citation output of its roster divided by the roster's salary cost. UDA and
university scores are salary-weighted means of FSS_S / national mean over the
university's SDSs. All sums go through math.fsum over key-sorted inputs, so
results do not depend on row order or on the number of workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import pandas as pd

from credit import contribution_of
from errors import DomainError
from model import OVERALL_SCOPE, Level
from normalize import BaselineTable, scaled_citation

logger = logging.getLogger(__name__)

Key = tuple[str, str]  # (university_id, scope_code)


@dataclass(frozen=True)
class ScoreSet:
    level: Level
    scores: Mapping[Key, float]
    salary_mass: Mapping[Key, float]

    def __post_init__(self):
        if set(self.scores) != set(self.salary_mass):
            raise DomainError("Every score needs a matching salary mass")
        object.__setattr__(self, "scores", MappingProxyType(dict(sorted(self.scores.items()))))
        object.__setattr__(self, "salary_mass", MappingProxyType(dict(sorted(self.salary_mass.items()))))

    @property
    def scope_codes(self) -> list[str]:
        return sorted({scope for _, scope in self.scores})

    def for_scope(self, scope_code: str) -> dict[str, float]:
        return {univ: fss for (univ, scope), fss in self.scores.items() if scope == scope_code}

    def to_frame(self) -> pd.DataFrame:
        rows = [
            [self.level.value, univ, scope, fss, self.salary_mass[(univ, scope)]]
            for (univ, scope), fss in self.scores.items()
        ]
        return pd.DataFrame(rows, columns=["level", "university_id", "scope_code", "fss", "salary_mass"])

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> list[ScoreSet]:
        """Inverse of to_frame; one ScoreSet per level found in the frame.

        Numbers may arrive as text (a CSV read with dtype=str); float() parses
        them exactly, so a written and re-read ScoreSet compares equal.
        """
        sets = []
        for level in sorted(df["level"].unique()):
            part = df[df["level"] == level]
            keys = [(str(u), str(s)) for u, s in zip(part["university_id"], part["scope_code"])]
            sets.append(cls(
                Level(level),
                {k: float(v) for k, v in zip(keys, part["fss"])},
                {k: float(v) for k, v in zip(keys, part["salary_mass"])},
            ))
        return sets


@dataclass(frozen=True)
class NationalMeans:
    means: Mapping[str, float]  # sds_code → salary-weighted mean FSS_S of productive universities

    def __contains__(self, sds_code: str) -> bool:
        return sds_code in self.means

    def __getitem__(self, sds_code: str) -> float:
        return self.means[sds_code]


# ---------------------------------------------------------------------------
# SDS level
# ---------------------------------------------------------------------------

def _cell_score(ds, baselines: BaselineTable, university_id: str, sds_code: str,
                scaled: Mapping[str, float] | None = None) -> tuple[float, float]:
    """(FSS_S, salary mass) of one cell."""
    roster = ds.cell(university_id, sds_code)
    if not roster:
        raise DomainError(f"No researchers of {university_id} in SDS {sds_code}")
    convention = ds.taxonomy.convention_of(sds_code)
    weights = ds.config.credit_weights
    mass = math.fsum(ds.salary_of(r) for r in roster)

    members = {r.researcher_id for r in roster}
    pubs = {}
    for r in roster:
        for pub in ds.publications_by_researcher.get(r.researcher_id, ()):
            pubs[pub.pub_id] = pub

    terms = []
    for pub_id in sorted(pubs):
        pub = pubs[pub_id]
        c = scaled[pub_id] if scaled is not None else scaled_citation(pub, baselines)
        if c == 0:
            continue
        share = math.fsum(
            contribution_of(pub, rid, convention, weights)
            for rid in sorted(members & pub.roster_ids)
        )
        terms.append(c * share)
    return math.fsum(terms) / mass, mass


def fss_sds(ds, baselines: BaselineTable, university_id: str, sds_code: str) -> float:
    """FSS of one (university, SDS) cell."""
    return _cell_score(ds, baselines, university_id, sds_code)[0]


def compute_sds_scores(ds, baselines: BaselineTable, scaled: Mapping[str, float] | None = None,
                       workers: int = 1) -> ScoreSet:
    """FSS_S for every populated (university, SDS) cell."""
    keys = list(ds.cells)

    def score(key):
        return _cell_score(ds, baselines, key[0], key[1], scaled)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score, keys))
    else:
        results = [score(key) for key in keys]

    scores = {key: fss for key, (fss, _) in zip(keys, results)}
    masses = {key: mass for key, (_, mass) in zip(keys, results)}
    logger.info("Computed FSS for %d (university, SDS) cells", len(keys))
    return ScoreSet(Level.SDS, scores, masses)


# ---------------------------------------------------------------------------
# National means
# ---------------------------------------------------------------------------

def national_mean_fss_sds(scores: ScoreSet, sds_code: str) -> float:
    """Salary-weighted mean FSS_S over universities with positive productivity in the SDS."""
    productive = [
        (fss, scores.salary_mass[key])
        for key, fss in scores.scores.items()
        if key[1] == sds_code and fss > 0
    ]
    if not productive:
        raise DomainError(f"No university has positive productivity in SDS {sds_code}")
    return math.fsum(f * m for f, m in productive) / math.fsum(m for _, m in productive)


def compute_national_means(scores: ScoreSet) -> NationalMeans:
    means = {}
    for sds in scores.scope_codes:
        try:
            means[sds] = national_mean_fss_sds(scores, sds)
        except DomainError:
            logger.warning("SDS %s has no productive university; left out of roll-ups", sds)
    return NationalMeans(MappingProxyType(means))


# ---------------------------------------------------------------------------
# UDA and university roll-ups
# ---------------------------------------------------------------------------

def _rollup(sds_scores: ScoreSet, means: NationalMeans, university_id: str, sds_codes) -> tuple[float, float]:
    terms, masses = [], []
    for sds in sorted(sds_codes):
        key = (university_id, sds)
        if key not in sds_scores.scores or sds not in means:
            continue
        mass = sds_scores.salary_mass[key]
        terms.append(sds_scores.scores[key] / means[sds] * mass)
        masses.append(mass)
    if not masses:
        raise DomainError(f"{university_id} has no scored SDS with a national mean in this scope")
    total_mass = math.fsum(masses)
    return math.fsum(terms) / total_mass, total_mass


def fss_uda(ds, sds_scores: ScoreSet, means: NationalMeans, university_id: str, uda_code: str) -> float:
    """FSS of a university in one UDA."""
    return _rollup(sds_scores, means, university_id, ds.taxonomy.sds_in(uda_code))[0]


def fss_university(ds, sds_scores: ScoreSet, means: NationalMeans, university_id: str) -> float:
    """Overall FSS of a university across all its SDSs."""
    return _rollup(sds_scores, means, university_id, ds.taxonomy.sds_codes)[0]


def compute_uda_scores(ds, sds_scores: ScoreSet, means: NationalMeans) -> ScoreSet:
    scores, masses = {}, {}
    for uda in sorted(ds.taxonomy.uda_codes):
        sds_codes = ds.taxonomy.sds_in(uda)
        for univ in sorted(ds.universities):
            try:
                fss, mass = _rollup(sds_scores, means, univ, sds_codes)
            except DomainError:
                continue
            scores[(univ, uda)] = fss
            masses[(univ, uda)] = mass
    return ScoreSet(Level.UDA, scores, masses)


def compute_university_scores(ds, sds_scores: ScoreSet, means: NationalMeans) -> ScoreSet:
    scores, masses = {}, {}
    for univ in sorted(ds.universities):
        try:
            fss, mass = _rollup(sds_scores, means, univ, ds.taxonomy.sds_codes)
        except DomainError:
            continue
        scores[(univ, OVERALL_SCOPE)] = fss
        masses[(univ, OVERALL_SCOPE)] = mass
    return ScoreSet(Level.UNIVERSITY, scores, masses)
