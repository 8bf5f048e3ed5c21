"""
synth.py — Seeded synthetic academies for tests and demos.

Randomness comes from numpy's PCG64 bit generator (np.random.default_rng(seed)),
which numpy keeps stream-compatible across platforms and releases. Citations
follow a Zipf law capped at citation_cap, with a share of uncited papers.

Usage:
    from synth import SynthConfig, generate
    ds = generate(SynthConfig(seed=1))
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from config import DEFAULT_SALARIES
from errors import ConfigurationError
from ingest import Dataset
from model import (
    AcademicRank, AnalysisConfig, Authorship, BylineConvention, Period, Publication, Researcher,
    SalaryTable, SdsEntry, Taxonomy,
)

logger = logging.getLogger(__name__)

EXTERNAL_AFFILIATION = "EXT"


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 1
    n_universities: int = 8
    n_sds: int = 6
    n_uda: int = 2
    researchers_per_cell: tuple[int, int] = (1, 4)
    cell_presence: float = 1.0
    pubs_per_researcher: float = 3.0      # Poisson mean
    max_authors: int = 6
    external_author_share: float = 0.3
    uncited_share: float = 0.25
    zipf_exponent: float = 2.0
    citation_cap: int = 200
    n_categories: int = 5
    multi_category_share: float = 0.3
    share_position_weighted: float = 0.5
    period: Period = field(default_factory=lambda: Period(2004, 2008))
    min_staff_university: int = 3
    min_staff_uda: int = 2

    def __post_init__(self):
        counts = {
            "n_universities": self.n_universities, "n_sds": self.n_sds, "n_uda": self.n_uda,
            "max_authors": self.max_authors, "citation_cap": self.citation_cap,
            "n_categories": self.n_categories,
        }
        for name, value in counts.items():
            if value < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {value}")
        if self.n_uda > self.n_sds:
            raise ConfigurationError(f"n_uda ({self.n_uda}) cannot exceed n_sds ({self.n_sds})")
        low, high = self.researchers_per_cell
        if not 1 <= low <= high:
            raise ConfigurationError(f"researchers_per_cell must satisfy 1 <= low <= high, got {low, high}")
        probabilities = {
            "cell_presence": self.cell_presence,
            "external_author_share": self.external_author_share,
            "uncited_share": self.uncited_share,
            "multi_category_share": self.multi_category_share,
            "share_position_weighted": self.share_position_weighted,
        }
        for name, value in probabilities.items():
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must be in [0,1], got {value}")
        if self.cell_presence == 0:
            raise ConfigurationError("cell_presence = 0 leaves no (university, SDS) cell")
        if self.pubs_per_researcher < 0:
            raise ConfigurationError("pubs_per_researcher must be non-negative")
        if not self.zipf_exponent > 1:
            raise ConfigurationError("zipf_exponent must be > 1")

    def analysis_config(self) -> AnalysisConfig:
        """Staff thresholds scaled to synthetic cell sizes."""
        return AnalysisConfig(
            period=self.period,
            min_staff_university=self.min_staff_university,
            min_staff_uda=self.min_staff_uda,
        )


def _conventions(cfg: SynthConfig, rng) -> list[BylineConvention]:
    n_weighted = round(cfg.share_position_weighted * cfg.n_sds)
    if 0 < cfg.share_position_weighted < 1 and cfg.n_sds >= 2:
        n_weighted = min(max(n_weighted, 1), cfg.n_sds - 1)
    weighted = set(rng.permutation(cfg.n_sds)[:n_weighted].tolist())
    return [
        BylineConvention.POSITION_WEIGHTED if i in weighted else BylineConvention.ALPHABETICAL
        for i in range(cfg.n_sds)
    ]


def _cells(cfg: SynthConfig, rng, universities, sds_codes) -> list[tuple[str, str]]:
    cells = []
    for univ in universities:
        present = [sds for sds in sds_codes if rng.random() < cfg.cell_presence]
        if not present:
            present = [sds_codes[int(rng.integers(len(sds_codes)))]]
        cells.extend((univ, sds) for sds in present)
    return cells


def _citations(cfg: SynthConfig, rng) -> int:
    if rng.random() < cfg.uncited_share:
        return 0
    return int(min(rng.zipf(cfg.zipf_exponent), cfg.citation_cap))


def _categories(cfg: SynthConfig, rng, sds_index: int) -> tuple[str, ...]:
    primary = f"CAT_{sds_index % cfg.n_categories:02d}"
    if cfg.n_categories > 1 and rng.random() < cfg.multi_category_share:
        other = f"CAT_{int(rng.integers(cfg.n_categories)):02d}"
        if other != primary:
            return primary, other
    return (primary,)


def generate(cfg: SynthConfig, config: AnalysisConfig | None = None) -> Dataset:
    """Build a Dataset that passes ingest validation; identical for identical cfg."""
    rng = np.random.default_rng(cfg.seed)
    config = config or cfg.analysis_config()

    sds_codes = [f"SDS_{i + 1:02d}" for i in range(cfg.n_sds)]
    conventions = _conventions(cfg, rng)
    taxonomy = Taxonomy(tuple(
        SdsEntry(sds, f"UDA_{i % cfg.n_uda + 1:02d}", conventions[i]) for i, sds in enumerate(sds_codes)
    ))
    universities = [f"UNIV_{i + 1:02d}" for i in range(cfg.n_universities)]

    ranks = list(AcademicRank)
    researchers = []
    low, high = cfg.researchers_per_cell
    for univ, sds in _cells(cfg, rng, universities, sds_codes):
        for _ in range(int(rng.integers(low, high + 1))):
            rank = ranks[int(rng.integers(len(ranks)))]
            researchers.append(Researcher(f"R{len(researchers) + 1:05d}", univ, sds, rank))

    affiliations = universities + [EXTERNAL_AFFILIATION]
    publications = []
    for lead in researchers:
        sds_index = sds_codes.index(lead.sds_code)
        for _ in range(int(rng.poisson(cfg.pubs_per_researcher))):
            pub_id = f"P{len(publications) + 1:06d}"
            n_authors = int(rng.integers(1, cfg.max_authors + 1))
            authors: list[tuple[str | None, str]] = [(lead.researcher_id, lead.university_id)]
            taken = {lead.researcher_id}
            for _ in range(n_authors - 1):
                if rng.random() < cfg.external_author_share:
                    authors.append((None, affiliations[int(rng.integers(len(affiliations)))]))
                    continue
                other = researchers[int(rng.integers(len(researchers)))]
                if other.researcher_id in taken:
                    authors.append((None, EXTERNAL_AFFILIATION))
                else:
                    taken.add(other.researcher_id)
                    authors.append((other.researcher_id, other.university_id))
            order = rng.permutation(len(authors)).tolist()
            byline = tuple(
                Authorship(
                    position=pos + 1,
                    author_key=f"a_{rid}" if rid else f"x_{pub_id}_{pos + 1}",
                    researcher_id=rid,
                    affiliation_university_id=aff,
                )
                for pos, (rid, aff) in enumerate(authors[i] for i in order)
            )
            year = int(rng.integers(cfg.period.start_year, cfg.period.end_year + 1))
            publications.append(Publication(pub_id, year, _citations(cfg, rng),
                                             _categories(cfg, rng, sds_index), byline))

    logger.info("Generated seed %d: %d researchers, %d publications", cfg.seed,
                len(researchers), len(publications))
    return Dataset(
        taxonomy=taxonomy,
        universities=frozenset(r.university_id for r in researchers),
        researchers=tuple(researchers),
        publications=tuple(publications),
        salary_table=SalaryTable(DEFAULT_SALARIES),
        config=config,
    )
