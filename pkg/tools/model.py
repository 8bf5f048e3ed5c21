"""
model.py — Domain types and analysis configuration shared by every tool.

All types are frozen dataclasses or enums; lookups that need an index build it
once through cached_property, so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

from errors import ConfigurationError, DomainError


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------

class BylineConvention(str, Enum):
    ALPHABETICAL = "alphabetical"
    POSITION_WEIGHTED = "position_weighted"


class AcademicRank(str, Enum):
    ASSISTANT = "assistant"
    ASSOCIATE = "associate"
    FULL = "full"


class BaselineScope(str, Enum):
    CITED_ONLY = "cited_only"
    ALL = "all"


class MultiCategoryRule(str, Enum):
    MEAN_OF_RATIOS = "mean_of_ratios"
    PRIMARY_CATEGORY = "primary_category"


class Level(str, Enum):
    SDS = "sds"
    UDA = "uda"
    UNIVERSITY = "university"


# Scope code used for university-level scores, rankings and class matrices.
OVERALL_SCOPE = "OVERALL"


class QuintileClass(Enum):
    """Quintile of a ranking list. A is the best fifth (code 1), E the worst (code 5)."""

    A = 1
    B = 2
    C = 3
    D = 4
    E = 5

    @property
    def code(self) -> int:
        return self.value

    @property
    def letter(self) -> str:
        return self.name

    @classmethod
    def from_code(cls, code: int) -> QuintileClass:
        return cls(int(code))

    @classmethod
    def from_letter(cls, letter: str) -> QuintileClass:
        try:
            return cls[letter.strip().upper()]
        except KeyError:
            raise ValueError(f"Not a quintile class: {letter!r}") from None

    @classmethod
    def from_percentile(cls, percentile: float) -> QuintileClass:
        """E = [0,20], D = (20,40], C = (40,60], B = (60,80], A = (80,100]."""
        if percentile <= 20:
            return cls.E
        if percentile <= 40:
            return cls.D
        if percentile <= 60:
            return cls.C
        if percentile <= 80:
            return cls.B
        return cls.A


# ---------------------------------------------------------------------------
# Period, taxonomy, roster
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Period:
    start_year: int
    end_year: int

    def __post_init__(self):
        if self.start_year > self.end_year:
            raise ConfigurationError(
                f"Period start {self.start_year} is after end {self.end_year}"
            )

    @property
    def years(self) -> int:
        return self.end_year - self.start_year + 1

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    @classmethod
    def parse(cls, text: str) -> Period:
        """Parse 'YYYY-YYYY' or a single 'YYYY'."""
        parts = [p.strip() for p in str(text).split("-")]
        try:
            if len(parts) == 1:
                return cls(int(parts[0]), int(parts[0]))
            if len(parts) == 2:
                return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            pass
        raise ConfigurationError(f"Period must look like 2004-2008, got {text!r}")

    def __str__(self) -> str:
        return f"{self.start_year}-{self.end_year}"


@dataclass(frozen=True)
class SdsEntry:
    sds_code: str
    uda_code: str
    byline_convention: BylineConvention


@dataclass(frozen=True)
class Taxonomy:
    """SDS → UDA mapping with the byline convention of each SDS."""

    sds_entries: tuple[SdsEntry, ...] = ()

    def __post_init__(self):
        seen = set()
        for entry in self.sds_entries:
            if entry.sds_code in seen:
                raise DomainError(f"Duplicate SDS code in taxonomy: {entry.sds_code}")
            seen.add(entry.sds_code)
        object.__setattr__(self, "sds_entries", tuple(sorted(self.sds_entries, key=lambda e: e.sds_code)))

    @cached_property
    def _by_sds(self) -> dict[str, SdsEntry]:
        return {e.sds_code: e for e in self.sds_entries}

    @property
    def sds_codes(self) -> frozenset[str]:
        return frozenset(self._by_sds)

    @property
    def uda_codes(self) -> frozenset[str]:
        return frozenset(e.uda_code for e in self.sds_entries)

    def __contains__(self, sds_code: str) -> bool:
        return sds_code in self._by_sds

    def uda_of(self, sds_code: str) -> str:
        return self._by_sds[sds_code].uda_code

    def convention_of(self, sds_code: str) -> BylineConvention:
        return self._by_sds[sds_code].byline_convention

    def sds_in(self, uda_code: str) -> list[str]:
        return sorted(e.sds_code for e in self.sds_entries if e.uda_code == uda_code)

    def restricted_to(self, sds_codes) -> Taxonomy:
        keep = set(sds_codes)
        return Taxonomy(tuple(e for e in self.sds_entries if e.sds_code in keep))


@dataclass(frozen=True)
class Researcher:
    researcher_id: str
    university_id: str
    sds_code: str
    academic_rank: AcademicRank


@dataclass(frozen=True)
class SalaryTable:
    """Average annual salary per academic rank, in relative units."""

    entries: Mapping[AcademicRank, float]

    def __post_init__(self):
        for rank, salary in self.entries.items():
            if not salary > 0:
                raise ConfigurationError(f"Salary for rank {rank.value} must be positive, got {salary}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @property
    def missing_ranks(self) -> list[AcademicRank]:
        return [r for r in AcademicRank if r not in self.entries]

    def scaled(self, factor: float) -> SalaryTable:
        return SalaryTable({rank: salary * factor for rank, salary in self.entries.items()})


def salary_of(researcher: Researcher, table: SalaryTable, period: Period) -> float:
    """Salary cost of one researcher over the whole observed period."""
    try:
        annual = table.entries[researcher.academic_rank]
    except KeyError:
        raise ConfigurationError(
            f"Salary table has no entry for rank '{researcher.academic_rank.value}'"
        ) from None
    return annual * period.years


# ---------------------------------------------------------------------------
# Publications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Authorship:
    position: int
    author_key: str
    researcher_id: str | None = None
    affiliation_university_id: str | None = None


@dataclass(frozen=True)
class Publication:
    pub_id: str
    year: int
    citation_count: float  # integral in real data; property tests use reals
    categories: tuple[str, ...]
    byline: tuple[Authorship, ...]

    def __post_init__(self):
        if not self.byline:
            raise DomainError(f"Publication {self.pub_id} has an empty byline")
        if not self.categories:
            raise DomainError(f"Publication {self.pub_id} has no subject category")
        if self.citation_count < 0:
            raise DomainError(f"Publication {self.pub_id} has negative citations")
        positions = [a.position for a in self.byline]
        if positions != list(range(1, len(positions) + 1)):
            raise DomainError(f"Publication {self.pub_id} byline positions are not 1..n: {positions}")

    @property
    def n_authors(self) -> int:
        return len(self.byline)

    @property
    def roster_ids(self) -> frozenset[str]:
        return frozenset(a.researcher_id for a in self.byline if a.researcher_id)


# ---------------------------------------------------------------------------
# Analysis configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositionWeights:
    """Byline weights for the POSITION_WEIGHTED convention.

    same_*: first and last author share a university.
    diff_*: everything else.
    """

    same_first: float = 0.40
    same_last: float = 0.40
    same_others: float = 0.20
    diff_first: float = 0.30
    diff_last: float = 0.30
    diff_second: float = 0.15
    diff_second_to_last: float = 0.15
    diff_others: float = 0.10

    def __post_init__(self):
        values = [getattr(self, name) for name in self.__dataclass_fields__]
        if any(not v > 0 for v in values):
            raise ConfigurationError(f"Credit weights must all be positive: {values}")
        same = math.fsum([self.same_first, self.same_last, self.same_others])
        diff = math.fsum([self.diff_first, self.diff_last, self.diff_second,
                          self.diff_second_to_last, self.diff_others])
        for label, total in (("same_university", same), ("different_universities", diff)):
            if abs(total - 1.0) > 1e-9:
                raise ConfigurationError(f"Credit weights for {label} sum to {total}, expected 1")


@dataclass(frozen=True)
class AnalysisConfig:
    period: Period = field(default_factory=lambda: Period(2004, 2008))
    min_publishing_share: float = 0.5
    min_staff_university: int = 20
    min_staff_uda: int = 10
    baseline_scope: BaselineScope = BaselineScope.CITED_ONLY
    multi_category_rule: MultiCategoryRule = MultiCategoryRule.MEAN_OF_RATIOS
    credit_weights: PositionWeights = field(default_factory=PositionWeights)

    def __post_init__(self):
        if not 0.0 <= self.min_publishing_share <= 1.0:
            raise ConfigurationError(
                f"min_publishing_share must be in [0,1], got {self.min_publishing_share}"
            )
        if self.min_staff_university < 0 or self.min_staff_uda < 0:
            raise ConfigurationError("Staff thresholds must be non-negative")

    def snapshot(self) -> dict:
        """Plain-JSON view, used in run manifests."""
        return {
            "period": str(self.period),
            "min_publishing_share": self.min_publishing_share,
            "min_staff_university": self.min_staff_university,
            "min_staff_uda": self.min_staff_uda,
            "baseline_scope": self.baseline_scope.value,
            "multi_category_rule": self.multi_category_rule.value,
            "credit_weights": {
                name: getattr(self.credit_weights, name)
                for name in self.credit_weights.__dataclass_fields__
            },
        }
