"""
dispersion.py — Performance dispersion of units inside each university.

For every university, the quintile classes of its active sub-scopes (UDAs inside
the university, or SDSs inside one UDA) feed the mutual variability index

    Δ = Σ_{i≠j} |x_i − x_j| / (n(n−1))      (ordered pairs; x = class code, A=1 … E=5)

which equals twice the unordered-pair sum over n(n−1). R = Δ / max Δ over the
analyzed population. The report adds the class concordance matrix, the median
and band histogram of R, and Pearson correlations of R with n_active and any
numeric covariates.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import pearsonr

from errors import DataValidationError, DomainError, InputFileError
from model import OVERALL_SCOPE, Level, QuintileClass

logger = logging.getLogger(__name__)

NA = "N.A."
R_BANDS = ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0))
GENERALIST_MIN_ACTIVE = 7


class ConcordanceWeighting(str, Enum):
    UNIVERSITY = "university"  # mean of each university's within-university shares
    POOLED = "pooled"          # shares over all sub-scope units of the class group


@dataclass(frozen=True)
class ClassProfile:
    university_id: str
    overall_class: QuintileClass
    sub_classes: Mapping[str, QuintileClass]

    def __post_init__(self):
        if not self.sub_classes:
            raise DomainError(f"{self.university_id} has no active sub-scope")
        object.__setattr__(self, "sub_classes", MappingProxyType(dict(sorted(self.sub_classes.items()))))

    @property
    def n_active(self) -> int:
        return len(self.sub_classes)

    @property
    def codes(self) -> list[int]:
        return [q.code for q in self.sub_classes.values()]


@dataclass(frozen=True)
class DispersionRow:
    university_id: str
    overall_class: QuintileClass
    n_active: int
    delta: float | None
    r: float | None


@dataclass(frozen=True)
class ConcordanceMatrix:
    weighting: ConcordanceWeighting
    rows: Mapping[QuintileClass, tuple[float, ...] | None]
    group_sizes: Mapping[QuintileClass, int]

    def row(self, overall: QuintileClass) -> tuple[float, ...] | None:
        return self.rows[overall]

    def to_dict(self) -> dict:
        return {
            "weighting": self.weighting.value,
            "rows": {
                q.letter: {
                    "n_universities": self.group_sizes[q],
                    "shares": NA if self.rows[q] is None
                    else {s.letter: v for s, v in zip(QuintileClass, self.rows[q])},
                }
                for q in QuintileClass
            },
        }


@dataclass(frozen=True)
class DispersionReport:
    per_university: tuple[DispersionRow, ...]
    max_delta: float | None
    concordance: ConcordanceMatrix
    median_r: float | None
    histogram: tuple[dict, ...]
    correlations: Mapping[str, float | None]
    coverage: Mapping[str, int] = field(default_factory=dict)
    cross_class_units: tuple[dict, ...] = ()
    generalists: Mapping[str, int] = field(default_factory=dict)

    def row(self, university_id: str) -> DispersionRow:
        for row in self.per_university:
            if row.university_id == university_id:
                return row
        raise KeyError(university_id)

    def rows_frame(self) -> pd.DataFrame:
        def fmt(value):
            return NA if value is None else value
        rows = [
            [row.university_id, row.overall_class.letter, row.n_active, fmt(row.delta), fmt(row.r)]
            for row in self.per_university
        ]
        return pd.DataFrame(rows, columns=["university_id", "overall_class", "n_active", "delta", "r"])

    def summary(self) -> dict:
        return {
            "max_delta": self.max_delta if self.max_delta is not None else NA,
            "median_r": self.median_r if self.median_r is not None else NA,
            "histogram": list(self.histogram),
            "correlations": {k: (NA if v is None else v) for k, v in self.correlations.items()},
            "concordance": self.concordance.to_dict(),
            "coverage": dict(self.coverage),
            "cross_class_units": list(self.cross_class_units),
            "generalists": dict(self.generalists),
            "n_universities": len(self.per_university),
            "n_defined": sum(1 for row in self.per_university if row.r is not None),
        }


# ---------------------------------------------------------------------------
# Indices
# ---------------------------------------------------------------------------

def delta_index(classes: Sequence[int | QuintileClass]) -> float | None:
    """Mean absolute class difference over ordered pairs; None when fewer than 2 classes."""
    codes = np.array([c.code if isinstance(c, QuintileClass) else int(c) for c in classes], dtype=np.int64)
    n = codes.size
    if n < 2:
        return None
    total = int(np.abs(codes[:, None] - codes[None, :]).sum())
    return total / (n * (n - 1))


def standardized_r(profiles: Sequence[ClassProfile]) -> tuple[list[DispersionRow], float | None]:
    """Δ and R per university. Universities with one active sub-scope get Δ = R = None."""
    deltas = [(p, delta_index(p.codes)) for p in profiles]
    defined = [d for _, d in deltas if d is not None]
    if not defined:
        logger.warning("No university has two or more active sub-scopes; R is undefined everywhere")
        max_delta = None
    else:
        max_delta = max(defined)

    rows = []
    for profile, delta in deltas:
        if delta is None:
            r = None
        elif max_delta == 0:
            r = 0.0
        else:
            r = delta / max_delta
        rows.append(DispersionRow(profile.university_id, profile.overall_class, profile.n_active, delta, r))
    return rows, max_delta


def concordance_matrix(profiles: Sequence[ClassProfile],
                       weighting: ConcordanceWeighting = ConcordanceWeighting.UNIVERSITY) -> ConcordanceMatrix:
    """Per overall class, the distribution (in %) of sub-scope classes A..E."""
    rows, sizes = {}, {}
    for overall in QuintileClass:
        group = [p for p in profiles if p.overall_class is overall]
        sizes[overall] = len(group)
        if not group:
            rows[overall] = None
            continue
        if weighting is ConcordanceWeighting.POOLED:
            counts = Counter(q for p in group for q in p.sub_classes.values())
            total = sum(counts.values())
            rows[overall] = tuple(100 * counts.get(q, 0) / total for q in QuintileClass)
        else:
            shares = []
            for p in group:
                counts = Counter(p.sub_classes.values())
                shares.append([100 * counts.get(q, 0) / p.n_active for q in QuintileClass])
            rows[overall] = tuple(math.fsum(s[i] for s in shares) / len(group) for i in range(5))
    return ConcordanceMatrix(weighting, MappingProxyType(rows), MappingProxyType(sizes))


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Sample Pearson correlation; None when either series is constant."""
    if len(x) != len(y) or len(x) < 2:
        raise DomainError(f"pearson needs two equal-length series of at least 2 values, got {len(x)} and {len(y)}")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        return None
    r = float(pearsonr(xa, ya)[0])
    return max(-1.0, min(1.0, r))


def band_of(r: float) -> int:
    """Index into R_BANDS; bands are half-open except the last."""
    r = round(r, 9)
    for i, (_, upper) in enumerate(R_BANDS[:-1]):
        if r < upper:
            return i
    return len(R_BANDS) - 1


def r_distribution_stats(rows: Sequence[DispersionRow]) -> tuple[float, tuple[dict, ...]]:
    """Median of the defined R values and their histogram over R_BANDS."""
    values = [row.r for row in rows if row.r is not None]
    if not values:
        raise DomainError("No defined R value")
    counts = Counter(band_of(r) for r in values)
    histogram = tuple(
        {"band": f"[{lo:.1f},{hi:.1f}{']' if i == len(R_BANDS) - 1 else ')'}",
         "count": counts.get(i, 0),
         "share": counts.get(i, 0) / len(values)}
        for i, (lo, hi) in enumerate(R_BANDS)
    )
    return float(np.median(values)), histogram


# ---------------------------------------------------------------------------
# Descriptive extras
# ---------------------------------------------------------------------------

def scope_coverage(profiles: Sequence[ClassProfile]) -> dict[str, int]:
    """Number of universities active in each sub-scope."""
    counts = Counter(scope for p in profiles for scope in p.sub_classes)
    return dict(sorted(counts.items()))


def cross_class_units(profiles: Sequence[ClassProfile]) -> list[dict]:
    """Bottom-class units in top universities and top-class units in bottom universities."""
    found = []
    for p in profiles:
        for scope, sub in p.sub_classes.items():
            if (p.overall_class, sub) in ((QuintileClass.A, QuintileClass.E), (QuintileClass.E, QuintileClass.A)):
                found.append({"university_id": p.university_id, "overall_class": p.overall_class.letter,
                              "scope_code": scope, "class": sub.letter})
    return found


def generalist_stats(rows: Sequence[DispersionRow], median_r: float | None,
                     min_active: int = GENERALIST_MIN_ACTIVE) -> dict[str, int]:
    generalists = [row for row in rows if row.n_active >= min_active and row.r is not None]
    above = sum(1 for row in generalists if median_r is not None and row.r > median_r)
    return {"min_active": min_active, "generalists": len(generalists), "above_median": above}


def _correlations(rows, covariates) -> dict[str, float | None]:
    defined = [row for row in rows if row.r is not None]
    result = {}

    def corr(pairs):
        if len(pairs) < 2:
            return None
        return pearson([a for a, _ in pairs], [b for _, b in pairs])

    result["n_active"] = corr([(row.n_active, row.r) for row in defined])
    for name, values in sorted((covariates or {}).items()):
        result[name] = corr([(values[row.university_id], row.r)
                             for row in defined if row.university_id in values])
    return result


def build_report(profiles: Sequence[ClassProfile], covariates: Mapping[str, Mapping[str, float]] | None = None,
                 weighting: ConcordanceWeighting = ConcordanceWeighting.UNIVERSITY,
                 generalist_min: int = GENERALIST_MIN_ACTIVE) -> DispersionReport:
    rows, max_delta = standardized_r(profiles)
    if max_delta is None:
        median_r, histogram = None, ()
    else:
        median_r, histogram = r_distribution_stats(rows)
    return DispersionReport(
        per_university=tuple(rows),
        max_delta=max_delta,
        concordance=concordance_matrix(profiles, weighting) if profiles else
        ConcordanceMatrix(weighting, {q: None for q in QuintileClass}, {q: 0 for q in QuintileClass}),
        median_r=median_r,
        histogram=histogram,
        correlations=_correlations(rows, covariates) if max_delta is not None else {},
        coverage=scope_coverage(profiles),
        cross_class_units=tuple(cross_class_units(profiles)),
        generalists=generalist_stats(rows, median_r, generalist_min),
    )


# ---------------------------------------------------------------------------
# Class matrices
# ---------------------------------------------------------------------------

def profiles_from_rankings(parent, children) -> list[ClassProfile]:
    """Profiles of the universities ranked in `parent`, with their classes in each child ranking."""
    profiles = []
    for entry in sorted(parent.entries, key=lambda e: e.university_id):
        subs = {child.scope_code: child.class_of(entry.university_id) for child in children}
        subs = {scope: q for scope, q in subs.items() if q is not None}
        if subs:
            profiles.append(ClassProfile(entry.university_id, entry.quintile, subs))
    return profiles


def class_profiles(rankings, uda_code: str | None = None, taxonomy=None) -> list[ClassProfile]:
    """Overall-vs-UDA profiles, or UDA-vs-SDS profiles for one UDA (needs the taxonomy)."""
    by_scope = {ranking.scope: ranking for ranking in rankings}
    if uda_code is None:
        parent = by_scope.get((Level.UNIVERSITY, OVERALL_SCOPE))
        children = [r for r in rankings if r.level is Level.UDA]
    else:
        if taxonomy is None:
            raise DomainError(f"Profiles inside UDA {uda_code} need the taxonomy")
        parent = by_scope.get((Level.UDA, uda_code))
        children = [by_scope[(Level.SDS, sds)] for sds in taxonomy.sds_in(uda_code)
                    if (Level.SDS, sds) in by_scope]
    if parent is None:
        logger.warning("No parent ranking for %s; no class profiles", uda_code or OVERALL_SCOPE)
        return []
    return profiles_from_rankings(parent, children)


def read_class_matrix(path) -> list[ClassProfile]:
    """Read a university_id,scope_code,class CSV; scope OVERALL carries the overall class."""
    path = Path(path)
    if not path.exists():
        raise InputFileError(f"Class matrix not found: {path}")
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = {"university_id", "scope_code", "class"} - set(df.columns)
    if missing:
        raise DataValidationError(f"{path.name}: missing column(s) {', '.join(sorted(missing))}")

    overall: dict[str, QuintileClass] = {}
    subs: dict[str, dict[str, QuintileClass]] = {}
    for i, row in enumerate(df.to_dict("records")):
        univ, scope, letter = row["university_id"].strip(), row["scope_code"].strip(), row["class"].strip()
        subs.setdefault(univ, {})
        if letter in ("", "-"):
            continue
        try:
            q = QuintileClass.from_letter(letter)
        except ValueError:
            raise DataValidationError(f"{path.name}:{i + 2}: bad class {letter!r}") from None
        if scope == OVERALL_SCOPE:
            overall[univ] = q
        else:
            subs[univ][scope] = q

    without_overall = [u for u in subs if u not in overall]
    if without_overall:
        raise DataValidationError(f"{path.name}: no {OVERALL_SCOPE} class for {', '.join(without_overall)}")
    return [ClassProfile(u, overall[u], s) for u, s in subs.items() if s]


def write_class_matrix(profiles: Sequence[ClassProfile], path) -> Path:
    rows = []
    for p in profiles:
        rows.append([p.university_id, OVERALL_SCOPE, p.overall_class.letter])
        rows.extend([p.university_id, scope, q.letter] for scope, q in p.sub_classes.items())
    pd.DataFrame(rows, columns=["university_id", "scope_code", "class"]).to_csv(path, index=False, lineterminator="\n")
    return Path(path)


def read_covariates(path) -> dict[str, dict[str, float]]:
    """Numeric per-university columns of a university_id,<name>,... CSV."""
    path = Path(path)
    if not path.exists():
        raise InputFileError(f"Covariates file not found: {path}")
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    if "university_id" not in df.columns:
        raise DataValidationError(f"{path.name}: missing column university_id")
    covariates = {}
    for column in df.columns:
        if column == "university_id":
            continue
        values = {}
        for univ, raw in zip(df["university_id"], df[column]):
            try:
                values[univ.strip()] = float(raw)
            except ValueError:
                continue
        covariates[column] = values
    return covariates
