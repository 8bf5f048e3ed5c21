"""
ingest.py — Load the five input CSVs, validate them, and apply the SDS inclusion filter.

Row-level problems are collected in a ValidationReport (file:line locations) instead
of raising; a Dataset is only built when the report has no errors. Publications
outside the analysis period are dropped with a warning.

Input files (UTF-8, header row, comma-separated):
    taxonomy.csv      sds_code,uda_code,byline_convention
    researchers.csv   researcher_id,university_id,sds_code,academic_rank
    salaries.csv      academic_rank,annual_salary
    publications.csv  pub_id,year,citation_count,categories   (categories ';'-separated)
    authorships.csv   pub_id,position,author_key,researcher_id,affiliation_university_id
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import pandas as pd

from config import INPUT_FILES
from errors import DataValidationError, InputFileError
from model import (
    AcademicRank, AnalysisConfig, Authorship, BylineConvention, Publication, Researcher,
    SalaryTable, SdsEntry, Taxonomy, salary_of,
)

logger = logging.getLogger(__name__)

COLUMNS = {
    "taxonomy": ["sds_code", "uda_code", "byline_convention"],
    "researchers": ["researcher_id", "university_id", "sds_code", "academic_rank"],
    "salaries": ["academic_rank", "annual_salary"],
    "publications": ["pub_id", "year", "citation_count", "categories"],
    "authorships": ["pub_id", "position", "author_key", "researcher_id", "affiliation_university_id"],
}


# ---------------------------------------------------------------------------
# Validation report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    code: str
    location: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "location": self.location, "message": self.message}


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    by_uda: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code: str, location: str, message: str) -> None:
        self.errors.append(Issue(code, location, message))

    def warn(self, code: str, location: str, message: str) -> None:
        self.warnings.append(Issue(code, location, message))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [i.to_dict() for i in self.errors],
            "warnings": [i.to_dict() for i in self.warnings],
            "counts": dict(self.counts),
            "by_uda": {k: dict(v) for k, v in self.by_uda.items()},
        }


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetPaths:
    taxonomy: Path
    researchers: Path
    salaries: Path
    publications: Path
    authorships: Path

    @classmethod
    def from_dir(cls, directory) -> DatasetPaths:
        directory = Path(directory)
        return cls(**{name: directory / file_name for name, file_name in INPUT_FILES.items()})

    def items(self) -> list[tuple[str, Path]]:
        return [(f.name, Path(getattr(self, f.name))) for f in dataclasses.fields(self)]


@dataclass(frozen=True)
class Dataset:
    """Validated roster, taxonomy and publications for one observation period.

    Researchers and publications are stored sorted by id, so two datasets built
    from the same rows in any order are equal and compute identically.
    """

    taxonomy: Taxonomy
    universities: frozenset[str]
    researchers: tuple[Researcher, ...]
    publications: tuple[Publication, ...]
    salary_table: SalaryTable
    config: AnalysisConfig

    def __post_init__(self):
        object.__setattr__(self, "researchers",
                           tuple(sorted(self.researchers, key=lambda r: r.researcher_id)))
        object.__setattr__(self, "publications",
                           tuple(sorted(self.publications, key=lambda p: p.pub_id)))
        object.__setattr__(self, "universities", frozenset(self.universities))

    @cached_property
    def researchers_by_id(self) -> dict[str, Researcher]:
        return {r.researcher_id: r for r in self.researchers}

    @cached_property
    def cells(self) -> dict[tuple[str, str], tuple[Researcher, ...]]:
        """(university_id, sds_code) → roster of that cell, sorted by researcher_id."""
        grouped = defaultdict(list)
        for r in self.researchers:
            grouped[(r.university_id, r.sds_code)].append(r)
        return {key: tuple(grouped[key]) for key in sorted(grouped)}

    @cached_property
    def publications_by_researcher(self) -> dict[str, tuple[Publication, ...]]:
        grouped = defaultdict(list)
        for pub in self.publications:
            for rid in sorted(pub.roster_ids):
                grouped[rid].append(pub)
        return {rid: tuple(pubs) for rid, pubs in grouped.items()}

    def cell(self, university_id: str, sds_code: str) -> tuple[Researcher, ...]:
        return self.cells.get((university_id, sds_code), ())

    def salary_of(self, researcher: Researcher) -> float:
        return salary_of(researcher, self.salary_table, self.config.period)

    def replace(self, **changes) -> Dataset:
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _read_csv(name: str, path: Path, report: ValidationReport) -> list[tuple[int, dict]] | None:
    """Read one input file as (line number, row) pairs. None when the file is unusable."""
    if not path.exists():
        raise InputFileError(f"Input file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return []
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        report.error("malformed_row", path.name, f"Could not parse {path.name}: {e}")
        return None
    except OSError as e:
        raise InputFileError(f"Could not read {path}: {e}") from e

    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in COLUMNS[name] if c not in df.columns]
    if missing:
        report.error("missing_column", path.name, f"Missing column(s): {', '.join(missing)}")
        return None

    rows = []
    for i, record in enumerate(df[COLUMNS[name]].to_dict("records")):
        rows.append((i + 2, {k: str(v).strip() for k, v in record.items()}))
    return rows


def _parse_int(text: str) -> int | None:
    try:
        return int(text)
    except ValueError:
        return None


def _load_taxonomy(rows, file_name, report) -> Taxonomy:
    entries = []
    seen: dict[str, int] = {}
    for line, row in rows:
        loc = f"{file_name}:{line}"
        sds, uda = row["sds_code"], row["uda_code"]
        if not sds or not uda:
            report.error("malformed_row", loc, "sds_code and uda_code are required")
            continue
        try:
            convention = BylineConvention(row["byline_convention"].lower())
        except ValueError:
            report.error("malformed_row", loc,
                         f"byline_convention must be alphabetical|position_weighted, "
                         f"got {row['byline_convention']!r}")
            continue
        if sds in seen:
            report.error("duplicate_key", loc, f"SDS {sds} already defined at line {seen[sds]}")
            continue
        seen[sds] = line
        entries.append(SdsEntry(sds, uda, convention))
    return Taxonomy(tuple(entries))


def _load_salaries(rows, file_name, report) -> dict[AcademicRank, float]:
    salaries: dict[AcademicRank, float] = {}
    for line, row in rows:
        loc = f"{file_name}:{line}"
        try:
            rank = AcademicRank(row["academic_rank"].lower())
        except ValueError:
            report.error("malformed_row", loc, f"Unknown academic_rank {row['academic_rank']!r}")
            continue
        try:
            salary = float(row["annual_salary"])
        except ValueError:
            salary = float("nan")
        if not (math.isfinite(salary) and salary > 0):
            report.error("malformed_row", loc,
                         f"annual_salary must be a positive number, got {row['annual_salary']!r}")
            continue
        if rank in salaries:
            report.error("duplicate_key", loc, f"Salary for rank {rank.value} defined twice")
            continue
        salaries[rank] = salary
    return salaries


def _load_researchers(rows, file_name, taxonomy, salaries, report) -> list[Researcher]:
    researchers = []
    seen: dict[str, int] = {}
    for line, row in rows:
        loc = f"{file_name}:{line}"
        rid, univ, sds = row["researcher_id"], row["university_id"], row["sds_code"]
        if not rid or not univ:
            report.error("malformed_row", loc, "researcher_id and university_id are required")
            continue
        if rid in seen:
            report.error("duplicate_key", loc, f"Researcher {rid} already defined at line {seen[rid]}")
            continue
        seen[rid] = line
        try:
            rank = AcademicRank(row["academic_rank"].lower())
        except ValueError:
            report.error("malformed_row", loc, f"Unknown academic_rank {row['academic_rank']!r}")
            continue
        if sds not in taxonomy:
            report.error("dangling_key", loc, f"Researcher {rid} references unknown SDS {sds!r}")
            continue
        if rank not in salaries:
            report.error("missing_rank", loc,
                         f"Researcher {rid} has rank {rank.value} with no entry in salaries")
            continue
        researchers.append(Researcher(rid, univ, sds, rank))
    return researchers


def _load_publications(rows, file_name, config, report):
    """Returns (publication fields by pub_id, ids dropped as out of period)."""
    pubs: dict[str, dict] = {}
    dropped: set[str] = set()
    for line, row in rows:
        loc = f"{file_name}:{line}"
        pub_id = row["pub_id"]
        if not pub_id:
            report.error("malformed_row", loc, "pub_id is required")
            continue
        if pub_id in pubs or pub_id in dropped:
            report.error("duplicate_key", loc, f"Publication {pub_id} defined twice")
            continue
        year = _parse_int(row["year"])
        citations = _parse_int(row["citation_count"])
        if year is None:
            report.error("malformed_row", loc, f"year must be an integer, got {row['year']!r}")
            continue
        if citations is None or citations < 0:
            report.error("malformed_row", loc,
                         f"citation_count must be a non-negative integer, got {row['citation_count']!r}")
            continue
        categories = tuple(dict.fromkeys(c.strip() for c in row["categories"].split(";") if c.strip()))
        if not categories:
            report.error("malformed_row", loc, f"Publication {pub_id} has no subject category")
            continue
        if not config.period.contains(year):
            report.warn("out_of_period", loc,
                        f"Publication {pub_id} ({year}) is outside {config.period}; dropped")
            logger.debug("Dropping %s: year %s outside %s", pub_id, year, config.period)
            dropped.add(pub_id)
            continue
        pubs[pub_id] = {"year": year, "citations": citations, "categories": categories}
    return pubs, dropped


def _load_authorships(rows, file_name, pubs, dropped, researchers_by_id, report):
    """Returns byline entries grouped by pub_id."""
    bylines: dict[str, list[tuple[int, Authorship]]] = defaultdict(list)
    for line, row in rows:
        loc = f"{file_name}:{line}"
        pub_id = row["pub_id"]
        if pub_id in dropped:
            continue
        if pub_id not in pubs:
            report.error("dangling_key", loc, f"Authorship references unknown publication {pub_id!r}")
            continue
        position = _parse_int(row["position"])
        if position is None or position < 1:
            report.error("malformed_row", loc, f"position must be an integer >= 1, got {row['position']!r}")
            continue
        if not row["author_key"]:
            report.error("malformed_row", loc, "author_key is required")
            continue
        rid = row["researcher_id"] or None
        affiliation = row["affiliation_university_id"] or None
        if rid is not None:
            researcher = researchers_by_id.get(rid)
            if researcher is None:
                report.error("dangling_key", loc,
                             f"Publication {pub_id} byline references unknown researcher_id {rid}")
                continue
            if affiliation is None:
                affiliation = researcher.university_id
            elif affiliation != researcher.university_id:
                report.error("affiliation_mismatch", loc,
                             f"Researcher {rid} belongs to {researcher.university_id}, "
                             f"byline says {affiliation}")
                continue
        bylines[pub_id].append((line, Authorship(position, row["author_key"], rid, affiliation)))
    return bylines


def load_dataset(paths: DatasetPaths, config: AnalysisConfig) -> tuple[Dataset | None, ValidationReport]:
    """Load and validate the five input files. The Dataset is None when the report has errors."""
    report = ValidationReport()
    rows = {name: _read_csv(name, path, report) for name, path in paths.items()}
    if any(r is None for r in rows.values()):
        return None, report
    file_names = {name: path.name for name, path in paths.items()}

    taxonomy = _load_taxonomy(rows["taxonomy"], file_names["taxonomy"], report)
    salaries = _load_salaries(rows["salaries"], file_names["salaries"], report)
    researchers = _load_researchers(rows["researchers"], file_names["researchers"],
                                    taxonomy, salaries, report)
    researchers_by_id = {r.researcher_id: r for r in researchers}
    pub_fields, dropped = _load_publications(rows["publications"], file_names["publications"],
                                             config, report)
    bylines = _load_authorships(rows["authorships"], file_names["authorships"],
                                pub_fields, dropped, researchers_by_id, report)

    publications = []
    for pub_id, fields in pub_fields.items():
        entries = sorted(bylines.get(pub_id, []), key=lambda e: e[1].position)
        if not entries:
            report.error("empty_byline", f"{file_names['authorships']}",
                         f"Publication {pub_id} has no authorships")
            continue
        positions = [a.position for _, a in entries]
        if positions != list(range(1, len(entries) + 1)):
            report.error("byline_gap", f"{file_names['authorships']}:{entries[0][0]}",
                         f"Publication {pub_id} byline positions {positions} are not 1..{len(entries)}")
            continue
        publications.append(Publication(
            pub_id, fields["year"], fields["citations"], fields["categories"],
            tuple(a for _, a in entries),
        ))

    report.counts = {
        "uda": len(taxonomy.uda_codes),
        "sds": len(taxonomy.sds_codes),
        "universities": len({r.university_id for r in researchers}),
        "researchers": len(researchers),
        "publications": len(publications),
        "authorships": sum(p.n_authors for p in publications),
        "dropped_publications": len(dropped),
    }
    if not report.ok:
        return None, report

    dataset = Dataset(
        taxonomy=taxonomy,
        universities=frozenset(r.university_id for r in researchers),
        researchers=tuple(researchers),
        publications=tuple(publications),
        salary_table=SalaryTable(salaries),
        config=config,
    )
    report.by_uda = summarize_dataset(dataset)
    logger.info("Loaded %d researchers, %d publications, %d SDSs",
                len(researchers), len(publications), len(taxonomy.sds_codes))
    return dataset, report


def read_taxonomy(path) -> Taxonomy:
    """Load a taxonomy.csv on its own; raises DataValidationError on any row error."""
    path = Path(path)
    report = ValidationReport()
    rows = _read_csv("taxonomy", path, report)
    taxonomy = _load_taxonomy(rows or [], path.name, report)
    if not report.ok:
        raise DataValidationError(f"Invalid taxonomy file {path}", report)
    return taxonomy


# ---------------------------------------------------------------------------
# Inclusion filter and summary
# ---------------------------------------------------------------------------

def publishing_share(ds: Dataset, sds_code: str) -> float | None:
    """Share of the SDS's researchers (nation-wide) with at least one publication."""
    members = [r for r in ds.researchers if r.sds_code == sds_code]
    if not members:
        return None
    publishing = sum(1 for r in members if r.researcher_id in ds.publications_by_researcher)
    return publishing / len(members)


def apply_sds_inclusion_filter(ds: Dataset) -> Dataset:
    """Drop SDSs where fewer than min_publishing_share of researchers published.

    Removed researchers stay on their bylines as non-roster authors, so the
    credit of surviving co-authors does not change.
    """
    threshold = ds.config.min_publishing_share
    keep, removed = [], []
    for sds in sorted(ds.taxonomy.sds_codes):
        share = publishing_share(ds, sds)
        if share is not None and share >= threshold:
            keep.append(sds)
        else:
            removed.append(sds)
    if not removed:
        return ds
    logger.info("Inclusion filter removed %d SDS(s): %s", len(removed), ", ".join(removed))

    kept = set(keep)
    researchers = tuple(r for r in ds.researchers if r.sds_code in kept)
    roster = {r.researcher_id for r in researchers}
    publications = []
    for pub in ds.publications:
        if pub.roster_ids <= roster:
            publications.append(pub)
            continue
        byline = tuple(
            a if a.researcher_id is None or a.researcher_id in roster
            else dataclasses.replace(a, researcher_id=None)
            for a in pub.byline
        )
        publications.append(dataclasses.replace(pub, byline=byline))

    return ds.replace(
        taxonomy=ds.taxonomy.restricted_to(kept),
        universities=frozenset(r.university_id for r in researchers),
        researchers=researchers,
        publications=tuple(publications),
    )


def _as_number(total: float):
    return int(total) if float(total).is_integer() else total


def summarize_dataset(ds: Dataset) -> dict[str, dict[str, int]]:
    """Per-UDA SDSs, universities, staff, publications and citations, plus a TOTAL row.

    A publication counts once in every UDA with a roster author on it; the TOTAL row
    counts distinct publications, so it can be lower than the column sum.
    """
    summary = {}
    all_pubs: dict[str, float] = {}
    for uda in sorted(ds.taxonomy.uda_codes):
        sds_codes = set(ds.taxonomy.sds_in(uda))
        staff = [r for r in ds.researchers if r.sds_code in sds_codes]
        pubs = {}
        for r in staff:
            for pub in ds.publications_by_researcher.get(r.researcher_id, ()):
                pubs[pub.pub_id] = pub.citation_count
        all_pubs.update(pubs)
        summary[uda] = {
            "sds": len(sds_codes),
            "universities": len({r.university_id for r in staff}),
            "research_staff": len(staff),
            "publications": len(pubs),
            "citations": _as_number(math.fsum(pubs.values())),
        }
    summary["TOTAL"] = {
        "sds": len(ds.taxonomy.sds_codes),
        "universities": len(ds.universities),
        "research_staff": len(ds.researchers),
        "publications": len(all_pubs),
        "citations": _as_number(math.fsum(all_pubs.values())),
    }
    return summary


# ---------------------------------------------------------------------------
# Writing (inverse of load_dataset)
# ---------------------------------------------------------------------------

def dump_dataset(ds: Dataset, directory) -> dict[str, Path]:
    """Write the dataset as the five input CSVs, rows in key order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tables = {
        "taxonomy": [
            [e.sds_code, e.uda_code, e.byline_convention.value]
            for e in sorted(ds.taxonomy.sds_entries, key=lambda e: e.sds_code)
        ],
        "researchers": [
            [r.researcher_id, r.university_id, r.sds_code, r.academic_rank.value]
            for r in ds.researchers
        ],
        "salaries": [
            [rank.value, ds.salary_table.entries[rank]]
            for rank in AcademicRank if rank in ds.salary_table.entries
        ],
        "publications": [
            [p.pub_id, p.year, _as_number(p.citation_count), ";".join(p.categories)]
            for p in ds.publications
        ],
        "authorships": [
            [p.pub_id, a.position, a.author_key, a.researcher_id or "", a.affiliation_university_id or ""]
            for p in ds.publications for a in p.byline
        ],
    }
    written = {}
    for name, rows in tables.items():
        path = directory / INPUT_FILES[name]
        pd.DataFrame(rows, columns=COLUMNS[name]).to_csv(path, index=False, lineterminator="\n")
        written[name] = path
    return written
