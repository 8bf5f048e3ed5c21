"""
run_pipeline.py — Single entry point for the research productivity assessment pipeline.

Each subcommand is a thin shell over a cmd_* function that can be called from
Python with the same results. Progress goes to stderr; stdout is reserved for
machine-readable output (the validation report).

Usage:
    python tools/run_pipeline.py validate   --data DIR [--config analysis.cfg]
    python tools/run_pipeline.py compute    --data DIR [--outdir .tmp/run] [--workers 4]
    python tools/run_pipeline.py rank       --scores .tmp/run/scores_uda.csv [--data DIR]   # .csv or .json
    python tools/run_pipeline.py dispersion --classes fixtures/overall_classes.csv
    python tools/run_pipeline.py dispersion --rankings .tmp/run/rankings.csv --uda UDA_01 --data DIR
    python tools/run_pipeline.py generate   --seed 1 --outdir .tmp/synth
    python tools/run_pipeline.py fixtures   --outdir .tmp/fixtures

Exit codes: 0 success, 1 validation/domain error, 2 I/O error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import pandas as pd

import config as cfg
from dispersion import (
    ConcordanceWeighting, build_report, class_profiles, read_class_matrix, read_covariates,
    write_class_matrix,
)
from errors import DataValidationError, DomainError, FSSError
from ingest import (
    Dataset, DatasetPaths, apply_sds_inclusion_filter, dump_dataset, load_dataset, read_taxonomy,
)
from model import Level
from normalize import build_baselines, scaled_citations
from productivity import (
    ScoreSet, compute_national_means, compute_sds_scores, compute_university_scores,
    compute_uda_scores,
)
from ranking import RankingList, rank_all, rank_and_classify, rankings_frame, rankings_from_frame
from reports import RunManifest, to_json_text, write_csv, write_json
from synth import SynthConfig, generate

logger = logging.getLogger(__name__)

SCORE_FILES = {Level.SDS: "scores_sds", Level.UDA: "scores_uda", Level.UNIVERSITY: "scores_univ"}
FIXTURE_MATRICES = ["overall_classes.csv", "physics_classes.csv"]
FIXTURE_TABLES = ["overall_published_r.csv", "physics_published_r.csv", "physics_covariates.csv"]

ANALYSIS_STEPS = [
    "Applying SDS inclusion filter",
    "Building citation baselines",
    "Scoring (university, SDS) cells",
    "Rolling up UDA and university scores",
    "Ranking and classifying",
]


def step(i: int, n: int, label: str) -> None:
    print(f"[Step {i}/{n}] {label}...", file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# Library entry points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisResult:
    dataset: Dataset
    sds_scores: ScoreSet
    uda_scores: ScoreSet
    university_scores: ScoreSet
    rankings: list[RankingList]

    def score_sets(self) -> list[ScoreSet]:
        return [self.sds_scores, self.uda_scores, self.university_scores]

    def ranking(self, level: Level, scope_code: str) -> RankingList | None:
        for ranking in self.rankings:
            if ranking.scope == (level, scope_code):
                return ranking
        return None


def analyze(ds: Dataset, workers: int = 1, progress: bool = False) -> AnalysisResult:
    """Filter, normalize, score, roll up and rank a validated dataset."""
    n = len(ANALYSIS_STEPS)

    def report(i):
        if progress:
            step(i, n, ANALYSIS_STEPS[i - 1])

    report(1)
    ds = apply_sds_inclusion_filter(ds)
    report(2)
    baselines = build_baselines(ds)
    scaled = scaled_citations(ds, baselines)
    report(3)
    sds_scores = compute_sds_scores(ds, baselines, scaled, workers=workers)
    report(4)
    means = compute_national_means(sds_scores)
    uda_scores = compute_uda_scores(ds, sds_scores, means)
    university_scores = compute_university_scores(ds, sds_scores, means)
    report(5)
    rankings = []
    for scores in (sds_scores, uda_scores, university_scores):
        rankings.extend(rank_all(ds, scores))
    return AnalysisResult(ds, sds_scores, uda_scores, university_scores, rankings)


def _load(data_dir, config_path):
    config = cfg.load_analysis_config(config_path)
    paths = DatasetPaths.from_dir(data_dir)
    ds, report = load_dataset(paths, config)
    return ds, report, paths, config


def _emit(df: pd.DataFrame, outdir: Path, stem: str, fmt: str) -> Path:
    if fmt == "json":
        return write_json(df.to_dict("records"), outdir / f"{stem}.json")
    return write_csv(df, outdir / f"{stem}.csv")


def _read_scores(path) -> pd.DataFrame:
    # CSV cells stay text so ScoreSet.from_frame parses every float exactly.
    path = Path(path)
    if path.suffix == ".json":
        return pd.DataFrame.from_records(json.loads(path.read_text(encoding="utf-8")))
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def cmd_validate(data_dir, config_path=None) -> int:
    """Print the ValidationReport as JSON on stdout. 0 iff it has no errors."""
    _, report, _, _ = _load(data_dir, config_path)
    print(to_json_text(report.to_dict()))
    return 0 if report.ok else 1


def cmd_compute(data_dir, outdir, config_path=None, workers: int = 1, fmt: str = "csv") -> int:
    outdir = Path(outdir)
    print(f"=== Productivity assessment === {datetime.now().isoformat()}", file=sys.stderr, flush=True)
    ds, report, paths, config = _load(data_dir, config_path)
    if not report.ok:
        raise DataValidationError(f"{len(report.errors)} validation error(s) in {data_dir}", report)

    result = analyze(ds, workers=workers, progress=True)
    if not result.rankings:
        print("WARNING: no eligible scope; no score files written.", file=sys.stderr, flush=True)
        return 1

    manifest = RunManifest(command="compute", config=config.snapshot())
    for _, path in paths.items():
        manifest.add_input(path)
    if config_path is not None:
        manifest.add_input(config_path)

    outdir.mkdir(parents=True, exist_ok=True)
    written = [_emit(scores.to_frame(), outdir, SCORE_FILES[scores.level], fmt) for scores in result.score_sets()]
    written.append(_emit(rankings_frame(result.rankings), outdir, "rankings", fmt))
    written.append(write_class_matrix(class_profiles(result.rankings), outdir / "class_matrix.csv"))
    for path in written:
        manifest.add_output(path)
    manifest.write(outdir / "manifest.json")

    print(f"\n=== Done: {len(result.rankings)} ranking list(s) in {outdir} ===", file=sys.stderr, flush=True)
    return 0


def cmd_rank(score_paths, outdir, data_dir=None, config_path=None, fmt: str = "csv") -> int:
    """Rank score files written by compute; staff thresholds apply only when the dataset is given."""
    outdir = Path(outdir)
    ds = None
    if data_dir is not None:
        ds, report, _, _ = _load(data_dir, config_path)
        if not report.ok:
            raise DataValidationError(f"{len(report.errors)} validation error(s) in {data_dir}", report)
        ds = apply_sds_inclusion_filter(ds)

    rankings = []
    for path in score_paths:
        for scores in ScoreSet.from_frame(_read_scores(path)):
            if ds is not None:
                rankings.extend(rank_all(ds, scores))
            else:
                for scope in scores.scope_codes:
                    ranking = rank_and_classify(scores, scope)
                    if ranking is not None:
                        rankings.append(ranking)
    if not rankings:
        print("WARNING: no eligible scope; nothing ranked.", file=sys.stderr, flush=True)
        return 1

    path = _emit(rankings_frame(rankings), outdir, "rankings", fmt)
    write_class_matrix(class_profiles(rankings), outdir / "class_matrix.csv")
    print(f"Ranked {len(rankings)} scope(s) into {path}", file=sys.stderr, flush=True)
    return 0


def cmd_dispersion(outdir, classes_path=None, rankings_path=None, uda_code=None, data_dir=None,
                   covariates_path=None, weighting: str = "university", fmt: str = "csv") -> int:
    """Dispersion report from a class matrix CSV or from a rankings file."""
    outdir = Path(outdir)
    if classes_path is not None:
        profiles = read_class_matrix(classes_path)
    elif rankings_path is not None:
        rankings = rankings_from_frame(pd.read_csv(rankings_path, dtype=str, keep_default_na=False))
        taxonomy = None
        if uda_code is not None:
            if data_dir is None:
                raise DomainError("--uda needs --data to read the SDS → UDA taxonomy")
            taxonomy = read_taxonomy(DatasetPaths.from_dir(data_dir).taxonomy)
        profiles = class_profiles(rankings, uda_code, taxonomy)
    else:
        raise DomainError("Give a class matrix or a rankings file")

    covariates = read_covariates(covariates_path) if covariates_path is not None else None
    report = build_report(profiles, covariates, ConcordanceWeighting(weighting))

    outdir.mkdir(parents=True, exist_ok=True)
    summary = report.summary()
    if fmt == "json":
        summary["per_university"] = report.rows_frame().to_dict("records")
    else:
        write_csv(report.rows_frame(), outdir / "dispersion_report.csv")
    write_json(summary, outdir / "dispersion_report.json")

    median = "N.A." if report.median_r is None else f"{report.median_r:.3f}"
    print(f"Dispersion: {summary['n_defined']}/{len(profiles)} universities with R, median R {median}",
          file=sys.stderr, flush=True)
    return 0


def cmd_generate(seed: int, outdir) -> int:
    """Write a synthetic dataset (five input CSVs) plus a matching analysis.cfg."""
    outdir = Path(outdir)
    ds = generate(SynthConfig(seed=seed))
    dump_dataset(ds, outdir)
    cfg.dump_analysis_config(ds.config, outdir / "analysis.cfg")
    print(f"Synthetic dataset (seed {seed}) written to {outdir}", file=sys.stderr, flush=True)
    return 0


def cmd_fixtures(outdir) -> int:
    """Re-emit the shipped published-table fixtures."""
    outdir = Path(outdir)
    for name in FIXTURE_MATRICES:
        write_class_matrix(read_class_matrix(cfg.FIXTURES_DIR / name), outdir / name)
    for name in FIXTURE_TABLES:
        write_csv(pd.read_csv(cfg.FIXTURES_DIR / name, dtype=str, keep_default_na=False), outdir / name)
    print(f"Fixtures written to {outdir}", file=sys.stderr, flush=True)
    return 0


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="flat key = value analysis config")
    common.add_argument("--outdir", type=Path, default=cfg.TMP_DIR)
    common.add_argument("--format", choices=["csv", "json"], default="csv", dest="fmt")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="run_pipeline", description="Research productivity assessment pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the five input files")
    p.add_argument("--data", type=Path, required=True)

    p = sub.add_parser("compute", parents=[common], help="scores, rankings and class matrix")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None, help="default: FSS_WORKERS")

    p = sub.add_parser("rank", parents=[common], help="rank existing score files (.csv or .json)")
    p.add_argument("--scores", type=Path, nargs="+", required=True)
    p.add_argument("--data", type=Path, default=None)

    p = sub.add_parser("dispersion", parents=[common], help="Δ/R dispersion report")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--classes", type=Path)
    source.add_argument("--rankings", type=Path)
    p.add_argument("--uda", default=None)
    p.add_argument("--data", type=Path, default=None)
    p.add_argument("--covariates", type=Path, default=None)
    p.add_argument("--weighting", choices=[w.value for w in ConcordanceWeighting], default="university")

    p = sub.add_parser("generate", parents=[common], help="write a seeded synthetic dataset")
    p.add_argument("--seed", type=int, default=1)

    sub.add_parser("fixtures", parents=[common], help="re-emit the published-table fixtures")
    return parser


def dispatch(args) -> int:
    if args.command == "validate":
        return cmd_validate(args.data, args.config)
    if args.command == "compute":
        workers = args.workers if args.workers is not None else cfg.default_workers()
        return cmd_compute(args.data, args.outdir, args.config, workers, args.fmt)
    if args.command == "rank":
        return cmd_rank(args.scores, args.outdir, args.data, args.config, args.fmt)
    if args.command == "dispersion":
        return cmd_dispersion(args.outdir, args.classes, args.rankings, args.uda, args.data,
                              args.covariates, args.weighting, args.fmt)
    if args.command == "generate":
        return cmd_generate(args.seed, args.outdir)
    return cmd_fixtures(args.outdir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else cfg.LOG_LEVEL,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return dispatch(args)
    except DataValidationError as e:
        print(f"ERROR: {e}", file=sys.stderr, flush=True)
        if e.report is not None:
            print(to_json_text(e.report.to_dict()), file=sys.stderr, flush=True)
        return e.exit_code
    except FSSError as e:
        print(f"ERROR: {e}", file=sys.stderr, flush=True)
        return e.exit_code
    except OSError as e:
        print(f"ERROR: {e}", file=sys.stderr, flush=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
