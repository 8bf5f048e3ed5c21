"""
test_run_pipeline.py — Offline tests for the command-line entry point.

Every subcommand runs against a seeded synthetic dataset or the shipped
fixtures; nothing touches the network.
Run:  python -m pytest tests/test_run_pipeline.py -v
"""

import json
from unittest.mock import patch

import pandas as pd
import pytest

import run_pipeline
from conftest import make_dataset, make_pub
from config import load_analysis_config
from dispersion import read_class_matrix
from ingest import DatasetPaths, dump_dataset, load_dataset
from model import AcademicRank, Researcher
from oracle import oracle_recompute
from reports import file_digest

COMPUTE_OUTPUTS = [
    "scores_sds.csv", "scores_uda.csv", "scores_univ.csv", "rankings.csv", "class_matrix.csv",
]


@pytest.fixture
def synthetic(tmp_path):
    data = tmp_path / "data"
    assert run_pipeline.main(["generate", "--seed", "1", "--outdir", str(data)]) == 0
    return data


def compute(data, outdir, *extra):
    return run_pipeline.main(["compute", "--data", str(data), "--config", str(data / "analysis.cfg"),
                              "--outdir", str(outdir), *extra])


# =========================================================================
# validate
# =========================================================================

class TestValidate:
    def test_valid_dataset(self, synthetic, capsys):
        code = run_pipeline.main(["validate", "--data", str(synthetic), "--config", str(synthetic / "analysis.cfg")])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["ok"] is True
        assert report["counts"]["universities"] == 8

    def test_dangling_researcher(self, synthetic, capsys):
        with open(synthetic / "authorships.csv", "a", encoding="utf-8") as f:
            f.write("P000001,99,ghost,R99999,UNIV_01\n")
        code = run_pipeline.main(["validate", "--data", str(synthetic)])
        assert code == 1
        report = json.loads(capsys.readouterr().out)
        assert any("R99999" in e["message"] for e in report["errors"])

    def test_missing_file(self, synthetic):
        (synthetic / "salaries.csv").unlink()
        assert run_pipeline.main(["validate", "--data", str(synthetic)]) == 2

    def test_bad_config(self, synthetic, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("period = soon\n")
        assert run_pipeline.main(["validate", "--data", str(synthetic), "--config", str(bad)]) == 3


# =========================================================================
# compute
# =========================================================================

class TestCompute:
    def test_writes_outputs_and_manifest(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert sorted(manifest["outputs"]) == sorted(COMPUTE_OUTPUTS)
        for name in COMPUTE_OUTPUTS:
            assert manifest["outputs"][name] == file_digest(out / name)
        assert "authorships.csv" in manifest["inputs"]
        assert manifest["config"]["min_staff_university"] == 3

    def test_rerun_gives_identical_digests(self, synthetic, tmp_path):
        assert compute(synthetic, tmp_path / "one") == 0
        assert compute(synthetic, tmp_path / "two", "--workers", "3") == 0
        one = json.loads((tmp_path / "one" / "manifest.json").read_text())
        two = json.loads((tmp_path / "two" / "manifest.json").read_text())
        assert one["outputs"] == two["outputs"]

    def test_bad_workers_setting_exits_3(self, synthetic, tmp_path):
        with patch.object(run_pipeline.cfg, "WORKERS_SETTING", "many"):
            assert compute(synthetic, tmp_path / "out") == 3
        assert not (tmp_path / "out").exists()

    def test_seed_one_matches_oracle(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out) == 0
        ds, _ = load_dataset(DatasetPaths.from_dir(synthetic), load_analysis_config(synthetic / "analysis.cfg"))
        expected = oracle_recompute(ds)

        univ = pd.read_csv(out / "scores_univ.csv", dtype={"university_id": str})
        got = dict(zip(univ["university_id"], univ["fss"]))
        assert got == pytest.approx(expected.university_scores, rel=1e-9)

        rankings = pd.read_csv(out / "rankings.csv", dtype=str, keep_default_na=False)
        overall = rankings[rankings["level"] == "university"]
        assert dict(zip(overall["university_id"], overall["class"])) == {
            u: letter for u, (_, _, letter) in expected.rankings[("university", "OVERALL")].items()
        }

    def test_json_format(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out, "--format", "json") == 0
        rows = json.loads((out / "rankings.json").read_text())
        assert {"level", "scope_code", "university_id", "rank", "class"} <= set(rows[0])

    def test_validation_failure_writes_nothing(self, synthetic, tmp_path):
        with open(synthetic / "researchers.csv", "a", encoding="utf-8") as f:
            f.write("R00001,UNIV_01,SDS_01,full\n")
        out = tmp_path / "out"
        assert compute(synthetic, out) == 1
        assert not out.exists()

    def test_no_eligible_scope(self, tmp_path, capsys):
        ds = make_dataset(
            [Researcher("R1", "U1", "S1", AcademicRank.FULL)],
            [make_pub("P1", [("R1", "U1")], citations=3)],
        )
        data = tmp_path / "single"
        dump_dataset(ds, data)
        out = tmp_path / "out"
        assert run_pipeline.main(["compute", "--data", str(data), "--outdir", str(out)]) == 1
        assert "no eligible scope" in capsys.readouterr().err
        assert not (out / "scores_sds.csv").exists()


# =========================================================================
# rank
# =========================================================================

class TestRank:
    def test_reranks_score_files(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out) == 0
        again = tmp_path / "again"
        code = run_pipeline.main(["rank", "--scores", str(out / "scores_sds.csv"), str(out / "scores_uda.csv"),
                                  str(out / "scores_univ.csv"), "--data", str(synthetic),
                                  "--config", str(synthetic / "analysis.cfg"), "--outdir", str(again)])
        assert code == 0
        assert (again / "rankings.csv").read_bytes() == (out / "rankings.csv").read_bytes()

    def test_reranks_json_score_files(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out, "--format", "json") == 0
        again = tmp_path / "again"
        code = run_pipeline.main(["rank", "--scores", str(out / "scores_sds.json"), str(out / "scores_uda.json"),
                                  str(out / "scores_univ.json"), "--data", str(synthetic),
                                  "--config", str(synthetic / "analysis.cfg"), "--outdir", str(again),
                                  "--format", "json"])
        assert code == 0
        assert (again / "rankings.json").read_bytes() == (out / "rankings.json").read_bytes()


# =========================================================================
# dispersion
# =========================================================================

class TestDispersion:
    def test_published_overall_table(self, fixtures_dir, tmp_path):
        out = tmp_path / "out"
        code = run_pipeline.main(["dispersion", "--classes", str(fixtures_dir / "overall_classes.csv"),
                                  "--outdir", str(out)])
        assert code == 0
        rows = pd.read_csv(out / "dispersion_report.csv", dtype=str, keep_default_na=False)
        r = dict(zip(rows["university_id"], rows["r"]))
        assert float(r["UNIV_27"]) == pytest.approx(1.0)
        assert r["UNIV_3"] == "N.A."
        summary = json.loads((out / "dispersion_report.json").read_text())
        assert summary["median_r"] == pytest.approx(0.455, abs=1e-3)
        assert summary["concordance"]["weighting"] == "university"

    def test_pooled_physics_with_covariates(self, fixtures_dir, tmp_path):
        out = tmp_path / "out"
        code = run_pipeline.main(["dispersion", "--classes", str(fixtures_dir / "physics_classes.csv"),
                                  "--covariates", str(fixtures_dir / "physics_covariates.csv"),
                                  "--weighting", "pooled", "--outdir", str(out)])
        assert code == 0
        summary = json.loads((out / "dispersion_report.json").read_text())
        assert summary["correlations"]["research_staff"] == pytest.approx(0.03, abs=0.01)
        assert summary["concordance"]["rows"]["A"]["n_universities"] == 9

    def test_from_computed_rankings(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out) == 0
        code = run_pipeline.main(["dispersion", "--rankings", str(out / "rankings.csv"),
                                  "--uda", "UDA_01", "--data", str(synthetic), "--outdir", str(tmp_path / "d")])
        assert code == 0
        assert (tmp_path / "d" / "dispersion_report.json").exists()

    def test_uda_without_taxonomy(self, synthetic, tmp_path):
        out = tmp_path / "out"
        assert compute(synthetic, out) == 0
        code = run_pipeline.main(["dispersion", "--rankings", str(out / "rankings.csv"),
                                  "--uda", "UDA_01", "--outdir", str(tmp_path / "d")])
        assert code == 1

    def test_library_call_matches_cli(self, fixtures_dir, tmp_path):
        classes = fixtures_dir / "overall_classes.csv"
        assert run_pipeline.cmd_dispersion(tmp_path / "lib", classes_path=classes) == 0
        assert run_pipeline.main(["dispersion", "--classes", str(classes), "--outdir", str(tmp_path / "cli")]) == 0
        for name in ("dispersion_report.csv", "dispersion_report.json"):
            assert (tmp_path / "lib" / name).read_bytes() == (tmp_path / "cli" / name).read_bytes()


# =========================================================================
# generate and fixtures
# =========================================================================

class TestGenerateAndFixtures:
    def test_generate_is_deterministic(self, tmp_path):
        for name in ("a", "b"):
            assert run_pipeline.main(["generate", "--seed", "7", "--outdir", str(tmp_path / name)]) == 0
        for name in ("taxonomy.csv", "researchers.csv", "publications.csv", "authorships.csv", "analysis.cfg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_fixtures(self, fixtures_dir, tmp_path):
        assert run_pipeline.main(["fixtures", "--outdir", str(tmp_path)]) == 0
        for name in run_pipeline.FIXTURE_MATRICES:
            assert read_class_matrix(tmp_path / name) == read_class_matrix(fixtures_dir / name)
        for name in run_pipeline.FIXTURE_TABLES:
            assert (tmp_path / name).exists()
