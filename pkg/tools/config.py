"""
config.py — Central configuration for the productivity assessment tools.

Loads .env, exposes paths and runtime settings as module-level constants, and
parses the flat key/value analysis config file. Every other tool imports from here.
"""

import json
import os
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

from errors import ConfigurationError
from model import (
    AcademicRank, AnalysisConfig, BaselineScope, MultiCategoryRule, Period, PositionWeights,
)

# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------
BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")

TMP_DIR = Path(os.getenv("FSS_OUTDIR", str(BASE_DIR / ".tmp")))
FIXTURES_DIR = BASE_DIR / "fixtures"

DEFAULT_CONFIG_PATH = BASE_DIR / "analysis.cfg"
CREDIT_WEIGHTS_PATH = BASE_DIR / "credit_weights.json"

# ---------------------------------------------------------------------------
# Runtime
# ---------------------------------------------------------------------------
TOOL_VERSION = "1.0.0"
WORKERS_SETTING = os.getenv("FSS_WORKERS", "1")
LOG_LEVEL = os.getenv("FSS_LOG_LEVEL", "INFO")

# Input file names inside a dataset directory
INPUT_FILES = {
    "taxonomy": "taxonomy.csv",
    "researchers": "researchers.csv",
    "salaries": "salaries.csv",
    "publications": "publications.csv",
    "authorships": "authorships.csv",
}

# Relative-unit salaries; only ratios matter to rankings.
DEFAULT_SALARIES = {
    AcademicRank.ASSISTANT: 1.0,
    AcademicRank.ASSOCIATE: 1.4,
    AcademicRank.FULL: 2.0,
}

# ---------------------------------------------------------------------------
# Credit weights (credit_weights.json)
# ---------------------------------------------------------------------------

_WEIGHT_KEYS = {
    "same_university": {
        "first": "same_first", "last": "same_last", "others": "same_others",
    },
    "different_universities": {
        "first": "diff_first", "last": "diff_last", "second": "diff_second",
        "second_to_last": "diff_second_to_last", "others": "diff_others",
    },
}


def load_credit_weights(path: Path) -> PositionWeights:
    """Load a credit_weights.json file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Credit weights file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        table = data["position_weighted"]
        kwargs = {}
        for group, keys in _WEIGHT_KEYS.items():
            for json_key, field_name in keys.items():
                kwargs[field_name] = float(table[group][json_key])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"Malformed credit weights file {path}: {e}") from None
    return PositionWeights(**kwargs)


def dump_credit_weights(weights: PositionWeights, path: Path) -> None:
    """Write weights in the credit_weights.json schema; load_credit_weights reads it back unchanged."""
    table = {
        group: {json_key: getattr(weights, field_name) for json_key, field_name in keys.items()}
        for group, keys in _WEIGHT_KEYS.items()
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"position_weighted": table}, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# Analysis config (flat key = value file)
# ---------------------------------------------------------------------------

def _parse_enum(enum_cls, key, value):
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        allowed = "|".join(m.value for m in enum_cls)
        raise ConfigurationError(f"{key} must be one of {allowed}, got {value!r}") from None


def _parse_number(cast, key, value):
    try:
        return cast(value.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be {cast.__name__}, got {value!r}") from None


def default_workers(value: str | None = None) -> int:
    """Worker count from FSS_WORKERS (or the given string); must be a positive int."""
    workers = _parse_number(int, "FSS_WORKERS", WORKERS_SETTING if value is None else value)
    if workers < 1:
        raise ConfigurationError(f"FSS_WORKERS must be at least 1, got {workers}")
    return workers


def config_from_mapping(values: dict, base_dir: Path | None = None) -> AnalysisConfig:
    """Build an AnalysisConfig from string key/value pairs named after its fields."""
    kwargs = {}
    for key, value in values.items():
        if value is None:
            raise ConfigurationError(f"Config key {key!r} has no value")
        if key == "period":
            kwargs["period"] = Period.parse(value)
        elif key == "min_publishing_share":
            kwargs[key] = _parse_number(float, key, value)
        elif key in ("min_staff_university", "min_staff_uda"):
            kwargs[key] = _parse_number(int, key, value)
        elif key == "baseline_scope":
            kwargs[key] = _parse_enum(BaselineScope, key, value)
        elif key == "multi_category_rule":
            kwargs[key] = _parse_enum(MultiCategoryRule, key, value)
        elif key == "credit_weights":
            weights_path = Path(value.strip())
            if not weights_path.is_absolute() and base_dir is not None:
                weights_path = base_dir / weights_path
            kwargs[key] = load_credit_weights(weights_path)
        else:
            raise ConfigurationError(f"Unknown config key: {key!r}")
    return AnalysisConfig(**kwargs)


def load_analysis_config(path: Path | None = None) -> AnalysisConfig:
    """Load the analysis config file. With no path, use analysis.cfg if present, else defaults."""
    if path is None:
        if not DEFAULT_CONFIG_PATH.exists():
            return AnalysisConfig()
        path = DEFAULT_CONFIG_PATH
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    return config_from_mapping(dotenv_values(path), base_dir=path.parent)


def dump_analysis_config(config: AnalysisConfig, path: Path) -> Path:
    """Write the scalar settings as key = value lines. Credit weights are left at their defaults."""
    snapshot = config.snapshot()
    snapshot.pop("credit_weights")
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for key, value in snapshot.items():
            f.write(f"{key} = {value}\n")
    return path
