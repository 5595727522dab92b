from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from wagetidy.config import load_config
from wagetidy.pipeline import run_all

FIXTURE_DIR = Path(__file__).resolve().parents[1] / "src" / "wagetidy" / "data" / "fixture"
GOLDEN_DIR = FIXTURE_DIR / "golden"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def manifest() -> dict:
    return json.loads((FIXTURE_DIR / "manifest.json").read_text())


@pytest.fixture(scope="session")
def raw_fixture_path() -> Path:
    return FIXTURE_DIR / "raw_extract.csv"


def write_fixture_config(directory: Path, **extra: object) -> Path:
    values: dict[str, object] = {
        "raw_csv": FIXTURE_DIR / "raw_extract.csv",
        "original_csv": FIXTURE_DIR / "original_subset.csv",
        "cpi_csv": FIXTURE_DIR / "cpi.csv",
        "out_dir": directory / "out",
        "vintage": "fixture-v1",
        "base_year": 1990,
    }
    values.update(extra)
    path = directory / "pipeline.conf"
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
    return path


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """One full fixture pipeline run shared by read-only tests."""
    base = tmp_path_factory.mktemp("pipeline")
    config_path = write_fixture_config(base)
    cfg = load_config(config_path)
    results, report = run_all(cfg)
    assert not report.failed, "fixture validation must pass"
    return base


@pytest.fixture(scope="session")
def pipeline_out(pipeline_run: Path) -> Path:
    return pipeline_run / "out"
