import os
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]

# Null-distribution simulations are cached so repeated test runs are fast.
# Honor an externally provided cache dir; otherwise use a repo-local one.
os.environ.setdefault("STADF_CACHE_DIR", str(REPO_ROOT / ".stadf-cache"))


@pytest.fixture(scope="session")
def fixture_csv() -> Path:
    return REPO_ROOT / "data" / "fixture_series.csv"


@pytest.fixture(scope="session")
def desk_config() -> Path:
    return REPO_ROOT / "configs" / "table1_desk.yaml"


@pytest.fixture(scope="session")
def models_config() -> Path:
    return REPO_ROOT / "configs" / "all_volatility_models_desk.yaml"
