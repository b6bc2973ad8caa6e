import csv
from pathlib import Path

import pytest

from appraisal360.campaign import RESPONSE_COLUMNS, default_config, load_campaign_config

ROOT = Path(__file__).resolve().parents[1]
REPLICA_DIR = ROOT / "data" / "paper_replica"

PAPER_R_ROWS = [
    [0.1, 0.4, 0.3, 0.1, 0.1],
    [0.2, 0.5, 0.2, 0.1, 0.0],
    [0.5, 0.3, 0.1, 0.1, 0.0],
    [0.2, 0.5, 0.2, 0.1, 0.0],
]


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def replica_config():
    return load_campaign_config(REPLICA_DIR / "campaign.yaml")


@pytest.fixture
def replica_paths():
    return REPLICA_DIR / "campaign.yaml", REPLICA_DIR / "responses.csv"


def write_responses(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESPONSE_COLUMNS)
        writer.writerows(rows)
    return path


def full_rows(config, subject="S1", score=10, roles=("superior",), raters_per_role=1):
    """One response per rater for every factor of every aspect."""
    rows = []
    for role in roles:
        for n in range(raters_per_role):
            for aspect in config.aspects:
                for factor in aspect.factors:
                    rows.append([f"{role}{n}", role, subject, aspect.id, factor.id, score])
    return rows
