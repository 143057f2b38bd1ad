import json
from pathlib import Path

import pytest

from app.services.poly import IntMatrix, IntPolynomial


@pytest.fixture
def fixtures_dir():
    return Path(__file__).parent / "fixtures"


@pytest.fixture
def printed_examples(fixtures_dir):
    with open(fixtures_dir / "printed_examples.json") as f:
        return json.load(f)


@pytest.fixture
def families():
    config_path = Path(__file__).parent.parent / "config" / "families.json"
    with open(config_path) as f:
        return json.load(f)


def matrix(rows) -> IntMatrix:
    return IntMatrix.from_rows(rows)


def product(*factors: str) -> IntPolynomial:
    result = IntPolynomial((1,))
    for factor in factors:
        result = result * IntPolynomial.parse(factor)
    return result
