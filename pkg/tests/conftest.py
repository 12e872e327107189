from pathlib import Path

import pytest

from cqcheck.parser import parse_workspace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def school():
    return parse_workspace((FIXTURES / "school.cmpl").read_text())


@pytest.fixture(scope="session")
def process_ws():
    return parse_workspace((FIXTURES / "school_process.cmpl").read_text())
