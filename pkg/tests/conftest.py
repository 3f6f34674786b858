from __future__ import annotations

from pathlib import Path

import pytest

from sslab.formats import load_instance

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def seven_agent_path() -> Path:
    return DATA / "seven_agent_market.json"


@pytest.fixture(scope="session")
def staircase_path() -> Path:
    return DATA / "staircase_market.json"


@pytest.fixture(scope="session")
def seven_agent_ehm(seven_agent_path):
    """The running golden instance: C1 = {a,b,c}, C2 = {d,e,f,g}."""
    return load_instance(str(seven_agent_path))


@pytest.fixture(scope="session")
def staircase_ehm(staircase_path):
    """Staircase-satisfying twin of the golden instance."""
    return load_instance(str(staircase_path))
