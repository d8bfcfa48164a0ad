import pathlib

import pytest

from privlens.dsl import parse_scenario
from privlens.pipeline import analyze_bundle

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
SYSTEMS = ("smart-certificates", "linking-service", "identity-mixer", "smartcard")


def scenario_path(name):
    return CORPUS / name


@pytest.fixture(scope="session")
def example():
    return parse_scenario(scenario_path("example"))


@pytest.fixture(scope="session")
def bundles():
    return {s: parse_scenario(scenario_path(s)) for s in SYSTEMS}


@pytest.fixture(scope="session")
def analyses(bundles):
    return {s: analyze_bundle(b) for s, b in bundles.items()}
