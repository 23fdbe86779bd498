import json
from pathlib import Path

import pytest

import amlrisk
from amlrisk.records import load_record_store

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parent.parent / "src" / "amlrisk" / "data"


@pytest.fixture(scope="session")
def catalog():
    return amlrisk.load_bundled_catalog()


@pytest.fixture(scope="session")
def catalog_dict():
    return json.loads((DATA / "catalog.json").read_text())


@pytest.fixture(scope="session")
def questionnaire():
    return amlrisk.load_questionnaire()


@pytest.fixture(scope="session")
def fixture_responses():
    raw = json.loads((FIXTURES / "responses_feedback_scoring.json").read_text())
    return raw


@pytest.fixture(scope="session")
def profile(fixture_responses):
    return amlrisk.build_profile(
        fixture_responses["answers"],
        fixture_responses["system_description"],
        fixture_responses["threat_actor"],
    )


@pytest.fixture(scope="session")
def store():
    return load_record_store(DATA / "corpus.jsonl")


@pytest.fixture(scope="session")
def corpus_records():
    lines = (DATA / "corpus.jsonl").read_text().splitlines()
    return [json.loads(line) for line in lines if line.strip()]


@pytest.fixture(scope="session")
def golden_report_text():
    return (FIXTURES / "golden_assessment.json").read_text()


@pytest.fixture(scope="session")
def golden_assessment(golden_report_text):
    return amlrisk.parse_machine_report(golden_report_text)


@pytest.fixture(scope="session")
def fixture_assessment(catalog, profile, store):
    return amlrisk.assess(
        catalog, profile, store, created_at="2026-01-01T00:00:00+00:00"
    )
