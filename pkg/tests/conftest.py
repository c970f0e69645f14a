from pathlib import Path

import pytest

from bispec import parse_asl, parse_cnlbi
from bispec.engine import load_cube

ROOT = Path(__file__).resolve().parent.parent
CORPUS_CNLBI = ROOT / "corpus" / "medbuddy.cnlbi"
CORPUS_ASL = ROOT / "corpus" / "medbuddy.asl"
DATA_DIR = ROOT / "fixtures" / "medbuddy_data"


@pytest.fixture(scope="session")
def cnlbi_source() -> str:
    return CORPUS_CNLBI.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def asl_source() -> str:
    return CORPUS_ASL.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def medbuddy(cnlbi_source):
    model, diags = parse_cnlbi(cnlbi_source, str(CORPUS_CNLBI))
    assert not any(d.is_error for d in diags), [f"{d.code} {d.message}" for d in diags]
    return model


@pytest.fixture(scope="session")
def medbuddy_asl(asl_source):
    model, diags = parse_asl(asl_source, str(CORPUS_ASL))
    assert not any(d.is_error for d in diags), [f"{d.code} {d.message}" for d in diags]
    return model


@pytest.fixture(scope="session")
def cube(medbuddy):
    cube, diags = load_cube(medbuddy, DATA_DIR)
    assert not any(d.is_error for d in diags), [f"{d.code} {d.message}" for d in diags]
    return cube
