import io
import json

import pytest

from bispec.cli import main
from conftest import CORPUS_ASL, CORPUS_CNLBI, DATA_DIR


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("CNLBI_COLOR", "never")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_corpus_exits_zero(capsys):
    code, out, err = run(capsys, "check", str(CORPUS_CNLBI))
    assert code == 0
    assert out == ""  # artifacts only on stdout
    assert "schema shape: snowflake" in err


def test_check_asl_corpus_exits_zero(capsys):
    code, _, _ = run(capsys, "check", str(CORPUS_ASL))
    assert code == 0


def test_check_failing_document_exits_one(capsys, tmp_path):
    bad = tmp_path / "bad.cnlbi"
    bad.write_text("DataEntity X is a Wibble Dimension with attributes a is a UUID (PrimaryKey).\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1
    assert "CNL011" in err


def test_parse_emits_model_json(capsys):
    code, out, _ = run(capsys, "parse", str(CORPUS_CNLBI), "--emit", "model-json")
    assert code == 0
    payload = json.loads(out)
    assert payload["format"] == "bispec-model"
    assert len(payload["entities"]) == 6


def test_json_diagnostics_are_machine_readable(capsys, tmp_path):
    bad = tmp_path / "bad.cnlbi"
    bad.write_text("DataEntity X is a Wibble Dimension with attributes a is a UUID (PrimaryKey).\n")
    code, _, err = run(capsys, "check", str(bad), "--json")
    assert code == 1
    lines = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
    assert any(entry["code"] == "CNL011" and entry["line"] for entry in lines)


def test_convert_round_trips_through_stdin(capsys, monkeypatch, medbuddy):
    from bispec import canonicalize, parse_asl

    code, converted, _ = run(capsys, "convert", str(CORPUS_CNLBI), "--to", "asl")
    assert code == 0

    # pipe the conversion back in via '-' with an explicit syntax
    monkeypatch.setattr("sys.stdin", io.StringIO(converted))
    code, out, err = run(capsys, "parse", "-", "--syntax", "asl", "--emit", "model-json")
    assert code == 0

    reparsed, _ = parse_asl(converted)
    assert canonicalize(reparsed) == canonicalize(medbuddy)


def test_stdin_requires_explicit_syntax(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    with pytest.raises(SystemExit) as exc:
        main(["parse", "-"])
    assert exc.value.code == 2


def test_fmt_is_idempotent(capsys, tmp_path):
    code, once, _ = run(capsys, "fmt", str(CORPUS_CNLBI))
    assert code == 0
    again = tmp_path / "canonical.cnlbi"
    again.write_text(once)
    code, twice, _ = run(capsys, "fmt", str(again))
    assert code == 0
    assert once == twice


def test_gen_writes_artifacts_inside_out_dir(capsys, tmp_path):
    out_dir = tmp_path / "generated"
    code, _, _ = run(capsys, "gen", str(CORPUS_CNLBI), "--out-dir", str(out_dir))
    assert code == 0
    assert (out_dir / "schema.sql").exists()
    assert (out_dir / "dashboard.json").exists()
    assert (out_dir / "requirements.md").exists()
    queries = sorted(p.name for p in (out_dir / "queries").iterdir())
    assert "AnalysisAppointmentsInstitutionOnNationalLevel__AppointmentsByInstitutionCity.sql" in queries
    assert len(queries) == 13  # every structured operation
    # nothing written outside --out-dir
    assert sorted(p.name for p in tmp_path.iterdir()) == ["generated"]


def test_gen_only_filter(capsys, tmp_path):
    out_dir = tmp_path / "docs"
    code, _, _ = run(capsys, "gen", str(CORPUS_CNLBI), "--only", "doc", "--out-dir", str(out_dir))
    assert code == 0
    assert (out_dir / "requirements.md").exists()
    assert not (out_dir / "schema.sql").exists()


def test_olap_runs_a_bound_slice(capsys):
    code, out, _ = run(
        capsys,
        "olap", str(CORPUS_CNLBI),
        "--data", str(DATA_DIR),
        "--usecase", "AnalysisAppointmentsInstitutionOnNationalLevel",
        "--op", "ScheduledAppointmentsInSpecificYear",
        "--bind", "year=2023",
        "--format", "csv",
    )
    assert code == 0
    header, row = out.splitlines()[:2]
    assert header.startswith("row_count,CountAppointments")
    assert row.startswith("8,8,2,")


def test_olap_without_binding_exits_one(capsys):
    code, _, err = run(
        capsys,
        "olap", str(CORPUS_CNLBI),
        "--data", str(DATA_DIR),
        "--usecase", "AnalysisAppointmentsInstitutionOnNationalLevel",
        "--op", "ScheduledAppointmentsInSpecificYear",
    )
    assert code == 1
    assert "ENG010" in err


def test_olap_table_format(capsys):
    code, out, _ = run(
        capsys,
        "olap", str(CORPUS_CNLBI),
        "--data", str(DATA_DIR),
        "--usecase", "AnalysisAppointmentsInstitutionOnNationalLevel",
        "--op", "AppointmentsByInstitutionCity",
    )
    assert code == 0
    assert out.splitlines()[0].startswith("Institution.city")
    assert any(line.startswith("c1") for line in out.splitlines())


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["olap"])  # missing required arguments
    assert exc.value.code == 2
