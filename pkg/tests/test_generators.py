import dataclasses
import json
import math
import sqlite3
from datetime import date

import pytest

from bispec import model as m, parse_cnlbi
from bispec.engine import run_use_case
from bispec.generators import (
    GeneratorError,
    gen_dashboard_manifest,
    gen_olap_sql,
    gen_requirements_doc,
    gen_schema_sql,
)


@pytest.fixture(scope="module")
def connection(medbuddy, cube):
    """An in-memory database loaded from the generated DDL plus the fixture."""
    conn = sqlite3.connect(":memory:")
    conn.executescript(gen_schema_sql(medbuddy))
    for entity in medbuddy.entities:
        table = cube.table(entity.id)
        columns = ", ".join(f'"{c}"' for c in table.columns)
        holes = ", ".join("?" for _ in table.columns)
        for row in table.rows:
            values = []
            for column in table.columns:
                value = row[column]
                if isinstance(value, bool):
                    value = int(value)
                elif isinstance(value, date):
                    value = value.isoformat()
                values.append(value)
            conn.execute(f'INSERT INTO "{entity.id}" ({columns}) VALUES ({holes})', values)
    conn.commit()
    yield conn
    conn.close()


def test_schema_has_one_table_per_entity(medbuddy):
    sql = gen_schema_sql(medbuddy)
    assert sql.count("CREATE TABLE") == 6
    # dimensions precede the fact that references them
    assert sql.index('CREATE TABLE "City"') < sql.index('CREATE TABLE "Institution"')
    assert sql.index('CREATE TABLE "Institution"') < sql.index('CREATE TABLE "AppointmentRequest"')
    fact_block = sql[sql.index('CREATE TABLE "AppointmentRequest"') :]
    assert fact_block.count("FOREIGN KEY") == 5
    # measures are commented, never stored
    assert '"CountAppointments"' not in sql
    assert "--   CountAppointments = COUNT(id)" in sql


def test_city_table_shape(medbuddy):
    sql = gen_schema_sql(medbuddy)
    block = sql[sql.index('CREATE TABLE "City"') : sql.index('CREATE TABLE "Institution"')]
    assert block.count('"') >= 8
    assert '"id" CHAR(36) PRIMARY KEY' in block
    assert block.count(",\n") == 3  # four columns


def test_type_mapping(medbuddy):
    sql = gen_schema_sql(medbuddy)
    assert '"latitude" DECIMAL(18,6) NOT NULL' in sql
    assert '"year" INTEGER NOT NULL' in sql
    assert '"closed" BOOLEAN NOT NULL' in sql
    assert '"date" DATE NOT NULL' in sql
    assert "CHECK (\"gender\" IN ('Male', 'Female'))" in sql


def test_string_length_maps_to_varchar():
    source = """
DataEntity E is a Master Dimension with attributes
  id is a UUID (PrimaryKey),
  short is a String (NotNull).
"""
    model, _ = parse_cnlbi(source)
    entity = model.entity("E")
    sized = dataclasses.replace(
        entity,
        attributes=entity.attributes
        + (m.DataAttribute(id="code", attr_type=m.AttributeType.primitive("String", 50)),),
    )
    sql = gen_schema_sql(dataclasses.replace(model, entities=(sized,)))
    assert '"short" VARCHAR(255) NOT NULL' in sql
    assert '"code" VARCHAR(50)' in sql


def test_empty_model_emits_header_only():
    sql = gen_schema_sql(m.SpecificationModel())
    assert "CREATE TABLE" not in sql
    assert sql.startswith("--")


def test_reference_cycle_reports_gen001():
    a = m.DataEntity(
        id="A",
        entity_type="Reference",
        sub_type="Dimension",
        attributes=(
            m.DataAttribute(id="id", attr_type=m.AttributeType.primitive("UUID"), constraints=frozenset({m.Constraint("PrimaryKey")})),
            m.DataAttribute(id="b", attr_type=m.AttributeType.dimension("B")),
        ),
    )
    b = m.DataEntity(
        id="B",
        entity_type="Reference",
        sub_type="Dimension",
        attributes=(
            m.DataAttribute(id="id", attr_type=m.AttributeType.primitive("UUID"), constraints=frozenset({m.Constraint("PrimaryKey")})),
            m.DataAttribute(id="a", attr_type=m.AttributeType.dimension("A")),
        ),
    )
    with pytest.raises(GeneratorError) as exc:
        gen_schema_sql(m.SpecificationModel(entities=(a, b)))
    assert exc.value.code == "GEN001"


def test_schema_loads_and_fixture_inserts(connection):
    count = connection.execute('SELECT COUNT(*) FROM "AppointmentRequest"').fetchone()[0]
    assert count == 10


GROUP_BY_OPS = [
    ("AnalysisAppointmentsInstitutionOnNationalLevel", "AppointmentsByInstitutionCity"),
    ("AnalysisAppointmentsInstitutionOnNationalLevel", "AppointmentsByInstitution"),
    ("AnalysisAppointmentsPatientOnNationalLevel", "AppointmentsByGender"),
    ("AnalysisAppointmentsPatientOnNationalLevel", "AppointmentsByAgeGroup"),
]


@pytest.mark.parametrize("uc_id,op_id", GROUP_BY_OPS)
def test_group_by_queries_match_engine(connection, medbuddy, cube, uc_id, op_id):
    sql = gen_olap_sql(medbuddy, uc_id, op_id)
    db_rows = connection.execute(sql).fetchall()
    engine_result = run_use_case(cube, uc_id, op_id)
    count_cols = [
        engine_result.columns.index("CountAppointments"),
        engine_result.columns.index("CountCancelledAppointments"),
    ]
    engine_set = {(row[0], row[count_cols[0]], row[count_cols[1]]) for row in engine_result.rows}
    db_set = {(row[0], row[count_cols[0]], row[count_cols[1]]) for row in db_rows}
    assert db_set == engine_set
    # decimal columns agree to 1e-9 as well
    avg_col = engine_result.columns.index("AvgWaitingTime")
    engine_avg = {row[0]: row[avg_col] for row in engine_result.rows}
    for row in db_rows:
        expected = engine_avg[row[0]]
        if expected is None:
            assert row[avg_col] is None
        else:
            assert math.isclose(row[avg_col], expected, abs_tol=1e-9)


def test_slice_query_uses_named_placeholder(connection, medbuddy, cube):
    sql = gen_olap_sql(medbuddy, "AnalysisAppointmentsInstitutionOnNationalLevel", "ScheduledAppointmentsInSpecificYear")
    assert ":year" in sql
    rows = connection.execute(sql, {"year": 2023}).fetchall()
    summary = run_use_case(
        cube, "AnalysisAppointmentsInstitutionOnNationalLevel", "ScheduledAppointmentsInSpecificYear", {"year": "2023"}
    )
    assert len(rows) == summary.rows[0][summary.columns.index("row_count")] == 8


def test_dice_query_filters_conjunction(connection, medbuddy):
    sql = gen_olap_sql(
        medbuddy, "AnalysisAppointmentsInstitutionOnNationalLevel", "ScheduledAppointmentsBySpecificCityAndYear"
    )
    rows = connection.execute(sql, {"id": "c2", "year": 2023}).fetchall()
    assert len(rows) == 4


def test_pivot_query_groups_both_axes(medbuddy):
    pivot_op = m.OlapOperation(id="P", kind="Pivot", swap=("Institution", "Time"))
    uc = medbuddy.use_case("AnalysisAppointmentsInstitutionOnNationalLevel")
    patched_uc = dataclasses.replace(uc, operations=uc.operations + (pivot_op,))
    patched = dataclasses.replace(
        medbuddy, use_cases=tuple(patched_uc if u.id == uc.id else u for u in medbuddy.use_cases)
    )
    sql = gen_olap_sql(patched, uc.id, "P")
    assert "GROUP BY" in sql and sql.count('"j_') >= 2
    assert "pivot" in sql.lower()


def test_underspecified_operation_reports_gen010(medbuddy_asl):
    with pytest.raises(GeneratorError) as exc:
        gen_olap_sql(medbuddy_asl, "Analysis_Appointments_National_Level", "AppointmentsByInstitutionCity")
    assert exc.value.code == "GEN010"


# ---------------------------------------------------------------------------
# Dashboard manifest
# ---------------------------------------------------------------------------


def test_manifest_matches_institution_page_elements(medbuddy):
    manifest = json.loads(gen_dashboard_manifest(medbuddy))
    pages = {c["id"]: c for c in manifest["containers"]}
    institution = pages["InstitutionOverviewPage"]
    assert [(c["id"], c["subtype"] or c["type"]) for c in institution["components"]] == [
        ("TimeRangeFilter", "Form"),
        ("LocationMap", "InteractiveGeographicalMap"),
        ("InstitutionTable", "Table"),
        ("CancellationRateChart", "InteractiveLineChart"),
        ("PatientPageNavigationButton", "Detail"),
    ]
    location_map = institution["components"][1]
    bindings = {p["kind"]: p["binding"] for p in location_map["parts"]}
    assert bindings["Latitude"] == {"path": "Institution.latitude", "entity": "Institution", "attribute": "latitude"}
    assert bindings["Longitude"]["attribute"] == "longitude"
    assert bindings["Value"]["attribute"] == "CountAppointments"
    assert location_map["actions"] == ["DrillDown", "TooltipAndHoverDetail", "ZoomAndPanUpdate"]


def test_manifest_matches_patient_page_elements(medbuddy):
    manifest = json.loads(gen_dashboard_manifest(medbuddy))
    pages = {c["id"]: c for c in manifest["containers"]}
    patient = pages["PatientOverviewPage"]
    visual = [(c["id"], c["subtype"]) for c in patient["components"] if c["subtype"] and c["subtype"] != "Table"]
    assert visual == [
        ("PatientAppointmentScatter", "InteractiveScatterPlot"),
        ("GenderChart", "InteractivePieChart"),
        ("AgeBarChart", "InteractiveBarChart"),
    ]
    ids = [c["id"] for c in patient["components"]]
    assert "PatientTable" in ids and "TimeRangeFilter" in ids and "InstitutionPageNavigationButton" in ids
    nav = [c for c in patient["components"] if c["id"] == "InstitutionPageNavigationButton"][0]
    assert nav["navigatesTo"] == "InstitutionOverviewPage"


def test_empty_model_manifest():
    assert json.loads(gen_dashboard_manifest(m.SpecificationModel())) == {"version": 1, "containers": []}


# ---------------------------------------------------------------------------
# Requirements document
# ---------------------------------------------------------------------------


def test_doc_contains_classification_rows(medbuddy):
    doc = gen_requirements_doc(medbuddy)
    assert "AppointmentRequest — Transaction / Fact" in doc
    assert "Patient — Master / Dimension" in doc
    assert "`COUNT(state = States.Cancelled)`" in doc


def test_doc_with_only_actors_has_only_actor_section():
    model = m.SpecificationModel(actors=(m.Actor(id="A", actor_type="User", description="does things"),))
    doc = gen_requirements_doc(model)
    assert "## Actors & Use Cases" in doc
    assert "## Data Model" not in doc
    assert "## User Interface" not in doc


def test_generators_are_deterministic(medbuddy):
    assert gen_requirements_doc(medbuddy) == gen_requirements_doc(medbuddy)
    assert gen_schema_sql(medbuddy) == gen_schema_sql(medbuddy)
    assert gen_dashboard_manifest(medbuddy) == gen_dashboard_manifest(medbuddy)
