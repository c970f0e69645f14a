from bispec import canonicalize, model as m, parse_cnlbi
from bispec.cnlbi import emit_cnlbi


def errors(diags):
    return [d for d in diags if d.is_error]


def test_spec_style_institution_entity():
    source = """
DataEntity Institution is a Master Dimension with attributes
  id is a UUID (PrimaryKey),
  code is a String (NotNull),
  name is a String (NotNull),
  latitude is an Integer (NotNull),
  longitude is an Integer (NotNull),
  location is a String (NotNull),
  type is a String (NotNull)
described as this dimension represents the details of an institution.
"""
    model, diags = parse_cnlbi(source)
    assert not errors(diags)
    entity = model.entity("Institution")
    assert entity.entity_type == "Master"
    assert entity.sub_type == "Dimension"
    assert len(entity.attributes) == 7
    assert entity.description == "this dimension represents the details of an institution"
    assert entity.primary_key.id == "id"


def test_fact_entity_shape(medbuddy):
    fact = medbuddy.entity("AppointmentRequest")
    assert fact.entity_type == "Transaction"  # "Transactional" normalizes
    assert fact.is_fact
    assert [a.id for a in fact.dimension_refs] == [
        "institution", "patient", "state", "scheduled_date", "closed_date",
    ]
    assert len(fact.measures) == 6
    plain = [a for a in fact.attributes if not a.is_measure and a.attr_type.kind != "dimension" and not a.is_primary_key]
    assert [a.id for a in plain] == ["maximum_response_time", "actual_response_time", "closed"]

    rate = fact.attribute("CancellationRate").measure
    assert isinstance(rate, m.Arithmetic) and rate.op == "/"
    assert rate.left == m.MeasureRef("CountCancelledAppointments")
    assert rate.right == m.MeasureRef("CountAppointments")

    cancelled = fact.attribute("CountCancelledAppointments").measure
    assert cancelled == m.Aggregate(
        "COUNT", m.Predicate(m.AttributePath(("state",)), m.EnumLiteral("States", "Cancelled"))
    )


def test_national_level_use_case(medbuddy):
    uc = medbuddy.use_case("AnalysisAppointmentsInstitutionOnNationalLevel")
    assert uc.uc_type == "BIAnalysis"
    assert uc.primary_actor == "NationalLevelDataAnalyst"
    assert uc.data_source == "AppointmentRequest"
    kinds = [op.kind for op in uc.operations]
    assert kinds == ["Slice", "Dice", "RollUp", "DrillDown"]
    dice = uc.operations[1]
    assert len(dice.where_clauses) == 2
    slice_op = uc.operations[0]
    assert len(slice_op.where_clauses) == 1
    # the spec's parameterized predicate: free right-hand path
    assert isinstance(slice_op.where_clauses[0].right, m.AttributePath)
    assert str(slice_op.where_clauses[0].right) == "Time.year"


def test_both_operation_declaration_orders_accepted():
    source = """
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source F,
  performs
    Slice ByYear "By year" is an OLAP operation
      where F.year = 2023,
    OLAP Operation ByCity is a Roll-up
      group by F.city.
"""
    model, diags = parse_cnlbi(source)
    assert not errors(diags)
    ops = model.use_cases[0].operations
    assert [(o.kind, o.id) for o in ops] == [("Slice", "ByYear"), ("RollUp", "ByCity")]
    assert ops[0].name == "By year"


def test_missing_attribute_list_reports_cnl010():
    model, diags = parse_cnlbi("DataEntity X is a Master Dimension with attributes")
    codes = [d.code for d in errors(diags)]
    assert codes == ["CNL010"]
    assert model.entities == ()


def test_unknown_type_keyword_reports_cnl011():
    _, diags = parse_cnlbi("DataEntity X is a Masterr Dimension with attributes a is a UUID (PrimaryKey).")
    assert [d.code for d in errors(diags)] == ["CNL011"]


def test_malformed_constraint_list_reports_cnl012():
    _, diags = parse_cnlbi("DataEntity X is a Master with attributes a is a UUID (Wibble).")
    assert "CNL012" in [d.code for d in errors(diags)]


def test_malformed_measure_reports_cnl013():
    source = "DataEntity X is a Master with attributes a is a Integer (operation COUNT(().\n"
    _, diags = parse_cnlbi(source)
    assert "CNL013" in [d.code for d in diags]


def test_malformed_where_clause_reports_cnl014():
    source = """
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source F,
  performs
    OLAP Operation Bad is a Slice
      where = 2023.
"""
    _, diags = parse_cnlbi(source)
    assert "CNL014" in [d.code for d in errors(diags)]


def test_error_recovery_keeps_other_declarations():
    source = """
Data enumeration Gender with values Male and Female.
DataEntity Broken is a Wibble Dimension with attributes x is a UUID (PrimaryKey).
Actor Analyst is a User.
"""
    model, diags = parse_cnlbi(source)
    assert errors(diags)
    # one malformed declaration among three still yields the other two
    assert [e.id for e in model.enumerations] == ["Gender"]
    assert [a.id for a in model.actors] == ["Analyst"]


def test_diagnostic_spans_contain_offending_text():
    source = "DataEntity X is a Masterr Dimension with attributes a is a UUID (PrimaryKey)."
    _, diags = parse_cnlbi(source)
    diag = errors(diags)[0]
    assert diag.span is not None
    assert "Masterr" in diag.span.slice(source)


def test_emit_institution_starts_with_expected_header(medbuddy):
    single = m.SpecificationModel(entities=(medbuddy.entity("Institution"),))
    text, warnings = emit_cnlbi(single)
    assert text.startswith("DataEntity Institution is a Master Dimension with attributes")
    assert not warnings


def test_emit_empty_model_is_empty():
    text, warnings = emit_cnlbi(m.SpecificationModel())
    assert text == ""
    assert warnings == []


def test_corpus_round_trip(medbuddy):
    text, _ = emit_cnlbi(medbuddy)
    reparsed, diags = parse_cnlbi(text, "round-trip")
    assert not errors(diags)
    assert canonicalize(reparsed) == canonicalize(medbuddy)


def test_emit_is_stable_under_reemission(medbuddy):
    once, _ = emit_cnlbi(medbuddy)
    model_again, _ = parse_cnlbi(once)
    twice, _ = emit_cnlbi(model_again)
    assert once == twice


def test_unrepresentable_constructs_become_comments(medbuddy_asl):
    text, warnings = emit_cnlbi(medbuddy_asl)
    assert any(w.code == "CNL030" for w in warnings)
    assert "// not representable in CNL-BI" in text
    # and the comments do not break reparsing
    _, diags = parse_cnlbi(text)
    assert not errors(diags)


def test_terminating_period_is_optional():
    with_period, _ = parse_cnlbi("Actor A is a User.")
    without, _ = parse_cnlbi("Actor A is a User")
    assert canonicalize(with_period) == canonicalize(without)


def test_articles_are_interchangeable():
    a_form, _ = parse_cnlbi("DataEntity E is a Master with attributes x is a UUID (PrimaryKey).")
    an_form, _ = parse_cnlbi("DataEntity E is an Master with attributes x is an UUID (PrimaryKey).")
    assert canonicalize(a_form) == canonicalize(an_form)


def test_filter_form_extras_parse_into_option_parts(medbuddy):
    page = medbuddy.container("InstitutionOverviewPage")
    time_filter = page.component("TimeRangeFilter")
    assert [(p.part_kind, str(p.binding)) for p in time_filter.parts] == [
        ("Option", "AppointmentRequest.MinDate"),
        ("Option", "AppointmentRequest.MaxDate"),
    ]
