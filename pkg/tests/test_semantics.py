from bispec import model as m, parse_cnlbi
from bispec.semantics import (
    check_dimensional,
    check_measures,
    check_model,
    check_ui,
    check_use_cases,
    schema_shape,
)


def codes(diags, severity=None):
    return [d.code for d in diags if severity is None or d.severity.value == severity]


def parse_ok(source):
    model, diags = parse_cnlbi(source)
    assert not any(d.is_error for d in diags), [f"{d.code}: {d.message}" for d in diags]
    return model


def test_medbuddy_is_clean_and_snowflake(medbuddy):
    report = check_model(medbuddy)
    assert not any(d.is_error for d in report.diagnostics)
    assert report.schema_shape == "snowflake"
    assert report.resolved_model is medbuddy


def test_star_shape_without_dimension_chains():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  d refers to Dimension D (NotNull).
"""
    )
    assert schema_shape(model) == "star"


def test_dimension_ref_to_fact_is_sem001():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  other refers to Dimension F2 (NotNull).
DataEntity F2 is a Transaction Fact with attributes
  id is a UUID (PrimaryKey).
"""
    )
    assert "SEM001" in codes(check_dimensional(model))


def test_two_primary_keys_is_sem003():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey),
  id2 is a UUID (PrimaryKey).
"""
    )
    assert "SEM003" in codes(check_dimensional(model))


def test_fact_without_dimensions_warns_sem002():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey).
"""
    )
    diags = check_dimensional(model)
    assert "SEM002" in codes(diags, "warning")
    assert not any(d.is_error for d in diags)


def test_cluster_member_checks():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  d refers to Dimension D (NotNull).
"""
    )
    bad_main = m.DataEntityCluster(id="C", entity_type="Transaction", main="D", uses=("D",))
    bad_uses = m.DataEntityCluster(id="C2", entity_type="Transaction", main="F", uses=("F",))
    import dataclasses

    extended = dataclasses.replace(model, clusters=(bad_main, bad_uses))
    found = codes(check_dimensional(extended))
    assert "SEM004" in found and "SEM005" in found


def test_measure_types_infer_cleanly(medbuddy):
    assert check_measures(medbuddy) == []


def test_measure_cycle_is_sem010():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  A is a Integer (operation (B + 1)),
  B is a Integer (operation (A + 1)).
"""
    )
    assert "SEM010" in codes(check_measures(model))


def test_declared_type_mismatch_is_sem011():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  Count is a Date (operation COUNT(id)).
"""
    )
    assert "SEM011" in codes(check_measures(model))


def test_count_widens_into_decimal_without_error():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  Count is a Decimal (operation COUNT(id)).
"""
    )
    assert check_measures(model) == []


def test_min_over_dimension_ref_resolves_date_role(medbuddy):
    # MinDate = MIN(scheduled_date) lands on Time.date and stays a Date
    assert check_measures(medbuddy) == []


def test_ambiguous_dimension_aggregation_is_sem012():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey),
  opened is a Date (NotNull),
  closed is a Date (NotNull).
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  d refers to Dimension D (NotNull),
  First is a Date (operation MIN(d)).
"""
    )
    assert "SEM012" in codes(check_measures(model))


def use_case_model(extra_ops="", description="analyses everything"):
    return parse_ok(
        f"""
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey),
  year is an Integer (NotNull).
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  d refers to Dimension D (NotNull),
  Count is an Integer (operation COUNT(id)).
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source F,
  performs
    OLAP Operation Op is a Slice
      where F.d.year = D.year{extra_ops},
  described as {description}.
"""
    )


def test_clean_use_case_passes():
    assert not any(d.is_error for d in check_use_cases(use_case_model()))


def test_unknown_actor_is_sem020():
    model = use_case_model()
    import dataclasses

    broken = dataclasses.replace(
        model, use_cases=tuple(dataclasses.replace(u, primary_actor="Ghost") for u in model.use_cases)
    )
    assert "SEM020" in codes(check_use_cases(broken))


def test_non_fact_data_source_is_sem021():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source D,
  performs
    OLAP Operation Op is a Slice
      where D.id = 1.
"""
    )
    assert "SEM021" in codes(check_use_cases(model))


def test_unknown_path_is_sem022():
    model = use_case_model(extra_ops=",\n    OLAP Operation Bad is a Roll-up\n      group by D.bogus")
    assert "SEM022" in codes(check_use_cases(model))


def test_slice_with_two_predicates_is_sem023():
    model = use_case_model(extra_ops=" and F.id = 1")
    assert "SEM023" in codes(check_use_cases(model))


def test_dice_with_one_predicate_is_sem023():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  Count is an Integer (operation COUNT(id)).
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source F,
  performs
    OLAP Operation Op is a Dice
      where F.id = 1.
"""
    )
    assert "SEM023" in codes(check_use_cases(model))


def test_pivot_swap_must_name_reachable_dimensions():
    model = parse_ok(
        """
DataEntity D is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
DataEntity Away is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  d refers to Dimension D (NotNull),
  Count is an Integer (operation COUNT(id)).
Actor A is a User.
UseCase U is a BIAnalysis
  actor A,
  data source F,
  performs
    OLAP Operation P is a Pivot
      swap D with Away.
"""
    )
    assert "SEM024" in codes(check_use_cases(model))


def test_restriction_note_sem040(medbuddy):
    diags = check_use_cases(medbuddy)
    noted = [d for d in diags if d.code == "SEM040"]
    assert {d.span.line for d in noted if d.span}  # informational, with spans
    assert all(d.severity.value == "warning" for d in noted)


def test_underspecified_operations_warn_sem041(medbuddy_asl):
    diags = check_use_cases(medbuddy_asl)
    assert "SEM041" in codes(diags, "warning")
    assert not any(d.is_error for d in diags)


def ui_model(component_body):
    return parse_ok(
        f"""
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey),
  value is an Integer (NotNull).
UIContainer Page is a Main Window
that contains
{component_body}
"""
    )


def test_clean_ui_passes(medbuddy):
    assert not any(d.is_error for d in check_ui(medbuddy))


def test_unknown_binding_is_sem030():
    model = ui_model("UIComponent C is a Table\n  data binding to Ghost,\n  with columns F.id.")
    assert "SEM030" in codes(check_ui(model))


def test_unreachable_part_binding_is_sem031():
    model = parse_ok(
        """
DataEntity F is a Transaction Fact with attributes
  id is a UUID (PrimaryKey).
DataEntity Island is a Reference Dimension with attributes
  id is a UUID (PrimaryKey).
UIContainer Page is a Main Window
that contains
UIComponent C is a Table
  data binding to F,
  with columns Island.id.
"""
    )
    assert "SEM031" in codes(check_ui(model))


def test_pie_chart_missing_value_part_is_sem032():
    model = ui_model(
        "UIComponent C is an InteractivePieChart\n  data binding to F,\n  with label F.id."
    )
    assert "SEM032" in codes(check_ui(model))


def test_unknown_action_is_sem033():
    model = ui_model(
        "UIComponent C is an InteractiveBarChart\n  data binding to F,\n"
        "  with x-axis F.id,\n  y-axis F.value,\n  actions Explode."
    )
    assert "SEM033" in codes(check_ui(model))


def test_registered_action_extension_passes_sem033():
    import dataclasses

    model = ui_model(
        "UIComponent C is an InteractiveBarChart\n  data binding to F,\n"
        "  with x-axis F.id,\n  y-axis F.value,\n  actions Explode."
    )
    extended = dataclasses.replace(
        model, vocabulary_extensions=(m.VocabularyExtension("ActionType", "Explode"),)
    )
    assert "SEM033" not in codes(check_ui(extended))


def test_unknown_navigation_target_is_sem034():
    model = ui_model("UIComponent C is a Detail\n  that navigates to Nowhere.")
    assert "SEM034" in codes(check_ui(model))


def test_duplicate_entities_are_sem050():
    source = """
DataEntity X is a Master Dimension with attributes
  id is a UUID (PrimaryKey).
DataEntity X is a Master Dimension with attributes
  id is a UUID (PrimaryKey).
"""
    model, _ = parse_cnlbi(source)
    report = check_model(model)
    assert "SEM050" in codes(list(report.diagnostics))
    assert report.resolved_model is None


def test_diagnostics_are_stably_ordered(medbuddy_asl):
    first = check_model(medbuddy_asl).diagnostics
    second = check_model(medbuddy_asl).diagnostics
    assert first == second
    positions = [(d.span.file, d.span.line, d.span.col, d.code) for d in first if d.span]
    assert positions == sorted(positions)
