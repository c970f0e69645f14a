"""Desk-scale OLAP execution over CSV-loaded fact and dimension data.

A data package is a directory holding a plain-text manifest mapping entity
ids to CSV files. Loading enforces headers, declared types, and referential
integrity; queries are read-only over the immutable cube. Decimal arithmetic
is 64-bit float, evaluated left to right, and aggregation iterates rows in
file order so results are reproducible.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import date, datetime, time
from pathlib import Path

from . import model as m
from .diagnostics import Diagnostic, error, warning

# Measure results are plain values: int, float, date, or None. Null arises
# only from empty AVERAGE/MIN/MAX groups and division by zero.
MeasureValue = object


class EngineError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


_MANIFEST_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*\"([^\"]+)\"\s*$")


def parse_manifest(path: Path) -> dict[str, str]:
    """Read ``entity_id = "file.csv"`` lines; ``#`` starts a comment."""
    mapping: dict[str, str] = {}
    for raw_line in path.read_text(encoding="utf-8").splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        match = _MANIFEST_LINE.match(line)
        if match is None:
            raise EngineError("ENG001", f"unreadable manifest line: {raw_line.strip()!r}")
        mapping[match.group(1)] = match.group(2)
    return mapping


@dataclass
class Table:
    entity_id: str
    columns: tuple[str, ...]
    rows: list[dict]
    by_pk: dict = field(default_factory=dict)


@dataclass
class Cube:
    """Loaded tables for every entity, keyed joins derived from the model."""

    model: m.SpecificationModel
    tables: dict[str, Table]

    def table(self, entity_id: str) -> Table:
        return self.tables[entity_id]

    def view(self, fact_id: str) -> "CubeView":
        return CubeView(self, fact_id, ())


def _coerce(value: str, attr: m.DataAttribute, enum: m.DataEnumeration | None):
    kind = attr.attr_type.kind
    if kind == "dimension":
        return value
    if kind == "enum":
        if enum is not None and value not in enum.values:
            raise ValueError(f"{value!r} is not a value of enumeration {attr.attr_type.name}")
        return value
    name = attr.attr_type.name
    if name in ("UUID", "String"):
        return value
    if name == "Integer":
        return int(value)
    if name == "Decimal":
        return float(value)
    if name == "Boolean":
        lowered = value.lower()
        if lowered in ("true", "1"):
            return True
        if lowered in ("false", "0"):
            return False
        raise ValueError(f"{value!r} is not a boolean")
    if name == "Date":
        return date.fromisoformat(value)
    if name == "DateTime":
        return datetime.fromisoformat(value)
    if name == "Time":
        return time.fromisoformat(value)
    raise ValueError(f"unsupported type {name}")


def load_cube(model: m.SpecificationModel, data_dir: str | Path) -> tuple[Cube, list[Diagnostic]]:
    """Load a data package; the model must already have passed checks clean."""
    data_dir = Path(data_dir)
    diags: list[Diagnostic] = []
    manifest_path = data_dir / "manifest.toml"
    if not manifest_path.exists():
        diags.append(error("ENG001", f"missing manifest: {manifest_path}"))
        return Cube(model, {}), diags
    try:
        manifest = parse_manifest(manifest_path)
    except EngineError as exc:
        diags.append(error(exc.code, str(exc)))
        return Cube(model, {}), diags

    for key in sorted(manifest):
        if model.entity(key) is None:
            diags.append(warning("ENG001", f"manifest entry {key!r} matches no entity; ignored"))

    tables: dict[str, Table] = {}
    for entity in model.entities:
        filename = manifest.get(entity.id)
        if filename is None or not (data_dir / filename).exists():
            diags.append(error("ENG001", f"no data file for entity {entity.id}"))
            continue
        table = _load_table(entity, model, data_dir / filename, diags)
        if table is not None:
            tables[entity.id] = table

    cube = Cube(model, tables)
    _check_references(cube, diags)
    return cube, diags


def _load_table(entity: m.DataEntity, model: m.SpecificationModel, path: Path, diags: list[Diagnostic]) -> Table | None:
    stored = [a for a in entity.attributes if not a.is_measure]
    expected = tuple(a.id for a in stored)
    enums = {a.id: model.enumeration(a.attr_type.name) for a in stored if a.attr_type.kind == "enum"}

    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = tuple(next(reader))
        except StopIteration:
            diags.append(error("ENG002", f"{path.name}: empty file, expected header {', '.join(expected)}"))
            return None
        if header != expected:
            diags.append(
                error(
                    "ENG002",
                    f"{path.name}: header mismatch; expected ({', '.join(expected)}) got ({', '.join(header)})",
                )
            )
            return None

        rows: list[dict] = []
        for line_no, record in enumerate(reader, start=1):
            if len(record) != len(stored):
                diags.append(error("ENG003", f"{path.name} row {line_no}: expected {len(stored)} fields"))
                continue
            row: dict = {}
            bad = False
            for attr, raw in zip(stored, record):
                if raw == "":
                    if attr.not_null:
                        diags.append(
                            error("ENG003", f"{path.name} row {line_no}, column {attr.id}: null in NOT NULL column")
                        )
                        bad = True
                    row[attr.id] = None
                    continue
                try:
                    row[attr.id] = _coerce(raw, attr, enums.get(attr.id))
                except ValueError as exc:
                    diags.append(error("ENG003", f"{path.name} row {line_no}, column {attr.id}: {exc}"))
                    bad = True
            if not bad:
                rows.append(row)

    table = Table(entity.id, expected, rows)
    pk = entity.primary_key
    if pk is not None:
        for line_no, row in enumerate(table.rows, start=1):
            key = row.get(pk.id)
            if key in table.by_pk:
                diags.append(error("ENG003", f"{path.name} row {line_no}, column {pk.id}: duplicate primary key {key!r}"))
            else:
                table.by_pk[key] = row
    return table


def _check_references(cube: Cube, diags: list[Diagnostic]) -> None:
    for entity in cube.model.entities:
        table = cube.tables.get(entity.id)
        if table is None:
            continue
        for attr in entity.dimension_refs:
            target = cube.tables.get(attr.dimension_target)
            if target is None:
                continue
            for line_no, row in enumerate(table.rows, start=1):
                key = row.get(attr.id)
                if key is not None and key not in target.by_pk:
                    diags.append(
                        error(
                            "ENG004",
                            f"{entity.id} row {line_no}, column {attr.id}: no {attr.dimension_target} row with key {key!r}",
                        )
                    )


# ---------------------------------------------------------------------------
# Path access
# ---------------------------------------------------------------------------


def _chain_to(model: m.SpecificationModel, fact: m.DataEntity, entity_id: str) -> list[tuple[str, str]] | None:
    """Shortest hop chain (fk attribute, target entity) from the fact to an entity.

    Breadth-first in declaration order, so ties resolve deterministically.
    """
    if fact.id == entity_id:
        return []
    queue: list[tuple[m.DataEntity, list[tuple[str, str]]]] = [(fact, [])]
    visited = {fact.id}
    while queue:
        current, chain = queue.pop(0)
        for attr in current.dimension_refs:
            target_id = attr.dimension_target
            if target_id in visited:
                continue
            extended = chain + [(attr.id, target_id)]
            if target_id == entity_id:
                return extended
            visited.add(target_id)
            target = model.entity(target_id)
            if target is not None:
                queue.append((target, extended))
    return None


@dataclass(frozen=True)
class Accessor:
    chain: tuple[tuple[str, str], ...]
    attribute: str
    entity: str  # entity owning the final attribute

    def __call__(self, row: dict, cube: Cube):
        current = row
        for fk_attr, target in self.chain:
            key = current.get(fk_attr)
            if key is None:
                return None
            current = cube.table(target).by_pk[key]
        return current.get(self.attribute)


def compile_accessor(model: m.SpecificationModel, fact_id: str, path: m.AttributePath) -> Accessor:
    fact = model.entity(fact_id)
    segs = path.segments

    if len(segs) == 1:
        if fact.attribute(segs[0]) is None:
            raise EngineError("ENG030", f"{fact_id} has no attribute {segs[0]!r}")
        return Accessor((), segs[0], fact_id)

    head_entity = model.entity(segs[0])
    if head_entity is None:
        attr = fact.attribute(segs[0])
        if attr is None or attr.dimension_target is None or len(segs) != 2:
            raise EngineError("ENG030", f"cannot resolve path {path} from {fact_id}")
        return Accessor(((attr.id, attr.dimension_target),), segs[1], attr.dimension_target)

    chain = _chain_to(model, fact, head_entity.id)
    if chain is None:
        raise EngineError("ENG030", f"{head_entity.id} is not reachable from {fact_id}")
    if len(segs) == 2:
        return Accessor(tuple(chain), segs[1], head_entity.id)

    mid = head_entity.attribute(segs[1])
    if mid is None or mid.dimension_target is None:
        raise EngineError("ENG030", f"{segs[0]}.{segs[1]} is not a dimension hop")
    chain = chain + [(mid.id, mid.dimension_target)]
    return Accessor(tuple(chain), segs[2], mid.dimension_target)


def _resolve_fact(model: m.SpecificationModel, source_id: str) -> str:
    source = model.data_source(source_id)
    if source is None:
        raise EngineError("ENG030", f"unknown entity or cluster {source_id!r}")
    if isinstance(source, m.DataEntityCluster):
        return source.main
    return source.id


# ---------------------------------------------------------------------------
# Views and predicates
# ---------------------------------------------------------------------------


def _param_name(path: m.AttributePath) -> str:
    return path.segments[-1]


def _coerce_binding(value, attr: m.DataAttribute):
    if not isinstance(value, str):
        return value
    kind = attr.attr_type.name if attr.attr_type.kind == "primitive" else None
    if kind == "Integer":
        return int(value)
    if kind == "Decimal":
        return float(value)
    if kind == "Boolean":
        return value.lower() in ("true", "1")
    if kind == "Date":
        return date.fromisoformat(value)
    return value


def _compile_predicate(model: m.SpecificationModel, fact_id: str, pred: m.Predicate, bindings: dict | None):
    bindings = bindings or {}
    accessor = compile_accessor(model, fact_id, pred.left)
    left_entity = model.entity(accessor.entity)
    left_attr = left_entity.attribute(accessor.attribute)

    right = pred.right
    if isinstance(right, m.EnumLiteral):
        target_value = right.value
        if left_attr.attr_type.kind == "dimension":
            # Compare through the referenced dimension's enum-typed attribute.
            dimension = model.entity(left_attr.attr_type.name)
            role = None
            if dimension is not None:
                matches = [
                    a for a in dimension.attributes
                    if a.attr_type.kind == "enum" and a.attr_type.name == right.enum
                ]
                role = matches[0] if len(matches) == 1 else None
            if role is None:
                raise EngineError("ENG030", f"cannot compare {pred.left} against {right}")
            accessor = Accessor(accessor.chain + ((left_attr.id, left_attr.attr_type.name),), role.id, dimension.id)
    elif isinstance(right, m.Literal):
        target_value = right.value
    else:  # free parameter path
        name = _param_name(right)
        if name in bindings:
            target_value = bindings[name]
        elif str(right) in bindings:
            target_value = bindings[str(right)]
        else:
            raise EngineError("ENG010", f"unbound parameter {name!r} (for {right}); supply --bind {name}=<value>")
        target_value = _coerce_binding(target_value, left_attr)

    def check(row: dict, cube: Cube) -> bool:
        return accessor(row, cube) == target_value

    return check


@dataclass(frozen=True)
class CubeView:
    """Read-only slice of a cube: the fact rows satisfying a conjunction."""

    cube: Cube
    fact_id: str
    filters: tuple = ()

    def rows(self) -> list[dict]:
        table = self.cube.tables.get(self.fact_id)
        if table is None:
            raise EngineError("ENG030", f"no data loaded for {self.fact_id}")
        out = table.rows
        for check in self.filters:
            out = [row for row in out if check(row, self.cube)]
        return out

    def row_count(self) -> int:
        return len(self.rows())


def slice_view(view: CubeView, predicate: m.Predicate, bindings: dict | None = None) -> CubeView:
    check = _compile_predicate(view.cube.model, view.fact_id, predicate, bindings)
    return CubeView(view.cube, view.fact_id, view.filters + (check,))


def dice_view(view: CubeView, predicates, bindings: dict | None = None) -> CubeView:
    for predicate in predicates:
        view = slice_view(view, predicate, bindings)
    return view


# ---------------------------------------------------------------------------
# Measure evaluation
# ---------------------------------------------------------------------------


def evaluate_measure(view: CubeView, expr, rows: list[dict] | None = None, _stack: tuple = ()):
    """Evaluate a measure over a row subset (defaults to the whole view)."""
    if rows is None:
        rows = view.rows()
    model = view.cube.model
    fact_id = view.fact_id

    if isinstance(expr, m.Literal):
        return expr.value

    if isinstance(expr, m.MeasureRef):
        if expr.attribute in _stack:
            raise EngineError("ENG030", f"measure reference cycle at {expr.attribute}")
        target = model.entity(fact_id).attribute(expr.attribute)
        if target is None or target.measure is None:
            raise EngineError("ENG030", f"unknown measure {expr.attribute!r}")
        return evaluate_measure(view, target.measure, rows, _stack + (expr.attribute,))

    if isinstance(expr, m.Arithmetic):
        left = evaluate_measure(view, expr.left, rows, _stack)
        right = evaluate_measure(view, expr.right, rows, _stack)
        if left is None or right is None:
            return None
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0:
            return None
        return left / right

    if isinstance(expr, m.Aggregate):
        if isinstance(expr.arg, m.Predicate):
            check = _compile_predicate(model, fact_id, expr.arg, None)
            return sum(1 for row in rows if check(row, view.cube))
        accessor = _aggregate_accessor(model, fact_id, expr.arg)
        values = [v for v in (accessor(row, view.cube) for row in rows) if v is not None]
        if expr.fn == "COUNT":
            return len(values)
        if expr.fn == "SUM":
            total = 0
            for v in values:
                total += v
            return total
        if not values:
            return None
        if expr.fn == "AVERAGE":
            total = 0.0
            for v in values:
                total += v
            return total / len(values)
        return min(values) if expr.fn == "MIN" else max(values)

    if isinstance(expr, m.OpaqueMeasure):
        raise EngineError("ENG030", f"opaque measure {expr.text!r} cannot be evaluated")
    raise EngineError("ENG030", f"unsupported measure node {expr!r}")


def _aggregate_accessor(model: m.SpecificationModel, fact_id: str, path: m.AttributePath) -> Accessor:
    accessor = compile_accessor(model, fact_id, path)
    entity = model.entity(accessor.entity)
    attr = entity.attribute(accessor.attribute)
    if attr.attr_type.kind == "dimension":
        # Aggregating a dimension reference lands on the dimension's single
        # Date-typed attribute (MIN(scheduled_date) -> Time.date).
        dimension = model.entity(attr.attr_type.name)
        dates = [
            a for a in dimension.attributes
            if a.attr_type.kind == "primitive" and a.attr_type.name in ("Date", "DateTime")
        ]
        if len(dates) != 1:
            raise EngineError("ENG030", f"aggregation over {path} is ambiguous in {dimension.id}")
        return Accessor(accessor.chain + ((attr.id, dimension.id),), dates[0].id, dimension.id)
    return accessor


# ---------------------------------------------------------------------------
# Grouping and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultTable:
    group_keys: tuple[str, ...]
    measure_names: tuple[str, ...]
    rows: tuple[tuple, ...]
    axis_order: tuple[str, str] | None = None

    @property
    def columns(self) -> tuple[str, ...]:
        return self.group_keys + self.measure_names


def _sort_token(value):
    if value is None:
        return (0, "")
    if isinstance(value, bool):
        return (1, str(int(value)))
    if isinstance(value, (int, float)):
        return (2, f"{float(value):024.9f}")
    if isinstance(value, (date, datetime, time)):
        return (3, value.isoformat())
    return (3, str(value))


def aggregate(view: CubeView, group_by, measures=None) -> ResultTable:
    """Group view rows by attribute paths and evaluate measures per group.

    Roll-up and drill-down are both this operation with a coarser or finer
    key list; the distinction is reporting metadata only.
    """
    model = view.cube.model
    fact = model.entity(view.fact_id)
    paths = [p if isinstance(p, m.AttributePath) else m.AttributePath.parse(p) for p in group_by]
    accessors = [compile_accessor(model, view.fact_id, p) for p in paths]

    if measures is None:
        measure_attrs = [a for a in fact.measures if not isinstance(a.measure, m.OpaqueMeasure)]
    else:
        measure_attrs = []
        for name in measures:
            attr = fact.attribute(name)
            if attr is None or attr.measure is None:
                raise EngineError("ENG030", f"unknown measure {name!r} on {fact.id}")
            measure_attrs.append(attr)

    groups: dict[tuple, list[dict]] = {}
    for row in view.rows():
        key = tuple(acc(row, view.cube) for acc in accessors)
        groups.setdefault(key, []).append(row)

    result_rows = []
    for key in sorted(groups, key=lambda k: tuple(_sort_token(v) for v in k)):
        rows = groups[key]
        cells = [evaluate_measure(view, attr.measure, rows) for attr in measure_attrs]
        result_rows.append(key + tuple(cells))

    key_names = tuple(str(p) for p in paths)
    axis = (key_names[0], key_names[1]) if len(key_names) == 2 else None
    return ResultTable(key_names, tuple(a.id for a in measure_attrs), tuple(result_rows), axis)


def pivot(result: ResultTable) -> ResultTable:
    """Swap the row and column axes of a two-dimensional result."""
    if len(result.group_keys) != 2:
        raise EngineError("ENG020", f"pivot requires exactly 2 group keys, found {len(result.group_keys)}")
    swapped_keys = (result.group_keys[1], result.group_keys[0])
    rows = [(row[1], row[0]) + row[2:] for row in result.rows]
    rows.sort(key=lambda r: (_sort_token(r[0]), _sort_token(r[1])))
    axis = (result.axis_order[1], result.axis_order[0]) if result.axis_order else swapped_keys
    return ResultTable(swapped_keys, result.measure_names, tuple(rows), axis)


# ---------------------------------------------------------------------------
# Use case dispatch
# ---------------------------------------------------------------------------


def _label_path(model: m.SpecificationModel, fact: m.DataEntity, dim_id: str) -> m.AttributePath:
    dim = model.entity(dim_id)
    label = next((a.id for a in dim.attributes if a.id == "name"), None)
    if label is None:
        label = dim.primary_key.id if dim.primary_key else dim.attributes[0].id
    fk = next((a for a in fact.dimension_refs if a.dimension_target == dim_id), None)
    if fk is None:
        raise EngineError("ENG030", f"{fact.id} has no dimension reference to {dim_id}")
    return m.AttributePath((fk.id, label))


def run_use_case(cube: Cube, use_case_id: str, op_id: str, bindings: dict | None = None) -> ResultTable:
    model = cube.model
    uc = model.use_case(use_case_id)
    if uc is None:
        raise EngineError("ENG030", f"unknown use case {use_case_id!r}")
    op = next((o for o in uc.operations if o.id == op_id), None)
    if op is None:
        raise EngineError("ENG030", f"use case {use_case_id} has no operation {op_id!r}")
    if op.is_underspecified:
        raise EngineError("ENG031", f"operation {op_id} is underspecified (decoded from bare action tags)")
    if uc.data_source is None:
        raise EngineError("ENG030", f"use case {use_case_id} has no data source")

    fact_id = _resolve_fact(model, uc.data_source)
    view = cube.view(fact_id)
    fact = model.entity(fact_id)

    if op.kind in ("Slice", "Dice"):
        filtered = dice_view(view, op.where_clauses, bindings)
        rows = filtered.rows()
        measure_attrs = [a for a in fact.measures if not isinstance(a.measure, m.OpaqueMeasure)]
        cells = tuple(evaluate_measure(filtered, attr.measure, rows) for attr in measure_attrs)
        return ResultTable((), ("row_count",) + tuple(a.id for a in measure_attrs), ((len(rows),) + cells,))

    if op.kind in ("RollUp", "DrillDown"):
        return aggregate(view, [op.group_by])

    first = _label_path(model, fact, op.swap[0])
    second = _label_path(model, fact, op.swap[1])
    return pivot(aggregate(view, [first, second]))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _cell_text(value, is_key: bool) -> str:
    if value is None:
        return "(null)" if is_key else ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (date, datetime, time)):
        return value.isoformat()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def result_to_csv(result: ResultTable) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.columns)
    key_count = len(result.group_keys)
    for row in result.rows:
        writer.writerow([_cell_text(v, i < key_count) for i, v in enumerate(row)])
    return buffer.getvalue()


def result_to_table(result: ResultTable) -> str:
    key_count = len(result.group_keys)
    rendered = [list(result.columns)]
    for row in result.rows:
        rendered.append([_cell_text(v, i < key_count) for i, v in enumerate(row)])
    widths = [max(len(r[i]) for r in rendered) for i in range(len(result.columns))]
    lines = []
    for idx, row in enumerate(rendered):
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"
