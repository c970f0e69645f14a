"""CNL-BI frontend: recursive-descent parser and canonical pretty-printer.

The style reads as constrained English sentences: fixed fragments such as
``is a`` and ``refers to Dimension`` interleave with identifiers. Parsing is
total; syntax problems become diagnostics and recovery resumes at the next
top-level keyword so later declarations still land in the model.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import measure as mx
from . import model as m
from .diagnostics import Diagnostic, Span, error, warning
from .lexer import Cursor, Token, TokenKind, tokenize

TOP_LEVEL_WORDS = ("DataEntity", "Data", "Actor", "UseCase", "UIContainer", "UIComponent")

_OP_INTRO_WORDS = ("OLAP", "Olap", "Slice", "Dice", "Roll-up", "Drill-down", "Pivot")

KEYWORDS = frozenset(
    TOP_LEVEL_WORDS
    + _OP_INTRO_WORDS
    + m.PRIMITIVE_TYPES
    + m.ENTITY_TYPES
    + ("Transactional", "Fact", "Dimension")
    + m.ACTOR_TYPES
    + m.CONSTRAINT_KINDS
    + m.AGGREGATE_FUNCTIONS
    + m.USE_CASE_TYPES
    + ("BI_Analysis",)
    + (
        "enumeration", "is", "a", "an", "with", "attributes", "values", "and",
        "described", "as", "refers", "to", "operation", "Operation", "where",
        "group", "by", "swap", "performs", "actor", "support", "stakeholder",
        "data", "source", "binding", "that", "contains", "navigates", "extends",
        "starting", "ending", "at", "columns", "latitude", "longitude", "value",
        "label", "legend", "location", "area", "segments", "defined",
        "x-axis", "y-axis", "actions", "default", "Main", "Modal", "Window",
        "Form", "Table", "List", "Detail", "Filter", "Card",
        "InteractiveChart",
    )
    + m.CHART_SUBTYPES
    + m.CONTAINER_SUBTYPES
)

# Single CNL-BI type word -> (component type, component subtype).
_COMPONENT_TERMS: dict[str, tuple[str, str | None]] = {
    "Form": ("Form", None),
    "Table": ("List", "Table"),
    "List": ("List", None),
    "Detail": ("Detail", None),
    "Filter": ("Filter", None),
    "Card": ("Card", None),
}
for _chart in m.CHART_SUBTYPES:
    _COMPONENT_TERMS[_chart] = ("InteractiveChart", _chart)

_PART_PHRASES = {
    "x-axis": "X_Axis",
    "y-axis": "Y_Axis",
    "label": "Label",
    "value": "Value",
    "values": "Value",
    "latitude": "Latitude",
    "longitude": "Longitude",
    "legend": "Legend",
    "location": "Location",
    "area": "Area",
}
_PHRASE_BY_KIND = {
    "X_Axis": "x-axis",
    "Y_Axis": "y-axis",
    "Label": "label",
    "Value": "value",
    "Latitude": "latitude",
    "Longitude": "longitude",
    "Legend": "legend",
    "Location": "location",
    "Area": "area",
}

# Words that start a new component clause; list parsing must not run past them.
_COMPONENT_CLAUSE_WORDS = frozenset(
    ("data", "with", "columns", "segments", "starting", "ending", "actions", "that", "described", "and")
    + tuple(_PART_PHRASES)
    + TOP_LEVEL_WORDS
)


class _ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


@dataclass
class _RawAttribute:
    id: str
    name: str | None
    attr_type: m.AttributeType
    constraints: list[m.Constraint]
    default: m.Literal | None
    raw_measure: object | None
    loc: Span


def parse_cnlbi(source: str, file: str = "<cnlbi>") -> tuple[m.SpecificationModel, list[Diagnostic]]:
    parser = _Parser(source, file)
    return parser.parse()


class _Parser:
    def __init__(self, source: str, file: str):
        tokens, lex_diags = tokenize(source, KEYWORDS, file=file, code_prefix="CNL")
        self.cur = Cursor(tokens)
        self.diags: list[Diagnostic] = list(lex_diags)

    # -- plumbing ----------------------------------------------------------

    def fail(self, code: str, message: str, span: Span | None = None) -> _ParseError:
        return _ParseError(error(code, message, span if span is not None else self.cur.peek().span))

    def recover(self) -> None:
        """Skip to the next top-level keyword so later declarations parse."""
        self.cur.next()
        while not self.cur.at_eof() and not self._at_top_level():
            self.cur.next()

    def _at_top_level(self) -> bool:
        tok = self.cur.peek()
        if tok.kind is not TokenKind.KEYWORD:
            return False
        if tok.text == "Data":
            return self.cur.peek(1).text == "enumeration"
        return tok.text in TOP_LEVEL_WORDS

    def ident(self, what: str) -> Token:
        tok = self.cur.peek()
        if tok.is_word() and m.is_identifier(tok.text):
            return self.cur.next()
        raise self.fail("CNL010", f"expected {what}, found {tok.text or 'end of input'!r}")

    def expect_word(self, *words: str) -> Token:
        tok = self.cur.eat_word(*words)
        if tok is None:
            found = self.cur.peek()
            raise self.fail("CNL010", f"expected {' or '.join(words)!r}, found {found.text or 'end of input'!r}")
        return tok

    def article(self) -> None:
        self.cur.eat_word("a", "an")

    def opt_name(self) -> str | None:
        # Either "name" or ("name"); both appear in the corpus.
        if self.cur.at_punct("(") and self.cur.peek(1).kind is TokenKind.STRING:
            self.cur.next()
            name = self.cur.next().value
            if self.cur.eat_punct(")") is None:
                raise self.fail("CNL010", "expected ')' after display name")
            return str(name)
        if self.cur.peek().kind is TokenKind.STRING:
            return str(self.cur.next().value)
        return None

    def prose(self, stop_next: tuple[str, ...]) -> str:
        """Free text running to a ',' or '.' that precedes a structural keyword."""
        hard_stop = TOP_LEVEL_WORDS + stop_next
        parts: list[str] = []
        while not self.cur.at_eof():
            tok = self.cur.peek()
            if tok.kind is TokenKind.PUNCT and tok.text in (",", "."):
                nxt = self.cur.peek(1)
                if nxt.kind is TokenKind.EOF or (nxt.kind is TokenKind.KEYWORD and nxt.text in hard_stop):
                    self.cur.next()
                    break
                parts.append(self.cur.next().text)
                continue
            if tok.kind is TokenKind.KEYWORD and tok.text in hard_stop and parts:
                break
            parts.append(self.cur.next().text)
        return _join_prose(parts)

    # -- top level ---------------------------------------------------------

    def parse(self) -> tuple[m.SpecificationModel, list[Diagnostic]]:
        enums: list[m.DataEnumeration] = []
        entities: list[m.DataEntity] = []
        actors: list[m.Actor] = []
        use_cases: list[m.UseCase] = []
        containers: list[m.UIContainer] = []

        while not self.cur.at_eof():
            tok = self.cur.peek()
            try:
                if tok.text == "DataEntity":
                    entities.append(self.entity())
                elif tok.text == "Data" and self.cur.peek(1).text == "enumeration":
                    enums.append(self.enumeration())
                elif tok.text == "Actor":
                    actors.append(self.actor())
                elif tok.text == "UseCase":
                    use_cases.append(self.use_case())
                elif tok.text == "UIContainer":
                    containers.append(self.container())
                elif tok.text == "UIComponent":
                    raise self.fail("CNL010", "UI components must appear inside a UIContainer", tok.span)
                else:
                    raise self.fail("CNL010", f"expected a declaration, found {tok.text!r}", tok.span)
            except _ParseError as exc:
                self.diags.append(exc.diag)
                self.recover()

        model = m.SpecificationModel(
            enumerations=tuple(enums),
            entities=tuple(entities),
            actors=tuple(actors),
            use_cases=tuple(use_cases),
            ui_containers=tuple(containers),
        )
        return mx.normalize_enum_literals(model), self.diags

    # -- declarations ------------------------------------------------------

    def enumeration(self) -> m.DataEnumeration:
        start = self.cur.next()  # Data
        self.expect_word("enumeration")
        ident = self.ident("an enumeration id")
        name = self.opt_name()
        self.expect_word("with")
        self.expect_word("values")
        values = [self.ident("an enumeration value").text]
        while True:
            if self.cur.eat_punct(","):
                self.cur.eat_word("and")
            elif not self.cur.eat_word("and"):
                break
            values.append(self.ident("an enumeration value").text)
        self.cur.eat_punct(".")
        try:
            return m.DataEnumeration(ident.text, name, tuple(values), start.span)
        except m.ModelError as exc:
            raise self.fail("CNL010", str(exc), ident.span)

    def entity(self) -> m.DataEntity:
        start = self.cur.next()  # DataEntity
        ident = self.ident("an entity id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        type_tok = self.cur.next()
        entity_type = m.ENTITY_TYPE_ALIASES.get(type_tok.text, type_tok.text)
        if entity_type not in m.ENTITY_TYPES:
            raise self.fail("CNL011", f"unknown entity type {type_tok.text!r}", type_tok.span)
        sub_type = None
        if self.cur.at_word("Fact", "Dimension", "BI_Fact", "BI_Dimension"):
            sub_type = m.ENTITY_SUBTYPE_ALIASES.get(self.cur.peek().text, self.cur.peek().text)
            self.cur.next()
        self.cur.eat_punct(",")
        self.expect_word("with")
        self.expect_word("attributes")

        raw_attrs = [self.attribute()]
        while self.cur.eat_punct(","):
            if self.cur.at_word("described") or self._at_top_level() or self.cur.at_eof():
                break
            raw_attrs.append(self.attribute())

        description = None
        if self.cur.eat_word("described"):
            self.expect_word("as")
            description = self.prose(())
        else:
            self.cur.eat_punct(".")

        attributes = self._finish_attributes(raw_attrs)
        try:
            return m.DataEntity(
                id=ident.text,
                entity_type=entity_type,
                attributes=attributes,
                name=name,
                sub_type=sub_type,
                description=description,
                loc=start.span,
            )
        except m.ModelError as exc:
            raise self.fail("CNL010", str(exc), ident.span)

    def attribute(self) -> _RawAttribute:
        ident = self.ident("an attribute id")
        name = self.opt_name()
        if self.cur.eat_word("refers"):
            self.expect_word("to")
            self.expect_word("Dimension")
            target = self.ident("a dimension entity id")
            attr_type = m.AttributeType.dimension(target.text)
        else:
            self.expect_word("is")
            self.article()
            type_tok = self.cur.next()
            if not type_tok.is_word() or not m.is_identifier(type_tok.text):
                raise self.fail("CNL011", f"unknown type keyword {type_tok.text!r}", type_tok.span)
            if type_tok.text in m.PRIMITIVE_TYPES:
                attr_type = m.AttributeType.primitive(type_tok.text)
            else:
                attr_type = m.AttributeType.enum(type_tok.text)

        constraints: list[m.Constraint] = []
        default: m.Literal | None = None
        raw_measure: object | None = None
        if self.cur.at_punct("("):
            constraints, default, raw_measure = self._paren_items()
        return _RawAttribute(ident.text, name, attr_type, constraints, default, raw_measure, ident.span)

    def _paren_items(self) -> tuple[list[m.Constraint], m.Literal | None, object | None]:
        self.cur.next()  # (
        constraints: list[m.Constraint] = []
        default: m.Literal | None = None
        raw_measure: object | None = None
        while not self.cur.at_punct(")"):
            if self.cur.at_eof():
                raise self.fail("CNL012", "unterminated constraint list")
            tok = self.cur.peek()
            if tok.text in m.CONSTRAINT_KINDS:
                self.cur.next()
                target = None
                if tok.text == "ForeignKey":
                    if self.cur.eat_punct("(") is None:
                        raise self.fail("CNL012", "ForeignKey requires a target entity in parentheses")
                    target = self.ident("a target entity id").text
                    if self.cur.eat_punct(")") is None:
                        raise self.fail("CNL012", "expected ')' after ForeignKey target")
                constraints.append(m.Constraint(tok.text, target))
            elif tok.text == "operation":
                self.cur.next()
                try:
                    raw_measure = mx.parse_expression(self.cur)
                except mx.ExprSyntaxError as exc:
                    self.diags.append(error("CNL013", f"malformed measure expression: {exc}", exc.span or tok.span))
                    self._skip_to_close_paren()
                    break
            elif tok.text == "default":
                self.cur.next()
                rhs = self.cur.next()
                if rhs.kind in (TokenKind.NUMBER, TokenKind.STRING):
                    default = m.Literal(rhs.value)
                elif rhs.text in ("True", "False", "true", "false"):
                    default = m.Literal(rhs.text.lower() == "true")
                else:
                    raise self.fail("CNL012", f"expected a default literal, found {rhs.text!r}", rhs.span)
            else:
                raise self.fail("CNL012", f"malformed constraint list near {tok.text!r}", tok.span)
            self.cur.eat_punct(",")
        self.cur.eat_punct(")")
        return constraints, default, raw_measure

    def _skip_to_close_paren(self) -> None:
        depth = 1
        while not self.cur.at_eof() and depth > 0:
            if self.cur.at_punct("("):
                depth += 1
            elif self.cur.at_punct(")"):
                depth -= 1
                if depth == 0:
                    return
            self.cur.next()

    def _finish_attributes(self, raw_attrs: list[_RawAttribute]) -> tuple[m.DataAttribute, ...]:
        measure_ids = {a.id for a in raw_attrs if a.raw_measure is not None}
        attributes: list[m.DataAttribute] = []
        for raw in raw_attrs:
            measure = None
            if raw.raw_measure is not None:
                try:
                    measure = mx.resolve_names(raw.raw_measure, measure_ids)
                except mx.ExprSyntaxError as exc:
                    self.diags.append(error("CNL013", f"malformed measure expression: {exc}", exc.span or raw.loc))
            try:
                attributes.append(
                    m.DataAttribute(
                        id=raw.id,
                        attr_type=raw.attr_type,
                        name=raw.name,
                        default_value=raw.default,
                        measure=measure,
                        constraints=frozenset(raw.constraints),
                        loc=raw.loc,
                    )
                )
            except m.ModelError as exc:
                self.diags.append(error("CNL012", str(exc), raw.loc))
        return tuple(attributes)

    def actor(self) -> m.Actor:
        start = self.cur.next()  # Actor
        ident = self.ident("an actor id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        type_tok = self.cur.next()
        if type_tok.text not in m.ACTOR_TYPES:
            raise self.fail("CNL011", f"unknown actor type {type_tok.text!r}", type_tok.span)

        stakeholder = is_a = description = None
        while True:
            self.cur.eat_punct(",")
            if self.cur.eat_word("extends"):
                is_a = self.ident("an actor id").text
            elif self.cur.at_word("with") and self.cur.peek(1).text == "stakeholder":
                self.cur.next()
                self.cur.next()
                stakeholder = self.ident("a stakeholder name").text
            elif self.cur.eat_word("described"):
                self.expect_word("as")
                description = self.prose(())
                break
            else:
                self.cur.eat_punct(".")
                break
        return m.Actor(ident.text, type_tok.text, name, stakeholder, is_a, description, start.span)

    def use_case(self) -> m.UseCase:
        start = self.cur.next()  # UseCase
        ident = self.ident("a use case id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        type_tok = self.cur.next()
        uc_type = m.USE_CASE_TYPE_ALIASES.get(type_tok.text, type_tok.text)
        if uc_type not in m.USE_CASE_TYPES:
            raise self.fail("CNL011", f"unknown use case type {type_tok.text!r}", type_tok.span)

        stakeholder = primary = data_source = description = None
        supporting: list[str] = []
        operations: list[m.OlapOperation] = []
        while True:
            self.cur.eat_punct(",")
            if self.cur.at_word("with") and self.cur.peek(1).text == "stakeholder":
                self.cur.next()
                self.cur.next()
                stakeholder = self.ident("a stakeholder name").text
            elif self.cur.at_word("support") and self.cur.peek(1).text == "actor":
                self.cur.next()
                self.cur.next()
                supporting.append(self.ident("an actor id").text)
            elif self.cur.eat_word("actor"):
                primary = self.ident("an actor id").text
            elif self.cur.at_word("data") and self.cur.peek(1).text == "source":
                self.cur.next()
                self.cur.next()
                data_source = self.ident("a data source id").text
            elif self.cur.eat_word("performs"):
                operations.extend(self._operations())
            elif self.cur.eat_word("described"):
                self.expect_word("as")
                description = self.prose(("performs",))
            else:
                self.cur.eat_punct(".")
                break

        if primary is None:
            raise self.fail("CNL010", f"use case {ident.text} declares no primary actor", ident.span)
        try:
            return m.UseCase(
                id=ident.text,
                uc_type=uc_type,
                primary_actor=primary,
                name=name,
                stakeholder=stakeholder,
                supporting_actors=tuple(supporting),
                data_source=data_source,
                operations=tuple(operations),
                description=description,
                loc=start.span,
            )
        except m.ModelError as exc:
            raise self.fail("CNL010", str(exc), ident.span)

    def _operations(self) -> list[m.OlapOperation]:
        operations = []
        while True:
            self.cur.eat_punct(",")
            if self.cur.at_word("OLAP", "Olap") and self.cur.peek(1).text in ("Operation", "operation"):
                operations.append(self._operation_prefix_form())
            elif self.cur.at_word("Slice", "Dice", "Roll-up", "Drill-down", "Pivot"):
                operations.append(self._operation_suffix_form())
            else:
                break
        return operations

    def _operation_prefix_form(self) -> m.OlapOperation:
        start = self.cur.next()  # OLAP
        self.cur.next()  # Operation
        ident = self.ident("an operation id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        kind_tok = self.cur.next()
        kind = m.OLAP_KIND_ALIASES.get(kind_tok.text, kind_tok.text)
        if kind not in m.OLAP_KINDS:
            raise self.fail("CNL011", f"unknown OLAP operation kind {kind_tok.text!r}", kind_tok.span)
        return self._operation_clauses(ident, name, kind, start.span)

    def _operation_suffix_form(self) -> m.OlapOperation:
        kind_tok = self.cur.next()
        kind = m.OLAP_KIND_ALIASES.get(kind_tok.text, kind_tok.text)
        ident = self.ident("an operation id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        self.expect_word("OLAP", "Olap")
        self.expect_word("operation", "Operation")
        return self._operation_clauses(ident, name, kind, kind_tok.span)

    def _operation_clauses(self, ident: Token, name: str | None, kind: str, loc: Span) -> m.OlapOperation:
        where: list[m.Predicate] = []
        group_by: m.AttributePath | None = None
        swap: tuple[str, str] | None = None
        description: str | None = None

        while True:
            self.cur.eat_punct(",")
            if self.cur.eat_word("where"):
                while True:
                    try:
                        where.append(mx.parse_predicate(self.cur))
                    except mx.ExprSyntaxError as exc:
                        raise _ParseError(error("CNL014", f"malformed where clause: {exc}", exc.span))
                    if not self.cur.eat_word("and"):
                        break
            elif self.cur.at_word("group") and self.cur.peek(1).text == "by":
                self.cur.next()
                self.cur.next()
                try:
                    group_by = mx.parse_path(self.cur)
                except mx.ExprSyntaxError as exc:
                    raise _ParseError(error("CNL014", f"malformed group-by clause: {exc}", exc.span))
            elif self.cur.eat_word("swap"):
                first = self.ident("a dimension id")
                self.expect_word("with")
                second = self.ident("a dimension id")
                swap = (first.text, second.text)
            elif self.cur.eat_word("described"):
                self.expect_word("as")
                description = self.prose(_OP_INTRO_WORDS + ("described", "performs"))
                break
            else:
                break

        try:
            return m.OlapOperation(
                id=ident.text,
                kind=kind,
                name=name,
                where_clauses=tuple(where),
                group_by=group_by,
                swap=swap,
                description=description,
                loc=loc,
            )
        except m.ModelError as exc:
            raise self.fail("CNL010", str(exc), ident.span)

    def container(self) -> m.UIContainer:
        start = self.cur.next()  # UIContainer
        ident = self.ident("a container id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        container_type = "MainWindow"
        container_subtype = None
        tok = self.cur.next()
        if tok.text in ("Main", "Modal"):
            self.expect_word("Window")
            container_type = "MainWindow" if tok.text == "Main" else "ModalWindow"
        elif tok.text == "Window":
            container_type = "MainWindow"
        elif tok.text in m.CONTAINER_SUBTYPES:
            container_subtype = tok.text
        else:
            raise self.fail("CNL011", f"unknown container type {tok.text!r}", tok.span)

        if self.cur.eat_word("that"):
            self.expect_word("contains")

        components: list[m.UIComponent] = []
        while True:
            self.cur.eat_punct(",")
            self.cur.eat_punct(".")
            if self.cur.at_word("UIComponent"):
                components.append(self.component())
            else:
                break

        return m.UIContainer(
            id=ident.text,
            container_type=container_type,
            name=name,
            container_subtype=container_subtype,
            components=tuple(components),
            loc=start.span,
        )

    def component(self) -> m.UIComponent:
        start = self.cur.next()  # UIComponent
        ident = self.ident("a component id")
        name = self.opt_name()
        self.expect_word("is")
        self.article()
        term = self.cur.next()
        if term.text not in _COMPONENT_TERMS:
            raise self.fail("CNL011", f"unknown component type {term.text!r}", term.span)
        comp_type, comp_subtype = _COMPONENT_TERMS[term.text]

        data_binding = navigates_to = description = None
        parts: list[m.UIPart] = []
        actions: set[str] = set()
        part_ids: set[str] = set()

        def add_part(kind: str, path: m.AttributePath) -> None:
            base = path.segments[-1]
            part_id = base
            if part_id in part_ids and len(path.segments) > 1:
                part_id = f"{path.segments[0]}_{base}"
            n = 2
            while part_id in part_ids:
                part_id = f"{base}_{n}"
                n += 1
            part_ids.add(part_id)
            parts.append(m.UIPart(part_id, kind, path, loc=path.loc))

        while True:
            self.cur.eat_punct(",")
            self.cur.eat_word("and")
            tok = self.cur.peek()
            if tok.text == "data" and self.cur.peek(1).text in ("binding", "source"):
                self.cur.next()
                self.cur.next()
                self.cur.eat_word("to")
                data_binding = self.ident("a data source id").text
            elif tok.text == "with":
                self.cur.next()
            elif tok.text == "columns":
                self.cur.next()
                add_part("Column", self._part_path())
                while (
                    self.cur.at_punct(",")
                    and self.cur.peek(1).is_word()
                    and self.cur.peek(1).text not in _COMPONENT_CLAUSE_WORDS
                ):
                    self.cur.next()
                    add_part("Column", self._part_path())
            elif tok.text in _PART_PHRASES:
                self.cur.next()
                add_part(_PART_PHRASES[tok.text], self._part_path())
            elif tok.text == "segments" and self.cur.peek(1).text == "defined":
                self.cur.next()
                self.cur.next()
                self.expect_word("by")
                add_part("Label", self._part_path())
            elif tok.text in ("starting", "ending"):
                self.cur.next()
                self.expect_word("at")
                add_part("Option", self._part_path())
            elif tok.text == "actions":
                self.cur.next()
                while True:
                    action = self.ident("an action name").text
                    actions.add(m.CHART_ACTION_ALIASES.get(action, action))
                    if not (
                        self.cur.at_punct(",")
                        and self.cur.peek(1).is_word()
                        and self.cur.peek(1).text not in _COMPONENT_CLAUSE_WORDS
                    ):
                        break
                    self.cur.next()
            elif tok.text == "that" and self.cur.peek(1).text == "navigates":
                self.cur.next()
                self.cur.next()
                self.expect_word("to")
                navigates_to = self.ident("a container id").text
            elif tok.text == "described":
                self.cur.next()
                self.expect_word("as")
                description = self.prose(())
                break
            else:
                self.cur.eat_punct(".")
                break

        try:
            return m.UIComponent(
                id=ident.text,
                component_type=comp_type,
                name=name,
                component_subtype=comp_subtype,
                data_binding=data_binding,
                parts=tuple(parts),
                actions=frozenset(actions),
                navigates_to=navigates_to,
                description=description,
                loc=start.span,
            )
        except m.ModelError as exc:
            raise self.fail("CNL010", str(exc), ident.span)

    def _part_path(self) -> m.AttributePath:
        try:
            return mx.parse_path(self.cur)
        except mx.ExprSyntaxError as exc:
            raise _ParseError(error("CNL010", str(exc), exc.span))


def _join_prose(parts: list[str]) -> str:
    out: list[str] = []
    for part in parts:
        if part in (",", ".") and out:
            out[-1] += part
        else:
            out.append(part)
    return " ".join(out)


# ---------------------------------------------------------------------------
# Pretty-printer
# ---------------------------------------------------------------------------


def _article(word: str) -> str:
    return "an" if word[:1] in "AEIO" else "a"


def _quoted(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _opt_paren_name(obj) -> str:
    return f' ("{obj.name}")' if obj.name is not None and obj.name != obj.id else ""


def _opt_bare_name(obj) -> str:
    return f" {_quoted(obj.name)}" if obj.name is not None and obj.name != obj.id else ""


_KIND_WORDS = {"Slice": "Slice", "Dice": "Dice", "RollUp": "Roll-up", "DrillDown": "Drill-down", "Pivot": "Pivot"}


def emit_cnlbi(model: m.SpecificationModel) -> tuple[str, list[Diagnostic]]:
    """Deterministic canonical CNL-BI text for a model.

    Constructs with no CNL-BI syntax (clusters, vocabulary extensions, tags,
    string lengths, container events) are emitted as comment lines and
    reported as warnings.
    """
    out: list[str] = []
    warnings: list[Diagnostic] = []

    def note(message: str) -> None:
        out.append(f"// not representable in CNL-BI: {message}")
        warnings.append(warning("CNL030", f"not representable in CNL-BI: {message}"))

    for ext in sorted(model.vocabulary_extensions, key=lambda x: (x.category, x.id)):
        note(f"vocabulary extension {ext.category} {ext.id}")

    for enum in sorted(model.enumerations, key=lambda e: e.id):
        values = list(enum.values)
        if len(values) > 1:
            rendered = ", ".join(values[:-1]) + " and " + values[-1]
        else:
            rendered = values[0]
        out.append(f"Data enumeration {enum.id}{_opt_paren_name(enum)} with values {rendered}.")
        out.append("")

    for entity in sorted(model.entities, key=lambda e: e.id):
        sub = f" {entity.sub_type}" if entity.sub_type else ""
        out.append(
            f"DataEntity {entity.id}{_opt_paren_name(entity)} is {_article(entity.entity_type)} "
            f"{entity.entity_type}{sub} with attributes"
        )
        lines = []
        for attr in entity.attributes:
            lines.append("  " + _attribute_text(attr, warnings, entity.id))
        out.append(",\n".join(lines))
        if entity.description is not None:
            out.append(f"described as {entity.description}.")
        else:
            out[-1] += "."
        out.append("")

    for cluster in sorted(model.clusters, key=lambda c: c.id):
        note(f"data entity cluster {cluster.id} (main {cluster.main}, uses {', '.join(cluster.uses)})")
        out.append("")

    for actor in sorted(model.actors, key=lambda a: a.id):
        line = f"Actor {actor.id}{_opt_bare_name(actor)} is {_article(actor.actor_type)} {actor.actor_type}"
        if actor.is_a is not None:
            line += f", extends {actor.is_a}"
        if actor.stakeholder is not None:
            line += f", with stakeholder {actor.stakeholder}"
        if actor.description is not None:
            line += f" described as {actor.description}."
        else:
            line += "."
        out.append(line)
        out.append("")

    for uc in sorted(model.use_cases, key=lambda u: u.id):
        out.append(f"UseCase {uc.id}{_opt_paren_name(uc)} is {_article(uc.uc_type)} {uc.uc_type}")
        if uc.stakeholder is not None:
            out.append(f"  with stakeholder {uc.stakeholder},")
        out.append(f"  actor {uc.primary_actor},")
        for sup in uc.supporting_actors:
            out.append(f"  support actor {sup},")
        if uc.data_source is not None:
            out.append(f"  data source {uc.data_source},")
        if uc.action_kinds:
            note(f"bare action kinds on use case {uc.id}: {', '.join(uc.action_kinds)}")
        # The use-case description precedes the operations so a trailing
        # operation without its own description cannot capture it.
        if uc.description is not None:
            suffix = "," if uc.operations else "."
            out.append(f"  described as {uc.description}{suffix}")
        if uc.operations:
            out.append("  performs")
            for i, op in enumerate(uc.operations):
                _emit_operation(out, op, warnings, last=i == len(uc.operations) - 1)
        out.append("")

    for container in sorted(model.ui_containers, key=lambda c: c.id):
        if container.container_subtype is not None and container.container_type == "MainWindow":
            head = container.container_subtype
        else:
            head = "Main Window" if container.container_type == "MainWindow" else "Modal Window"
            if container.container_subtype is not None:
                note(f"container subtype {container.container_subtype} on {container.id}")
        out.append(f"UIContainer {container.id}{_opt_bare_name(container)} is {_article(head)} {head}")
        out.append("that contains")
        for event in container.events:
            note(f"container event {event.id} on {container.id}")
        for i, comp in enumerate(container.components):
            _emit_component(out, comp, warnings, note, last=i == len(container.components) - 1)
        out.append("")

    text = "\n".join(out).strip()
    return (text + "\n" if text else ""), warnings


def _attribute_text(attr: m.DataAttribute, warnings: list[Diagnostic], entity_id: str) -> str:
    name = f' ("{attr.name}")' if attr.name is not None and attr.name != attr.id else ""
    if attr.attr_type.kind == "dimension":
        head = f"{attr.id}{name} refers to Dimension {attr.attr_type.name}"
    else:
        type_name = attr.attr_type.name
        if attr.attr_type.length is not None:
            warnings.append(
                warning("CNL030", f"string length on {entity_id}.{attr.id} has no CNL-BI syntax; dropped")
            )
        head = f"{attr.id}{name} is {_article(type_name)} {type_name}"

    items: list[str] = []
    for c in sorted(attr.constraints, key=lambda c: m.CONSTRAINT_KINDS.index(c.kind)):
        items.append(f"ForeignKey({c.target})" if c.kind == "ForeignKey" else c.kind)
    if attr.default_value is not None:
        items.append(f"default {mx.literal_text(attr.default_value.value)}")
    if attr.measure is not None:
        if isinstance(attr.measure, m.OpaqueMeasure):
            warnings.append(warning("CNL030", f"opaque measure on {entity_id}.{attr.id}; emitted verbatim"))
        items.append(f"operation {mx.measure_text(attr.measure)}")
    if items:
        head += f" ({', '.join(items)})"
    return head


def _emit_operation(out: list[str], op: m.OlapOperation, warnings: list[Diagnostic], last: bool) -> None:
    kind_word = _KIND_WORDS[op.kind]
    out.append(f"    OLAP Operation {op.id}{_opt_paren_name(op)} is {_article(kind_word)} {kind_word}")
    if op.where_clauses:
        rendered = " and ".join(mx.predicate_text(p) for p in op.where_clauses)
        out.append(f"      where {rendered}")
    if op.group_by is not None:
        out.append(f"      group by {op.group_by}")
    if op.swap is not None:
        out.append(f"      swap {op.swap[0]} with {op.swap[1]}")
    if op.touched_dimensions:
        out.append(f"      // touched dimensions: {', '.join(op.touched_dimensions)}")
        warnings.append(warning("CNL030", f"touched dimensions of operation {op.id} have no CNL-BI syntax"))
    if op.description is not None:
        out.append(f"      described as {op.description}{'' if last else ','}")
    elif not last:
        out[-1] += ","


def _emit_component(out, comp: m.UIComponent, warnings, note, last: bool) -> None:
    if comp.component_type == "InteractiveChart":
        term = comp.component_subtype
    elif comp.component_type == "List" and comp.component_subtype == "Table":
        term = "Table"
    else:
        term = comp.component_type
        if comp.component_subtype is not None:
            note(f"component subtype {comp.component_subtype} on {comp.id}")
    lines: list[str] = [f"UIComponent {comp.id}{_opt_bare_name(comp)} is {_article(term)} {term}"]

    if comp.data_binding is not None:
        lines.append(f"  data binding to {comp.data_binding}")

    option_index = 0
    pending_columns: list[str] = []
    first_part = True

    def flush_columns():
        nonlocal first_part
        if pending_columns:
            prefix = "  with columns " if first_part else "  columns "
            lines.append(prefix + ", ".join(pending_columns))
            pending_columns.clear()
            first_part = False

    for part in comp.parts:
        if part.part_kind == "Column":
            pending_columns.append(str(part.binding))
            continue
        flush_columns()
        if part.part_kind == "Option":
            word = "starting at" if option_index == 0 else "ending at"
            option_index += 1
            if option_index > 2:
                note(f"extra Option part {part.id} on {comp.id}")
                continue
            lines.append(f"  {word} {part.binding}")
            continue
        phrase = _PHRASE_BY_KIND[part.part_kind]
        prefix = "  with " if first_part else "  "
        lines.append(f"{prefix}{phrase} {part.binding}")
        first_part = False
    flush_columns()

    if comp.actions:
        lines.append("  actions " + ", ".join(sorted(comp.actions)))
    if comp.navigates_to is not None:
        lines.append(f"  that navigates to {comp.navigates_to}")
    for tag_name, tag_value in comp.tags:
        lines.append(f"  // tag {tag_name} = {tag_value}")
        warnings.append(warning("CNL030", f"tag {tag_name!r} on {comp.id} has no CNL-BI syntax"))
    if comp.description is not None:
        lines.append(f"  described as {comp.description}")

    body = ",\n".join(line for line in lines)
    out.append(body + ("." if last else ","))
