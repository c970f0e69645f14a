"""Shared abstract model for BI requirements specifications.

Both language frontends produce these values and every downstream stage
(semantic checks, OLAP engine, generators) consumes them. Model values are
immutable after construction and safe to share across threads. Source
locations ride along on ``loc`` fields but never participate in equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagnostics import Span

# ---------------------------------------------------------------------------
# Vocabularies
#
# Closed sets come straight from the language definition; alias tables fold
# the alternate spellings the source corpus uses into one canonical term.
# ---------------------------------------------------------------------------

ENTITY_TYPES = ("Reference", "Master", "Transaction")
ENTITY_TYPE_ALIASES = {"Transactional": "Transaction"}

ENTITY_SUBTYPES = ("Fact", "Dimension")
ENTITY_SUBTYPE_ALIASES = {"BI_Fact": "Fact", "BI_Dimension": "Dimension"}

PRIMITIVE_TYPES = ("UUID", "Integer", "Decimal", "String", "Boolean", "Date", "Time", "DateTime")

ACTOR_TYPES = ("User", "ExternalSystem")

CONSTRAINT_KINDS = ("PrimaryKey", "NotNull", "Unique", "ForeignKey")

AGGREGATE_FUNCTIONS = ("COUNT", "SUM", "AVERAGE", "MIN", "MAX")

OLAP_KINDS = ("Slice", "Dice", "RollUp", "DrillDown", "Pivot")
OLAP_KIND_ALIASES = {
    "Roll-up": "RollUp",
    "Drill-down": "DrillDown",
    "Drilldown": "DrillDown",
    "BI_Slice": "Slice",
    "BI_Dice": "Dice",
    "BI_Rollup": "RollUp",
    "BI_RollUp": "RollUp",
    "BI_DrillDown": "DrillDown",
    "BI_Drilldown": "DrillDown",
    "BI_Pivot": "Pivot",
}

USE_CASE_TYPES = ("EntityCreate", "EntityRead", "EntityUpdate", "EntityDelete", "BIAnalysis")
USE_CASE_TYPE_ALIASES = {"BI_Analysis": "BIAnalysis"}

CHART_ACTIONS = ("DrillDown", "RealTimeDataUpdate", "ZoomAndPanUpdate", "TooltipAndHoverDetail")
CHART_ACTION_ALIASES = {
    "TooltipAndHoverDetails": "TooltipAndHoverDetail",
    "TooltipAndHoverDetailShow": "TooltipAndHoverDetail",
    "DrillDownUpdate": "DrillDown",
}

COMPONENT_TYPES = ("Form", "List", "Detail", "Filter", "InteractiveChart")

CHART_SUBTYPES = (
    "InteractiveBarChart",
    "InteractiveLineChart",
    "InteractivePieChart",
    "InteractiveScatterPlot",
    "InteractiveGeographicalMap",
)
COMPONENT_SUBTYPES = ("Table",) + CHART_SUBTYPES

CONTAINER_TYPES = ("MainWindow", "ModalWindow")
CONTAINER_TYPE_ALIASES = {"Window": "MainWindow"}
CONTAINER_SUBTYPES = ("Dashboard", "Page")

PART_KINDS = (
    "Column",
    "X_Axis",
    "Y_Axis",
    "Value",
    "Label",
    "Legend",
    "Latitude",
    "Longitude",
    "Location",
    "Option",
    "Area",
)

EXTENSION_CATEGORIES = (
    "DataEntitySubType",
    "DataAttributeType",
    "UIContainerSubType",
    "UIComponentType",
    "UIComponentSubType",
    "UIComponentPartSubType",
    "ActionType",
    "UseCaseType",
)

# Parts every chart subtype must carry (kind -> exact count).
REQUIRED_CHART_PARTS: dict[str, tuple[tuple[str, int], ...]] = {
    "InteractiveBarChart": (("X_Axis", 1), ("Y_Axis", 1)),
    "InteractiveLineChart": (("X_Axis", 1), ("Y_Axis", 1)),
    "InteractivePieChart": (("Label", 1), ("Value", 1)),
    "InteractiveScatterPlot": (("X_Axis", 1), ("Y_Axis", 1)),
    "InteractiveGeographicalMap": (("Latitude", 1), ("Longitude", 1), ("Value", 1)),
}

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ModelError(ValueError):
    """Raised when a model value is constructed with invalid content."""

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.span = span


def is_identifier(text: str) -> bool:
    return bool(_IDENT_RE.match(text))


def _require_identifier(text: str, what: str) -> None:
    if not is_identifier(text):
        raise ModelError(f"{what} {text!r} is not a valid identifier")


def _require_term(value: str | None, allowed: tuple[str, ...], what: str, optional: bool = False) -> None:
    if value is None:
        if optional:
            return
        raise ModelError(f"{what} is required")
    if value not in allowed:
        raise ModelError(f"unknown {what} {value!r}; expected one of {', '.join(allowed)}")


# Category -> canonical built-in terms plus alias table. Used when deciding
# whether a vocabulary extension introduces anything new.
BUILTIN_TERMS: dict[str, tuple[tuple[str, ...], dict[str, str]]] = {
    "DataEntitySubType": (ENTITY_SUBTYPES, ENTITY_SUBTYPE_ALIASES),
    "DataAttributeType": (PRIMITIVE_TYPES + ("_Dimension",), {}),
    "UIContainerSubType": (CONTAINER_SUBTYPES, {}),
    "UIComponentType": (COMPONENT_TYPES, {}),
    "UIComponentSubType": (COMPONENT_SUBTYPES, {}),
    "UIComponentPartSubType": (PART_KINDS, {}),
    "ActionType": (CHART_ACTIONS + OLAP_KINDS, {**CHART_ACTION_ALIASES, **OLAP_KIND_ALIASES}),
    "UseCaseType": (USE_CASE_TYPES, USE_CASE_TYPE_ALIASES),
}


def is_builtin_term(category: str, term: str) -> bool:
    builtins, aliases = BUILTIN_TERMS[category]
    return term in builtins or term in aliases


def normalize_term(category: str, term: str) -> str:
    _, aliases = BUILTIN_TERMS[category]
    return aliases.get(term, term)


# ---------------------------------------------------------------------------
# Paths, types, constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttributePath:
    """Dotted attribute reference with one to three segments.

    ``attr`` | ``Entity.attr`` | ``Entity.attr.attr`` — the three-segment
    form hops through a dimension-reference attribute into the referenced
    dimension (``AppointmentRequest.scheduled_date.year``).
    """

    segments: tuple[str, ...]
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 1 <= len(self.segments) <= 3:
            raise ModelError(f"attribute path must have 1-3 segments, got {len(self.segments)}")
        for seg in self.segments:
            _require_identifier(seg, "path segment")

    def __str__(self) -> str:
        return ".".join(self.segments)

    @classmethod
    def parse(cls, text: str, loc: Span | None = None) -> "AttributePath":
        return cls(tuple(text.split(".")), loc)


@dataclass(frozen=True)
class AttributeType:
    """Attribute type: primitive, enumeration reference, or dimension reference."""

    kind: str  # "primitive" | "enum" | "dimension"
    name: str
    length: int | None = None

    def __post_init__(self):
        if self.kind not in ("primitive", "enum", "dimension"):
            raise ModelError(f"unknown attribute type kind {self.kind!r}")
        if self.kind == "primitive":
            _require_term(self.name, PRIMITIVE_TYPES, "primitive type")
            if self.length is not None and self.name != "String":
                raise ModelError("only String may carry a length")
        else:
            _require_identifier(self.name, "type reference")
            if self.length is not None:
                raise ModelError("only String may carry a length")

    @classmethod
    def primitive(cls, name: str, length: int | None = None) -> "AttributeType":
        return cls("primitive", name, length)

    @classmethod
    def enum(cls, enum_id: str) -> "AttributeType":
        return cls("enum", enum_id)

    @classmethod
    def dimension(cls, entity_id: str) -> "AttributeType":
        return cls("dimension", entity_id)


@dataclass(frozen=True)
class Constraint:
    kind: str
    target: str | None = None  # referenced entity id, ForeignKey only

    def __post_init__(self):
        _require_term(self.kind, CONSTRAINT_KINDS, "constraint")
        if self.kind == "ForeignKey":
            if not self.target:
                raise ModelError("ForeignKey constraint requires a target entity id")
            _require_identifier(self.target, "ForeignKey target")
        elif self.target is not None:
            raise ModelError(f"{self.kind} constraint takes no target")


# ---------------------------------------------------------------------------
# Measure expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: object  # int | float | str | bool

    def __post_init__(self):
        if not isinstance(self.value, (int, float, str, bool)):
            raise ModelError(f"unsupported literal {self.value!r}")


@dataclass(frozen=True)
class EnumLiteral:
    enum: str
    value: str

    def __str__(self) -> str:
        return f"{self.enum}.{self.value}"


@dataclass(frozen=True)
class Predicate:
    """Equality predicate: left attribute path = literal, enum literal, or free path."""

    left: AttributePath
    right: object  # Literal | EnumLiteral | AttributePath
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.right, (Literal, EnumLiteral, AttributePath)):
            raise ModelError("predicate right side must be a literal, enum literal, or path")


@dataclass(frozen=True)
class Aggregate:
    fn: str
    arg: object  # AttributePath | Predicate

    def __post_init__(self):
        _require_term(self.fn, AGGREGATE_FUNCTIONS, "aggregate function")
        if isinstance(self.arg, Predicate):
            if self.fn != "COUNT":
                raise ModelError(f"{self.fn} accepts an attribute path, not a predicate")
        elif not isinstance(self.arg, AttributePath):
            raise ModelError("aggregate argument must be an attribute path or predicate")


@dataclass(frozen=True)
class MeasureRef:
    attribute: str

    def __post_init__(self):
        _require_identifier(self.attribute, "measure reference")


@dataclass(frozen=True)
class Arithmetic:
    op: str
    left: object
    right: object

    def __post_init__(self):
        if self.op not in ("+", "-", "*", "/"):
            raise ModelError(f"unknown arithmetic operator {self.op!r}")
        for side in (self.left, self.right):
            if not isinstance(side, (Aggregate, MeasureRef, Arithmetic, Literal)):
                raise ModelError("arithmetic operands must be aggregates, measure refs, literals, or arithmetic")


@dataclass(frozen=True)
class OpaqueMeasure:
    """Unparseable measure expression kept as raw text; excluded from execution."""

    text: str


MeasureExpression = (Aggregate, MeasureRef, Arithmetic, Literal, OpaqueMeasure)


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataEnumeration:
    id: str
    name: str | None = None
    values: tuple[str, ...] = ()
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "enumeration id")
        if not self.values:
            raise ModelError(f"enumeration {self.id} must declare at least one value")
        seen = set()
        for v in self.values:
            _require_identifier(v, "enumeration value")
            if v in seen:
                raise ModelError(f"duplicate value {v!r} in enumeration {self.id}")
            seen.add(v)

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class DataAttribute:
    id: str
    attr_type: AttributeType
    name: str | None = None
    default_value: Literal | None = None
    measure: object | None = None  # MeasureExpression
    constraints: frozenset[Constraint] = frozenset()
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "attribute id")
        if self.measure is not None and not isinstance(self.measure, MeasureExpression):
            raise ModelError("measure must be a measure expression")
        kinds = {c.kind for c in self.constraints}
        if self.measure is not None and kinds & {"PrimaryKey", "ForeignKey"}:
            raise ModelError(f"measure attribute {self.id} cannot carry PrimaryKey or ForeignKey")
        # PrimaryKey subsumes NotNull and Unique; keep the canonical minimum.
        if "PrimaryKey" in kinds and kinds & {"NotNull", "Unique"}:
            object.__setattr__(
                self,
                "constraints",
                frozenset(c for c in self.constraints if c.kind not in ("NotNull", "Unique")),
            )

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    @property
    def is_measure(self) -> bool:
        return self.measure is not None

    @property
    def is_primary_key(self) -> bool:
        return any(c.kind == "PrimaryKey" for c in self.constraints)

    @property
    def not_null(self) -> bool:
        return any(c.kind in ("NotNull", "PrimaryKey") for c in self.constraints)

    @property
    def dimension_target(self) -> str | None:
        return self.attr_type.name if self.attr_type.kind == "dimension" else None


@dataclass(frozen=True)
class DataEntity:
    id: str
    entity_type: str
    attributes: tuple[DataAttribute, ...]
    name: str | None = None
    sub_type: str | None = None
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "entity id")
        _require_term(self.entity_type, ENTITY_TYPES, "entity type")
        if self.sub_type is not None:
            _require_identifier(self.sub_type, "entity subtype")
        if not self.attributes:
            raise ModelError(f"entity {self.id} must declare at least one attribute")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    @property
    def is_fact(self) -> bool:
        return self.sub_type == "Fact"

    @property
    def is_dimension(self) -> bool:
        return self.sub_type == "Dimension"

    def attribute(self, attr_id: str) -> DataAttribute | None:
        for attr in self.attributes:
            if attr.id == attr_id:
                return attr
        return None

    @property
    def primary_key(self) -> DataAttribute | None:
        for attr in self.attributes:
            if attr.is_primary_key:
                return attr
        return None

    @property
    def dimension_refs(self) -> tuple[DataAttribute, ...]:
        return tuple(a for a in self.attributes if a.attr_type.kind == "dimension")

    @property
    def measures(self) -> tuple[DataAttribute, ...]:
        return tuple(a for a in self.attributes if a.is_measure)


@dataclass(frozen=True)
class DataEntityCluster:
    id: str
    entity_type: str
    main: str
    uses: tuple[str, ...] = ()
    name: str | None = None
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "cluster id")
        _require_term(self.entity_type, ENTITY_TYPES, "cluster entity type")
        _require_identifier(self.main, "cluster main entity")
        for u in self.uses:
            _require_identifier(u, "cluster member")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class Actor:
    id: str
    actor_type: str
    name: str | None = None
    stakeholder: str | None = None
    is_a: str | None = None
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "actor id")
        _require_term(self.actor_type, ACTOR_TYPES, "actor type")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class OlapOperation:
    id: str
    kind: str
    name: str | None = None
    where_clauses: tuple[Predicate, ...] = ()
    group_by: AttributePath | None = None
    swap: tuple[str, str] | None = None
    touched_dimensions: tuple[str, ...] = ()
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "operation id")
        _require_term(self.kind, OLAP_KINDS, "OLAP operation kind")
        # Clause population must match the kind; arity of where clauses is a
        # semantic concern, their presence on the wrong kind is not.
        if self.kind in ("Slice", "Dice"):
            if self.group_by is not None or self.swap is not None:
                raise ModelError(f"{self.kind} operation {self.id} takes only where clauses")
        elif self.kind in ("RollUp", "DrillDown"):
            if self.where_clauses or self.swap is not None:
                raise ModelError(f"{self.kind} operation {self.id} takes only a group-by clause")
        else:  # Pivot
            if self.where_clauses or self.group_by is not None:
                raise ModelError(f"Pivot operation {self.id} takes only a swap clause")
            if self.swap is not None and self.swap[0] == self.swap[1]:
                raise ModelError(f"Pivot operation {self.id} must swap two distinct dimensions")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    @property
    def is_underspecified(self) -> bool:
        """True for operations decoded from bare action tags (no clause detail)."""
        if self.kind in ("Slice", "Dice"):
            return not self.where_clauses
        if self.kind in ("RollUp", "DrillDown"):
            return self.group_by is None
        return self.swap is None


@dataclass(frozen=True)
class UseCase:
    id: str
    uc_type: str
    primary_actor: str
    name: str | None = None
    stakeholder: str | None = None
    supporting_actors: tuple[str, ...] = ()
    data_source: str | None = None
    action_kinds: tuple[str, ...] = ()
    operations: tuple[OlapOperation, ...] = ()
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "use case id")
        _require_identifier(self.uc_type, "use case type")
        _require_identifier(self.primary_actor, "primary actor")
        for kind in self.action_kinds:
            _require_term(kind, OLAP_KINDS, "action kind")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class UIPart:
    id: str
    part_kind: str
    binding: AttributePath
    name: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "part id")
        _require_identifier(self.part_kind, "part kind")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id


@dataclass(frozen=True)
class NavigationEvent:
    id: str
    event_type: str | None = None
    event_subtype: str | None = None
    navigates_to: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "event id")


@dataclass(frozen=True)
class UIComponent:
    id: str
    component_type: str
    name: str | None = None
    component_subtype: str | None = None
    data_binding: str | None = None
    parts: tuple[UIPart, ...] = ()
    actions: frozenset[str] = frozenset()
    navigates_to: str | None = None
    tags: tuple[tuple[str, str], ...] = ()
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "component id")
        _require_identifier(self.component_type, "component type")
        if self.component_subtype is not None:
            _require_identifier(self.component_subtype, "component subtype")
        # A chart subtype appears exactly on InteractiveChart components.
        if self.component_type == "InteractiveChart":
            if self.component_subtype not in CHART_SUBTYPES:
                raise ModelError(f"InteractiveChart component {self.id} requires a chart subtype")
        elif self.component_subtype in CHART_SUBTYPES:
            raise ModelError(f"component {self.id} carries a chart subtype but is not an InteractiveChart")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    @property
    def chart_subtype(self) -> str | None:
        return self.component_subtype if self.component_type == "InteractiveChart" else None


@dataclass(frozen=True)
class UIContainer:
    id: str
    container_type: str = "MainWindow"
    name: str | None = None
    container_subtype: str | None = None
    components: tuple[UIComponent, ...] = ()
    events: tuple[NavigationEvent, ...] = ()
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_identifier(self.id, "container id")
        _require_term(self.container_type, CONTAINER_TYPES, "container type")
        if self.container_subtype is not None:
            _require_identifier(self.container_subtype, "container subtype")

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.id

    def component(self, comp_id: str) -> UIComponent | None:
        for comp in self.components:
            if comp.id == comp_id:
                return comp
        return None


@dataclass(frozen=True)
class VocabularyExtension:
    category: str
    id: str
    description: str | None = None
    loc: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _require_term(self.category, EXTENSION_CATEGORIES, "extension category")
        _require_identifier(self.id, "extension id")


@dataclass(frozen=True)
class SpecificationModel:
    """Root aggregate: the style-independent instance every syntax maps onto."""

    enumerations: tuple[DataEnumeration, ...] = ()
    entities: tuple[DataEntity, ...] = ()
    clusters: tuple[DataEntityCluster, ...] = ()
    actors: tuple[Actor, ...] = ()
    use_cases: tuple[UseCase, ...] = ()
    ui_containers: tuple[UIContainer, ...] = ()
    vocabulary_extensions: tuple[VocabularyExtension, ...] = ()

    @classmethod
    def empty(cls) -> "SpecificationModel":
        return cls()

    def enumeration(self, enum_id: str) -> DataEnumeration | None:
        for e in self.enumerations:
            if e.id == enum_id:
                return e
        return None

    def entity(self, entity_id: str) -> DataEntity | None:
        for e in self.entities:
            if e.id == entity_id:
                return e
        return None

    def cluster(self, cluster_id: str) -> DataEntityCluster | None:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        return None

    def actor(self, actor_id: str) -> Actor | None:
        for a in self.actors:
            if a.id == actor_id:
                return a
        return None

    def use_case(self, uc_id: str) -> UseCase | None:
        for u in self.use_cases:
            if u.id == uc_id:
                return u
        return None

    def container(self, container_id: str) -> UIContainer | None:
        for c in self.ui_containers:
            if c.id == container_id:
                return c
        return None

    def data_source(self, source_id: str) -> DataEntity | DataEntityCluster | None:
        """Resolve an id that may name an entity or a cluster (entities win)."""
        return self.entity(source_id) or self.cluster(source_id)

    @property
    def facts(self) -> tuple[DataEntity, ...]:
        return tuple(e for e in self.entities if e.is_fact)

    @property
    def dimensions(self) -> tuple[DataEntity, ...]:
        return tuple(e for e in self.entities if e.is_dimension)

    def data_subset(self, with_actors: bool = True) -> "SpecificationModel":
        """Reduce to the construct categories shared by both linguistic styles."""
        return SpecificationModel(
            enumerations=self.enumerations,
            entities=self.entities,
            actors=self.actors if with_actors else (),
        )


def merge_models(models: list[SpecificationModel]) -> SpecificationModel:
    """Concatenate several parsed documents into one compilation unit."""
    merged = SpecificationModel()
    for m in models:
        merged = SpecificationModel(
            enumerations=merged.enumerations + m.enumerations,
            entities=merged.entities + m.entities,
            clusters=merged.clusters + m.clusters,
            actors=merged.actors + m.actors,
            use_cases=merged.use_cases + m.use_cases,
            ui_containers=merged.ui_containers + m.ui_containers,
            vocabulary_extensions=merged.vocabulary_extensions + m.vocabulary_extensions,
        )
    return merged


# ---------------------------------------------------------------------------
# Path resolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResolvedTarget:
    entity: str
    attribute: str


class ResolveError(Exception):
    """Path resolution failure; ``code`` names the diagnostic kind."""

    def __init__(self, code: str, segment: str, message: str):
        super().__init__(message)
        self.code = code  # UnknownEntity | UnknownAttribute | NotADimensionHop
        self.segment = segment


def _context_entity(model: SpecificationModel, context: str) -> DataEntity:
    source = model.data_source(context)
    if source is None:
        raise ResolveError("UnknownEntity", context, f"unknown entity or cluster {context!r}")
    if isinstance(source, DataEntityCluster):
        main = model.entity(source.main)
        if main is None:
            raise ResolveError("UnknownEntity", source.main, f"cluster {context} names unknown entity {source.main!r}")
        return main
    return source


def resolve(model: SpecificationModel, path: AttributePath, context: str) -> ResolvedTarget:
    """Resolve an attribute path against an entity or cluster context.

    One segment is an attribute of the context entity. Two segments are
    either ``Entity.attr`` or a hop through a dimension-reference attribute
    of the context. Three segments are ``Entity.attr.attr`` where the middle
    attribute must reference a dimension.
    """
    segs = path.segments
    ctx = _context_entity(model, context)

    if len(segs) == 1:
        attr = ctx.attribute(segs[0])
        if attr is None:
            raise ResolveError("UnknownAttribute", segs[0], f"{ctx.id} has no attribute {segs[0]!r}")
        return ResolvedTarget(ctx.id, attr.id)

    head = segs[0]
    entity = model.entity(head)
    if entity is None:
        # Not an entity id: try a hop through a context attribute.
        attr = ctx.attribute(head)
        if attr is None:
            raise ResolveError("UnknownEntity", head, f"unknown entity {head!r}")
        if len(segs) != 2:
            raise ResolveError("UnknownEntity", head, f"unknown entity {head!r}")
        return _hop(model, ctx, attr, segs[1])

    if len(segs) == 2:
        attr = entity.attribute(segs[1])
        if attr is None:
            raise ResolveError("UnknownAttribute", segs[1], f"{entity.id} has no attribute {segs[1]!r}")
        return ResolvedTarget(entity.id, attr.id)

    mid = entity.attribute(segs[1])
    if mid is None:
        raise ResolveError("UnknownAttribute", segs[1], f"{entity.id} has no attribute {segs[1]!r}")
    return _hop(model, entity, mid, segs[2])


def _hop(model: SpecificationModel, owner: DataEntity, attr: DataAttribute, leaf: str) -> ResolvedTarget:
    target_id = attr.dimension_target
    if target_id is None:
        raise ResolveError(
            "NotADimensionHop", attr.id, f"{owner.id}.{attr.id} does not reference a dimension"
        )
    target = model.entity(target_id)
    if target is None:
        raise ResolveError("UnknownEntity", target_id, f"unknown entity {target_id!r}")
    leaf_attr = target.attribute(leaf)
    if leaf_attr is None:
        raise ResolveError("UnknownAttribute", leaf, f"{target.id} has no attribute {leaf!r}")
    return ResolvedTarget(target.id, leaf_attr.id)


def reachable_entities(model: SpecificationModel, context: str) -> set[str]:
    """Entity ids reachable from a context by following dimension references.

    Starts at the context entity (a cluster contributes its main entity and
    every ``uses`` member) and closes over dimension-reference attributes,
    which covers snowflake chains such as fact -> Institution -> City.
    """
    roots: list[str] = []
    source = model.data_source(context)
    if source is None:
        return set()
    if isinstance(source, DataEntityCluster):
        roots.append(source.main)
        roots.extend(source.uses)
    else:
        roots.append(source.id)

    seen: set[str] = set()
    work = [r for r in roots if model.entity(r) is not None]
    while work:
        current = work.pop()
        if current in seen:
            continue
        seen.add(current)
        entity = model.entity(current)
        if entity is None:
            continue
        for attr in entity.dimension_refs:
            if attr.dimension_target not in seen and model.entity(attr.dimension_target):
                work.append(attr.dimension_target)
    return seen


__all__ = [name for name in dir() if not name.startswith("_")]
