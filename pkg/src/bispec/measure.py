"""Measure expression and predicate grammar shared by both frontends.

The expression language is the DAX-like surface used for computed attributes:
aggregates over attribute paths or predicates, references to sibling
measures, and left-to-right arithmetic. The same predicate grammar serves
OLAP where clauses.
"""

from __future__ import annotations

from dataclasses import replace

from . import model as m
from .diagnostics import Diagnostic, Span
from .lexer import Cursor, Token, TokenKind, tokenize


class ExprSyntaxError(Exception):
    def __init__(self, message: str, span: Span | None):
        super().__init__(message)
        self.span = span


class _Name:
    """Unresolved dotted name in operand position; classified at entity build."""

    __slots__ = ("path",)

    def __init__(self, path: m.AttributePath):
        self.path = path


_AGG_BY_LOWER = {fn.lower(): fn for fn in m.AGGREGATE_FUNCTIONS}
_AGG_BY_LOWER["avg"] = "AVERAGE"


def _word(tok: Token) -> bool:
    return tok.is_word()


def parse_path(cur: Cursor) -> m.AttributePath:
    first = cur.peek()
    if not _word(first):
        raise ExprSyntaxError(f"expected an attribute path, found {first.text!r}", first.span)
    segments = [cur.next().text]
    last = first
    while cur.at_punct(".") and _word(cur.peek(1)):
        # Dotted paths are written without whitespace; a detached '.' is a
        # declaration terminator, not a segment separator.
        dot, nxt = cur.peek(), cur.peek(1)
        if dot.span.offset != last.span.offset + last.span.length:
            break
        if nxt.span.offset != dot.span.offset + 1:
            break
        cur.next()
        last = cur.next()
        segments.append(last.text)
    span = Span(first.span.file, first.span.line, first.span.col, first.span.offset,
                last.span.offset + last.span.length - first.span.offset)
    try:
        return m.AttributePath(tuple(segments), span)
    except m.ModelError as exc:
        raise ExprSyntaxError(str(exc), span) from exc


def _parse_rhs(cur: Cursor) -> object:
    tok = cur.peek()
    if tok.kind is TokenKind.NUMBER:
        cur.next()
        return m.Literal(tok.value)
    if tok.kind is TokenKind.STRING:
        cur.next()
        return m.Literal(tok.value)
    if tok.is_word() and tok.text in ("True", "False", "true", "false"):
        cur.next()
        return m.Literal(tok.text.lower() == "true")
    if _word(tok):
        # Path-shaped: either an enum literal (classified once the full model
        # is known) or a free parameter path bound at query time.
        return parse_path(cur)
    raise ExprSyntaxError(f"expected a literal or path, found {tok.text!r}", tok.span)


def parse_predicate(cur: Cursor) -> m.Predicate:
    left = parse_path(cur)
    eq = cur.eat_punct("=")
    if eq is None:
        tok = cur.peek()
        raise ExprSyntaxError(f"expected '=' in predicate, found {tok.text!r}", tok.span)
    right = _parse_rhs(cur)
    return m.Predicate(left, right, left.loc)


def _parse_aggregate(cur: Cursor, fn: str) -> m.Aggregate:
    open_tok = cur.eat_punct("(")
    if open_tok is None:
        tok = cur.peek()
        raise ExprSyntaxError(f"expected '(' after {fn}, found {tok.text!r}", tok.span)
    # COUNT may take a predicate, optionally wrapped in if(...).
    if fn == "COUNT" and cur.at_word("if", "IF") and cur.peek(1).text == "(":
        cur.next()
        cur.next()
        pred = parse_predicate(cur)
        if cur.eat_punct(")") is None:
            raise ExprSyntaxError("expected ')' closing if(...)", cur.peek().span)
        arg: object = pred
    else:
        path = parse_path(cur)
        if cur.at_punct("="):
            cur.next()
            right = _parse_rhs(cur)
            arg = m.Predicate(path, right, path.loc)
        else:
            arg = path
    if cur.eat_punct(")") is None:
        raise ExprSyntaxError(f"expected ')' closing {fn}(...)", cur.peek().span)
    if isinstance(arg, m.Predicate) and fn != "COUNT":
        raise ExprSyntaxError(f"{fn} accepts an attribute path, not a predicate", cur.peek().span)
    return m.Aggregate(fn, arg)


def _parse_factor(cur: Cursor) -> object:
    tok = cur.peek()
    if tok.kind is TokenKind.NUMBER:
        cur.next()
        return m.Literal(tok.value)
    if cur.at_punct("("):
        cur.next()
        inner = parse_expression(cur)
        if cur.eat_punct(")") is None:
            raise ExprSyntaxError("expected ')'", cur.peek().span)
        return inner
    if _word(tok):
        fn = _AGG_BY_LOWER.get(tok.text.lower())
        if fn is not None and cur.peek(1).text == "(":
            cur.next()
            return _parse_aggregate(cur, fn)
        return _Name(parse_path(cur))
    raise ExprSyntaxError(f"expected an expression, found {tok.text!r}", tok.span)


def _parse_term(cur: Cursor) -> object:
    left = _parse_factor(cur)
    while cur.at_punct("*") or cur.at_punct("/"):
        op = cur.next().text
        right = _parse_factor(cur)
        left = _combine(op, left, right, cur)
    return left


def parse_expression(cur: Cursor) -> object:
    """Parse a measure expression from the cursor; raises ExprSyntaxError."""
    left = _parse_term(cur)
    while cur.at_punct("+") or cur.at_punct("-"):
        op = cur.next().text
        right = _parse_term(cur)
        left = _combine(op, left, right, cur)
    return left


def _combine(op: str, left: object, right: object, cur: Cursor) -> m.Arithmetic:
    # Operands stay as _Name until sibling measures are known.
    for side in (left, right):
        if not isinstance(side, (m.Aggregate, m.Arithmetic, m.Literal, _Name, m.MeasureRef)):
            raise ExprSyntaxError("invalid arithmetic operand", cur.peek().span)
    return _raw_arithmetic(op, left, right)


def _raw_arithmetic(op: str, left: object, right: object) -> m.Arithmetic:
    # Bypass operand validation while _Name placeholders are still present;
    # resolve_names() re-validates through the real constructor.
    obj = object.__new__(m.Arithmetic)
    object.__setattr__(obj, "op", op)
    object.__setattr__(obj, "left", left)
    object.__setattr__(obj, "right", right)
    return obj


def resolve_names(expr: object, measure_ids: set[str]) -> object:
    """Turn _Name placeholders into MeasureRef nodes; reject bare attributes."""
    if isinstance(expr, _Name):
        segs = expr.path.segments
        if len(segs) == 1 and segs[0] in measure_ids:
            return m.MeasureRef(segs[0])
        raise ExprSyntaxError(
            f"{expr.path} is not a sibling measure; only aggregates, measure references, "
            "and literals may appear in measure arithmetic",
            expr.path.loc,
        )
    if isinstance(expr, m.Arithmetic):
        return m.Arithmetic(expr.op, resolve_names(expr.left, measure_ids), resolve_names(expr.right, measure_ids))
    return expr


def parse_measure_text(text: str, file: str = "<expression>", code_prefix: str = "ASL") -> tuple[object | None, list[Diagnostic]]:
    """Parse a measure expression carried as a raw string (tag payloads)."""
    tokens, diags = tokenize(text, file=file, code_prefix=code_prefix, string_quotes="\"'")
    if any(d.is_error for d in diags):
        return None, diags
    cur = Cursor(tokens)
    try:
        expr = parse_expression(cur)
    except ExprSyntaxError:
        return None, []
    if not cur.at_eof():
        return None, []
    return expr, []


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _quote(text: str, quote: str) -> str:
    return quote + text.replace("\\", "\\\\").replace(quote, "\\" + quote) + quote


def literal_text(value: object, quote: str = '"') -> str:
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, (int, float)):
        return repr(value)
    return _quote(str(value), quote)


def operand_text(value: object, quote: str = '"') -> str:
    if isinstance(value, m.Literal):
        return literal_text(value.value, quote)
    if isinstance(value, m.EnumLiteral):
        return f"{value.enum}.{value.value}"
    if isinstance(value, m.AttributePath):
        return str(value)
    raise TypeError(f"unexpected operand {value!r}")


def predicate_text(pred: m.Predicate, quote: str = '"') -> str:
    return f"{pred.left} = {operand_text(pred.right, quote)}"


def measure_text(expr: object, quote: str = '"') -> str:
    if isinstance(expr, m.Aggregate):
        arg = predicate_text(expr.arg, quote) if isinstance(expr.arg, m.Predicate) else str(expr.arg)
        return f"{expr.fn}({arg})"
    if isinstance(expr, m.MeasureRef):
        return expr.attribute
    if isinstance(expr, m.Arithmetic):
        return f"({measure_text(expr.left, quote)} {expr.op} {measure_text(expr.right, quote)})"
    if isinstance(expr, m.Literal):
        return literal_text(expr.value, quote)
    if isinstance(expr, m.OpaqueMeasure):
        return expr.text
    raise TypeError(f"unexpected measure node {expr!r}")


# ---------------------------------------------------------------------------
# Enum literal normalization
# ---------------------------------------------------------------------------


def _rewrite_operand(value: object, enum_ids: set[str]) -> object:
    if isinstance(value, m.AttributePath) and len(value.segments) == 2 and value.segments[0] in enum_ids:
        return m.EnumLiteral(value.segments[0], value.segments[1])
    return value


def _rewrite_pred(pred: m.Predicate, enum_ids: set[str]) -> m.Predicate:
    right = _rewrite_operand(pred.right, enum_ids)
    return pred if right is pred.right else m.Predicate(pred.left, right, pred.loc)


def _rewrite_expr(expr: object, enum_ids: set[str]) -> object:
    if isinstance(expr, m.Aggregate) and isinstance(expr.arg, m.Predicate):
        arg = _rewrite_pred(expr.arg, enum_ids)
        return expr if arg is expr.arg else m.Aggregate(expr.fn, arg)
    if isinstance(expr, m.Arithmetic):
        left = _rewrite_expr(expr.left, enum_ids)
        right = _rewrite_expr(expr.right, enum_ids)
        if left is expr.left and right is expr.right:
            return expr
        return m.Arithmetic(expr.op, left, right)
    return expr


def normalize_enum_literals(spec: m.SpecificationModel) -> m.SpecificationModel:
    """Rewrite ``Enum.value`` paths on predicate right sides into enum literals.

    Runs once per parsed document, after all enumerations are known.
    """
    enum_ids = {e.id for e in spec.enumerations}
    if not enum_ids:
        return spec

    entities = []
    for entity in spec.entities:
        attrs = []
        changed = False
        for attr in entity.attributes:
            if attr.measure is not None:
                measure = _rewrite_expr(attr.measure, enum_ids)
                if measure is not attr.measure:
                    attr = replace(attr, measure=measure)
                    changed = True
            attrs.append(attr)
        entities.append(replace(entity, attributes=tuple(attrs)) if changed else entity)

    use_cases = []
    for uc in spec.use_cases:
        ops = []
        changed = False
        for op in uc.operations:
            preds = tuple(_rewrite_pred(p, enum_ids) for p in op.where_clauses)
            if any(a is not b for a, b in zip(preds, op.where_clauses)):
                op = replace(op, where_clauses=preds)
                changed = True
            ops.append(op)
        use_cases.append(replace(uc, operations=tuple(ops)) if changed else uc)

    return replace(spec, entities=tuple(entities), use_cases=tuple(use_cases))
