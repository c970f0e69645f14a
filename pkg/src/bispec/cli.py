"""Command-line surface for batch use: parse, check, convert, gen, olap, fmt."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import asl, cnlbi, engine, generators
from . import model as m
from .canonical import model_json
from .diagnostics import Diagnostic, has_errors, render_json, render_text, sorted_diagnostics, want_color
from .semantics import check_model

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2


def _emit_diagnostics(diags: list[Diagnostic], as_json: bool) -> None:
    color = want_color(sys.stderr)
    for diag in sorted_diagnostics(diags):
        line = render_json(diag) if as_json else render_text(diag, color)
        print(line, file=sys.stderr)


def _syntax_for(path: str, explicit: str) -> str:
    if explicit != "auto":
        return explicit
    if path.endswith(".cnlbi"):
        return "cnlbi"
    if path.endswith(".asl"):
        return "asl"
    raise SystemExit_usage(f"cannot infer syntax for {path!r}; pass --syntax cnlbi|asl")


def SystemExit_usage(message: str) -> SystemExit:
    print(f"error: {message}", file=sys.stderr)
    return SystemExit(EXIT_USAGE)


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _parse_files(paths: list[str], syntax: str) -> tuple[m.SpecificationModel, list[Diagnostic]]:
    models = []
    diags: list[Diagnostic] = []
    for path in paths:
        if path == "-" and syntax == "auto":
            raise SystemExit_usage("reading from stdin requires an explicit --syntax")
        chosen = _syntax_for(path, syntax)
        source = _read_source(path)
        name = "<stdin>" if path == "-" else path
        parse = cnlbi.parse_cnlbi if chosen == "cnlbi" else asl.parse_asl
        model, file_diags = parse(source, name)
        models.append(model)
        diags.extend(file_diags)
    return m.merge_models(models), diags


def cmd_parse(args) -> int:
    model, diags = _parse_files(args.files, args.syntax)
    _emit_diagnostics(diags, args.json)
    if args.emit == "model-json":
        sys.stdout.write(model_json(model))
    return EXIT_DIAGNOSTICS if has_errors(diags) else EXIT_OK


def cmd_check(args) -> int:
    model, diags = _parse_files(args.files, args.syntax)
    report = check_model(model)
    diags = diags + list(report.diagnostics)
    _emit_diagnostics(diags, args.json)
    print(f"schema shape: {report.schema_shape}", file=sys.stderr)
    return EXIT_DIAGNOSTICS if has_errors(diags) else EXIT_OK


def cmd_convert(args) -> int:
    model, diags = _parse_files([args.file], args.syntax)
    if has_errors(diags):
        _emit_diagnostics(diags, args.json)
        return EXIT_DIAGNOSTICS
    emit = cnlbi.emit_cnlbi if args.to == "cnlbi" else asl.emit_asl
    text, emit_diags = emit(model)
    _emit_diagnostics(diags + emit_diags, args.json)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_fmt(args) -> int:
    syntax = _syntax_for(args.file, args.syntax)
    model, diags = _parse_files([args.file], syntax)
    if has_errors(diags):
        _emit_diagnostics(diags, args.json)
        return EXIT_DIAGNOSTICS
    emit = cnlbi.emit_cnlbi if syntax == "cnlbi" else asl.emit_asl
    text, emit_diags = emit(model)
    _emit_diagnostics(diags + emit_diags, args.json)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    model, diags = _parse_files(args.files, args.syntax)
    report = check_model(model)
    diags = diags + list(report.diagnostics)
    _emit_diagnostics(diags, args.json)
    if has_errors(diags):
        return EXIT_DIAGNOSTICS

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = set(args.only) if args.only else {"sql", "queries", "dashboard", "doc"}

    if "sql" in wanted:
        (out_dir / "schema.sql").write_text(generators.gen_schema_sql(model), encoding="utf-8")
    if "queries" in wanted:
        queries_dir = out_dir / "queries"
        queries_dir.mkdir(exist_ok=True)
        for uc in model.use_cases:
            for op in uc.operations:
                try:
                    sql = generators.gen_olap_sql(model, uc.id, op.id)
                except generators.GeneratorError as exc:
                    print(f"skipping {uc.id}/{op.id}: {exc.code} {exc}", file=sys.stderr)
                    continue
                (queries_dir / f"{uc.id}__{op.id}.sql").write_text(sql, encoding="utf-8")
    if "dashboard" in wanted:
        (out_dir / "dashboard.json").write_text(generators.gen_dashboard_manifest(model), encoding="utf-8")
    if "doc" in wanted:
        (out_dir / "requirements.md").write_text(generators.gen_requirements_doc(model), encoding="utf-8")
    return EXIT_OK


def cmd_olap(args) -> int:
    model, diags = _parse_files(args.files, args.syntax)
    report = check_model(model)
    diags = diags + list(report.diagnostics)
    if has_errors(diags):
        _emit_diagnostics(diags, args.json)
        return EXIT_DIAGNOSTICS

    cube, load_diags = engine.load_cube(model, args.data)
    diags = diags + load_diags
    _emit_diagnostics(diags, args.json)
    if has_errors(diags):
        return EXIT_DIAGNOSTICS

    bindings = {}
    for binding in args.bind or []:
        if "=" not in binding:
            raise SystemExit_usage(f"--bind expects key=value, got {binding!r}")
        key, _, value = binding.partition("=")
        bindings[key] = value

    try:
        result = engine.run_use_case(cube, args.usecase, args.op, bindings)
    except engine.EngineError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    render = engine.result_to_csv if args.format == "csv" else engine.result_to_table
    sys.stdout.write(render(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bispec", description="BI requirements compiler and OLAP runner")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, multi: bool = True):
        if multi:
            p.add_argument("files", nargs="+", help="input files (.cnlbi / .asl); '-' for stdin")
        else:
            p.add_argument("file", help="input file; '-' for stdin")
        p.add_argument("--syntax", choices=["cnlbi", "asl", "auto"], default="auto")
        p.add_argument("--json", action="store_true", help="machine-readable diagnostics on stderr")

    p = sub.add_parser("parse", help="parse files and optionally emit the canonical model")
    add_common(p)
    p.add_argument("--emit", choices=["model-json"], default=None)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="parse and run all semantic checks")
    add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("convert", help="convert one file to the other syntax")
    add_common(p, multi=False)
    p.add_argument("--to", choices=["cnlbi", "asl"], required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("fmt", help="canonical re-emit in the same syntax")
    add_common(p, multi=False)
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("gen", help="generate SQL, dashboard manifest, and documentation")
    add_common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--only", action="append", choices=["sql", "queries", "dashboard", "doc"])
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("olap", help="run one OLAP operation against a data package")
    add_common(p)
    p.add_argument("--data", required=True, help="data package directory (manifest.toml + CSVs)")
    p.add_argument("--usecase", required=True)
    p.add_argument("--op", required=True)
    p.add_argument("--bind", action="append", metavar="KEY=VALUE")
    p.add_argument("--format", choices=["csv", "table"], default="table")
    p.set_defaults(func=cmd_olap)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        raise exc
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
