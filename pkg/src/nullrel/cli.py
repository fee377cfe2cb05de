"""Command-line front end.

Exit status: 0 on success, 1 when a yes/no question (a sentence, a membership
test, a constraint check) comes out negative, 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence, TextIO

from . import constraints as C
from . import fole as F
from .decomposed import omega_f
from .instance import (InstanceError, InstanceN, Schema, decompose, decomposed_to_json, instance_to_json,
                       load_instance, partial_to_json, to_partial)
from .lexer import ParseError
from .nra import check_arity, eval_nra, expand_derived, parse_nra, to_text as nra_text
from .translate import TranslationTooLarge, fole_to_nra, omega
from .values import NULL, format_value, parse_literal, sorted_rows, to_json

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: Optional[str], required: bool = True) -> Optional[InstanceN]:
    if path is None:
        if required:
            raise UsageError("--instance is required")
        return None
    try:
        with open(path, "rb") as fh:
            return load_instance(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _parse_schema(text: Optional[str]) -> Optional[Schema]:
    if not text:
        return None
    arities = {}
    for part in text.split(","):
        name, _, n = part.partition("=")
        if not n.strip().isdigit():
            raise UsageError(f"bad --schema entry {part!r}; expected NAME=ARITY")
        arities[name.strip()] = int(n)
    return Schema.of(**arities)


def _tuple(text: Optional[str]) -> Optional[tuple]:
    if text is None:
        return None
    if text.strip() == "":
        return ()
    return tuple(parse_literal(c) for c in text.split(","))


# output


def _emit_rows(out: TextIO, rows, fmt: str, columns: Optional[Sequence[str]] = None) -> None:
    rows = sorted_rows(rows)
    if fmt == "json":
        doc = {"rows": [[to_json(v) for v in r] for r in rows]}
        if columns is not None:
            doc = {"columns": list(columns), **doc}
        out.write(json.dumps(doc) + "\n")
        return
    if columns:
        out.write("\t".join(columns) + "\n")
    for r in rows:
        out.write("\t".join(format_value(v) for v in r) + "\n")


def _emit_bool(out: TextIO, value: bool, fmt: str, word=("true", "false")) -> int:
    text = word[0] if value else word[1]
    out.write((json.dumps({"result": value}) if fmt == "json" else text) + "\n")
    return EXIT_OK if value else EXIT_FALSE


def _emit_text(out: TextIO, text: str, fmt: str) -> None:
    out.write((json.dumps({"result": text}) if fmt == "json" else text) + "\n")


# verbs


def _eval(args, out: TextIO, inst: InstanceN) -> int:
    tup = _tuple(args.tuple)
    if args.sql is not None:
        from .sqlfo import compile_to_nra, exec_sql, parse_query
        q = parse_query(args.sql, inst.schema)
        if args.via_nra:
            rows = eval_nra(compile_to_nra(q, inst.schema), inst)
        else:
            rows = exec_sql(q, inst)
        if tup is not None:
            return _emit_bool(out, tup in rows, args.format)
        _emit_rows(out, rows, args.format)
        return EXIT_OK
    if args.nra is not None:
        e = parse_nra(args.nra)
        rows = eval_nra(e, inst)
        if tup is not None:
            return _emit_bool(out, tup in rows, args.format)
        if check_arity(e, inst.schema) == 0:
            return _emit_bool(out, bool(rows), args.format)
        _emit_rows(out, rows, args.format)
        return EXIT_OK
    f = F.parse_fole(args.fole)
    names = F.free_vars(f)
    part = to_partial(inst)
    if tup is not None or not names:
        tup = tup or ()
        if len(tup) != len(names):
            raise UsageError(f"--tuple needs {len(names)} values for free variables {', '.join(names) or '(none)'}")
        if any(v is NULL for v in tup):
            raise UsageError("free variables cannot be bound to NULL")
        return _emit_bool(out, F.satisfies(part, dict(zip(names, tup)), f), args.format)
    answers = F.answer_set(f, part)
    rows = [t.to_total() for t in answers]
    _emit_rows(out, rows, args.format, columns=names)
    return EXIT_OK


def cmd_eval(args, out: TextIO) -> int:
    if sum(x is not None for x in (args.sql, args.nra, args.fole)) != 1:
        raise UsageError("give exactly one of --sql, --nra, --fole")
    return _eval(args, out, _load(args.instance))


def _schema_for(args) -> Optional[Schema]:
    inst = _load(args.instance, required=False)
    return inst.schema if inst is not None else _parse_schema(args.schema)


def cmd_translate(args, out: TextIO) -> int:
    src, dst, text = args.source, args.to, args.query
    schema = _schema_for(args)
    if src == "sql":
        from .sqlfo import compile_to_nra, parse_query, rewrite_2vl, to_annf, Select
        if dst == "nra":
            if schema is None:
                raise UsageError("translating SQL to the algebra needs --instance or --schema")
            result = nra_text(compile_to_nra(parse_query(text, schema), schema))
        elif dst == "sql2vl":
            q = parse_query(text, schema)
            result = str(rewrite_2vl(q, schema))
        elif dst == "annf":
            q = parse_query(text, schema)
            if not isinstance(q, Select) or q.where is None:
                raise UsageError("annf needs a single SELECT with a WHERE clause")
            result = str(to_annf(q.where))
        else:
            raise UsageError(f"cannot translate sql to {dst}")
    elif src == "fole":
        f = F.parse_fole(text)
        if dst == "nra":
            result = nra_text(fole_to_nra(f, schema))
        elif dst == "srnf":
            result = F.to_text(F.to_srnf(f))
        elif dst == "decomposed":
            result = F.to_text(omega_f(f))
        elif dst == "noinfo":
            result = F.to_text(F.no_info_rewrite(f))
        else:
            raise UsageError(f"cannot translate fole to {dst}")
    elif src == "nra":
        e = parse_nra(text)
        if dst == "fole":
            if schema is None:
                raise UsageError("translating the algebra to the calculus needs --instance or --schema")
            tup = _tuple(args.tuple)
            if tup is None:
                raise UsageError("--tuple is required to build a membership formula")
            result = F.to_text(omega(e, tup, schema))
        elif dst == "core":
            result = nra_text(expand_derived(e, schema))
        else:
            raise UsageError(f"cannot translate nra to {dst}")
    else:
        raise UsageError(f"unknown source language {src!r}")
    _emit_text(out, result, args.format)
    return EXIT_OK


def _ddl_constraints(path: str, schema: Schema) -> list:
    from .sqlfo import CreateTable, parse_script
    try:
        with open(path, encoding="utf-8") as fh:
            stmts = parse_script(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    tables = {s.name: [c.name for c in s.columns] for s in stmts if isinstance(s, CreateTable)}
    decls = []
    for s in stmts:
        if isinstance(s, CreateTable):
            decls.extend(C.constraints_from_create(s))
    return C.resolve_foreign_columns(decls, tables)


def cmd_check(args, out: TextIO) -> int:
    inst = _load(args.instance)
    decls = [C.parse_constraint(s, inst.schema) for s in args.constraint or []]
    if args.ddl:
        decls.extend(_ddl_constraints(args.ddl, inst.schema))
    if not decls:
        raise UsageError("give at least one --constraint or --ddl")
    decls = C.validate_all(decls, inst.schema)
    results = []
    for d in decls:
        if args.method == "direct":
            ok = C.check(d, inst)
        elif args.method == "denial":
            ok = C.check_by_denials(d, inst, args.variant)
        else:
            ok = C.check_by_fole(d, inst, args.variant)
        bad = C.violations(d, inst) if not ok and args.method == "direct" else []
        results.append((d, ok, bad))
    if args.format == "json":
        doc = [{"constraint": str(d), "satisfied": ok,
                "violations": [_jsonable(v) for v in bad]} for d, ok, bad in results]
        out.write(json.dumps(doc) + "\n")
    else:
        for d, ok, bad in results:
            line = "satisfied" if ok else "violated"
            out.write(line + "\n" if len(results) == 1 else f"{d}: {line}\n")
            for v in bad:
                out.write(f"  {_show(v)}\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FALSE


def _jsonable(v):
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return [_jsonable(x) for x in v]
    return [to_json(x) for x in v]


def _show(v) -> str:
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return " / ".join(_show(x) for x in v)
    return "\t".join(format_value(x) for x in v)


def cmd_convert(args, out: TextIO) -> int:
    inst = _load(args.instance)
    if args.to == "total":
        doc = instance_to_json(inst)
    elif args.to == "partial":
        doc = partial_to_json(to_partial(inst))
    else:
        doc = decomposed_to_json(decompose(inst))
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


_REPL_HELP = """commands:
  sql <query>          evaluate a SQL query
  nra <expr>           evaluate an algebra expression
  fole <formula>       evaluate a calculus formula (answers if open)
  check <constraint>   check a constraint, e.g. 'fk p 2 -> q 1'
  help                 this text
  quit                 leave"""


def cmd_repl(args, out: TextIO, stdin: TextIO = None) -> int:
    inst = _load(args.instance)
    stdin = stdin or sys.stdin
    interactive = stdin.isatty()
    while True:
        if interactive:
            out.write("nullrel> ")
            out.flush()
        line = stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line or line.startswith("--"):
            continue
        verb, _, rest = line.partition(" ")
        verb = verb.lower()
        if verb in ("quit", "exit", "\\q"):
            break
        if verb == "help":
            out.write(_REPL_HELP + "\n")
            continue
        ns = argparse.Namespace(sql=None, nra=None, fole=None, tuple=None, format=args.format, via_nra=False)
        try:
            if verb in ("sql", "nra", "fole"):
                setattr(ns, verb, rest)
                _eval(ns, out, inst)
            elif verb == "check":
                d = C.parse_constraint(rest, inst.schema)
                out.write(("satisfied" if C.check(d, inst) else "violated") + "\n")
            else:
                out.write(f"unknown command {verb!r}; try 'help'\n")
        except _ERRORS as exc:
            out.write(f"error: {exc}\n")
    return EXIT_OK


def _errors():
    from .sqlfo import SqlError
    return (ParseError, InstanceError, F.FormulaError, C.ConstraintError, SqlError, TranslationTooLarge,
            UsageError, ValueError)


_ERRORS: tuple = ()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nullrel", description="Query databases with SQL nulls in SQL, "
                                "the null-aware algebra and the calculus with a null term.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, instance_required=False):
        sp.add_argument("--instance", metavar="PATH", required=instance_required, help="instance JSON file")
        sp.add_argument("--format", choices=("text", "json"), default="text")

    e = sub.add_parser("eval", help="evaluate a query over an instance")
    common(e, instance_required=True)
    e.add_argument("--sql", metavar="S")
    e.add_argument("--nra", metavar="S")
    e.add_argument("--fole", metavar="S")
    e.add_argument("--tuple", metavar="V1,V2,...", help="membership test, or assignment of free variables")
    e.add_argument("--via-nra", action="store_true", help="evaluate SQL through its algebra translation")

    t = sub.add_parser("translate", help="translate between the query languages")
    common(t)
    t.add_argument("--from", dest="source", choices=("sql", "nra", "fole"), required=True)
    t.add_argument("--to", required=True,
                   choices=("nra", "fole", "sql2vl", "annf", "srnf", "decomposed", "noinfo", "core"))
    t.add_argument("--schema", metavar="R=N,...", help="relation arities when no instance is given")
    t.add_argument("--tuple", metavar="V1,V2,...")
    t.add_argument("query")

    c = sub.add_parser("check", help="check integrity constraints")
    common(c, instance_required=True)
    c.add_argument("--constraint", action="append", metavar="SPEC",
                   help="'unique R c1,c2', 'pk R c', 'notnull R c' or 'fk R f1 -> S u1' (repeatable)")
    c.add_argument("--ddl", metavar="PATH", help="CREATE TABLE script whose constraints are checked")
    c.add_argument("--method", choices=("direct", "denial", "fole"), default="direct")
    c.add_argument("--variant", choices=C.VARIANTS, default="corrected")

    v = sub.add_parser("convert", help="write an instance in another representation")
    common(v, instance_required=True)
    v.add_argument("--to", choices=("total", "partial", "decomposed"), required=True)
    v.add_argument("--output", metavar="PATH")

    r = sub.add_parser("repl", help="interactive loop over one instance")
    common(r, instance_required=True)
    return p


_COMMANDS = {"eval": cmd_eval, "translate": cmd_translate, "check": cmd_check, "convert": cmd_convert,
             "repl": cmd_repl}


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    global _ERRORS
    _ERRORS = _errors()
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.verb](args, out)
    except _ERRORS as exc:
        err.write(f"nullrel {args.verb}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
