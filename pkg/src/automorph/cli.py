"""Command-line front end.

stdout carries only the artifact (model text, match list or verdict);
diagnostics and statistics go to stderr.  Exit codes: 0 success,
1 parse/validation diagnostics, 2 application or semantics errors, 3 usage.
"""
from __future__ import annotations

import argparse
import json
import sys

from .flatten import fig3_rule, flatten
from .matching import find_rule_matches
from .model import DiagnosticError, SemanticsError
from .rewrite import DEFAULT_MAX_ITERATIONS, Strategy, apply
from .rules import load_rule
from .syntax import model_to_json, parse_model_with_diagnostics, print_model
from .traces import counterexample_text, equivalent

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_SEMANTICS, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Failed(Exception):
    def __init__(self, code: int):
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None


def _load_model(path: str, err):
    model, diagnostics = parse_model_with_diagnostics(_read(path))
    for d in diagnostics:
        print(d.format(path), file=err)
    if model is None:
        raise _Failed(EXIT_DIAGNOSTICS)
    return model


def _load_rule(path: str, name, err, text=None):
    try:
        return load_rule(text if text is not None else _read(path), name)
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            print(d.format(path), file=err)
        raise _Failed(EXIT_DIAGNOSTICS) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="automorph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="validate a model file")
    p.add_argument("model")
    p.add_argument("--ast", action="store_true", help="dump the model as JSON")

    p = sub.add_parser("print", help="pretty-print a model in canonical form")
    p.add_argument("model")

    p = sub.add_parser("matches", help="list matches of a rule")
    p.add_argument("rules")
    p.add_argument("model")
    p.add_argument("--rule", required=True)

    p = sub.add_parser("apply", help="apply a rule to a model")
    p.add_argument("rules")
    p.add_argument("model")
    p.add_argument("--rule", required=True)
    p.add_argument("--strategy", choices=["once", "fixpoint"], default="once")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITERATIONS)

    p = sub.add_parser("flatten", help="flatten a hierarchical model")
    p.add_argument("model")

    p = sub.add_parser("equiv", help="compare two models by bounded traces")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--depth", type=int, required=True)

    p = sub.add_parser("fig3", help="apply the bundled forwarding rule to fixpoint")
    p.add_argument("model")
    return parser


def _run_apply(model_path, rule, strategy, out, err):
    model = _load_model(model_path, err)
    report = apply(model, rule, strategy)
    for name, summary in report.log:
        print(f"applied {name}: {summary}".rstrip(), file=err)
    for warning in report.warnings:
        print(f"{model_path}: warning {warning}", file=err)
    print(f"applications: {report.applications}", file=err)
    out.write(print_model(report.final_model))


def _dispatch(args, out, err) -> None:
    if args.command == "parse":
        model = _load_model(args.model, err)
        if args.ast:
            out.write(json.dumps(model_to_json(model), indent=2) + "\n")
    elif args.command == "print":
        out.write(print_model(_load_model(args.model, err)))
    elif args.command == "matches":
        rule = _load_rule(args.rules, args.rule, err)
        model = _load_model(args.model, err)
        order = rule.lhs.variables()
        for i, m in enumerate(find_rule_matches(rule, model), 1):
            out.write(f"#{i} {m.summary(order)}".rstrip() + "\n")
    elif args.command == "apply":
        if args.max_iter < 1:
            raise UsageError("--max-iter must be positive")
        rule = _load_rule(args.rules, args.rule, err)
        _run_apply(args.model, rule, Strategy(args.strategy, args.max_iter), out, err)
    elif args.command == "fig3":
        rule = _load_rule("fig3.rul", None, err, text=fig3_rule())
        _run_apply(args.model, rule, Strategy("fixpoint"), out, err)
    elif args.command == "flatten":
        out.write(print_model(flatten(_load_model(args.model, err))))
    elif args.command == "equiv":
        if args.depth < 0:
            raise UsageError("--depth must be non-negative")
        first = _load_model(args.first, err)
        second = _load_model(args.second, err)
        same, cex = equivalent(first, second, args.depth)
        out.write("equivalent\n" if same else f"differ: {counterexample_text(cex)}\n")


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _dispatch(args, out, err)
    except UsageError as exc:
        print(f"automorph: usage error: {exc}", file=err)
        return EXIT_USAGE
    except _Failed as exc:
        return exc.code
    except SemanticsError as exc:
        print(f"automorph: error {exc.code}: {exc.message}", file=err)
        return EXIT_SEMANTICS
    except DiagnosticError as exc:
        for d in exc.diagnostics:
            print(d.format(), file=err)
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
