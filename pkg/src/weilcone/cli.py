"""Command-line front end.

Exit codes: 0 success, 1 usage error (bad model, bad literal, bad flags),
2 solver error or failing corpus case.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from weilcone import corpus, lattice, models
from weilcone.engine import CONDITIONS
from weilcone.queries import QueryError, run_query

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model(p):
    p.add_argument("--model", required=True, help="built-in 'name:p1,p2' or path to a config file")


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weilcone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def query(name, help_, divisor=False, m=None):
        p = sub.add_parser(name, help=help_)
        _add_model(p)
        _add_format(p)
        if divisor:
            p.add_argument("--divisor", required=True, help="class literal 'a,b,...' or K, L, K-L, L-K")
        if m == "optional":
            p.add_argument("--m", type=int, default=None)
        elif m is not None:
            p.add_argument("--m", type=int, default=m)
        return p

    query("pullback", "limiting pullback f^*(C_D)", divisor=True)
    query("natural-pullback", "natural pullback of m*C_D", divisor=True, m=1)
    query("canonical", "K_Y representative and ord_E of K-/K+", m="optional")
    query("restriction", "restriction of f^*(C_D) to E", divisor=True)
    query("cartier", "Q-Cartier and numerically Cartier tests", divisor=True)
    query("antisymmetry", "check f^*(-D) = -f^*(D)", divisor=True)
    query("multiplier-ideal", "triviality of the lt+ multiplier ideal")
    p = query("certificate", "boundary certificate for an M-condition")
    p.add_argument("--condition", required=True, choices=sorted(CONDITIONS))
    p = query("classify", "full singularity report at E")
    p.add_argument("--m-samples", default="1-12", help="e.g. '1-12' or '1,2,6'")
    p = query("kappa-sequence", "natural pullback coefficients for m = 1..N", divisor=True)
    p.add_argument("--m-max", type=int, default=12)

    p = sub.add_parser("corpus", help="worked-example corpus")
    p.add_argument("action", choices=("run", "list"))
    p.add_argument("--filter", default=None, help="substring of case id or model")
    p.add_argument("--file", default=corpus.DEFAULT_CORPUS)
    _add_format(p)

    p = sub.add_parser("model", help="built-in models and config files")
    p.add_argument("action", choices=("list", "show", "validate"))
    p.add_argument("target", nargs="?", help="model spec (show) or config path (validate)")
    _add_format(p)
    return parser


def _inputs(args) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key in ("divisor", "m", "condition", "m_samples", "m_max"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _emit_text(query: str, model: str, outputs: Dict[str, Any], flags: List[str]) -> None:
    print(f"{query} on {model}")
    _print_tree(outputs, indent="  ")
    for f in flags:
        print(f"  flag: {f}")


def _human(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, str) and value.endswith("/1"):
        return value[:-2]
    return str(value)


def _print_tree(node: Dict[str, Any], indent: str) -> None:
    for key, value in node.items():
        if key == "pretty":
            continue
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_tree(value, indent + "  ")
        elif isinstance(value, list):
            text = ",".join(_human(v) for v in value)
            if key == "restriction" and "pretty" in node:
                text += f" (= {node['pretty']})"
            print(f"{indent}{key}: {text}")
        elif isinstance(value, str) and "\n" in value:
            print(f"{indent}{key}:")
            for line in value.rstrip("\n").splitlines():
                print(f"{indent}  {line}")
        else:
            print(f"{indent}{key}: {_human(value)}")


def _record(query, model, inputs, outputs=None, flags=(), error=None) -> str:
    rec = {
        "query": query,
        "model": model,
        "inputs": inputs,
        "outputs": outputs or {},
        "flags": list(flags),
        "status": "ok" if error is None else "error",
    }
    if error is not None:
        rec["error"] = error
    return json.dumps(rec, sort_keys=True)


def cmd_compute(args) -> int:
    inputs = _inputs(args)
    try:
        model = models.from_spec(args.model)
    except (models.ModelError, OSError) as exc:
        return _fail(args, args.model, inputs, f"usage-error: {exc}", EXIT_USAGE)
    try:
        outputs, flags = run_query(args.command, model, inputs)
    except QueryError as exc:
        return _fail(args, model.display, inputs, f"usage-error: {exc}", EXIT_USAGE)
    except lattice.LatticeError as exc:
        return _fail(args, model.display, inputs, f"{exc.kind}: {exc}", EXIT_SOLVER)
    if args.format == "json":
        print(_record(args.command, model.display, inputs, outputs, flags))
    else:
        _emit_text(args.command, model.display, outputs, flags)
    return EXIT_OK


def _fail(args, model, inputs, message, code) -> int:
    if args.format == "json":
        print(_record(args.command, model, inputs, error=message))
    print(f"weilcone: {message}", file=sys.stderr)
    return code


def cmd_corpus(args) -> int:
    try:
        cases = corpus.load_corpus(args.file)
    except corpus.CorpusError as exc:
        print(f"weilcone: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.action == "list":
        for c in cases:
            if args.filter is None or args.filter in c.id or args.filter in c.model_name:
                print(f"{c.id}  [{c.kind}] {c.operation} on {c.model_name}")
        return EXIT_OK
    results = corpus.run_corpus(cases, args.filter)
    if args.format == "json":
        sys.stdout.write(corpus.format_json(results))
    else:
        sys.stdout.write(corpus.format_table(results))
    if not results:
        print("weilcone: no corpus case matches the filter", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if all(r.passed for r in results) else EXIT_SOLVER


def cmd_model(args) -> int:
    if args.action == "list":
        for name, (_, _, params) in models.BUILTINS.items():
            print(f"{name}:{params}")
        return EXIT_OK
    if not args.target:
        print(f"weilcone: model {args.action} needs a target", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.action == "show":
            model = models.from_spec(args.target)
        else:
            model = models.load_config(args.target)
    except OSError as exc:
        print(f"weilcone: cannot read {args.target}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except models.ModelError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_USAGE
    if args.action == "validate":
        print(f"OK {model.display} (rank {model.rank})")
        return EXIT_OK
    outputs, flags = run_query("model-show", model, {})
    if args.format == "json":
        print(_record("model-show", model.display, {}, outputs, flags))
    else:
        sys.stdout.write(outputs["config"])
        for f in flags:
            print(f"# flag: {f}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "corpus":
        return cmd_corpus(args)
    if args.command == "model":
        return cmd_model(args)
    return cmd_compute(args)


if __name__ == "__main__":
    sys.exit(main())
