"""Worked-example corpus: cases as data, a runner, and its report."""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from weilcone import lattice
from weilcone.models import ModelError, PolarizedModel, from_spec, parse_config
from weilcone.queries import QueryError, run_query

DEFAULT_CORPUS = os.path.join(os.path.dirname(__file__), "data", "corpus.json")

KINDS = ("reference", "derived", "trivial")

_RAT = re.compile(r"-?[0-9]+(/[1-9][0-9]*)?")


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class CorpusCase:
    id: str
    operation: str
    inputs: Dict[str, Any]
    expected: Dict[str, Any]
    kind: str
    anchor: str = ""
    model: Optional[str] = None
    config: Optional[str] = None
    expect_flags: tuple = ()

    def load_model(self) -> PolarizedModel:
        if self.config is not None:
            return parse_config(self.config, source=f"<case {self.id}>")
        return from_spec(self.model)

    @property
    def model_name(self) -> str:
        return self.model if self.model is not None else f"inline:{self.id}"


@dataclass
class CaseResult:
    case: CorpusCase
    passed: bool
    outputs: Dict[str, Any] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    mismatches: List[str] = field(default_factory=list)
    error: Optional[str] = None

    def record(self) -> Dict[str, Any]:
        rec = {
            "case": self.case.id,
            "model": self.case.model_name,
            "inputs": self.case.inputs,
            "outputs": self.outputs,
            "flags": self.flags,
            "status": "ok" if self.error is None else "error",
            "expected": self.case.expected,
            "verdict": "PASS" if self.passed else "FAIL",
        }
        if self.error is not None:
            rec["error"] = self.error
        return rec


def _case_from_dict(d: Dict[str, Any]) -> CorpusCase:
    try:
        case = CorpusCase(
            id=d["id"],
            operation=d["operation"],
            inputs=d.get("inputs", {}),
            expected=d["expected"],
            kind=d["kind"],
            anchor=d.get("anchor", ""),
            model=d.get("model"),
            config=d.get("config"),
            expect_flags=tuple(d.get("expect_flags", ())),
        )
    except KeyError as exc:
        raise CorpusError(f"case {d.get('id', '?')} is missing field {exc}") from None
    if case.kind not in KINDS:
        raise CorpusError(f"case {case.id}: kind must be one of {KINDS}")
    if (case.model is None) == (case.config is None):
        raise CorpusError(f"case {case.id}: give exactly one of 'model' or 'config'")
    if case.kind == "reference" and not case.anchor:
        raise CorpusError(f"case {case.id}: reference cases need an anchor")
    return case


def load_corpus(path: str = DEFAULT_CORPUS) -> List[CorpusCase]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from None
    cases = [_case_from_dict(d) for d in data["cases"]]
    ids = [c.id for c in cases]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate case ids in corpus")
    return sorted(cases, key=lambda c: c.id)


def normalize(value: Any) -> Any:
    """Bring expected and computed values to one comparable form."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        if _RAT.fullmatch(s):
            return Fraction(s)
        if "," in s and all(_RAT.fullmatch(p.strip()) for p in s.split(",")):
            return tuple(Fraction(p.strip()) for p in s.split(","))
        return s
    if isinstance(value, (list, tuple)):
        return tuple(normalize(v) for v in value)
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    return value


def _lookup(outputs: Dict[str, Any], path: str):
    node: Any = outputs
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(path)
        node = node[part]
    return node


def run_case(case: CorpusCase) -> CaseResult:
    try:
        model = case.load_model()
        outputs, flags = run_query(case.operation, model, case.inputs)
    except (ModelError, QueryError, lattice.LatticeError) as exc:
        kind = getattr(exc, "kind", "usage-error")
        return CaseResult(case, False, error=f"{kind}: {exc}")
    mismatches = []
    for key, want in sorted(case.expected.items()):
        try:
            got = _lookup(outputs, key)
        except KeyError:
            mismatches.append(f"{key}: missing from outputs")
            continue
        if isinstance(got, list) and isinstance(want, str):
            # vector literal, possibly of rank one
            want = want.split(",")
        if normalize(got) != normalize(want):
            mismatches.append(f"{key}: expected {want!r}, got {got!r}")
    for prefix in case.expect_flags:
        if not any(f.startswith(prefix) for f in flags):
            mismatches.append(f"flag {prefix!r} not raised")
    return CaseResult(case, not mismatches, outputs, flags, mismatches)


def run_corpus(cases: List[CorpusCase], pattern: Optional[str] = None) -> List[CaseResult]:
    selected = [c for c in cases if pattern is None or pattern in c.id or pattern in c.model_name]
    return [run_case(c) for c in selected]


def _brief(case: CorpusCase) -> str:
    return ", ".join(f"{k}={v}" for k, v in sorted(case.expected.items()))


def format_table(results: List[CaseResult]) -> str:
    lines = []
    width = max((len(r.case.id) for r in results), default=4)
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        line = f"{verdict}  {r.case.id:<{width}}  [{r.case.kind}] {r.case.operation}: {_brief(r.case)}"
        lines.append(line)
        if r.error:
            lines.append(f"      error: {r.error}")
        for mm in r.mismatches:
            lines.append(f"      {mm}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed} passed, {len(results) - passed} failed, {len(results)} total")
    return "\n".join(lines) + "\n"


def format_json(results: List[CaseResult]) -> str:
    return "".join(json.dumps(r.record(), sort_keys=True) + "\n" for r in results)
