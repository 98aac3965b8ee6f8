"""Polarized base varieties reduced to class-lattice data.

A :class:`PolarizedModel` carries everything the cone engine needs about
``(V, L)``: a basis of the rational class group, rational and integral
effectivity rules, the canonical class and the polarization.  Five built-in
families are provided, and arbitrary polyhedral models can be loaded from a
small ``key = value`` config format.
"""
from __future__ import annotations

import dataclasses
import os

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from weilcone import lattice
from weilcone.lattice import (
    ClassVector,
    DimensionMismatch,
    EffConeSpec,
    NonIntegral,
    cone_member,
    is_integral,
    orthant,
)

LINEAR = "linear"
NUMERICAL = "numerical"

RULE_CONE = "cone-integral"
RULE_ELLIPTIC = "elliptic-curve"
KNOWN_RULES = (RULE_CONE, RULE_ELLIPTIC)

CAVEAT_PLUS_M = (
    "class-level-plus-m: the orthant rule forces K+_m = -1 at E for every m;"
    " a finer computation on the actual surface gives K+_m > -1, which class"
    " data cannot see"
)
CAVEAT_GENERICITY = (
    "genericity-fails: the boundaries that realize K-_m here restrict to"
    " singular divisors on V, so blowing up the vertex does not resolve the"
    " pair; certificates only bound the discrepancy at E"
)


class ModelError(ValueError):
    """Invalid model declaration; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class PolarizedModel:
    name: str
    rank: int
    basis: Tuple[str, ...]
    K: ClassVector
    L: ClassVector
    eff_cone: Optional[EffConeSpec] = None
    zeff: str = RULE_CONE
    equivalence: str = LINEAR
    gap_bound: int = 0
    log_resolution: bool = True
    normal: bool = True
    # coordinates spanning a Pic^0-type subgroup (numerically trivial)
    num_trivial: Tuple[int, ...] = ()
    caveats: Tuple[str, ...] = ()
    label: str = ""

    @property
    def polyhedral(self) -> bool:
        return self.zeff == RULE_CONE

    @property
    def display(self) -> str:
        return self.label or self.name

    def problems(self) -> List[str]:
        out = []
        if self.rank < 1:
            out.append(f"rank must be positive, got {self.rank}")
            return out
        if len(self.basis) != self.rank:
            out.append(f"basis has {len(self.basis)} labels, rank is {self.rank}")
        for key, v in (("K", self.K), ("L", self.L)):
            if len(v) != self.rank:
                out.append(f"{key} has length {len(v)}, rank is {self.rank}")
            elif not is_integral(v):
                out.append(f"{key} = {lattice.format_vector(v)} is not integral")
        if self.equivalence not in (LINEAR, NUMERICAL):
            out.append(f"unknown equivalence mode {self.equivalence!r}")
        if self.zeff not in KNOWN_RULES:
            out.append(f"unknown effectivity rule {self.zeff!r}")
        if self.gap_bound < 0:
            out.append(f"gap_bound must be nonnegative, got {self.gap_bound}")
        if out:
            return out
        if self.zeff == RULE_CONE:
            if self.eff_cone is None:
                out.append("cone-integral rule needs facets")
                return out
            cone_problems = self.eff_cone.problems()
            out.extend(cone_problems)
            if cone_problems:
                return out
            if self.eff_cone.dim != self.rank:
                out.append(f"facets have length {self.eff_cone.dim}, rank is {self.rank}")
                return out
            try:
                lattice.ratio_infimum(self.eff_cone, self.L, (Fraction(0),) * self.rank)
            except lattice.LatticeError as exc:
                out.append(f"L is not a valid polarization: {exc}")
        else:
            if self.L[0] <= 0:
                out.append("L must have positive degree")
            if any(x != 0 for x in self.L[1:]) or any(x != 0 for x in self.K[1:]):
                # K and L are chosen with trivial Pic^0 part
                out.append("K and L must have zero Pic^0 coordinates")
        if any(i < 0 or i >= self.rank for i in self.num_trivial):
            out.append("numerically trivial coordinate index out of range")
        return out

    def validated(self) -> "PolarizedModel":
        problems = self.problems()
        if problems:
            raise ModelError(problems)
        return self


def _check(model: PolarizedModel, v: Sequence[Fraction]) -> None:
    if len(v) != model.rank:
        raise DimensionMismatch(
            f"class of length {len(v)} for model {model.display} of rank {model.rank}"
        )


def q_effective(model: PolarizedModel, v: Sequence[Fraction]) -> bool:
    """Is ``v`` Q-linearly equivalent to an effective Q-divisor?"""
    _check(model, v)
    if model.zeff == RULE_ELLIPTIC:
        deg = v[0]
        return deg > 0 or (deg == 0 and all(x == 0 for x in v[1:]))
    return cone_member(model.eff_cone, v)


def z_effective(model: PolarizedModel, v: Sequence[Fraction]) -> bool:
    """Does the integral class ``v`` have a nonzero section (or is it zero)?"""
    _check(model, v)
    if not is_integral(v):
        raise NonIntegral(f"{lattice.format_vector(v)} is not integral")
    if model.zeff == RULE_ELLIPTIC:
        # Riemann-Roch on an elliptic curve
        return v[0] >= 1 or all(x == 0 for x in v)
    return cone_member(model.eff_cone, v)


def numerical_part(model: PolarizedModel, v: Sequence[Fraction]) -> ClassVector:
    return tuple(x for i, x in enumerate(v) if i not in model.num_trivial)


def resolve_divisor(model: PolarizedModel, text: str) -> ClassVector:
    """Parse a divisor literal or one of the shorthands ``K``, ``L``, ``K-L``, ``L-K``."""
    key = text.replace(" ", "")
    shorthands = {
        "K": model.K,
        "L": model.L,
        "K-L": lattice.sub(model.K, model.L),
        "L-K": lattice.sub(model.L, model.K),
        "-K": lattice.neg(model.K),
        "-L": lattice.neg(model.L),
    }
    if key in shorthands:
        return shorthands[key]
    v = lattice.parse_vector(key)
    _check(model, v)
    return v


# ---------------------------------------------------------------------------
# built-in families


def _ints(params, count, name):
    if len(params) != count:
        raise ModelError([f"{name} takes {count} integer parameter(s), got {len(params)}"])
    try:
        return [int(p) for p in params]
    except (TypeError, ValueError):
        raise ModelError([f"{name} parameters must be integers, got {list(params)}"]) from None


def projective_line(d: int) -> PolarizedModel:
    if d < 1:
        raise ModelError([f"projective_line needs d >= 1, got {d}"])
    return PolarizedModel(
        name="projective_line",
        label=f"projective_line:{d}",
        rank=1,
        basis=("pt",),
        eff_cone=orthant(1),
        K=(Fraction(-2),),
        L=(Fraction(d),),
    ).validated()


def p1xp1(a: int, b: int) -> PolarizedModel:
    if a < 1 or b < 1:
        raise ModelError([f"p1xp1 needs a, b >= 1, got ({a}, {b})"])
    return PolarizedModel(
        name="p1xp1",
        label=f"p1xp1:{a},{b}",
        rank=2,
        basis=("f1", "f2"),
        eff_cone=orthant(2),
        K=(Fraction(-2), Fraction(-2)),
        L=(Fraction(a), Fraction(b)),
    ).validated()


def elliptic_curve(d: int, g: int) -> PolarizedModel:
    """Degree plus ``g`` coordinates along independent non-torsion points."""
    if d < 3:
        raise ModelError([f"elliptic_curve needs degree d >= 3 for an embedding, got {d}"])
    if g < 0:
        raise ModelError([f"elliptic_curve needs g >= 0, got {g}"])
    return PolarizedModel(
        name="elliptic_curve",
        label=f"elliptic_curve:{d},{g}",
        rank=1 + g,
        basis=("deg",) + tuple(f"tau{i + 1}" for i in range(g)),
        zeff=RULE_ELLIPTIC,
        K=(Fraction(0),) * (1 + g),
        L=(Fraction(d),) + (Fraction(0),) * g,
        num_trivial=tuple(range(1, 1 + g)),
    ).validated()


def elliptic_fibration(e: int) -> PolarizedModel:
    if e < 1:
        raise ModelError([f"elliptic_fibration needs e >= 1, got {e}"])
    return PolarizedModel(
        name="elliptic_fibration",
        label=f"elliptic_fibration:{e}",
        rank=2,
        basis=("fiber", "section"),
        eff_cone=orthant(2),
        K=(Fraction(1), Fraction(0)),
        L=(Fraction(1), Fraction(e)),
        caveats=(CAVEAT_PLUS_M,),
    ).validated()


def fano_fourfold_AW(n: int) -> PolarizedModel:
    if n < 2:
        raise ModelError([f"fano_fourfold_AW needs n >= 2 for very ampleness, got {n}"])
    K = (Fraction(-3), Fraction(-2))
    boundary = (Fraction(0), Fraction(1))
    L = lattice.sub(lattice.scale(-n, K), boundary)
    return PolarizedModel(
        name="fano_fourfold_AW",
        label=f"fano_fourfold_AW:{n}",
        rank=2,
        basis=("H", "S0"),
        eff_cone=orthant(2),
        K=K,
        L=L,
        caveats=(CAVEAT_GENERICITY,),
    ).validated()


BUILTINS = {
    "projective_line": (projective_line, 1, "d"),
    "p1xp1": (p1xp1, 2, "a,b"),
    "elliptic_curve": (elliptic_curve, 2, "d,g"),
    "elliptic_fibration": (elliptic_fibration, 1, "e"),
    "fano_fourfold_AW": (fano_fourfold_AW, 1, "n"),
}


def builtin(name: str, params: Sequence = ()) -> PolarizedModel:
    try:
        factory, count, _ = BUILTINS[name]
    except KeyError:
        raise ModelError([f"unknown model {name!r}; known: {', '.join(BUILTINS)}"]) from None
    return factory(*_ints(params, count, name))


def from_spec(spec: str) -> PolarizedModel:
    """``name:p1,p2`` for a built-in, otherwise a path to a config file."""
    if ":" in spec and not os.path.exists(spec):
        name, _, rest = spec.partition(":")
        params = [p for p in rest.split(",") if p.strip()]
        return builtin(name.strip(), params)
    if spec in BUILTINS:
        raise ModelError([f"model {spec!r} needs parameters: {spec}:{BUILTINS[spec][2]}"])
    if os.path.exists(spec):
        return load_config(spec)
    raise ModelError([f"unknown model {spec!r}"])


# ---------------------------------------------------------------------------
# config files

_KEYS = (
    "name",
    "rank",
    "basis",
    "equivalence",
    "facets",
    "zeff",
    "K",
    "L",
    "gap_bound",
    "log_resolution",
    "normal",
    "caveats",
)
_REQUIRED = ("name", "rank", "K", "L")
# caveats are named in configs by the tag before the colon
CAVEATS = {c.split(":", 1)[0]: c for c in (CAVEAT_PLUS_M, CAVEAT_GENERICITY)}
_BOOL = {"true": True, "false": False}


def parse_config(text: str, source: str = "<config>") -> PolarizedModel:
    """Parse and validate a ``[model]`` section; raise :class:`ModelError`."""
    diags: List[str] = []
    raw: Dict[str, Tuple[int, str]] = {}
    seen_section = False
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if stripped != "[model]":
                diags.append(f"{source}:{lineno}: unknown section {stripped}")
            elif seen_section:
                diags.append(f"{source}:{lineno}: only one [model] section is allowed")
            seen_section = True
            continue
        if not seen_section:
            diags.append(f"{source}:{lineno}: key outside a [model] section")
            continue
        key, eq, value = stripped.partition("=")
        key = key.strip()
        if not eq:
            diags.append(f"{source}:{lineno}: expected 'key = value'")
            continue
        if key not in _KEYS:
            diags.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        if key in raw:
            diags.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        raw[key] = (lineno, value.strip())
    if not seen_section:
        diags.append(f"{source}: missing [model] section")
    for key in _REQUIRED:
        if key not in raw:
            diags.append(f"{source}: missing required key {key!r}")
    if diags:
        raise ModelError(diags)

    def where(key):
        return f"{source}:{raw[key][0]}"

    fields_: dict = {"name": raw["name"][1], "label": raw["name"][1]}
    try:
        fields_["rank"] = int(raw["rank"][1])
    except ValueError:
        diags.append(f"{where('rank')}: rank must be an integer")
    for key in ("K", "L"):
        try:
            fields_[key] = lattice.parse_vector(raw[key][1])
        except ValueError as exc:
            diags.append(f"{where(key)}: {exc}")
    if "basis" in raw:
        fields_["basis"] = tuple(s.strip() for s in raw["basis"][1].split(","))
    elif "rank" in fields_:
        fields_["basis"] = tuple(f"e{i + 1}" for i in range(fields_["rank"]))
    if "equivalence" in raw:
        mode = raw["equivalence"][1]
        if mode not in (LINEAR, NUMERICAL):
            diags.append(f"{where('equivalence')}: equivalence must be 'linear' or 'numerical'")
        fields_["equivalence"] = mode
    if "zeff" in raw:
        rule = raw["zeff"][1]
        if rule not in KNOWN_RULES:
            diags.append(f"{where('zeff')}: unknown rule {rule!r}; known: {', '.join(KNOWN_RULES)}")
        fields_["zeff"] = rule
    if "facets" in raw:
        try:
            facets = tuple(
                tuple(int(x) for x in part.split(","))
                for part in raw["facets"][1].split(";")
                if part.strip()
            )
            fields_["eff_cone"] = EffConeSpec(facets=facets)
        except ValueError:
            diags.append(f"{where('facets')}: facets must be ';'-separated integer covectors")
    if "gap_bound" in raw:
        try:
            fields_["gap_bound"] = int(raw["gap_bound"][1])
        except ValueError:
            diags.append(f"{where('gap_bound')}: gap_bound must be an integer")
    for key, attr in (("log_resolution", "log_resolution"), ("normal", "normal")):
        if key in raw:
            if raw[key][1] not in _BOOL:
                diags.append(f"{where(key)}: {key} must be 'true' or 'false'")
            else:
                fields_[attr] = _BOOL[raw[key][1]]
    if "caveats" in raw:
        tags = [t.strip() for t in raw["caveats"][1].split(",") if t.strip()]
        unknown = [t for t in tags if t not in CAVEATS]
        if unknown:
            diags.append(f"{where('caveats')}: unknown caveat {unknown[0]!r}; known: {', '.join(CAVEATS)}")
        else:
            fields_["caveats"] = tuple(CAVEATS[t] for t in tags)
    if diags:
        raise ModelError(diags)
    if fields_.get("zeff") == RULE_ELLIPTIC:
        fields_["num_trivial"] = tuple(range(1, fields_["rank"]))
    model = PolarizedModel(**fields_)
    problems = model.problems()
    if problems:
        anchor = {
            "facet": "facets",
            "facets": "facets",
            "ray": "facets",
            "cone": "facets",
            "K": "K",
            "L": "L",
            "basis": "basis",
            "rank": "rank",
        }
        located = []
        for p in problems:
            key = anchor.get(p.split()[0])
            key = key if key in raw else None
            located.append(f"{where(key) if key else source}: {p}")
        raise ModelError(located)
    return model


def load_config(path: str) -> PolarizedModel:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=path)


def dump_config(model: PolarizedModel) -> str:
    """Inverse of :func:`parse_config` for any model it can represent."""
    lines = [
        "[model]",
        f"name = {model.display}",
        f"rank = {model.rank}",
        f"basis = {', '.join(model.basis)}",
        f"equivalence = {model.equivalence}",
    ]
    if model.eff_cone is not None:
        lines.append("facets = " + "; ".join(",".join(str(x) for x in f) for f in model.eff_cone.facets))
    lines += [
        f"zeff = {model.zeff}",
        f"K = {lattice.format_vector(model.K)}",
        f"L = {lattice.format_vector(model.L)}",
        f"gap_bound = {model.gap_bound}",
        f"log_resolution = {str(model.log_resolution).lower()}",
        f"normal = {str(model.normal).lower()}",
    ]
    if model.caveats:
        lines.append("caveats = " + ", ".join(c.split(":", 1)[0] for c in model.caveats))
    return "\n".join(lines) + "\n"


def with_equivalence(model: PolarizedModel, mode: str) -> PolarizedModel:
    return dataclasses.replace(model, equivalence=mode)


REFERENCE_MODELS = (
    "projective_line:1",
    "projective_line:2",
    "p1xp1:1,2",
    "p1xp1:2,3",
    "elliptic_curve:3,1",
    "elliptic_fibration:3",
    "fano_fourfold_AW:2",
)
