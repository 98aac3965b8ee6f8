"""One entry point per computation, returning JSON-ready records.

The CLI and the corpus runner both go through :func:`run_query`, so what the
corpus checks is exactly what a user sees.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from weilcone import engine, lattice
from weilcone.lattice import format_rat
from weilcone.models import PolarizedModel, dump_config, resolve_divisor

QUERIES = (
    "pullback",
    "natural-pullback",
    "canonical",
    "restriction",
    "cartier",
    "antisymmetry",
    "multiplier-ideal",
    "certificate",
    "classify",
    "kappa-sequence",
    "model-show",
)

FLAG_NOT_ATTAINED = "limit-not-attained: the E-coefficient is an open infimum"


class QueryError(ValueError):
    """Bad query input (usage error, not a solver failure)."""


def rat(q) -> str:
    return format_rat(Fraction(q))


def vector(v) -> List[str]:
    return [rat(x) for x in v]


def opt_rat(q) -> Optional[str]:
    return None if q is None else rat(q)


def _divisor(model: PolarizedModel, inputs: Dict[str, Any], key: str = "divisor"):
    if key not in inputs:
        raise QueryError(f"missing input {key!r}")
    try:
        return resolve_divisor(model, str(inputs[key]))
    except (ValueError, lattice.DimensionMismatch) as exc:
        raise QueryError(f"bad divisor {inputs[key]!r}: {exc}") from None


def _positive_int(inputs, key, default=None) -> int:
    value = inputs.get(key, default)
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise QueryError(f"{key} must be a positive integer, got {value!r}") from None
    if n < 1 or str(value).strip() != str(n):
        raise QueryError(f"{key} must be a positive integer, got {value!r}")
    return n


def _m_samples(inputs) -> List[int]:
    raw = inputs.get("m_samples", "1-12")
    out = set()
    for part in str(raw).split(","):
        part = part.strip()
        lo, dash, hi = part.partition("-")
        try:
            if dash:
                out.update(range(int(lo), int(hi) + 1))
            else:
                out.add(int(part))
        except ValueError:
            raise QueryError(f"bad m sample list {raw!r}") from None
    if not out or min(out) < 1:
        raise QueryError(f"m samples must be positive integers, got {raw!r}")
    return sorted(out)


def _certificate(cert: Optional[engine.BoundaryCertificate]) -> Optional[Dict[str, Any]]:
    if cert is None:
        return None
    return {
        "condition": cert.condition,
        "r": rat(cert.r),
        "B": vector(cert.B),
        "discrepancy_at_e": rat(cert.discrepancy_at_e),
        "genericity_assumed": cert.genericity_assumed,
        "notes": list(cert.notes),
    }


def run_query(
    name: str, model: PolarizedModel, inputs: Dict[str, Any]
) -> Tuple[Dict[str, Any], List[str]]:
    """Compute query ``name``; return ``(outputs, flags)``.

    Raises :class:`QueryError` on bad input and
    :class:`weilcone.lattice.LatticeError` on solver failures.
    """
    flags: List[str] = []
    if name == "pullback":
        b = engine.pullback(model, _divisor(model, inputs))
        if not b.exact:
            flags.append(FLAG_NOT_ATTAINED)
        out = {"strict": vector(b.strict), "e": rat(b.e_coeff), "exact": b.exact}
    elif name == "natural-pullback":
        D = _divisor(model, inputs)
        if not lattice.is_integral(D):
            raise QueryError("natural pullback needs an integral divisor")
        b = engine.natural_pullback(model, D, _positive_int(inputs, "m", 1))
        out = {"strict": vector(b.strict), "e": rat(b.e_coeff), "exact": b.exact}
    elif name == "canonical":
        b = engine.canonical_on_blowup(model)
        out = {
            "strict": vector(b.strict),
            "e": rat(b.e_coeff),
            "k_minus": rat(engine.relative_canonical(model, engine.MINUS)),
            "k_plus": rat(engine.relative_canonical(model, engine.PLUS)),
        }
        if "m" in inputs and inputs["m"] is not None:
            m = _positive_int(inputs, "m")
            out["m"] = m
            out["k_minus_m"] = rat(engine.relative_canonical(model, engine.MINUS, m))
            out["k_plus_m"] = rat(engine.relative_canonical(model, engine.PLUS, m))
    elif name == "restriction":
        b = engine.pullback(model, _divisor(model, inputs))
        res = engine.restriction_to_E(model, b)
        if not b.exact:
            flags.append(FLAG_NOT_ATTAINED)
        out = {
            "restriction": vector(res),
            "pretty": pretty(model, res),
            "zero": lattice.is_zero(res),
            "numerically_trivial": engine.is_numerically_trivial(model, res),
            "e": rat(b.e_coeff),
            "exact": b.exact,
        }
    elif name == "cartier":
        c = engine.cartier_test(model, _divisor(model, inputs))
        out = {
            "equivalence": model.equivalence,
            "q_cartier": opt_rat(c.q_cartier),
            "num_cartier": opt_rat(c.num_cartier),
        }
    elif name == "antisymmetry":
        D = _divisor(model, inputs)
        out = {
            "antisymmetric": engine.antisymmetry_check(model, D),
            "t": rat(engine.t_invariant(model, D).value),
            "t_neg": rat(engine.t_invariant(model, lattice.neg(D)).value),
        }
    elif name == "multiplier-ideal":
        mi = engine.multiplier_ideal_trivial(model)
        out = {
            "ceil_coeff": mi.ceil_coeff,
            "trivial": mi.trivial,
            "k_plus": rat(engine.relative_canonical(model, engine.PLUS)),
        }
    elif name == "certificate":
        condition = str(inputs.get("condition", "")).lower()
        if condition not in engine.CONDITIONS:
            raise QueryError(
                f"condition must be one of {', '.join(engine.CONDITIONS)}, got {condition!r}"
            )
        cert = engine.boundary_certificate(model, condition)
        out = {
            "condition": condition,
            "m_condition": engine.M_CONDITION[condition],
            "present": cert is not None,
            "certificate": _certificate(cert),
        }
        if cert is not None:
            flags.append("genericity-assumed: certifies the discrepancy at E only")
            flags.extend(cert.notes)
    elif name == "classify":
        rep = engine.classify(model, _m_samples(inputs))
        out = {
            "k_minus": rat(rep.ord_k_minus),
            "k_plus": rat(rep.ord_k_plus),
            "k_minus_m": {str(m): rat(v) for m, v in rep.ord_k_minus_m.items()},
            "k_plus_m": {str(m): rat(v) for m, v in rep.ord_k_plus_m.items()},
            "t_canonical": rat(rep.t_canonical.value),
            "lt_plus": rep.lt_plus,
            "canonical_plus_at_e": rep.canonical_plus_at_e,
            "terminal_plus_at_e": rep.terminal_plus_at_e,
            "j_plus_trivial": rep.j_plus_trivial,
            "certificates": {c: _certificate(v) for c, v in rep.certificates.items()},
            "m_condition_at_e": {engine.M_CONDITION[c]: v for c, v in rep.m_condition_at_e.items()},
        }
        flags.extend(rep.assumption_flags)
    elif name == "kappa-sequence":
        D = _divisor(model, inputs)
        if not lattice.is_integral(D):
            raise QueryError("kappa sequence needs an integral divisor")
        m_max = _positive_int(inputs, "m_max", 12)
        t = engine.t_invariant(model, D)
        kap = {m: engine.kappa(model, D, m) for m in range(1, m_max + 1)}
        if not t.attained:
            flags.append(FLAG_NOT_ATTAINED)
        out = {
            "t": rat(t.value),
            "t_attained": t.attained,
            "kappa": {str(m): k for m, k in kap.items()},
            "ratio": {str(m): rat(Fraction(k, m)) for m, k in kap.items()},
        }
    elif name == "model-show":
        out = {
            "name": model.display,
            "rank": model.rank,
            "basis": list(model.basis),
            "K": vector(model.K),
            "L": vector(model.L),
            "equivalence": model.equivalence,
            "effectivity": model.zeff,
            "config": dump_config(model),
        }
        flags.extend(model.caveats)
    else:
        raise QueryError(f"unknown query {name!r}; known: {', '.join(QUERIES)}")
    return out, flags


def pretty(model: PolarizedModel, v: Sequence[Fraction]) -> str:
    """Write a class in the model's basis, e.g. ``-f1 + 2/3 f2``."""
    terms = []
    for x, label in zip(v, model.basis):
        if x == 0:
            continue
        mag = abs(x)
        coeff = "" if mag == 1 else f"{mag} "
        sign = "-" if x < 0 else "+"
        terms.append((sign, f"{coeff}{label}"))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text
