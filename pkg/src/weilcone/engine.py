"""Pullbacks and discrepancies on the blow-up of a cone vertex.

Let ``X`` be the projective cone over a polarized ``(V, L)`` and ``f: Y -> X``
the blow-up of the vertex, with exceptional divisor ``E``.  ``E`` is a copy of
``V`` with normal bundle ``-L``.  Every Weil divisor on ``X`` is linearly
equivalent to a cone ``C_D`` over a class ``D`` on ``V``, and every divisor on
``Y`` that matters here is ``f^{-1}_* C_G + e E``.  Such a divisor is stored as
a :class:`BlowupDivisor` ``(G, e)``.

The canonical class of ``Y`` is normalized so that ``f_* K_Y = K_X =
C_{K_V - L}``; adjunction on ``E`` then fixes its ``E``-coefficient to ``-2``.
All ``ord_E`` values below are relative to that choice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from weilcone import lattice
from weilcone.lattice import ClassVector, ExtRat, LatticeError
from weilcone.models import (
    NUMERICAL,
    RULE_ELLIPTIC,
    PolarizedModel,
    numerical_part,
    q_effective,
    z_effective,
)

MINUS = "minus"
PLUS = "plus"

KY_COEFF = Fraction(-2)


class NotLogResolution(LatticeError):
    kind = "not-log-resolution"


@dataclass(frozen=True)
class BlowupDivisor:
    """``f^{-1}_* C_strict + e_coeff * E``.

    ``exact`` is false when ``e_coeff`` is an infimum that is not attained.
    """

    strict: ClassVector
    e_coeff: Fraction
    exact: bool = True


@dataclass(frozen=True)
class CartierResult:
    q_cartier: Optional[Fraction]
    num_cartier: Optional[Fraction]


@dataclass(frozen=True)
class MultiplierIdeal:
    ceil_coeff: int
    trivial: bool


# condition -> (upper bound on r, strict?)  with discrepancy at E equal to -1 - r
CONDITIONS: Dict[str, Tuple[Fraction, bool]] = {
    "lc": (Fraction(0), False),
    "klt": (Fraction(0), True),
    "canonical": (Fraction(-1), False),
    "terminal": (Fraction(-1), True),
}

# M-condition name for each boundary condition
M_CONDITION = {"lc": "M>=-1", "klt": "M>-1", "canonical": "M>=0", "terminal": "M>0"}


@dataclass(frozen=True)
class BoundaryCertificate:
    """Class-level witness ``B = r L - K_V`` for a boundary ``C_B`` on ``X``.

    Only the discrepancy along ``E`` is certified; the blow-up being a log
    resolution of the pair for a general member of ``|B|`` is assumed.
    """

    condition: str
    r: Fraction
    B: ClassVector
    discrepancy_at_e: Fraction
    genericity_assumed: bool = True
    notes: Tuple[str, ...] = ()


@dataclass
class SingularityReport:
    model: str
    ord_k_minus: Fraction
    ord_k_plus: Fraction
    ord_k_minus_m: Dict[int, Fraction]
    ord_k_plus_m: Dict[int, Fraction]
    t_canonical: ExtRat
    lt_plus: Optional[bool]
    canonical_plus_at_e: bool
    terminal_plus_at_e: bool
    certificates: Dict[str, Optional[BoundaryCertificate]]
    m_condition_at_e: Dict[str, bool]
    j_plus_trivial: Optional[bool]
    assumption_flags: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# infimum and natural pullback coefficients


def t_invariant(model: PolarizedModel, D: ClassVector) -> ExtRat:
    """``inf{s : s L - D is Q-effective}``; the E-coefficient of ``f^* C_D``."""
    if len(D) != model.rank:
        raise lattice.DimensionMismatch(
            f"class of length {len(D)} for model {model.display} of rank {model.rank}"
        )
    if model.zeff == RULE_ELLIPTIC:
        # positive degree is always effective; degree zero only when trivial
        t = Fraction(D[0]) / model.L[0]
        return ExtRat(t, attained=q_effective(model, lattice.combo(t, model.L, D)))
    return lattice.ratio_infimum(model.eff_cone, model.L, D)


def kappa(model: PolarizedModel, D: ClassVector, m: int) -> int:
    """``min{k : k L - m D integrally effective}``.

    Sections of ``O_X(-m C_D)`` split by the cone grading into pieces of
    ``H^0(V, kL - mD)``, and the degree-``k`` piece vanishes to order ``k``
    along ``E``; the minimal ``k`` is the ``E``-coefficient of ``f^natural(mD)``.
    """
    t = t_invariant(model, D)
    return lattice.int_feasible_min(
        lambda v: z_effective(model, v),
        model.L,
        D,
        m,
        lower_hint=m * t.value,
        gap_bound=model.gap_bound,
        q_oracle=lambda v: q_effective(model, v),
    )


def natural_pullback(model: PolarizedModel, D: ClassVector, m: int = 1) -> BlowupDivisor:
    return BlowupDivisor(lattice.scale(m, D), Fraction(kappa(model, D, m)), exact=True)


def pullback(model: PolarizedModel, D: ClassVector) -> BlowupDivisor:
    t = t_invariant(model, D)
    return BlowupDivisor(tuple(D), t.value, exact=t.attained)


def canonical_on_blowup(model: PolarizedModel) -> BlowupDivisor:
    return BlowupDivisor(lattice.sub(model.K, model.L), KY_COEFF)


def restriction_to_E(model: PolarizedModel, B: BlowupDivisor) -> ClassVector:
    return lattice.combo(-B.e_coeff, model.L, lattice.neg(B.strict))


# ---------------------------------------------------------------------------
# relative canonical divisors


def _canonical_classes(model: PolarizedModel) -> Tuple[ClassVector, ClassVector]:
    kx = lattice.sub(model.K, model.L)
    return kx, lattice.neg(kx)


def relative_canonical(model: PolarizedModel, side: str, m: Optional[int] = None) -> Fraction:
    """``ord_E`` of ``K^-_{m,Y/X}`` / ``K^+_{m,Y/X}`` (or their limits when ``m`` is None)."""
    d_minus, d_plus = _canonical_classes(model)
    if side == MINUS:
        if m is None:
            return KY_COEFF - t_invariant(model, d_minus).value
        return KY_COEFF - Fraction(kappa(model, d_minus, m), m)
    if side == PLUS:
        if m is None:
            return KY_COEFF + t_invariant(model, d_plus).value
        return KY_COEFF + Fraction(kappa(model, d_plus, m), m)
    raise ValueError(f"side must be {MINUS!r} or {PLUS!r}, got {side!r}")


# ---------------------------------------------------------------------------
# Cartier tests


def cartier_test(model: PolarizedModel, D: ClassVector) -> CartierResult:
    """Cone classes are Q-Cartier exactly when proportional to ``L``."""
    if len(D) != model.rank:
        raise lattice.DimensionMismatch(
            f"class of length {len(D)} for model {model.display} of rank {model.rank}"
        )
    q = None if model.equivalence == NUMERICAL else lattice.proportionality(D, model.L)
    num = lattice.proportionality(numerical_part(model, D), numerical_part(model, model.L))
    return CartierResult(q, num)


def is_numerically_trivial(model: PolarizedModel, v: ClassVector) -> bool:
    return lattice.is_zero(numerical_part(model, v))


def antisymmetry_check(model: PolarizedModel, D: ClassVector) -> bool:
    """``f^*(-D) == -f^*(D)``, i.e. ``t(D) + t(-D) == 0``."""
    return t_invariant(model, D).value + t_invariant(model, lattice.neg(D)).value == 0


# ---------------------------------------------------------------------------
# multiplier ideal and boundaries


def multiplier_ideal_trivial(model: PolarizedModel) -> MultiplierIdeal:
    """Triviality of ``f_* O_Y(ceil(K_Y + f^*(-K_X)))`` on the vertex blow-up.

    The strict parts of ``K_Y`` and ``f^*(-K_X)`` cancel, so only the
    ``E``-coefficient matters.
    """
    if not model.log_resolution:
        raise NotLogResolution(
            f"model {model.display} does not declare the vertex blow-up a log resolution"
        )
    c = lattice.ceil_rat(relative_canonical(model, PLUS))
    return MultiplierIdeal(c, c >= 0)


def boundary_certificate(model: PolarizedModel, condition: str) -> Optional[BoundaryCertificate]:
    """Witness ``B = r L - K_V`` with ``-1 - r`` meeting ``condition``, or None."""
    try:
        bound, strict = CONDITIONS[condition]
    except KeyError:
        raise ValueError(f"unknown condition {condition!r}; known: {', '.join(CONDITIONS)}") from None
    r_min = t_invariant(model, model.K)
    if r_min.attained:
        ok = r_min.value < bound if strict else r_min.value <= bound
        r = r_min.value
    else:
        # every r above an open infimum is effective; take one strictly inside
        ok = r_min.value < bound
        r = (r_min.value + bound) / 2
    if not ok:
        return None
    B = lattice.combo(r, model.L, model.K)
    if not q_effective(model, B):
        raise LatticeError(f"internal: certificate class {lattice.format_vector(B)} is not effective")
    return BoundaryCertificate(
        condition=condition,
        r=r,
        B=B,
        discrepancy_at_e=-1 - r,
        genericity_assumed=True,
        notes=tuple(c for c in model.caveats if c.startswith("genericity")),
    )


def _meets(value: Fraction, condition: str) -> bool:
    bound, strict = CONDITIONS[condition]
    # discrepancy bound is -1 - (r bound)
    target = -1 - bound
    return value > target if strict else value >= target


def classify(model: PolarizedModel, m_samples: Iterable[int] = range(1, 13)) -> SingularityReport:
    m_samples = sorted(set(m_samples))
    k_minus = relative_canonical(model, MINUS)
    k_plus = relative_canonical(model, PLUS)
    k_minus_m = {m: relative_canonical(model, MINUS, m) for m in m_samples}
    k_plus_m = {m: relative_canonical(model, PLUS, m) for m in m_samples}
    flags: List[str] = []
    if not model.normal:
        flags.append("normality-not-declared: cone formulas assume a normal cone")
    if model.log_resolution:
        lt_plus: Optional[bool] = k_plus > -1
        j_plus: Optional[bool] = multiplier_ideal_trivial(model).trivial
    else:
        lt_plus = None
        j_plus = None
        flags.append("not-log-resolution: only values at E are reported")
    certs = {c: boundary_certificate(model, c) for c in CONDITIONS}
    at_e = {c: any(_meets(v, c) for v in k_minus_m.values()) for c in CONDITIONS}
    flags.append("certificates-assume-genericity: boundaries certify the discrepancy at E only")
    flags.extend(model.caveats)
    return SingularityReport(
        model=model.display,
        ord_k_minus=k_minus,
        ord_k_plus=k_plus,
        ord_k_minus_m=k_minus_m,
        ord_k_plus_m=k_plus_m,
        t_canonical=t_invariant(model, model.K),
        lt_plus=lt_plus,
        canonical_plus_at_e=k_plus >= 0,
        terminal_plus_at_e=k_plus > 0,
        certificates=certs,
        m_condition_at_e=at_e,
        j_plus_trivial=j_plus,
        assumption_flags=flags,
    )
