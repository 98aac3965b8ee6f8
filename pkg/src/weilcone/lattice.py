"""Exact rational kernel: class vectors, polyhedral cones and the two solvers.

Everything here is exact.  Scalars are :class:`fractions.Fraction`; a class
vector is a plain tuple of fractions whose basis is owned by the model that
produced it.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

Rat = Fraction
ClassVector = Tuple[Fraction, ...]

DEFAULT_HARD_CAP = 10_000

_RAT_RE = re.compile(r"-?[0-9]+(/[1-9][0-9]*)?")


class LatticeError(Exception):
    """Base class of solver errors; ``kind`` is a stable machine-readable tag."""

    kind = "lattice-error"


class DimensionMismatch(LatticeError):
    kind = "dimension-mismatch"


class InfeasibleForAllS(LatticeError):
    kind = "infeasible-for-all-s"


class UnboundedBelow(LatticeError):
    kind = "unbounded-below"


class SearchExhausted(LatticeError):
    kind = "search-exhausted"


class NonIntegral(LatticeError):
    kind = "non-integral"


# ---------------------------------------------------------------------------
# scalars


def parse_rat(text: str) -> Fraction:
    """Parse a rational literal ``-?[0-9]+(/[1-9][0-9]*)?``."""
    s = text.strip()
    if not _RAT_RE.fullmatch(s):
        raise ValueError(f"malformed rational literal {text!r}")
    return Fraction(s)


def format_rat(q: Fraction) -> str:
    """Bit-exact ``p/q`` form, denominator always written."""
    return f"{q.numerator}/{q.denominator}"


PLUS_INFINITY = "+inf"
MINUS_INFINITY = "-inf"


@dataclass(frozen=True)
class ExtRat:
    """A rational, or an infinity marker, plus whether an infimum is attained."""

    value: Union[Fraction, str]
    attained: bool = True

    @property
    def finite(self) -> bool:
        return isinstance(self.value, Fraction)

    def __str__(self) -> str:
        tag = "" if self.attained or not self.finite else " (not attained)"
        return f"{self.value}{tag}"


# ---------------------------------------------------------------------------
# class vectors


def vec(values: Iterable[Union[int, str, Fraction]]) -> ClassVector:
    out = []
    for v in values:
        out.append(parse_rat(v) if isinstance(v, str) else Fraction(v))
    return tuple(out)


def parse_vector(text: str) -> ClassVector:
    parts = [p for p in text.split(",")]
    if not parts or any(not p.strip() for p in parts):
        raise ValueError(f"malformed class vector {text!r}")
    return tuple(parse_rat(p) for p in parts)


def format_vector(v: Sequence[Fraction]) -> str:
    return ",".join(str(x) for x in v)


def _check_dim(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise DimensionMismatch(f"dimension mismatch: {len(a)} vs {len(b)}")


def add(a: ClassVector, b: ClassVector) -> ClassVector:
    _check_dim(a, b)
    return tuple(x + y for x, y in zip(a, b))


def sub(a: ClassVector, b: ClassVector) -> ClassVector:
    _check_dim(a, b)
    return tuple(x - y for x, y in zip(a, b))


def scale(q, a: ClassVector) -> ClassVector:
    q = Fraction(q)
    return tuple(q * x for x in a)


def neg(a: ClassVector) -> ClassVector:
    return tuple(-x for x in a)


def combo(s, L: ClassVector, D: ClassVector) -> ClassVector:
    """``s*L - D``, the class whose effectivity every infimum here is about."""
    _check_dim(L, D)
    s = Fraction(s)
    return tuple(s * l - d for l, d in zip(L, D))


def dot(phi: Sequence[int], v: Sequence[Fraction]) -> Fraction:
    _check_dim(phi, v)
    total = 0
    for p, x in zip(phi, v):
        total += p * x
    return total


def is_integral(v: Sequence[Fraction]) -> bool:
    return all(x.denominator == 1 for x in v)


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in v)


def proportionality(D: Sequence[Fraction], L: Sequence[Fraction]) -> Optional[Fraction]:
    """Return ``r`` with ``D == r*L`` exactly, or ``None``.

    ``L`` must be nonzero; a zero ``L`` never certifies anything.
    """
    _check_dim(D, L)
    pivot = next((i for i, x in enumerate(L) if x != 0), None)
    if pivot is None:
        return None
    r = Fraction(D[pivot]) / L[pivot]
    if all(Fraction(d) == r * l for d, l in zip(D, L)):
        return r
    return None


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list:
    """Basis of ``{x : rows @ x = 0}`` by exact Gauss-Jordan elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            x[pc] = -m[i][fc]
        basis.append(tuple(x))
    return basis


def primitive(v: Sequence[Fraction]) -> Tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    lcm = 1
    for x in v:
        lcm = lcm * Fraction(x).denominator // math.gcd(lcm, Fraction(x).denominator)
    ints = [int(Fraction(x) * lcm) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return tuple(x // g for x in ints) if g else tuple(ints)


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class EffConeSpec:
    """Closed polyhedral cone ``{x : <phi_j, x> >= 0 for all j}``.

    ``rays`` are optional generators, kept only for validation and display.
    """

    facets: Tuple[Tuple[int, ...], ...]
    rays: Tuple[Tuple[int, ...], ...] = field(default=())

    @property
    def dim(self) -> int:
        return len(self.facets[0]) if self.facets else len(self.rays[0])

    def problems(self) -> list:
        """All invariant violations, as human-readable strings."""
        out = []
        if not self.facets:
            out.append("cone has no facets")
            return out
        n = len(self.facets[0])
        for j, phi in enumerate(self.facets):
            if len(phi) != n:
                out.append(f"facet {j} has length {len(phi)}, expected {n}")
                continue
            g = 0
            for x in phi:
                g = math.gcd(g, x)
            if g != 1:
                out.append(f"facet {j} {list(phi)} is not primitive (gcd {g})")
        if out:
            return out
        for i, r in enumerate(self.rays):
            if len(r) != n:
                out.append(f"ray {i} has length {len(r)}, expected {n}")
                continue
            bad = [j for j, phi in enumerate(self.facets) if dot(phi, r) < 0]
            if bad:
                out.append(f"ray {i} {list(r)} violates facet {bad[0]}")
            if all(dot(phi, r) <= 0 for phi in self.facets):
                out.append(f"ray pair {list(r)} / {[-x for x in r]} both lie in the cone")
        for v in nullspace(self.facets, n):
            p = primitive(v)
            out.append(f"cone is not salient: ray pair {list(p)} / {[-x for x in p]} both lie in the cone")
        return out


def orthant(n: int) -> EffConeSpec:
    basis = tuple(tuple(1 if i == j else 0 for i in range(n)) for j in range(n))
    return EffConeSpec(facets=basis, rays=basis)


def cone_member(cone: EffConeSpec, v: Sequence[Fraction]) -> bool:
    if len(v) != cone.dim:
        raise DimensionMismatch(f"vector of length {len(v)} in cone of dimension {cone.dim}")
    return all(dot(phi, v) >= 0 for phi in cone.facets)


def ratio_infimum(cone: EffConeSpec, L: ClassVector, D: ClassVector) -> ExtRat:
    """``inf{s : s*L - D in cone}`` via facet ratios.

    Each facet gives a half-line ``s * <phi,L> >= <phi,D>``; the feasible set
    is their intersection, so the infimum is the largest finite lower end.
    """
    if len(L) != cone.dim or len(D) != cone.dim:
        raise DimensionMismatch(
            f"cone dimension {cone.dim}, L has {len(L)}, D has {len(D)}"
        )
    best: Optional[Fraction] = None
    for phi in cone.facets:
        pl = dot(phi, L)
        pd = dot(phi, D)
        if pl < 0:
            raise InfeasibleForAllS(f"L violates facet {list(phi)}")
        if pl == 0:
            if pd > 0:
                raise InfeasibleForAllS(
                    f"facet {list(phi)} vanishes on L but is positive on D"
                )
            continue
        ratio = Fraction(pd) / pl
        if best is None or ratio > best:
            best = ratio
    if best is None:
        raise UnboundedBelow("no facet is positive on L")
    return ExtRat(best, attained=True)


def ceil_rat(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def int_feasible_min(
    z_oracle: Callable[[ClassVector], bool],
    L: ClassVector,
    D: ClassVector,
    m: int,
    lower_hint: Fraction,
    gap_bound: int,
    hard_cap: int = DEFAULT_HARD_CAP,
    q_oracle: Optional[Callable[[ClassVector], bool]] = None,
) -> int:
    """Smallest integer ``k >= ceil(lower_hint)`` with ``z_oracle(k*L - m*D)``.

    The scan is allowed ``gap_bound`` steps past the first ``k`` at which
    ``q_oracle`` accepts (or past the start, without ``q_oracle``), and never
    more than ``hard_cap`` steps in total.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if not is_integral(D):
        raise NonIntegral(f"D={format_vector(D)} is not integral")
    _check_dim(L, D)
    mD = scale(m, D)
    start = ceil_rat(Fraction(lower_hint))
    first_q = None if q_oracle is not None else start
    k = start
    while k - start <= hard_cap:
        v = combo(k, L, mD)
        if z_oracle(v):
            return k
        if first_q is None and q_oracle(v):
            first_q = k
        if first_q is not None and k - first_q >= gap_bound:
            break
        k += 1
    raise SearchExhausted(
        f"no integrally effective k*L - {m}*D for k in [{start}, {k}]"
        f" (gap bound {gap_bound}, hard cap {hard_cap})"
    )
