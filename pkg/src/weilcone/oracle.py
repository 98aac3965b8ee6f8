"""Brute-force reimplementations used to certify the engine.

Nothing here touches facet data or the solvers in :mod:`weilcone.lattice`:
the only inputs are the models' effectivity predicates.  The scans are slow
on purpose; they are meant to be obviously right, not fast.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

from weilcone import engine, lattice
from weilcone.models import (
    LINEAR,
    NUMERICAL,
    PolarizedModel,
    from_spec,
    q_effective,
    with_equivalence,
    z_effective,
)

QUERY_CAP = 10**6


class OracleError(Exception):
    kind = "oracle-error"


class BoundTooSmall(OracleError):
    kind = "bound-too-small"


class EmptyFeasibleSet(OracleError):
    kind = "empty-feasible-set"


class QueryCapExceeded(OracleError):
    kind = "query-cap-exceeded"


@dataclass(frozen=True)
class ScanConfig:
    """Scan bounds.

    The kappa scan for multiple ``m`` covers ``[-k_span*m, k_span*m]``.
    Random classes have coordinates in ``[-coord_bound, coord_bound]``.
    """

    denominator_bound: int = 60
    k_span: int = 100
    sample_count: int = 500
    coord_bound: int = 50
    integer_span: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if min(self.denominator_bound, self.k_span, self.sample_count, self.integer_span) < 1:
            raise ValueError("scan bounds must be positive")
        if self.coord_bound < 0:
            raise ValueError("coord_bound must be nonnegative")


class _Counter:
    def __init__(self, pred: Callable, cap: int = QUERY_CAP):
        self.pred = pred
        self.cap = cap
        self.count = 0

    def __call__(self, v) -> bool:
        self.count += 1
        if self.count > self.cap:
            raise QueryCapExceeded(f"more than {self.cap} effectivity queries")
        return self.pred(v)


@lru_cache(maxsize=64)
def farey_unit(n: int) -> Tuple[Fraction, ...]:
    """All fractions in ``(0, 1]`` with denominator at most ``n``, ascending."""
    return tuple(sorted({Fraction(p, q) for q in range(1, n + 1) for p in range(1, q + 1)}))


def oracle_infimum(
    model: PolarizedModel, D: Sequence[Fraction], cfg: ScanConfig = ScanConfig()
) -> Tuple[Fraction, bool]:
    """``inf{s : s L - D Q-effective}`` over rationals with bounded denominator.

    Returns the value and whether it is attained.  Effectivity of ``s L - D``
    is monotone in ``s`` because ``L`` itself is effective, which is what
    licenses the bracketing below.
    """
    L = model.L
    ask = _Counter(lambda v: q_effective(model, v))

    def eff(s: Fraction) -> bool:
        return ask(tuple(s * l - d for l, d in zip(L, D)))

    # integer bracket a < t <= a + 1
    if eff(Fraction(0)):
        a = 0
        while eff(Fraction(a)):
            a -= 1
            if -a > cfg.integer_span:
                raise BoundTooSmall(f"still effective at s={a}")
    else:
        a = 0
        while not eff(Fraction(a + 1)):
            a += 1
            if a > cfg.integer_span:
                raise BoundTooSmall(f"not effective up to s={a}")
    grid = [a + f for f in farey_unit(cfg.denominator_bound)]
    # smallest effective grid point; grid[-1] = a + 1 is effective
    lo, hi = 0, len(grid) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if eff(grid[mid]):
            hi = mid
        else:
            lo = mid + 1
    s_hi = grid[lo]
    s_lo = grid[lo - 1] if lo > 0 else Fraction(a)
    if eff(s_lo):
        raise OracleError("effectivity is not monotone in s")
    # an open infimum at s_lo shows up as every interior point being effective
    gap = s_hi - s_lo
    probes = [eff(s_lo + gap / j) for j in range(2, 9)] + [eff(s_hi - gap / j) for j in range(3, 9)]
    if all(probes):
        return s_lo, False
    if any(probes):
        raise BoundTooSmall(
            f"infimum lies strictly inside ({s_lo}, {s_hi}); raise denominator_bound"
        )
    return s_hi, True


def oracle_t(model: PolarizedModel, D: Sequence[Fraction], cfg: ScanConfig = ScanConfig()) -> Fraction:
    return oracle_infimum(model, D, cfg)[0]


def oracle_kappa(
    model: PolarizedModel, D: Sequence[Fraction], m: int, cfg: ScanConfig = ScanConfig()
) -> int:
    """Smallest ``k`` in the scan range with ``k L - m D`` integrally effective."""
    lo, hi = -cfg.k_span * m, cfg.k_span * m
    ask = _Counter(lambda v: z_effective(model, v))
    L = [int(x) for x in model.L]
    mD = [int(m * x) for x in D]
    for k in range(lo, hi + 1):
        if ask(tuple(k * l - d for l, d in zip(L, mD))):
            if k == lo:
                raise BoundTooSmall(f"feasible at the bottom of the range k={lo}")
            return k
    raise EmptyFeasibleSet(f"no feasible k in [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# randomized agreement harness


@dataclass
class SuiteReport:
    model: str
    samples: int
    passed: Counter = field(default_factory=Counter)
    failures: List[Tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, name: str, cond: bool, D=None, detail: str = "") -> None:
        if cond:
            self.passed[name] += 1
        else:
            self.failures.append((name, lattice.format_vector(D) if D is not None else "-", detail))

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        checks = sum(self.passed.values())
        return f"{status} {self.model}: {self.samples} samples, {checks} checks, {len(self.failures)} failures"


def random_class(model: PolarizedModel, rng: random.Random, bound: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(rng.randint(-bound, bound)) for _ in range(model.rank))


def _chain_checks(model: PolarizedModel, report: SuiteReport, ms: Sequence[int]) -> None:
    k_minus = engine.relative_canonical(model, engine.MINUS)
    k_plus = engine.relative_canonical(model, engine.PLUS)
    report.check("kminus-from-t", k_minus == -1 - engine.t_invariant(model, model.K).value)
    km = {m: engine.relative_canonical(model, engine.MINUS, m) for m in ms}
    kp = {m: engine.relative_canonical(model, engine.PLUS, m) for m in ms}
    report.check("chain-limits", k_minus <= k_plus, detail=f"K-={k_minus} K+={k_plus}")
    for m in ms:
        report.check("chain-m", km[m] <= k_minus and k_plus <= kp[m], detail=f"m={m}")
        for m2 in ms:
            if m2 % m == 0:
                report.check(
                    "chain-divisible",
                    km[m] <= km[m2] and kp[m2] <= kp[m],
                    detail=f"m={m} m'={m2}",
                )


def equivalence_suite(
    model: PolarizedModel,
    cfg: ScanConfig = ScanConfig(),
    ms: Sequence[int] = tuple(range(1, 13)),
) -> SuiteReport:
    """Compare oracle and engine on random integral classes and check the
    restriction/Cartier equivalences on the same samples."""
    rng = random.Random(f"{cfg.seed}:{model.display}")
    report = SuiteReport(model.display, cfg.sample_count)
    numerical = with_equivalence(model, NUMERICAL)
    _chain_checks(model, report, ms)
    for _ in range(cfg.sample_count):
        D = random_class(model, rng, cfg.coord_bound)
        try:
            _sample_checks(model, numerical, D, cfg, ms, report)
        except (lattice.LatticeError, OracleError) as exc:
            report.check("no-error", False, D, f"{exc.kind}: {exc}")
    return report


def _sample_checks(model, numerical, D, cfg, ms, report) -> None:
    t = engine.t_invariant(model, D)
    ot, oatt = oracle_infimum(model, D, cfg)
    report.check("t-agree", ot == t.value and oatt == t.attained, D, f"oracle {ot},{oatt} engine {t}")

    kap = {}
    for m in ms:
        kap[m] = engine.kappa(model, D, m)
        ok = oracle_kappa(model, D, m, cfg)
        report.check("kappa-agree", ok == kap[m], D, f"m={m} oracle {ok} engine {kap[m]}")
        report.check("kappa-over-m>=t", Fraction(kap[m], m) >= t.value, D, f"m={m}")
    for m in ms:
        for m2 in ms:
            if m + m2 in kap:
                report.check("kappa-subadditive", kap[m + m2] <= kap[m] + kap[m2], D, f"m={m} m'={m2}")
            if m2 % m == 0:
                report.check("kappa-multiple", kap[m2] <= (m2 // m) * kap[m], D, f"m={m} m'={m2}")

    pb = engine.pullback(model, D)
    res = engine.restriction_to_E(model, pb)
    if model.equivalence == LINEAR:
        cart = engine.cartier_test(model, D)
        report.check("zero-iff-proportional", lattice.is_zero(res) == (cart.q_cartier is not None), D)
        if cart.q_cartier is not None:
            report.check("qcartier-pullback", pb.e_coeff == cart.q_cartier and pb.exact, D)

    ncart = engine.cartier_test(numerical, D)
    anti = engine.antisymmetry_check(numerical, D)
    numtriv = engine.is_numerically_trivial(numerical, res)
    report.check(
        "three-way",
        anti == numtriv == (ncart.num_cartier is not None),
        D,
        f"antisym={anti} numtriv={numtriv} numCartier={ncart.num_cartier}",
    )
    report.check("numerical-mode-no-qcartier", ncart.q_cartier is None, D)

    if model.polyhedral:
        report.check(
            "antieffective",
            q_effective(model, lattice.neg(res)),
            D,
            f"restriction {lattice.format_vector(res)}",
        )


# ---------------------------------------------------------------------------
# pinned fixture values


@dataclass(frozen=True)
class PinnedValue:
    model: str
    D: Tuple[Fraction, ...]
    quantity: str
    m: Optional[int]
    value: Fraction


def parse_fixture_line(line: str) -> Optional[PinnedValue]:
    """``model;D;quantity;m?;value``; blank and ``#`` lines give None."""
    line = line.strip()
    if not line or line.startswith("#"):
        return None
    parts = [p.strip() for p in line.split(";")]
    if len(parts) != 5:
        raise ValueError(f"expected 5 ';'-separated fields, got {len(parts)}: {line!r}")
    model, d, quantity, m, value = parts
    return PinnedValue(
        model=model,
        D=lattice.parse_vector(d),
        quantity=quantity,
        m=int(m) if m else None,
        value=lattice.parse_rat(value),
    )


def format_fixture_line(p: PinnedValue) -> str:
    m = "" if p.m is None else str(p.m)
    return f"{p.model};{lattice.format_vector(p.D)};{p.quantity};{m};{p.value}"


def load_fixtures(path: str) -> List[PinnedValue]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            p = parse_fixture_line(line)
            if p is not None:
                out.append(p)
    return out


def oracle_value(p: PinnedValue, cfg: ScanConfig = ScanConfig()) -> Fraction:
    model = from_spec(p.model)
    if p.quantity == "t":
        return oracle_t(model, p.D, cfg)
    if p.quantity == "kappa":
        return Fraction(oracle_kappa(model, p.D, p.m, cfg))
    raise ValueError(f"unknown quantity {p.quantity!r}")
