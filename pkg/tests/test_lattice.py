from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weilcone import lattice
from weilcone.lattice import (
    DimensionMismatch,
    EffConeSpec,
    InfeasibleForAllS,
    NonIntegral,
    SearchExhausted,
    UnboundedBelow,
    cone_member,
    int_feasible_min,
    orthant,
    ratio_infimum,
    vec,
)

Q = Fraction


def grid_infimum(cone, L, D, denominator_bound=60, lo=-20, hi=20):
    """Smallest s = p/q (q <= bound) in [lo, hi] with s*L - D in the cone."""
    candidates = sorted(
        {Q(p, q) for q in range(1, denominator_bound + 1) for p in range(lo * q, hi * q + 1)}
    )
    for s in candidates:
        if all(sum(f * (s * l - d) for f, l, d in zip(phi, L, D)) >= 0 for phi in cone.facets):
            return s
    return None


def test_rational_literals():
    assert lattice.parse_rat("-3/6") == Q(-1, 2)
    assert lattice.format_rat(Q(4, 2)) == "2/1"
    for bad in ("1/0", "1.5", "+2", "1/-2", "", "1/02"):
        with pytest.raises(ValueError):
            lattice.parse_rat(bad)


@pytest.mark.parametrize("v,expected", [((0, 0), True), ((1, -1), False), ((3, 4), True)])
def test_cone_member_orthant(v, expected):
    assert cone_member(orthant(2), vec(v)) is expected


def test_cone_member_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cone_member(orthant(2), vec((1, 2, 3)))


def test_ratio_infimum_canonical_of_one_two_quadric():
    t = ratio_infimum(orthant(2), vec((1, 2)), vec((-2, -2)))
    assert t.value == -1 and t.attained


def test_ratio_infimum_zero_class():
    cone = EffConeSpec(facets=((1, 0), (-1, 2)))
    assert ratio_infimum(cone, vec((2, 3)), vec((0, 0))).value == 0


def test_ratio_infimum_matches_grid_oracle():
    # frozen from grid_infimum(orthant(2), (2, 3), (-4, -5)) == -5/3
    cone, L, D = orthant(2), vec((2, 3)), vec((-4, -5))
    assert grid_infimum(cone, L, D) == Q(-5, 3)
    assert ratio_infimum(cone, L, D).value == Q(-5, 3)


def test_ratio_infimum_errors():
    cone = orthant(2)
    with pytest.raises(InfeasibleForAllS):
        ratio_infimum(cone, vec((1, 0)), vec((0, 1)))
    with pytest.raises(InfeasibleForAllS):
        ratio_infimum(cone, vec((1, -1)), vec((0, 0)))
    with pytest.raises(UnboundedBelow):
        ratio_infimum(cone, vec((0, 0)), vec((0, 0)))
    with pytest.raises(DimensionMismatch):
        ratio_infimum(cone, vec((1,)), vec((0, 0)))


def _cone_z(cone):
    return lambda v: cone_member(cone, v)


def test_int_feasible_min_conic():
    L, D = vec((2,)), vec((1,))
    t = ratio_infimum(orthant(1), L, D).value
    assert int_feasible_min(_cone_z(orthant(1)), L, D, 1, t, 0) == 1


def test_int_feasible_min_zero_class():
    for m in range(1, 6):
        assert int_feasible_min(_cone_z(orthant(2)), vec((1, 2)), vec((0, 0)), m, Q(0), 0) == 0


def test_int_feasible_min_brute_force_scan():
    L, D, m = vec((1, 2)), vec((-3, -4)), 5
    scan = next(
        k for k in range(-100, 101) if all(x >= 0 for x in lattice.combo(k, L, lattice.scale(m, D)))
    )
    assert scan == -10
    t = ratio_infimum(orthant(2), L, D).value
    assert int_feasible_min(_cone_z(orthant(2)), L, D, m, m * t, 0) == -10


def test_int_feasible_min_gap_and_errors():
    # an oracle that only accepts multiples of 3 needs a gap bound of 2
    def z(v):
        return v[0] >= 0 and v[0] % 3 == 0

    L, D = vec((1,)), vec((-1,))
    q = lambda v: v[0] >= 0
    assert int_feasible_min(z, L, D, 1, Q(0), 2, q_oracle=q) == 2
    with pytest.raises(SearchExhausted):
        int_feasible_min(z, L, D, 1, Q(0), 1, q_oracle=q)
    with pytest.raises(SearchExhausted):
        int_feasible_min(lambda v: False, L, D, 1, Q(0), 5, hard_cap=10)
    with pytest.raises(NonIntegral):
        int_feasible_min(z, L, vec(("1/2",)), 1, Q(0), 0)


def test_cone_spec_problems():
    assert orthant(3).problems() == []
    assert any("not primitive" in p for p in EffConeSpec(facets=((2, 0), (0, 1))).problems())
    assert any("not salient" in p for p in EffConeSpec(facets=((1, 0),)).problems())
    bad_ray = EffConeSpec(facets=((1, 0), (0, 1)), rays=((1, -1),))
    assert any("violates" in p for p in bad_ray.problems())


def test_nullspace_and_proportionality():
    ns = lattice.nullspace([(1, 1, 0)], 3)
    assert len(ns) == 2
    for v in ns:
        assert v[0] + v[1] == 0
    assert lattice.proportionality(vec((3, 6)), vec((1, 2))) == 3
    assert lattice.proportionality(vec((1, 0)), vec((1, 2))) is None
    assert lattice.proportionality(vec((0, 0)), vec((0, 0))) is None


facet = st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(lambda f: f != (0, 0))
small = st.integers(-20, 20)


@st.composite
def cone_and_classes(draw):
    import math

    facets = draw(st.lists(facet, min_size=2, max_size=4))
    facets = [tuple(x // math.gcd(*f) for x in f) for f in facets]
    cone = EffConeSpec(facets=tuple(facets))
    L = vec((draw(small), draw(small)))
    D = vec((draw(small), draw(small)))
    return cone, L, D


@settings(max_examples=300, deadline=None)
@given(cone_and_classes(), st.integers(1, 1000), st.integers(1, 10**6))
def test_infimum_is_tight(data, den, num):
    cone, L, D = data
    try:
        t = ratio_infimum(cone, L, D)
    except (InfeasibleForAllS, UnboundedBelow):
        return
    assert cone_member(cone, lattice.combo(t.value, L, D))
    below = t.value - Q(num % (10 * den) + 1, den)
    assert not cone_member(cone, lattice.combo(below, L, D))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(-12, 12), st.integers(-12, 12))
def test_kappa_subadditive_on_orthant(a, b, d1, d2):
    cone, L, D = orthant(2), vec((a, b)), vec((d1, d2))
    t = ratio_infimum(cone, L, D).value
    kap = {m: int_feasible_min(_cone_z(cone), L, D, m, m * t, 0) for m in range(1, 9)}
    for m in kap:
        assert Q(kap[m], m) >= t
        for m2 in kap:
            if m + m2 in kap:
                assert kap[m + m2] <= kap[m] + kap[m2]
            if m2 % m == 0:
                assert kap[m2] <= (m2 // m) * kap[m]
