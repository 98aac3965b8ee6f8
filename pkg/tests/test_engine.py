from fractions import Fraction

import pytest

from weilcone import engine, lattice
from weilcone.engine import MINUS, PLUS
from weilcone.lattice import vec
from weilcone.models import NUMERICAL, REFERENCE_MODELS, parse_config, with_equivalence
from weilcone.oracle import oracle_infimum, oracle_kappa

Q = Fraction


def test_t_invariant_examples(model):
    t = engine.t_invariant(model("p1xp1:1,2"), vec((-2, -2)))
    assert (t.value, t.attained) == (-1, True)
    t = engine.t_invariant(model("elliptic_curve:3,1"), vec((0, 1)))
    assert (t.value, t.attained) == (0, False)
    for spec in REFERENCE_MODELS:
        m = model(spec)
        t = engine.t_invariant(m, (Q(0),) * m.rank)
        assert (t.value, t.attained) == (0, True)


@pytest.mark.parametrize(
    "spec,D,m,e",
    [
        ("projective_line:2", (1,), 1, 1),
        ("projective_line:2", (1,), 3, 2),
        ("p1xp1:1,2", (-3, -4), 4, -8),
    ],
)
def test_natural_pullback_examples(model, spec, D, m, e):
    mod = model(spec)
    b = engine.natural_pullback(mod, vec(D), m)
    assert b.strict == lattice.scale(m, vec(D))
    assert b.e_coeff == e and b.exact
    assert oracle_kappa(mod, vec(D), m) == e


def test_pullback_examples(model):
    ell = model("elliptic_curve:3,1")
    b = engine.pullback(ell, vec((0, 1)))
    assert (b.strict, b.e_coeff, b.exact) == (vec((0, 1)), 0, False)
    quad = model("p1xp1:1,2")
    b = engine.pullback(quad, vec((0, -2)))
    assert (b.strict, b.e_coeff, b.exact) == (vec((0, -2)), 0, True)
    for spec in REFERENCE_MODELS:
        m = model(spec)
        for q in (Q(-3), Q(1, 2), Q(5, 7)):
            b = engine.pullback(m, lattice.scale(q, m.L))
            assert b.e_coeff == q and b.exact


def test_canonical_on_blowup(model):
    assert engine.canonical_on_blowup(model("p1xp1:1,2")) == engine.BlowupDivisor(vec((-3, -4)), Q(-2))
    assert engine.canonical_on_blowup(model("projective_line:1")).strict == vec((-3,))
    assert engine.canonical_on_blowup(model("elliptic_fibration:3")).strict == vec((0, -3))


def test_canonical_adjunction(any_model):
    # (K_Y + E)|_E = K_V with E|_E = -L
    ky = engine.canonical_on_blowup(any_model)
    res = engine.restriction_to_E(any_model, ky)
    assert lattice.sub(res, any_model.L) == any_model.K


def test_smooth_point_discrepancy(model):
    assert engine.relative_canonical(model("projective_line:1"), MINUS) == 1


@pytest.mark.parametrize("m", [None] + list(range(1, 21)))
def test_one_two_quadric_k_minus_vanishes(model, m):
    assert engine.relative_canonical(model("p1xp1:1,2"), MINUS, m) == 0


def test_relative_canonical_values(model):
    q23 = model("p1xp1:2,3")
    assert engine.relative_canonical(q23, MINUS) == Q(-1, 3)
    assert engine.relative_canonical(q23, PLUS) == 0
    assert engine.relative_canonical(model("elliptic_fibration:3"), PLUS) == -1
    q12 = model("p1xp1:1,2")
    # oracle scan gives t(L - K_V) = 3
    assert oracle_infimum(q12, lattice.sub(q12.L, q12.K)) == (3, True)
    assert engine.relative_canonical(q12, PLUS) == 1
    assert engine.relative_canonical(model("fano_fourfold_AW:2"), MINUS) == Q(-1, 2)
    with pytest.raises(ValueError):
        engine.relative_canonical(q12, "sideways")


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_fano_family_k_minus(n):
    from weilcone.models import fano_fourfold_AW

    assert engine.relative_canonical(fano_fourfold_AW(n), MINUS) == -1 + Q(1, n)


def test_restriction_examples(model):
    q12 = model("p1xp1:1,2")
    kx = lattice.sub(q12.K, q12.L)
    assert engine.restriction_to_E(q12, engine.pullback(q12, kx)) == vec((-1, 0))
    for spec in REFERENCE_MODELS:
        m = model(spec)
        b = engine.pullback(m, lattice.scale(Q(3, 2), m.L))
        assert lattice.is_zero(engine.restriction_to_E(m, b))
    ell = model("elliptic_curve:3,1")
    res = engine.restriction_to_E(ell, engine.pullback(ell, vec((0, 1))))
    assert res == vec((0, 1))
    assert engine.is_numerically_trivial(ell, res) and not lattice.is_zero(res)


def test_cartier_examples(model):
    q12 = model("p1xp1:1,2")
    assert engine.cartier_test(q12, vec((3, 6))) == engine.CartierResult(Q(3), Q(3))
    assert engine.cartier_test(q12, vec((1, 0))) == engine.CartierResult(None, None)
    assert engine.cartier_test(model("elliptic_curve:3,1"), vec((0, 1))) == engine.CartierResult(None, Q(0))
    num = with_equivalence(q12, NUMERICAL)
    assert engine.cartier_test(num, vec((3, 6))) == engine.CartierResult(None, Q(3))


def test_antisymmetry_examples(model):
    assert engine.antisymmetry_check(model("elliptic_curve:3,1"), vec((0, 1)))
    q12 = model("p1xp1:1,2")
    assert oracle_infimum(q12, vec((0, 2)))[0] == 1
    assert not engine.antisymmetry_check(q12, vec((0, -2)))
    for spec in REFERENCE_MODELS:
        m = model(spec)
        assert engine.antisymmetry_check(m, lattice.scale(Q(-4, 3), m.L))


def test_multiplier_ideal_examples(model):
    assert engine.multiplier_ideal_trivial(model("p1xp1:1,2")) == engine.MultiplierIdeal(1, True)
    assert engine.multiplier_ideal_trivial(model("elliptic_fibration:3")) == engine.MultiplierIdeal(-1, False)
    assert engine.multiplier_ideal_trivial(model("p1xp1:2,3")) == engine.MultiplierIdeal(0, True)


def test_multiplier_ideal_refuses_non_log_resolution():
    m = parse_config("[model]\nname=x\nrank=1\nfacets=1\nK=-2\nL=1\nlog_resolution=false\n")
    with pytest.raises(engine.NotLogResolution):
        engine.multiplier_ideal_trivial(m)
    rep = engine.classify(m, [1, 2])
    assert rep.lt_plus is None and rep.j_plus_trivial is None
    assert any(f.startswith("not-log-resolution") for f in rep.assumption_flags)


def test_certificate_examples(model):
    c = engine.boundary_certificate(model("p1xp1:1,2"), "canonical")
    assert (c.r, c.B, c.discrepancy_at_e) == (-1, vec((1, 0)), 0)
    assert engine.boundary_certificate(model("p1xp1:2,3"), "canonical") is None
    c = engine.boundary_certificate(model("p1xp1:2,3"), "klt")
    assert (c.r, c.B, c.discrepancy_at_e) == (Q(-2, 3), vec(("2/3", 0)), Q(-1, 3))
    c = engine.boundary_certificate(model("fano_fourfold_AW:2"), "klt")
    assert (c.r, c.B, c.discrepancy_at_e) == (Q(-1, 2), vec((0, "1/2")), Q(-1, 2))
    assert c.genericity_assumed
    assert any(n.startswith("genericity-fails") for n in c.notes)
    with pytest.raises(ValueError):
        engine.boundary_certificate(model("p1xp1:1,2"), "smooth")


def test_strict_certificates_refuse_ties(model):
    # r_min = -1 exactly: canonical holds, terminal must not
    q12 = model("p1xp1:1,2")
    assert engine.boundary_certificate(q12, "terminal") is None
    # r_min = 0 attained on the elliptic cone: lc but not klt
    ell = model("elliptic_curve:3,1")
    assert engine.boundary_certificate(ell, "lc").r == 0
    assert engine.boundary_certificate(ell, "klt") is None


def test_certificate_invariants(any_model):
    for cond in engine.CONDITIONS:
        c = engine.boundary_certificate(any_model, cond)
        if c is None:
            continue
        assert c.B == lattice.combo(c.r, any_model.L, any_model.K)
        assert c.discrepancy_at_e == -1 - c.r
        bound, strict = engine.CONDITIONS[cond]
        assert c.r < bound if strict else c.r <= bound


def test_classify_examples(model):
    rep = engine.classify(model("p1xp1:1,2"))
    assert rep.lt_plus and rep.canonical_plus_at_e
    assert rep.certificates["canonical"] is not None
    rep = engine.classify(model("elliptic_fibration:3"))
    assert rep.lt_plus is False
    rep = engine.classify(model("p1xp1:2,3"))
    assert rep.lt_plus and rep.canonical_plus_at_e
    assert rep.certificates["canonical"] is None


def test_report_chain_and_lt_equivalences(any_model):
    ms = list(range(1, 13))
    rep = engine.classify(any_model, ms)
    assert rep.ord_k_minus <= rep.ord_k_plus
    for m in ms:
        assert rep.ord_k_minus_m[m] <= rep.ord_k_minus
        assert rep.ord_k_plus <= rep.ord_k_plus_m[m]
        for q in range(2, 13):
            if m * q in rep.ord_k_minus_m:
                assert rep.ord_k_minus_m[m] <= rep.ord_k_minus_m[m * q]
                assert rep.ord_k_plus_m[m * q] <= rep.ord_k_plus_m[m]
    assert rep.lt_plus == (rep.ord_k_plus > -1) == rep.j_plus_trivial
    assert rep.ord_k_minus == -1 - engine.t_invariant(any_model, any_model.K).value


def test_convergence_when_denominator_divides(any_model):
    import random

    rng = random.Random(7)
    for _ in range(50):
        D = tuple(Q(rng.randint(-9, 9)) for _ in range(any_model.rank))
        t = engine.t_invariant(any_model, D).value
        d = t.denominator
        for m in (d, 2 * d, 3 * d):
            kap = engine.kappa(any_model, D, m)
            if engine.t_invariant(any_model, D).attained:
                assert Q(kap, m) == t
            else:
                assert Q(kap, m) > t


def test_boundary_infimum_form(any_model):
    # t(D) <= r whenever r L - D is Q-effective
    import random

    rng = random.Random(3)
    from weilcone.models import q_effective

    for _ in range(200):
        D = tuple(Q(rng.randint(-9, 9)) for _ in range(any_model.rank))
        r = Q(rng.randint(-60, 60), rng.randint(1, 6))
        if q_effective(any_model, lattice.combo(r, any_model.L, D)):
            assert engine.t_invariant(any_model, D).value <= r
