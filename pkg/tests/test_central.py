import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_right_reversible, dict_convolve
from strategies import heis, probability
from semiharmonic import semigroup as sg
from semiharmonic.central import (
    CentralSeries,
    HeisenbergFixture,
    ZAxis,
    check_central_condition,
    descend_function,
    find_central_series,
    heisenberg_central_witness,
    heisenberg_reversal_witness,
    is_right_reversible,
    pushforward,
    quotient_by_S1,
    subsemigroups_with_identity,
)
from semiharmonic.errors import (
    CapExceeded,
    InvalidElement,
    NotClassConstant,
    NotClosed,
    WellDefinednessError,
)
from semiharmonic.measure import Measure, convolve, delta

H = sg.HeisenbergMonoid()
FIX = HeisenbergFixture(H)


def test_right_reversibility_examples():
    Z3 = sg.cyclic_group(3)
    assert is_right_reversible(Z3, frozenset(Z3.elements()))
    # x*y = x: T x = T for every x, so left-zero semigroups are right reversible
    LZ = sg.left_zero(2, False)
    assert is_right_reversible(LZ, frozenset({0, 1}))
    # x*y = y: T x = {x}
    RZ = sg.right_zero(2, False)
    assert not is_right_reversible(RZ, frozenset({0, 1}))
    with pytest.raises(NotClosed):
        is_right_reversible(sg.cyclic_group(4), frozenset({0, 1}))


def test_right_reversibility_matches_brute_force():
    rng = random.Random(11)
    from oracles import random_monoid_table
    for _ in range(30):
        table, _, _ = random_monoid_table(rng)
        S = sg.FiniteTable(table)
        T = frozenset(S.elements())
        assert is_right_reversible(S, T) == brute_right_reversible(table, T)


def test_central_condition_examples():
    Z4 = sg.cyclic_group(4)
    assert check_central_condition(Z4, set(range(4)), {0}, range(4)).holds
    S3 = sg.symmetric_group(3)
    res = check_central_condition(S3, set(range(6)), {0}, range(6))
    assert not res.holds
    a, s = res.counterexample
    assert S3._mul(a, s) != S3._mul(s, a)


@given(heis, heis)
def test_heisenberg_witness_identities(a, b):
    a, b = sg.HeisenbergElement(*a), sg.HeisenbergElement(*b)
    u, v = heisenberg_reversal_witness(a, b)
    assert H._mul(u, a) == H._mul(v, b)
    x, y = heisenberg_central_witness(a, b)
    assert x in ZAxis() and y in ZAxis()
    assert H._mul(x, H._mul(a, b)) == H._mul(y, H._mul(b, a))


def test_heisenberg_fixture_on_ball_and_samples():
    checks = FIX.verify_on_ball(3)
    for m, (rr, cc) in checks.items():
        assert rr.holds and cc.holds, m
    assert FIX.verify_sampled(500, seed=1)


def test_heisenberg_condition_ii_by_search_agrees():
    B = sg.ball(H, 2)
    res = check_central_condition(H, H, ZAxis(), B, search=sg.ball(H, 6))
    assert res.holds
    # e alone does not work at level 2: A and B do not commute
    assert not check_central_condition(H, H, {H.identity}, B).holds


def test_find_central_series_examples():
    assert find_central_series(sg.symmetric_group(3)) is None
    for orders in [(2,), (3,), (4,), (5,), (6,), (7,), (8,), (2, 2), (2, 4), (2, 2, 2)]:
        G = sg.abelian_group(*orders)
        cs = find_central_series(G)
        assert cs.length == 1 and cs.verify(G)
    assert find_central_series(sg.abelian_group(1)).length == 0
    D4 = sg.dihedral_group(4)
    cs = find_central_series(D4)
    assert cs.length == 2 and cs.verify(D4)
    assert cs.chain[1] == sg.center(D4)
    with pytest.raises(CapExceeded):
        find_central_series(sg.cyclic_group(9))


def test_series_on_monoids_is_reverified():
    rng = random.Random(5)
    from oracles import random_monoid_table
    for _ in range(25):
        table, _, _ = random_monoid_table(rng)
        S = sg.FiniteTable(table)
        cs = find_central_series(S)
        if cs is not None:
            assert cs.verify(S)
            assert all(is_right_reversible(S, T) for T in cs.chain)


def test_subsemigroup_enumeration():
    subs = subsemigroups_with_identity(sg.symmetric_group(3))
    assert len(subs) == 6          # the six subgroups of S3


def test_series_report():
    rep = find_central_series(sg.quaternion_group()).to_report(sg.quaternion_group())
    assert rep["length"] == 2 and all(l["central_condition"] for l in rep["levels"])


# -- quotient ----------------------------------------------------------------------

def test_quotient_trivial_cases():
    Z4 = sg.cyclic_group(4)
    q = quotient_by_S1(Z4, {0})
    assert q.size == 4 and q.quotient is not None
    q = quotient_by_S1(Z4, set(range(4)))
    assert q.size == 1


def test_heisenberg_quotient_is_N2_ball():
    q = quotient_by_S1(H, ZAxis(), radius=3)
    assert not q.undecided
    label = {i: (min(c).x, min(c).y) for i, c in enumerate(q.classes)}
    assert all(len({(a.x, a.y) for a in c}) == 1 for c in q.classes)
    assert set(label.values()) == {(x, y) for x in range(4) for y in range(4) if x + y <= 3}
    for (i, j), k in q.product_table.items():
        assert label[k] == (label[i][0] + label[j][0], label[i][1] + label[j][1])
    # every pair whose sum stays in the N^2 ball is determined
    assert len(q.product_table) == sum(1 for a in label.values() for b in label.values()
                                       if a[0] + b[0] + a[1] + b[1] <= 3)


def test_pushforward_examples():
    q = quotient_by_S1(H, ZAxis(), radius=3)
    pi = Measure.uniform(H.generators)
    pf = pushforward(q, pi)
    e, A, B = (q.class_of[g] for g in (H.identity, *H.generators[:2]))
    assert pf == Measure({e: Fraction(1, 3), A: Fraction(1, 3), B: Fraction(1, 3)})
    assert pushforward(q, delta(H.generators[0])) == delta(A)
    with pytest.raises(InvalidElement):
        pushforward(q, delta(sg.HeisenbergElement(5, 0, 0)))


@given(probability(list(sg.ball(H, 1))), probability(list(sg.ball(H, 1))))
def test_pushforward_commutes_with_convolution(pi, sigma):
    q = quotient_by_S1(H, ZAxis(), radius=3)
    lhs = pushforward(q, convolve(H, pi, sigma))
    assert lhs == q.convolve(pushforward(q, pi), pushforward(q, sigma))


def test_pushforward_on_finite_quotient():
    D4 = sg.dihedral_group(4)
    q = quotient_by_S1(D4, sg.center(D4))
    assert q.size == 4 and q.quotient is not None
    assert sg.is_associative(q.quotient.table)
    rng = random.Random(2)
    for _ in range(20):
        a = Measure({x: Fraction(rng.randint(1, 5)) for x in rng.sample(range(8), 3)})
        b = Measure({x: Fraction(rng.randint(1, 5)) for x in rng.sample(range(8), 3)})
        a, b = a / a.mass(), b / b.mass()
        lhs = pushforward(q, convolve(D4, a, b))
        assert lhs == convolve(q.quotient, pushforward(q, a), pushforward(q, b))


def test_non_central_S1_breaks_well_definedness():
    S3 = sg.symmetric_group(3)
    with pytest.raises(WellDefinednessError):
        quotient_by_S1(S3, {0, 1})


def test_descend_function():
    q = quotient_by_S1(H, ZAxis(), radius=3)
    assert descend_function(lambda a: 7, q) == {i: 7 for i in range(q.size)}
    g = descend_function(lambda a: a.x + 2 * a.y, q)
    assert all(g[q.class_of[a]] == a.x + 2 * a.y for a in q.carrier)
    with pytest.raises(NotClassConstant, match="harmonic"):
        descend_function(lambda a: a.z, q)


def test_descent_compatibility():
    q = quotient_by_S1(H, ZAxis(), radius=3)
    pi = Measure.uniform(H.generators)
    f = lambda a: Fraction(a.x * a.x - a.y)
    fd = descend_function(f, q)
    from semiharmonic.measure import function_convolve, safe_core
    core = safe_core(H, q.carrier, pi)
    conv = function_convolve(H, f, pi, core)
    pf = pushforward(q, pi)
    for x in core:
        i = q.class_of[x]
        down = sum(fd[q.product(i, j)] * w for j, w in pf.items())
        assert down == conv[x]
