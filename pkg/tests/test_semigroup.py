import json
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import heisenberg_via_matrices, random_monoid_table
from strategies import heis, nk, words
from semiharmonic import semigroup as sg
from semiharmonic.errors import InvalidElement, MalformedTable, NoGenerators, NotClosed

H = sg.HeisenbergMonoid()


@given(heis, heis)
def test_heisenberg_product_matches_matrices(a, b):
    assert tuple(H.multiply(a, b)) == heisenberg_via_matrices(a, b)


@given(heis, heis, heis)
def test_heisenberg_associative(a, b, c):
    assert H.multiply(H.multiply(a, b), c) == H.multiply(a, H.multiply(b, c))


@given(heis)
def test_heisenberg_word_is_shortest_and_correct(a):
    w = H.word(a)
    x = H.identity
    for i in w:
        x = H._mul(x, H.generators[i])
    assert x == a
    assert len(w) == sg.word_length_heisenberg(a)


def test_heisenberg_ball_sizes():
    # AB = (1,1,1) and BA = (1,1,0) are distinct, so ball(2) has 1 + 3 + 7 = 11 elements
    assert len(sg.ball(H, 1)) == 4
    assert len(sg.ball(H, 2)) == 11
    assert sg.ball(H, 2) == {a for a in sg.ball(H, 4) if sg.word_length_heisenberg(a) <= 2}


@given(words, words, words)
def test_free_monoid_associative(u, v, w):
    F = sg.FreeMonoid(2)
    assert F.multiply(F.multiply(u, v), w) == F.multiply(u, F.multiply(v, w))


def test_free_monoid_ball_and_validation():
    F = sg.FreeMonoid(2)
    assert len(sg.ball(F, 3)) == 15
    assert F.identity == ""
    with pytest.raises(InvalidElement):
        F.validate("abc")


@given(nk(3), nk(3))
def test_commutative_monoid(a, b):
    N3 = sg.CommutativeMonoid(3)
    assert N3.multiply(a, b) == N3.multiply(b, a) == tuple(x + y for x, y in zip(a, b))


def test_commutative_ball_sizes_and_int_keys():
    assert len(sg.ball(sg.CommutativeMonoid(1), 5)) == 6
    assert len(sg.ball(sg.CommutativeMonoid(2), 4)) == 15
    N1 = sg.CommutativeMonoid(1)
    assert N1.validate(3) == (3,)
    for bad in [(-1,), (1, 2), 1.5, True]:
        with pytest.raises(InvalidElement):
            N1.validate(bad)


def test_direct_product():
    P = sg.DirectProduct(sg.cyclic_group(2), sg.CommutativeMonoid(1))
    assert P.multiply((1, (2,)), (1, (3,))) == (0, (5,))
    assert P.identity == (0, (0,))


def test_finite_table_identity_detection_and_errors():
    Z3 = sg.cyclic_group(3)
    assert Z3.identity == 0
    assert sg.left_zero(2, adjoin_identity=False).identity is None
    with pytest.raises(MalformedTable):
        sg.FiniteTable([[0, 1], [1]])
    with pytest.raises(MalformedTable):
        sg.FiniteTable([[0, 5], [1, 0]])
    with pytest.raises(MalformedTable):
        sg.FiniteTable([[0, 1], [1, 0]], identity=1)
    with pytest.raises(InvalidElement):
        Z3.validate(3)


def test_is_associative_against_brute_force():
    rng = random.Random(3)
    for _ in range(40):
        n = rng.randint(1, 4)
        t = [[rng.randrange(n) for _ in range(n)] for _ in range(n)]
        brute = all(t[t[a][b]][c] == t[a][t[b][c]]
                    for a in range(n) for b in range(n) for c in range(n))
        assert sg.is_associative(t) == brute


def test_load_table_roundtrip_and_errors(tmp_path):
    S = sg.left_zero(2)
    p = tmp_path / "t.json"
    p.write_text(json.dumps(S.to_dict()))
    T = sg.load_table(p)
    assert T._rows == S._rows and T.identity == S.identity
    p.write_text(json.dumps({"n": 2, "table": [[0, 1], [0, 0]]}))   # not associative
    with pytest.raises(MalformedTable):
        sg.load_table(p)
    p.write_text(json.dumps({"n": 3, "table": [[0]]}))
    with pytest.raises(MalformedTable):
        sg.load_table(p)
    p.write_text("{not json")
    with pytest.raises(MalformedTable):
        sg.load_table(p)


def test_zoo_orders_and_centers():
    assert len(sg.symmetric_group(3).elements()) == 6
    assert len(sg.dihedral_group(4).elements()) == 8
    assert len(sg.quaternion_group().elements()) == 8
    assert len(sg.abelian_group(2, 4).elements()) == 8
    assert sg.center(sg.symmetric_group(3)) == {0}
    assert len(sg.center(sg.dihedral_group(4))) == 2
    assert len(sg.center(sg.quaternion_group())) == 2
    assert sg.center(sg.cyclic_group(5)) == set(range(5))
    for G in (sg.symmetric_group(3), sg.dihedral_group(5), sg.quaternion_group(),
              sg.abelian_group(2, 2, 2)):
        assert sg.is_associative(G.table)


def test_center_requires_closed_carrier():
    with pytest.raises(NotClosed):
        sg.center(sg.cyclic_group(4), [0, 1])


def test_closure_and_overflow():
    N1 = sg.CommutativeMonoid(1)
    c = sg.closure(N1, [(1,)], cap=5)
    assert c.overflow and len(c.elements) == 6
    Z6 = sg.cyclic_group(6)
    assert sg.closure(Z6, [2]).elements == {0, 2, 4}


def test_ball_needs_generators_and_identity():
    with pytest.raises(NoGenerators):
        sg.ball(sg.left_zero(2, adjoin_identity=False), 1)


@given(st.integers(0, 2**31))
def test_transformation_monoids_associative(seed):
    table, e, _ = random_monoid_table(random.Random(seed))
    S = sg.FiniteTable(table)
    assert S.identity == e
    assert sg.is_associative(np.array(table))


def test_transformation_monoid_composition_order():
    # (f*g)(i) = g(f(i))
    f, g = (1, 1, 2), (0, 2, 2)
    T = sg.transformation_monoid([f, g])
    fi, gi = T.labels.index(f), T.labels.index(g)
    assert T.labels[T.multiply(fi, gi)] == tuple(g[f[i]] for i in range(3))


def test_finite_words_reach_every_generated_element():
    G = sg.symmetric_group(3)
    for a in G.elements():
        x = G.identity
        for i in G.word(a):
            x = G._mul(x, G.generators[i])
        assert x == a
