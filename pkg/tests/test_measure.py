from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import binomial_measure, dict_convolve, l1, lazy_decay_closed_form, table_convolve
from strategies import heis, nk, probability, signed
from semiharmonic import _lattice
from semiharmonic import semigroup as sg
from semiharmonic.errors import (
    AbsoluteContinuityError,
    NotProbability,
    SafeCoreError,
    SupportOverflow,
)
from semiharmonic.measure import (
    Measure,
    SignedMeasure,
    convolve,
    decay_profile,
    delta,
    function_convolve,
    mix,
    pair,
    power,
    radon_nikodym,
    require_probability,
    safe_core,
    translate,
    tv_distance,
    tv_norm,
)

N1 = sg.CommutativeMonoid(1)
N2 = sg.CommutativeMonoid(2)
H = sg.HeisenbergMonoid()
S3 = sg.symmetric_group(3)
HALF = Fraction(1, 2)
LAZY = Measure({(0,): HALF, (1,): HALF})


def test_measure_basics():
    mu = Measure({"a": Fraction(1, 3), "b": Fraction(2, 3), "c": 0})
    assert mu.support == {"a", "b"}
    assert mu("c") == 0
    with pytest.raises(KeyError):
        mu["c"]
    assert mu.is_probability()
    with pytest.raises(ValueError):
        Measure({"a": -1})
    assert SignedMeasure({"a": 1}) - SignedMeasure({"a": 1}) == SignedMeasure()
    assert (mu * 0) == Measure()
    with pytest.raises(NotProbability):
        require_probability(Measure({"a": HALF}))


def test_float_probability_tolerance():
    mu = Measure({"a": 0.1, "b": 0.2, "c": 0.7})
    assert mu.is_probability() and mu.is_float()


@given(probability(range(6)), probability(range(6)))
def test_convolve_matches_table_scan(mu, nu):
    got = convolve(S3, mu, nu)
    assert dict(got) == table_convolve(S3._rows, dict(mu), dict(nu))
    assert got.mass() == 1


@given(probability(range(6)), probability(range(6)), probability(range(6)))
def test_convolution_associative(a, b, c):
    assert convolve(S3, convolve(S3, a, b), c) == convolve(S3, a, convolve(S3, b, c))


@given(signed([(i,) for i in range(6)]), signed([(i,) for i in range(6)]))
def test_signed_mass_multiplicative_and_norm_submultiplicative(mu, nu):
    c = convolve(N1, mu, nu)
    assert c.mass() == mu.mass() * nu.mass()
    assert tv_norm(c) <= tv_norm(mu) * tv_norm(nu)


@given(st.lists(st.tuples(nk(2, 40), st.integers(1, 50)), min_size=150, max_size=200,
                unique_by=lambda t: t[0]),
       st.lists(st.tuples(nk(2, 40), st.integers(1, 50)), min_size=150, max_size=200,
                unique_by=lambda t: t[0]))
def test_dense_path_matches_dict_path(a, b):
    ta, tb = sum(w for _, w in a), sum(w for _, w in b)
    mu = Measure({k: Fraction(w, ta) for k, w in a})
    nu = Measure({k: Fraction(w, tb) for k, w in b})
    assert len(mu) * len(nu) > _lattice.DENSE_THRESHOLD
    ref = dict_convolve(N2._mul, dict(mu), dict(nu))
    assert dict(convolve(N2, mu, nu)) == ref


@given(probability(list(sg.ball(H, 2))), probability(list(sg.ball(H, 2))))
def test_heisenberg_convolve(mu, nu):
    assert dict(convolve(H, mu, nu)) == dict_convolve(H._mul, dict(mu), dict(nu))


def test_power_lazy_walk_is_binomial():
    for n in range(0, 20):
        assert {k[0]: v for k, v in power(N1, LAZY, n).items()} == binomial_measure(n)


def test_power_respects_cap():
    pi = Measure.uniform([(i, j) for i in range(10) for j in range(10)])
    with pytest.raises(SupportOverflow):
        power(N2, pi, 4, cap=500)


def test_translate_and_distance():
    th = Measure({(0,): HALF, (2,): HALF})
    assert translate(N1, (1,), th) == Measure({(1,): HALF, (3,): HALF})
    assert tv_distance(th, translate(N1, (1,), th)) == 2
    assert tv_distance(th, th) == 0


@given(probability(range(6)), probability(range(6)))
def test_tv_distance_equals_norm_of_difference(mu, nu):
    assert tv_distance(mu, nu) == tv_norm(mu - nu) == l1(dict(mu), dict(nu))


def test_decay_profile_lazy_walk_values():
    prof = decay_profile(N1, LAZY, (1,), 5)
    assert prof.values == (2, 1, 1, Fraction(3, 4), Fraction(3, 4), Fraction(5, 8))
    assert prof.is_nonincreasing()
    prof = decay_profile(N1, LAZY, (1,), 30)
    assert all(prof.values[n] == lazy_decay_closed_form(n) for n in range(31))


def test_decay_profile_float_mode():
    prof = decay_profile(N1, LAZY, (1,), 20, mode="float")
    assert all(abs(prof.values[n] - float(lazy_decay_closed_form(n))) < 1e-12
               for n in range(21))
    assert prof.is_nonincreasing(eps=1e-12)


def test_decay_profile_periodic_walk_does_not_decay():
    Z2 = sg.cyclic_group(2)
    prof = decay_profile(Z2, delta(1), 1, 6)
    assert set(prof.values) == {2}


@given(probability(range(6)), st.integers(0, 5))
def test_decay_nonincreasing_on_groups(pi, s):
    assert decay_profile(S3, pi, s, 6).is_nonincreasing()


def test_mix():
    m = mix([1, 3], [delta("a"), delta("b")], normalize=True)
    assert m == Measure({"a": Fraction(1, 4), "b": Fraction(3, 4)})
    with pytest.raises(ValueError):
        mix([1], [delta("a"), delta("b")])


def test_radon_nikodym():
    lam = Measure({"a": HALF, "b": HALF})
    assert radon_nikodym(Measure({"a": 1}), lam) == {"a": 2}
    with pytest.raises(AbsoluteContinuityError):
        radon_nikodym(Measure({"c": 1}), lam)


@given(probability(range(6)), probability(range(6)),
       st.lists(st.integers(-5, 5), min_size=6, max_size=6))
def test_function_convolution_duality(mu, pi, fvals):
    f = dict(enumerate(map(Fraction, fvals)))
    fp = function_convolve(S3, f, pi, range(6))
    assert pair(fp, mu) == pair(f, convolve(S3, mu, pi))


def test_safe_core_and_truncated_functions():
    B = sg.ball(N1, 5)
    core = safe_core(N1, B, LAZY)
    assert core == {(i,) for i in range(5)}
    f = {x: Fraction(x[0]) for x in B}
    out = function_convolve(N1, f, LAZY, core)
    assert out[(0,)] == HALF
    with pytest.raises(SafeCoreError):
        function_convolve(N1, f, LAZY, [(5,)])
