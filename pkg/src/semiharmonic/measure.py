"""Finitely supported measures with exact rational weights.

Norms follow the unnormalised total-variation convention
``||mu|| = sum_t |mu(t)|``, so two mutually singular probability measures
are at distance 2, not 1.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _lattice
from .errors import (
    AbsoluteContinuityError,
    InvalidElement,
    NotProbability,
    SafeCoreError,
    SupportOverflow,
)
from .semigroup import DEFAULT_CAP, CommutativeMonoid, Semigroup

FLOAT_EPS = 1e-12


def _num(v):
    if isinstance(v, (float, Fraction)):
        return v
    if isinstance(v, (Rational, str)):
        return Fraction(v)
    if isinstance(v, np.integer):
        return Fraction(int(v))
    if isinstance(v, np.floating):
        return float(v)
    raise TypeError(f"weight {v!r} is not a number")


class SignedMeasure(Mapping):
    """Finitely supported signed measure; zero weights are never stored.

    ``mu[t]`` raises KeyError off the support, ``mu(t)`` returns 0 there.
    """

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping | Iterable = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        w = {}
        for key, v in items:
            v = _num(v)
            if v:
                w[key] = w.get(key, 0) + v
                if not w[key]:
                    del w[key]
        self._check(w)
        self._w = w

    def _check(self, w):
        pass

    @classmethod
    def _trusted(cls, w: dict):
        obj = cls.__new__(cls)
        obj._w = w
        return obj

    def __getitem__(self, key):
        return self._w[key]

    def __call__(self, key):
        return self._w.get(key, 0)

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __eq__(self, other):
        if isinstance(other, SignedMeasure):
            return self._w == other._w
        if isinstance(other, Mapping):
            return self._w == {k: v for k, v in other.items() if v}
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v}" for k, v in list(self._w.items())[:8])
        more = ", ..." if len(self._w) > 8 else ""
        return f"{type(self).__name__}({{{body}{more}}})"

    @property
    def support(self) -> frozenset:
        return frozenset(self._w)

    def mass(self):
        return sum(self._w.values(), Fraction(0))

    def norm(self):
        return sum((abs(v) for v in self._w.values()), Fraction(0))

    def is_probability(self) -> bool:
        if any(v < 0 for v in self._w.values()):
            return False
        m = self.mass()
        if isinstance(m, float):
            return abs(m - 1) <= FLOAT_EPS
        return m == 1

    def is_float(self) -> bool:
        return any(isinstance(v, float) for v in self._w.values())

    def to_float(self):
        return type(self)._trusted({k: float(v) for k, v in self._w.items()})

    def __add__(self, other):
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        w = dict(self._w)
        for k, v in other._w.items():
            s = w.get(k, 0) + v
            if s:
                w[k] = s
            else:
                w.pop(k, None)
        cls = Measure if isinstance(self, Measure) and isinstance(other, Measure) else SignedMeasure
        return cls._trusted(w)

    def __neg__(self):
        return SignedMeasure._trusted({k: -v for k, v in self._w.items()})

    def __sub__(self, other):
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return SignedMeasure(self._w) + (-other)

    def __mul__(self, c):
        c = _num(c)
        if not c:
            return type(self)._trusted({})
        cls = type(self) if c > 0 else SignedMeasure
        return cls._trusted({k: c * v for k, v in self._w.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _num(c)
        return self * (1 / c if isinstance(c, float) else Fraction(1) / c)


class Measure(SignedMeasure):
    """Finitely supported measure with nonnegative weights."""

    __slots__ = ()

    def _check(self, w):
        for key, v in w.items():
            if v < 0:
                raise ValueError(f"negative weight {v} at {key!r}; use SignedMeasure")

    @classmethod
    def point(cls, a, weight=1):
        """The point mass delta_a (scaled by ``weight``)."""
        return cls({a: weight})

    @classmethod
    def uniform(cls, elements: Iterable):
        elems = list(dict.fromkeys(elements))
        if not elems:
            raise ValueError("uniform measure on an empty set")
        p = Fraction(1, len(elems))
        return cls._trusted({a: p for a in elems})


def delta(a) -> Measure:
    return Measure.point(a)


def require_probability(mu: SignedMeasure, what: str = "measure"):
    if not mu.is_probability():
        raise NotProbability(f"{what} has mass {mu.mass()} (or negative weights)")


def validate_support(S: Semigroup, mu: SignedMeasure):
    for key in mu:
        if S.validate(key) != key:
            raise InvalidElement(f"{key!r} is not in canonical form for {S.name}")


# -- convolution ---------------------------------------------------------------

def _check_cap(n, cap, what="convolution"):
    if n > cap:
        raise SupportOverflow(f"{what} support {n} exceeds cap {cap}", n, cap)


def _all_fractions_nonneg(w: dict) -> bool:
    return all(isinstance(v, Fraction) and v > 0 for v in w.values())


def convolve(S: Semigroup, mu: SignedMeasure, nu: SignedMeasure,
             cap: int = DEFAULT_CAP) -> SignedMeasure:
    """(mu * nu)(t) = sum over ab = t of mu(a) nu(b); exact."""
    cls = Measure if isinstance(mu, Measure) and isinstance(nu, Measure) else SignedMeasure
    if not mu or not nu:
        return cls._trusted({})
    a, b = mu._w, nu._w
    if (isinstance(S, CommutativeMonoid) and len(a) * len(b) > _lattice.DENSE_THRESHOLD
            and _all_fractions_nonneg(a) and _all_fractions_nonneg(b)):
        nums, den = _lattice.convolve_dense(_lattice.to_dense(a), _lattice.to_dense(b))
        _check_cap(len(nums), cap)
        return cls._trusted(_lattice.fractions_from(nums, den))
    mul = S._mul
    out: dict = {}
    get = out.get
    for x, wx in a.items():
        for y, wy in b.items():
            t = mul(x, y)
            out[t] = get(t, 0) + wx * wy
        if len(out) > cap:
            _check_cap(len(out), cap)
    out = {k: v for k, v in out.items() if v}
    _check_cap(len(out), cap)
    return cls._trusted(out)


def translate(S: Semigroup, a, theta: SignedMeasure) -> SignedMeasure:
    """delta_a * theta: pushforward of theta under y -> a y."""
    a = S.validate(a)
    out: dict = {}
    for y, w in theta.items():
        t = S._mul(a, y)
        out[t] = out.get(t, 0) + w
    return type(theta)._trusted({k: v for k, v in out.items() if v})


def identity_measure(S: Semigroup) -> Measure:
    if S.identity is None:
        raise InvalidElement(f"{S.name} has no identity, so pi^0 is undefined")
    return Measure.point(S.identity)


def power(S: Semigroup, pi: Measure, n: int, cap: int = DEFAULT_CAP) -> Measure:
    """n-fold convolution pi^n with pi^0 = delta_e (binary powering)."""
    if n < 0:
        raise ValueError("negative convolution power")
    result = identity_measure(S)
    base = pi
    first = True
    while n:
        if n & 1:
            result = base if first else convolve(S, result, base, cap)
            first = False
        n >>= 1
        if n:
            base = convolve(S, base, base, cap)
    return result


def tv_norm(mu: SignedMeasure):
    """sum_t |mu(t)|; for a difference of probabilities it lies in [0, 2]."""
    return mu.norm()


def tv_distance(mu: SignedMeasure, nu: SignedMeasure):
    """||mu - nu|| without materialising the difference."""
    total = Fraction(0)
    a, b = mu._w, nu._w
    for k, v in a.items():
        total += abs(v - b.get(k, 0))
    for k, v in b.items():
        if k not in a:
            total += abs(v)
    return total


@dataclass(frozen=True)
class DecayProfile:
    """values[n] = ||delta_s * pi^n - pi^n|| for n = 0..horizon.

    values[0] compares delta_s with delta_e.
    """

    element: object
    horizon: int
    values: tuple
    mode: str = "exact"

    def is_nonincreasing(self, eps=0) -> bool:
        return all(b <= a + eps for a, b in zip(self.values, self.values[1:]))


def decay_profile(S: Semigroup, pi: Measure, s, N: int, mode: str = "exact",
                  cap: int = DEFAULT_CAP) -> DecayProfile:
    """Total-variation distance between pi^n and its left translate by s.

    Values are nonincreasing in n since right convolution by a probability
    is a contraction.  In ``mode='float'`` weights are IEEE doubles and
    comparisons should allow ``FLOAT_EPS`` slack.
    """
    if N < 1:
        raise ValueError("horizon must be at least 1")
    require_probability(pi, "pi")
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    s = S.validate(s)
    if mode == "float":
        pi = pi.to_float()
    current = identity_measure(S)
    if mode == "float":
        current = current.to_float()
    values = []
    for n in range(N + 1):
        if n:
            current = convolve(S, current, pi, cap)
        values.append(tv_distance(translate(S, s, current), current))
    if mode == "float":
        values = [float(v) for v in values]
    return DecayProfile(s, N, tuple(values), mode)


def mix(weights: Sequence, measures: Sequence[SignedMeasure],
        normalize: bool = False) -> Measure:
    """sum_i t_i theta_i, divided by sum_i t_i when ``normalize`` is set."""
    if len(weights) != len(measures):
        raise ValueError("weights and measures differ in length")
    ws = [_num(w) for w in weights]
    if any(w < 0 for w in ws):
        raise ValueError("mixing weights must be nonnegative")
    total = sum(ws, Fraction(0))
    if not total:
        raise ValueError("all mixing weights are zero")
    out: dict = {}
    for w, m in zip(ws, measures):
        if not w:
            continue
        for k, v in m.items():
            out[k] = out.get(k, 0) + w * v
    if normalize:
        out = {k: v / total for k, v in out.items()}
    cls = Measure if all(isinstance(m, Measure) for m in measures) else SignedMeasure
    return cls._trusted({k: v for k, v in out.items() if v})


def radon_nikodym(mu: SignedMeasure, lam: SignedMeasure) -> dict:
    """Point-mass ratio t -> mu(t)/lam(t) on supp mu.

    Raises AbsoluteContinuityError when mu charges a point lam does not.
    """
    out = {}
    for t, v in mu.items():
        ref = lam(t)
        if not ref:
            raise AbsoluteContinuityError(f"mu({t!r}) = {v} but lambda({t!r}) = 0")
        if ref < 0:
            raise ValueError(f"reference measure is negative at {t!r}")
        out[t] = v / ref
    return out


def counting_measure(elements: Iterable) -> Measure:
    return Measure({a: 1 for a in elements})


def _evaluator(f) -> Callable:
    if callable(f) and not isinstance(f, Mapping):
        return f

    def ev(t):
        try:
            return f[t]
        except KeyError:
            raise SafeCoreError(f"function is not defined at {t!r}") from None
    return ev


def function_convolve(S: Semigroup, f, pi: SignedMeasure, domain: Iterable) -> dict:
    """(f * pi)(x) = sum_y f(xy) pi(y) for x in ``domain``.

    ``f`` is a mapping (truncated function) or a callable.  Evaluating a
    mapping outside its keys raises SafeCoreError instead of guessing.
    """
    ev = _evaluator(f)
    mul = S._mul
    return {x: sum((ev(mul(x, y)) * w for y, w in pi.items()), Fraction(0))
            for x in domain}


def safe_core(S: Semigroup, carrier: Iterable, pi: SignedMeasure) -> frozenset:
    """Points x of ``carrier`` with x * supp(pi) inside ``carrier``."""
    carrier = frozenset(carrier)
    supp = list(pi)
    return frozenset(x for x in carrier if all(S._mul(x, y) in carrier for y in supp))


def pair(f: Mapping, mu: SignedMeasure):
    """<mu, f> = sum_t f(t) mu(t)."""
    ev = _evaluator(f)
    return sum((ev(t) * w for t, w in mu.items()), Fraction(0))
