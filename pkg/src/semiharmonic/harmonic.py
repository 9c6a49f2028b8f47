"""Markov operators and exact harmonic-function spaces.

On a finite semigroup the operator f -> f * pi is the |S| x |S| matrix
P[x][z] = sum over y with xy = z of pi(y), and the pi-harmonic functions
are its fixed space, computed exactly as the null space of P - I.

For infinite semigroups nothing here returns a Liouville verdict.  Use
:func:`semiharmonic.measure.decay_profile` for finite-horizon evidence and
:func:`verify_harmonic` for residuals on a safe core.

A periodic walk such as pi = delta_g on Z/2 has a one-dimensional
harmonic space although pi^n does not converge and
||delta_s * pi^n - pi^n|| stays at 2.  Decay certificates are therefore
only informative for aperiodic walks, e.g. ones charging the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DegenerateMeasure, InvalidElement
from .linalg import nullspace, rank
from .measure import SignedMeasure, function_convolve, require_probability
from .semigroup import Semigroup, center, closure


@dataclass(frozen=True)
class HarmonicSpace:
    carrier: tuple
    basis: tuple            # of dicts element -> Fraction
    dimension: int

    def contains_constants(self) -> bool:
        one = {x: Fraction(1) for x in self.carrier}
        return _in_span(one, self.basis, self.carrier)

    def to_report(self, S: Semigroup | None = None) -> dict:
        enc = S.key_to_json if S is not None else (lambda a: a)
        return {
            "dimension": self.dimension,
            "carrier": [enc(x) for x in self.carrier],
            "basis": [[[enc(x), f[x].numerator, f[x].denominator] for x in self.carrier]
                      for f in self.basis],
        }


def _in_span(f, basis, carrier) -> bool:
    rows = [[b[x] for b in basis] + [f[x]] for x in carrier]
    without = rank([r[:-1] for r in rows]) if basis else 0
    return rank(rows) == without


def markov_rows(S: Semigroup, pi: SignedMeasure, carrier: Iterable | None = None) -> dict:
    """Transition rows {x: {xy: pi(y)}} of f -> f * pi on a finite carrier."""
    xs = S.sorted(S.elements() if carrier is None else carrier)
    rows = {}
    for x in xs:
        row: dict = {}
        for y, w in pi.items():
            z = S._mul(x, y)
            row[z] = row.get(z, 0) + w
        rows[x] = row
    return rows


def fixed_space(rows: Mapping, order: list) -> HarmonicSpace:
    """Fixed space {f : P f = f} of a transition matrix given as rows."""
    index = {x: i for i, x in enumerate(order)}
    n = len(order)
    mat = []
    for x in order:
        r = [Fraction(0)] * n
        for z, p in rows[x].items():
            if z not in index:
                raise InvalidElement(f"transition from {x!r} leaves the carrier at {z!r}")
            r[index[z]] += p
        r[index[x]] -= 1
        mat.append(r)
    vecs = nullspace(mat, n)
    basis = tuple({x: v[i] for i, x in enumerate(order)} for v in vecs)
    return HarmonicSpace(tuple(order), basis, len(basis))


def _check_finite_measure(S: Semigroup, pi: SignedMeasure):
    if not S.finite:
        raise TypeError(f"{S.name} is infinite; harmonic spaces need a finite semigroup")
    require_probability(pi, "pi")
    for y in pi:
        S.validate(y)


def harmonic_space_finite(S: Semigroup, pi: SignedMeasure) -> HarmonicSpace:
    """Basis of the pi-harmonic functions on a finite semigroup."""
    _check_finite_measure(S, pi)
    rows = markov_rows(S, pi)
    return fixed_space(rows, list(rows))


def is_liouville_finite(S: Semigroup, pi: SignedMeasure) -> bool:
    return harmonic_space_finite(S, pi).dimension == 1


def is_nondegenerate(S: Semigroup, pi: SignedMeasure) -> bool:
    """Whether supp(pi) generates the finite semigroup S."""
    if not pi:
        return False
    return closure(S, pi.support).elements == frozenset(S.elements())


def verify_harmonic(S: Semigroup, f, pi: SignedMeasure, domain: Iterable):
    """max over the domain of |(f * pi)(x) - f(x)|; 0 means exactly harmonic."""
    domain = list(domain)
    conv = function_convolve(S, f, pi, domain)
    ev = f if callable(f) and not isinstance(f, Mapping) else f.__getitem__
    return max((abs(conv[x] - ev(x)) for x in domain), default=Fraction(0))


def harmonic_center_check(S: Semigroup, pi: SignedMeasure) -> bool:
    """Every harmonic f satisfies f(ax) = f(x) for central a and all x."""
    _check_finite_measure(S, pi)
    if S.identity is None:
        raise DegenerateMeasure(f"{S.name} has no identity")
    if not is_nondegenerate(S, pi):
        raise DegenerateMeasure("supp(pi) does not generate the semigroup")
    space = harmonic_space_finite(S, pi)
    cent = center(S)
    xs = S.elements()
    return all(f[S._mul(a, x)] == f[x] for f in space.basis for a in cent for x in xs)
