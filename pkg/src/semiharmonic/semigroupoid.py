"""Transformation semigroupoids X x| S with a finite unit space.

Arrows are pairs (x, s) with target x and source x.s, composed by
(x, s)(x.s, t) = (x, st).  The fiber over a unit x is identified with S,
so a system of measures is one measure on S per unit and the arrow
(x, s) acts on the source fiber by left translation by s.

Fibers carry counting measure and the base measure on X is uniform, so
"for almost every unit" means "for every unit" throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Hashable, Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    InvalidElement,
    InvalidWitness,
    NotComposable,
    NotProbability,
    SafeCoreError,
)
from .harmonic import HarmonicSpace, fixed_space
from .measure import (
    Measure,
    SignedMeasure,
    convolve,
    delta,
    radon_nikodym,
    counting_measure,
    translate,
    tv_distance,
    tv_norm,
)
from .reiter import MixSchedule, Oracle, ReportRow, deviations, reiter_witnesses
from .semigroup import DEFAULT_CAP, Semigroup, ball


class Arrow(NamedTuple):
    x: Hashable
    s: Hashable


class TransformationSemigroupoid:
    """Right action x.s of S on a finite unit set X."""

    def __init__(self, units: Iterable, S: Semigroup, act: Callable, name: str | None = None):
        self.units = tuple(units)
        self._unit_set = frozenset(self.units)
        if len(self._unit_set) != len(self.units):
            raise ValueError("unit keys must be distinct")
        self.S = S
        self._act = act
        self._cache: dict = {}
        self.name = name or f"X x| {S.name}"

    def act(self, x, s):
        key = (x, s)
        y = self._cache.get(key)
        if y is None:
            y = self._act(x, s)
            if y not in self._unit_set:
                raise InvalidElement(f"{x!r}.{s!r} = {y!r} is not a unit")
            self._cache[key] = y
        return y

    def validate_unit(self, x):
        if x not in self._unit_set:
            raise InvalidElement(f"{x!r} is not a unit of {self.name}")
        return x

    def target(self, g: Arrow):
        return g.x

    def source(self, g: Arrow):
        return self.act(g.x, g.s)

    def arrow(self, x, s) -> Arrow:
        return Arrow(self.validate_unit(x), self.S.validate(s))

    def action_table(self) -> list[tuple]:
        """Rows (x, generator, x.generator)."""
        return [(x, g, self.act(x, g)) for x in self.units for g in self.S.generators]

    def __repr__(self):
        return f"<{self.name}>"


def action_from_generators(units: Iterable, S: Semigroup, table: Mapping) -> TransformationSemigroupoid:
    """Extend {(x, generator): x'} to all of S along words (x.e = x)."""
    units = tuple(units)
    gens = S.generators

    def act(x, s):
        for i in S.word(s):
            x = table[(x, gens[i])]
        return x
    return TransformationSemigroupoid(units, S, act)


def rotation_semigroupoid(n: int, S: Semigroup | None = None) -> TransformationSemigroupoid:
    """X = Z/n with x.s = x + s mod n for S = N (or x + sum(s) on N^k)."""
    from .semigroup import CommutativeMonoid
    S = CommutativeMonoid(1) if S is None else S
    return TransformationSemigroupoid(range(n), S, lambda x, s: (x + sum(s)) % n,
                                      name=f"Z/{n} x| {S.name}")


def check_action(G: TransformationSemigroupoid, scope: Iterable) -> tuple | None:
    """First (x, s, t) in scope with (x.s).t != x.(st), or None; also checks x.e = x."""
    scope = list(scope)
    S = G.S
    for x in G.units:
        if S.identity is not None and G.act(x, S.identity) != x:
            return (x, S.identity, None)
        for s in scope:
            xs = G.act(x, s)
            for t in scope:
                if G.act(xs, t) != G.act(x, S._mul(s, t)):
                    return (x, s, t)
    return None


def compose(G: TransformationSemigroupoid, g: Arrow, h: Arrow) -> Arrow:
    if G.source(g) != h.x:
        raise NotComposable(f"source of {tuple(g)} is {G.source(g)!r}, target of "
                            f"{tuple(h)} is {h.x!r}")
    return Arrow(g.x, G.S._mul(g.s, h.s))


@dataclass(frozen=True)
class MeasureSystem:
    """One measure on S per unit."""

    fibers: Mapping

    def __getitem__(self, x):
        return self.fibers[x]

    def __iter__(self):
        return iter(self.fibers)

    def __eq__(self, other):
        if not isinstance(other, MeasureSystem):
            return NotImplemented
        return set(self.fibers) == set(other.fibers) and all(
            self.fibers[x] == other.fibers[x] for x in self.fibers)

    def is_probability(self) -> bool:
        return all(m.is_probability() for m in self.fibers.values())

    def norms(self) -> dict:
        return {x: tv_norm(m) for x, m in self.fibers.items()}

    def map(self, fn) -> "MeasureSystem":
        return MeasureSystem({x: fn(m) for x, m in self.fibers.items()})

    @classmethod
    def constant(cls, G: TransformationSemigroupoid, mu: SignedMeasure) -> "MeasureSystem":
        return cls({x: mu for x in G.units})


def _check_system(G, sys: MeasureSystem, what: str, probability: bool = False):
    if set(sys.fibers) != set(G.units):
        raise InvalidElement(f"{what} is not indexed by the units of {G.name}")
    if probability:
        for x, m in sys.fibers.items():
            if not m.is_probability():
                raise NotProbability(f"{what} fiber at {x!r} has mass {m.mass()}")


def identity_system(G: TransformationSemigroupoid) -> MeasureSystem:
    return MeasureSystem.constant(G, delta(G.S.identity))


def _is_constant(sys: MeasureSystem) -> bool:
    fibers = list(sys.fibers.values())
    return all(m is fibers[0] or m == fibers[0] for m in fibers[1:])


def system_convolve(G: TransformationSemigroupoid, rho: MeasureSystem, pi: MeasureSystem,
                    cap: int = DEFAULT_CAP) -> MeasureSystem:
    """(rho * pi)^x(t) = sum over rs = t of rho^x(r) pi^{x.r}(s)."""
    _check_system(G, rho, "rho")
    _check_system(G, pi, "pi")
    S = G.S
    if _is_constant(pi):
        # pi^{x.r} does not depend on r; fibers equal as objects are convolved once
        p = next(iter(pi.fibers.values()))
        done: dict = {}
        out = {}
        for x in G.units:
            r = rho[x]
            if id(r) not in done:
                done[id(r)] = convolve(S, r, p, cap)
            out[x] = done[id(r)]
        return MeasureSystem(out)
    out = {}
    for x in G.units:
        parts: dict = {}
        for r, w in rho[x].items():
            parts.setdefault(G.act(x, r), {})[r] = w
        total: dict = {}
        for u in sorted(parts, key=G.units.index):
            piece = convolve(S, SignedMeasure._trusted(parts[u]), pi[u], cap)
            for t, w in piece.items():
                total[t] = total.get(t, 0) + w
        total = {t: w for t, w in total.items() if w != 0}
        both = isinstance(rho[x], Measure) and all(isinstance(pi[u], Measure) for u in parts)
        out[x] = Measure._trusted(total) if both else SignedMeasure._trusted(total)
    return MeasureSystem(out)


def system_power(G: TransformationSemigroupoid, pi: MeasureSystem, n: int,
                 cap: int = DEFAULT_CAP) -> MeasureSystem:
    """pi^n by binary powering (system convolution is associative)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    _check_system(G, pi, "pi")
    result = identity_system(G)
    base = pi
    while n:
        if n & 1:
            result = system_convolve(G, result, base, cap)
        n >>= 1
        if n:
            base = system_convolve(G, base, base, cap)
    return result


def fibrewise_markov_apply(G: TransformationSemigroupoid, pi: MeasureSystem, x, f,
                           domain: Iterable) -> dict:
    """(P_x f)(r) = sum_s f(rs) pi^{x.r}(s) for r in domain."""
    G.validate_unit(x)
    S = G.S
    if isinstance(f, Mapping):
        def ev(t):
            try:
                return f[t]
            except KeyError:
                raise SafeCoreError(f"f is not defined at {t!r}") from None
    else:
        ev = f
    out = {}
    for r in domain:
        u = G.act(x, r)
        out[r] = sum((ev(S._mul(r, s)) * w for s, w in pi[u].items()), Fraction(0))
    return out


def fibrewise_harmonic_space(G: TransformationSemigroupoid, pi: MeasureSystem, x) -> HarmonicSpace:
    """Fixed space of P_x on a finite S."""
    S = G.S
    if not S.finite:
        raise TypeError(f"{S.name} is infinite; fibrewise harmonic spaces need a finite S")
    _check_system(G, pi, "pi", probability=True)
    G.validate_unit(x)
    order = S.sorted(S.elements())
    rows = {}
    for r in order:
        row: dict = {}
        for s, w in pi[G.act(x, r)].items():
            z = S._mul(r, s)
            row[z] = row.get(z, 0) + w
        rows[r] = row
    return fixed_space(rows, order)


def arrow_deviation(G: TransformationSemigroupoid, theta: MeasureSystem, g: Arrow) -> Fraction:
    """||theta^x - delta_s * theta^{x.s}|| for the arrow g = (x, s)."""
    x, s = g
    return tv_distance(theta[x], translate(G.S, s, theta[G.act(x, s)]))


def arrow_deviations(G: TransformationSemigroupoid, theta: MeasureSystem,
                     arrows: Iterable[Arrow]) -> dict:
    """arrow_deviation for many arrows; batched where source and target fibers agree."""
    out = {}
    batches: dict = {}
    for g in arrows:
        src = G.act(g.x, g.s)
        if theta[g.x] is theta[src]:
            batches.setdefault(g.x, []).append(g)
        else:
            out[g] = arrow_deviation(G, theta, g)
    for x, gs in batches.items():
        devs = deviations(G.S, theta[x], [g.s for g in gs])
        for g in gs:
            out[g] = devs[g.s]
    return out


def system_cesaro(G: TransformationSemigroupoid, theta: MeasureSystem, pi: MeasureSystem,
                  N: int, cap: int = DEFAULT_CAP) -> list[MeasureSystem]:
    """theta_n = (1/(n+1)) sum_{k<=n} theta * pi^k, fibrewise, for n = 0..N."""
    _check_system(G, theta, "theta", probability=True)
    _check_system(G, pi, "pi", probability=True)
    current = theta
    totals = {x: SignedMeasure() for x in G.units}
    out = []
    for n in range(N + 1):
        if n:
            current = system_convolve(G, current, pi, cap)
        totals = {x: totals[x] + current[x] for x in G.units}
        out.append(MeasureSystem({x: Measure._trusted(dict((totals[x] / (n + 1)).items()))
                                  for x in G.units}))
    return out


def system_rho_half(G: TransformationSemigroupoid, pi: MeasureSystem,
                    cap: int = DEFAULT_CAP) -> MeasureSystem:
    """rho = (pi + pi * pi) / 2 per fiber."""
    _check_system(G, pi, "pi", probability=True)
    sq = system_convolve(G, pi, pi, cap)
    half = Fraction(1, 2)
    return MeasureSystem({x: Measure._trusted(dict(((pi[x] + sq[x]) * half).items()))
                          for x in G.units})


def binomial_expansion(G: TransformationSemigroupoid, pi: MeasureSystem, n: int,
                       cap: int = DEFAULT_CAP) -> MeasureSystem:
    """2^-n sum_k C(n, k) pi^{n+k}; equals system_power(rho_half(pi), n)."""
    total = {x: SignedMeasure() for x in G.units}
    current = system_power(G, pi, n, cap)
    for k in range(n + 1):
        if k:
            current = system_convolve(G, current, pi, cap)
        c = Fraction(comb(n, k), 2 ** n)
        total = {x: total[x] + current[x] * c for x in G.units}
    return MeasureSystem({x: Measure._trusted(dict(total[x].items())) for x in G.units})


@dataclass
class SystemMixReport:
    schedule: MixSchedule
    rows: list = field(default_factory=list)     # ReportRow with s = Arrow
    stages: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_rows(self, G: TransformationSemigroupoid) -> list[dict]:
        enc = G.S.key_to_json
        return [{"m": r.m, "x": r.s.x, "s": enc(r.s.s), "n": r.n,
                 "measured_num": r.measured.numerator, "measured_den": r.measured.denominator,
                 "bound_num": r.bound.numerator, "bound_den": r.bound.denominator,
                 "pass": r.passed} for r in self.rows]


def system_mix(G: TransformationSemigroupoid, systems: Sequence[MeasureSystem],
               schedule: MixSchedule, ball_radius: int = 1,
               cap: int = DEFAULT_CAP) -> tuple[MeasureSystem, SystemMixReport]:
    """pi^x = sum_i t_i theta_i^x; report arrow deviations of pi^{n_m}.

    Arrows tested are (x, s) for every unit x and s in ball(ball_radius).
    """
    if len(systems) != schedule.M:
        raise ValueError(f"{len(systems)} witness systems for a schedule of length {schedule.M}")
    for i, sys in enumerate(systems, start=1):
        try:
            _check_system(G, sys, f"theta_{i}", probability=True)
        except NotProbability as exc:
            raise InvalidWitness(str(exc)) from None
    fibers = {}
    const = all(_is_constant(sys) for sys in systems)
    for x in G.units:
        acc: SignedMeasure = SignedMeasure()
        for t, sys in zip(schedule.t, systems):
            acc = acc + sys[x] * t
        mass = acc.mass()
        fibers[x] = Measure._trusted(dict((acc / mass).items()))
        if const:
            # keep fibers identical objects so convolution is shared across units
            fibers = {u: fibers[x] for u in G.units}
            break
    pi = MeasureSystem(fibers)
    report = SystemMixReport(schedule)
    arrows = [Arrow(x, s) for x in G.units for s in G.S.sorted(ball(G.S, ball_radius))]
    current, done = identity_system(G), 0
    for m in range(1, schedule.M + 1):
        n = schedule.n[m - 1]
        current = system_convolve(G, current, system_power(G, pi, n - done, cap), cap)
        done = n
        devs = arrow_deviations(G, current, arrows)
        for g in arrows:
            report.rows.append(ReportRow(m, g, n, devs[g], 4 * schedule.eps[m - 1]))
    return pi, report


def system_reiter_mix(G: TransformationSemigroupoid, oracle: Oracle, schedule: MixSchedule,
                      ball_radius: int = 1, cap: int = DEFAULT_CAP):
    """Semigroup Reiter witnesses pulled back constantly to every fiber, then mixed."""
    thetas, _, stages = reiter_witnesses(G.S, oracle, schedule, ball_radius, cap)
    systems = [MeasureSystem.constant(G, th) for th in thetas]
    pi, report = system_mix(G, systems, schedule, ball_radius, cap)
    report.stages = stages
    return pi, report


def quasi_haar_check(G: TransformationSemigroupoid, radius: int) -> bool:
    """Smoke check of the quasi-Haar bookkeeping for counting fibers.

    For every arrow (x, s) with s in ball(radius), the translate of the
    counting measure on ball(radius) is absolutely continuous with respect
    to counting measure on ball(2 radius), with positive integer
    Radon-Nikodym derivative.  The exhausting sets X x ball(n) are finite
    by construction.
    """
    S = G.S
    B = ball(S, radius)
    lam = counting_measure(B)
    big = counting_measure(ball(S, 2 * radius))
    for x in G.units:
        for s in B:
            G.act(x, s)
            rn = radon_nikodym(translate(S, s, lam), big)
            if any(v <= 0 or v.denominator != 1 for v in rn.values()):
                return False
    return True
