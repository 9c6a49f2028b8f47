"""Reiter witnesses and the mixing construction of a decaying random walk.

Given witnesses theta_m that are eps_m-invariant on growing finite test
sets, the mixture pi = sum_m t_m theta_m satisfies

    ||pi^n - delta_s * pi^n|| < 4 eps_m    for n >= n_m and s in K_{m-1}

provided (t_1 + ... + t_{m-1})^{n_m} < eps_m.  :func:`reiter_mix` runs a
truncated version of that construction exactly and reports every
measured value next to its bound.  A finite run certifies only the
(eps_m, K) pairs listed in its report.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import _lattice
from .errors import InvalidWitness, NotProbability, SupportOverflow
from .measure import (
    Measure,
    SignedMeasure,
    convolve,
    identity_measure,
    mix,
    power,
    require_probability,
    translate,
    tv_distance,
)
from .semigroup import DEFAULT_CAP, CommutativeMonoid, Semigroup, ball

Oracle = Callable[[Fraction, frozenset], Measure]


def deviation(S: Semigroup, theta: SignedMeasure, s) -> Fraction:
    """||theta - delta_s * theta||."""
    return tv_distance(theta, translate(S, s, theta))


def deviations(S: Semigroup, theta: SignedMeasure, shifts: Iterable) -> dict:
    """deviation(theta, s) for every s; vectorised on N^k."""
    shifts = [S.validate(s) for s in shifts]
    if (isinstance(S, CommutativeMonoid) and len(theta) * len(shifts) > _lattice.DENSE_THRESHOLD
            and all(isinstance(v, Fraction) for v in theta.values())):
        return _lattice.shift_deviations(theta._w, shifts)
    return {s: deviation(S, theta, s) for s in shifts}


@dataclass(frozen=True)
class ReiterWitness:
    theta: Measure
    tested: frozenset
    epsilon: Fraction
    deviations: dict

    @property
    def max_deviation(self):
        return max(self.deviations.values(), default=Fraction(0))

    @property
    def valid(self) -> bool:
        return self.max_deviation < self.epsilon


def reiter_witness(S: Semigroup, theta: Measure, tested: Iterable, epsilon) -> ReiterWitness:
    require_probability(theta, "theta")
    tested = frozenset(S.validate(s) for s in tested)
    return ReiterWitness(theta, tested, Fraction(epsilon), deviations(S, theta, tested))


def _cube_k(S_or_k) -> int:
    return S_or_k.k if isinstance(S_or_k, CommutativeMonoid) else int(S_or_k)


def folner_cube(S_or_k, n: int, cap: int = DEFAULT_CAP) -> Measure:
    """Uniform probability on {0..n}^k."""
    k = _cube_k(S_or_k)
    if n < 0:
        raise ValueError("cube side must be nonnegative")
    size = (n + 1) ** k
    if size > cap:
        raise SupportOverflow(f"Folner cube {{0..{n}}}^{k} has {size} points > cap {cap}",
                              size, cap)
    p = Fraction(1, size)
    return Measure._trusted({pt: p for pt in itertools.product(range(n + 1), repeat=k)})


def cube_deviation(n: int, s: Sequence[int]) -> Fraction:
    """Closed-form deviation of the cube {0..n}^k along s (slab counting)."""
    side = n + 1
    overlap = Fraction(1)
    for si in s:
        overlap *= Fraction(max(0, side - si), side)
    return 2 * (1 - overlap)


def folner_oracle(S: CommutativeMonoid, cap: int = DEFAULT_CAP) -> Oracle:
    """Oracle returning the smallest cube that is eps-invariant on K."""
    def oracle(eps, K):
        eps = Fraction(eps)
        worst = lambda n: max((cube_deviation(n, s) for s in K), default=Fraction(0))
        if worst(0) < eps:
            return folner_cube(S, 0, cap)
        hi = 1
        while worst(hi) >= eps:
            hi *= 2
            if (hi + 1) ** S.k > cap * 4:
                raise SupportOverflow(
                    f"no cube within cap {cap} is {eps}-invariant on {len(K)} shifts",
                    (hi + 1) ** S.k, cap)
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if worst(mid) < eps:
                hi = mid
            else:
                lo = mid
        return folner_cube(S, hi, cap)
    return oracle


# -- schedule --------------------------------------------------------------------

@dataclass(frozen=True)
class MixSchedule:
    """Weights t, tolerances eps and exponents n for the mixing construction."""

    t: tuple
    eps: tuple
    n: tuple

    def __post_init__(self):
        self.validate()

    @property
    def M(self) -> int:
        return len(self.t)

    def validate(self):
        if not (len(self.t) == len(self.eps) == len(self.n)) or not self.t:
            raise ValueError("schedule lists must be nonempty and of equal length")
        if sum(self.t) != 1 or any(not 0 < ti <= 1 for ti in self.t):
            raise ValueError("weights must lie in (0, 1] and sum to 1")
        if len(self.t) > 1 and any(ti >= 1 for ti in self.t):
            raise ValueError("weights must lie in (0, 1)")
        if any(not 0 < e < 1 for e in self.eps):
            raise ValueError("tolerances must lie in (0, 1)")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ValueError("tolerances must be strictly decreasing")
        if any(b <= a for a, b in zip(self.n, self.n[1:])) or self.n[0] < 1:
            raise ValueError("exponents must be positive and strictly increasing")
        for i in range(1, len(self.t)):
            if sum(self.t[:i]) ** self.n[i] >= self.eps[i]:
                raise ValueError(f"schedule inequality fails at i={i + 1}")


def build_schedule(M: int, policy: str = "default") -> MixSchedule:
    """t_i = 2^-i renormalised over i <= M, eps_i = 2^-i, minimal n_i.

    n_1 = 1 (the inequality is vacuous there); later n_i are the least
    integers above n_{i-1} with (t_1 + ... + t_{i-1})^{n_i} < eps_i.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if policy != "default":
        raise ValueError(f"unknown schedule policy {policy!r}")
    raw = [Fraction(1, 2 ** i) for i in range(1, M + 1)]
    total = sum(raw)
    t = tuple(r / total for r in raw)
    eps = tuple(Fraction(1, 2 ** i) for i in range(1, M + 1))
    ns = [1]
    for i in range(1, M):
        head = sum(t[:i])
        n = ns[-1] + 1
        while head ** n >= eps[i]:
            n += 1
        ns.append(n)
    return MixSchedule(t, eps, tuple(ns))


# -- the construction ---------------------------------------------------------------

def product_support_union(S: Semigroup, generators: Iterable, max_len: int,
                          cap: int = DEFAULT_CAP) -> frozenset:
    """Union of A^j for j = 1..max_len, A = ``generators``.

    This is the support of the family of all products of at most
    ``max_len`` of the given measures.
    """
    A = list(frozenset(generators))
    seen = set(A)
    layer = set(A)
    if isinstance(S, CommutativeMonoid) and A:
        for _ in range(max_len - 1):
            layer = _lattice.sumset(layer, A)
            seen |= layer
            if len(seen) > cap:
                raise SupportOverflow(f"product support exceeds cap {cap}", len(seen), cap)
        return frozenset(seen)
    for _ in range(max_len - 1):
        nxt = set()
        for x in layer:
            for a in A:
                y = S._mul(x, a)
                if y not in seen:
                    seen.add(y)
                    nxt.add(y)
            if len(seen) > cap:
                raise SupportOverflow(f"product support exceeds cap {cap}", len(seen), cap)
        if not nxt:
            break
        layer = nxt
    return frozenset(seen)


@dataclass(frozen=True)
class ReportRow:
    m: int
    s: object
    n: int
    measured: Fraction
    bound: Fraction

    @property
    def passed(self) -> bool:
        return self.measured < self.bound


@dataclass
class MixReport:
    schedule: MixSchedule
    rows: list = field(default_factory=list)
    stages: list = field(default_factory=list)   # per m: (|test set|, |supp theta_m|, max deviation)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_rows(self, S: Semigroup) -> list[dict]:
        return [{"m": r.m, "s": S.key_to_json(r.s), "n": r.n,
                 "measured_num": r.measured.numerator, "measured_den": r.measured.denominator,
                 "bound_num": r.bound.numerator, "bound_den": r.bound.denominator,
                 "pass": r.passed} for r in self.rows]


def _check_witness(S, theta, test, eps, m):
    try:
        require_probability(theta, f"theta_{m}")
    except NotProbability as exc:
        raise InvalidWitness(str(exc)) from None
    devs = deviations(S, theta, test)
    worst = max(devs.values(), default=Fraction(0))
    if worst >= eps:
        bad = max(devs, key=devs.get)
        raise InvalidWitness(f"theta_{m} has deviation {worst} >= {eps} at s={bad!r}")
    return worst


def reiter_witnesses(S: Semigroup, oracle: Oracle, schedule: MixSchedule, ball_radius: int,
                     cap: int = DEFAULT_CAP) -> tuple[list, list, list]:
    """Witnesses theta_1..theta_M for the mixing construction.

    K_i is ball(ball_radius + i).  theta_m must be eps_m-invariant on
    K_{m-1} u U u K_{m-1} U, where U is the support of all products of
    fewer than n_m earlier witnesses.  Returns (thetas, K, stages) with
    stages[m-1] = (|test set|, |supp theta_m|, max deviation).
    """
    K = [ball(S, ball_radius + i, cap) for i in range(schedule.M)]
    thetas, stages = [], []
    for m in range(1, schedule.M + 1):
        eps = schedule.eps[m - 1]
        Km = K[m - 1]
        if m == 1:
            test = Km
        else:
            A = frozenset().union(*(th.support for th in thetas))
            try:
                U = product_support_union(S, A, schedule.n[m - 1] - 1, cap)
            except SupportOverflow as exc:
                exc.stage = m
                raise
            test = set(Km) | U
            for k in Km:
                for u in U:
                    test.add(S._mul(k, u))
                if len(test) > cap:
                    raise SupportOverflow(f"test set for m={m} exceeds cap {cap}",
                                          len(test), cap, stage=m)
            test = frozenset(test)
        try:
            theta = oracle(eps, test)
        except SupportOverflow as exc:
            exc.stage = m
            raise
        worst = _check_witness(S, theta, test, eps, m)
        stages.append((len(test), len(theta), worst))
        thetas.append(theta)
    return thetas, K, stages


def reiter_mix(S: Semigroup, oracle: Oracle, schedule: MixSchedule, ball_radius: int,
               cap: int = DEFAULT_CAP) -> tuple[Measure, MixReport]:
    """Build pi = sum t_m theta_m and measure its decay at n = n_m.

    The report has one row per m and per s in ball(ball_radius).
    """
    thetas, K, stages = reiter_witnesses(S, oracle, schedule, ball_radius, cap)
    report = MixReport(schedule, stages=stages)
    pi = mix(schedule.t, thetas, normalize=True)
    tested = S.sorted(K[0])
    current, done = identity_measure(S), 0
    for m in range(1, schedule.M + 1):
        n = schedule.n[m - 1]
        current = convolve(S, current, power(S, pi, n - done, cap), cap)
        done = n
        devs = deviations(S, current, tested)
        for s in tested:
            report.rows.append(ReportRow(m, s, n, devs[s], 4 * schedule.eps[m - 1]))
    return pi, report


def cesaro_witnesses(S: Semigroup, pi: Measure, N: int, theta: Measure | None = None,
                     cap: int = DEFAULT_CAP) -> list[Measure]:
    """theta_n = (1/(n+1)) sum_{k<=n} theta * pi^k for n = 0..N (theta = delta_e)."""
    require_probability(pi, "pi")
    current = identity_measure(S) if theta is None else theta
    total: SignedMeasure = Measure({})
    out = []
    for n in range(N + 1):
        if n:
            current = convolve(S, current, pi, cap)
        total = total + current
        out.append(total / (n + 1))
    return out


def grid_measures(elements: Sequence, max_den: int):
    """All probability vectors on ``elements`` with denominator at most ``max_den``."""
    elements = list(elements)
    k = len(elements)
    seen = set()
    for d in range(1, max_den + 1):
        for cuts in itertools.combinations(range(d + k - 1), k - 1):
            parts, prev = [], -1
            for c in cuts + (d + k - 1,):
                parts.append(c - prev - 1)
                prev = c
            key = tuple(Fraction(p, d) for p in parts)
            if key in seen:
                continue
            seen.add(key)
            yield Measure({a: w for a, w in zip(elements, key)})


def best_grid_witness(S: Semigroup, tested: Iterable, max_den: int = 16):
    """Minimise max_s ||theta - delta_s theta|| over the rational grid on finite S."""
    tested = list(tested)
    best, arg = None, None
    for theta in grid_measures(S.elements(), max_den):
        worst = max(deviation(S, theta, s) for s in tested)
        if best is None or worst < best:
            best, arg = worst, theta
    return best, arg
