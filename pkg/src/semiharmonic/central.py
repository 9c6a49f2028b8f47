"""Central series, the quotient S/~ by a central sub-semigroup, and descent.

A central series is a chain {e} = S_0 < S_1 < ... < S_n = S of
sub-semigroups such that

  (i)  every S_m is right reversible: S_m x and S_m y meet for x, y in S_m;
  (ii) for a in S_m and s in S there are x, y in S_{m-1} with xas = ysa.

Checks on infinite semigroups run on a finite scope (a ball) and only
ever report "verified on scope", never a global verdict.  Carriers may
be finite sets or any container supporting ``in``.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Container, Iterable, Mapping

from .errors import (
    CapExceeded,
    InvalidElement,
    NotClassConstant,
    NotClosed,
    WellDefinednessError,
)
from .measure import Measure, SignedMeasure
from .semigroup import (
    FiniteTable,
    HeisenbergElement,
    HeisenbergMonoid,
    Semigroup,
    ball,
    closure,
    is_closed,
)

Witness = Callable[[object, object], tuple]


@dataclass
class ConditionCheck:
    """Outcome of a finite check, with witnesses or the first counterexample."""

    holds: bool
    checked: int
    witnesses: dict = field(default_factory=dict)
    counterexample: tuple | None = None

    def __bool__(self):
        return self.holds


def _finite(T) -> frozenset:
    if isinstance(T, (set, frozenset, list, tuple)):
        return frozenset(T)
    raise TypeError("a finite scope is required for an infinite carrier")


def right_reversibility(S: Semigroup, T, scope: Iterable | None = None,
                        witness: Witness | None = None,
                        search: Iterable | None = None) -> ConditionCheck:
    """Check T x n T y != {} for x, y in scope.

    With ``witness(x, y) -> (u, v)`` the returned pair is verified
    (u, v in T and ux = vy); otherwise u, v are searched in ``search``
    (default: T itself, which must then be finite and closed).
    """
    if scope is None:
        Tf = _finite(T)
        if not is_closed(S, Tf):
            raise NotClosed("carrier is not multiplicatively closed")
        scope = Tf
    scope = S.sorted(scope)
    if witness is None:
        pool = S.sorted(_finite(T) if search is None else [u for u in search if u in T])
    res = ConditionCheck(True, 0)
    for x, y in itertools.product(scope, repeat=2):
        res.checked += 1
        if witness is not None:
            u, v = witness(x, y)
            ok = u in T and v in T and S._mul(u, x) == S._mul(v, y)
            found = (u, v) if ok else None
        else:
            left = {}
            for u in pool:
                left.setdefault(S._mul(u, x), u)
            found = next(((left[S._mul(v, y)], v) for v in pool
                          if S._mul(v, y) in left), None)
        if found is None:
            res.holds, res.counterexample = False, (x, y)
            return res
        res.witnesses[(x, y)] = found
    return res


def is_right_reversible(S: Semigroup, T, scope: Iterable | None = None,
                        witness: Witness | None = None,
                        search: Iterable | None = None) -> bool:
    return right_reversibility(S, T, scope, witness, search).holds


def check_central_condition(S: Semigroup, Sm, Sm1, scope: Iterable,
                            witness: Witness | None = None,
                            search: Iterable | None = None) -> ConditionCheck:
    """For a in Sm n scope and s in scope find x, y in Sm1 with xas = ysa."""
    scope = S.sorted(scope)
    if witness is None:
        pool = S.sorted(_finite(Sm1) if search is None else [u for u in search if u in Sm1])
    res = ConditionCheck(True, 0)
    for a in scope:
        if a not in Sm:
            continue
        for s in scope:
            res.checked += 1
            as_, sa = S._mul(a, s), S._mul(s, a)
            if witness is not None:
                x, y = witness(a, s)
                ok = x in Sm1 and y in Sm1 and S._mul(x, as_) == S._mul(y, sa)
                found = (x, y) if ok else None
            else:
                left = {}
                for x in pool:
                    left.setdefault(S._mul(x, as_), x)
                found = next(((left[S._mul(y, sa)], y) for y in pool
                              if S._mul(y, sa) in left), None)
            if found is None:
                res.holds, res.counterexample = False, (a, s)
                return res
            res.witnesses[(a, s)] = found
    return res


@dataclass(frozen=True)
class CentralSeries:
    chain: tuple           # frozensets, {e} first, S last

    @property
    def length(self) -> int:
        return len(self.chain) - 1

    def verify(self, S: Semigroup) -> bool:
        """Re-check (i) and (ii) at every level from scratch."""
        full = frozenset(S.elements())
        if self.chain[0] != frozenset({S.identity}) or self.chain[-1] != full:
            return False
        for lower, upper in zip(self.chain, self.chain[1:]):
            if not lower < upper:
                return False
            if not is_right_reversible(S, upper):
                return False
            if not check_central_condition(S, upper, lower, full):
                return False
        return True

    def to_report(self, S: Semigroup) -> dict:
        full = frozenset(S.elements())
        levels = []
        for m, (lower, upper) in enumerate(zip(self.chain, self.chain[1:]), start=1):
            cc = check_central_condition(S, upper, lower, full)
            levels.append({
                "m": m,
                "carrier": [S.key_to_json(a) for a in S.sorted(upper)],
                "right_reversible": is_right_reversible(S, upper),
                "central_condition": cc.holds,
                "witnesses": [[S.key_to_json(a), S.key_to_json(s),
                               S.key_to_json(x), S.key_to_json(y)]
                              for (a, s), (x, y) in sorted(
                                  cc.witnesses.items(),
                                  key=lambda kv: (S.sort_key(kv[0][0]), S.sort_key(kv[0][1])))],
            })
        return {"length": self.length,
                "chain": [[S.key_to_json(a) for a in S.sorted(c)] for c in self.chain],
                "levels": levels}


def subsemigroups_with_identity(S: Semigroup, cap: int = 8) -> list[frozenset]:
    """All sub-semigroups containing e, as closures of subsets, deduplicated."""
    if S.identity is None:
        raise ValueError(f"{S.name} has no identity")
    xs = S.sorted(S.elements())
    if len(xs) > cap:
        raise CapExceeded(f"|S| = {len(xs)} exceeds the search cap {cap}")
    e = S.identity
    rest = [x for x in xs if x != e]
    found = set()
    for r in range(len(rest) + 1):
        for combo in itertools.combinations(rest, r):
            found.add(closure(S, (e, *combo)).elements)
    return sorted(found, key=lambda c: (len(c), [S.sort_key(a) for a in S.sorted(c)]))


def find_central_series(S: Semigroup, cap: int = 8) -> CentralSeries | None:
    """A shortest central series, lexicographically least; None if there is none."""
    if not S.finite:
        raise TypeError("exhaustive search needs a finite semigroup")
    subs = subsemigroups_with_identity(S, cap)
    full = frozenset(S.elements())
    bottom = frozenset({S.identity})
    if full == bottom:
        return CentralSeries((bottom,))
    rr = {T: is_right_reversible(S, T) for T in subs}
    succ = {T: [U for U in subs if T < U and rr[U]
                and check_central_condition(S, U, T, full).holds] for T in subs}
    pred: dict = {T: [] for T in subs}
    for T, us in succ.items():
        for U in us:
            pred[U].append(T)

    def bfs(start, nbrs):
        dist = {start: 0}
        queue = deque([start])
        while queue:
            T = queue.popleft()
            for U in nbrs[T]:
                if U not in dist:
                    dist[U] = dist[T] + 1
                    queue.append(U)
        return dist

    d_from, d_to = bfs(bottom, succ), bfs(full, pred)
    if full not in d_from:
        return None
    L = d_from[full]
    key = lambda c: [S.sort_key(a) for a in S.sorted(c)]
    chain, T = [bottom], bottom
    for step in range(1, L + 1):
        options = [U for U in succ[T] if d_to.get(U) == L - step]
        T = min(options, key=key)
        chain.append(T)
    return CentralSeries(tuple(chain))


# -- Heisenberg fixture ------------------------------------------------------------

class ZAxis:
    """The central sub-monoid {(0, 0, z)} of the Heisenberg monoid."""

    def __contains__(self, a):
        return isinstance(a, tuple) and len(a) == 3 and a[0] == 0 and a[1] == 0 and a[2] >= 0

    def __repr__(self):
        return "ZAxis()"


class Identity:
    def __init__(self, e):
        self.e = e

    def __contains__(self, a):
        return a == self.e


def heisenberg_reversal_witness(a, b):
    """u, v with u a = v b: u = (xi, eta, zeta + x eta), v = (x, y, z + xi y)."""
    x, y, z = a
    xi, eta, zeta = b
    return HeisenbergElement(xi, eta, zeta + x * eta), HeisenbergElement(x, y, z + xi * y)


def heisenberg_central_witness(a, s):
    """x, y on the z-axis with x(as) = y(sa): the commutator is (0, 0, x eta - xi y)."""
    x, y, _ = a
    xi, eta, _ = s
    return HeisenbergElement(0, 0, xi * y), HeisenbergElement(0, 0, x * eta)


def _commuting_witness(S):
    return lambda a, b: (b, a)


@dataclass(frozen=True)
class HeisenbergFixture:
    """{e} < z-axis < H with closed-form witnesses for (i) and (ii)."""

    S: HeisenbergMonoid = field(default_factory=HeisenbergMonoid)

    @property
    def chain(self) -> tuple:
        return (Identity(self.S.identity), ZAxis(), self.S)

    def reversal_witnesses(self) -> tuple:
        # S_1 is commutative, so (u, v) = (b, a) works there
        return (None, _commuting_witness(self.S), heisenberg_reversal_witness)

    def central_witnesses(self) -> tuple:
        e = self.S.identity
        return (None, lambda a, s: (e, e), heisenberg_central_witness)

    def verify_on_ball(self, radius: int) -> dict:
        """(i) and (ii) at each level on ball(radius), checked with the witnesses."""
        B = ball(self.S, radius)
        out = {}
        chain, rev, cen = self.chain, self.reversal_witnesses(), self.central_witnesses()
        for m in (1, 2):
            scope_m = [a for a in B if a in chain[m]]
            out[m] = (right_reversibility(self.S, chain[m], scope_m, rev[m]),
                      check_central_condition(self.S, chain[m], chain[m - 1], B, cen[m]))
        return out

    def verify_sampled(self, samples: int = 500, seed: int = 0, bound: int = 10**6) -> bool:
        """Witness identities on random pairs with coordinates up to ``bound``."""
        rng = random.Random(seed)
        draw = lambda: HeisenbergElement(*(rng.randint(0, bound) for _ in range(3)))
        mul = self.S._mul
        for _ in range(samples):
            a, b = draw(), draw()
            u, v = heisenberg_reversal_witness(a, b)
            if mul(u, a) != mul(v, b):
                return False
            x, y = heisenberg_central_witness(a, b)
            if x not in ZAxis() or y not in ZAxis():
                return False
            if mul(x, mul(a, b)) != mul(y, mul(b, a)):
                return False
        return True


# -- quotient S/~ -------------------------------------------------------------------

class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass
class QuotientMap:
    """Partition of a carrier into ~-classes and the induced (partial) product."""

    S: Semigroup
    carrier: tuple
    classes: tuple                 # frozensets, indexed by class id
    class_of: dict                 # element -> class id
    product_table: dict            # (i, j) -> k where determined on the carrier
    undecided: list                # same-class pairs with no direct witness in range
    quotient: FiniteTable | None   # when the product table is total

    @property
    def size(self) -> int:
        return len(self.classes)

    def product(self, i: int, j: int) -> int:
        try:
            return self.product_table[(i, j)]
        except KeyError:
            raise InvalidElement(f"product of classes {i} and {j} is not determined "
                                 "on this carrier") from None

    def convolve(self, mu: SignedMeasure, nu: SignedMeasure) -> SignedMeasure:
        out: dict = {}
        for i, p in mu.items():
            for j, q in nu.items():
                k = self.product(i, j)
                out[k] = out.get(k, 0) + p * q
        return type(mu)(out) if isinstance(mu, Measure) and isinstance(nu, Measure) \
            else SignedMeasure(out)

    def to_report(self) -> dict:
        enc = self.S.key_to_json
        return {
            "classes": [[enc(a) for a in self.S.sorted(c)] for c in self.classes],
            "product_table": [[i, j, k] for (i, j), k in sorted(self.product_table.items())],
            "undecided": [[enc(a), enc(b)] for a, b in self.undecided],
            "total": self.quotient is not None,
        }


def quotient_by_S1(S: Semigroup, S1, carrier: Iterable | None = None,
                   radius: int | None = None, slack: int = 2) -> QuotientMap:
    """Partition by x ~ y iff ax = by for some a, b in S1.

    On a finite S the whole semigroup is the carrier and S1 must be a
    finite set.  Otherwise pass ``radius``: the carrier is ball(radius) and
    a, b are searched in S1 n ball(radius + slack).  Elements are merged
    only along directly witnessed pairs; pairs that end up in one class
    without a direct witness are listed as undecided.
    """
    if carrier is None:
        if radius is not None:
            carrier = ball(S, radius)
        else:
            carrier = S.elements()
    carrier = S.sorted(set(S.validate(x) for x in carrier))
    if radius is not None:
        pool = [a for a in S.sorted(ball(S, radius + slack)) if a in S1]
    else:
        pool = S.sorted(_finite(S1))
    images = {x: {S._mul(a, x) for a in pool} for x in carrier}
    by_image: dict = {}
    for x in carrier:
        for t in images[x]:
            by_image.setdefault(t, []).append(x)
    uf = _UnionFind(carrier)
    direct = set()
    for xs in by_image.values():
        for y in xs[1:]:
            uf.union(xs[0], y)
        for a, b in itertools.combinations(xs, 2):
            direct.add((a, b))
    groups: dict = {}
    for x in carrier:
        groups.setdefault(uf.find(x), []).append(x)
    classes = tuple(frozenset(g) for g in groups.values())
    classes = tuple(sorted(classes, key=lambda c: S.sort_key(min(c, key=S.sort_key))))
    class_of = {x: i for i, c in enumerate(classes) for x in c}
    undecided = []
    for c in classes:
        for a, b in itertools.combinations(S.sorted(c), 2):
            if (a, b) not in direct and (b, a) not in direct:
                undecided.append((a, b))
    table: dict = {}
    for x in carrier:
        for y in carrier:
            z = S._mul(x, y)
            if z not in class_of:
                continue
            key, k = (class_of[x], class_of[y]), class_of[z]
            if table.setdefault(key, k) != k:
                raise WellDefinednessError(
                    f"classes {key} multiply to both {table[key]} and {k} "
                    f"(at {x!r} * {y!r}); S1 is not central or the carrier is not closed")
    n = len(classes)
    quotient = None
    if len(table) == n * n:
        quotient = FiniteTable([[table[(i, j)] for j in range(n)] for i in range(n)],
                               name=f"{S.name}/~")
    return QuotientMap(S, tuple(carrier), classes, class_of, table, undecided, quotient)


def pushforward(q: QuotientMap, pi: SignedMeasure) -> SignedMeasure:
    """Class-mass sums of pi."""
    out: dict = {}
    for x, w in pi.items():
        if x not in q.class_of:
            raise InvalidElement(f"{x!r} is outside the partitioned carrier")
        k = q.class_of[x]
        out[k] = out.get(k, 0) + w
    return Measure(out) if isinstance(pi, Measure) else SignedMeasure(out)


def descend_function(f, q: QuotientMap) -> dict:
    """Class function f'(class(x)) = f(x); f must be constant on every class."""
    ev = f.__getitem__ if isinstance(f, Mapping) else f
    out = {}
    for i, c in enumerate(q.classes):
        vals = {ev(x) for x in c}
        if len(vals) != 1:
            raise NotClassConstant(
                f"f takes {len(vals)} values on class {i}; a harmonic function for a "
                "non-degenerate measure is invariant under central elements, so this "
                "cannot happen for harmonic f")
        out[i] = vals.pop()
    return out
