"""Semigroup backends with canonical element keys.

Every backend stores elements as plain hashable Python values (its
canonical keys), so measures and functions over a semigroup are ordinary
dicts.  Two elements are equal iff their keys are equal.

Backends
--------
FiniteTable          integer indices 0..n-1 into a Cayley table
FreeMonoid(k)        words over 'a', 'b', ... (identity is '')
CommutativeMonoid(k) exponent vectors, i.e. N^k under addition
HeisenbergMonoid     HeisenbergElement(x, y, z) with x, y, z >= 0
DirectProduct        pairs (s, t)
"""

from __future__ import annotations

import itertools
import json
import string
from collections import deque
from typing import Any, Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InvalidElement,
    MalformedTable,
    NoGenerators,
    NotClosed,
    SupportOverflow,
)

Element = Hashable

DEFAULT_CAP = 10**6


class Semigroup:
    """Abstract multiplication backend.

    Subclasses implement ``_mul`` on already-validated keys, ``validate``
    and the JSON key codec.  ``identity`` is ``None`` for semigroups
    without a neutral element.
    """

    name = "semigroup"
    identity: Element | None = None
    generators: tuple = ()
    finite = False

    def multiply(self, a, b):
        return self._mul(self.validate(a), self.validate(b))

    def _mul(self, a, b):
        raise NotImplementedError

    def validate(self, a):
        """Return the canonical key for ``a`` or raise InvalidElement."""
        raise NotImplementedError

    def __contains__(self, a):
        try:
            self.validate(a)
        except InvalidElement:
            return False
        return True

    def elements(self):
        raise TypeError(f"{self.name} is infinite; use ball() for a truncation")

    def sort_key(self, a):
        return a

    def sorted(self, elements: Iterable) -> list:
        return sorted(elements, key=self.sort_key)

    def key_to_json(self, a):
        return a

    def key_from_json(self, obj):
        return self.validate(obj)

    def word(self, a) -> tuple[int, ...]:
        """Indices into ``generators`` whose product is ``a``."""
        raise NotImplementedError(f"{self.name} has no word normal form")

    def __repr__(self):
        return f"<{self.name}>"


class FiniteTable(Semigroup):
    """Semigroup given by a Cayley table; ``table[i][j]`` is the index of i*j.

    ``identity='auto'`` searches the table for a two-sided identity.
    Associativity is not checked here; see :func:`is_associative`.
    """

    finite = True

    def __init__(self, table, identity: int | None | str = "auto",
                 generators: Sequence[int] | None = None,
                 labels: Sequence[Any] | None = None, name: str | None = None):
        arr = _as_table(table)
        self.n = arr.shape[0]
        self.table = arr
        self._rows = [tuple(int(v) for v in row) for row in arr]
        if identity == "auto":
            identity = _find_identity(arr)
        elif identity is not None:
            identity = int(identity)
            if not 0 <= identity < self.n:
                raise MalformedTable(f"identity index {identity} out of range")
            idx = np.arange(self.n)
            if not (np.array_equal(arr[identity], idx)
                    and np.array_equal(arr[:, identity], idx)):
                raise MalformedTable(f"index {identity} is not a two-sided identity")
        self.identity = identity
        if generators is None:
            generators = range(self.n)
        self.generators = tuple(self.validate(g) for g in generators)
        self.labels = tuple(labels) if labels is not None else None
        self.name = name or f"FiniteTable({self.n})"
        self._words = None

    def _mul(self, a, b):
        return self._rows[a][b]

    def validate(self, a):
        if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
            raise InvalidElement(f"{a!r} is not an element index of {self.name}")
        a = int(a)
        if not 0 <= a < self.n:
            raise InvalidElement(f"index {a} out of range for {self.name}")
        return a

    def elements(self):
        return tuple(range(self.n))

    def label(self, a):
        return self.labels[a] if self.labels is not None else a

    def word(self, a):
        if self._words is None:
            words = {}
            if self.identity is not None:
                words[self.identity] = ()
            queue = deque()
            for i, g in enumerate(self.generators):
                if g not in words:
                    words[g] = (i,)
                    queue.append(g)
            while queue:
                x = queue.popleft()
                for i, g in enumerate(self.generators):
                    y = self._rows[x][g]
                    if y not in words:
                        words[y] = words[x] + (i,)
                        queue.append(y)
            self._words = words
        a = self.validate(a)
        if a not in self._words:
            raise InvalidElement(f"{a} is not generated by {self.generators}")
        return self._words[a]

    def to_dict(self) -> dict:
        return {"n": self.n, "identity_index": self.identity,
                "table": [list(r) for r in self._rows]}


class FreeMonoid(Semigroup):
    """Free monoid on ``k`` letters; elements are strings, '' is the identity."""

    def __init__(self, k: int):
        if not 1 <= k <= 26:
            raise ValueError("FreeMonoid supports 1..26 letters")
        self.k = k
        self.alphabet = string.ascii_lowercase[:k]
        self.identity = ""
        self.generators = tuple(self.alphabet)
        self.name = f"FreeMonoid({k})"
        self._letters = frozenset(self.alphabet)

    def _mul(self, a, b):
        return a + b

    def validate(self, a):
        if not isinstance(a, str) or not self._letters.issuperset(a):
            raise InvalidElement(f"{a!r} is not a word over {self.alphabet!r}")
        return a

    def sort_key(self, a):
        return (len(a), a)

    def word(self, a):
        return tuple(self.alphabet.index(c) for c in self.validate(a))


class CommutativeMonoid(Semigroup):
    """N^k under addition; elements are k-tuples of nonnegative ints."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self.identity = (0,) * k
        self.generators = tuple(
            tuple(int(i == j) for j in range(k)) for i in range(k))
        self.name = f"N^{k}"

    def _mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def validate(self, a):
        if isinstance(a, (int, np.integer)) and not isinstance(a, bool) and self.k == 1:
            a = (a,)
        try:
            a = tuple(a)
        except TypeError:
            raise InvalidElement(f"{a!r} is not an element of {self.name}") from None
        if len(a) != self.k or not all(
                isinstance(x, (int, np.integer)) and not isinstance(x, bool) and x >= 0
                for x in a):
            raise InvalidElement(f"{a!r} is not an element of {self.name}")
        return tuple(int(x) for x in a)

    def sort_key(self, a):
        return (sum(a), a)

    def key_to_json(self, a):
        return list(a)

    def word(self, a):
        a = self.validate(a)
        return tuple(i for i, n in enumerate(a) for _ in range(n))


class HeisenbergElement(NamedTuple):
    """Upper unitriangular 3x3 matrix [[1, x, z], [0, 1, y], [0, 0, 1]]."""

    x: int
    y: int
    z: int

    def matrix(self):
        return ((1, self.x, self.z), (0, 1, self.y), (0, 0, 1))


class HeisenbergMonoid(Semigroup):
    """Heisenberg semigroup with nonnegative integer entries.

    (x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y').
    Generators are A = (1,0,0), B = (0,1,0), C = (0,0,1).
    """

    name = "Heisenberg"

    def __init__(self):
        self.identity = HeisenbergElement(0, 0, 0)
        self.generators = (HeisenbergElement(1, 0, 0), HeisenbergElement(0, 1, 0),
                           HeisenbergElement(0, 0, 1))

    def _mul(self, a, b):
        return HeisenbergElement(a.x + b.x, a.y + b.y, a.z + b.z + a.x * b.y)

    def validate(self, a):
        try:
            x, y, z = a
        except (TypeError, ValueError):
            raise InvalidElement(f"{a!r} is not a Heisenberg element") from None
        for v in (x, y, z):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise InvalidElement(f"{a!r} is not a Heisenberg element")
        return HeisenbergElement(int(x), int(y), int(z))

    def sort_key(self, a):
        return (word_length_heisenberg(a), tuple(a))

    def key_to_json(self, a):
        return list(a)

    def word(self, a):
        x, y, z = self.validate(a)
        paired = min(z, x * y)
        if x:
            q, rem = divmod(paired, x)
        else:
            q, rem = 0, 0
        lone = 1 if rem else 0
        return ((1,) * (y - q - lone) + (0,) * rem + (1,) * lone
                + (0,) * (x - rem) + (1,) * q + (2,) * (z - paired))


def word_length_heisenberg(a) -> int:
    """Length of a shortest word in A, B, C representing ``a``."""
    x, y, z = a
    return x + y + max(0, z - x * y)


def heisenberg_matrix_product(a, b) -> HeisenbergElement:
    """Multiply by honest 3x3 integer matrix multiplication (test oracle)."""
    ma = np.array(HeisenbergElement(*a).matrix(), dtype=object)
    mb = np.array(HeisenbergElement(*b).matrix(), dtype=object)
    m = ma.dot(mb)
    return HeisenbergElement(int(m[0, 1]), int(m[1, 2]), int(m[0, 2]))


class DirectProduct(Semigroup):
    """Componentwise product S x T; elements are pairs."""

    def __init__(self, left: Semigroup, right: Semigroup):
        self.left, self.right = left, right
        self.finite = left.finite and right.finite
        if left.identity is not None and right.identity is not None:
            self.identity = (left.identity, right.identity)
        if left.identity is not None and right.identity is not None:
            gens = [(g, right.identity) for g in left.generators]
            gens += [(left.identity, h) for h in right.generators]
        else:
            gens = list(itertools.product(left.generators, right.generators))
        self.generators = tuple(gens)
        self.name = f"{left.name} x {right.name}"

    def _mul(self, a, b):
        return (self.left._mul(a[0], b[0]), self.right._mul(a[1], b[1]))

    def validate(self, a):
        try:
            s, t = a
        except (TypeError, ValueError):
            raise InvalidElement(f"{a!r} is not a pair") from None
        return (self.left.validate(s), self.right.validate(t))

    def elements(self):
        return tuple(itertools.product(self.left.elements(), self.right.elements()))

    def sort_key(self, a):
        return (self.left.sort_key(a[0]), self.right.sort_key(a[1]))

    def key_to_json(self, a):
        return [self.left.key_to_json(a[0]), self.right.key_to_json(a[1])]

    def key_from_json(self, obj):
        s, t = obj
        return (self.left.key_from_json(s), self.right.key_from_json(t))


# -- operations ---------------------------------------------------------------

def multiply(S: Semigroup, a, b):
    return S.multiply(a, b)


def ball(S: Semigroup, radius: int, cap: int = DEFAULT_CAP) -> frozenset:
    """All products of at most ``radius`` generators (identity included)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not S.generators:
        raise NoGenerators(f"{S.name} has no generating set")
    if S.identity is None:
        raise NoGenerators(f"{S.name} has no identity, so ball(0) is undefined")
    seen = {S.identity}
    frontier = [S.identity]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for g in S.generators:
                y = S._mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > cap:
            raise SupportOverflow(f"ball({radius}) exceeds cap {cap}", len(seen), cap)
        if not nxt:
            break
        frontier = nxt
    return frozenset(seen)


def is_closed(S: Semigroup, carrier: Iterable) -> bool:
    carrier = set(carrier)
    return all(S._mul(a, b) in carrier for a in carrier for b in carrier)


def center(S: Semigroup, carrier: Iterable | None = None) -> frozenset:
    """Elements commuting with everything in a finite closed carrier."""
    items = list(S.elements() if carrier is None else (S.validate(c) for c in carrier))
    if carrier is not None and not is_closed(S, items):
        raise NotClosed("carrier is not multiplicatively closed")
    return frozenset(a for a in items
                     if all(S._mul(a, x) == S._mul(x, a) for x in items))


class Closure(NamedTuple):
    elements: frozenset
    overflow: bool


def closure(S: Semigroup, seed: Iterable, cap: int = DEFAULT_CAP) -> Closure:
    """Sub-semigroup generated by ``seed``.

    Stops once more than ``cap`` elements are found and returns the
    partial set with ``overflow=True``.
    """
    gens = [S.validate(g) for g in seed]
    seen = set(gens)
    queue = deque(seen)
    if len(seen) > cap:
        return Closure(frozenset(seen), True)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = S._mul(x, g)
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    return Closure(frozenset(seen), True)
                queue.append(y)
    return Closure(frozenset(seen), False)


def is_associative(table) -> bool:
    """True iff (ab)c = a(bc) for all triples; O(n^3)."""
    t = _as_table(table)
    return bool(np.array_equal(t[t], t[:, t]))


def _as_table(table) -> np.ndarray:
    try:
        arr = np.array(table)
    except ValueError:
        raise MalformedTable("table rows have unequal lengths") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise MalformedTable(f"table must be a nonempty square matrix, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        raise MalformedTable("table entries must be integers")
    n = arr.shape[0]
    if arr.min() < 0 or arr.max() >= n:
        raise MalformedTable("table entry out of range")
    return arr.astype(np.int64)


def _find_identity(arr: np.ndarray) -> int | None:
    idx = np.arange(arr.shape[0])
    for e in idx:
        if np.array_equal(arr[e], idx) and np.array_equal(arr[:, e], idx):
            return int(e)
    return None


# -- ingestion ----------------------------------------------------------------

def table_from_dict(data: dict, name: str | None = None) -> FiniteTable:
    """Build a FiniteTable from ``{"n", "identity_index", "table"}``."""
    try:
        n = int(data["n"])
        table = data["table"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedTable(f"table needs 'n' and 'table': {exc}") from None
    ident = data.get("identity_index")
    arr = _as_table(table)
    if arr.shape[0] != n:
        raise MalformedTable(f"declared n={n} but table is {arr.shape[0]}x{arr.shape[0]}")
    if not is_associative(arr):
        raise MalformedTable("table is not associative")
    return FiniteTable(arr, identity=ident, name=name)


def load_table(path) -> FiniteTable:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedTable(f"{path}: {exc}") from None
    return table_from_dict(data, name=str(path))


# -- constructors for standard finite semigroups ---------------------------------

def left_zero(n: int, adjoin_identity: bool = True) -> FiniteTable:
    """x*y = x on n points; identity adjoined as the last index if requested."""
    return _zero_semigroup(n, adjoin_identity, left=True)


def right_zero(n: int, adjoin_identity: bool = True) -> FiniteTable:
    """x*y = y on n points; identity adjoined as the last index if requested."""
    return _zero_semigroup(n, adjoin_identity, left=False)


def _zero_semigroup(n, adjoin_identity, left):
    size = n + 1 if adjoin_identity else n
    table = [[(i if left else j) for j in range(size)] for i in range(size)]
    if adjoin_identity:
        for i in range(size):
            table[n][i] = i
            table[i][n] = i
    kind = "LeftZero" if left else "RightZero"
    suffix = "+e" if adjoin_identity else ""
    return FiniteTable(table, identity=n if adjoin_identity else None,
                       name=f"{kind}({n}){suffix}")


def cyclic_group(n: int) -> FiniteTable:
    """Z/n with identity 0 and generator 1."""
    return FiniteTable([[(i + j) % n for j in range(n)] for i in range(n)],
                       identity=0, generators=[1 % n], name=f"Z/{n}")


def symmetric_group(n: int) -> FiniteTable:
    """S_n; index 0 is the identity permutation, labels are tuples."""
    perms = sorted(itertools.permutations(range(n)))
    return permutation_group(perms, name=f"S{n}")


def permutation_group(perms: Sequence[tuple], name: str | None = None) -> FiniteTable:
    """Table of a closed set of permutations; (p*q)(i) = p(q(i))."""
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[i]] for i in range(len(q)))] for q in perms] for p in perms]
    return FiniteTable(table, labels=perms, name=name)


def transformation_monoid(maps: Sequence[Sequence[int]], degree: int | None = None,
                          name: str | None = None) -> FiniteTable:
    """Monoid of maps on {0..d-1} generated by ``maps`` plus the identity.

    Composition is left-to-right: (f*g)(i) = g(f(i)), matching a right
    action i.(fg) = (i.f).g.
    """
    maps = [tuple(m) for m in maps]
    d = degree if degree is not None else (len(maps[0]) if maps else 0)
    ident = tuple(range(d))
    elems = [ident]
    index = {ident: 0}
    queue = deque([ident])
    while queue:
        f = queue.popleft()
        for g in maps:
            h = tuple(g[f[i]] for i in range(d))
            if h not in index:
                index[h] = len(elems)
                elems.append(h)
                queue.append(h)
    table = [[index[tuple(g[f[i]] for i in range(d))] for g in elems] for f in elems]
    gens = [index[g] for g in maps]
    return FiniteTable(table, identity=0, generators=gens or None, labels=elems,
                       name=name or f"T({d};{len(maps)} maps)")


def to_table(S: Semigroup, name: str | None = None) -> FiniteTable:
    """Re-index a finite semigroup as a FiniteTable (elements in sort order)."""
    elems = S.sorted(S.elements())
    index = {a: i for i, a in enumerate(elems)}
    table = [[index[S._mul(a, b)] for b in elems] for a in elems]
    ident = index[S.identity] if S.identity is not None else None
    return FiniteTable(table, identity=ident, labels=elems, name=name or S.name)


def abelian_group(*orders: int) -> FiniteTable:
    """Z/n1 x ... x Z/nr as a FiniteTable; the identity is index 0."""
    if not orders:
        orders = (1,)
    G = cyclic_group(orders[0])
    for n in orders[1:]:
        G = to_table(DirectProduct(G, cyclic_group(n)))
    gens = [i for i, lab in enumerate(G.labels or ()) if _is_unit_vector(lab)] if len(orders) > 1 else None
    return FiniteTable(G.table, identity=0, generators=gens,
                       labels=G.labels, name="x".join(f"Z/{n}" for n in orders))


def _is_unit_vector(label) -> bool:
    flat = list(_flatten(label))
    return sum(1 for v in flat if v) == 1 and max(flat) == 1


def _flatten(x):
    if isinstance(x, tuple):
        for y in x:
            yield from _flatten(y)
    else:
        yield x


def dihedral_group(n: int) -> FiniteTable:
    """Symmetries of the n-gon as permutations of its vertices."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    elems = set()
    frontier = [tuple(range(n))]
    elems.add(frontier[0])
    while frontier:
        p = frontier.pop()
        for g in (rot, ref):
            q = tuple(p[g[i]] for i in range(n))
            if q not in elems:
                elems.add(q)
                frontier.append(q)
    return permutation_group(sorted(elems), name=f"D{n}")


def quaternion_group() -> FiniteTable:
    """Q8 via its regular permutation representation."""
    # Elements encoded as (sign, unit) with unit in 1, i, j, k.
    units = ["1", "i", "j", "k"]
    mul = {("1", u): (1, u) for u in units}
    mul.update({(u, "1"): (1, u) for u in units})
    mul.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})
    elems = [(s, u) for s in (1, -1) for u in units]
    index = {e: i for i, e in enumerate(elems)}
    table = []
    for s1, u1 in elems:
        row = []
        for s2, u2 in elems:
            s, u = mul[(u1, u2)]
            row.append(index[(s1 * s2 * s, u)])
        table.append(row)
    return FiniteTable(table, identity=0, labels=elems, name="Q8")
