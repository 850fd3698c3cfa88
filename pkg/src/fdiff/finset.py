"""Finite sets of canonical elements, total maps, permutation groups and actions.

Elements are plain nested tuples whose first entry is a variant rank, so the
builtin tuple order gives the required total order
(Atom < Star < Tuple < Tag < Cls, then lexicographic).
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from typing import Callable, Iterable, Iterator, Mapping, Sequence

ATOM, STAR_RANK, TUPLE, TAG, CLS = 0, 1, 2, 3, 4

Element = tuple

STAR: Element = (STAR_RANK,)


def Atom(n: int) -> Element:
    if n < 0:
        raise ValueError("atom payload must be non-negative")
    return (ATOM, n)


def Tuple(items: Iterable[Element]) -> Element:
    return (TUPLE, tuple(items))


def Tag(label: str, e: Element) -> Element:
    return (TAG, str(label), e)


def Cls(rep: Element) -> Element:
    return (CLS, rep)


def kind(e: Element) -> int:
    return e[0]


def items(e: Element) -> tuple:
    """Components of a Tuple element."""
    if e[0] != TUPLE:
        raise TypeError(f"not a tuple element: {show(e)}")
    return e[1]


def untag(e: Element) -> tuple[str, Element]:
    if e[0] != TAG:
        raise TypeError(f"not a tagged element: {show(e)}")
    return e[1], e[2]


def unwrap(e: Element) -> Element:
    if e[0] != CLS:
        raise TypeError(f"not a class element: {show(e)}")
    return e[1]


def show(e: Element) -> str:
    k = e[0]
    if k == ATOM:
        return str(e[1])
    if k == STAR_RANK:
        return "*"
    if k == TUPLE:
        return "(" + ",".join(show(x) for x in e[1]) + ")"
    if k == TAG:
        return f"{e[1]}:{show(e[2])}"
    if k == CLS:
        return "[" + show(e[1]) + "]"
    raise ValueError(f"malformed element {e!r}")


def to_json(e: Element):
    """JSON-friendly rendering that keeps the variant visible."""
    k = e[0]
    if k == ATOM:
        return e[1]
    if k == STAR_RANK:
        return "*"
    if k == TUPLE:
        return [to_json(x) for x in e[1]]
    if k == TAG:
        return {"tag": e[1], "of": to_json(e[2])}
    return {"cls": to_json(e[1])}


class FinSet:
    """Strictly ordered, duplicate-free, immutable sequence of elements."""

    __slots__ = ("elems", "_index", "_hash")

    def __init__(self, elems: Iterable[Element] = ()):
        self.elems = tuple(sorted(set(elems)))
        self._index = None
        self._hash = hash(self.elems)

    @classmethod
    def _trusted(cls, elems: tuple) -> "FinSet":
        s = cls.__new__(cls)
        s.elems = elems
        s._index = None
        s._hash = hash(elems)
        return s

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {e: i for i, e in enumerate(self.elems)}
        return self._index

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elems)

    def __contains__(self, e) -> bool:
        return e in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, FinSet) and self._hash == other._hash and self.elems == other.elems

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: "FinSet") -> bool:
        return all(e in other for e in self.elems)

    def __repr__(self) -> str:
        return "{" + ", ".join(show(e) for e in self.elems) + "}"

    def union(self, other: "FinSet") -> "FinSet":
        return FinSet(self.elems + other.elems)

    def minus(self, other: Iterable[Element]) -> "FinSet":
        drop = set(other)
        return FinSet._trusted(tuple(e for e in self.elems if e not in drop))

    def subset(self, pred: Callable[[Element], bool]) -> "FinSet":
        return FinSet._trusted(tuple(e for e in self.elems if pred(e)))


EMPTY = FinSet()


def card(n: int) -> FinSet:
    """The standard n-element set {0, ..., n-1}."""
    return FinSet._trusted(tuple((ATOM, i) for i in range(n)))


def point(k: int) -> Element:
    """The k-th adjoined point: Star, then Star wrapped k times in a '+' tag."""
    e = STAR
    for _ in range(k):
        e = (TAG, "+", e)
    return e


def fresh_points(X: FinSet, k: int) -> list[Element]:
    """The first k adjoined points not already in X, in order."""
    out, i = [], 0
    while len(out) < k:
        p = point(i)
        if p not in X:
            out.append(p)
        i += 1
    return out


def extend(X: FinSet, k: int = 1) -> FinSet:
    """X + k, realized by adjoining fresh points (so extend(extend(X)) == extend(X, 2))."""
    if k == 0:
        return X
    return FinSet(X.elems + tuple(fresh_points(X, k)))


def points(n: int) -> FinSet:
    """The n-element set 0 + n made of adjoined points."""
    return extend(EMPTY, n)


class FinFun:
    """A total map dom -> cod, stored as a table aligned with dom.elems."""

    __slots__ = ("dom", "cod", "table", "_map", "_hash")

    def __init__(self, dom: FinSet, cod: FinSet, mapping, check: bool = True):
        self.dom = dom
        self.cod = cod
        if callable(mapping) and not isinstance(mapping, Mapping):
            table = tuple(mapping(x) for x in dom.elems)
        elif isinstance(mapping, Mapping):
            try:
                table = tuple(mapping[x] for x in dom.elems)
            except KeyError as exc:
                raise ValueError(f"map is not total: missing {show(exc.args[0])}") from None
        else:
            table = tuple(mapping)
            if len(table) != len(dom):
                raise ValueError("table length does not match domain")
        if check:
            for y in table:
                if y not in cod:
                    raise ValueError(f"image {show(y)} not in codomain")
        self.table = table
        self._map = None
        self._hash = hash((dom, cod, table))

    @property
    def mapping(self) -> dict:
        if self._map is None:
            self._map = dict(zip(self.dom.elems, self.table))
        return self._map

    def __call__(self, x: Element) -> Element:
        return self.mapping[x]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FinFun)
            and self._hash == other._hash
            and self.dom == other.dom
            and self.cod == other.cod
            and self.table == other.table
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        pairs = ", ".join(f"{show(x)}->{show(y)}" for x, y in zip(self.dom.elems, self.table))
        return f"FinFun({pairs})"

    def image(self) -> FinSet:
        return FinSet(self.table)

    def is_mono(self) -> bool:
        return len(set(self.table)) == len(self.table)

    def is_epi(self) -> bool:
        return len(set(self.table)) == len(self.cod)

    def is_iso(self) -> bool:
        return len(self.dom) == len(self.cod) and self.is_mono()

    def inverse(self) -> "FinFun":
        if not self.is_iso():
            raise ValueError("not a bijection")
        return FinFun(self.cod, self.dom, dict(zip(self.table, self.dom.elems)), check=False)


def identity(X: FinSet) -> FinFun:
    return FinFun(X, X, X.elems, check=False)


def inclusion(sub: FinSet, X: FinSet) -> FinFun:
    return FinFun(sub, X, sub.elems)


def compose(g: FinFun, f: FinFun) -> FinFun:
    """g after f."""
    if f.cod != g.dom:
        raise ValueError("maps are not composable")
    gm = g.mapping
    return FinFun(f.dom, g.cod, tuple(gm[y] for y in f.table), check=False)


def to_terminal(X: FinSet) -> FinFun:
    one = card(1)
    return FinFun(X, one, ((ATOM, 0),) * len(X), check=False)


def succ_map(f: FinFun, k: int = 1) -> FinFun:
    """f + k : dom + k -> cod + k, sending the i-th adjoined point to the i-th."""
    if k == 0:
        return f
    src = extend(f.dom, k)
    dst = extend(f.cod, k)
    m = dict(f.mapping)
    m.update(zip(fresh_points(f.dom, k), fresh_points(f.cod, k)))
    return FinFun(src, dst, m, check=False)


def image_factorize(f: FinFun) -> tuple[FinFun, FinFun]:
    """f = mono . epi, the middle object being the image with the cod order."""
    im = f.image()
    epi = FinFun(f.dom, im, f.table, check=False)
    return epi, inclusion(im, f.cod)


def inverse_image(f: FinFun, sub: FinSet) -> FinSet:
    if not sub <= f.cod:
        raise ValueError("inverse_image: subset is not contained in the codomain")
    return FinSet._trusted(tuple(x for x, y in zip(f.dom.elems, f.table) if y in sub))


def all_functions(X: FinSet, Y: FinSet) -> Iterator[FinFun]:
    for table in itertools.product(Y.elems, repeat=len(X)):
        yield FinFun(X, Y, table, check=False)


def subsets(X: FinSet) -> Iterator[FinSet]:
    for r in range(len(X) + 1):
        for c in itertools.combinations(X.elems, r):
            yield FinSet._trusted(c)


def enumerate_monos(n: int, X: FinSet) -> list[FinFun]:
    src = card(n)
    return [FinFun(src, X, t, check=False) for t in itertools.permutations(X.elems, n)]


def surjection_tuples(m: int, n: int) -> list[tuple[int, ...]]:
    """Surjections m ->> n as image tuples, in lexicographic order."""
    return [s for s in itertools.product(range(n), repeat=m) if len(set(s)) == n]


def enumerate_surjections(m: int, n: int) -> list[FinFun]:
    src, dst = card(m), card(n)
    return [FinFun(src, dst, [(ATOM, i) for i in s], check=False) for s in surjection_tuples(m, n)]


def stirling2(m: int, n: int) -> int:
    return sum((-1) ** (n - j) * math.comb(n, j) * j**m for j in range(n + 1)) // math.factorial(n)


# permutations: tuples p with p[i] the image of i

Perm = tuple


def perm_compose(p: Perm, q: Perm) -> Perm:
    """p after q."""
    return tuple(p[i] for i in q)


def perm_inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def perm_from_cycles(n: int, cycles: Sequence[Sequence[int]]) -> Perm:
    p = list(range(n))
    seen = set()
    for cyc in cycles:
        for a in cyc:
            if not 0 <= a < n or a in seen:
                raise ValueError(f"malformed permutation cycle {list(cyc)}")
            seen.add(a)
        for a, b in zip(cyc, tuple(cyc[1:]) + tuple(cyc[:1])):
            p[a] = b
    return tuple(p)


MAX_DEGREE = 8


class PermGroup:
    """Subgroup of S_n given by generators, closed by breadth-first search."""

    def __init__(self, degree: int, generators: Iterable[Perm] = (), max_degree: int | None = None):
        bound = MAX_DEGREE if max_degree is None else max_degree
        if degree > bound:
            raise ValueError(f"degree {degree} exceeds the enumeration bound {bound}")
        gens = []
        for g in generators:
            g = tuple(g)
            if sorted(g) != list(range(degree)):
                raise ValueError(f"{list(g)} is not a permutation of {degree} points")
            gens.append(g)
        self.degree = degree
        self.generators = tuple(gens)
        ident = tuple(range(degree))
        seen = {ident}
        queue = deque([ident])
        while queue:
            p = queue.popleft()
            for g in self.generators:
                q = perm_compose(g, p)
                if q not in seen:
                    seen.add(q)
                    queue.append(q)
        self.elements = tuple(sorted(seen))
        self._set = seen

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, PermGroup) and self.degree == other.degree and self._set == other._set

    def __hash__(self) -> int:
        return hash((self.degree, self.elements))

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={len(self)})"

    def identity(self) -> Perm:
        return tuple(range(self.degree))


def symmetric(n: int) -> PermGroup:
    gens = []
    if n >= 2:
        gens.append(perm_from_cycles(n, [(0, 1)]))
        gens.append(perm_from_cycles(n, [tuple(range(n))]))
    return PermGroup(n, gens)


def trivial(n: int) -> PermGroup:
    return PermGroup(n, [])


def cyclic(n: int) -> PermGroup:
    return PermGroup(n, [perm_from_cycles(n, [tuple(range(n))])] if n >= 2 else [])


def subgroup(G: PermGroup, elems: Iterable[Perm]) -> PermGroup:
    """The subgroup of G generated by elems (which must lie in G)."""
    elems = [tuple(e) for e in elems]
    for e in elems:
        if e not in G:
            raise ValueError("generator not in the ambient group")
    return PermGroup(G.degree, elems)


def direct_product(G: PermGroup, H: PermGroup) -> PermGroup:
    n = G.degree
    gens = [tuple(g) + tuple(range(n, n + H.degree)) for g in G.generators]
    gens += [tuple(range(n)) + tuple(n + h for h in hh) for hh in H.generators]
    return PermGroup(n + H.degree, gens)


def all_subgroups(n: int) -> list[PermGroup]:
    """Every subgroup of S_n (naive; only for n <= 5)."""
    if n > 5:
        raise ValueError("full subgroup enumeration is limited to degree <= 5")
    S = symmetric(n)
    found: dict[frozenset, PermGroup] = {}
    frontier = [trivial(n)]
    found[frozenset(frontier[0]._set)] = frontier[0]
    while frontier:
        nxt = []
        for H in frontier:
            for g in S.elements:
                if g in H:
                    continue
                K = PermGroup(n, H.generators + (g,))
                key = frozenset(K._set)
                if key not in found:
                    found[key] = K
                    nxt.append(K)
        frontier = nxt
    return sorted(found.values(), key=lambda K: (len(K), K.elements))


class GroupAction:
    """Left action of a permutation group on a finite set."""

    def __init__(self, group: PermGroup, carrier: FinSet, act: Callable[[Perm, Element], Element]):
        self.group = group
        self.carrier = carrier
        self._act = act

    def act(self, g: Perm, x: Element) -> Element:
        return self._act(tuple(g), x)

    def check(self) -> None:
        """Assert the action laws on the whole group."""
        ident = self.group.identity()
        for x in self.carrier:
            if self.act(ident, x) != x:
                raise ValueError(f"identity moves {show(x)}")
        for g in self.group:
            for x in self.carrier:
                if self.act(g, x) not in self.carrier:
                    raise ValueError("action leaves the carrier")
        for g in self.group:
            for h in self.group:
                gh = perm_compose(g, h)
                for x in self.carrier:
                    if self.act(gh, x) != self.act(g, self.act(h, x)):
                        raise ValueError("action is not compatible with composition")

    def orbit(self, x: Element) -> FinSet:
        return FinSet(self.act(g, x) for g in self.group)


def orbits(action: GroupAction) -> list[tuple[Element, FinSet]]:
    seen: set = set()
    out = []
    for x in action.carrier:
        if x in seen:
            continue
        orb = action.orbit(x)
        seen.update(orb)
        out.append((orb.elems[0], orb))
    out.sort(key=lambda t: t[0])
    return out


def stabilizer(action: GroupAction, x: Element) -> PermGroup:
    if x not in action.carrier:
        raise ValueError(f"{show(x)} is not in the carrier")
    fixing = [g for g in action.group if action.act(g, x) == x]
    H = PermGroup(action.group.degree, fixing)
    assert len(action.orbit(x)) * len(H) == len(action.group), "orbit-stabilizer failed"
    return H


def tuple_action(G: PermGroup, X: FinSet) -> GroupAction:
    """G acting on X^n by permuting positions: g.t = t o g^-1."""
    carrier = FinSet(Tuple(t) for t in itertools.product(X.elems, repeat=G.degree))

    def act(g, t):
        ts = t[1]
        inv = perm_inverse(g)
        return (TUPLE, tuple(ts[inv[i]] for i in range(len(ts))))

    return GroupAction(G, carrier, act)


def min_over_group(G: PermGroup, t: tuple) -> tuple:
    """Least rearrangement t o g (positions permuted by g) over g in G."""
    return min(tuple(t[i] for i in g) for g in G.elements)
