"""Finite categories, set-valued diagrams, colimits as zigzag classes, and confluence."""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .finset import ATOM, CLS, TAG, TUPLE, Element, FinFun, FinSet
from .functor import Endofunctor, components, pullback_defect
from .report import DEFAULT_SEED, Report, timed


@dataclass
class FinCat:
    """A finite category; comp[(g, f)] is g . f for f: a -> b, g: b -> c."""

    name: str
    objects: list
    morphisms: dict  # name -> (src, dst)
    comp: dict
    ids: dict = field(default_factory=dict)

    def __post_init__(self):
        for o in self.objects:
            self.ids.setdefault(o, f"id{o}")
            self.morphisms.setdefault(self.ids[o], (o, o))
        for m, (a, b) in self.morphisms.items():
            self.comp.setdefault((m, self.ids[a]), m)
            self.comp.setdefault((self.ids[b], m), m)
        self._check()

    def src(self, m):
        return self.morphisms[m][0]

    def dst(self, m):
        return self.morphisms[m][1]

    def hom(self, a, b) -> list:
        return [m for m, (s, t) in self.morphisms.items() if s == a and t == b]

    def out_of(self, a) -> list:
        return [m for m, (s, _) in self.morphisms.items() if s == a]

    def _check(self) -> None:
        mors = self.morphisms
        for f, (a, b) in mors.items():
            for g in self.out_of(b):
                h = self.comp.get((g, f))
                if h is None:
                    raise ValueError(f"{self.name}: missing composite {g}.{f}")
                if mors[h] != (a, self.dst(g)):
                    raise ValueError(f"{self.name}: composite {g}.{f} has the wrong type")
        for f in mors:
            for g in self.out_of(self.dst(f)):
                for h in self.out_of(self.dst(g)):
                    if self.comp[(h, self.comp[(g, f)])] != self.comp[(self.comp[(h, g)], f)]:
                        raise ValueError(f"{self.name}: composition is not associative at {h},{g},{f}")

    def is_connected(self) -> bool:
        if not self.objects:
            return False
        adj = defaultdict(set)
        for a, b in self.morphisms.values():
            adj[a].add(b)
            adj[b].add(a)
        seen, todo = {self.objects[0]}, [self.objects[0]]
        while todo:
            o = todo.pop()
            for p in adj[o] - seen:
                seen.add(p)
                todo.append(p)
        return len(seen) == len(self.objects)


# shape library ------------------------------------------------------------


def discrete(n: int) -> FinCat:
    return FinCat(f"discrete{n}", list(range(n)), {}, {})


def span() -> FinCat:
    return FinCat("span", [0, 1, 2], {"a1": (0, 1), "a2": (0, 2)}, {})


def cospan() -> FinCat:
    return FinCat("cospan", [0, 1, 2], {"b1": (1, 0), "b2": (2, 0)}, {})


def parallel_pair() -> FinCat:
    return FinCat("parallel", [0, 1], {"s": (0, 1), "t": (0, 1)}, {})


def ordinal(n: int) -> FinCat:
    mors = {f"{i}<{j}": (i, j) for i in range(n) for j in range(i + 1, n)}
    ids = {i: f"{i}<{i}" for i in range(n)}
    comp = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                comp[(f"{j}<{k}", f"{i}<{j}")] = f"{i}<{k}"
    return FinCat(f"chain{n}", list(range(n)), mors, comp, ids)


def cyclic_group(n: int) -> FinCat:
    mors = {f"g{k}": (0, 0) for k in range(n)}
    comp = {(f"g{a}", f"g{b}"): f"g{(a + b) % n}" for a in range(n) for b in range(n)}
    return FinCat(f"Z/{n}", [0], mors, comp, {0: "g0"})


def square() -> FinCat:
    """The commuting square 0 -> 1, 0 -> 2, 1 -> 3, 2 -> 3 (a pushout shape with its cocone)."""
    mors = {"a1": (0, 1), "a2": (0, 2), "b1": (1, 3), "b2": (2, 3), "d": (0, 3)}
    comp = {("b1", "a1"): "d", ("b2", "a2"): "d"}
    return FinCat("square", [0, 1, 2, 3], mors, comp)


def shape_library() -> list[FinCat]:
    return [
        discrete(1),
        discrete(2),
        span(),
        cospan(),
        parallel_pair(),
        ordinal(2),
        ordinal(3),
        cyclic_group(2),
        cyclic_group(3),
        square(),
    ]


def confluence_witness(C: FinCat):
    """A span (a1, a2) that admits no commuting completion, or None."""
    for I in C.objects:
        outs = C.out_of(I)
        for a1, a2 in itertools.product(outs, repeat=2):
            ok = False
            for b1 in C.out_of(C.dst(a1)):
                for b2 in C.hom(C.dst(a2), C.dst(b1)):
                    if C.comp[(b1, a1)] == C.comp[(b2, a2)]:
                        ok = True
                        break
                if ok:
                    break
            if not ok:
                return a1, a2
    return None


def is_confluent(C: FinCat) -> bool:
    return confluence_witness(C) is None


# diagrams -----------------------------------------------------------------


class Diagram:
    def __init__(self, shape: FinCat, sets: dict, maps: dict, check: bool = True):
        self.shape, self.sets, self.maps = shape, sets, maps
        for m in shape.morphisms:
            if m not in maps:
                if m == shape.ids[shape.src(m)]:
                    X = sets[shape.src(m)]
                    maps[m] = FinFun(X, X, X.elems, check=False)
                else:
                    raise ValueError(f"diagram has no map for {m}")
        if check:
            self._check()

    def _check(self) -> None:
        C = self.shape
        for m, (a, b) in C.morphisms.items():
            f = self.maps[m]
            if f.dom != self.sets[a] or f.cod != self.sets[b]:
                raise ValueError(f"map for {m} has the wrong type")
        for o in C.objects:
            if self.maps[C.ids[o]].table != self.sets[o].elems:
                raise ValueError(f"identity at {o} not preserved")
        for (g, f), h in C.comp.items():
            fg, ff, fh = self.maps[g], self.maps[f], self.maps[h]
            if any(fg(y) != z for y, z in zip(ff.table, fh.table)):
                raise ValueError(f"composition {g}.{f} not preserved")


def _node(C: FinCat, o, x) -> Element:
    return (TUPLE, ((ATOM, C.objects.index(o)), x))


def colimit(D: Diagram) -> tuple[FinSet, dict]:
    """Quotient of the disjoint union by the zigzag relation (union-find)."""
    C = D.shape
    parent: dict = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for o in C.objects:
        for x in D.sets[o]:
            n = _node(C, o, x)
            parent[n] = n
    for m, (a, b) in C.morphisms.items():
        f = D.maps[m]
        for x, y in zip(f.dom.elems, f.table):
            ra, rb = find(_node(C, a, x)), find(_node(C, b, y))
            if ra != rb:
                lo, hi = min(ra, rb), max(ra, rb)
                parent[hi] = lo
    cls = {n: (CLS, find(n)) for n in parent}
    L = FinSet(cls.values())
    cocone = {}
    for o in C.objects:
        X = D.sets[o]
        cocone[o] = FinFun(X, L, [cls[_node(C, o, x)] for x in X], check=False)
    return L, cocone


def colimit_by_search(D: Diagram) -> list[frozenset]:
    """Zigzag classes by breadth-first search on the undirected element graph."""
    C = D.shape
    adj = defaultdict(set)
    nodes = [_node(C, o, x) for o in C.objects for x in D.sets[o]]
    for m, (a, b) in C.morphisms.items():
        f = D.maps[m]
        for x, y in zip(f.dom.elems, f.table):
            u, v = _node(C, a, x), _node(C, b, y)
            adj[u].add(v)
            adj[v].add(u)
    seen, out = set(), []
    for n in nodes:
        if n in seen:
            continue
        comp, todo = {n}, [n]
        while todo:
            u = todo.pop()
            for v in adj[u] - comp:
                comp.add(v)
                todo.append(v)
        seen |= comp
        out.append(frozenset(comp))
    return out


def one_step_related(D: Diagram, a, x, b, y) -> bool:
    """(a, x) ~ (b, y) by a single cospan a -> c <- b."""
    C = D.shape
    for f in C.out_of(a):
        c = C.dst(f)
        fx = D.maps[f](x)
        for g in C.hom(b, c):
            if D.maps[g](y) == fx:
                return True
    return False


def confluent_by_representables(C: FinCat) -> bool:
    """Brute force: in every representable C(I, -), zigzag-equivalent elements are one cospan apart."""
    for I in C.objects:
        D = representable_sum(C, [I])
        for comp in colimit_by_search(D):
            nodes = sorted(comp)
            for u, v in itertools.combinations(nodes, 2):
                a, x = C.objects[u[1][0][1]], u[1][1]
                b, y = C.objects[v[1][0][1]], v[1][1]
                if not one_step_related(D, a, x, b, y):
                    return False
    return True


def colimit_map(D: Diagram, E: Diagram, t: dict) -> FinFun:
    """The map colim D -> colim E induced by a transformation t: obj -> FinFun."""
    LD, _ = colimit(D)
    LE, coE = colimit(E)
    C = D.shape
    table = []
    for c in LD:
        pair = c[1][1]
        o = C.objects[pair[0][1]]
        table.append(coE[o](t[o](pair[1])))
    return FinFun(LD, LE, table, check=False)


# random diagrams from representables -------------------------------------


def representable_sum(C: FinCat, sources: Sequence) -> Diagram:
    """The diagram sum_k C(I_k, -) with elements Tag(k, Atom(morphism index))."""
    mors = list(C.morphisms)
    idx = {m: i for i, m in enumerate(mors)}
    sets = {}
    for o in C.objects:
        sets[o] = FinSet((TAG, str(k), (ATOM, idx[m])) for k, I in enumerate(sources) for m in C.hom(I, o))
    maps = {}
    for m, (a, b) in C.morphisms.items():
        X = sets[a]
        maps[m] = FinFun(X, sets[b], [(TAG, e[1], (ATOM, idx[C.comp[(m, mors[e[2][1]])]])) for e in X], check=False)
    return Diagram(C, sets, maps)


def generated_subdiagram(D: Diagram, gens: dict) -> Diagram:
    """Smallest subdiagram containing gens[o] at each object o."""
    C = D.shape
    sub = {o: set(gens.get(o, ())) for o in C.objects}
    changed = True
    while changed:
        changed = False
        for m, (a, b) in C.morphisms.items():
            for x in list(sub[a]):
                y = D.maps[m](x)
                if y not in sub[b]:
                    sub[b].add(y)
                    changed = True
    sets = {o: FinSet(sub[o]) for o in C.objects}
    maps = {m: FinFun(sets[a], sets[b], [D.maps[m](x) for x in sets[a]], check=False) for m, (a, b) in C.morphisms.items()}
    return Diagram(C, sets, maps)


def inverse_image_diagram(D: Diagram, t: dict, E0: Diagram) -> Diagram:
    C = D.shape
    sets = {o: D.sets[o].subset(lambda x, o=o: t[o](x) in E0.sets[o]) for o in C.objects}
    maps = {m: FinFun(sets[a], sets[b], [D.maps[m](x) for x in sets[a]]) for m, (a, b) in C.morphisms.items()}
    return Diagram(C, sets, maps)


def _inclusion_transf(sub: Diagram, D: Diagram) -> dict:
    return {o: FinFun(sub.sets[o], D.sets[o], sub.sets[o].elems) for o in D.shape.objects}


def _square_defect(Phi0, Phi, Gamma0, Gamma, t):
    """Compare colim Phi0 with the pullback of colim Gamma0 along colim t."""
    C = Phi.shape
    t0 = {o: FinFun(Phi0.sets[o], Gamma0.sets[o], [t[o](x) for x in Phi0.sets[o]]) for o in C.objects}
    top = colimit_map(Phi0, Gamma0, t0)
    left = colimit_map(Phi0, Phi, {o: f for o, f in _inclusion_transf(Phi0, Phi).items()})
    right = colimit_map(Gamma0, Gamma, _inclusion_transf(Gamma0, Gamma))
    bottom = colimit_map(Phi, Gamma, t)
    return pullback_defect(top, left, right, bottom), len(top.dom)


def representable_counterexample(C: FinCat, a1, a2) -> dict:
    """Run the representable construction on a span that has no completion."""
    I, I1, I2 = C.src(a1), C.dst(a1), C.dst(a2)
    Gamma = representable_sum(C, [I])
    mors = list(C.morphisms)
    idx = {m: i for i, m in enumerate(mors)}
    Gamma0 = generated_subdiagram(Gamma, {I2: [(TAG, "0", (ATOM, idx[a2]))]})
    Phi = representable_sum(C, [I1])
    t = {}
    for o in C.objects:
        X = Phi.sets[o]
        t[o] = FinFun(X, Gamma.sets[o], [(TAG, "0", (ATOM, idx[C.comp[(mors[e[2][1]], a1)]])) for e in X])
    Phi0 = inverse_image_diagram(Phi, t, Gamma0)
    defect, n0 = _square_defect(Phi0, Phi, Gamma0, Gamma, t)
    L0, _ = colimit(Gamma0)
    LP, _ = colimit(Phi)
    bottom = colimit_map(Phi, Gamma, t)
    right = colimit_map(Gamma0, Gamma, _inclusion_transf(Gamma0, Gamma))
    hit = set(right.table)
    pullback = sum(1 for y in bottom.table if y in hit)
    return {
        "span": [a1, a2],
        "colim_Phi0": n0,
        "colim_Phi": len(LP),
        "colim_Gamma0": len(L0),
        "pullback_of_colimits": pullback,
        "defect": defect,
    }


def random_square(C: FinCat, rng: random.Random):
    objs = C.objects
    mors = list(C.morphisms)
    Gamma = representable_sum(C, [rng.choice(objs) for _ in range(rng.randint(1, 2))])
    sources = [rng.choice(objs) for _ in range(rng.randint(1, 3))]
    Phi = representable_sum(C, sources)
    # a transformation out of a representable is one element of Gamma at its source (Yoneda)
    pick = []
    for I in sources:
        els = Gamma.sets[I].elems
        if not els:
            return None
        pick.append(els[rng.randrange(len(els))])
    t = {}
    for o in objs:
        X = Phi.sets[o]
        t[o] = FinFun(X, Gamma.sets[o], [Gamma.maps[mors[e[2][1]]](pick[int(e[1])]) for e in X])
    gens = {}
    for o in objs:
        els = Gamma.sets[o].elems
        if els and rng.random() < 0.4:
            gens[o] = [els[rng.randrange(len(els))]]
    Gamma0 = generated_subdiagram(Gamma, gens)
    Phi0 = inverse_image_diagram(Phi, t, Gamma0)
    return Phi0, Phi, Gamma0, Gamma, t


def check_colimit_commutes_with_inverse_images(C: FinCat, trials: int = 50, seed: int = DEFAULT_SEED) -> Report:
    rep = Report(f"colimits vs inverse images on {C.name}", params={"trials": trials, "seed": seed})
    rng = random.Random(seed)
    conf = confluence_witness(C)
    rep.details["confluent"] = conf is None
    with timed(rep):
        failures = 0
        done = 0
        while done < trials:
            sq = random_square(C, rng)
            if sq is None:
                continue
            done += 1
            d, _ = _square_defect(*sq)
            if d is not None:
                failures += 1
                if conf is None:
                    rep.fail(d)
        rep.details["sampled_failures"] = failures
        if conf is not None:
            ce = representable_counterexample(C, *conf)
            rep.details["counterexample"] = ce
            # on a non-confluent shape the theorem predicts a failure: the report passes iff it is witnessed
            if ce["defect"] is None:
                rep.fail({"reason": "representable counterexample did not fire", "span": list(conf)})
    return rep


def diagram_at(shape: FinCat, functors: dict, transfs: dict, X: FinSet) -> Diagram:
    sets = {o: functors[o](X) for o in shape.objects}
    maps = {m: transfs[m].component(X) for m in transfs}
    return Diagram(shape, sets, maps, check=False)


def pi0(F: Endofunctor, K: int = 3) -> list:
    """Connected components of F: one subfunctor per element of F(1)."""
    return components(F, K)
