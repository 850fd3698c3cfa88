"""Soft species, Newton sums, the Delta* extraction and the checks tying them together.

A soft species is a functor from finite cardinals and surjections to finite
sets, truncated at an explicit degree N. Surjections m ->> n are image tuples s
with s[i] the image of i, composed as (t . s)[i] = t[s[i]].
"""

from __future__ import annotations

import itertools
import json
import random
from math import comb
from typing import Callable, Iterable

from .classes import AnalyticFunctor, SpeciesSpec
from .delta import PointedDelta
from .finset import (
    ATOM,
    CLS,
    STAR,
    TAG,
    TUPLE,
    Element,
    FinFun,
    FinSet,
    PermGroup,
    all_subgroups,
    card,
    perm_inverse,
    points,
    show,
    surjection_tuples,
    symmetric,
    trivial,
)
from .functor import Endofunctor, NatTransf, check_taut_transf, iso_witness, require_taut
from .report import Report, timed

Surj = tuple


def surjections(N: int) -> list[Surj]:
    """Every surjection m ->> n with n <= m <= N."""
    return [s for m in range(N + 1) for n in range(m + 1) for s in surjection_tuples(m, n)]


def target(s: Surj) -> int:
    return max(s) + 1 if s else 0


def scompose(t: Surj, s: Surj) -> Surj:
    return tuple(t[i] for i in s)


class SoftSpecies:
    """Sets G(0..N) with an action of every surjection, checked functorial on construction."""

    def __init__(self, N: int, sets: dict[int, Iterable[Element]], act: Callable[[Surj, Element], Element],
                 name: str = "G", check: bool = True):
        self.N, self.name = N, name
        self.sets = {n: FinSet(sets.get(n, ())) for n in range(N + 1)}
        self.actions: dict[Surj, FinFun] = {}
        for s in surjections(N):
            m, n = len(s), target(s)
            self.actions[s] = FinFun(self.sets[m], self.sets[n], lambda a, s=s: act(s, a), check=check)
        if check:
            self.check()

    def __call__(self, n: int) -> FinSet:
        return self.sets[n]

    def act(self, s: Surj, a: Element) -> Element:
        return self.actions[s](a)

    def sizes(self) -> list[int]:
        return [len(self.sets[n]) for n in range(self.N + 1)]

    def check(self) -> None:
        for m in range(self.N + 1):
            ident = tuple(range(m))
            if self.actions[ident].table != self.sets[m].elems:
                raise ValueError(f"{self.name}: the identity of {m} acts non-trivially")
        for s in self.actions:
            n = target(s)
            for l in range(n + 1):
                for t in surjection_tuples(n, l):
                    ts = scompose(t, s)
                    for a in self.sets[len(s)]:
                        if self.act(ts, a) != self.act(t, self.act(s, a)):
                            raise ValueError(f"{self.name}: action of {ts} differs from {t} after {s} at {show(a)}")

    def truncate(self, N: int) -> "SoftSpecies":
        if N > self.N:
            raise ValueError("cannot raise the truncation degree of a stored species")
        return SoftSpecies(N, {n: self.sets[n] for n in range(N + 1)}, self.act, self.name, check=False)

    def to_json(self) -> dict:
        idx = {n: {a: i for i, a in enumerate(self.sets[n])} for n in self.sets}
        acts = {}
        for s, f in self.actions.items():
            if len(s) == target(s) == 0:
                continue
            acts[f"{len(s)}->{target(s)}:{','.join(map(str, s))}"] = [idx[target(s)][b] for b in f.table]
        return {"N": self.N, "G": self.sizes(), "actions": acts}


class SpeciesMap:
    """A natural map of soft species, checked against every surjection."""

    def __init__(self, src: SoftSpecies, dst: SoftSpecies, comp: Callable[[int, Element], Element], name: str = "u"):
        if src.N != dst.N:
            raise ValueError("truncation degrees differ")
        self.src, self.dst, self.name = src, dst, name
        self.comps = {n: FinFun(src(n), dst(n), lambda a, n=n: comp(n, a)) for n in range(src.N + 1)}
        for s in src.actions:
            m, n = len(s), target(s)
            for a in src(m):
                if self.comps[n](src.act(s, a)) != dst.act(s, self.comps[m](a)):
                    raise ValueError(f"{name} is not natural at {s}, {show(a)}")

    def __call__(self, n: int, a: Element) -> Element:
        return self.comps[n](a)


# building soft species ----------------------------------------------------


def representable_quotient(m: int, H: PermGroup, N: int) -> SoftSpecies:
    """Surj(m, -)/H: surjections out of m up to precomposition with H."""

    def canon(s):
        return (TUPLE, min(tuple((ATOM, s[h[i]]) for i in range(m)) for h in H))

    sets = {n: {canon(s) for s in surjection_tuples(m, n)} for n in range(N + 1)}
    return SoftSpecies(N, sets, lambda t, a: canon(scompose(t, tuple(x[1] for x in a[1]))),
                       f"Surj({m},-)/{len(H.elements)}", check=False)


def truncated_constant(d: int, N: int) -> SoftSpecies:
    """One point in each degree n <= d, nothing above."""
    return SoftSpecies(N, {n: [STAR] for n in range(min(d, N) + 1)}, lambda s, a: a, f"1<={d}", check=False)


def concentrated(C: FinSet, N: int) -> SoftSpecies:
    """C in degree 0 only (a non-empty higher degree would need maps down to the empty degrees)."""
    return SoftSpecies(N, {0: C}, lambda s, a: a, f"{len(C)}@0", check=False)


def species_sum(parts: list[SoftSpecies], name: str | None = None) -> SoftSpecies:
    N = parts[0].N
    sets = {n: [(TAG, str(i), a) for i, G in enumerate(parts) for a in G(n)] for n in range(N + 1)}

    def act(s, e):
        return (TAG, e[1], parts[int(e[1])].act(s, e[2]))

    return SoftSpecies(N, sets, act, name or " + ".join(G.name for G in parts), check=False)


def random_soft_species(rng: random.Random, N: int = 3, max_size: int = 4) -> SoftSpecies:
    """A sum of representable quotients and truncated constants with every |G(n)| <= max_size."""
    pieces = [truncated_constant(d, N) for d in range(N + 1)]
    for m in range(N + 1):
        for H in all_subgroups(m):
            pieces.append(representable_quotient(m, H, N))
    pieces = [P for P in pieces if max(P.sizes()) <= max_size]
    chosen: list[SoftSpecies] = []
    sizes = [0] * (N + 1)
    for _ in range(rng.randint(1, 4)):
        P = rng.choice(pieces)
        new = [a + b for a, b in zip(sizes, P.sizes())]
        if max(new) <= max_size:
            chosen.append(P)
            sizes = new
    if not chosen:
        chosen = [truncated_constant(0, N)]
    G = species_sum(chosen)
    G.check()
    return G


def load_species(obj: dict | str) -> SoftSpecies:
    """Read {"N": .., "G": [sizes], "actions": {"m->n:s": [images]}}; missing actions are composed."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    N, sizes = int(obj["N"]), list(obj["G"])
    if len(sizes) != N + 1:
        raise ValueError(f"G lists {len(sizes)} sizes for N = {N}")
    known: dict[Surj, tuple] = {tuple(range(m)): tuple(range(sizes[m])) for m in range(N + 1)}
    for key, images in obj.get("actions", {}).items():
        head, _, body = key.partition(":")
        m, n = (int(x) for x in head.split("->"))
        s = tuple(int(x) for x in body.split(",")) if body.strip() else ()
        if len(s) != m or (s and sorted(set(s)) != list(range(n))) or (not s and n != 0):
            raise ValueError(f"{key!r} is not a surjection {m} ->> {n}")
        if len(images) != sizes[m] or any(not 0 <= b < sizes[n] for b in images):
            raise ValueError(f"{key!r}: images do not map G({m}) into G({n})")
        if s in known and known[s] != tuple(images):
            raise ValueError(f"{key!r} conflicts with the identity")
        known[s] = tuple(images)
    changed = True
    while changed:
        changed = False
        for s, fs in list(known.items()):
            for t, ft in list(known.items()):
                if len(t) != target(s):
                    continue
                ts = scompose(t, s)
                val = tuple(ft[b] for b in fs)
                if ts in known:
                    if known[ts] != val:
                        raise ValueError(f"composite {ts} is forced to two different actions")
                else:
                    known[ts] = val
                    changed = True
    missing = [s for s in surjections(N) if s not in known]
    if missing:
        raise ValueError(f"actions do not generate surjection {missing[0]}")
    sets = {n: card(sizes[n]).elems for n in range(N + 1)}
    return SoftSpecies(N, sets, lambda s, a: (ATOM, known[s][a[1]]), obj.get("name", "G"))


# Newton sum ---------------------------------------------------------------


class NewtonSum(Endofunctor):
    """The coend of X^n x G(n) over surjections, with elements [f, a] for f monic and increasing."""

    def __init__(self, G: SoftSpecies, name: str | None = None):
        super().__init__()
        self.G = G
        self.name = name or f"newton({G.name})"

    def _elements(self, X):
        for n in range(self.G.N + 1):
            for img in itertools.combinations(X.elems, n):
                for a in self.G(n):
                    yield (CLS, (TUPLE, ((TUPLE, img), a)))

    def act(self, f, e):
        img, a = e[1][1]
        g = [f.mapping[x] for x in img[1]]
        vals = sorted(set(g))
        pos = {v: i for i, v in enumerate(vals)}
        return (CLS, (TUPLE, ((TUPLE, tuple(vals)), self.G.act(tuple(pos[v] for v in g), a))))


def newton_sum(G: SoftSpecies) -> NewtonSum:
    return NewtonSum(G)


def newton_sum_transf(u: SpeciesMap) -> NatTransf:
    src, dst = NewtonSum(u.src), NewtonSum(u.dst)

    def apply(X, e):
        img, a = e[1][1]
        return (CLS, (TUPLE, (img, u(len(img[1]), a))))

    return NatTransf(src, dst, apply, f"newton({u.name})")


def cardinality_formula(G: SoftSpecies, k: int) -> int:
    return sum(comb(k, n) * len(G(n)) for n in range(G.N + 1))


# Delta* -------------------------------------------------------------------


def _points_map(s: Surj) -> FinFun:
    P, Q = points(len(s)), points(target(s))
    return FinFun(P, Q, [Q.elems[i] for i in s], check=False)


def delta_star(F: Endofunctor, N: int, K: int = 3) -> SoftSpecies:
    """n |-> Delta^n[F](0) with surjections acting through F; landing is checked."""
    require_taut(F, K)
    sets = {n: PointedDelta(F, n)(points(0)) for n in range(N + 1)}
    return SoftSpecies(N, sets, lambda s, a: F.act(_points_map(s), a), f"delta*({F.name})")


def unit_iso_check(G: SoftSpecies) -> Report:
    """a |-> [id_n, a] is a bijection G(n) -> Delta^n[newton G](0) commuting with every surjection."""
    rep = Report(f"unit iso {G.name}", params={"N": G.N})
    with timed(rep):
        Gt = NewtonSum(G)
        D = delta_star(Gt, G.N)

        def eta(n, a):
            return (CLS, (TUPLE, ((TUPLE, points(n).elems), a)))

        for n in range(G.N + 1):
            image = [eta(n, a) for a in G(n)]
            if FinSet(image) != D(n):
                rep.fail({"degree": n, "G": len(G(n)), "delta^n": len(D(n))})
        for s in G.actions:
            m, n = len(s), target(s)
            for a in G(m):
                if eta(n, G.act(s, a)) != D.act(s, eta(m, a)):
                    rep.fail({"surjection": list(s), "element": show(a)})
        rep.details["sizes"] = G.sizes()
    return rep


def counit(F: Endofunctor, G: SoftSpecies) -> NatTransf:
    """[f, a] |-> F(f)(a) for G = Delta*[F]."""
    Gt = NewtonSum(G)

    def apply(X, e):
        img, a = e[1][1]
        n = len(img[1])
        return F.act(FinFun(points(n), X, list(img[1]), check=False), a)

    return NatTransf(Gt, F, apply, "counit")


def newton_roundtrip(F: Endofunctor, N: int, K: int = 4) -> Report:
    """newton(Delta*[F]) -> F is a natural bijection at |X| <= K."""
    G = delta_star(F, N)
    e = counit(F, G)
    rep = iso_witness(e.src, F, K, explicit=e)
    rep.name = f"newton roundtrip {F.name}"
    rep.params["N"] = N
    rep.details["delta_star_sizes"] = G.sizes()
    return rep


def truncation_contrast(F: Endofunctor, N: int, kmax: int = 4) -> list[list[int]]:
    """Rows [k, |F(k)|, |newton(Delta*_N F)(k)|]; a low N under-counts."""
    Gt = NewtonSum(delta_star(F, N))
    return [[k, F.size(k), Gt.size(k)] for k in range(kmax + 1)]


# softening a species -------------------------------------------------------


def soften(spec: SpeciesSpec, N: int) -> SoftSpecies:
    """n |-> sum over m of (Surj(m, n) x C_m)/S_m, with (s . p; c) ~ (s; p.c)."""
    if any(m > N for m in spec.coeffs):
        raise ValueError(f"species has coefficients above N = {N}")
    perms = {m: [(p, perm_inverse(p)) for p in symmetric(m)] for m in spec.coeffs}

    def canon(m, s, c):
        act = spec.coeffs[m].act
        best = min((tuple((ATOM, s[p[i]]) for i in range(m)), act(pinv, c)) for p, pinv in perms[m])
        return (TAG, str(m), (TUPLE, ((TUPLE, best[0]), best[1])))

    sets = {}
    for n in range(N + 1):
        sets[n] = {canon(m, s, c) for m, A in spec.coeffs.items() if m >= n
                   for s in surjection_tuples(m, n) for c in A.carrier}

    def act(t, e):
        m = int(e[1])
        s, c = e[2][1]
        return canon(m, scompose(t, tuple(x[1] for x in s[1])), c)

    return SoftSpecies(N, sets, act, f"soft({spec})")


def softened_vs_analytic(spec: SpeciesSpec, N: int, K: int = 4) -> Report:
    """newton(soften(C)) and the analytic functor of C agree through [f, (s; c)] |-> [f . s; c]."""
    A = AnalyticFunctor(spec)
    Gt = NewtonSum(soften(spec, N))

    def apply(X, e):
        img, a = e[1][1]
        m = int(a[1])
        s, c = a[2][1]
        return A.canon(m, tuple(img[1][x[1]] for x in s[1]), c)

    rep = iso_witness(Gt, A, K, explicit=NatTransf(Gt, A, apply, "soft-to-analytic"))
    rep.name = f"softened {spec} vs analytic"
    return rep


# the factorization criterion -----------------------------------------------


def mate(G: SoftSpecies, F: Endofunctor, u: Callable[[int, Element], Element]) -> NatTransf:
    """t[f, a] = F(f)(u(n)(a))."""
    Gt = NewtonSum(G)

    def apply(X, e):
        img, a = e[1][1]
        n = len(img[1])
        return F.act(FinFun(points(n), X, list(img[1]), check=False), u(n, a))

    return NatTransf(Gt, F, apply, "mate")


def adjunction_factorization_check(G: SoftSpecies, F: Endofunctor, u: Callable[[int, Element], Element],
                                   K: int = 3, name: str | None = None) -> Report:
    """u lands in Delta*[F] exactly when its mate is taut; the report passes when both sides agree."""
    N = G.N
    FJ = SoftSpecies(N, {n: F(points(n)) for n in range(N + 1)}, lambda s, a: F.act(_points_map(s), a),
                     f"{F.name} o J", check=False)
    SpeciesMap(G, FJ, u, "u")
    rep = Report(name or f"factorization {G.name} -> {F.name}", params={"K": K, "N": N})
    with timed(rep):
        lands = True
        for n in range(N + 1):
            Dn = PointedDelta(F, n)(points(0))
            for a in G(n):
                if u(n, a) not in Dn:
                    lands = False
                    rep.details.setdefault("degenerate", []).append([n, show(a), show(u(n, a))])
        taut = check_taut_transf(mate(G, F, u), K)
        rep.details["lands_in_delta_star"] = lands
        rep.details["mate_taut"] = taut.passed
        if not taut.passed:
            rep.details["taut_witness"] = taut.witnesses[:1]
        if lands != taut.passed:
            rep.fail({"lands": lands, "taut": taut.passed})
    return rep


def factorization_instances() -> list[tuple[str, SoftSpecies, Endofunctor, Callable, bool]]:
    """(name, G, F, u, expected landing) instances; the False ones are built to degenerate."""
    from .classes import PolySpec, PolyFunctor, Powerset, divided_power, power

    out = []
    for F, N in [(power(2), 2), (power(3), 3), (divided_power(2), 2), (PolyFunctor(PolySpec((0, 0, 0, 1, 1))), 2),
                 (Powerset(), 2), (divided_power(3), 3)]:
        G = delta_star(F, N)
        out.append((f"inclusion of delta*({F.name})", G, F, lambda n, a: a, True))

    X2 = power(2)
    one_plus_X = PolyFunctor(PolySpec((0, 1)))
    G0 = concentrated(card(2), 2)
    out.append(("constant at 0 into 1 + X", G0, one_plus_X, lambda n, a: (TAG, "0", (TUPLE, ())), True))
    out.append(("constant at 0 into X^2 + 1", concentrated(card(1), 2), PolyFunctor(PolySpec((0, 2))),
                lambda n, a: (TAG, "0", (TUPLE, ())), True))

    # Surj(2,-): the two orderings of a pair go to the two diagonal points
    S2 = representable_quotient(2, trivial(2), 2)
    p = points(2).elems

    def diag(n, a):
        if n == 1:
            return (TAG, "0", (TUPLE, (p[0], p[0])))
        i = a[1][0][1]
        return (TAG, "0", (TUPLE, (p[i], p[i])))

    out.append(("Surj(2,-) onto diagonals of X^2", S2, X2, diag, False))

    def pairs(n, a):
        if n == 1:
            return (TAG, "0", (TUPLE, (p[0], p[0])))
        return (TAG, "0", (TUPLE, tuple(p[x[1]] for x in a[1])))

    out.append(("Surj(2,-) onto pairs of X^2", S2, X2, pairs, True))

    # one point in degrees 0 and 1, sent to the constant summand of 1 + X
    c1 = truncated_constant(1, 2)
    out.append(("1<=1 onto the constant of 1 + X", c1, one_plus_X, lambda n, a: (TAG, "0", (TUPLE, ())), False))

    def split(n, a):
        return (TAG, "0", (TUPLE, ())) if n == 0 else (TAG, "1", (TUPLE, (p[0],)))

    out.append(("1<=1 split across 1 + X", c1, one_plus_X, split, True))

    # Surj(1,-) sent to a constant point of X^[2]+1 style target
    S1 = representable_quotient(1, trivial(1), 2)
    Q = PolyFunctor(PolySpec((0, 1, 2)))
    out.append(("Surj(1,-) onto the constant of 1 + X + X^2", S1, Q, lambda n, a: (TAG, "0", (TUPLE, ())), False))
    out.append(("Surj(1,-) onto the diagonal of X^2 in 1 + X + X^2", S1, Q,
                lambda n, a: (TAG, "2", (TUPLE, (p[0], p[0]))), True))
    return out
