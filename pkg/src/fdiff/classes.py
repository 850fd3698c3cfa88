"""Concrete taut functor families.

Polynomial, quotient-power and analytic functors, the filter, powerset and
ultrafilter functors on finite sets, lattice exponentials and Dirichlet functors.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import networkx as nx

from .finset import (
    ATOM,
    CLS,
    TAG,
    TUPLE,
    Element,
    FinFun,
    FinSet,
    GroupAction,
    PermGroup,
    card,
    perm_compose,
    perm_inverse,
    show,
    symmetric,
)
from .functor import (
    Compose,
    Endofunctor,
    Identity,
    NatTransf,
    Product,
    Subfunctor,
    Sum,
    check_natural,
    iso_witness,
)
from .report import DEFAULT_SEED, Report, timed

# polynomial functors ------------------------------------------------------


@dataclass(frozen=True)
class PolySpec:
    """sum_i X^{A_i}, the A_i given as cardinals."""

    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(a) for a in self.exponents))
        if any(a < 0 for a in self.exponents):
            raise ValueError("exponents must be non-negative")

    def collected(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a in self.exponents:
            out[a] = out.get(a, 0) + 1
        return dict(sorted(out.items()))

    def __str__(self) -> str:
        if not self.exponents:
            return "0"
        parts = []
        for a, c in self.collected().items():
            mono = "1" if a == 0 else ("X" if a == 1 else f"X^{a}")
            parts.append(mono if c == 1 else (str(c) if a == 0 else f"{c}*{mono}"))
        return " + ".join(parts)


class PolyFunctor(Endofunctor):
    def __init__(self, spec: PolySpec, name: str | None = None):
        super().__init__()
        self.spec = spec
        self.name = name or str(spec)

    def _elements(self, X):
        for i, a in enumerate(self.spec.exponents):
            lab = str(i)
            for t in itertools.product(X.elems, repeat=a):
                yield (TAG, lab, (TUPLE, t))

    def act(self, f, e):
        m = f.mapping
        return (TAG, e[1], (TUPLE, tuple(m[x] for x in e[2][1])))


def poly_functor(spec: PolySpec) -> PolyFunctor:
    return PolyFunctor(spec)


def power(n: int) -> PolyFunctor:
    return PolyFunctor(PolySpec((n,)), "X" if n == 1 else f"X^{n}")


class PolyMorphism(NatTransf):
    """(i, phi) -> (alpha(i), phi . f_i) for f_i: B_{alpha(i)} -> A_i."""

    def __init__(self, P: PolySpec, Q: PolySpec, alpha: Sequence[int], fs: Sequence[Sequence[int]], name: str = "poly"):
        if len(alpha) != len(P.exponents) or len(fs) != len(P.exponents):
            raise ValueError("shape mismatch: one alpha value and one f_i per summand of the source")
        for i, (a, f) in enumerate(zip(alpha, fs)):
            if not 0 <= a < len(Q.exponents):
                raise ValueError(f"alpha({i}) = {a} is not a summand of the target")
            if len(f) != Q.exponents[a] or any(not 0 <= v < P.exponents[i] for v in f):
                raise ValueError(f"f_{i} is not a map B_{a} -> A_{i}")
        self.alpha = tuple(alpha)
        self.fs = tuple(tuple(f) for f in fs)
        self.P, self.Q = P, Q

        def apply(X, e):
            i = int(e[1])
            phi = e[2][1]
            return (TAG, str(self.alpha[i]), (TUPLE, tuple(phi[b] for b in self.fs[i])))

        super().__init__(PolyFunctor(P), PolyFunctor(Q), apply, name)


def poly_morphism(P: PolySpec, Q: PolySpec, alpha, fs, name: str = "poly") -> PolyMorphism:
    return PolyMorphism(P, Q, alpha, fs, name)


def is_taut_poly_morphism(t: PolyMorphism) -> bool:
    """Taut exactly when every f_i is onto."""
    return all(set(f) == set(range(t.P.exponents[i])) for i, f in enumerate(t.fs))


# quotient powers ----------------------------------------------------------


@dataclass(frozen=True)
class QuotPowerSpec:
    """sum_i X^{n_i} / G_i."""

    terms: tuple

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(_quot_term_name(n, G) for n, G in self.terms)


def _quot_term_name(n: int, G: PermGroup) -> str:
    if n == 0:
        return "1"
    if len(G) == 1:
        return "X" if n == 1 else f"X^{n}"
    if len(G) == math.factorial(n):
        return f"X^[{n}]"
    gens = ",".join("[" + ",".join(map(str, g)) + "]" for g in G.generators)
    return f"X^{n}/<{gens}>"


def _is_full(G: PermGroup) -> bool:
    return len(G) == math.factorial(G.degree)


def canon_tuple(G: PermGroup, t: tuple) -> tuple:
    """Least t . g over g in G (positions permuted by g)."""
    if _is_full(G):
        return tuple(sorted(t))
    return min(tuple(t[i] for i in g) for g in G.elements)


class QuotPowerFunctor(Endofunctor):
    def __init__(self, spec: QuotPowerSpec, name: str | None = None):
        super().__init__()
        for n, G in spec.terms:
            if G.degree != n:
                raise ValueError("group degree must equal the exponent")
        self.spec = spec
        self.name = name or str(spec)

    def _elements(self, X):
        for i, (n, G) in enumerate(self.spec.terms):
            lab = str(i)
            if _is_full(G):
                tuples = itertools.combinations_with_replacement(X.elems, n)
            else:
                tuples = {canon_tuple(G, t) for t in itertools.product(X.elems, repeat=n)}
            for t in tuples:
                yield (TAG, lab, (CLS, (TUPLE, t)))

    def act(self, f, e):
        m = f.mapping
        G = self.spec.terms[int(e[1])][1]
        return (TAG, e[1], (CLS, (TUPLE, canon_tuple(G, tuple(m[x] for x in e[2][1][1])))))


def quot_power_functor(spec: QuotPowerSpec) -> QuotPowerFunctor:
    return QuotPowerFunctor(spec)


def divided_power(n: int) -> QuotPowerFunctor:
    return QuotPowerFunctor(QuotPowerSpec(((n, symmetric(n)),)), f"X^[{n}]")


def quot_power(n: int, G: PermGroup) -> QuotPowerFunctor:
    return QuotPowerFunctor(QuotPowerSpec(((n, G),)))


# analytic functors --------------------------------------------------------


@dataclass
class SpeciesSpec:
    """Coefficients C_n with a left S_n action, for finitely many n."""

    coeffs: dict

    def __post_init__(self):
        for n, A in self.coeffs.items():
            if A.group.degree != n or len(A.group) != math.factorial(n):
                raise ValueError(f"coefficient {n} must carry an action of the full S_{n}")

    def __str__(self) -> str:
        parts = [f"X^{n}(x){len(A.carrier)}" for n, A in sorted(self.coeffs.items()) if len(A.carrier)]
        return " + ".join(parts) or "0"


def perm_element(p) -> Element:
    return (TUPLE, tuple((ATOM, i) for i in p))


def regular_action(n: int) -> GroupAction:
    """S_n acting on itself by left multiplication."""
    S = symmetric(n)
    carrier = FinSet(perm_element(p) for p in S)
    return GroupAction(S, carrier, lambda g, c: perm_element(perm_compose(g, tuple(a[1] for a in c[1]))))


def trivial_action(n: int, size: int = 1) -> GroupAction:
    return GroupAction(symmetric(n), card(size), lambda g, c: c)


def coset_action(n: int, H: PermGroup) -> GroupAction:
    """S_n acting on the left cosets gH, each coset named by its least element."""
    S = symmetric(n)

    def name(g):
        return perm_element(min(perm_compose(g, h) for h in H))

    carrier = FinSet(name(g) for g in S)
    return GroupAction(S, carrier, lambda g, c: name(perm_compose(g, tuple(a[1] for a in c[1]))))


class AnalyticFunctor(Endofunctor):
    """sum_n X^n (x)_{S_n} C_n with classes [x; c], (x; s.d) ~ (x . s; d)."""

    def __init__(self, spec: SpeciesSpec, name: str | None = None):
        super().__init__()
        self.spec = spec
        self.name = name or str(spec)
        self._perms = {n: [(s, perm_inverse(s)) for s in A.group] for n, A in spec.coeffs.items()}

    def canon(self, n: int, xs: tuple, c: Element) -> Element:
        act = self.spec.coeffs[n].act
        best = min((tuple(xs[i] for i in s), act(sinv, c)) for s, sinv in self._perms[n])
        return (TAG, str(n), (CLS, (TUPLE, ((TUPLE, best[0]), best[1]))))

    def _elements(self, X):
        for n, A in sorted(self.spec.coeffs.items()):
            seen = set()
            for xs in itertools.combinations_with_replacement(X.elems, n):
                for c in A.carrier:
                    seen.add(self.canon(n, xs, c))
            yield from seen

    def act(self, f, e):
        n = int(e[1])
        xs, c = e[2][1][1]
        m = f.mapping
        return self.canon(n, tuple(m[x] for x in xs[1]), c)


def analytic_functor(spec: SpeciesSpec) -> AnalyticFunctor:
    return AnalyticFunctor(spec)


# filters, powerset, ultrafilters ------------------------------------------


def _flt(gen: Iterable[Element]) -> Element:
    return (TAG, "flt", (TUPLE, tuple(sorted(set(gen)))))


class FilterFunctor(Endofunctor):
    """Filters on X, all principal on finite sets: <A> is named by its generator A.

    The improper filter is <{}>; with ``proper=True`` it is dropped.
    """

    def __init__(self, proper: bool = False):
        super().__init__()
        self.proper = proper
        self.name = "F'" if proper else "F"

    def _elements(self, X):
        lo = 1 if self.proper else 0
        for r in range(lo, len(X) + 1):
            for c in itertools.combinations(X.elems, r):
                yield (TAG, "flt", (TUPLE, c))

    def act(self, f, e):
        m = f.mapping
        return _flt(m[x] for x in e[2][1])

    def random_element(self, X: FinSet, rng: random.Random) -> Element:
        gen = [x for x in X if rng.random() < 0.5]
        if self.proper and not gen and len(X):
            gen = [X.elems[rng.randrange(len(X))]]
        return _flt(gen)


class Powerset(Endofunctor):
    name = "P"

    def _elements(self, X):
        for r in range(len(X) + 1):
            for c in itertools.combinations(X.elems, r):
                yield (TUPLE, c)

    def act(self, f, e):
        m = f.mapping
        return (TUPLE, tuple(sorted({m[x] for x in e[1]})))

    def random_element(self, X: FinSet, rng: random.Random) -> Element:
        return (TUPLE, tuple(x for x in X if rng.random() < 0.5))


class Ultrafilter(Endofunctor):
    """Ultrafilters on a finite set: the principal ones <{x}>."""

    name = "beta"

    def _elements(self, X):
        for x in X:
            yield (TAG, "flt", (TUPLE, (x,)))

    def act(self, f, e):
        return (TAG, "flt", (TUPLE, (f(e[2][1][0]),)))


def filter_generator(e: Element) -> tuple:
    return e[2][1]


def filter_family(e: Element, X: FinSet) -> set:
    """The filter as an explicit family of subsets (sorted tuples) of X."""
    gen = set(filter_generator(e))
    rest = [x for x in X if x not in gen]
    out = set()
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            out.add(tuple(sorted(gen.union(extra))))
    return out


@dataclass
class Monad:
    T: Endofunctor
    unit: NatTransf
    mult: NatTransf
    name: str = "T"


def filter_monad() -> Monad:
    T = FilterFunctor()
    unit = NatTransf(Identity(), T, lambda X, x: _flt((x,)), "eta")
    mult = NatTransf(Compose(T, T), T, lambda X, e: _flt(x for F in e[2][1] for x in F[2][1]), "mu")
    return Monad(T, unit, mult, "F")


def powerset_monad() -> Monad:
    T = Powerset()
    unit = NatTransf(Identity(), T, lambda X, x: (TUPLE, (x,)), "eta")
    mult = NatTransf(Compose(T, T), T, lambda X, e: (TUPLE, tuple(sorted({x for s in e[1] for x in s[1]}))), "mu")
    return Monad(T, unit, mult, "P")


def ultrafilter_functor() -> Ultrafilter:
    return Ultrafilter()


def check_monad_laws(M: Monad, K: int = 3, seed: int = DEFAULT_SEED, samples: int = 200,
                     exhaustive_limit: int = 1 << 16) -> Report:
    """Unit laws exhaustively; associativity exhaustively while T^3 X is small, sampled beyond."""
    T, eta, mu = M.T, M.unit, M.mult
    rep = Report(f"monad laws {M.name}", params={"K": K, "seed": seed, "samples": samples})
    rng = random.Random(seed)
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            TX = T(X)
            eta_X = eta.component(X)
            for e in TX:
                if mu(X, eta(TX, e)) != e:
                    rep.fail({"law": "mu . eta T", "size": k, "element": show(e)})
                if mu(X, T.act(eta_X, e)) != e:
                    rep.fail({"law": "mu . T eta", "size": k, "element": show(e)})
            TTX = T(TX)
            mu_X = mu.component(X)
            n3 = 2 ** len(TTX)
            if n3 <= exhaustive_limit:
                cube = T(TTX).elems
                rep.details.setdefault("assoc_exhaustive_sizes", []).append(k)
            else:
                cube = [T.random_element(TTX, rng) for _ in range(samples)]
                rep.details.setdefault("assoc_sampled_sizes", []).append(k)
            for e in cube:
                if mu(X, mu(TX, e)) != mu(X, T.act(mu_X, e)):
                    rep.fail({"law": "associativity", "size": k, "element": show(e)})
    return rep


# lattices -----------------------------------------------------------------


class Lattice:
    """A finite sup-lattice given by its order relation."""

    def __init__(self, elems: Iterable[Element], leq: Callable[[Element, Element], bool], name: str = "L"):
        self.carrier = FinSet(elems)
        self.name = name
        E = self.carrier.elems
        self._leq = {(a, b) for a in E for b in E if leq(a, b)}
        for a in E:
            if (a, a) not in self._leq:
                raise ValueError("order is not reflexive")
        for a, b in self._leq:
            if a != b and (b, a) in self._leq:
                raise ValueError("order is not antisymmetric")
        for a, b in self._leq:
            for c in E:
                if (b, c) in self._leq and (a, c) not in self._leq:
                    raise ValueError("order is not transitive")
        if not E:
            raise ValueError("a sup-lattice has at least a bottom element")
        self._join = {}
        for a in E:
            for b in E:
                ub = [c for c in E if (a, c) in self._leq and (b, c) in self._leq]
                least = [c for c in ub if all((c, d) in self._leq for d in ub)]
                if len(least) != 1:
                    raise ValueError(f"{show(a)} and {show(b)} have no join")
                self._join[(a, b)] = least[0]
        bottoms = [a for a in E if all((a, b) in self._leq for b in E)]
        if len(bottoms) != 1:
            raise ValueError("no bottom element")
        self.bottom = bottoms[0]
        self.top = self.join_all(E)

    def __len__(self) -> int:
        return len(self.carrier)

    def __iter__(self):
        return iter(self.carrier)

    def __repr__(self) -> str:
        return self.name

    def leq(self, a, b) -> bool:
        return (a, b) in self._leq

    def join(self, a, b) -> Element:
        return self._join[(a, b)]

    def join_all(self, xs: Iterable[Element]) -> Element:
        j = self._join
        acc = self.bottom
        for x in xs:
            acc = j[(acc, x)]
        return acc

    def down_set(self, l: Element) -> "Lattice":
        return Lattice([a for a in self.carrier if self.leq(a, l)], self.leq, f"D({show(l)})")

    def hasse(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.carrier)
        for a, b in self._leq:
            if a != b and not any(c not in (a, b) and (a, c) in self._leq and (c, b) in self._leq for c in self.carrier):
                g.add_edge(a, b)
        return g


def chain(n: int) -> Lattice:
    if n < 1:
        raise ValueError("a chain lattice needs at least one element")
    return Lattice([(ATOM, i) for i in range(n)], lambda a, b: a[1] <= b[1], f"chain{n}")


def product_lattice(*Ls: Lattice) -> Lattice:
    if not Ls:
        return chain(1)
    if len(Ls) == 1:
        return Ls[0]
    elems = [(TUPLE, t) for t in itertools.product(*(L.carrier.elems for L in Ls))]
    return Lattice(elems, lambda a, b: all(L.leq(x, y) for L, x, y in zip(Ls, a[1], b[1])),
                   " x ".join(L.name for L in Ls))


def lattice_from_json(obj: dict) -> Lattice:
    """{"elems": [names], "leq": [[a, b], ...]}; the order is closed reflexively and transitively."""
    names = list(obj["elems"])
    idx = {n: i for i, n in enumerate(names)}
    rel = {(i, i) for i in range(len(names))}
    for a, b in obj.get("leq", []):
        rel.add((idx[a], idx[b]))
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return Lattice([(ATOM, i) for i in range(len(names))], lambda a, b: (a[1], b[1]) in rel, obj.get("name", "L"))


def lattice_iso(L: Lattice, M: Lattice) -> bool:
    """Order isomorphism, decided as isomorphism of Hasse diagrams."""
    if len(L) != len(M):
        return False
    return nx.is_isomorphic(L.hasse(), M.hasse())


def lattices_up_to(n: int) -> list[Lattice]:
    """Every finite lattice with at most n <= 4 elements, up to isomorphism."""
    if n > 4:
        raise ValueError("only lattices of size <= 4 are tabulated")
    out = [chain(k) for k in range(1, n + 1)]
    if n >= 4:
        out.append(product_lattice(chain(2), chain(2)))
    return out


# exponentials -------------------------------------------------------------


class FullExponential(Endofunctor):
    """C x L^X: functions X -> L (tuples in the order of X), pushed forward by joins."""

    def __init__(self, L: Lattice, coeff: FinSet | None = None, normalized: bool = False, name: str | None = None):
        super().__init__()
        self.L = L
        self.coeff = coeff
        self.normalized = normalized
        base = f"{L.name}^[X]" if normalized else f"{L.name}^X"
        self.name = name or (base if coeff is None else f"{len(coeff)}*{base}")

    def _functions(self, X):
        L = self.L
        for phi in itertools.product(L.carrier.elems, repeat=len(X)):
            if not self.normalized or L.join_all(phi) == L.top:
                yield (TUPLE, phi)

    def _elements(self, X):
        if self.coeff is None:
            yield from self._functions(X)
        else:
            fs = list(self._functions(X))
            for c in self.coeff:
                for phi in fs:
                    yield (TUPLE, (c, phi))

    def push(self, f: FinFun, phi: tuple) -> Element:
        L = self.L
        j = L._join
        out = [L.bottom] * len(f.cod)
        idx = f.cod.index
        for y, v in zip(f.table, phi):
            i = idx[y]
            out[i] = j[(out[i], v)]
        return (TUPLE, tuple(out))

    def act(self, f, e):
        if self.coeff is None:
            return self.push(f, e[1])
        c, phi = e[1]
        return (TUPLE, (c, self.push(f, phi[1])))


def normalized_exponential(L: Lattice) -> FullExponential:
    return FullExponential(L, normalized=True)


def full_exponential(L: Lattice) -> FullExponential:
    return FullExponential(L)


@dataclass
class FullExpSpec:
    """C x L^X."""

    coeff: FinSet
    L: Lattice

    def __str__(self) -> str:
        return f"{len(self.coeff)}*{self.L.name}^X"


@dataclass
class DirichletSpec:
    """sum_i C_i x L_i^[X]."""

    terms: list

    def __str__(self) -> str:
        return " + ".join(f"{len(C)}*{L.name}^[X]" for C, L in self.terms) or "0"


def dirichlet_functor(spec: DirichletSpec) -> Endofunctor:
    return Sum([FullExponential(L, coeff=C, normalized=True) for C, L in spec.terms], str(spec))


# top-preserving sup-maps --------------------------------------------------


def is_sup_map(phi: dict, L: Lattice, M: Lattice) -> bool:
    if phi[L.bottom] != M.bottom:
        return False
    return all(phi[L.join(a, b)] == M.join(phi[a], phi[b]) for a in L for b in L)


def reflects_bottom(phi: dict, L: Lattice, M: Lattice) -> bool:
    return all(a == L.bottom for a in L if phi[a] == M.bottom)


def lattice_map_transf(phi: dict, L: Lattice, M: Lattice) -> NatTransf:
    """Postcomposition with phi, L^[X] -> M^[X]."""
    if not is_sup_map(phi, L, M):
        raise ValueError("phi does not preserve joins")
    if phi[L.top] != M.top:
        raise ValueError("phi does not preserve the top element")
    src, dst = normalized_exponential(L), normalized_exponential(M)
    t = NatTransf(src, dst, lambda X, e: (TUPLE, tuple(phi[v] for v in e[1])), "t_phi")
    t.phi, t.L, t.M = phi, L, M
    return t


def sup_maps(L: Lattice, M: Lattice, top: bool = True) -> list[dict]:
    out = []
    for vals in itertools.product(M.carrier.elems, repeat=len(L)):
        phi = dict(zip(L.carrier.elems, vals))
        if is_sup_map(phi, L, M) and (not top or phi[L.top] == M.top):
            out.append(phi)
    return out


def reconstruct_phi(t: NatTransf, L: Lattice, M: Lattice, K: int = 3) -> tuple[dict, Report]:
    """Read phi(a) as the first coordinate of t at the pair (a, top) on a 2-point set."""
    rep = Report("reconstruct phi", params={"K": K})
    X2 = card(2)
    phi = {a: t(X2, (TUPLE, (a, L.top)))[1][0] for a in L}
    rep.merge(check_natural(t, K))
    if not is_sup_map(phi, L, M) or phi[L.top] != M.top:
        rep.fail({"reason": "read-off map is not a top-preserving sup-map"})
        return phi, rep
    for k in range(K + 1):
        X = card(k)
        for e in t.src(X):
            if t(X, e) != (TUPLE, tuple(phi[v] for v in e[1])):
                rep.fail({"reason": "t differs from postcomposition", "size": k, "element": show(e)})
                break
    return phi, rep


def rep_of_transf_roundtrip(max_size: int = 4, K: int = 3) -> Report:
    """phi -> t_phi -> phi over every pair of listed lattices of size <= max_size."""
    rep = Report("transformations of normalized exponentials", params={"max_size": max_size, "K": K})
    count = 0
    with timed(rep):
        lats = lattices_up_to(max_size)
        for L in lats:
            for M in lats:
                for phi in sup_maps(L, M):
                    count += 1
                    back, r = reconstruct_phi(lattice_map_transf(phi, L, M), L, M, K)
                    rep.merge(r)
                    if back != phi:
                        rep.fail({"L": L.name, "M": M.name, "phi": {show(a): show(b) for a, b in phi.items()}})
    rep.details["maps"] = count
    return rep


# Dirichlet lattices n_* ---------------------------------------------------


def primes_upto(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def factorize(n: int) -> list[int]:
    """Prime factors of n with repetition, increasing."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    out, p = [], 2
    while n > 1:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    return out


def prime_chain_length(p: int) -> int:
    """p_* is the chain 1 < 2 < ... < p of primes up to p together with 1."""
    return len(primes_upto(p)) + 1


def n_star(n: int) -> Lattice:
    fs = factorize(n)
    L = product_lattice(*(chain(prime_chain_length(p)) for p in fs))
    L.name = f"{n}_*"
    return L


def star_components(n: int, v: Element) -> tuple:
    """An element of n_* as its tuple of prime-chain coordinates."""
    k = len(factorize(n))
    if k == 0:
        return ()
    if k == 1:
        return (v,)
    return v[1]


def star_element(n: int, comps: Sequence[Element]) -> Element:
    k = len(factorize(n))
    if k == 0:
        return (ATOM, 0)
    if k == 1:
        return comps[0]
    return (TUPLE, tuple(comps))


def sequential_dirichlet(coeffs: Sequence) -> Endofunctor:
    """sum_n C_n . n_*^[X] for n = 1, 2, ...; coeffs[n-1] is a FinSet or a count."""
    terms = []
    for n, C in enumerate(coeffs, start=1):
        C = card(C) if isinstance(C, int) else C
        if len(C):
            terms.append((C, n_star(n)))
    return dirichlet_functor(DirichletSpec(terms))


def zeta_truncation(N: int) -> Endofunctor:
    F = sequential_dirichlet([1] * N)
    F.name = f"zeta({N})"
    return F


def merge_star(r: int, s: int, u: Element, v: Element) -> Element:
    """r_* x s_* -> (rs)_*, interleaving coordinates by prime (r's block first)."""
    fr, fs = factorize(r), factorize(s)
    cu, cv = star_components(r, u), star_components(s, v)
    tagged = sorted([(p, 0, i) for i, p in enumerate(fr)] + [(p, 1, i) for i, p in enumerate(fs)])
    comps = [cu[i] if side == 0 else cv[i] for _, side, i in tagged]
    return star_element(r * s, comps)


def star_product_iso(r: int, s: int) -> NatTransf:
    """r_*^[X] x s_*^[X] -> (rs)_*^[X]."""
    src = Product([normalized_exponential(n_star(r)), normalized_exponential(n_star(s))])
    dst = normalized_exponential(n_star(r * s))

    def apply(X, e):
        phi, psi = e[1]
        return (TUPLE, tuple(merge_star(r, s, a, b) for a, b in zip(phi[1], psi[1])))

    return NatTransf(src, dst, apply, f"merge{r},{s}")


def seq_dirichlet_product_check(C: Sequence[int], D: Sequence[int], K: int = 3) -> Report:
    """(sum C_r r_*^[X]) x (sum D_s s_*^[X]) ~ sum_n sum_{rs=n} (C_r x D_s) n_*^[X]."""
    F, G = sequential_dirichlet(C), sequential_dirichlet(D)
    rs_index = [r for r, c in enumerate(C, start=1) if c]
    ss_index = [s for s, d in enumerate(D, start=1) if d]
    pairs = sorted(((r * s, r, s) for r in rs_index for s in ss_index))
    terms = [(FinSet((TUPLE, (a, b)) for a in card(C[r - 1]) for b in card(D[s - 1])), n_star(n)) for n, r, s in pairs]
    H = dirichlet_functor(DirichletSpec(terms))
    where = {(r, s): i for i, (_, r, s) in enumerate(pairs)}

    def apply(X, e):
        (_, i, a), (_, j, b) = e[1]
        r, s = rs_index[int(i)], ss_index[int(j)]
        c, phi = a[1]
        d, psi = b[1]
        chi = tuple(merge_star(r, s, x, y) for x, y in zip(phi[1], psi[1]))
        return (TAG, str(where[(r, s)]), (TUPLE, ((TUPLE, (c, d)), (TUPLE, chi))))

    t = NatTransf(Product([F, G]), H, apply, "seq-product")
    return iso_witness(Product([F, G]), H, K, explicit=t)


def smooth_numbers(P: Iterable[int], N: int) -> list[int]:
    P = sorted(P)
    out = [1]
    for p in P:
        out = sorted({m * p**k for m in out for k in range(N.bit_length() + 1) if m * p**k <= N})
    return out


def euler_check(P: Iterable[int], N: int, K: int = 3) -> Report:
    """sum_{n in P*, n <= N} n_*^[X] ~ prod_p sum_k (p^k)_*^[X], truncated to prod p^k <= N."""
    P = sorted(P)
    for p in P:
        if factorize(p) != [p]:
            raise ValueError(f"{p} is not prime")
    ns = smooth_numbers(P, N)
    left = Sum([normalized_exponential(n_star(n)) for n in ns], f"sum_(n<={N}) n_*^[X]")
    ks = {p: [k for k in range(N.bit_length() + 1) if p**k <= N] for p in P}
    factors = [Sum([normalized_exponential(n_star(p**k)) for k in ks[p]]) for p in P]

    def bounded(X, e):
        return math.prod(p ** int(c[1]) for p, c in zip(P, e[1])) <= N

    right = Subfunctor(Product(factors), bounded, "prod_p sum_k (p^k)_*^[X]")

    def apply(X, e):
        n = ns[int(e[1])]
        fs = factorize(n)
        exps = {p: fs.count(p) for p in P}
        cols = []
        for v in e[2][1]:
            comps = star_components(n, v)
            pos, per = 0, {}
            for p in P:
                per[p] = comps[pos:pos + exps[p]]
                pos += exps[p]
            cols.append(per)
        parts = []
        for p in P:
            q = p ** exps[p]
            parts.append((TAG, str(exps[p]), (TUPLE, tuple(star_element(q, c[p]) for c in cols))))
        return (TUPLE, tuple(parts))

    t = NatTransf(left, right, apply, "euler")
    rep = iso_witness(left, right, K, explicit=t)
    rep.name = f"euler P={P} N={N}"
    rep.details["smooth"] = ns
    return rep


def chain_multisets(max_size: int) -> list[tuple[int, ...]]:
    out = []

    def rec(prefix, lo, prod):
        if prefix:
            out.append(tuple(prefix))
        for n in range(lo, max_size + 1):
            if prod * n <= max_size:
                rec(prefix + [n], n, prod * n)

    rec([], 2, 1)
    return out


def lattice_iso_unique_factorization(max_size: int = 36) -> Report:
    """Products of chains are isomorphic exactly when the length multisets agree."""
    rep = Report("unique factorization of chain products", params={"max_size": max_size})
    with timed(rep):
        by_size: dict[int, list] = {}
        for ms in chain_multisets(max_size):
            by_size.setdefault(math.prod(ms), []).append(ms)
        checked = 0
        for size, group in sorted(by_size.items()):
            lats = {ms: product_lattice(*(chain(n) for n in ms)) for ms in group}
            for a, b in itertools.combinations_with_replacement(group, 2):
                checked += 1
                iso = lattice_iso(lats[a], lats[b])
                if iso != (a == b):
                    rep.fail({"factors": [list(a), list(b)], "iso": iso})
        rep.details["pairs"] = checked
    return rep
