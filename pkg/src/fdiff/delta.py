"""The difference operator: operational complement, closed forms per class, commutation laws."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .classes import (
    AnalyticFunctor,
    DirichletSpec,
    FilterFunctor,
    FullExpSpec,
    FullExponential,
    PolyFunctor,
    PolySpec,
    Powerset,
    QuotPowerFunctor,
    QuotPowerSpec,
    SpeciesSpec,
    Ultrafilter,
    canon_tuple,
    chain,
    dirichlet_functor,
    filter_family,
    lattice_iso,
)
from .diagram import FinCat, colimit, diagram_at, is_confluent
from .finset import (
    CLS,
    TAG,
    TUPLE,
    Element,
    FinFun,
    FinSet,
    GroupAction,
    PermGroup,
    card,
    extend,
    fresh_points,
    inclusion,
    perm_inverse,
    symmetric,
)
from .functor import (
    Compose,
    Endofunctor,
    NatTransf,
    Product,
    Successor,
    Sum,
    iso_witness,
    require_taut,
    require_taut_transf,
)
from .report import DEFAULT_SEED, Report, timed


class DeltaFunctor(Endofunctor):
    """Delta[F](X) = F(X+1) minus the image of F(j); arrows act by F(f+1)."""

    def __init__(self, F: Endofunctor, name: str | None = None):
        super().__init__()
        self.base = F
        self.name = name or f"delta({F.name})"

    def _elements(self, X):
        X1 = extend(X)
        old = set(self.base.fmap(inclusion(X, X1)).table)
        return (e for e in self.base(X1) if e not in old)

    def act(self, f, e):
        return self.base.act(_plus(f, 1), e)


class PointedDelta(Endofunctor):
    """D_A[F](X): elements of F(X+A) lying in no F(X+A0) for a proper A0 of A."""

    def __init__(self, F: Endofunctor, n: int, name: str | None = None):
        super().__init__()
        self.base, self.n = F, n
        self.name = name or f"D_{n}({F.name})"

    def _elements(self, X):
        XA = extend(X, self.n)
        pts = fresh_points(X, self.n)
        old = set()
        for p in pts:
            sub = XA.minus([p])
            old.update(self.base.fmap(inclusion(sub, XA)).table)
        return (e for e in self.base(XA) if e not in old)

    def act(self, f, e):
        return self.base.act(_plus(f, self.n), e)


_plus_cache: dict = {}


def _plus(f: FinFun, k: int) -> FinFun:
    key = (f, k)
    got = _plus_cache.get(key)
    if got is None:
        src = extend(f.dom, k)
        m = dict(f.mapping)
        m.update(zip(fresh_points(f.dom, k), fresh_points(f.cod, k)))
        got = FinFun(src, extend(f.cod, k), m, check=False)
        if len(_plus_cache) > 200_000:
            _plus_cache.clear()
        _plus_cache[key] = got
    return got


def delta(F: Endofunctor, K: int = 3) -> DeltaFunctor:
    """Delta[F]; refuses F unless it passes the tautness check at bound K."""
    require_taut(F, K)
    return DeltaFunctor(F)


def delta_transf(t: NatTransf, K: int = 3) -> NatTransf:
    """Restriction of t(X+1) to the differences."""
    require_taut_transf(t, K)
    src, dst = DeltaFunctor(t.src), DeltaFunctor(t.dst)

    def apply(X, e):
        return t(extend(X), e)

    return NatTransf(src, dst, apply, f"delta({t.name})")


def iterated(F: Endofunctor, n: int, K: int = 3) -> Endofunctor:
    out = F
    for _ in range(n):
        out = delta(out, K)
    return out


def d_pointed(F: Endofunctor, A, K: int = 3) -> PointedDelta:
    n = A if isinstance(A, int) else len(A)
    require_taut(F, K)
    return PointedDelta(F, n)


def coproduct_iso(F: Endofunctor) -> NatTransf:
    """F + Delta[F] -> F S: the image of F(j) on the left summand, inclusion on the right."""
    D = DeltaFunctor(F)
    FS = Compose(F, Successor(), f"{F.name} o (X+1)")

    def apply(X, e):
        if e[1] == "0":
            return F.fmap(inclusion(X, extend(X)))(e[2])
        return e[2]

    return NatTransf(Sum([F, D]), FS, apply, "cosum")


def counting_law(F: Endofunctor, kmax: int = 5) -> Report:
    rep = Report(f"counting law {F.name}", params={"kmax": kmax})
    D = DeltaFunctor(F)
    rows = []
    with timed(rep):
        for k in range(kmax + 1):
            a, b, d = F.size(k), F.size(k + 1), D.size(k)
            rows.append([k, a, b, d])
            if d != b - a:
                rep.fail({"k": k, "F(k)": a, "F(k+1)": b, "delta": d})
    rep.details["rows"] = rows
    return rep


def iterate_vs_pointed(F: Endofunctor, n: int, K: int = 3) -> Report:
    """Delta^n[F] and D_n[F] agree element for element."""
    rep = Report(f"delta^{n} vs D_{n} for {F.name}", params={"K": K})
    it = F
    for _ in range(n):
        it = DeltaFunctor(it)
    pd = PointedDelta(F, n)
    for k in range(K + 1):
        X = card(k)
        if it(X) != pd(X):
            rep.fail({"size": k, "iterated": len(it(X)), "pointed": len(pd(X))})
    return rep


# product rules ------------------------------------------------------------


def _preimage_table(F: Endofunctor, X: FinSet) -> dict:
    j = F.fmap(inclusion(X, extend(X)))
    return {b: a for a, b in zip(j.dom.elems, j.table)}


def finite_product_rule_check(factors: Sequence[Endofunctor], K: int = 3) -> Report:
    """Delta[prod F_i] ~ sum over proper J of prod_{j in J} F_j x prod_{k not in J} Delta F_k."""
    for F in factors:
        require_taut(F, K)
    n = len(factors)
    P = Product(factors)
    LHS = DeltaFunctor(P)
    deltas = [DeltaFunctor(F) for F in factors]
    Js = [J for r in range(n) for J in itertools.combinations(range(n), r)]
    summands = [Product([factors[i] if i in J else deltas[i] for i in range(n)]) for J in Js]
    RHS = Sum(summands, "product-rule sum")
    where = {J: i for i, J in enumerate(Js)}

    def apply(X, e):
        comps = e[1]
        old = [_preimage_table(F, X) for F in factors]
        J = tuple(i for i in range(n) if comps[i] in old[i])
        parts = tuple(old[i][c] if i in J else c for i, c in enumerate(comps))
        return (TAG, str(where[J]), (TUPLE, parts))

    t = NatTransf(LHS, RHS, apply, "grid")
    rep = iso_witness(LHS, RHS, K, explicit=t)
    rep.name = "product rule " + " x ".join(F.name for F in factors)
    rep.details["summands"] = len(Js)
    return rep


def product_rule_check(F: Endofunctor, G: Endofunctor, K: int = 3) -> Report:
    return finite_product_rule_check([F, G], K)


# commutation with colimits and connected limits --------------------------


class ColimitFunctor(Endofunctor):
    """X -> colim_I Gamma_I(X) over a finite shape."""

    def __init__(self, shape: FinCat, functors: dict, transfs: dict, name: str = "colim"):
        super().__init__()
        self.shape, self.functors, self.transfs, self.name = shape, functors, transfs, name
        self._cocones: dict = {}

    def _colim(self, X):
        got = self._cocones.get(X)
        if got is None:
            got = colimit(diagram_at(self.shape, self.functors, self.transfs, X))
            self._cocones[X] = got
        return got

    def _elements(self, X):
        return self._colim(X)[0].elems

    def act(self, f, e):
        i, x = e[1][1]
        o = self.shape.objects[i[1]]
        return self._colim(f.cod)[1][o](self.functors[o].act(f, x))


class LimitFunctor(Endofunctor):
    """X -> lim_I Gamma_I(X): compatible families, listed in object order."""

    def __init__(self, shape: FinCat, functors: dict, transfs: dict, name: str = "lim"):
        super().__init__()
        self.shape, self.functors, self.transfs, self.name = shape, functors, transfs, name

    def _elements(self, X):
        C = self.shape
        objs = C.objects
        comps = {m: t.component(X) for m, t in self.transfs.items()}
        for fam in itertools.product(*(self.functors[o](X).elems for o in objs)):
            val = dict(zip(objs, fam))
            if all(comps[m](val[a]) == val[b] for m, (a, b) in C.morphisms.items() if m in comps):
                yield (TUPLE, fam)

    def act(self, f, e):
        return (TUPLE, tuple(self.functors[o].act(f, x) for o, x in zip(self.shape.objects, e[1])))


def colimit_commutation_check(shape: FinCat, functors: dict, transfs: dict, K: int = 3) -> Report:
    if not is_confluent(shape):
        raise ValueError(f"{shape.name} is not confluent: colimits over it need not commute with inverse images")
    for F in functors.values():
        require_taut(F, K)
    dts = {m: delta_transf(t, K) for m, t in transfs.items()}
    dfs = {o: DeltaFunctor(F) for o, F in functors.items()}
    whole = ColimitFunctor(shape, functors, transfs)
    left = ColimitFunctor(shape, dfs, dts, "colim delta")
    right = DeltaFunctor(whole, "delta colim")

    def apply(X, e):
        i, x = e[1][1]
        o = shape.objects[i[1]]
        return whole._colim(extend(X))[1][o](x)

    t = NatTransf(left, right, apply, "compare")
    rep = iso_witness(left, right, K, explicit=t)
    rep.name = f"delta commutes with colimits over {shape.name}"
    return rep


def connected_limit_commutation_check(shape: FinCat, functors: dict, transfs: dict, K: int = 3) -> Report:
    if not shape.objects or not shape.is_connected():
        raise ValueError(f"{shape.name} is not a non-empty connected shape")
    for F in functors.values():
        require_taut(F, K)
    dts = {m: delta_transf(t, K) for m, t in transfs.items()}
    dfs = {o: DeltaFunctor(F) for o, F in functors.items()}
    whole = LimitFunctor(shape, functors, transfs)
    left = LimitFunctor(shape, dfs, dts, "lim delta")
    right = DeltaFunctor(whole, "delta lim")
    t = NatTransf(left, right, lambda X, e: e, "compare")
    rep = iso_witness(left, right, K, explicit=t)
    rep.name = f"delta commutes with limits over {shape.name}"
    return rep


# closed forms -------------------------------------------------------------


@dataclass(frozen=True)
class MonadSpec:
    """One of the finite-set filter functors: 'F', "F'", 'P', 'beta'."""

    kind: str

    def __str__(self) -> str:
        return self.kind


def realize(spec) -> Endofunctor:
    if isinstance(spec, PolySpec):
        return PolyFunctor(spec)
    if isinstance(spec, QuotPowerSpec):
        return QuotPowerFunctor(spec)
    if isinstance(spec, SpeciesSpec):
        return AnalyticFunctor(spec)
    if isinstance(spec, DirichletSpec):
        return dirichlet_functor(spec)
    if isinstance(spec, FullExpSpec):
        return FullExponential(spec.L, coeff=spec.coeff)
    if isinstance(spec, MonadSpec):
        return {"F": FilterFunctor, "F'": lambda: FilterFunctor(proper=True), "P": Powerset, "beta": Ultrafilter}[spec.kind]()
    raise TypeError(f"no functor for spec of class {type(spec).__name__}")


@dataclass
class SymbolicDelta:
    spec: object
    out: object
    bijection: Callable[[FinSet, Element], Element]
    note: str = "explicit"

    def transf(self) -> NatTransf:
        return NatTransf(DeltaFunctor(realize(self.spec)), realize(self.out), self.bijection, "closed-form")


def _proper_subsets(n: int) -> list[tuple[int, ...]]:
    return [S for r in range(n) for S in itertools.combinations(range(n), r)]


def _delta_poly(spec: PolySpec) -> SymbolicDelta:
    out, where = [], {}
    for i, a in enumerate(spec.exponents):
        for S in _proper_subsets(a):
            where[(i, S)] = len(out)
            out.append(len(S))

    def bij(X, e):
        p = fresh_points(X, 1)[0]
        i = int(e[1])
        phi = e[2][1]
        S = tuple(k for k, v in enumerate(phi) if v != p)
        return (TAG, str(where[(i, S)]), (TUPLE, tuple(phi[k] for k in S)))

    return SymbolicDelta(spec, PolySpec(tuple(out)), bij)


def restricted_stabilizer(G: PermGroup, B: tuple) -> PermGroup:
    """Image in S_B of the set-stabilizer of B, positions renumbered in order."""
    pos = {b: i for i, b in enumerate(B)}
    Bs = set(B)
    gens = []
    for g in G:
        if {g[b] for b in B} == Bs:
            gens.append(tuple(pos[g[b]] for b in B))
    return PermGroup(len(B), gens)


def _delta_quot(spec: QuotPowerSpec) -> SymbolicDelta:
    out_terms, reps = [], {}
    for i, (n, G) in enumerate(spec.terms):
        seen = set()
        for S in _proper_subsets(n):
            if S in seen:
                continue
            orbit = {tuple(sorted(g[s] for s in S)) for g in G}
            seen |= orbit
            B = min(orbit)
            reps.setdefault(i, []).append((B, orbit, len(out_terms)))
            out_terms.append((len(B), restricted_stabilizer(G, B)))

    def bij(X, e):
        p = fresh_points(X, 1)[0]
        i = int(e[1])
        G = spec.terms[i][1]
        t = e[2][1][1]
        supp = tuple(k for k, v in enumerate(t) if v != p)
        for B, orbit, idx in reps[i]:
            if supp in orbit:
                break
        # g with g(B) = supp, so t . g is supported on B
        g = next(g for g in G if tuple(sorted(g[b] for b in B)) == supp)
        r = tuple(t[g[b]] for b in B)
        H = out_terms[idx][1]
        return (TAG, str(idx), (CLS, (TUPLE, canon_tuple(H, r))))

    return SymbolicDelta(spec, QuotPowerSpec(tuple(out_terms)), bij)


def _fix_prefix(n: int, k: int) -> list[tuple]:
    """Permutations of n points fixing 0..k-1."""
    return [tuple(range(k)) + tuple(k + q for q in p) for p in itertools.permutations(range(n - k))]


def _delta_species(spec: SpeciesSpec) -> SymbolicDelta:
    coeffs = spec.coeffs
    canon_k: dict = {}

    def cls_k(l: int, k: int, c: Element) -> Element:
        """The class of c in C(l)_k, C_l modulo permutations fixing 0..k-1."""
        key = (l, k)
        if key not in canon_k:
            canon_k[key] = _fix_prefix(l, k)
        act = coeffs[l].act
        return (TAG, str(l), (CLS, min(act(s, c) for s in canon_k[key])))

    top = max(coeffs) if coeffs else 0
    new = {}
    for k in range(top):
        carrier = FinSet(cls_k(l, k, c) for l in sorted(coeffs) if l > k for c in coeffs[l].carrier)
        if not len(carrier):
            continue

        def act(tau, x, k=k):
            l = int(x[1])
            ext = tuple(tau) + tuple(range(k, l))
            return cls_k(l, k, coeffs[l].act(ext, x[2][1]))

        new[k] = GroupAction(symmetric(k), carrier, act)
    out = SpeciesSpec(new)
    target = AnalyticFunctor(out)

    def bij(X, e):
        p = fresh_points(X, 1)[0]
        l = int(e[1])
        xs, c = e[2][1][1]
        xs = xs[1]
        live = [i for i, v in enumerate(xs) if v != p]
        dead = [i for i, v in enumerate(xs) if v == p]
        sigma = tuple(live + dead)
        k = len(live)
        c2 = coeffs[l].act(perm_inverse(sigma), c)
        return target.canon(k, tuple(xs[i] for i in live), cls_k(l, k, c2))

    return SymbolicDelta(spec, out, bij)


def _delta_dirichlet(spec: DirichletSpec) -> SymbolicDelta:
    out, where = [], {}
    for i, (C, L) in enumerate(spec.terms):
        for l in L:
            Cl = [m for m in L if m != L.bottom and L.join(l, m) == L.top]
            if not Cl:
                continue
            coeff = FinSet((TUPLE, (c, m)) for c in C for m in Cl)
            where[(i, l)] = len(out)
            out.append((coeff, L.down_set(l)))

    def bij(X, e):
        i = int(e[1])
        L = spec.terms[i][1]
        c, phi = e[2][1]
        X1 = extend(X)
        p = fresh_points(X, 1)[0]
        vals = dict(zip(X1.elems, phi[1]))
        rest = tuple(vals[x] for x in X)
        l = L.join_all(rest)
        return (TAG, str(where[(i, l)]), (TUPLE, ((TUPLE, (c, vals[p])), (TUPLE, rest))))

    return SymbolicDelta(spec, DirichletSpec(out), bij)


def _delta_fullexp(spec: FullExpSpec) -> SymbolicDelta:
    L = spec.L
    star = [m for m in L if m != L.bottom]
    coeff = FinSet((TUPLE, (c, m)) for c in spec.coeff for m in star)

    def bij(X, e):
        c, phi = e[1]
        X1 = extend(X)
        p = fresh_points(X, 1)[0]
        vals = dict(zip(X1.elems, phi[1]))
        return (TUPLE, ((TUPLE, (c, vals[p])), (TUPLE, tuple(vals[x] for x in X))))

    return SymbolicDelta(spec, FullExpSpec(coeff, L), bij)


def _delta_monad(spec: MonadSpec) -> SymbolicDelta:
    kind = spec.kind
    if kind == "beta":
        def bij(X, e):
            return (TAG, "0", (TUPLE, ()))

        return SymbolicDelta(spec, PolySpec((0,)), bij)
    if kind == "P":
        def bij(X, e):
            p = fresh_points(X, 1)[0]
            return (TUPLE, tuple(x for x in e[1] if x != p))

        return SymbolicDelta(spec, MonadSpec("P"), bij)

    def bij(X, e):
        # F1 = {X1 in X : X1 + {*} in F}; on finite sets it is principal, generated by its least member
        X1 = extend(X)
        p = fresh_points(X, 1)[0]
        fam = filter_family(e, X1)
        F1 = sorted((tuple(y for y in S if y != p) for S in fam if p in S), key=len)
        gen = F1[0]
        assert all(set(gen) <= set(S) for S in F1)
        return (TAG, "flt", (TUPLE, gen))

    return SymbolicDelta(spec, MonadSpec("F"), bij)


def symbolic_delta(spec) -> SymbolicDelta:
    if isinstance(spec, PolySpec):
        return _delta_poly(spec)
    if isinstance(spec, QuotPowerSpec):
        return _delta_quot(spec)
    if isinstance(spec, SpeciesSpec):
        return _delta_species(spec)
    if isinstance(spec, DirichletSpec):
        return _delta_dirichlet(spec)
    if isinstance(spec, FullExpSpec):
        return _delta_fullexp(spec)
    if isinstance(spec, MonadSpec):
        return _delta_monad(spec)
    raise TypeError(f"no closed form for class {type(spec).__name__}")


def verify_symbolic(spec, K: int = 4, seed: int = DEFAULT_SEED) -> Report:
    """Closed form vs operational Delta through the explicit bijection."""
    sd = symbolic_delta(spec)
    t = sd.transf()
    rep = iso_witness(t.src, t.dst, K, explicit=t, seed=seed)
    rep.name = f"closed form delta({spec}) = {sd.out}"
    rep.details["closed_form"] = str(sd.out)
    return rep


def chain_delta_coefficients(n: int) -> dict[int, int]:
    """Group the closed form of Delta[chain_n^[X]] by chain length of the lattice."""
    sd = symbolic_delta(DirichletSpec([(card(1), chain(n))]))
    counts: dict[int, int] = {}
    for C, L in sd.out.terms:
        m = next(k for k in range(1, n + 1) if lattice_iso(L, chain(k)))
        counts[m] = counts.get(m, 0) + len(C)
    return dict(sorted(counts.items()))


def chain_delta_check(n: int, K: int = 4) -> Report:
    """Delta[n^[X]] = (n-1) n^[X] + (n-1)^[X] + ... + 1^[X], read off the closed form and verified."""
    expected = {k: 1 for k in range(1, n)}
    if n > 1:
        expected[n] = n - 1
    got = chain_delta_coefficients(n)
    rep = verify_symbolic(DirichletSpec([(card(1), chain(n))]), K)
    rep.name = f"delta of chain{n}^[X]"
    rep.details["coefficients"] = got
    if got != expected:
        rep.fail({"expected": expected, "got": got})
    return rep
