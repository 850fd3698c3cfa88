"""The lax chain rule gamma, its laws, the tangent-style functor D and the monad on pairs."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Sequence

from .classes import Monad, divided_power, power
from .delta import DeltaFunctor, _plus
from .finset import (
    ATOM,
    CLS,
    TAG,
    TUPLE,
    Element,
    FinFun,
    FinSet,
    all_functions,
    card,
    extend,
    fresh_points,
    inclusion,
    show,
    symmetric,
)
from .functor import (
    Compose,
    Endofunctor,
    Identity,
    NatTransf,
    Product,
    check_natural,
    check_taut_transf,
    horizontal,
    require_taut,
    require_taut_transf,
)
from .report import DEFAULT_SEED, Report, timed


_phi_cache: dict = {}


def phi(F: Endofunctor, X: FinSet, x: Element) -> FinFun:
    """[F j_X, x]: F X + 1 -> F(X+1)."""
    key = (F, X, x)
    got = _phi_cache.get(key)
    if got is not None:
        return got
    FX = F(X)
    X1 = extend(X)
    m = dict(zip(FX.elems, F.fmap(inclusion(X, X1)).table))
    m[fresh_points(FX, 1)[0]] = x
    got = FinFun(extend(FX), F(X1), m, check=False)
    if len(_phi_cache) > 100_000:
        _phi_cache.clear()
    _phi_cache[key] = got
    return got


class Gamma(NatTransf):
    """gamma_{G,F}: (Delta G o F) x Delta F -> Delta[G o F], (y, x) |-> G(phi_x)(y)."""

    def __init__(self, F: Endofunctor, G: Endofunctor):
        self.F, self.G = F, G
        DG, DF = DeltaFunctor(G), DeltaFunctor(F)
        src = Product([Compose(DG, F), DF], f"(delta({G.name}) o {F.name}) x delta({F.name})")
        dst = DeltaFunctor(Compose(G, F))
        super().__init__(src, dst, self._gamma, f"gamma[{G.name},{F.name}]")

    def _gamma(self, X, e):
        y, x = e[1]
        return self.G.act(phi(self.F, X, x), y)

    def pair(self, X: FinSet, y: Element, x: Element) -> Element:
        return self.G.act(phi(self.F, X, x), y)


def gamma(F: Endofunctor, G: Endofunctor, K: int = 3) -> Gamma:
    require_taut(F, K)
    require_taut(G, K)
    return Gamma(F, G)


def gamma_report(F: Endofunctor, G: Endofunctor, K: int = 3, seed: int = DEFAULT_SEED) -> Report:
    """Monic, image-disjoint in x, lands in Delta[G o F], natural and taut at |X| <= K."""
    g = gamma(F, G, K)
    rep = Report(f"chain rule {g.name}", params={"K": K, "seed": seed})
    GF = Compose(G, F)
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            old = set(GF.fmap(inclusion(X, extend(X))).table)
            seen: dict = {}
            for e in g.src(X):
                y, x = e[1]
                out = g.pair(X, y, x)
                if out in old:
                    rep.fail({"law": "lands in delta", "size": k, "y": show(y), "x": show(x)})
                if out in seen:
                    other = seen[out]
                    law = "image disjointness" if other[1][1] != x else "monic"
                    rep.fail({"law": law, "size": k, "pairs": [show(other), show(e)]})
                seen[out] = e
            rep.details.setdefault("sizes", []).append([k, len(g.src(X)), len(g.dst(X))])
        rep.merge(check_natural(g, K, seed))
        rep.merge(check_taut_transf(g, K, seed))
    return rep


def gamma_grid() -> list[tuple[Endofunctor, Endofunctor]]:
    """Six (F, G) pairs covering identity, powers, divided powers and a composite."""
    X, X2, D2 = Identity(), power(2), divided_power(2)
    return [(X2, X2), (X, X2), (X2, X), (D2, X2), (X2, D2), (D2, Compose(X2, X2))]


# graded comparison --------------------------------------------------------


def leaves(e: Element) -> list[Element]:
    """Atoms and adjoined points at the bottom of a nested element."""
    k = e[0]
    if k == TUPLE:
        return [l for c in e[1] for l in leaves(c)]
    if k == TAG:
        if e[1] == "+":
            return [e]
        return leaves(e[2])
    if k == CLS:
        return leaves(e[1])
    return [e]


def graded_counts(elems, X: FinSet) -> dict[int, int]:
    """Tally elements by how many of their leaves lie in X (the rest are the adjoined point)."""
    out: dict[int, int] = {}
    for e in elems:
        d = sum(1 for l in leaves(e) if l in X)
        out[d] = out.get(d, 0) + 1
    return out


def chain_rule_comparison(F: Endofunctor, G: Endofunctor, kmax: int = 5, graded_at: int = 2) -> Report:
    """Polynomial fits of |(Delta G o F) x Delta F| and |Delta[G o F]|, plus graded tallies.

    The coefficient vectors (highest degree first) come from exact interpolation of
    the cardinalities at k = 0..kmax. The graded tallies count elements at |X| =
    graded_at by how many leaves lie in X, for the gamma image and for the whole
    target; the image must sit inside the target degree by degree.
    """
    g = Gamma(F, G)
    rows = count_table(F, G, kmax)
    rep = Report(f"chain rule comparison {G.name} o {F.name}", params={"kmax": kmax, "graded_at": graded_at})
    rep.details["rows"] = rows
    rep.details["source_poly"] = fit_polynomial([r[1] for r in rows])
    rep.details["target_poly"] = fit_polynomial([r[2] for r in rows])
    X = card(graded_at)
    full = graded_counts(g.dst(X), X)
    image = graded_counts((g(X, e) for e in g.src(X)), X)
    rep.details["graded_target"] = sorted(full.items(), reverse=True)
    rep.details["graded_image"] = sorted(image.items(), reverse=True)
    for d, n in image.items():
        if n > full.get(d, 0):
            rep.fail({"degree": d, "image": n, "target": full.get(d, 0)})
    rep.details["surjective"] = image == full
    return rep


def count_table(F: Endofunctor, G: Endofunctor, kmax: int = 4) -> list[list[int]]:
    g = Gamma(F, G)
    return [[k, g.src.size(k), g.dst.size(k)] for k in range(kmax + 1)]


def fit_polynomial(values: Sequence[int]) -> list[int]:
    """Integer coefficients (highest first) of the interpolating polynomial through (k, values[k])."""
    n = len(values)
    rows = [[Fraction(k) ** d for d in range(n)] + [Fraction(v)] for k, v in enumerate(values)]
    for c in range(n):
        piv = next(r for r in range(c, n) if rows[r][c] != 0)
        rows[c], rows[piv] = rows[piv], rows[c]
        rows[c] = [v / rows[c][c] for v in rows[c]]
        for r in range(n):
            if r != c and rows[r][c] != 0:
                rows[r] = [a - rows[r][c] * b for a, b in zip(rows[r], rows[c])]
    coeffs = [rows[d][n] for d in range(n)]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if any(c.denominator != 1 for c in coeffs):
        raise ValueError("values are not given by an integer polynomial")
    return [int(c) for c in reversed(coeffs)]


# laws ---------------------------------------------------------------------


def gamma_naturality_check(t: NatTransf, u: NatTransf, K: int = 3) -> Report:
    """gamma' . (Delta u F' . Delta G t  x  Delta t) = Delta(u * t) . gamma, element-wise."""
    require_taut_transf(t, K)
    require_taut_transf(u, K)
    F, F2, G, G2 = t.src, t.dst, u.src, u.dst
    g, g2 = Gamma(F, G), Gamma(F2, G2)
    ut = horizontal(u, t)
    rep = Report(f"gamma naturality {u.name}, {t.name}", params={"K": K})
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            X1 = extend(X)
            tX = t.component(X)
            tplus = _plus(tX, 1)
            F2X1 = extend(F2(X))
            for e in g.src(X):
                y, x = e[1]
                y2 = u(F2X1, G.act(tplus, y))
                x2 = t(X1, x)
                lhs = g2.pair(X, y2, x2)
                rhs = ut(X1, g.pair(X, y, x))
                if lhs != rhs:
                    rep.fail({"size": k, "y": show(y), "x": show(x), "top": show(lhs), "bottom": show(rhs)})
    return rep


def gamma_associativity_check(F: Endofunctor, G: Endofunctor, H: Endofunctor, K: int = 2,
                              cap: int = 100_000) -> Report:
    """gamma_{H,GF}(z, gamma_{G,F}(y, x)) = gamma_{HG,F}(gamma_{H,G}(z, y), x).

    Sizes whose triple count exceeds cap are skipped and listed in details.
    """
    for T in (F, G, H):
        require_taut(T, K)
    gGF, gHGF = Gamma(F, G), Gamma(Compose(G, F), H)
    gHG, gHGF2 = Gamma(G, H), Gamma(F, Compose(H, G))
    DH, DG, DF = DeltaFunctor(H), DeltaFunctor(G), DeltaFunctor(F)
    rep = Report(f"gamma associativity {H.name}, {G.name}, {F.name}", params={"K": K, "cap": cap})
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            FX = F(X)
            GFX = G(FX)
            zs, ys, xs = DH(GFX), DG(FX), DF(X)
            n = len(zs) * len(ys) * len(xs)
            if n > cap:
                rep.details.setdefault("skipped_sizes", []).append(k)
                continue
            rep.details.setdefault("checked", []).append([k, n])
            for z in zs:
                for y in ys:
                    inner = gHG.pair(FX, z, y)
                    for x in xs:
                        lhs = gHGF.pair(X, z, gGF.pair(X, y, x))
                        rhs = gHGF2.pair(X, inner, x)
                        if lhs != rhs:
                            rep.fail({"size": k, "z": show(z), "y": show(y), "x": show(x)})
    return rep


def gamma_unit_checks(F: Endofunctor, K: int = 2) -> Report:
    """gamma_{Id,F}(p, x) = x and gamma_{F,Id}(y, p) = y; both are bijections."""
    require_taut(F, K)
    I = Identity()
    left, right = Gamma(F, I), Gamma(I, F)
    DF = DeltaFunctor(F)
    rep = Report(f"gamma units {F.name}", params={"K": K})
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            p_FX = fresh_points(F(X), 1)[0]
            p_X = fresh_points(X, 1)[0]
            for x in DF(X):
                if left.pair(X, p_FX, x) != x:
                    rep.fail({"law": "left unit", "size": k, "x": show(x)})
                if right.pair(X, x, p_X) != x:
                    rep.fail({"law": "right unit", "size": k, "y": show(x)})
            for g in (left, right):
                if len(g.src(X)) != len(g.dst(X)):
                    rep.fail({"law": "unit map is not bijective", "size": k, "gamma": g.name})
    return rep


# splittings ---------------------------------------------------------------


def _retractions_of_power(k: int) -> int:
    """Natural r: X^k -> X with r . diagonal = id, found by Yoneda over X^k and checked."""
    X = Identity()
    count = 0
    for h in card(k).elems:
        def r(Y, e, h=h):
            return e[1][h[1]]

        t = NatTransf(Product([X] * k), X, r, "r")
        if check_natural(t, 2).passed and all(r(card(2), (TUPLE, (y,) * k)) == y for y in card(2)):
            count += 1
    return count


def splitting_search(K: int = 2) -> Report:
    """Count natural splittings of the cube comparison for F = X^[2], G = X^3.

    Canonical splittings: summand by summand of (F + Delta F)^3 minus F^3, a
    retraction of the diagonal Delta F -> (Delta F)^j is one of j projections,
    giving 1*1*1*2*2*2*3. Then, for F = X^[2] where Delta F = X + 1, every natural
    retraction (X+1)^3 -> X+1 of the diagonal is found by Yoneda over the
    summands X^S of (X+1)^3 and verified, and the S_3-invariant ones counted.
    """
    rep = Report("splitting search", params={"K": K})
    with timed(rep):
        per_j = {j: _retractions_of_power(j) for j in (1, 2, 3)}
        canonical = 1
        for j in (1, 1, 1, 2, 2, 2, 3):
            canonical *= per_j[j]
        rep.details["retractions_per_power"] = per_j
        rep.details["canonical"] = canonical

        D = DeltaFunctor(divided_power(2))
        cube = Product([D, D, D])

        def is_star(d):
            # Delta X^[2](Y) is {[y, p]} + {[p, p]}; [p, p] is the constant summand
            return all(l[0] == TAG for l in leaves(d))

        def coord(d):
            return next(l for l in leaves(d) if l[0] != TAG)

        subsets = [S for r in range(4) for S in itertools.combinations(range(3), r)]
        gens = {S: D(FinSet((ATOM, i) for i in S)).elems for S in subsets}
        found, invariant = 0, 0
        S3 = symmetric(3).elements
        for choice in itertools.product(*(gens[S] for S in subsets)):
            pick = dict(zip(subsets, choice))

            def r(Y, e, pick=pick):
                comps = e[1]
                S = tuple(i for i in range(3) if not is_star(comps[i]))
                xi = FinFun(FinSet((ATOM, i) for i in S), Y, {(ATOM, i): coord(comps[i]) for i in S}, check=False)
                return D.act(xi, pick[S])

            t = NatTransf(cube, D, r, "r")
            ok = True
            for k in range(K + 1):
                Y = card(k)
                for d in D(Y):
                    if r(Y, (TUPLE, (d, d, d))) != d:
                        ok = False
                        break
                if not ok:
                    break
            if not ok or not check_natural(t, K).passed:
                continue
            found += 1
            sym = all(
                r(card(K), e) == r(card(K), (TUPLE, tuple(e[1][g[i]] for i in range(3))))
                for e in cube(card(K)) for g in S3
            )
            invariant += sym
        rep.details["splittings_of_cube_summand"] = found
        rep.details["s3_invariant"] = invariant
    return rep


# tangent functor on pairs -------------------------------------------------


class PairFunctor:
    """An endofunctor on pairs of finite sets: (obj(A, B), arr(f, g))."""

    def __init__(self, first: Endofunctor, second: Callable, second_arr: Callable, name: str):
        self.first, self._second, self._second_arr, self.name = first, second, second_arr, name

    def obj(self, A: FinSet, B: FinSet) -> tuple[FinSet, FinSet]:
        return self.first(A), self._second(A, B)

    def arr(self, f: FinFun, g: FinFun) -> tuple[FinFun, FinFun]:
        return self.first.fmap(f), self._second_arr(f, g)


def tangent_D(F: Endofunctor, K: int = 3) -> PairFunctor:
    """D(F)(A, B) = (F A, Delta[F](A) x B)."""
    require_taut(F, K)
    DF = DeltaFunctor(F)

    def second(A, B):
        return FinSet((TUPLE, (d, b)) for d in DF(A) for b in B)

    def second_arr(f, g):
        return FinFun(second(f.dom, g.dom), second(f.cod, g.cod),
                      lambda e: (TUPLE, (DF.act(f, e[1][0]), g(e[1][1]))))

    return PairFunctor(F, second, second_arr, f"D({F.name})")


def _pair_maps(K: int):
    for a, a2, b, b2 in itertools.product(range(K + 1), repeat=4):
        if (a == 0 or a2 > 0) and (b == 0 or b2 > 0):
            for f in all_functions(card(a), card(a2)):
                for g in all_functions(card(b), card(b2)):
                    yield f, g


def tangent_monoidal_check(F: Endofunctor, G: Endofunctor, K: int = 2) -> Report:
    """(id, gamma x B): D(G) D(F) -> D(G F) is natural on pairs and monic."""
    DFp, DGp = tangent_D(F, K), tangent_D(G, K)
    DGF = tangent_D(Compose(G, F), K)
    g = Gamma(F, G)
    rep = Report(f"D monoidality {G.name}, {F.name}", params={"K": K})

    def comparison(A, B):
        FA, second = DFp.obj(A, B)
        dom = DGp.obj(FA, second)[1]
        cod = DGF.obj(A, B)[1]

        def m(e):
            y, xb = e[1]
            x, b = xb[1]
            return (TUPLE, (g.pair(A, y, x), b))

        return FinFun(dom, cod, m)

    with timed(rep):
        for a in range(K + 1):
            for b in range(K + 1):
                c = comparison(card(a), card(b))
                if not c.is_mono():
                    rep.fail({"law": "monic", "A": a, "B": b})
        for f, h in _pair_maps(K):
            inner = DFp.arr(f, h)
            top = DGp.arr(inner[0], inner[1])[1]
            bottom = DGF.arr(f, h)[1]
            c0, c1 = comparison(f.dom, h.dom), comparison(f.cod, h.cod)
            for e in c0.dom:
                if c1(top(e)) != bottom(c0(e)):
                    rep.fail({"law": "naturality", "f": f.table, "g": h.table, "element": show(e)})
    return rep


# the monad on pairs -------------------------------------------------------


class DMonad:
    """D(T) for a taut monad T: unit (eta A, h_A x B), multiplication Delta[mu](A) . gamma on the second part."""

    def __init__(self, M: Monad, K: int = 3):
        require_taut(M.T, K)
        require_taut_transf(M.unit, K)
        require_taut_transf(M.mult, K)
        self.M = M
        self.T = M.T
        self.DT = DeltaFunctor(M.T)
        self.g = Gamma(M.T, M.T)
        self.D = tangent_D(M.T, K)
        self._m: dict = {}

    def h(self, A: FinSet) -> Element:
        """Delta[eta](A): the unit at A+1 of the adjoined point."""
        return self.M.unit(extend(A), fresh_points(A, 1)[0])

    def m(self, A: FinSet, y: Element, x: Element, memo: bool = True) -> Element:
        """Delta T (T A) x Delta T (A) -> Delta T (A): mu at A+1 after gamma."""
        if not memo:
            return self.M.mult(extend(A), self.g.pair(A, y, x))
        key = (A, y, x)
        got = self._m.get(key)
        if got is None:
            got = self._m[key] = self.M.mult(extend(A), self.g.pair(A, y, x))
        return got

    def unit(self, A: FinSet, B: FinSet) -> tuple[FinFun, FinFun]:
        first = self.M.unit.component(A)
        hA = self.h(A)
        second = FinFun(B, self.D.obj(A, B)[1], lambda b: (TUPLE, (hA, b)))
        return first, second

    def mult(self, A: FinSet, B: FinSet) -> tuple[FinFun, FinFun]:
        TA = self.T(A)
        first = self.M.mult.component(A)
        dom = self.D.obj(TA, self.D.obj(A, B)[1])[1]

        def sec(e):
            y, xb = e[1]
            x, b = xb[1]
            return (TUPLE, (self.m(A, y, x), b))

        return first, FinFun(dom, self.D.obj(A, B)[1], sec)


def d_monad(M: Monad, K: int = 2, cap: int = 5_000_000) -> tuple[DMonad, Report]:
    """Build D(T) and check its monad laws at |A|, |B| <= K.

    The first coordinate is T itself, whose laws check_monad_laws covers. On the
    second coordinate every law carries B through identities, so the unit laws
    are checked on full pairs and associativity on the Delta T(A) part for every
    (z, y, x); sizes with more than cap triples are skipped and recorded.
    """
    from .classes import check_monad_laws

    D = DMonad(M)
    T, mu = D.T, M.mult
    rep = Report(f"D-monad laws {M.name}", params={"K": K, "cap": cap})
    with timed(rep):
        rep.merge(check_monad_laws(M, K))
        for a in range(K + 1):
            A = card(a)
            TA = T(A)
            hTA, hA = D.h(TA), D.h(A)
            eta_A = M.unit.component(A)
            mu_A = mu.component(A)
            for b in range(K + 1):
                B = card(b)
                for x in D.DT(A):
                    for bb in B:
                        # unit laws on the pair (x, b)
                        u1 = (TUPLE, (D.m(A, hTA, x), bb))
                        u2 = (TUPLE, (D.m(A, D.DT.act(eta_A, x), hA), bb))
                        if u1 != (TUPLE, (x, bb)):
                            rep.fail({"law": "left unit", "A": a, "B": b, "x": show(x)})
                        if u2 != (TUPLE, (x, bb)):
                            rep.fail({"law": "right unit", "A": a, "B": b, "x": show(x)})
            zs, ys, xs = D.DT(T(TA)), D.DT(TA), D.DT(A)
            n = len(zs) * len(ys) * len(xs)
            if n > cap:
                rep.details.setdefault("assoc_skipped_sizes", []).append(a)
                continue
            rep.details.setdefault("assoc_checked", []).append([a, n])
            for z in zs:
                z2 = D.DT.act(mu_A, z)
                for y in ys:
                    w = D.m(TA, z, y, memo=False)
                    for x in xs:
                        if D.m(A, w, x) != D.m(A, z2, D.m(A, y, x)):
                            rep.fail({"law": "associativity", "A": a, "z": show(z), "y": show(y), "x": show(x)})
    return D, rep
