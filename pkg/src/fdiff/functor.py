"""Computable endofunctors of finite sets, natural transformations and tautness checks."""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from typing import Callable, Iterable, Iterator, Sequence

from .finset import (
    ATOM,
    EMPTY,
    TAG,
    TUPLE,
    Element,
    FinFun,
    FinSet,
    all_functions,
    card,
    compose as fcompose,
    extend,
    fresh_points,
    identity as fidentity,
    inclusion,
    inverse_image,
    show,
    subsets,
    to_terminal,
)
from .report import DEFAULT_SEED, Report, timed

EXHAUSTIVE_SIZE = 3
EXHAUSTIVE_MAPS = 256


class NotTautError(ValueError):
    """Raised when an operation needs a taut functor or transformation and the check fails."""


class Endofunctor:
    """An endofunctor of finite sets.

    Subclasses implement ``_elements(X)`` (any iterable of canonical elements) and
    ``act(f, e)``, the image of ``e`` under F(f); ``act`` must not need F(f.dom)
    materialized, so huge sets can be probed one element at a time.
    """

    name = "F"

    def __init__(self):
        self._obj_cache: dict[FinSet, FinSet] = {}
        self._arr_cache: dict[FinFun, FinFun] = {}
        self._taut: dict[int, Report] = {}

    def _elements(self, X: FinSet) -> Iterable[Element]:
        raise NotImplementedError

    def act(self, f: FinFun, e: Element) -> Element:
        raise NotImplementedError

    def __call__(self, X: FinSet) -> FinSet:
        got = self._obj_cache.get(X)
        if got is None:
            val = FinSet(self._elements(X))
            got = self._obj_cache.setdefault(X, val)
        return got

    def fmap(self, f: FinFun) -> FinFun:
        got = self._arr_cache.get(f)
        if got is None:
            src = self(f.dom)
            act = self.act
            val = FinFun(src, self(f.cod), tuple(act(f, e) for e in src.elems))
            got = self._arr_cache.setdefault(f, val)
        return got

    def size(self, k: int) -> int:
        return len(self(card(k)))

    def clear_cache(self) -> None:
        self._obj_cache.clear()
        self._arr_cache.clear()

    def __repr__(self) -> str:
        return self.name


class Identity(Endofunctor):
    name = "X"

    def _elements(self, X):
        return X.elems

    def act(self, f, e):
        return f(e)


class Constant(Endofunctor):
    def __init__(self, C: FinSet, name: str | None = None):
        super().__init__()
        self.C = C
        self.name = name or f"C{{{len(C)}}}"

    def _elements(self, X):
        return self.C.elems

    def act(self, f, e):
        return e


def empty() -> Constant:
    return Constant(EMPTY, "0")


def constant(n: int) -> Constant:
    return Constant(card(n))


class Successor(Endofunctor):
    """S X = X + 1, the new point being the first fresh point."""

    name = "X+1"

    def _elements(self, X):
        return extend(X).elems

    def act(self, f, e):
        p = fresh_points(f.dom, 1)[0]
        if e == p:
            return fresh_points(f.cod, 1)[0]
        return f(e)


class Sum(Endofunctor):
    def __init__(self, parts: Sequence[Endofunctor], name: str | None = None):
        super().__init__()
        self.parts = tuple(parts)
        self.name = name or ("(" + " + ".join(p.name for p in self.parts) + ")" if self.parts else "0")

    def _elements(self, X):
        for i, F in enumerate(self.parts):
            lab = str(i)
            for e in F(X):
                yield (TAG, lab, e)

    def act(self, f, e):
        return (TAG, e[1], self.parts[int(e[1])].act(f, e[2]))


class Product(Endofunctor):
    def __init__(self, parts: Sequence[Endofunctor], name: str | None = None):
        super().__init__()
        self.parts = tuple(parts)
        self.name = name or ("(" + " * ".join(p.name for p in self.parts) + ")" if self.parts else "1")

    def _elements(self, X):
        for combo in itertools.product(*(F(X).elems for F in self.parts)):
            yield (TUPLE, combo)

    def act(self, f, e):
        return (TUPLE, tuple(F.act(f, x) for F, x in zip(self.parts, e[1])))


class Compose(Endofunctor):
    """G o F."""

    def __init__(self, G: Endofunctor, F: Endofunctor, name: str | None = None):
        super().__init__()
        self.G, self.F = G, F
        self.name = name or f"({G.name} o {F.name})"

    def _elements(self, X):
        return self.G(self.F(X)).elems

    def act(self, f, e):
        return self.G.act(self.F.fmap(f), e)


class Subfunctor(Endofunctor):
    """Elements of F satisfying pred(X, e); the caller guarantees closure under F's arrows."""

    def __init__(self, F: Endofunctor, pred: Callable[[FinSet, Element], bool], name: str):
        super().__init__()
        self.base, self.pred, self.name = F, pred, name

    def _elements(self, X):
        return (e for e in self.base(X) if self.pred(X, e))

    def act(self, f, e):
        return self.base.act(f, e)


class FreeModule(Endofunctor):
    """Finitely supported Z/p-valued functions, pushed forward by summation.

    A finite stand-in for the free abelian group functor: it is not taut.
    """

    def __init__(self, p: int = 3):
        super().__init__()
        self.p = p
        self.name = f"Z{p}[X]"

    def _elements(self, X):
        for coeffs in itertools.product(range(self.p), repeat=len(X)):
            yield (TUPLE, tuple((ATOM, c) for c in coeffs))

    def act(self, f, e):
        out = [0] * len(f.cod)
        idx = f.cod.index
        for x, c in zip(f.dom.elems, e[1]):
            out[idx[f(x)]] = (out[idx[f(x)]] + c[1]) % self.p
        return (TUPLE, tuple((ATOM, c) for c in out))


class NatTransf:
    """A family of maps src(X) -> dst(X), given element-wise by apply(X, e)."""

    def __init__(self, src: Endofunctor, dst: Endofunctor, apply: Callable[[FinSet, Element], Element], name: str = "t"):
        self.src, self.dst, self._apply, self.name = src, dst, apply, name
        self._cache: dict[FinSet, FinFun] = {}
        self._taut: dict[int, Report] = {}

    def __call__(self, X: FinSet, e: Element) -> Element:
        return self._apply(X, e)

    def component(self, X: FinSet) -> FinFun:
        got = self._cache.get(X)
        if got is None:
            got = self._cache.setdefault(X, FinFun(self.src(X), self.dst(X), lambda e: self._apply(X, e)))
        return got

    def __repr__(self) -> str:
        return f"{self.name}: {self.src.name} -> {self.dst.name}"


def identity_transf(F: Endofunctor) -> NatTransf:
    return NatTransf(F, F, lambda X, e: e, f"id_{F.name}")


def vertical(u: NatTransf, t: NatTransf) -> NatTransf:
    """u . t"""
    return NatTransf(t.src, u.dst, lambda X, e: u(X, t(X, e)), f"{u.name}.{t.name}")


def horizontal(u: NatTransf, t: NatTransf) -> NatTransf:
    """u * t : G F -> G' F' for t: F -> F', u: G -> G'; component u_{F'X} . G(t_X)."""
    G, F = u.src, t.src
    src = Compose(G, F)
    dst = Compose(u.dst, t.dst)

    def apply(X, e):
        return u(t.dst(X), G.act(t.component(X), e))

    return NatTransf(src, dst, apply, f"{u.name}*{t.name}")


def whisker_right(t: NatTransf, F: Endofunctor) -> NatTransf:
    """t F : G F -> G' F."""
    return NatTransf(Compose(t.src, F), Compose(t.dst, F), lambda X, e: t(F(X), e), f"{t.name}{F.name}")


# test-set plumbing -------------------------------------------------------


def _rng(seed: int) -> random.Random:
    return random.Random(seed)


def test_maps(K: int, seed: int = DEFAULT_SEED, samples: int = 64, sizes: Iterable[int] | None = None) -> Iterator[FinFun]:
    """All maps card(a) -> card(b) with a, b <= K when there are few, else a seeded sample."""
    rng = _rng(seed)
    rng_sizes = list(sizes) if sizes is not None else list(range(K + 1))
    for a in rng_sizes:
        for b in rng_sizes:
            X, Y = card(a), card(b)
            if b == 0 and a > 0:
                continue
            if b**a <= EXHAUSTIVE_MAPS:
                yield from all_functions(X, Y)
            else:
                for _ in range(samples):
                    yield FinFun(X, Y, [Y.elems[rng.randrange(b)] for _ in range(a)], check=False)


def pullback_defect(top: FinFun, left: FinFun, right: FinFun, bottom: FinFun):
    """None if the square A -> B, A -> C over D is a pullback, else a witness dict."""
    bucket = defaultdict(list)
    for b, d in zip(right.dom.elems, right.table):
        bucket[d].append(b)
    pairs = set()
    for c, d in zip(bottom.dom.elems, bottom.table):
        for b in bucket.get(d, ()):
            pairs.add((c, b))
    seen = {}
    for a, b, c in zip(top.dom.elems, top.table, left.table):
        pr = (c, b)
        if pr not in pairs:
            return {"reason": "square does not commute", "element": show(a)}
        if pr in seen:
            return {"reason": "comparison map not injective", "elements": [show(seen[pr]), show(a)]}
        seen[pr] = a
    if len(seen) != len(pairs):
        c, b = min(p for p in pairs if p not in seen)
        return {"reason": "pair missing from the image", "pair": [show(c), show(b)]}
    return None


def square_defect(F: Endofunctor, f: FinFun, sub: FinSet):
    """Apply F to the inverse-image square of sub >-> cod(f) along f."""
    X0 = sub
    Y0 = inverse_image(f, X0)
    m = inclusion(X0, f.cod)
    n = inclusion(Y0, f.dom)
    f0 = FinFun(Y0, X0, [f(y) for y in Y0], check=False)
    return pullback_defect(F.fmap(f0), F.fmap(n), F.fmap(m), F.fmap(f))


def _square_name(f: FinFun, sub: FinSet) -> dict:
    return {
        "f": f"{len(f.dom)}->{len(f.cod)}: " + ",".join(show(y) for y in f.table),
        "mono": show((TUPLE, sub.elems)),
    }


def check_taut(F: Endofunctor, K: int = 3, seed: int = DEFAULT_SEED, samples: int = 32) -> Report:
    """Preservation of every inverse-image square with |X|, |Y| <= K.

    Exhaustive while both sides have at most three points; seeded sample above.
    """
    rep = Report(f"taut {F.name}", params={"K": K, "seed": seed})
    rng = _rng(seed)
    count = 0
    with timed(rep):
        for kx in range(K + 1):
            X = card(kx)
            for ky in range(K + 1):
                if kx == 0 and ky > 0:
                    continue
                Y = card(ky)
                if kx <= EXHAUSTIVE_SIZE and ky <= EXHAUSTIVE_SIZE:
                    cases = ((f, s) for s in subsets(X) for f in all_functions(Y, X))
                else:
                    subs = list(subsets(X)) if kx <= 4 else None
                    cases = []
                    for _ in range(samples):
                        f = FinFun(Y, X, [X.elems[rng.randrange(kx)] for _ in range(ky)], check=False)
                        s = subs[rng.randrange(len(subs))] if subs else FinSet(x for x in X if rng.random() < 0.5)
                        cases.append((f, s))
                for f, s in cases:
                    count += 1
                    d = square_defect(F, f, s)
                    if d is not None:
                        d.update(_square_name(f, s))
                        rep.fail(d)
    rep.details["squares"] = count
    F._taut[K] = rep
    return rep


def require_taut(F: Endofunctor, K: int = 3) -> Report:
    """The cached tautness report for F at bound >= K, running the check if needed."""
    for k, r in F._taut.items():
        if k >= K and r.passed:
            return r
    rep = F._taut.get(K) or check_taut(F, K)
    if not rep.passed:
        raise NotTautError(f"{F.name} is not taut: {rep.witnesses[0]}")
    return rep


def check_taut_transf(t: NatTransf, K: int = 3, seed: int = DEFAULT_SEED, samples: int = 32) -> Report:
    """Every naturality square at a mono X0 >-> X (|X| <= K) is a pullback."""
    rep = Report(f"taut transformation {t.name}", params={"K": K, "seed": seed})
    rng = _rng(seed)
    count = 0
    with timed(rep):
        for kx in range(K + 1):
            X = card(kx)
            if kx <= EXHAUSTIVE_SIZE:
                subs = list(subsets(X))
            else:
                subs = [FinSet(x for x in X if rng.random() < 0.5) for _ in range(samples)]
            tX = t.component(X)
            for X0 in subs:
                count += 1
                m = inclusion(X0, X)
                d = pullback_defect(t.component(X0), t.src.fmap(m), t.dst.fmap(m), tX)
                if d is not None:
                    d["mono"] = f"{show((TUPLE, X0.elems))} >-> {kx}"
                    rep.fail(d)
    rep.details["squares"] = count
    t._taut[K] = rep
    return rep


def require_taut_transf(t: NatTransf, K: int = 3) -> Report:
    for k, r in t._taut.items():
        if k >= K and r.passed:
            return r
    rep = t._taut.get(K) or check_taut_transf(t, K)
    if not rep.passed:
        raise NotTautError(f"{t.name} is not a taut transformation: {rep.witnesses[0]}")
    return rep


def check_functorial(F: Endofunctor, K: int = 3, seed: int = DEFAULT_SEED) -> Report:
    """F(id) = id and F(g f) = F(g) F(f) on test maps."""
    rep = Report(f"functorial {F.name}", params={"K": K, "seed": seed})
    maps = list(test_maps(K, seed, samples=8))
    by_dom = defaultdict(list)
    for g in maps:
        by_dom[g.dom].append(g)
    rng = _rng(seed)
    with timed(rep):
        for k in range(K + 1):
            X = card(k)
            if F.fmap(fidentity(X)) != fidentity(F(X)):
                rep.fail({"reason": "identity not preserved", "size": k})
        for f in maps:
            gs = by_dom[f.cod]
            for g in rng.sample(gs, min(4, len(gs))):
                if F.fmap(fcompose(g, f)) != fcompose(F.fmap(g), F.fmap(f)):
                    rep.fail({"reason": "composition not preserved", "f": repr(f), "g": repr(g)})
    return rep


def check_natural(t: NatTransf, K: int = 3, seed: int = DEFAULT_SEED, samples: int = 16) -> Report:
    rep = Report(f"natural {t.name}", params={"K": K, "seed": seed})
    count = 0
    with timed(rep):
        for f in test_maps(K, seed, samples):
            count += 1
            tX = t.component(f.dom)
            tY = t.component(f.cod)
            Gf = t.dst.fmap(f)
            Ff = t.src.fmap(f)
            for e, te in zip(tX.dom.elems, tX.table):
                if Gf(te) != tY(Ff(e)):
                    rep.fail({"map": repr(f), "element": show(e)})
                    break
    rep.details["maps"] = count
    return rep


def iso_witness(F: Endofunctor, G: Endofunctor, K: int = 3, explicit: NatTransf | None = None,
                seed: int = DEFAULT_SEED) -> Report:
    """Verify an explicit natural bijection F -> G, or fall back to cardinalities."""
    rep = Report(f"iso {F.name} ~ {G.name}", params={"K": K, "seed": seed})
    with timed(rep):
        sizes = {}
        for k in range(K + 1):
            a, b = F.size(k), G.size(k)
            sizes[k] = [a, b]
            if a != b:
                rep.fail({"reason": "cardinality mismatch", "size": k, "counts": [a, b]})
        rep.details["sizes"] = sizes
        if explicit is None:
            rep.details["kind"] = "cardinality-consistent"
            return rep
        rep.details["kind"] = "natural isomorphism"
        for k in range(K + 1):
            c = explicit.component(card(k))
            if not c.is_iso():
                rep.fail({"reason": "component not bijective", "size": k})
        rep.merge(check_natural(explicit, K, seed))
    return rep


def cancellation(F: Endofunctor, G: Endofunctor, H: Endofunctor, iso: NatTransf, K: int = 3) -> tuple[NatTransf, Report]:
    """From F+G ~ F+H commuting with the F-injections, the restricted G ~ H.

    Sum elements are tagged '0' (F) and '1' (G or H).
    """
    rep = Report("cancellation", params={"K": K})
    for k in range(K + 1):
        X = card(k)
        for e in F(X):
            if iso(X, (TAG, "0", e)) != (TAG, "0", e):
                rep.fail({"reason": "iso does not commute with the F injection", "element": show(e)})

    def apply(X, g):
        img = iso(X, (TAG, "1", g))
        if img[1] != "1":
            raise ValueError("iso sends a G element into the F summand")
        return img[2]

    r = NatTransf(G, H, apply, f"{iso.name}|G")
    rep.merge(iso_witness(G, H, K, explicit=r))
    return r, rep


def components(F: Endofunctor, K: int = 3) -> list[tuple[Element, Subfunctor]]:
    """Split F as the sum over i in F(1) of the inverse images of i along F(X) -> F(1)."""
    out = []
    for i in F(card(1)):
        pred = (lambda i: lambda X, e: F.act(to_terminal(X), e) == i)(i)
        out.append((i, Subfunctor(F, pred, f"{F.name}[{show(i)}]")))
    return out
