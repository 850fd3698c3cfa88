"""A small expression language for functors.

    expr    := product ('+' product)*
    product := compose ('*' compose)*
    compose := atom ('o' atom)*
    atom    := 'X' | 'X^' int | 'X^[' int ']' | 'X^' int '/' group | 'C{' int '}' | int
             | lattice '^[X]' | lattice '^X' | 'F' | "F'" | 'P' | 'beta' | 'zeta(' int ')'
             | 'delta(' expr ')' | 'delta^' int '(' expr ')'
             | 'analytic(' string ')' | 'newton(' string ')' | '(' expr ')'
    group   := 'S' int | '<' perm (',' perm)* '>'      perm := '[' int (',' int)* ']'
    lattice := lattice_atom ('x' lattice_atom)*        lattice_atom := 'chain' int | int '_*'

Whitespace is ignored. Errors carry the byte offset of the offending token.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

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
    chain,
    coset_action,
    n_star,
    normalized_exponential,
    product_lattice,
    regular_action,
    trivial_action,
    zeta_truncation,
)
from .delta import MonadSpec, delta, iterated
from .finset import PermGroup, card, symmetric
from .functor import Compose, Constant, Endofunctor, Identity, Product, Sum


class ParseError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} at byte {offset}")
        self.offset = offset


# AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    n: int


@dataclass(frozen=True)
class StarLat:
    n: int


@dataclass(frozen=True)
class LatProd:
    parts: tuple


LatExpr = Union[Chain, StarLat, LatProd]


@dataclass(frozen=True)
class Sym:
    n: int


@dataclass(frozen=True)
class Gens:
    perms: tuple


@dataclass(frozen=True)
class Const:
    n: int


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class Power:
    n: int


@dataclass(frozen=True)
class DividedPower:
    n: int


@dataclass(frozen=True)
class QuotPower:
    n: int
    group: Union[Sym, Gens]


@dataclass(frozen=True)
class LatExp:
    lattice: LatExpr
    normalized: bool


@dataclass(frozen=True)
class Monad:
    kind: str  # 'F', "F'", 'P', 'beta'


@dataclass(frozen=True)
class Zeta:
    N: int


@dataclass(frozen=True)
class Delta:
    arg: object


@dataclass(frozen=True)
class DeltaN:
    arg: object
    n: int


@dataclass(frozen=True)
class Analytic:
    path: str


@dataclass(frozen=True)
class Newton:
    path: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '*', 'o'
    left: object
    right: object


# lexer --------------------------------------------------------------------

KEYWORDS = ["analytic", "newton", "delta", "chain", "zeta", "beta", "X", "F", "P", "S", "C", "o", "x"]
PUNCT = ["^[X]", "_*", "^", "[", "]", "(", ")", "{", "}", "<", ">", ",", "+", "*", "/", "'"]


@dataclass(frozen=True)
class Tok:
    kind: str  # 'kw', 'int', 'str', 'p', 'end'
    text: str
    pos: int


def tokenize(src: str) -> list[Tok]:
    out, i, data = [], 0, src.encode()
    text = src
    # byte offsets: track by encoding the prefix lazily
    def off(ci):
        return len(text[:ci].encode())

    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            m = re.match(r"\d+", text[i:])
            out.append(Tok("int", m.group(), off(i)))
            i += len(m.group())
            continue
        if c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", off(i))
            out.append(Tok("str", text[i + 1:j], off(i)))
            i = j + 1
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                out.append(Tok("p", p, off(i)))
                i += len(p)
                break
        else:
            for k in KEYWORDS:
                if text.startswith(k, i):
                    out.append(Tok("kw", k, off(i)))
                    i += len(k)
                    break
            else:
                m = re.match(r"[A-Za-z_]\w*", text[i:])
                word = m.group() if m else c
                raise ParseError(f"unknown identifier {word!r}", off(i))
    out.append(Tok("end", "", len(data)))
    return out


# parser -------------------------------------------------------------------


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> Tok:
        t = self.cur
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.cur.kind in ("p", "kw") and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if self.cur.kind in ("p", "kw") and self.cur.text == text:
            return self.take()
        found = self.cur.text or "end of input"
        raise ParseError(f"expected {text!r}, found {found!r}", self.cur.pos)

    def integer(self) -> int:
        if self.cur.kind != "int":
            raise ParseError(f"expected an integer, found {self.cur.text or 'end of input'!r}", self.cur.pos)
        return int(self.take().text)

    def parse(self):
        e = self.expr()
        if self.cur.kind != "end":
            raise ParseError(f"unexpected {self.cur.text!r}", self.cur.pos)
        return e

    def expr(self):
        e = self.product()
        while self.accept("+"):
            e = BinOp("+", e, self.product())
        return e

    def product(self):
        e = self.compose()
        while self.accept("*"):
            e = BinOp("*", e, self.compose())
        return e

    def compose(self):
        e = self.atom()
        while self.accept("o"):
            e = BinOp("o", e, self.atom())
        return e

    def atom(self):
        t = self.cur
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "int":
            if self.peek().text == "_*":
                return self.lattice_exp()
            return Const(self.integer())
        if t.kind != "kw":
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)
        kw = t.text
        if kw == "chain":
            return self.lattice_exp()
        self.take()
        if kw == "X":
            if not self.accept("^"):
                return Id()
            if self.accept("["):
                n = self.integer()
                self.expect("]")
                return DividedPower(n)
            n = self.integer()
            if self.accept("/"):
                return QuotPower(n, self.group(n))
            return Power(n)
        if kw == "C":
            self.expect("{")
            n = self.integer()
            self.expect("}")
            return Const(n)
        if kw == "F":
            return Monad("F'") if self.accept("'") else Monad("F")
        if kw == "P":
            return Monad("P")
        if kw == "beta":
            return Monad("beta")
        if kw == "zeta":
            self.expect("(")
            N = self.integer()
            self.expect(")")
            return Zeta(N)
        if kw == "delta":
            n = None
            if self.accept("^"):
                n = self.integer()
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return Delta(e) if n is None else DeltaN(e, n)
        if kw in ("analytic", "newton"):
            self.expect("(")
            if self.cur.kind != "str":
                raise ParseError("expected a quoted file name", self.cur.pos)
            path = self.take().text
            self.expect(")")
            return Analytic(path) if kw == "analytic" else Newton(path)
        raise ParseError(f"unexpected {kw!r}", t.pos)

    def group(self, n: int):
        t = self.cur
        if self.accept("S"):
            m = self.integer()
            if m != n:
                raise ParseError(f"S{m} does not act on {n} coordinates", t.pos)
            return Sym(m)
        self.expect("<")
        perms = [self.perm(n)]
        while self.accept(","):
            perms.append(self.perm(n))
        self.expect(">")
        return Gens(tuple(perms))

    def perm(self, n: int) -> tuple:
        t = self.expect("[")
        vals = [self.integer()]
        while self.accept(","):
            vals.append(self.integer())
        self.expect("]")
        if sorted(vals) != list(range(n)):
            raise ParseError(f"malformed permutation {vals} of {n} points", t.pos)
        return tuple(vals)

    def lattice_atom(self):
        if self.accept("chain"):
            n = self.integer()
            if n < 1:
                raise ParseError("a chain has at least one element", self.toks[self.i - 1].pos)
            return Chain(n)
        t = self.cur
        n = self.integer()
        if n < 1:
            raise ParseError("n_* needs n >= 1", t.pos)
        self.expect("_*")
        return StarLat(n)

    def lattice_exp(self):
        parts = [self.lattice_atom()]
        while self.accept("x"):
            parts.append(self.lattice_atom())
        L = parts[0] if len(parts) == 1 else LatProd(tuple(parts))
        if self.accept("^[X]"):
            return LatExp(L, True)
        self.expect("^")
        self.expect("X")
        return LatExp(L, False)


def parse(src: str):
    return Parser(src).parse()


# printer ------------------------------------------------------------------

PREC = {"+": 1, "*": 2, "o": 3}


def _lat_str(L) -> str:
    if isinstance(L, Chain):
        return f"chain{L.n}"
    if isinstance(L, StarLat):
        return f"{L.n}_*"
    return " x ".join(_lat_str(p) for p in L.parts)


def to_str(e, prec: int = 0) -> str:
    if isinstance(e, BinOp):
        p = PREC[e.op]
        s = f"{to_str(e.left, p)} {e.op} {to_str(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, Const):
        return f"C{{{e.n}}}"
    if isinstance(e, Id):
        return "X"
    if isinstance(e, Power):
        return f"X^{e.n}"
    if isinstance(e, DividedPower):
        return f"X^[{e.n}]"
    if isinstance(e, QuotPower):
        if isinstance(e.group, Sym):
            return f"X^{e.n}/S{e.group.n}"
        gens = ",".join("[" + ",".join(map(str, p)) + "]" for p in e.group.perms)
        return f"X^{e.n}/<{gens}>"
    if isinstance(e, LatExp):
        return _lat_str(e.lattice) + ("^[X]" if e.normalized else "^X")
    if isinstance(e, Monad):
        return e.kind
    if isinstance(e, Zeta):
        return f"zeta({e.N})"
    if isinstance(e, Delta):
        return f"delta({to_str(e.arg)})"
    if isinstance(e, DeltaN):
        return f"delta^{e.n}({to_str(e.arg)})"
    if isinstance(e, Analytic):
        return f'analytic("{e.path}")'
    if isinstance(e, Newton):
        return f'newton("{e.path}")'
    raise TypeError(f"not an expression node: {e!r}")


# evaluation ---------------------------------------------------------------


def lattice_of(L):
    if isinstance(L, Chain):
        return chain(L.n)
    if isinstance(L, StarLat):
        return n_star(L.n)
    M = product_lattice(*(lattice_of(p) for p in L.parts))
    M.name = _lat_str(L)
    return M


def group_of(n: int, g) -> PermGroup:
    if isinstance(g, Sym):
        return symmetric(n)
    return PermGroup(n, g.perms)


def load_analytic(path: str, base: Path | None = None) -> SpeciesSpec:
    """{"coeffs": {"n": {"kind": "regular" | "trivial" | "coset", "size": k, "generators": [...]}}}."""
    obj = json.loads(Path(base or ".", path).read_text())
    coeffs = {}
    for key, c in obj["coeffs"].items():
        n = int(key)
        kind = c.get("kind", "trivial")
        if kind == "regular":
            coeffs[n] = regular_action(n)
        elif kind == "trivial":
            coeffs[n] = trivial_action(n, int(c.get("size", 1)))
        elif kind == "coset":
            coeffs[n] = coset_action(n, PermGroup(n, [tuple(p) for p in c.get("generators", [])]))
        else:
            raise ValueError(f"unknown coefficient kind {kind!r}")
    return SpeciesSpec(coeffs)


def to_functor(e, K: int = 3, base: Path | None = None) -> Endofunctor:
    """Build the functor; delta nodes refuse arguments that fail the tautness check at K."""
    if isinstance(e, BinOp):
        a, b = to_functor(e.left, K, base), to_functor(e.right, K, base)
        name = to_str(e)
        if e.op == "+":
            return Sum([a, b], name)
        if e.op == "*":
            return Product([a, b], name)
        return Compose(a, b, name)
    if isinstance(e, Const):
        return Constant(card(e.n), str(e.n))
    if isinstance(e, Id):
        return Identity()
    if isinstance(e, Delta):
        F = delta(to_functor(e.arg, K, base), K)
        F.name = to_str(e)
        return F
    if isinstance(e, DeltaN):
        F = iterated(to_functor(e.arg, K, base), e.n, K)
        F.name = to_str(e)
        return F
    if isinstance(e, Zeta):
        return zeta_truncation(e.N)
    if isinstance(e, Monad):
        return {"F": lambda: FilterFunctor(), "F'": lambda: FilterFunctor(proper=True),
                "P": Powerset, "beta": Ultrafilter}[e.kind]()
    if isinstance(e, Newton):
        from .newton import NewtonSum, load_species

        return NewtonSum(load_species(Path(base or ".", e.path).read_text()))
    if isinstance(e, LatExp) and not e.normalized:
        return FullExponential(lattice_of(e.lattice))
    spec = to_spec(e, base)
    if isinstance(spec, PolySpec):
        return PolyFunctor(spec)
    if isinstance(spec, QuotPowerSpec):
        return QuotPowerFunctor(spec)
    if isinstance(spec, DirichletSpec):
        F = normalized_exponential(lattice_of(e.lattice))
        return F
    if isinstance(spec, SpeciesSpec):
        return AnalyticFunctor(spec)
    raise TypeError(f"cannot evaluate {to_str(e)}")


def _poly_compose(outer: PolySpec, inner: PolySpec) -> PolySpec:
    out = []
    for a in outer.exponents:
        acc = [0]
        for _ in range(a):
            acc = [x + y for x in acc for y in inner.exponents]
        out.extend(acc)
    return PolySpec(tuple(sorted(out)))


def to_spec(e, base: Path | None = None):
    """A closed-form class spec for e when one applies, else None."""
    if isinstance(e, Const):
        return PolySpec((0,) * e.n)
    if isinstance(e, Id):
        return PolySpec((1,))
    if isinstance(e, Power):
        return PolySpec((e.n,))
    if isinstance(e, DividedPower):
        return QuotPowerSpec(((e.n, symmetric(e.n)),))
    if isinstance(e, QuotPower):
        return QuotPowerSpec(((e.n, group_of(e.n, e.group)),))
    if isinstance(e, LatExp):
        L = lattice_of(e.lattice)
        return DirichletSpec([(card(1), L)]) if e.normalized else FullExpSpec(card(1), L)
    if isinstance(e, Monad):
        return MonadSpec(e.kind)
    if isinstance(e, Zeta):
        return DirichletSpec([(card(1), n_star(n)) for n in range(1, e.N + 1)])
    if isinstance(e, Analytic):
        return load_analytic(e.path, base)
    if isinstance(e, BinOp):
        a, b = to_spec(e.left, base), to_spec(e.right, base)
        if isinstance(a, PolySpec) and isinstance(b, PolySpec):
            if e.op == "+":
                return PolySpec(tuple(sorted(a.exponents + b.exponents)))
            if e.op == "*":
                return PolySpec(tuple(sorted(x + y for x in a.exponents for y in b.exponents)))
            return _poly_compose(a, b)
        if e.op == "+" and {type(a), type(b)} <= {PolySpec, QuotPowerSpec}:
            terms = []
            for s in (a, b):
                if isinstance(s, PolySpec):
                    terms.extend((n, PermGroup(n, [])) for n in s.exponents)
                else:
                    terms.extend(s.terms)
            return QuotPowerSpec(tuple(terms))
    return None
