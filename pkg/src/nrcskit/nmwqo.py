"""Nested-multiset normed wqos.

Expressions follow the grammar ``A := G0 | A + A | M[A]``.  Elements of a
sum carry an L/R tag, elements of ``M[A]`` are finite multisets (bags).
Besides ordering and norms this module has the order-type calculus
(``o``, ``C``), the reflection expressions ``R_n``, the derivative
operators ``D_n``/``delta_n``, the bound ``M_{alpha,g}`` and a brute-force
search for controlled bad sequences.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from functools import lru_cache
from collections.abc import Iterator, Sequence

from .nrcs import Tree, _match
from .ordinal import (ZERO, BudgetExhausted, ControlFunction, Ordinal, natural_scale,
                      natural_sum)

# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Gamma0:
    def __str__(self):
        return "G0"


@dataclass(frozen=True)
class Sum:
    left: NmExpr
    right: NmExpr

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class Multi:
    inner: NmExpr

    def __str__(self):
        return f"M[{self.inner}]"


NmExpr = Gamma0 | Sum | Multi
G0 = Gamma0()


def sum_of(parts: Sequence[NmExpr]) -> NmExpr:
    """Left-nested sum; the empty sum is G0."""
    if not parts:
        return G0
    out = parts[0]
    for p in parts[1:]:
        out = Sum(out, p)
    return out


def gamma(n: int) -> NmExpr:
    """Gamma_n: n copies of M[G0]."""
    return sum_of([Multi(G0)] * n)


def times(a: NmExpr, n: int) -> NmExpr:
    return sum_of([a] * n)


def flatten(a: NmExpr) -> list[NmExpr]:
    if isinstance(a, Sum):
        return flatten(a.left) + flatten(a.right)
    return [a]


def grammar_size(a: NmExpr) -> int:
    if isinstance(a, Sum):
        return 1 + grammar_size(a.left) + grammar_size(a.right)
    if isinstance(a, Multi):
        return 1 + grammar_size(a.inner)
    return 1


def iter_exprs(max_nodes: int) -> Iterator[NmExpr]:
    """Every expression with at most max_nodes grammar nodes."""
    by_size: dict[int, list[NmExpr]] = {1: [G0]}
    for s in range(2, max_nodes + 1):
        out = [Multi(e) for e in by_size[s - 1]]
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            out += [Sum(l, r) for l in by_size[ls] for r in by_size.get(rs, [])]
        by_size[s] = out
    for s in range(1, max_nodes + 1):
        yield from by_size[s]


# ---------------------------------------------------------------------------
# Elements


class NmElem:
    __slots__ = ("_hash", "key")

    def __eq__(self, other):
        return isinstance(other, NmElem) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return self.key

    def __repr__(self):
        return f"{type(self).__name__}({self.key})"


class Tagged(NmElem):
    __slots__ = ("inner", "side")

    def __init__(self, side: str, inner: NmElem):
        if side not in ("L", "R"):
            raise ValueError("side must be 'L' or 'R'")
        self.side = side
        self.inner = inner
        self.key = f"{side}:{inner.key}"
        self._hash = hash(self.key)


class Bag(NmElem):
    __slots__ = ("items",)

    def __init__(self, items: Sequence[NmElem] = ()):
        self.items = tuple(sorted(items))
        self.key = "{" + ",".join(i.key for i in self.items) + "}"
        self._hash = hash(self.key)


class ShapeError(ValueError):
    pass


def belongs(a: NmExpr, e: NmElem) -> bool:
    if isinstance(a, Gamma0):
        return False
    if isinstance(a, Sum):
        if not isinstance(e, Tagged):
            return False
        return belongs(a.left if e.side == "L" else a.right, e.inner)
    if not isinstance(e, Bag):
        return False
    return all(belongs(a.inner, x) for x in e.items)


def _check(a: NmExpr, *elems: NmElem):
    for e in elems:
        if not belongs(a, e):
            raise ShapeError(f"{e} is not an element of {a}")


@lru_cache(maxsize=1 << 16)
def _norm(e: NmElem) -> int:
    if isinstance(e, Tagged):
        return _norm(e.inner)
    return sum(max(_norm(x), 1) for x in e.items)


def norm(a: NmExpr | None, e: NmElem) -> int:
    """|e|; pass expr=None to skip the shape check."""
    if a is not None:
        _check(a, e)
    return _norm(e)


@lru_cache(maxsize=1 << 18)
def _leq(x: NmElem, y: NmElem) -> bool:
    if isinstance(x, Tagged):
        return isinstance(y, Tagged) and x.side == y.side and _leq(x.inner, y.inner)
    if not isinstance(y, Bag) or len(x.items) > len(y.items):
        return False
    if not x.items:
        return True
    return _match(x.items, y.items, _leq) is not None


def leq(a: NmExpr | None, x: NmElem, y: NmElem) -> bool:
    if a is not None:
        _check(a, x, y)
    return _leq(x, y)


def inject(copies: int, index: int, e: NmElem) -> NmElem:
    """Element of copy ``index`` (0-based) in the left-nested sum of ``copies`` summands."""
    if not 0 <= index < copies:
        raise ValueError("copy index out of range")
    if copies == 1:
        return e
    if index == copies - 1:
        return Tagged("R", e)
    return Tagged("L", inject(copies - 1, index, e))


def locate(a: NmExpr, e: NmElem) -> tuple[int, NmElem]:
    """Position of e's summand in flatten(a), and e seen inside that summand."""
    if not isinstance(a, Sum):
        return 0, e
    if not isinstance(e, Tagged):
        raise ShapeError(f"{e} is not tagged for sum {a}")
    if e.side == "L":
        return locate(a.left, e.inner)
    i, inner = locate(a.right, e.inner)
    return len(flatten(a.left)) + i, inner


# ---------------------------------------------------------------------------
# Order types


def order_type(a: NmExpr) -> Ordinal:
    if isinstance(a, Gamma0):
        return ZERO
    if isinstance(a, Sum):
        return natural_sum(order_type(a.left), order_type(a.right))
    return Ordinal.omega_power(order_type(a.inner))


def canonical_expr(alpha: Ordinal) -> NmExpr:
    parts = []
    for exp, c in alpha.terms:
        parts += [Multi(canonical_expr(exp))] * c
    return sum_of(parts)


# ---------------------------------------------------------------------------
# Reflection expressions R_n


def residual_bound_expr(a: NmExpr, e: NmElem, n: int) -> NmExpr:
    """R_n(A, a), an expression into which the residual A/a reflects."""
    if isinstance(a, Gamma0):
        raise ShapeError("R_n is undefined on G0")
    if n < 1:
        raise ValueError("R_n needs n >= 1")
    if norm(a, e) > n:
        raise ValueError(f"|{e}| exceeds n={n}")
    return _residual(a, e, n)


def _residual(a: NmExpr, e: NmElem, n: int) -> NmExpr:
    parts = flatten(a)
    if len(parts) > 1:
        # sum of multisets: recurse into the summand containing e
        i, inner = locate(a, e)
        others = parts[:i] + parts[i + 1:]
        return sum_of(others + [_residual(parts[i], inner, n)])
    if not isinstance(a, Multi):
        raise ShapeError(f"unexpected expression {a}")
    body = a.inner
    if isinstance(body, Gamma0):
        return G0
    inner_parts = flatten(body)
    if len(inner_parts) > 1:
        groups: list[list[NmElem]] = [[] for _ in inner_parts]
        for x in e.items:
            i, x_in = locate(body, x)
            groups[i].append(x_in)
        out = []
        for i, b_i in enumerate(inner_parts):
            rest = inner_parts[:i] + inner_parts[i + 1:]
            sub = _residual(Multi(b_i), Bag(groups[i]), n)
            for piece in flatten(sub):
                if isinstance(piece, Gamma0):
                    continue
                out.append(Multi(sum_of(rest + [piece.inner])))
        return sum_of(out)
    # M[M[B]]
    inner_b = body.inner
    out = []
    for x in e.items:
        sub = _residual(body, x, n)
        out.append(Multi(sum_of([inner_b] * (n - 1) + [sub])))
    return sum_of(out)


# ---------------------------------------------------------------------------
# Derivatives


def _omega_term_minus(beta: Ordinal, exp: Ordinal) -> Ordinal:
    """beta with one copy of w^exp removed."""
    terms = []
    for e, c in beta.terms:
        if e == exp:
            c -= 1
        if c:
            terms.append((e, c))
    return Ordinal(terms)


def derivative_D(alpha: Ordinal, n: int) -> Ordinal:
    if n < 1:
        raise ValueError("D_n needs n >= 1")
    if not alpha.is_omega_power():
        raise ValueError(f"{alpha} is not of the form w^b")
    return _D(alpha.terms[0][0], n)


@lru_cache(maxsize=1 << 14)
def _D(beta: Ordinal, n: int) -> Ordinal:
    # D_n(w^beta)
    if beta.is_zero():
        return ZERO
    if beta.is_omega_power():
        gam = beta.terms[0][0]
        exp = natural_sum(natural_scale(gam, n - 1), _D(gam, n))
        return Ordinal.omega_power(exp, n)
    terms = []
    for e, c in beta.terms:
        rest = _omega_term_minus(beta, e)
        d = _D(Ordinal.omega_power(e), n)
        for e2, c2 in d.terms:
            terms.append((natural_sum(rest, e2), c2 * c))
    return Ordinal(terms)


def delta(alpha: Ordinal, n: int) -> set[Ordinal]:
    if n < 1:
        raise ValueError("delta_n needs n >= 1")
    if alpha.is_zero():
        raise ValueError("delta_n is undefined at 0")
    out = set()
    for e, _ in alpha.terms:
        out.add(natural_sum(_D(e, n), _omega_term_minus(alpha, e)))
    return out


def m_bound(alpha: Ordinal, g: ControlFunction, n: int, budget: int = 10**6) -> int:
    """M_{alpha,g}(n) by memoised recursion; budget counts evaluated nodes."""
    if n < 1:
        raise ValueError("M needs n >= 1")
    memo: dict[tuple[Ordinal, int], int] = {}
    count = [0]

    def M(a: Ordinal, x: int) -> int:
        key = (a, x)
        if key in memo:
            return memo[key]
        count[0] += 1
        if count[0] > budget:
            raise BudgetExhausted(count[0] - 1, "m_bound")
        if a.is_zero():
            val = 0
        else:
            nx = g(x)
            val = max(1 + M(b, nx) for b in delta(a, x))
        memo[key] = val
        return val

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        return M(alpha, n)
    except RecursionError:
        raise BudgetExhausted(count[0], "m_bound") from None
    finally:
        sys.setrecursionlimit(old)


# ---------------------------------------------------------------------------
# Controlled bad sequences


_SLICES: dict[tuple[NmExpr, int], tuple[NmElem, ...]] = {}


def slice_elements(a: NmExpr, bound: int) -> tuple[NmElem, ...]:
    """All elements of norm at most ``bound``."""
    key = (a, bound)
    if key in _SLICES:
        return _SLICES[key]
    if isinstance(a, Gamma0):
        out: tuple = ()
    elif isinstance(a, Sum):
        out = tuple(Tagged("L", x) for x in slice_elements(a.left, bound)) + \
            tuple(Tagged("R", x) for x in slice_elements(a.right, bound))
    else:
        items = [(x, max(_norm(x), 1)) for x in slice_elements(a.inner, bound)]
        bags = []

        def grow(start: int, budget: int, acc: list):
            bags.append(Bag(acc))
            for i in range(start, len(items)):
                x, w = items[i]
                if w <= budget:
                    acc.append(x)
                    grow(i, budget - w, acc)
                    acc.pop()

        grow(0, bound, [])
        out = tuple(bags)
    _SLICES[key] = out
    return out


@dataclass(frozen=True)
class BadSequenceQuery:
    expr: NmExpr
    control: ControlFunction
    n: int
    cap: int = 40

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("cap must be at least 1")


@dataclass
class BadSequenceResult:
    length: int
    witness: list[NmElem]
    cap_hit: bool = False


def max_bad_sequence(q: BadSequenceQuery) -> BadSequenceResult:
    """Longest (g, n)-controlled bad sequence, by exhaustive depth-first search."""
    best: list[NmElem] = []
    seq: list[NmElem] = []
    hit = [False]
    bounds = [q.n]

    def bound(i: int) -> int:
        while len(bounds) <= i:
            bounds.append(q.control(bounds[-1]))
        return bounds[i]

    def dfs():
        nonlocal best
        if len(seq) > len(best):
            best = list(seq)
        if len(seq) >= q.cap:
            hit[0] = True
            return
        for cand in slice_elements(q.expr, bound(len(seq))):
            if any(_leq(prev, cand) for prev in seq):
                continue
            seq.append(cand)
            dfs()
            seq.pop()
            if hit[0]:
                return

    dfs()
    return BadSequenceResult(len(best), best, hit[0])


# ---------------------------------------------------------------------------
# Trees as nested multisets


def tree_space_expr(k: int, q: int) -> NmExpr:
    """M_0 where M_k = Gamma_q and M_{i-1} = M[M_i] * q."""
    e = gamma(q)
    for _ in range(k):
        e = times(Multi(e), q)
    return e


def tree_to_element(c: Tree, k: int, states: Sequence[str]) -> NmElem:
    """h_0: a node selects its label's copy, its children become the bag."""
    index = {s: i for i, s in enumerate(states)}
    q = len(states)
    if c.height > k:
        raise ShapeError(f"tree height {c.height} exceeds k={k}")

    def h(node: Tree) -> NmElem:
        if node.label not in index:
            raise ShapeError(f"label {node.label!r} not among the states")
        return inject(q, index[node.label], Bag([h(ch) for ch in node.children]))

    return h(c)


# ---------------------------------------------------------------------------
# Text forms


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


def parse_expr(text: str) -> NmExpr:
    """Parse ``G0``, ``(E + E)``, ``M[E]``, ``Gn`` and postfix ``E*n``."""
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def atom() -> NmExpr:
        nonlocal pos
        skip()
        m = re.compile(r"G(\d+)").match(text, pos)
        if m:
            pos = m.end()
            return gamma(int(m.group(1))) if int(m.group(1)) else G0
        if text.startswith("M[", pos):
            pos += 2
            inner = expr()
            skip()
            if not text.startswith("]", pos):
                raise ExprSyntaxError("expected ']'", pos)
            pos += 1
            return Multi(inner)
        if text.startswith("(", pos):
            pos += 1
            left = expr()
            skip()
            while text.startswith("+", pos):
                pos += 1
                left = Sum(left, expr())
                skip()
            if not text.startswith(")", pos):
                raise ExprSyntaxError("expected ')'", pos)
            pos += 1
            return left
        raise ExprSyntaxError("expected G<n>, M[...] or (...)", pos)

    def expr() -> NmExpr:
        nonlocal pos
        e = atom()
        skip()
        while text.startswith("*", pos):
            pos += 1
            skip()
            m = re.compile(r"\d+").match(text, pos)
            if not m:
                raise ExprSyntaxError("expected a count after '*'", pos)
            pos = m.end()
            count = int(m.group(0))
            e = times(e, count)
            skip()
        return e

    e = expr()
    skip()
    while text.startswith("+", pos):
        pos += 1
        e = Sum(e, expr())
        skip()
    if pos != len(text):
        raise ExprSyntaxError("trailing input", pos)
    return e


def render_expr(a: NmExpr) -> str:
    return str(a)


def render_elem(e: NmElem) -> str:
    return e.key


def parse_elem(text: str) -> NmElem:
    pos = 0

    def elem() -> NmElem:
        nonlocal pos
        if text.startswith(("L:", "R:"), pos):
            side = text[pos]
            pos += 2
            return Tagged(side, elem())
        if text.startswith("{", pos):
            pos += 1
            items = []
            if not text.startswith("}", pos):
                items.append(elem())
                while text.startswith(",", pos):
                    pos += 1
                    items.append(elem())
            if not text.startswith("}", pos):
                raise ExprSyntaxError("expected '}'", pos)
            pos += 1
            return Bag(items)
        raise ExprSyntaxError("expected element", pos)

    text = text.replace(" ", "")
    e = elem()
    if pos != len(text):
        raise ExprSyntaxError("trailing input", pos)
    return e
