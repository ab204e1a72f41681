"""Ordinals below epsilon_0 in strict Cantor normal form.

An ordinal is stored as a tuple of ``(exponent, coefficient)`` pairs with
strictly decreasing exponents.  Exponents are themselves ordinals, so the
representation is a finite tree.  Values are immutable and hashable, and
structural equality is ordinal equality.

The module also provides the Hardy, Cichon and fast-growing hierarchies as
budgeted interpreters.  Their values explode quickly, so every evaluator
takes a step budget and raises :class:`BudgetExhausted` when it runs out.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from collections.abc import Callable, Iterable, Iterator


class BudgetExhausted(Exception):
    """Raised when an evaluator runs out of its step budget."""

    def __init__(self, steps: int, what: str = "evaluation"):
        super().__init__(f"{what} exceeded budget after {steps} steps")
        self.steps = steps


class Ordinal:
    """An ordinal below epsilon_0, in strict CNF."""

    __slots__ = ("_hash", "terms")

    def __init__(self, terms: Iterable[tuple[Ordinal, int]] = ()):
        # Accepts any multiset of terms and normalises by natural sum.
        merged: dict[Ordinal, int] = {}
        for exp, coeff in terms:
            if not isinstance(exp, Ordinal):
                raise TypeError(f"exponent must be an Ordinal, got {exp!r}")
            if not isinstance(coeff, int) or coeff < 0:
                raise ValueError(f"coefficient must be a natural, got {coeff!r}")
            if coeff:
                merged[exp] = merged.get(exp, 0) + coeff
        ordered = sorted(merged.items(), key=lambda kv: _SortKey(kv[0]), reverse=True)
        object.__setattr__(self, "terms", tuple(ordered))
        object.__setattr__(self, "_hash", hash(self.terms))

    @classmethod
    def _raw(cls, terms: tuple) -> Ordinal:
        # Caller guarantees strict CNF already.
        obj = cls.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "_hash", hash(terms))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Ordinal is immutable")

    # -- basic constructors -------------------------------------------------

    @staticmethod
    def nat(n: int) -> Ordinal:
        if n < 0:
            raise ValueError("naturals are non-negative")
        return ZERO if n == 0 else Ordinal._raw(((ZERO, n),))

    @staticmethod
    def omega_power(exponent: Ordinal | int, coeff: int = 1) -> Ordinal:
        exp = _coerce(exponent)
        if coeff == 0:
            return ZERO
        return Ordinal._raw(((exp, coeff),))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero()

    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero()

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero())

    def finite_value(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def is_omega_power(self) -> bool:
        """True for ordinals of the shape w^b with coefficient 1."""
        return len(self.terms) == 1 and self.terms[0][1] == 1

    # -- ordering -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return compare(self, _coerce(other)) < 0

    def __le__(self, other):
        return compare(self, _coerce(other)) <= 0

    def __gt__(self, other):
        return compare(self, _coerce(other)) > 0

    def __ge__(self, other):
        return compare(self, _coerce(other)) >= 0

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        """Ordinary (non-commutative) ordinal addition."""
        other = _coerce(other)
        if other.is_zero():
            return self
        lead = other.terms[0][0]
        kept = [t for t in self.terms if compare(t[0], lead) >= 0]
        if kept and kept[-1][0] == lead:
            exp, c = kept.pop()
            return Ordinal._raw(tuple(kept) + ((exp, c + other.terms[0][1]),) + other.terms[1:])
        return Ordinal._raw(tuple(kept) + other.terms)

    def __radd__(self, other):
        return _coerce(other) + self

    def __repr__(self):
        return f"Ordinal({render_ordinal(self)!r})"

    def __str__(self):
        return render_ordinal(self)


class _SortKey:
    """Wrapper so that ``sorted`` can use the ordinal order."""

    __slots__ = ("o",)

    def __init__(self, o: Ordinal):
        self.o = o

    def __lt__(self, other):
        return compare(self.o, other.o) < 0


ZERO = Ordinal._raw(())
ONE = Ordinal._raw(((ZERO, 1),))
OMEGA = Ordinal._raw(((ONE, 1),))


def _coerce(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        return Ordinal.nat(x)
    raise TypeError(f"cannot interpret {x!r} as an ordinal")


def compare(a: Ordinal, b: Ordinal) -> int:
    """Return -1, 0 or 1 as a is less than, equal to or greater than b."""
    if a is b:
        return 0
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


def natural_sum(*ordinals: Ordinal) -> Ordinal:
    """Hessenberg natural sum: merge the exponent multisets."""
    return Ordinal(itertools.chain.from_iterable(_coerce(o).terms for o in ordinals))


def natural_scale(a: Ordinal, c: int) -> Ordinal:
    """The natural sum of c copies of a."""
    if c < 0:
        raise ValueError("scale factor must be a natural")
    if c == 0:
        return ZERO
    return Ordinal._raw(tuple((e, k * c) for e, k in a.terms))


def predecessor(a: Ordinal) -> Ordinal:
    """alpha - 1 for a successor alpha."""
    if not a.is_successor():
        raise ValueError(f"{a} is not a successor")
    *head, (exp, c) = a.terms
    tail = ((exp, c - 1),) if c > 1 else ()
    return Ordinal._raw(tuple(head) + tail)


def fundamental_sequence(lam: Ordinal, x: int) -> Ordinal:
    """lam_x for the fixed assignment of fundamental sequences.

    (g + w^(b+1))_x = g + w^b * x and (g + w^l)_x = g + w^(l_x).
    """
    if not lam.is_limit():
        raise ValueError(f"{lam} is not a limit ordinal")
    if x < 0:
        raise ValueError("index must be a natural")
    *head, (exp, c) = lam.terms
    head = tuple(head)
    if c > 1:
        head = head + ((exp, c - 1),)
    if exp.is_successor():
        last = ((predecessor(exp), x),) if x > 0 else ()
    else:
        last = ((fundamental_sequence(exp, x), 1),)
    return Ordinal._raw(head + last)


def predecessor_P(alpha: Ordinal, n: int) -> Ordinal:
    """P_n(alpha): descend through fundamental sequences at n until a successor, then strip 1."""
    if alpha.is_zero():
        raise ValueError("P_n is undefined at 0")
    while not alpha.is_successor():
        if alpha.is_zero():
            raise ValueError("descent reached 0 before a successor")
        alpha = fundamental_sequence(alpha, n)
    return predecessor(alpha)


def omega_tower(k: int) -> Ordinal:
    """Omega_k: Omega_1 = w, Omega_{k+1} = w^Omega_k."""
    if k < 1:
        raise ValueError("omega_tower needs k >= 1")
    o = OMEGA
    for _ in range(k - 1):
        o = Ordinal.omega_power(o)
    return o


def tower_layer(a: Ordinal) -> int:
    """0 for finite a, otherwise the k with Omega_k <= a < Omega_{k+1}."""
    if a.is_finite():
        return 0
    k = 1
    while not a < omega_tower(k + 1):
        k += 1
    return k


def is_lean(a: Ordinal, ell: int) -> bool:
    return all(c <= ell and is_lean(e, ell) for e, c in a.terms)


def cnf_size(a: Ordinal) -> int:
    """Number of CNF terms, counted recursively through exponents."""
    return sum(1 + cnf_size(e) for e, _ in a.terms)


def max_coefficient(a: Ordinal) -> int:
    return max((max(c, max_coefficient(e)) for e, c in a.terms), default=0)


# ---------------------------------------------------------------------------
# Control functions and hierarchies


@dataclass(frozen=True)
class ControlFunction:
    """A strictly increasing map on naturals with declared properties.

    The declared properties are checked on a sample at construction time.
    """

    fn: Callable[[int], int] = field(compare=False)
    name: str
    inflationary: bool = True
    superadditive: bool = True
    samples: int = 48

    def __post_init__(self):
        f = self.fn
        vals = [f(x) for x in range(self.samples)]
        for x in range(1, self.samples):
            if vals[x] <= vals[x - 1]:
                raise ValueError(f"{self.name} is not strictly increasing at {x}")
        if self.inflationary and any(vals[x] < x for x in range(self.samples)):
            raise ValueError(f"{self.name} is not inflationary")
        if self.superadditive:
            half = self.samples // 2
            for x in range(half):
                for y in range(half):
                    if vals[x + y] < vals[x] + vals[y]:
                        raise ValueError(f"{self.name} is not superadditive at ({x}, {y})")

    def __call__(self, x: int) -> int:
        return self.fn(x)

    def iterate(self, x: int, times: int) -> int:
        for _ in range(times):
            x = self.fn(x)
        return x

    def __str__(self):
        return self.name


SUCC = ControlFunction(lambda x: x + 1, "succ", superadditive=False)
DOUBLE = ControlFunction(lambda x: 2 * x, "2x")


def times_self(g: ControlFunction) -> ControlFunction:
    """h(x) = x * g(x), the function driving the upper bound."""
    return ControlFunction(lambda x: x * g(x), f"x*({g.name})", inflationary=False,
                           superadditive=False)


def parse_control(text: str) -> ControlFunction:
    """Accept 'succ', 'x+1', '2x', 'Cx' or 'x*g' style names."""
    t = text.replace(" ", "")
    if t in ("succ", "x+1"):
        return SUCC
    m = re.fullmatch(r"(\d+)\*?x", t)
    if m and int(m.group(1)) >= 2:
        c = int(m.group(1))
        return DOUBLE if c == 2 else ControlFunction(lambda x, c=c: c * x, f"{c}x")
    if t.startswith("x*(") and t.endswith(")"):
        return times_self(parse_control(t[3:-1]))
    raise ValueError(f"unknown control function {text!r}")


def hardy_eval(h: ControlFunction, alpha: Ordinal, x: int, budget: int = 10**6) -> int:
    """h^alpha(x), counting one step per rewrite."""
    steps = 0
    while not alpha.is_zero():
        steps += 1
        if steps > budget:
            raise BudgetExhausted(steps - 1, "hardy")
        if alpha.is_successor():
            alpha = predecessor(alpha)
            x = h(x)
        else:
            alpha = fundamental_sequence(alpha, x)
    return x


def cichon_eval(h: ControlFunction, alpha: Ordinal, x: int, budget: int = 10**6) -> int:
    """h_alpha(x): the length of the Hardy descent from (alpha, x)."""
    steps = 0
    acc = 0
    while not alpha.is_zero():
        steps += 1
        if steps > budget:
            raise BudgetExhausted(steps - 1, "cichon")
        if alpha.is_successor():
            alpha = predecessor(alpha)
            x = h(x)
            acc += 1
        else:
            alpha = fundamental_sequence(alpha, x)
    return acc


def fast_growing_eval(h: ControlFunction, alpha: Ordinal, x: int, budget: int = 10**6) -> int:
    """f_{h,alpha}(x); the budget bounds the number of applications of h."""
    used = [0]

    def f(a: Ordinal, y: int) -> int:
        while a.is_limit():
            a = fundamental_sequence(a, y)
        if a.is_zero():
            used[0] += 1
            if used[0] > budget:
                raise BudgetExhausted(used[0] - 1, "fast-growing")
            return h(y)
        prev = predecessor(a)
        for _ in range(y):
            y = f(prev, y)
        return y

    try:
        return f(alpha, x)
    except RecursionError:
        raise BudgetExhausted(used[0], "fast-growing") from None


# ---------------------------------------------------------------------------
# Text form


class OrdinalSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|(w|ω)|(\^)|(\*)|(\+)|(\()|(\)))")


class _OrdinalParser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise OrdinalSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                         len(text) - len(text[pos:].lstrip()))
            kinds = ("nat", "w", "^", "*", "+", "(", ")")
            for kind, g in zip(kinds, m.groups()):
                if g is not None:
                    self.toks.append((kind, g, m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)

    def take(self, kind):
        if self.peek() != kind:
            found = self.peek() or "end of input"
            raise OrdinalSyntaxError(f"expected {kind!r}, found {found!r}", self.pos())
        tok = self.toks[self.i]
        self.i += 1
        return tok[1]

    def ordinal(self) -> Ordinal:
        parts = [self.term()]
        while self.peek() == "+":
            self.take("+")
            parts.append(self.term())
        return natural_sum(*parts)

    def term(self) -> Ordinal:
        if self.peek() == "nat":
            return Ordinal.nat(int(self.take("nat")))
        self.take("w")
        exp = ONE
        if self.peek() == "^":
            self.take("^")
            exp = self.base()
        coeff = 1
        if self.peek() == "*":
            self.take("*")
            coeff = int(self.take("nat"))
        return Ordinal.omega_power(exp, coeff)

    def base(self) -> Ordinal:
        k = self.peek()
        if k == "nat":
            return Ordinal.nat(int(self.take("nat")))
        if k == "w":
            self.take("w")
            return OMEGA
        if k == "(":
            self.take("(")
            o = self.ordinal()
            self.take(")")
            return o
        raise OrdinalSyntaxError("expected exponent", self.pos())


def parse_ordinal(text: str) -> Ordinal:
    p = _OrdinalParser(text)
    if not p.toks:
        raise OrdinalSyntaxError("empty ordinal", 0)
    o = p.ordinal()
    if p.peek() is not None:
        raise OrdinalSyntaxError(f"trailing input {p.toks[p.i][1]!r}", p.pos())
    return o


def render_ordinal(a: Ordinal, top: bool = True) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for exp, c in a.terms:
        if exp.is_zero():
            parts.append(str(c))
            continue
        if exp == ONE:
            s = "w"
        elif exp.is_finite() or exp == OMEGA:
            s = "w^" + render_ordinal(exp, False)
        else:
            s = "w^(" + render_ordinal(exp, False) + ")"
        if c > 1:
            s += f"*{c}"
        parts.append(s)
    return (" + " if top else "+").join(parts)


def as_ordinal(x) -> Ordinal:
    """Accept an Ordinal, an int, or ordinal text."""
    if isinstance(x, str):
        return parse_ordinal(x)
    return _coerce(x)


# ---------------------------------------------------------------------------
# Enumeration helpers used by tests and sweeps


def iter_ordinals(max_size: int, max_coeff: int, below: Ordinal | None = None) -> Iterator[Ordinal]:
    """All ordinals with cnf_size <= max_size and coefficients <= max_coeff.

    If ``below`` is given only ordinals strictly below it are produced.
    """
    seen = set()
    for o in _gen(max_size, max_coeff):
        if o in seen:
            continue
        seen.add(o)
        if below is None or o < below:
            yield o


def _gen(size: int, max_coeff: int) -> list[Ordinal]:
    # Ordinals whose cnf_size is at most `size`.
    return _gen_cached(size, max_coeff)


_GEN_CACHE: dict[tuple[int, int], list[Ordinal]] = {}


def _gen_cached(size: int, max_coeff: int) -> list[Ordinal]:
    key = (size, max_coeff)
    if key in _GEN_CACHE:
        return _GEN_CACHE[key]
    out = [ZERO]
    if size > 0:
        # choose a leading term, then recurse on the strictly smaller tail
        exps = _gen_cached(size - 1, max_coeff)
        for exp in exps:
            used = 1 + cnf_size(exp)
            for c in range(1, max_coeff + 1):
                for tail in _gen_cached(size - used, max_coeff):
                    if tail.is_zero() or tail.terms[0][0] < exp:
                        out.append(Ordinal._raw(((exp, c),) + tail.terms))
    uniq = list(dict.fromkeys(out))
    _GEN_CACHE[key] = uniq
    return uniq
