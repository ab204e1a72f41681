"""Trees encoding ordinals, Hardy configurations and the Hardy rewrite system.

T_alpha has a root labelled ``w`` whose children encode the CNF terms of
alpha; a node for the term w^beta has children encoding the terms of beta.
Nodes at level k carry their exponent j <= ell in the label as ``w@wj``.
C_{alpha,n} is T_alpha with n extra children labelled ``#``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nrcs import Tree, make_label, split_label
from .ordinal import (ZERO, Ordinal, fundamental_sequence, hardy_eval, natural_sum,
                      omega_tower, predecessor, SUCC)

OMEGA_LABEL = "w"
BUDGET_LABEL = "#"


@dataclass(frozen=True)
class EncodingParams:
    k: int
    ell: int

    def __post_init__(self):
        if self.k < 1 or self.ell < 1:
            raise ValueError("k and ell must both be at least 1")

    @property
    def bound(self) -> Ordinal:
        """(Omega_{k+1})_ell, the largest encodable ordinal."""
        return fundamental_sequence(omega_tower(self.k + 1), self.ell)


class EncodingError(ValueError):
    pass


def _encode_terms(beta: Ordinal, depth: int, p: EncodingParams) -> list[Tree]:
    out = []
    for exp, c in beta.terms:
        if depth == p.k:
            if not exp.is_finite() or exp.finite_value() > p.ell:
                raise EncodingError(f"exponent {exp} does not fit at level {p.k}")
            node = Tree(make_label(OMEGA_LABEL, exp.finite_value()))
        else:
            node = Tree(OMEGA_LABEL, _encode_terms(exp, depth + 1, p))
        out += [node] * c
    return out


def encode_tree(alpha: Ordinal, p: EncodingParams) -> Tree:
    if alpha.is_zero():
        raise EncodingError("T_0 is the empty tree; use make_hardy_config for C_{0,n}")
    if alpha > p.bound:
        raise EncodingError(f"{alpha} exceeds {p.bound}")
    return Tree(OMEGA_LABEL, _encode_terms(alpha, 1, p))


def is_budget(label: str) -> bool:
    return split_label(label)[0].startswith(BUDGET_LABEL)


def _value(node: Tree, depth: int, p: EncodingParams) -> Ordinal:
    # exponent beta of the term w^beta represented by node
    if depth == p.k:
        _, ann = split_label(node.label)
        if ann is None:
            raise EncodingError(f"level-{p.k} node {node.label!r} lacks an annotation")
        if node.children:
            raise EncodingError("level-k nodes must be leaves")
        return Ordinal.nat(ann)
    return natural_sum(*(Ordinal.omega_power(_value(ch, depth + 1, p)) for ch in node.children))


def decode_tree(t: Tree, p: EncodingParams) -> Ordinal:
    """The ordinal of an encoder; labels other than level-k annotations are ignored,
    and root children that carry the budget label are skipped."""
    kids = [ch for ch in t.children if not is_budget(ch.label)]
    return natural_sum(*(Ordinal.omega_power(_value(ch, 1, p)) for ch in kids))


def subtree_exponent(node: Tree, depth: int, p: EncodingParams) -> Ordinal:
    """Exponent beta of the term w^beta encoded by a node at the given depth."""
    return _value(node, depth, p)


def make_hardy_config(alpha: Ordinal, n: int, p: EncodingParams) -> Tree:
    if alpha > p.bound:
        raise EncodingError(f"{alpha} exceeds {p.bound}")
    terms = _encode_terms(alpha, 1, p) if not alpha.is_zero() else []
    return Tree(OMEGA_LABEL, terms + [Tree(BUDGET_LABEL)] * n)


def decode_hardy_config(t: Tree, p: EncodingParams) -> tuple[Ordinal, int]:
    n = sum(1 for ch in t.children if ch.label == BUDGET_LABEL)
    return decode_tree(t, p), n


@dataclass(frozen=True)
class HardyState:
    alpha: Ordinal
    n: int

    def __str__(self):
        return f"({self.alpha}, {self.n})"


def hardy_rewrite(s: HardyState) -> HardyState:
    """(a+1, n) -> (a, n+1) and (l, n) -> (l_n, n)."""
    if s.alpha.is_zero():
        raise ValueError("(0, n) has no rewrite step")
    if s.alpha.is_successor():
        return HardyState(predecessor(s.alpha), s.n + 1)
    return HardyState(fundamental_sequence(s.alpha, s.n), s.n)


def hardy_fold(s: HardyState, max_steps: int = 10**6) -> list[HardyState]:
    """The full rewrite sequence from s down to (0, m)."""
    out = [s]
    while not s.alpha.is_zero():
        if len(out) > max_steps:
            raise RuntimeError("rewrite sequence longer than max_steps")
        s = hardy_rewrite(s)
        out.append(s)
    return out


def hardy_value(alpha: Ordinal, n: int, budget: int = 10**6) -> int:
    return hardy_eval(SUCC, alpha, n, budget)


def encodable_ordinals(p: EncodingParams, max_nodes: int) -> list[Ordinal]:
    """Every alpha with 0 < alpha <= bound whose T_alpha has at most max_nodes nodes."""
    cache: dict[tuple[int, int], list[tuple[Ordinal, int]]] = {}

    def forests(depth: int, budget: int) -> list[tuple[Ordinal, int]]:
        # ordinals given by multisets of term nodes at this depth, with node cost
        key = (depth, budget)
        if key in cache:
            return cache[key]
        if depth == p.k:
            kinds = [(Ordinal.nat(j), 1) for j in range(p.ell + 1)]
        else:
            kinds = [(e, 1 + cost) for e, cost in forests(depth + 1, budget - 1)]
        kinds = [kd for kd in kinds if kd[1] <= budget]
        res: dict[Ordinal, int] = {}

        def grow(start: int, room: int, exps: list):
            val = natural_sum(*(Ordinal.omega_power(e) for e in exps)) if exps else ZERO
            used = budget - room
            if val not in res or res[val] > used:
                res[val] = used
            for i in range(start, len(kinds)):
                e, cost = kinds[i]
                if cost <= room:
                    exps.append(e)
                    grow(i, room - cost, exps)
                    exps.pop()

        grow(0, budget, [])
        out = sorted(res.items(), key=lambda kv: kv[1])
        cache[key] = out
        return out

    bound = p.bound
    vals = [a for a, _ in forests(1, max_nodes - 1) if not a.is_zero() and a <= bound]
    return sorted(set(vals), key=lambda a: (encode_tree(a, p).size, str(a)))
