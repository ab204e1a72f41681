"""Coverability for k-NRCS.

The main procedure is the classic backward search over upward-closed sets
represented by finite antichains (bases).  Predecessor bases are computed
per transition by inverting the possible overlaps between the transition's
target path and the configuration to be covered.  A brute-force oracle and
a bounded breadth-first explorer are provided as independent checks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from collections.abc import Iterable, Sequence

from .nrcs import (Anchor, Nrcs, Reset, Transition, Tree, Update,
                   _rebuild, chain, leq_induced, match_anchors, successors)


def minimize(configs: Iterable[Tree]) -> list[Tree]:
    """The <=_is-minimal elements, as a sorted antichain."""
    kept: list[Tree] = []
    for c in sorted(set(configs), key=lambda t: (t.size, t.key)):
        if not any(leq_induced(b, c) for b in kept):
            kept.append(c)
    return sorted(kept, key=lambda t: t.key)


def covers(basis: Sequence[Tree], c: Tree) -> bool:
    return any(leq_induced(b, c) for b in basis)


def same_upward_closure(a: Sequence[Tree], b: Sequence[Tree]) -> bool:
    """Mutual domination of two bases."""
    return all(covers(b, x) for x in a) and all(covers(a, y) for y in b)


# ---------------------------------------------------------------------------
# Predecessor bases


def _append_chain(labels: Sequence[str]):
    def grow(node: Tree) -> Tree:
        if not labels:
            return node
        return Tree(node.label, node.children + (chain(list(labels)),))
    return grow


def pre_transition(t: Transition, c: Tree) -> list[Tree]:
    """Minimal predecessors of the upward closure of c under one transition."""
    src, dst = t.src, t.dst
    top_i = len(src) - 1
    top_j = len(dst) - 1
    out = []
    for m in range(1, len(dst) + 1):
        for anchor in match_anchors(c, dst[:m]):
            matched = m - 1  # deepest matched post-path position
            if isinstance(t, Update) and top_j >= top_i and matched > top_i:
                # C-nodes sitting on created nodes must mirror the created chain
                node = c.node_at(anchor[:top_i + 1])
                ok = True
                for p in range(top_i + 1, matched + 1):
                    want = 1 if p < matched else 0
                    if len(node.children) != want:
                        ok = False
                        break
                    if want:
                        node = node.children[anchor[p]]
                if not ok:
                    continue
                out.append(_rebuild(c, anchor[:top_i + 1], 0, src, lambda n: None))
                continue
            if not isinstance(t, Update) and matched == top_i:
                labs = {t.reset_label} if isinstance(t, Reset) else t.reset_labels
                if any(ch.label in labs for ch in c.node_at(anchor).children):
                    continue
            out.append(_rebuild(c, anchor, 0, src[:m], _append_chain(src[m:])))
    return out


def pre_basis(nrcs: Nrcs, c: Tree) -> list[Tree]:
    """A basis of pre(up(c)); every element has at most |c|+k+1 nodes."""
    found = []
    for t in nrcs.transitions:
        found.extend(pre_transition(t, c))
    return minimize(found)


class OracleGuardError(RuntimeError):
    pass


def enumerate_trees(labels: Sequence[str], max_size: int, max_height: int,
                    guard: int | None = None) -> list[Tree]:
    """All canonical trees with at most max_size nodes and height <= max_height."""
    labels = sorted(labels)
    by_h: dict[int, list[Tree]] = {}

    def trees(h: int) -> list[Tree]:
        # trees of height <= h and size <= max_size
        if h in by_h:
            return by_h[h]
        if h == 0:
            res = [Tree(l) for l in labels]
        else:
            subs = sorted(trees(h - 1), key=lambda t: t.key)
            forests: list[tuple[Tree, ...]] = []

            def grow(start: int, room: int, acc: list):
                forests.append(tuple(acc))
                if guard is not None and len(forests) * len(labels) > guard:
                    raise OracleGuardError("candidate count exceeds the oracle guard")
                for i in range(start, len(subs)):
                    s = subs[i]
                    if s.size <= room:
                        acc.append(s)
                        grow(i, room - s.size, acc)
                        acc.pop()

            grow(0, max_size - 1, [])
            res = [Tree(l, f) for l in labels for f in forests]
        by_h[h] = res
        return res

    return trees(max_height)


def pre_basis_oracle(nrcs: Nrcs, c: Tree, guard: int = 300_000) -> list[Tree]:
    """Brute force: every config of size <= |c|+k+1 that steps into up(c)."""
    limit = c.size + nrcs.k + 1
    cands = enumerate_trees(nrcs.states, limit, nrcs.k, guard)
    good = [x for x in cands if any(leq_induced(c, s.result) for s in successors(nrcs, x))]
    return minimize(good)


# ---------------------------------------------------------------------------
# Backward search


class IterationCapExceeded(RuntimeError):
    pass


@dataclass
class CoverabilityVerdict:
    decision: str  # "coverable" | "not-coverable"
    iterations: int
    run: list[tuple[int, Anchor]] = field(default_factory=list)
    basis: list[Tree] = field(default_factory=list)
    basis_sizes: list[int] = field(default_factory=list)

    @property
    def coverable(self) -> bool:
        return self.decision == "coverable"


def backward_coverability(nrcs: Nrcs, init: Tree, target: Tree,
                          iteration_cap: int = 10_000) -> CoverabilityVerdict:
    if leq_induced(target, init):
        return CoverabilityVerdict("coverable", 0, [], [target], [1])
    basis = [target]
    history: list[tuple[Tree, int]] = [(target, 0)]
    sizes = [1]
    frontier = [target]
    it = 0
    while frontier:
        it += 1
        if it > iteration_cap:
            raise IterationCapExceeded(f"no fixpoint after {iteration_cap} iterations")
        new: list[Tree] = []
        for b in frontier:
            for x in pre_basis(nrcs, b):
                if covers(basis, x) or covers(new, x):
                    continue
                basis = [u for u in basis if not leq_induced(x, u)]
                new = [u for u in new if not leq_induced(x, u)]
                new.append(x)
        basis.extend(new)
        history.extend((x, it) for x in new)
        sizes.append(len(basis))
        if covers(new, init):
            run = _reconstruct(nrcs, init, history)
            return CoverabilityVerdict("coverable", it, run, sorted(basis, key=lambda t: t.key), sizes)
        frontier = new
    return CoverabilityVerdict("not-coverable", it, [], sorted(basis, key=lambda t: t.key), sizes)


def _rank(history: Sequence[tuple[Tree, int]], c: Tree) -> int | None:
    best = None
    for b, layer in history:
        if (best is None or layer < best) and leq_induced(b, c):
            best = layer
    return best


def _reconstruct(nrcs: Nrcs, init: Tree, history) -> list[tuple[int, Anchor]]:
    run = []
    cur = init
    r = _rank(history, cur)
    while r:
        options = []
        for s in successors(nrcs, cur):
            rs = _rank(history, s.result)
            if rs is not None and rs < r:
                options.append((rs, s.result.key, s))
        if not options:
            raise RuntimeError("witness reconstruction got stuck; basis is inconsistent")
        rs, _, step = min(options, key=lambda o: (o[0], o[1]))
        run.append((step.index, step.anchor))
        cur, r = step.result, rs
    return run


# ---------------------------------------------------------------------------
# Forward exploration


@dataclass
class ForwardResult:
    status: str  # "found" | "exhausted" | "cutoff"
    run: list[tuple[int, Anchor]] = field(default_factory=list)
    explored: int = 0
    pruned: bool = False

    @property
    def decisive(self) -> bool:
        """found, or exhausted without any pruning (a genuine negative)."""
        return self.status == "found" or (self.status == "exhausted" and not self.pruned)


def forward_explore(nrcs: Nrcs, init: Tree, target: Tree, max_nodes: int = 8,
                    max_frontier: int = 100_000) -> ForwardResult:
    if max_nodes < 1 or max_frontier < 1:
        raise ValueError("bounds must be positive")
    if leq_induced(target, init):
        return ForwardResult("found", [], 1)
    parent: dict[Tree, tuple[Tree | None, tuple[int, Anchor] | None]] = {init: (None, None)}
    queue = deque([init])
    pruned = False
    while queue:
        cur = queue.popleft()
        for s in successors(nrcs, cur):
            d = s.result
            if d.size > max_nodes:
                pruned = True
                continue
            if d in parent:
                continue
            parent[d] = (cur, (s.index, s.anchor))
            if leq_induced(target, d):
                run = []
                node = d
                while parent[node][0] is not None:
                    prev, step = parent[node]
                    run.append(step)
                    node = prev
                return ForwardResult("found", run[::-1], len(parent), pruned)
            if len(parent) > max_frontier:
                return ForwardResult("cutoff", [], len(parent), pruned)
            queue.append(d)
    return ForwardResult("exhausted", [], len(parent), pruned)


def check_certificate(nrcs: Nrcs, init: Tree, target: Tree,
                      run: Sequence[tuple[int, Anchor]]) -> bool:
    """Replay a run and test that its last configuration covers the target."""
    from .nrcs import StepError, apply_at
    cur = init
    try:
        for idx, anchor in run:
            cur = apply_at(nrcs, cur, nrcs.transitions[idx], anchor)
    except (StepError, IndexError):
        return False
    return leq_induced(target, cur)
