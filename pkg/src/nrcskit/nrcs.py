"""Nested reset counter systems.

Configurations are finite rooted unordered labelled trees.  A :class:`Tree`
keeps its children sorted by their canonical text, so two isomorphic trees
have the same key and compare equal.  Anchors are tuples of child indices
into that canonical order, which makes runs replayable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from collections.abc import Callable, Iterable, Iterator, Sequence

Label = str
Anchor = tuple[int, ...]

_ANN = re.compile(r"^(.*)@w(\d+)$")


def split_label(label: Label) -> tuple[str, int | None]:
    """'name@w3' -> ('name', 3); plain labels get None."""
    m = _ANN.match(label)
    if m:
        return m.group(1), int(m.group(2))
    return label, None


def make_label(base: str, annotation: int | None = None) -> Label:
    return base if annotation is None else f"{base}@w{annotation}"


class Tree:
    """Immutable canonical unordered tree."""

    __slots__ = ("_hash", "children", "height", "key", "label", "size")

    def __init__(self, label: Label, children: Iterable[Tree] = ()):
        ch = tuple(sorted(children, key=_key_of))
        self.label = label
        self.children = ch
        if ch:
            self.key = label + "(" + ",".join(c.key for c in ch) + ")"
            self.size = 1 + sum(c.size for c in ch)
            self.height = 1 + max(c.height for c in ch)
        else:
            self.key = label
            self.size = 1
            self.height = 0
        self._hash = hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Tree) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Tree({self.key!r})"

    def __str__(self):
        return self.key

    # -- navigation ----------------------------------------------------------

    def node_at(self, anchor: Anchor) -> Tree:
        node = self
        for i in anchor:
            node = node.children[i]
        return node

    def labels_along(self, anchor: Anchor) -> tuple[Label, ...]:
        out = [self.label]
        node = self
        for i in anchor:
            node = node.children[i]
            out.append(node.label)
        return tuple(out)

    def relabel(self, label: Label) -> Tree:
        return Tree(label, self.children)

    def with_children(self, children: Iterable[Tree]) -> Tree:
        return Tree(self.label, children)

    def labels(self) -> set[Label]:
        out = {self.label}
        for c in self.children:
            out |= c.labels()
        return out

    def iter_nodes(self, anchor: Anchor = ()) -> Iterator[tuple[Anchor, Tree]]:
        yield anchor, self
        for i, c in enumerate(self.children):
            yield from c.iter_nodes(anchor + (i,))


def _key_of(t: Tree) -> str:
    return t.key


Config = Tree


def leaf(label: Label) -> Tree:
    return Tree(label)


def chain(labels: Sequence[Label]) -> Tree:
    """A single path labelled top to bottom."""
    node = Tree(labels[-1])
    for lab in reversed(labels[:-1]):
        node = Tree(lab, (node,))
    return node


# ---------------------------------------------------------------------------
# Tree text


class TreeSyntaxError(ValueError):
    def __init__(self, msg: str, offset: int, line: int | None = None):
        where = f"line {line}, offset {offset}" if line is not None else f"offset {offset}"
        super().__init__(f"{msg} ({where})")
        self.offset = offset
        self.line = line


_LABEL_RE = re.compile(r"[^\s(),\[\]@]+(?:@w\d+)?")


def parse_tree(text: str, line: int | None = None) -> Tree:
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def node() -> Tree:
        nonlocal pos
        skip()
        m = _LABEL_RE.match(text, pos)
        if not m:
            raise TreeSyntaxError("expected a label", pos, line)
        label = m.group(0)
        pos = m.end()
        skip()
        kids = []
        if pos < n and text[pos] == "(":
            pos += 1
            kids.append(node())
            skip()
            while pos < n and text[pos] == ",":
                pos += 1
                kids.append(node())
                skip()
            if pos >= n or text[pos] != ")":
                raise TreeSyntaxError("expected ',' or ')'", pos, line)
            pos += 1
        return Tree(label, kids)

    t = node()
    skip()
    if pos != n:
        raise TreeSyntaxError(f"unexpected {text[pos]!r}", pos, line)
    return t


def render_tree(t: Tree) -> str:
    return t.key


# ---------------------------------------------------------------------------
# Ordering


@lru_cache(maxsize=1 << 18)
def leq_induced(c: Tree, d: Tree) -> bool:
    """C <=_is D: C is obtained from D by deleting whole subtrees."""
    if c.label != d.label or c.size > d.size or c.height > d.height:
        return False
    if not c.children:
        return True
    if len(c.children) > len(d.children):
        return False
    return _match(c.children, d.children, leq_induced) is not None


def _match(left: Sequence, right: Sequence, ok: Callable) -> list[int] | None:
    """Injective matching of every left item into right (Kuhn's algorithm)."""
    adj = [[j for j, r in enumerate(right) if ok(l, r)] for l in left]
    owner = [-1] * len(right)

    def augment(i, seen):
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    # hardest items first keeps the search shallow
    for i in sorted(range(len(left)), key=lambda i: len(adj[i])):
        if not adj[i] or not augment(i, set()):
            return None
    assign = [0] * len(left)
    for j, i in enumerate(owner):
        if i >= 0:
            assign[i] = j
    return assign


def embedding(c: Tree, d: Tree) -> dict[Anchor, Anchor] | None:
    """A witness map from anchors of C to anchors of D, or None."""
    if not leq_induced(c, d):
        return None
    out: dict[Anchor, Anchor] = {}

    def go(x: Tree, y: Tree, ax: Anchor, ay: Anchor):
        out[ax] = ay
        assign = _match(x.children, y.children, leq_induced)
        for i, j in enumerate(assign):
            go(x.children[i], y.children[j], ax + (i,), ay + (j,))

    go(c, d, (), ())
    return out


def sub_configs(t: Tree) -> set[Tree]:
    """Every C with C <=_is t."""
    options = []
    for child in t.children:
        options.append([None] + sorted(sub_configs(child)))
    out = set()
    for pick in itertools.product(*options):
        out.add(Tree(t.label, [p for p in pick if p is not None]))
    return out


# ---------------------------------------------------------------------------
# Transitions


@dataclass(frozen=True)
class Update:
    src: tuple[Label, ...]
    dst: tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(self.src))
        object.__setattr__(self, "dst", tuple(self.dst))
        if not self.src or not self.dst:
            raise ValueError("update paths must be non-empty")

    def labels(self) -> set[Label]:
        return set(self.src) | set(self.dst)

    def render(self) -> str:
        return f"update {','.join(self.src)} -> {','.join(self.dst)}"


@dataclass(frozen=True)
class Reset:
    src: tuple[Label, ...]
    reset_label: Label
    dst: tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(self.src))
        object.__setattr__(self, "dst", tuple(self.dst))
        if not self.src or len(self.src) != len(self.dst):
            raise ValueError("reset source and target paths must have equal non-zero length")

    def labels(self) -> set[Label]:
        return set(self.src) | set(self.dst) | {self.reset_label}

    def render(self) -> str:
        return f"reset {','.join(self.src)} [{self.reset_label}] -> {','.join(self.dst)}"


@dataclass(frozen=True)
class GeneralizedReset:
    """Reset every child of the last path node whose label lies in a set."""

    src: tuple[Label, ...]
    reset_labels: frozenset[Label]
    dst: tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(self.src))
        object.__setattr__(self, "dst", tuple(self.dst))
        object.__setattr__(self, "reset_labels", frozenset(self.reset_labels))
        if not self.reset_labels:
            raise ValueError("generalized reset needs a non-empty label set")
        if not self.src or len(self.src) != len(self.dst):
            raise ValueError("reset source and target paths must have equal non-zero length")

    def labels(self) -> set[Label]:
        return set(self.src) | set(self.dst) | set(self.reset_labels)

    def render(self) -> str:
        labs = ",".join(sorted(self.reset_labels))
        return f"reset {','.join(self.src)} [{labs}] -> {','.join(self.dst)}"


Transition = Update | Reset | GeneralizedReset


class NrcsError(ValueError):
    pass


@dataclass(frozen=True)
class Nrcs:
    k: int
    states: tuple[Label, ...]
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if self.k < 1:
            raise NrcsError("k must be at least 1")
        q = set(self.states)
        for idx, t in enumerate(self.transitions):
            bad = t.labels() - q
            if bad:
                raise NrcsError(f"transition {idx + 1} uses undeclared labels {sorted(bad)}")
            if isinstance(t, Update):
                if len(t.src) > self.k + 1 or len(t.dst) > self.k + 1:
                    raise NrcsError(f"transition {idx + 1}: update paths hold at most k+1 labels")
            elif len(t.src) > self.k:
                raise NrcsError(f"transition {idx + 1}: reset paths hold at most k labels")

    @property
    def updates(self) -> list[Update]:
        return [t for t in self.transitions if isinstance(t, Update)]

    @property
    def resets(self) -> list[Transition]:
        return [t for t in self.transitions if not isinstance(t, Update)]

    def check_config(self, c: Tree, what: str = "configuration"):
        if c.height > self.k:
            raise NrcsError(f"{what} has height {c.height} > k={self.k}")
        bad = c.labels() - set(self.states)
        if bad:
            raise NrcsError(f"{what} uses undeclared labels {sorted(bad)}")

    def expanded(self, fresh_prefix: str = "gr") -> Nrcs:
        """Replace generalized resets by chains of ordinary resets."""
        out: list[Transition] = []
        states = list(self.states)
        taken = set(states)
        for idx, t in enumerate(self.transitions):
            if isinstance(t, GeneralizedReset):
                def fresh(j, idx=idx):
                    name = f"{fresh_prefix}{idx + 1}.{j}"
                    while name in taken:
                        name += "'"
                    return name
                chain_ = expand_generalized_reset(t, fresh)
                for r in chain_:
                    for lab in r.labels():
                        if lab not in taken:
                            taken.add(lab)
                            states.append(lab)
                out.extend(chain_)
            else:
                out.append(t)
        return Nrcs(self.k, tuple(states), tuple(out))


# ---------------------------------------------------------------------------
# Semantics


class StepError(ValueError):
    pass


def match_anchors(c: Tree, labels: Sequence[Label], distinct: bool = True) -> Iterator[Anchor]:
    """Anchors of root-started paths whose labels are ``labels``.

    With ``distinct`` only one representative per group of identical
    siblings is produced, which is enough for successor enumeration.
    """
    if c.label != labels[0]:
        return

    def go(node: Tree, depth: int, acc: Anchor):
        if depth == len(labels):
            yield acc
            return
        seen = set()
        want = labels[depth]
        for i, ch in enumerate(node.children):
            if ch.label != want:
                continue
            if distinct:
                if ch.key in seen:
                    continue
                seen.add(ch.key)
            yield from go(ch, depth + 1, acc + (i,))

    yield from go(c, 1, ())


def _rebuild(node: Tree, anchor: Anchor, pos: int, new_labels: Sequence[Label],
             at_end: Callable[[Tree], Tree | None]) -> Tree | None:
    label = new_labels[pos] if pos < len(new_labels) else node.label
    if pos == len(anchor):
        return at_end(Tree(label, node.children))
    kids = list(node.children)
    replaced = _rebuild(kids[anchor[pos]], anchor, pos + 1, new_labels, at_end)
    if replaced is None:
        del kids[anchor[pos]]
    else:
        kids[anchor[pos]] = replaced
    return Tree(label, kids)


def apply_at(nrcs: Nrcs | None, c: Tree, t: Transition, anchor: Anchor) -> Tree:
    """Fire t along the path named by anchor."""
    anchor = tuple(anchor)
    if len(anchor) != len(t.src) - 1:
        raise StepError("anchor length does not match the transition source")
    try:
        found = c.labels_along(anchor)
    except IndexError:
        raise StepError(f"anchor {anchor} does not exist") from None
    if found != t.src:
        raise StepError(f"anchor labels {found} do not match {t.src}")
    k = nrcs.k if nrcs is not None else None
    if isinstance(t, Update):
        i, j = len(t.src) - 1, len(t.dst) - 1
        if j >= i:
            extra = t.dst[i + 1:]
            if k is not None and j > k:
                raise StepError("increment would exceed height k")

            def grow(node: Tree) -> Tree:
                if not extra:
                    return node
                return Tree(node.label, node.children + (chain(extra),))

            return _rebuild(c, anchor, 0, t.dst, grow)
        # decrement: relabel v_0..v_j, drop the subtree at v_{j+1}
        return _rebuild(c, anchor[:j + 1], 0, t.dst, lambda node: None)
    labs = {t.reset_label} if isinstance(t, Reset) else t.reset_labels

    def cut(node: Tree) -> Tree:
        return Tree(node.label, [ch for ch in node.children if ch.label not in labs])

    return _rebuild(c, anchor, 0, t.dst, cut)


@dataclass(frozen=True)
class Step:
    index: int  # 0-based transition index
    anchor: Anchor
    result: Tree


def successors(nrcs: Nrcs, c: Tree) -> list[Step]:
    """All one-step successors, de-duplicated by resulting configuration."""
    out: dict[Tree, Step] = {}
    for idx, t in enumerate(nrcs.transitions):
        for anchor in match_anchors(c, t.src):
            d = apply_at(nrcs, c, t, anchor)
            if d not in out:
                out[d] = Step(idx, anchor, d)
    return list(out.values())


def removed_by(c: Tree, t: Transition, anchor: Anchor) -> int:
    """Number of nodes a reset would delete at this anchor (0 for updates)."""
    if isinstance(t, Update):
        return 0
    labs = {t.reset_label} if isinstance(t, Reset) else t.reset_labels
    node = c.node_at(anchor)
    return sum(ch.size for ch in node.children if ch.label in labs)


def lossy_step(nrcs: Nrcs, c: Tree, t: Transition) -> set[Tree]:
    """Results of deleting any subtrees from c and then firing t."""
    out = set()
    for smaller in sub_configs(c):
        for anchor in match_anchors(smaller, t.src):
            out.add(apply_at(nrcs, smaller, t, anchor))
    return out


def replay(nrcs: Nrcs, c: Tree, run: Sequence[tuple[int, Anchor]]) -> list[Tree]:
    """Replay (transition index, anchor) pairs; returns all visited configs."""
    trace = [c]
    for idx, anchor in run:
        c = apply_at(nrcs, c, nrcs.transitions[idx], anchor)
        trace.append(c)
    return trace


def expand_generalized_reset(t: GeneralizedReset, fresh: Callable[[int], Label] | str = "gr") -> list[Reset]:
    """Simulate a generalized reset by a chain of ordinary resets.

    The path is relabelled with a fresh label t^j after the j-th reset, so
    each later link only matches the path the first link touched.
    """
    if isinstance(fresh, str):
        prefix = fresh
        fresh = lambda j: f"{prefix}.{j}"
    labels = sorted(t.reset_labels)
    m = len(labels)
    n = len(t.src)
    paths = [t.src] + [tuple([fresh(j)] * n) for j in range(1, m)] + [t.dst]
    return [Reset(paths[j], labels[j], paths[j + 1]) for j in range(m)]


# ---------------------------------------------------------------------------
# File format


class NrcsSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, offset: int | None = None):
        where = f"line {line}" + (f", offset {offset}" if offset is not None else "")
        super().__init__(f"{where}: {msg}")
        self.line = line
        self.offset = offset


@dataclass
class NrcsFile:
    nrcs: Nrcs
    init: Tree | None = None
    target: Tree | None = None
    comments: list[str] = field(default_factory=list)


_PATH_RE = re.compile(r"^\s*([^\[\]]+?)\s*(?:\[\s*([^\]]*)\])?\s*->\s*(.+?)\s*$")


def _split_path(text: str, lineno: int) -> tuple[Label, ...]:
    parts = [p.strip() for p in text.split(",")]
    for p in parts:
        if not _LABEL_RE.fullmatch(p):
            raise NrcsSyntaxError(f"bad label {p!r}", lineno)
    return tuple(parts)


def parse_nrcs(text: str) -> NrcsFile:
    """Parse the line-oriented machine format.

    Lines whose first non-blank character is '#' are comments; '#' inside a
    line is an ordinary label character (it is the budget label).
    """
    k = None
    states: list[Label] = []
    trans: list[Transition] = []
    trans_lines: list[int] = []
    init = target = None
    init_line = target_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "nrcs":
            m = re.fullmatch(r"k\s*=\s*(\d+)", rest)
            if not m:
                raise NrcsSyntaxError("expected 'nrcs k=<n>'", lineno)
            k = int(m.group(1))
        elif word == "states":
            for s in rest.split():
                if not _LABEL_RE.fullmatch(s):
                    raise NrcsSyntaxError(f"bad state name {s!r}", lineno)
                states.append(s)
        elif word in ("update", "reset"):
            m = _PATH_RE.match(rest)
            if not m:
                raise NrcsSyntaxError(f"malformed {word} line", lineno)
            src = _split_path(m.group(1), lineno)
            dst = _split_path(m.group(3), lineno)
            try:
                if word == "update":
                    if m.group(2) is not None:
                        raise NrcsSyntaxError("update lines take no [label]", lineno)
                    trans.append(Update(src, dst))
                else:
                    if m.group(2) is None:
                        raise NrcsSyntaxError("reset lines need a [label]", lineno)
                    labs = _split_path(m.group(2), lineno)
                    if len(labs) == 1:
                        trans.append(Reset(src, labs[0], dst))
                    else:
                        trans.append(GeneralizedReset(src, frozenset(labs), dst))
                trans_lines.append(lineno)
            except ValueError as e:
                if isinstance(e, NrcsSyntaxError):
                    raise
                raise NrcsSyntaxError(str(e), lineno) from None
        elif word in ("init", "target"):
            try:
                tree = parse_tree(rest, lineno)
            except TreeSyntaxError as e:
                raise NrcsSyntaxError(str(e), lineno, e.offset) from None
            if word == "init":
                init, init_line = tree, lineno
            else:
                target, target_line = tree, lineno
        else:
            raise NrcsSyntaxError(f"unknown directive {word!r}", lineno)
    if k is None:
        raise NrcsSyntaxError("missing 'nrcs k=<n>' header", 1)
    try:
        machine = Nrcs(k, tuple(states), tuple(trans))
    except NrcsError as e:
        # point at the offending transition line when there is one
        for t, ln in zip(trans, trans_lines):
            try:
                Nrcs(k, tuple(states), (t,))
            except NrcsError as inner:
                raise NrcsSyntaxError(str(inner).replace("transition 1", "transition"), ln) from None
        raise NrcsSyntaxError(str(e), 1) from None
    for tree, ln, what in ((init, init_line, "init"), (target, target_line, "target")):
        if tree is not None:
            try:
                machine.check_config(tree, what)
            except NrcsError as e:
                raise NrcsSyntaxError(str(e), ln) from None
    return NrcsFile(machine, init, target)


def render_nrcs(nrcs: Nrcs, init: Tree | None = None, target: Tree | None = None,
                header_comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in header_comments]
    lines.append(f"nrcs k={nrcs.k}")
    for i in range(0, len(nrcs.states), 12):
        lines.append("states " + " ".join(nrcs.states[i:i + 12]))
    for t in nrcs.transitions:
        lines.append(t.render())
    if init is not None:
        lines.append(f"init {init.key}")
    if target is not None:
        lines.append(f"target {target.key}")
    return "\n".join(lines) + "\n"


def format_anchor(anchor: Anchor) -> str:
    return "/" + "/".join(str(i) for i in anchor)


def parse_anchor(text: str) -> Anchor:
    text = text.strip()
    if not text.startswith("/"):
        raise ValueError(f"anchor must start with '/': {text!r}")
    body = text[1:]
    return tuple(int(x) for x in body.split("/")) if body else ()
