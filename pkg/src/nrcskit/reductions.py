"""Minsky machines, the budgeted translation and the Hardy-bounded reduction.

A Minsky machine is a 1-NCS (updates on paths of length at most 2) plus
zero-tests.  Counters are children of the root labelled by the counter
name.  The budgeted machine pairs every increment with the consumption of
a ``#`` child and every decrement with the creation of one, and turns
zero-tests into resets; a run of it is honest when no reset removes
anything, which is exactly when the total node count is preserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from collections.abc import Sequence

from .gadgets import PLAIN, hardy_backward_local, hardy_forward_local, machine_from
from .nrcs import (Anchor, NrcsSyntaxError, Nrcs, Reset, Transition, Tree, Update,
                   _LABEL_RE, apply_at, make_label, match_anchors, removed_by,
                   split_label)
from .ordinal import omega_tower, fundamental_sequence
from .ordinal_encoding import BUDGET_LABEL, EncodingParams, make_hardy_config

MINSKY_PREFIX = "m."
BWD_PREFIX = "bw:"
BWD_ROOT = BWD_PREFIX + "w"


@dataclass(frozen=True)
class ZeroTest:
    src: str
    tested: str
    dst: str

    def render(self) -> str:
        return f"zerotest {self.src} [{self.tested}] -> {self.dst}"


@dataclass(frozen=True)
class MinskyMachine:
    states: tuple[str, ...]
    updates: tuple[Update, ...] = ()
    zero_tests: tuple[ZeroTest, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        q = set(self.states)
        for t in self.updates:
            if len(t.src) > 2 or len(t.dst) > 2:
                raise ValueError(f"{t.render()}: Minsky updates act on paths of length <= 2")
            bad = t.labels() - q
            if bad:
                raise ValueError(f"{t.render()}: undeclared labels {sorted(bad)}")
        for z in self.zero_tests:
            bad = {z.src, z.tested, z.dst} - q
            if bad:
                raise ValueError(f"{z.render()}: undeclared labels {sorted(bad)}")

    @property
    def counters(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in self.updates:
            for path in (t.src, t.dst):
                if len(path) == 2:
                    seen[path[1]] = None
        for z in self.zero_tests:
            seen[z.tested] = None
        return tuple(seen)

    def as_nrcs(self) -> Nrcs:
        return Nrcs(1, self.states, self.updates)


def minsky_step(m: MinskyMachine, c: Tree, t: Update | ZeroTest) -> list[Tree]:
    """Successors of c under one transition or zero-test."""
    if c.height > 1:
        raise ValueError("Minsky configurations have height at most 1")
    if isinstance(t, ZeroTest):
        if c.label != t.src or any(ch.label == t.tested for ch in c.children):
            return []
        return [Tree(t.dst, c.children)]
    return list(dict.fromkeys(apply_at(None, c, t, a) for a in match_anchors(c, t.src)))


def minsky_successors(m: MinskyMachine, c: Tree) -> list[Tree]:
    out: dict[Tree, None] = {}
    for t in list(m.updates) + list(m.zero_tests):
        for d in minsky_step(m, c, t):
            out[d] = None
    return list(out)


def minsky_to_budget_nrcs(m: MinskyMachine) -> Nrcs:
    """Increments consume '#', decrements produce '#', zero-tests become resets."""
    trans: list[Transition] = []
    for t in m.updates:
        src, dst = t.src, t.dst
        if len(src) == 1 and len(dst) == 2:
            src = src + (BUDGET_LABEL,)
        elif len(src) == 2 and len(dst) == 1:
            dst = dst + (BUDGET_LABEL,)
        trans.append(Update(src, dst))
    for z in m.zero_tests:
        trans.append(Reset((z.src,), z.tested, (z.dst,)))
    return Nrcs(1, tuple(m.states) + (BUDGET_LABEL,), tuple(trans))


def honest_run_check(n: Nrcs, init: Tree, run: Sequence[tuple[int, Anchor]]) -> bool:
    """True iff no reset step of the run removes a subtree.

    Raises StepError if the run cannot be replayed.
    """
    cur = init
    honest = True
    for idx, anchor in run:
        t = n.transitions[idx]
        if removed_by(cur, t, anchor):
            honest = False
        cur = apply_at(n, cur, t, anchor)
    return honest


def normalize_final(m: MinskyMachine, q_f: str) -> tuple[MinskyMachine, str, list[str]]:
    """Make the final state reachable only with every counter at zero.

    Adds draining loops at q_f and a chain of zero-tests to a fresh state.
    """
    counters = m.counters
    taken = set(m.states)

    def fresh(base: str) -> str:
        name = base
        while name in taken:
            name += "'"
        taken.add(name)
        return name

    chain = [q_f] + [fresh(f"{q_f}.z{i + 1}") for i in range(len(counters))]
    final = chain[-1] if counters else fresh(f"{q_f}.done")
    updates = list(m.updates)
    tests = list(m.zero_tests)
    notes = []
    for c in counters:
        updates.append(Update((q_f, c), (q_f,)))
        notes.append(f"drain {c} at {q_f}")
    for i, c in enumerate(counters):
        tests.append(ZeroTest(chain[i], c, chain[i + 1]))
        notes.append(f"zero-test {c}: {chain[i]} -> {chain[i + 1]}")
    if not counters:
        updates.append(Update((q_f,), (final,)))
        notes.append(f"rename {q_f} -> {final}")
    states = list(m.states) + [s for s in chain[1:] + [final] if s not in m.states]
    return MinskyMachine(tuple(states), tuple(updates), tuple(tests)), final, notes


# ---------------------------------------------------------------------------
# The bounded reduction


@dataclass
class ReductionInstance:
    nrcs: Nrcs
    init: Tree
    target: Tree
    provenance: dict = field(default_factory=dict)

    def manifest(self) -> str:
        lines = []
        for key, val in self.provenance.items():
            if isinstance(val, list):
                for v in val:
                    lines.append(f"{key}: {v}")
            else:
                lines.append(f"{key}: {val}")
        return "\n".join(lines) + "\n"


def _rename(t: Transition, fn) -> Transition:
    src = tuple(fn(lab, i) for i, lab in enumerate(t.src))
    dst = tuple(fn(lab, i) for i, lab in enumerate(t.dst))
    if isinstance(t, Update):
        return Update(src, dst)
    return Reset(src, fn(t.reset_label, len(t.src)), dst)


def _bwd_name(label: str, pos: int) -> str:
    base, ann = split_label(label)
    if pos > 0 and (base == "w" or label in PLAIN):
        return label
    return make_label(BWD_PREFIX + base, ann)


def _minsky_name(label: str, pos: int) -> str:
    return label if label == BUDGET_LABEL else MINSKY_PREFIX + label


def reduction_alpha(k: int, ell: int):
    return fundamental_sequence(omega_tower(k + 1), ell)


def build_bounded_reduction(m: MinskyMachine, k: int, ell: int, q_init: str,
                            q_f: str) -> ReductionInstance:
    """Forward Hardy machine, then the budgeted Minsky machine, then the backward one.

    The instance starts from C_{alpha,ell} with alpha = (Omega_{k+1})_ell and
    asks to cover the same encoder under the backward machine's root label,
    so every witness has to pass through both bridges.
    """
    if k < 1 or ell < 1:
        raise ValueError("k and ell must both be at least 1")
    if q_init not in m.states or q_f not in m.states:
        raise ValueError("q_init and q_f must be states of the machine")
    norm, final, notes = normalize_final(m, q_f)
    budget = minsky_to_budget_nrcs(norm)
    fwd = list(hardy_forward_local(k, ell))
    bwd = [_rename(t, _bwd_name) for t in hardy_backward_local(k, ell)]
    mid = [_rename(t, _minsky_name) for t in budget.transitions]
    bridge_in = Update(("w",), (MINSKY_PREFIX + q_init,))
    bridge_out = Update((MINSKY_PREFIX + final,), (BWD_ROOT,))
    alpha = reduction_alpha(k, ell)
    p = EncodingParams(k, ell)
    init = make_hardy_config(alpha, ell, p)
    target = Tree(BWD_ROOT, init.children)
    ts = fwd + [bridge_in] + mid + [bridge_out] + bwd
    extra = ["w", BWD_ROOT, BUDGET_LABEL] + [make_label("w", j) for j in range(ell + 1)]
    extra += [MINSKY_PREFIX + s for s in norm.states]
    machine = machine_from(ts, k, extra)
    index = {t: i for i, t in enumerate(machine.transitions)}
    prov = {
        "alpha": str(alpha),
        "budget": ell,
        "forward": f"{len(fwd)} transitions from hardyForward({k}, ell={ell})",
        "minsky": f"{len(mid)} transitions, states prefixed '{MINSKY_PREFIX}'",
        "backward": f"{len(bwd)} transitions from hardyBackward({k}, ell={ell}), prefixed '{BWD_PREFIX}'",
        "bridge": [f"t{index[bridge_in] + 1}: {bridge_in.render()}",
                   f"t{index[bridge_out] + 1}: {bridge_out.render()}"],
        "normalization": notes,
        "final_state": final,
    }
    return ReductionInstance(machine, init, target, prov)


# ---------------------------------------------------------------------------
# Simple coverability wrappers


def _construction_steps(c: Tree) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Update steps (without root labels) that build c one node at a time.

    Inner nodes on the path being built carry the label 'o:' + label and get
    their real label once all their children exist, so every step touches a
    unique path.
    """
    steps: list[tuple[tuple[str, ...], tuple[str, ...]]] = []

    def visit(node: Tree, open_path: tuple[str, ...]):
        for ch in node.children:
            if not ch.children:
                steps.append((open_path, open_path + (ch.label,)))
                continue
            mark = "o:" + ch.label
            steps.append((open_path, open_path + (mark,)))
            visit(ch, open_path + (mark,))
            steps.append((open_path + (mark,), open_path + (ch.label,)))

    visit(c, ())
    return steps


@dataclass
class Wrapper:
    transitions: list[Transition]
    states: list[str]
    start: str
    end: str


def wrapper_fwd(c: Tree, q_init: str, tag: str = "cf") -> Wrapper:
    """From a single q_init node, reach exactly c (root label c.label)."""
    steps = _construction_steps(c)
    roots = [q_init] + [f"{tag}.{j}" for j in range(1, len(steps) + 1)]
    trans: list[Transition] = []
    for j, (src, dst) in enumerate(steps):
        trans.append(Update((roots[j],) + src, (roots[j + 1],) + dst))
    trans.append(Update((roots[-1],), (c.label,)))
    return Wrapper(trans, roots, q_init, c.label)


def wrapper_bwd(c: Tree, q_f: str, tag: str = "cb") -> Wrapper:
    """From any configuration whose root is c.label, reach root q_f iff it covers c."""
    steps = _construction_steps(c)
    roots = [q_f] + [f"{tag}.{j}" for j in range(1, len(steps) + 1)]
    trans: list[Transition] = [Update((c.label,), (roots[-1],))]
    for j in range(len(steps) - 1, -1, -1):
        src, dst = steps[j]
        trans.append(Update((roots[j + 1],) + dst, (roots[j],) + src))
    return Wrapper(trans, roots, c.label, q_f)


def simple_coverability_wrappers(n: Nrcs, c: Tree, tag: str = "c") -> tuple[Wrapper, Wrapper]:
    return wrapper_fwd(c, f"{tag}.init", f"{tag}.f"), wrapper_bwd(c, f"{tag}.final", f"{tag}.b")


def compose_simple(n: Nrcs, init: Tree, target: Tree) -> tuple[Nrcs, Tree, Tree]:
    """A machine in which q_init covers q_f iff init covers target in n."""
    fw = wrapper_fwd(init, "s.init", "s.f")
    bw = wrapper_bwd(target, "s.final", "s.b")
    ts = list(fw.transitions) + list(n.transitions) + list(bw.transitions)
    states: dict[str, None] = dict.fromkeys(n.states)
    for t in ts:
        for lab in t.labels():
            states[lab] = None
    return Nrcs(n.k, tuple(states), tuple(dict.fromkeys(ts))), Tree("s.init"), Tree("s.final")


# ---------------------------------------------------------------------------
# File format

_ZT_RE = re.compile(r"^(\S+)\s*\[\s*(\S+)\s*\]\s*->\s*(\S+)$")
_UP_RE = re.compile(r"^(.+?)\s*->\s*(.+)$")


@dataclass
class MinskyFile:
    machine: MinskyMachine
    init: str | None
    target: str | None


def parse_minsky(text: str) -> MinskyFile:
    """Lines: 'minsky', 'states ...', 'update a,b -> c', 'zerotest p0 [p] -> q0',
    'init q', 'target q'; lines starting with '#' are comments."""
    states: list[str] = []
    updates: list[Update] = []
    tests: list[ZeroTest] = []
    init = target = None
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "minsky":
            seen_header = True
        elif word == "states":
            for s in rest.split():
                if not _LABEL_RE.fullmatch(s):
                    raise NrcsSyntaxError(f"bad state name {s!r}", lineno)
                states.append(s)
        elif word == "update":
            mm = _UP_RE.match(rest)
            if not mm:
                raise NrcsSyntaxError("malformed update line", lineno)
            src = tuple(x.strip() for x in mm.group(1).split(","))
            dst = tuple(x.strip() for x in mm.group(2).split(","))
            if not all(_LABEL_RE.fullmatch(x) for x in src + dst):
                raise NrcsSyntaxError("bad label in update", lineno)
            updates.append(Update(src, dst))
        elif word == "zerotest":
            mm = _ZT_RE.match(rest)
            if not mm:
                raise NrcsSyntaxError("expected 'zerotest p0 [p] -> q0'", lineno)
            tests.append(ZeroTest(*mm.groups()))
        elif word in ("init", "target"):
            if not _LABEL_RE.fullmatch(rest):
                raise NrcsSyntaxError(f"{word} must be a single state", lineno)
            if word == "init":
                init = rest
            else:
                target = rest
        else:
            raise NrcsSyntaxError(f"unknown directive {word!r}", lineno)
    if not seen_header:
        raise NrcsSyntaxError("missing 'minsky' header", 1)
    try:
        machine = MinskyMachine(tuple(states), tuple(updates), tuple(tests))
    except ValueError as e:
        raise NrcsSyntaxError(str(e), 1) from None
    return MinskyFile(machine, init, target)


def render_minsky(mf: MinskyFile) -> str:
    m = mf.machine
    lines = ["minsky", "states " + " ".join(m.states)]
    lines += [t.render() for t in m.updates]
    lines += [z.render() for z in m.zero_tests]
    if mf.init:
        lines.append(f"init {mf.init}")
    if mf.target:
        lines.append(f"target {mf.target}")
    return "\n".join(lines) + "\n"
