"""Lower-bound gadget machines.

Every gadget is first generated in a local frame whose root is the host
node of the gadget (position 0) and whose last level is ``K``.  Labels at
level ``K`` carry the ``@wj`` annotation; a path that reaches position
``K+1`` talks about the virtual children of an annotated node, so adding
or removing such a child moves the annotation up or down.  Local
transitions are expanded into concrete ones right away and can then be
embedded below any fixed list of ancestor labels.

Internal labels are namespaced by gadget kind and level (``sm1.decl``,
``cmp2.round``); interface labels such as ``start_sm`` or ``A_cmp`` are
shared between a gadget and its caller.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cache
from collections.abc import Iterable, Sequence

from .nrcs import (Anchor, GeneralizedReset, Nrcs, Reset, Transition, Tree, Update,
                   apply_at, expand_generalized_reset, leq_induced, make_label,
                   removed_by, split_label, successors)
from .ordinal import Ordinal, compare, hardy_eval, SUCC, BudgetExhausted
from .ordinal_encoding import (BUDGET_LABEL, EncodingError, EncodingParams, hardy_fold, HardyState, make_hardy_config, subtree_exponent)

W = "w"
W1 = "w'"
H1 = "#'"
PLAIN = frozenset({BUDGET_LABEL, H1})

KINDS = ("copy", "comparator", "smallest", "biggest", "hardyForward", "hardyBackward")

RESULT = {-1: "small_cmp", 0: "equal_cmp", 1: "big_cmp"}


class GadgetError(ValueError):
    pass


def _ann(label: str, i: int) -> str:
    return label if label in PLAIN else make_label(label, i)


def tag_a(label: str) -> str:
    base, ann = split_label(label)
    return make_label("A:" + base, ann)


# ---------------------------------------------------------------------------
# Local-frame expansion


def expand_update(src: Sequence[str], dst: Sequence[str], K: int, ell: int) -> list[Update]:
    src, dst = tuple(src), tuple(dst)
    a, b = len(src), len(dst)
    if a <= K and b <= K:
        return [Update(src, dst)]
    head_s, head_d = src[:K], dst[:K]
    out = []
    if a == K + 1 and b == K + 1:
        s, d = src[K], dst[K]
        if s in PLAIN and d in PLAIN:
            return [Update(src, dst)]
        if s in PLAIN:
            return [Update(src, head_d + (_ann(d, 0),))]
        if d in PLAIN:
            return [Update(head_s + (_ann(s, 0),), dst)]
        return [Update(head_s + (_ann(s, i),), head_d + (_ann(d, i),)) for i in range(ell + 1)]
    if a == K + 1 and b <= K:
        s = src[K]
        if s in PLAIN:
            return [Update(src, dst)]
        return [Update(head_s + (_ann(s, i),), dst) for i in range(ell + 1)]
    if a <= K and b == K + 1:
        return [Update(src, head_d + (_ann(dst[K], 0),))]
    if a == K + 2:
        if src[K + 1] != W:
            raise GadgetError(f"virtual child must be {W!r} in {src}")
        s = src[K]
        for i in range(1, ell + 1):
            if b == K + 2:
                out.append(Update(head_s + (_ann(s, i),), head_d + (_ann(dst[K], i),)))
            elif b == K + 1:
                out.append(Update(head_s + (_ann(s, i),), head_d + (_ann(dst[K], i - 1),)))
            else:
                out.append(Update(head_s + (_ann(s, i),), dst))
        return out
    if a == K + 1 and b == K + 2:
        if dst[K + 1] != W:
            raise GadgetError(f"virtual child must be {W!r} in {dst}")
        return [Update(head_s + (_ann(src[K], i),), head_d + (_ann(dst[K], i + 1),))
                for i in range(ell)]
    if a <= K and b == K + 2:
        return [Update(src, head_d + (_ann(dst[K], 1),))]
    raise GadgetError(f"path lengths {a}, {b} do not fit level {K}")


class _Builder:
    def __init__(self, K: int, ell: int, ns: str):
        self.K, self.ell, self.ns = K, ell, ns
        self.out: list[Transition] = []
        self._fresh = 0

    def n(self, name: str) -> str:
        return f"{self.ns}.{name}"

    def upd(self, src, dst):
        self.out.extend(expand_update(src, dst, self.K, self.ell))

    def rst(self, src, label, dst):
        self.rst_multi(src, [label], dst)

    def rst_multi(self, src, labels, dst):
        src, dst = tuple(src), tuple(dst)
        a = len(src)
        if a == self.K + 1:
            # children of an annotated node are virtual: reset means annotation 0
            if list(labels) != [W]:
                raise GadgetError("only w-children exist below the last level")
            for i in range(self.ell + 1):
                self.out.append(Update(src[:self.K] + (_ann(src[self.K], i),),
                                       dst[:self.K] + (_ann(dst[self.K], 0),)))
            return
        if a > self.K + 1:
            raise GadgetError("reset path too long")
        if a == self.K:
            labs = sorted({_ann(l, i) for l in labels for i in range(self.ell + 1)})
        else:
            labs = sorted(set(labels))
        if len(labs) == 1:
            self.out.append(Reset(src, labs[0], dst))
            return
        self._fresh += 1
        tag = self._fresh
        self.out.extend(expand_generalized_reset(
            GeneralizedReset(src, frozenset(labs), dst),
            lambda j, tag=tag: f"{self.ns}.z{tag}.{j}"))

    def include(self, transitions: Iterable[Transition], prefix: Sequence[str] = ()):
        self.out.extend(prefix_transitions(transitions, prefix))

    def raw(self, transitions: Iterable[Transition]):
        self.out.extend(transitions)


def prefix_transitions(ts: Iterable[Transition], prefix: Sequence[str]) -> list[Transition]:
    prefix = tuple(prefix)
    out = []
    for t in ts:
        if isinstance(t, Update):
            out.append(Update(prefix + t.src, prefix + t.dst))
        elif isinstance(t, Reset):
            out.append(Reset(prefix + t.src, t.reset_label, prefix + t.dst))
        else:
            out.append(GeneralizedReset(prefix + t.src, t.reset_labels, prefix + t.dst))
    return out


def track_a(ts: Sequence[Transition], ns: str) -> list[Transition]:
    """Variant in which the child that starts as A_cmp keeps an 'A:' tag throughout."""
    out = []
    fresh = 0
    for t in ts:
        if len(t.src) >= 2:
            is_a = split_label(t.src[1])[0] == "A_cmp"
            keeps_child = len(t.dst) >= 2
            new_dst = t.dst[:1] + (tag_a(t.dst[1]),) + t.dst[2:] if keeps_child else t.dst
            if is_a:
                out.append(_rebuild_t(t, t.src, new_dst))
            else:
                out.append(t)
                out.append(_rebuild_t(t, t.src[:1] + (tag_a(t.src[1]),) + t.src[2:], new_dst))
        elif isinstance(t, Update):
            out.append(t)
        else:
            fresh += 1
            mid = (f"{ns}.tr{fresh}",)
            out.append(Reset(t.src, t.reset_label, mid))
            out.append(Reset(mid, tag_a(t.reset_label), t.dst))
    return out


def _rebuild_t(t: Transition, src, dst) -> Transition:
    if isinstance(t, Update):
        return Update(src, dst)
    return Reset(src, t.reset_label, dst)


def rehost(ts: Sequence[Transition], tag: str) -> list[Transition]:
    """Rename every host label so a second copy of a gadget can share the host."""
    out = []
    for t in ts:
        src = (f"{tag}/{t.src[0]}",) + t.src[1:]
        dst = (f"{tag}/{t.dst[0]}",) + t.dst[1:]
        out.append(_rebuild_t(t, src, dst))
    return out


def merge_frame(ts: Sequence[Transition], ns: str, root: str,
                mirror_label: str | None) -> list[Transition]:
    """Run a gadget whose host is split over two sibling nodes.

    Each transition fires on the side holding its path, is mirrored below
    the sibling labelled ``mirror_label`` on that side (if given), and the
    host label change is then copied to the other side.
    """
    out: list[Transition] = []
    for idx, t in enumerate(ts):
        if len(t.src) < 2 or (isinstance(t, Update) and len(t.dst) < 2):
            raise GadgetError("merged gadgets must act below the host")
        tmp = f"{ns}.t{idx}"
        m1, m2, m3 = f"{ns}.a{idx}", f"{ns}.b{idx}", f"{ns}.c{idx}"
        p0, q0 = t.src[0], t.dst[0]
        out.append(_rebuild_t(t, (root, p0) + t.src[1:], (m1, tmp) + t.dst[1:]))
        deep = mirror_label is not None and (
            len(t.src) >= 3 or len(t.dst) >= 3 or isinstance(t, Reset))
        if deep:
            out.append(_rebuild_t(t, (m1, tmp, mirror_label) + t.src[2:],
                                  (m2, tmp, mirror_label) + t.dst[2:]))
        else:
            m2 = m1
        out.append(Update((m2, p0), (m3, q0)))
        out.append(Update((m3, tmp), (root, q0)))
    return out


# ---------------------------------------------------------------------------
# Gadgets in their local frame


@cache
def copy_local(K: int, ell: int, final: str = W) -> tuple[Transition, ...]:
    """Duplicate the child labelled mrkd; the copy is labelled cpd.

    The walk moves the marked subtree into two mirror trees built in
    lockstep and deletes each original node once it is finished, so the
    two results are always identical even when unvisited nodes are lost.
    """
    ns = f"cp{K}" if final == W else f"cp{K}[{final}]"
    b = _Builder(K, ell, ns)
    n = b.n
    m = lambda i: f"mrkd_{i}"
    a = lambda i: f"mrkd'_{i}"
    c = lambda i: f"mrkd''_{i}"
    cp = lambda i: f"cp_{i}"
    b.upd(("start_copy", "mrkd"), ("start_copy'", m(1)))
    if K == 1:
        for j in range(ell + 1):
            b.raw([Update(("start_copy'", _ann(m(1), j)), (n(f"s{j}"),)),
                   Update((n(f"s{j}"),), (n(f"s'{j}"), _ann(final, j))),
                   Update((n(f"s'{j}"),), ("end_copy", _ann("cpd", j)))])
        return tuple(b.out)
    b.upd(("start_copy'",), (n("s"), a(1)))
    b.upd((n("s"),), (cp(1), c(1)))
    for i in range(1, K):
        M, A, C = (m(i),) * i, (a(i),) * i, (c(i),) * i
        if i + 1 < K:
            b.upd((cp(i),) + M + (W,), (n(f"x{i + 1}"),) + (m(i + 1),) * (i + 1))
            b.upd((n(f"x{i + 1}"),) + A, (n(f"y{i + 1}"),) + (a(i + 1),) * (i + 1))
            b.upd((n(f"y{i + 1}"),) + C, (cp(i + 1),) + (c(i + 1),) * (i + 1))
        else:
            # leaves: delete, then recreate in both mirrors with the same exponent
            for j in range(ell + 1):
                b.raw([Update((cp(i),) + M + (_ann(W, j),), (n(f"xl{i}.{j}"),) + M),
                       Update((n(f"xl{i}.{j}"),) + A, (n(f"yl{i}.{j}"),) + A + (_ann(W, j),)),
                       Update((n(f"yl{i}.{j}"),) + C, (cp(i),) + C + (_ann(W, j),))])
        # finish v_i: drop unvisited children, delete v_i, close both mirrors
        b.rst((cp(i),) + M, W, (n(f"f{i}"),) + M)
        b.upd((n(f"f{i}"),) + M, (n(f"g{i}"),) + (m(i - 1),) * (i - 1))
        if i == 1:
            b.upd((n("g1"), a(1)), (n("h1"), final))
            b.upd((n("h1"), c(1)), ("end_copy", "cpd"))
        else:
            b.upd((n(f"g{i}"),) + A, (n(f"h{i}"),) + (a(i - 1),) * (i - 1) + (W,))
            b.upd((n(f"h{i}"),) + C, (cp(i - 1),) + (c(i - 1),) * (i - 1) + (W,))
    return tuple(b.out)


@cache
def comparator_local(K: int, ell: int) -> tuple[Transition, ...]:
    """Compare the children labelled A_cmp and B_cmp."""
    if K == 1:
        b = _Builder(1, ell, "cmp1")
        for a in range(ell + 1):
            b.raw([Update(("start_cmp", _ann("A_cmp", a)), (b.n(f"a{a}"), _ann(b.n("A"), a)))])
            for c in range(ell + 1):
                res_b = RESULT[(c > a) - (c < a)]
                res_a = RESULT[(a > c) - (a < c)]
                b.raw([Update((b.n(f"a{a}"), _ann("B_cmp", c)), (b.n(f"ab{a}.{c}"), _ann(res_b, c))),
                       Update((b.n(f"ab{a}.{c}"), _ann(b.n("A"), a)), ("end_cmp", _ann(res_a, a)))])
        return tuple(b.out)
    KK = K - 1
    b = _Builder(K, ell, f"cmp{K}")
    n = b.n
    A, B = n("A"), n("B")
    fA, fB = n("fA"), n("fB")
    pairs = {"big": "small", "small": "big", "equal": "equal"}
    b.upd(("start_cmp", "A_cmp"), (n("init"), A))
    b.upd((n("init"), "B_cmp"), (n("round"), B))
    big = biggest_local(KK, ell)
    inner = track_a(comparator_local(KK, ell), n("trk"))
    # a round: find the biggest child on each side, or guess the side is exhausted
    b.upd((n("round"), A), (n("bigA"), "start_big"))
    b.include(big, (n("bigA"),))
    b.upd((n("bigA"), "end_big"), (n("phB"), n("Af")))
    b.rst((n("round"), A), W, (n("phB"), n("Ae")))
    b.upd((n("phB"), B), (n("bigB"), "start_big"))
    b.include(big, (n("bigB"),))
    b.upd((n("bigB"), "end_big"), (n("disp"), n("Bf")))
    b.rst((n("phB"), B), W, (n("disp"), n("Be")))
    b.upd((n("disp"), n("Ae")), (n("dAe"), fA))
    b.upd((n("disp"), n("Af")), (n("dAf"), fA))
    b.upd((n("dAe"), n("Be")), (n("fin.equal"), fB))
    b.upd((n("dAe"), n("Bf")), (n("dAeBf"), fB))
    b.upd((n("dAeBf"), fB, "biggest"), (n("fin.small"), fB, W))
    b.upd((n("dAf"), n("Be")), (n("dAfBe"), fB))
    b.upd((n("dAfBe"), fA, "biggest"), (n("fin.big"), fA, W))
    b.upd((n("dAf"), n("Bf")), (n("cpA"), fB))
    # copy both biggest children; the originals are kept as 'orig'
    orig = n("orig")
    cp = copy_local(KK, ell, orig)
    b.upd((n("cpA"), fA, "biggest"), (n("cpA"), "start_copy", "mrkd"))
    b.include(cp, (n("cpA"),))
    b.upd((n("cpA"), "end_copy"), (n("cpB"), n("Ac")))
    b.upd((n("cpB"), fB, "biggest"), (n("cpB"), "start_copy", "mrkd"))
    b.include(cp, (n("cpB"),))
    b.upd((n("cpB"), "end_copy"), (n("setup"), n("Bc")))
    # compare the copies as if both parents were one host, mirroring onto the originals
    b.upd((n("setup"), n("Ac"), "cpd"), (n("setup2"), "start_cmp", "A_cmp"))
    b.upd((n("setup2"), n("Bc"), "cpd"), (n("run"), "start_cmp", "B_cmp"))
    b.raw(merge_frame(inner, n("mg"), n("run"), orig))
    hA, hB, keep, used = n("hA"), n("hB"), n("keep"), n("used")
    ck = check_local(KK, ell, orig)
    for r, s in pairs.items():
        b.upd((n("run"), "end_cmp", f"A:{r}_cmp"), (n(f"gotA.{r}"), hA, keep))
        b.upd((n(f"gotA.{r}"), "end_cmp", f"{s}_cmp"), (n(f"ckA.{r}"), hB, keep))
        # the originals must still dominate the other children of their parent
        b.upd((n(f"ckA.{r}"), hA), (n(f"ckA.{r}"), "start_chk"))
        b.include(ck, (n(f"ckA.{r}"),))
        b.upd((n(f"ckA.{r}"), "end_chk"), (n(f"ckB.{r}"), hA))
        b.upd((n(f"ckB.{r}"), hB), (n(f"ckB.{r}"), "start_chk"))
        b.include(ck, (n(f"ckB.{r}"),))
        b.upd((n(f"ckB.{r}"), "end_chk"), (n(f"post.{r}"), hB))
    b.upd((n("post.equal"), hA, keep), (n("pe1"), hA, used))
    b.upd((n("pe1"), hB, keep), (n("pe2"), hB, used))
    b.upd((n("pe2"), hA), (n("pe3"), A))
    b.upd((n("pe3"), hB), (n("round"), B))
    for r in ("small", "big"):
        b.upd((n(f"post.{r}"), hA, keep), (n(f"pk.{r}"), hA, W))
        b.upd((n(f"pk.{r}"), hB, keep), (n(f"pk2.{r}"), hB, W))
        b.upd((n(f"pk2.{r}"), hA), (n(f"pk3.{r}"), fA))
        b.upd((n(f"pk3.{r}"), hB), (n(f"fin.{r}"), fB))
    # restore matched children in pairs that compare equal; unmatched leftovers go
    for r, s in pairs.items():
        fin = n(f"fin.{r}")
        b.upd((fin, fA, used), (n(f"fp.{r}"), fA, "A_cmp"))
        b.upd((n(f"fp.{r}"), fB, used), (n(f"fp2.{r}"), fB, "B_cmp"))
        b.upd((n(f"fp2.{r}"), fA), (n(f"fp3.{r}"), "start_cmp"))
        b.upd((n(f"fp3.{r}"), fB), (n(f"frun.{r}"), "start_cmp"))
        b.raw(merge_frame(inner, n(f"mf.{r}"), n(f"frun.{r}"), None))
        b.upd((n(f"frun.{r}"), "end_cmp", "A:equal_cmp"), (n(f"fq.{r}"), fA, W))
        b.upd((n(f"fq.{r}"), "end_cmp", "equal_cmp"), (fin, fB, W))
        b.rst((fin, fA), used, (n(f"fz.{r}"), fA))
        b.rst((n(f"fz.{r}"), fB), used, (n(f"fz2.{r}"), fB))
        b.upd((n(f"fz2.{r}"), fA), (n(f"fz3.{r}"), f"{r}_cmp"))
        b.upd((n(f"fz3.{r}"), fB), ("end_cmp", f"{s}_cmp"))
    return tuple(b.out)


@cache
def check_local(K: int, ell: int, cand: str) -> tuple[Transition, ...]:
    """Check that the child labelled cand dominates every w-child, then delete it."""
    b = _Builder(K, ell, f"ck{K}")
    n = b.n
    seen = n("seen")
    b.upd(("start_chk", cand), (n("c1"), "A_cmp"))
    b.upd((n("c1"), W), ("start_cmp", "B_cmp"))
    b.upd((n("c1"),), (n("e2"),))
    b.include(track_a(comparator_local(K, ell), n("trk")))
    for r in ("big_cmp", "equal_cmp"):
        b.upd(("end_cmp", f"A:{r}"), (n("e1"), "A_cmp"))
    for r in ("small_cmp", "equal_cmp"):
        b.upd((n("e1"), r), (n("e2"), seen))
    b.upd((n("e2"), W), ("start_cmp", "B_cmp"))
    b.rst((n("e2"),), W, (n("cv"),))
    b.upd((n("cv"), seen), (n("cv"), W))
    b.rst((n("cv"),), seen, (n("cv'"),))
    b.upd((n("cv'"), "A_cmp"), ("end_chk",))
    return tuple(b.out)


@cache
def smallest_local(K: int, ell: int) -> tuple[Transition, ...]:
    """Mark a smallest w-child of the host as 'smallest'."""
    b = _Builder(K, ell, f"sm{K}")
    n = b.n
    b.upd(("start_sm", W), (n("s'"), "A_cmp"))
    b.upd((n("s'"), W), ("start_cmp", "B_cmp"))
    b.upd((n("s'"),), (n("e2"),))
    b.include(comparator_local(K, ell))
    b.upd(("end_cmp", "equal_cmp"), (n("e1"), W1))
    b.upd((n("e1"), "equal_cmp"), (n("e2"), "A_cmp"))
    b.upd(("end_cmp", "big_cmp"), (n("e1"), W1))
    b.upd((n("e1"), "small_cmp"), (n("e2"), "A_cmp"))
    b.upd((n("e2"), W), ("start_cmp", "B_cmp"))
    b.rst((n("e2"),), W, (n("decl"),))
    b.upd((n("decl"), "A_cmp"), (n("conv"), "smallest"))
    b.upd((n("conv"), W1), (n("conv"), W))
    b.rst((n("conv"),), W1, (n("conv'"),))
    b.upd((n("conv'"),), ("end_sm",))
    return tuple(b.out)


@cache
def biggest_local(K: int, ell: int) -> tuple[Transition, ...]:
    """Mark a biggest w-child of the host as 'biggest'."""
    b = _Builder(K, ell, f"bg{K}")
    n = b.n
    b.upd(("start_big", W), ("start_copy", "mrkd"))
    b.include(copy_local(K, ell, W1))
    b.upd(("end_copy", W1), (n("c1"), "A_cmp"))
    b.upd((n("c1"), W), ("start_cmp", "B_cmp"))
    b.upd((n("c1"),), (n("e2"),))
    b.include(track_a(comparator_local(K, ell), n("trk")))
    for r in ("big_cmp", "equal_cmp"):
        b.upd(("end_cmp", f"A:{r}"), (n("e1"), "A_cmp"))
    for r in ("small_cmp", "equal_cmp"):
        b.upd((n("e1"), r), (n("e2"), W1))
    b.upd((n("e2"), W), ("start_cmp", "B_cmp"))
    b.rst((n("e2"),), W, (n("cv"),))
    b.upd((n("cv"), W1), (n("cv"), W))
    b.rst((n("cv"),), W1, (n("cv'"),))
    b.upd((n("cv'"), "cpd"), (n("cv''"), "biggest"))
    b.upd((n("cv''"), "A_cmp"), ("end_big",))
    return tuple(b.out)


def _path(first: str, middle: str, last: str, i: int) -> tuple[str, ...]:
    """Labels for v_0..v_i: root label, i-1 ancestors, host label (merged when i = 0)."""
    if i == 0:
        return (first,)
    return (first,) + (middle,) * (i - 1) + (last,)


@cache
def hardy_forward_local(k: int, ell: int) -> tuple[Transition, ...]:
    """Lossy computation of (alpha, n) ->_H steps on C_{alpha,n}."""
    b = _Builder(k, ell, "fw")
    n = b.n
    b.upd((W, W), ("succ",))
    b.upd(("succ",), (W, BUDGET_LABEL))
    b.upd((W,), ("start_sm",))
    for i in range(k):
        phi = (n(f"sm{i}"),) * i
        b.include(smallest_local(k - i, ell), phi)
        if i + 1 < k:
            b.upd(phi + ("end_sm", "smallest"), (n(f"sm{i + 1}"),) * (i + 1) + ("start_sm",))
        dec = _path(n(f"dec{i}"), n(f"cp{i}"), n(f"h{i}"), i)
        cnt = _path(n(f"cnt{i}"), n(f"cp{i}"), n(f"h{i}"), i)
        last = _path(n(f"last{i}"), n(f"cp{i}"), n(f"h{i}"), i)
        cpx = (n(f"cp{i}"),) * i
        # strip one w^0 term from the exponent of the smallest term
        b.upd(phi + ("end_sm", "smallest", W), dec + ("mrkd",))
        # copy the marked term, one '#' per copy
        b.upd(dec, cpx + ("start_copy",))
        b.include(copy_local(k - i, ell), cpx)
        b.upd(cpx + ("end_copy", "cpd"), cnt + ("mrkd",))
        b.upd((n(f"cnt{i}"), BUDGET_LABEL), (dec[0], H1))
        # one more '#' proves at most n-1 copies were made
        b.upd((dec[0], BUDGET_LABEL), (n(f"fin{i}"), H1))
        b.upd((n(f"fin{i}"), H1), (n(f"fin{i}"), BUDGET_LABEL))
        b.rst((n(f"fin{i}"),), H1, (n(f"last{i}"),))
        b.upd(last + ("mrkd",), (W,) * (i + 2))
    return tuple(b.out)


@cache
def hardy_backward_local(k: int, ell: int) -> tuple[Transition, ...]:
    """Lossy inverse computation of ->_H on C_{alpha,n}."""
    b = _Builder(k, ell, "bw")
    n = b.n
    b.upd((W, BUDGET_LABEL), (W, W))
    b.upd((W,), ("start_sm",))
    for i in range(k):
        phi = (n(f"sm{i}"),) * i
        b.include(smallest_local(k - i, ell), phi)
        if i + 1 < k:
            b.upd(phi + ("end_sm", "smallest"), (n(f"sm{i + 1}"),) * (i + 1) + ("start_sm",))
        P = lambda s, i=i: _path(n(f"{s}{i}"), n(f"c{i}"), n(f"h{i}"), i)
        cmx = (n(f"cm{i}"),) * i
        b.upd(phi + ("end_sm", "smallest"), P("dec") + ("A_cmp",))
        # compare A with every other w-child: equal ones are removed, bigger ones kept
        # own host namespace: the comparator inside smallest shares this host
        sc, ec = f"{n('c')}/start_cmp", f"{n('c')}/end_cmp"
        b.upd(P("dec") + (W,), cmx + (sc, "B_cmp"))
        b.include(rehost(comparator_local(k - i, ell), n("c")), cmx)
        b.upd(cmx + (ec, "equal_cmp"), P("rm"))
        b.upd(P("rm") + ("equal_cmp",), P("cn") + ("A_cmp",))
        b.upd((n(f"cn{i}"), BUDGET_LABEL), (P("dec")[0], H1))
        b.upd(cmx + (ec, "big_cmp"), P("ck") + (n("chk"),))
        b.upd(P("ck") + ("small_cmp",), P("dec") + ("A_cmp",))
        # no unchecked sibling may remain
        b.rst(P("dec"), W, P("f1"))
        b.upd(P("f1") + (n("chk"),), P("f1") + (W,))
        b.rst(P("f1"), n("chk"), P("f2"))
        # exactly one '#' may be left over: take it, drop any others
        b.upd((n(f"f2{i}"), BUDGET_LABEL), (n(f"f3{i}"), H1))
        b.rst((n(f"f3{i}"),), BUDGET_LABEL, (n(f"f4{i}"),))
        b.upd((n(f"f4{i}"), H1), (n(f"f4{i}"), BUDGET_LABEL))
        b.rst((n(f"f4{i}"),), H1, (n(f"f5{i}"),))
        b.upd(_path(n(f"f5{i}"), n(f"c{i}"), n(f"h{i}"), i) + ("A_cmp",), (W,) * (i + 2) + (W,))
    return tuple(b.out)


# ---------------------------------------------------------------------------
# Public builders


@dataclass(frozen=True)
class Gadget:
    kind: str
    k: int
    ell: int
    nrcs: Nrcs
    roles: dict = field(hash=False, compare=False)

    @property
    def params(self) -> EncodingParams:
        return EncodingParams(self.k, self.ell)

    def manifest(self) -> str:
        lines = [f"gadget {self.kind} k={self.k} ell={self.ell}",
                 f"states {len(self.nrcs.states)}",
                 f"transitions {len(self.nrcs.transitions)}"]
        for role, labs in self.roles.items():
            lines.append(f"role {role} {' '.join(labs)}")
        return "\n".join(lines) + "\n"


ROLES = {
    "copy": {"start": ["start_copy"], "end": ["end_copy"], "markers": ["mrkd", "cpd"]},
    "comparator": {"start": ["start_cmp"], "end": ["end_cmp"],
                   "markers": ["A_cmp", "B_cmp", "big_cmp", "small_cmp", "equal_cmp"]},
    "smallest": {"start": ["start_sm"], "end": ["end_sm"], "markers": ["smallest"]},
    "biggest": {"start": ["start_big"], "end": ["end_big"], "markers": ["biggest"]},
    "hardyForward": {"start": [W], "end": [W], "markers": [BUDGET_LABEL, "succ"]},
    "hardyBackward": {"start": [W], "end": [W], "markers": [BUDGET_LABEL]},
}

_LOCAL = {
    "copy": lambda k, ell: copy_local(k, ell),
    "comparator": comparator_local,
    "smallest": smallest_local,
    "biggest": biggest_local,
    "hardyForward": hardy_forward_local,
    "hardyBackward": hardy_backward_local,
}


def machine_from(transitions: Sequence[Transition], k: int, extra: Iterable[str] = ()) -> Nrcs:
    states: dict[str, None] = {}
    for lab in extra:
        states[lab] = None
    for t in transitions:
        labs = list(t.src) + list(t.dst)
        if isinstance(t, Reset):
            labs.append(t.reset_label)
        for lab in labs:
            states[lab] = None
    # deterministic, duplicate-free transition list
    uniq = list(dict.fromkeys(transitions))
    return Nrcs(k, tuple(states), tuple(uniq))


@cache
def build(kind: str, k: int, ell: int) -> Gadget:
    if kind not in _LOCAL:
        raise GadgetError(f"unknown gadget kind {kind!r}; expected one of {', '.join(KINDS)}")
    if k < 1 or ell < 1:
        raise GadgetError("k and ell must both be at least 1")
    ts = _LOCAL[kind](k, ell)
    extra = [W] + [make_label(W, j) for j in range(ell + 1)]
    if kind.startswith("hardy"):
        extra.append(BUDGET_LABEL)
    return Gadget(kind, k, ell, machine_from(ts, k, extra), ROLES[kind])


# ---------------------------------------------------------------------------
# Inputs and perfect outputs


def _relabel_root(t: Tree, base: str) -> Tree:
    _, ann = split_label(t.label)
    return Tree(make_label(base, ann), t.children)


def _base(label: str) -> str:
    return split_label(label)[0]


def _exp(node: Tree, p: EncodingParams) -> Ordinal:
    return subtree_exponent(node, 1, p)


def make_input(kind: str, p: EncodingParams, alpha: Ordinal, beta: Ordinal | None = None,
               n: int = 0) -> Tree:
    """Initial encoder for a gadget kind built from T_alpha (and T_beta)."""
    from .ordinal_encoding import encode_tree
    if kind.startswith("hardy"):
        return make_hardy_config(alpha, n, p)
    t = encode_tree(alpha, p)
    kids = list(t.children)
    if kind == "smallest":
        return Tree("start_sm", kids)
    if kind == "biggest":
        return Tree("start_big", kids)
    if kind == "copy":
        if not kids:
            raise GadgetError("copy needs a child to mark")
        return Tree("start_copy", [_relabel_root(kids[0], "mrkd")] + kids[1:])
    if kind == "comparator":
        if len(kids) < 2:
            raise GadgetError("comparator needs two children")
        return Tree("start_cmp", [_relabel_root(kids[0], "A_cmp"),
                                  _relabel_root(kids[1], "B_cmp")] + kids[2:])
    raise GadgetError(f"unknown kind {kind!r}")


def encoder_inputs(kind: str, p: EncodingParams, max_nodes: int) -> list[Tree]:
    """Every distinct input encoder of the kind with at most max_nodes nodes."""
    from .ordinal_encoding import encodable_ordinals, encode_tree
    out: dict[Tree, None] = {}
    for a in encodable_ordinals(p, max_nodes):
        t = encode_tree(a, p)
        kids = t.children
        if kind in ("smallest", "biggest"):
            out[make_input(kind, p, a)] = None
        elif kind == "copy":
            for i in range(len(kids)):
                rest = kids[:i] + kids[i + 1:]
                out[Tree("start_copy", (_relabel_root(kids[i], "mrkd"),) + rest)] = None
        elif kind == "comparator":
            for i in range(len(kids)):
                for j in range(len(kids)):
                    if i == j:
                        continue
                    rest = [c for x, c in enumerate(kids) if x not in (i, j)]
                    out[Tree("start_cmp", [_relabel_root(kids[i], "A_cmp"),
                                           _relabel_root(kids[j], "B_cmp")] + rest)] = None
    return list(out)


def perfect_output(kind: str, inp: Tree, p: EncodingParams) -> Tree:
    """The perfect encoder a complete run should produce (computed directly)."""
    kids = list(inp.children)
    if kind in ("smallest", "biggest"):
        cand = [c for c in kids if _base(c.label) == W]
        if not cand:
            raise GadgetError(f"{kind} needs at least one w-child")
        sign = 1 if kind == "biggest" else -1
        best = cand[0]
        for c in cand[1:]:
            if compare(_exp(c, p), _exp(best, p)) * sign > 0:
                best = c
        kids.remove(best)
        mark = "smallest" if kind == "smallest" else "biggest"
        return Tree("end_sm" if kind == "smallest" else "end_big",
                    kids + [_relabel_root(best, mark)])
    if kind == "copy":
        marked = [c for c in kids if _base(c.label) == "mrkd"]
        if len(marked) != 1:
            raise GadgetError("copy input needs exactly one mrkd child")
        v = marked[0]
        kids.remove(v)
        return Tree("end_copy", kids + [_relabel_root(v, W), _relabel_root(v, "cpd")])
    if kind == "comparator":
        a = [c for c in kids if _base(c.label) == "A_cmp"]
        bb = [c for c in kids if _base(c.label) == "B_cmp"]
        if len(a) != 1 or len(bb) != 1:
            raise GadgetError("comparator input needs one A_cmp and one B_cmp child")
        ea, eb = _exp(a[0], p), _exp(bb[0], p)
        c = compare(ea, eb)
        kids.remove(a[0])
        kids.remove(bb[0])
        return Tree("end_cmp", kids + [_relabel_root(a[0], RESULT[c]),
                                       _relabel_root(bb[0], RESULT[-c])])
    if kind == "hardyForward":
        from .ordinal_encoding import decode_hardy_config
        alpha, n = decode_hardy_config(inp, p)
        final = hardy_fold(HardyState(alpha, n))[-1]
        return make_hardy_config(final.alpha, final.n, p)
    raise GadgetError(f"no single perfect output for {kind!r}")


# ---------------------------------------------------------------------------
# Encoder predicates


def _child_ok(out_child: Tree, ref_child: Tree, exact: bool) -> bool:
    a = _relabel_root(out_child, "x")
    b = _relabel_root(ref_child, "x")
    return a == b if exact else leq_induced(a, b)


def _match_children(outs: list[Tree], refs: list[Tree], exact: bool, allow_missing: bool) -> list[int] | None:
    """Injective assignment of output children to reference children."""
    from .nrcs import _match
    if not allow_missing and len(outs) != len(refs):
        return None
    return _match(outs, refs, lambda o, r: _child_ok(o, r, exact))


def _split_fixed(t: Tree, movable: set[str]) -> tuple[list[Tree], list[Tree]]:
    fixed = [c for c in t.children if _base(c.label) not in movable]
    move = [c for c in t.children if _base(c.label) in movable]
    return fixed, move


def validate_encoder(kind: str, out: Tree, ref: Tree, p: EncodingParams, perfect: bool = False) -> bool:
    """Does ``out`` satisfy the (lossy or perfect) encoder definition relative to ``ref``?

    For Hardy kinds ``ref`` is the starting C_{alpha,n} and the check is the
    H-bound on a terminal configuration with root w.
    """
    try:
        return _validate(kind, out, ref, p, perfect)
    except EncodingError:
        return False


def _validate(kind, out, ref, p, perfect):
    if kind in ("hardyForward", "hardyBackward"):
        return _hardy_ok(out, ref, p, exact_value=perfect)
    if kind in ("smallest", "biggest"):
        mark = "smallest" if kind == "smallest" else "biggest"
        end = "end_sm" if kind == "smallest" else "end_big"
        if out.label != end:
            return False
        fixed_o, move_o = _split_fixed(out, {W, mark})
        fixed_r, move_r = _split_fixed(ref, {W})
        if sorted(fixed_o) != sorted(fixed_r):
            return False
        if _match_children(move_o, move_r, perfect, allow_missing=not perfect) is None:
            return False
        marked = [c for c in move_o if _base(c.label) == mark]
        if not move_o:
            return not perfect
        if len(marked) != 1:
            return False
        em = _exp(marked[0], p)
        sign = -1 if kind == "smallest" else 1
        return all(compare(_exp(c, p), em) * sign <= 0 for c in move_o)
    if kind == "copy":
        if out.label != "end_copy":
            return False
        marked = [c for c in ref.children if _base(c.label) == "mrkd"]
        if len(marked) != 1:
            return False
        v = marked[0]
        fixed_r = list(ref.children)
        fixed_r.remove(v)
        outs = list(out.children)
        cpds = [c for c in outs if _base(c.label) == "cpd"]
        if len(cpds) != 1:
            return False
        outs.remove(cpds[0])
        # the original is now one of the w-children; the rest must be untouched
        for cand in [c for c in outs if _base(c.label) == W]:
            rest = list(outs)
            rest.remove(cand)
            if sorted(rest) != sorted(fixed_r):
                continue
            if perfect:
                if _child_ok(cand, v, True) and _child_ok(cpds[0], v, True):
                    return True
            elif _child_ok(cand, cpds[0], False) and _child_ok(cpds[0], v, False):
                return True
        return False
    if kind == "comparator":
        if out.label != "end_cmp":
            return False
        a = [c for c in ref.children if _base(c.label) == "A_cmp"]
        b = [c for c in ref.children if _base(c.label) == "B_cmp"]
        if len(a) != 1 or len(b) != 1:
            return False
        fixed_r = [c for c in ref.children if c not in (a[0], b[0])]
        res = [c for c in out.children if _base(c.label) in ("big_cmp", "small_cmp", "equal_cmp")]
        rest = [c for c in out.children if c not in res]
        if len(res) != 2 or sorted(rest) != sorted(fixed_r):
            return False
        for x, y in ((res[0], res[1]), (res[1], res[0])):
            if not (_child_ok(x, a[0], perfect) and _child_ok(y, b[0], perfect)):
                continue
            c = compare(_exp(x, p), _exp(y, p))
            if _base(x.label) == RESULT[c] and _base(y.label) == RESULT[-c]:
                return True
        return False
    raise GadgetError(f"unknown kind {kind!r}")


def _is_encoder_label(label: str) -> bool:
    return _base(label) == W or label == BUDGET_LABEL


def _hardy_ok(out: Tree, ref: Tree, p: EncodingParams, exact_value: bool) -> bool:
    if out.label != W:
        return False
    if any(not _is_encoder_label(lab) for lab in out.labels()):
        return False
    from .ordinal_encoding import decode_hardy_config
    a0, n0 = decode_hardy_config(ref, p)
    a1, n1 = decode_hardy_config(out, p)
    try:
        h0 = hardy_eval(SUCC, a0, n0, 10**6)
        h1 = hardy_eval(SUCC, a1, n1, 10**6)
    except BudgetExhausted:
        return False
    return h1 == h0 if exact_value else h1 <= h0


# ---------------------------------------------------------------------------
# Runs


Run = list[tuple[int, Anchor]]


def synthesize_perfect_run(kind: str, inp: Tree, p: EncodingParams, goal: Tree | None = None,
                           max_states: int = 200_000) -> Run:
    """A run from inp to its perfect output that never loses information.

    The nondeterministic choices are resolved by a breadth-first search
    restricted to honest steps (resets that remove nothing), aimed at the
    independently computed perfect output.
    """
    g = build(kind, p.k, p.ell)
    m = g.nrcs
    if goal is None:
        goal = perfect_output(kind, inp, p)
    m.check_config(inp, "input")
    parent: dict[Tree, tuple[Tree | None, tuple[int, Anchor] | None]] = {inp: (None, None)}
    queue = deque([inp])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            run: Run = []
            node = cur
            while parent[node][0] is not None:
                prev, step = parent[node]
                run.append(step)
                node = prev
            return run[::-1]
        for s in successors(m, cur):
            t = m.transitions[s.index]
            if removed_by(cur, t, s.anchor):
                continue
            if s.result in parent:
                continue
            parent[s.result] = (cur, (s.index, s.anchor))
            if len(parent) > max_states:
                raise GadgetError("perfect-run search exceeded its state cap")
            queue.append(s.result)
    raise GadgetError(f"no perfect run of {kind} from {inp.key}")


def replay_run(kind: str, inp: Tree, p: EncodingParams, run: Run) -> Tree:
    m = build(kind, p.k, p.ell).nrcs
    cur = inp
    for idx, anchor in run:
        cur = apply_at(m, cur, m.transitions[idx], anchor)
    return cur


@dataclass
class SoundnessReport:
    explored: int
    terminals: int
    violations: list[Tree]
    cutoff: bool

    @property
    def ok(self) -> bool:
        return not self.violations and not self.cutoff


def terminal_label(kind: str) -> str:
    return {"copy": "end_copy", "comparator": "end_cmp", "smallest": "end_sm",
            "biggest": "end_big"}.get(kind, W)


def check_soundness_by_search(kind: str, inp: Tree, p: EncodingParams,
                              frontier_cap: int = 100_000) -> SoundnessReport:
    """Explore every reachable configuration and validate all terminal ones."""
    m = build(kind, p.k, p.ell).nrcs
    end = terminal_label(kind)
    seen = {inp}
    queue = deque([inp])
    terminals = 0
    bad: list[Tree] = []
    cutoff = False
    while queue:
        cur = queue.popleft()
        if cur.label == end and not (kind.startswith("hardy") and cur is inp):
            terminals += 1
            if not validate_encoder(kind, cur, inp, p):
                bad.append(cur)
        for s in successors(m, cur):
            if s.result not in seen:
                if len(seen) >= frontier_cap:
                    cutoff = True
                    break
                seen.add(s.result)
                queue.append(s.result)
        if cutoff:
            break
    return SoundnessReport(len(seen), terminals, bad, cutoff)

