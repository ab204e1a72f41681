import itertools
import random

import pytest

from nrcskit.coverability import enumerate_trees
from nrcskit.nmwqo import (G0, Bag, BadSequenceQuery, Multi, ShapeError, Sum, Tagged,
                           canonical_expr, delta, derivative_D, flatten, gamma, iter_exprs, leq,
                           m_bound, max_bad_sequence, norm, order_type, parse_elem, parse_expr,
                           render_elem, residual_bound_expr, slice_elements, tree_space_expr,
                           tree_to_element)
from nrcskit.nrcs import Tree, leq_induced, parse_tree
from nrcskit.ordinal import (DOUBLE, ONE, ZERO, Ordinal, iter_ordinals, parse_ordinal, tower_layer, is_lean)

E = Bag()
L, R = (lambda x: Tagged("L", x)), (lambda x: Tagged("R", x))


def o(text):
    return parse_ordinal(text)


def test_norm_examples():
    assert norm(Multi(G0), E) == 0
    assert norm(Multi(gamma(2)), Bag([L(E), L(E), R(E)])) == 3
    assert norm(gamma(2), R(E)) == 0


def test_norm_shape_mismatch():
    with pytest.raises(ShapeError):
        norm(Multi(G0), L(E))


def test_leq_examples():
    assert leq(Multi(Multi(G0)), E, Bag([E]))
    assert not leq(Multi(Multi(G0)), Bag([E, E]), Bag([E]))
    assert not leq(gamma(2), L(E), R(E))


def test_leq_preorder_on_slices():
    for a in [Multi(gamma(2)), Multi(Multi(Multi(G0))), Sum(Multi(G0), Multi(Multi(G0)))]:
        xs = slice_elements(a, 3)
        for x in xs:
            assert leq(a, x, x)
        for x, y, z in itertools.product(xs[:12], repeat=3):
            if leq(a, x, y) and leq(a, y, z):
                assert leq(a, x, z)


def test_order_type_examples():
    assert order_type(G0) == ZERO
    assert order_type(Multi(G0)) == ONE
    assert order_type(Multi(gamma(3))) == o("w^3")


def test_canonical_expr_examples():
    assert canonical_expr(ZERO) == G0
    assert canonical_expr(ONE) == Multi(G0)
    assert canonical_expr(o("w+1")) == Sum(Multi(Multi(G0)), Multi(G0))


def test_order_type_round_trip():
    for a in iter_ordinals(4, 2):
        assert order_type(canonical_expr(a)) == a


def test_residual_examples():
    assert residual_bound_expr(Multi(G0), E, 2) == G0
    r = residual_bound_expr(Multi(Multi(G0)), Bag([E, E]), 3)
    assert order_type(r) == order_type(gamma(2))
    assert len(flatten(r)) == 2
    r = residual_bound_expr(Sum(Multi(G0), Multi(G0)), L(E), 2)
    assert r == Sum(Multi(G0), G0)


def test_residual_rejects():
    with pytest.raises(ShapeError):
        residual_bound_expr(G0, E, 1)
    with pytest.raises(ValueError):
        residual_bound_expr(Multi(Multi(G0)), Bag([E, E, E]), 2)


def test_derivative_examples():
    assert derivative_D(ONE, 4) == ZERO
    assert derivative_D(o("w"), 3) == Ordinal.nat(3)
    assert derivative_D(o("w^w"), 2) == o("w^3*2")
    assert derivative_D(o("w^2"), 2) == o("w*4")
    with pytest.raises(ValueError):
        derivative_D(o("w+1"), 2)
    with pytest.raises(ValueError):
        derivative_D(o("w"), 0)


def test_delta_examples():
    assert delta(o("w"), 3) == {Ordinal.nat(3)}
    assert delta(o("w^2+w"), 2) == {o("w*5"), o("w^2+2")}
    assert delta(Ordinal.nat(2), 5) == {ONE}
    with pytest.raises(ValueError):
        delta(ZERO, 1)


def test_delta_descends_and_stays_lean():
    ell = 2
    for a in iter_ordinals(6, ell, below=o("w^(w^w)")):
        if a.is_zero():
            continue
        k = max(tower_layer(a), 1)
        for n in (1, 2, 3):
            for b in delta(a, n):
                assert b < a
                assert is_lean(b, ell + ell * n * k)


def test_m_bound_examples():
    assert m_bound(ZERO, DOUBLE, 2) == 0
    assert m_bound(Ordinal.nat(3), DOUBLE, 2) == 3
    assert m_bound(o("w"), DOUBLE, 4) == 5


def test_bad_sequence_examples():
    r = max_bad_sequence(BadSequenceQuery(Multi(G0), DOUBLE, 0, 10))
    assert r.length == 1
    r = max_bad_sequence(BadSequenceQuery(Multi(gamma(1)), DOUBLE, 3, 10))
    assert r.length == 4
    assert [norm(Multi(gamma(1)), x) for x in r.witness] == [3, 2, 1, 0]
    r = max_bad_sequence(BadSequenceQuery(gamma(2), DOUBLE, 0, 10))
    assert r.length == 2 and not r.cap_hit


def test_bad_sequence_cap():
    r = max_bad_sequence(BadSequenceQuery(Multi(Multi(gamma(1))), DOUBLE, 2, 3))
    assert r.cap_hit and r.length == 3
    with pytest.raises(ValueError):
        BadSequenceQuery(G0, DOUBLE, 1, 0)


def test_bad_sequence_witness_is_bad_and_controlled():
    q = BadSequenceQuery(Sum(Multi(G0), Multi(Multi(G0))), DOUBLE, 2, 40)
    r = max_bad_sequence(q)
    bound = 2
    for i, x in enumerate(r.witness):
        assert norm(q.expr, x) <= bound
        bound *= 2
        for y in r.witness[:i]:
            assert not leq(q.expr, y, x)


def test_length_below_m_bound():
    for a in iter_exprs(4):
        if isinstance(a, type(G0)) or order_type(a) >= o("w^w"):
            continue
        for n in (1, 2):
            r = max_bad_sequence(BadSequenceQuery(a, DOUBLE, n, 40))
            assert not r.cap_hit
            assert r.length <= m_bound(order_type(a), DOUBLE, n)


def _longest_bad_avoiding(a, anchor, n, g, cap=30):
    # brute force over {x : anchor is not below x}
    best = 0
    seq = []

    def dfs(bound):
        nonlocal best
        best = max(best, len(seq))
        if len(seq) >= cap:
            return
        for x in slice_elements(a, bound):
            if leq(a, anchor, x) or any(leq(a, y, x) for y in seq):
                continue
            seq.append(x)
            dfs(g(bound))
            seq.pop()

    dfs(n)
    return best


def test_residual_consistency():
    cases = [(Multi(Multi(G0)), (1, 2, 3)), (Multi(gamma(2)), (1,)),
             (Sum(Multi(G0), Multi(Multi(G0))), (1, 2)), (Multi(Multi(Multi(G0))), (1,))]
    for a, ns in cases:
        for n in ns:
            for x in slice_elements(a, n):
                r = residual_bound_expr(a, x, n)
                lhs = _longest_bad_avoiding(a, x, n, DOUBLE)
                if isinstance(r, type(G0)):
                    assert lhs == 0
                    continue
                rhs = max_bad_sequence(BadSequenceQuery(r, DOUBLE, n, 40))
                assert lhs <= rhs.length
                assert any(order_type(r) <= b for b in delta(order_type(a), n))


def test_tree_to_element_examples():
    e = tree_to_element(Tree("a"), 1, ["a"])
    assert e == E
    e = tree_to_element(Tree("a"), 1, ["a", "b"])
    assert e == L(E)
    e = tree_to_element(parse_tree("a(b)"), 1, ["a", "b"])
    assert e == L(Bag([R(E)]))
    sample = parse_tree("q0(q1(q3),q2,q1(q2,q2))")
    states = ["q0", "q1", "q2", "q3"]
    e = tree_to_element(sample, 2, states)
    assert norm(tree_space_expr(2, 4), e) <= sample.size
    with pytest.raises(ShapeError):
        tree_to_element(sample, 1, states)


def test_embedding_law_small():
    rng = random.Random(3)
    trees = list(enumerate_trees(["a", "b"], 4, 2))
    for _ in range(300):
        c, d = rng.choice(trees), rng.choice(trees)
        ec, ed = tree_to_element(c, 2, ["a", "b"]), tree_to_element(d, 2, ["a", "b"])
        assert leq(None, ec, ed) == leq_induced(c, d)


def test_parse_render():
    assert parse_expr("G0") == G0
    assert parse_expr("G2") == gamma(2)
    assert parse_expr("M[G1]*2") == Sum(Multi(Multi(G0)), Multi(Multi(G0)))
    assert parse_expr("(G0 + M[G0])") == Sum(G0, Multi(G0))
    for a in iter_exprs(4):
        assert parse_expr(str(a)) == a
    x = Bag([L(E), R(Bag([E]))])
    assert parse_elem(render_elem(x)) == x
