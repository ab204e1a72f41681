"""Property-based checks with hypothesis."""
from hypothesis import given, settings, strategies as st

from nrcskit.nrcs import Tree, leq_induced, parse_tree, render_tree
from nrcskit.ordinal import (Ordinal, compare, natural_sum, parse_ordinal,
                             render_ordinal)


def ordinals(depth=2):
    base = st.integers(0, 4).map(Ordinal.nat)
    if depth == 0:
        return base
    terms = st.lists(st.tuples(ordinals(depth - 1), st.integers(1, 3)), max_size=3)
    return st.one_of(base, terms.map(Ordinal))


labels = st.sampled_from(["a", "b", "c"])
trees = st.recursive(labels.map(Tree),
                     lambda kids: st.builds(Tree, labels, st.lists(kids, max_size=3)),
                     max_leaves=6)


@given(ordinals(), ordinals())
def test_natural_sum_commutes(a, b):
    assert natural_sum(a, b) == natural_sum(b, a)


@given(ordinals(), ordinals(), ordinals())
def test_natural_sum_associates_and_is_monotone(a, b, c):
    assert natural_sum(natural_sum(a, b), c) == natural_sum(a, natural_sum(b, c))
    assert compare(natural_sum(a, b), a) >= 0


@given(ordinals(), ordinals())
def test_compare_antisymmetric(a, b):
    assert compare(a, b) == -compare(b, a)
    assert (compare(a, b) == 0) == (a == b)


@given(ordinals())
def test_ordinal_render_round_trip(a):
    assert parse_ordinal(render_ordinal(a)) == a


@given(trees)
def test_tree_render_round_trip(t):
    assert parse_tree(render_tree(t)) == t


@given(trees)
def test_leq_reflexive(t):
    assert leq_induced(t, t)


@settings(max_examples=60)
@given(trees, trees)
def test_leq_respects_size(a, b):
    if leq_induced(a, b):
        assert a.size <= b.size
        if leq_induced(b, a):
            assert a == b
