import itertools

import pytest

from nrcskit import corpus
from nrcskit.nrcs import leq_induced, parse_tree
from nrcskit.ordinal import SUCC, ZERO, Ordinal, hardy_eval, parse_ordinal
from nrcskit.ordinal_encoding import (EncodingError, EncodingParams, HardyState,
                                      decode_hardy_config, decode_tree, encodable_ordinals,
                                      encode_tree, hardy_fold, hardy_rewrite, make_hardy_config)

P12 = EncodingParams(1, 2)


def o(text):
    return parse_ordinal(text)


def test_params():
    assert P12.bound == o("w^2")
    assert EncodingParams(2, 2).bound == o("w^(w^2)")
    with pytest.raises(ValueError):
        EncodingParams(0, 2)


def test_encoder_tree_examples():
    assert encode_tree(Ordinal.nat(1), P12) == parse_tree("w(w@w0)")
    assert encode_tree(o("w+1"), P12) == parse_tree("w(w@w1,w@w0)")
    assert encode_tree(o("w"), EncodingParams(2, 2)) == parse_tree("w(w(w@w0))")


def test_bundled_encoders():
    p, rows = corpus.parse_encoders(corpus.read("encoders.txt"))
    assert p == P12
    for alpha, tree in rows:
        assert encode_tree(alpha, p) == tree
        assert decode_tree(tree, p) == alpha


def test_encode_rejects():
    with pytest.raises(EncodingError):
        encode_tree(ZERO, P12)
    with pytest.raises(EncodingError):
        encode_tree(o("w^2+1"), P12)


def test_decode_examples():
    assert decode_tree(parse_tree("w(w@w0)"), P12) == Ordinal.nat(1)
    assert decode_tree(parse_tree("x(y@w1,z@w0)"), P12) == o("w+1")


@pytest.mark.parametrize("k,ell", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_round_trip(k, ell):
    p = EncodingParams(k, ell)
    pool = encodable_ordinals(p, 7)
    assert len(pool) > 5
    for a in pool:
        t = encode_tree(a, p)
        assert t.height <= k
        assert decode_tree(t, p) == a


def test_make_hardy_config_examples():
    assert make_hardy_config(ZERO, 2, P12) == parse_tree("w(#,#)")
    assert make_hardy_config(Ordinal.nat(1), 0, P12) == parse_tree("w(w@w0)")
    assert make_hardy_config(o("w+1"), 1, P12) == parse_tree("w(w@w1,w@w0,#)")
    assert decode_hardy_config(parse_tree("w(w@w1,w@w0,#)"), P12) == (o("w+1"), 1)
    with pytest.raises(EncodingError):
        make_hardy_config(o("w^3"), 1, P12)


def test_hardy_rewrite_examples():
    assert hardy_rewrite(HardyState(Ordinal.nat(3), 5)) == HardyState(Ordinal.nat(2), 6)
    assert hardy_rewrite(HardyState(o("w"), 4)) == HardyState(Ordinal.nat(4), 4)
    assert hardy_fold(HardyState(o("w^2"), 3))[-1] == HardyState(ZERO, 24)
    with pytest.raises(ValueError):
        hardy_rewrite(HardyState(ZERO, 1))


def test_fold_agrees_with_hardy_eval():
    for a in encodable_ordinals(P12, 6) + [ZERO]:
        for n in range(4):
            assert hardy_fold(HardyState(a, n))[-1].n == hardy_eval(SUCC, a, n)


def test_embedding_refines_order_and_hardy_monotone():
    pool = encodable_ordinals(P12, 6)
    values = {(a, n): hardy_eval(SUCC, a, n) for a in pool for n in range(5)}
    for a, b in itertools.product(pool, repeat=2):
        if not leq_induced(encode_tree(a, P12), encode_tree(b, P12)):
            continue
        assert a <= b
        for n, m in itertools.product(range(5), repeat=2):
            if n <= m:
                assert values[(b, m)] >= values[(a, n)]
