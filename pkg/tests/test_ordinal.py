import itertools

import pytest

from nrcskit.ordinal import (DOUBLE, OMEGA, ONE, SUCC, ZERO, BudgetExhausted, ControlFunction,
                             Ordinal, OrdinalSyntaxError, cichon_eval, compare, fast_growing_eval,
                             fundamental_sequence, hardy_eval, is_lean, iter_ordinals,
                             natural_sum, omega_tower, parse_control, parse_ordinal,
                             predecessor_P, render_ordinal)


def o(text):
    return parse_ordinal(text)


# -- oracle: ordinals below w^w as coefficient vectors -------------------------

def vec(a, width=6):
    v = [0] * width
    for e, c in a.terms:
        assert e.is_finite()
        v[e.finite_value()] = c
    return tuple(reversed(v))


def test_compare_examples():
    assert compare(ZERO, ONE) == -1
    assert compare(o("w^2"), o("w^w")) == -1
    assert compare(o("w^w*2+1"), o("w^w*2+1")) == 0


def test_compare_matches_vector_order_below_w_w():
    pool = [a for a in iter_ordinals(6, 3) if a < o("w^w")][:150]
    assert len(pool) > 50
    for a, b in itertools.product(pool, repeat=2):
        expect = (vec(a) > vec(b)) - (vec(a) < vec(b))
        assert compare(a, b) == expect


def test_compare_total_order_on_pool():
    pool = list(iter_ordinals(6, 2))
    assert len(pool) >= 1000
    srt = sorted(pool)
    for x, y in itertools.pairwise(srt):
        assert x < y
        assert not y < x
    # spot-check transitivity on a slice
    sl = srt[::37]
    for a, b, c in itertools.product(sl, repeat=3):
        if a <= b <= c:
            assert a <= c


def test_natural_sum_examples():
    assert natural_sum(OMEGA, ONE) == o("w+1")
    assert natural_sum(ONE, OMEGA) == o("w+1")
    assert natural_sum(o("w^w+1"), OMEGA) == o("w^w+w+1")


def test_natural_sum_laws():
    pool = list(iter_ordinals(2, 2))[:60]
    for a in pool:
        assert natural_sum(a, ZERO) == a
        for b in pool[:20]:
            assert natural_sum(a, b) == natural_sum(b, a)
            for c in pool[:6]:
                assert natural_sum(natural_sum(a, b), c) == natural_sum(a, natural_sum(b, c))


def test_natural_sum_adds_vectors():
    pool = [a for a in iter_ordinals(5, 2) if a < o("w^w")]
    for a, b in itertools.product(pool[:40], repeat=2):
        assert vec(natural_sum(a, b)) == tuple(x + y for x, y in zip(vec(a), vec(b)))


def test_fundamental_sequence_examples():
    assert fundamental_sequence(OMEGA, 5) == Ordinal.nat(5)
    assert fundamental_sequence(o("w^w"), 2) == o("w^2")
    assert fundamental_sequence(o("w^2+w"), 3) == o("w^2+3")


def test_fundamental_sequence_rejects_non_limits():
    for a in (ZERO, ONE, o("w+1")):
        with pytest.raises(ValueError):
            fundamental_sequence(a, 2)


def test_fundamental_sequence_below_and_increasing():
    for lam in iter_ordinals(4, 2):
        if not lam.is_limit():
            continue
        prev = None
        for x in range(1, 5):
            f = fundamental_sequence(lam, x)
            assert f < lam
            if prev is not None:
                assert prev < f
            prev = f


def test_predecessor_P():
    assert predecessor_P(Ordinal.nat(5), 2) == Ordinal.nat(4)
    assert predecessor_P(OMEGA, 3) == Ordinal.nat(2)
    assert predecessor_P(o("w^2"), 2) == o("w+1")
    with pytest.raises(ValueError):
        predecessor_P(ZERO, 1)


# -- hierarchies --------------------------------------------------------------

def hardy_oracle(alpha, x):
    # H^a(x) for a < w^3, via closed forms H^(w^2*c + w*b + n)(x)
    v = vec(alpha, 3)
    c2, c1, c0 = v
    x += c0
    for _ in range(c1):
        x = 2 * x
    for _ in range(c2):
        x = x * 2 ** x
    return x


def _pred(a):
    *head, (e, c) = a.terms
    return Ordinal(list(head) + ([(e, c - 1)] if c > 1 else []))


def test_hardy_examples():
    assert hardy_eval(SUCC, ZERO, 7) == 7
    assert hardy_eval(SUCC, Ordinal.nat(3), 5, budget=10) == 8
    assert hardy_eval(SUCC, o("w^2"), 3, budget=10**4) == 24


def test_hardy_against_recursive_oracle():
    for a in iter_ordinals(4, 2):
        if a > o("w^2+w*2+2"):
            continue
        for x in range(4):
            assert hardy_eval(SUCC, a, x) == hardy_oracle(a, x)


def test_hardy_budget():
    with pytest.raises(BudgetExhausted):
        hardy_eval(SUCC, o("w^w"), 5, budget=100)


def test_cichon_examples():
    assert cichon_eval(SUCC, ZERO, 9) == 0
    assert cichon_eval(SUCC, Ordinal.nat(3), 5, budget=10) == 3
    assert cichon_eval(SUCC, OMEGA, 4, budget=100) == 4


def test_cichon_counts_hardy_steps_for_succ():
    # with h = succ, H^a(x) = x + h_a(x)
    for a in iter_ordinals(3, 2):
        if a > o("w^2"):
            continue
        for x in range(1, 4):
            assert hardy_eval(SUCC, a, x) == x + cichon_eval(SUCC, a, x)


def test_fast_growing_examples():
    assert fast_growing_eval(SUCC, ZERO, 6) == 7
    assert fast_growing_eval(SUCC, ONE, 5, budget=100) == 10
    assert fast_growing_eval(SUCC, Ordinal.nat(2), 3, budget=100) == 24


def test_fast_growing_omega_diagonal():
    assert fast_growing_eval(SUCC, OMEGA, 2) == fast_growing_eval(SUCC, Ordinal.nat(2), 2)


def test_omega_tower():
    assert omega_tower(1) == OMEGA
    assert omega_tower(2) == o("w^w")
    assert omega_tower(3) == o("w^(w^w)")
    with pytest.raises(ValueError):
        omega_tower(0)


def test_is_lean():
    assert is_lean(ZERO, 0)
    assert not is_lean(o("w^2*3"), 2)
    assert is_lean(o("w^(w*2)*2"), 2)


def test_leanness_monotone():
    for a in iter_ordinals(3, 3):
        for ell in range(4):
            if is_lean(a, ell):
                assert is_lean(a, ell + 1)


def test_parse_examples():
    a = o("w^(w^2+1)*3 + w*2 + 5")
    assert a.terms[0][1] == 3 and a.terms[0][0] == o("w^2+1")
    assert a.terms[-1] == (ZERO, 5)
    assert o("0") == ZERO
    assert o("1 + w") == o("w+1")
    assert o("ω") == OMEGA


def test_parse_error_position():
    with pytest.raises(OrdinalSyntaxError):
        o("w^")
    with pytest.raises(OrdinalSyntaxError):
        o("w + x")


def test_render_round_trip():
    for a in iter_ordinals(4, 2):
        assert parse_ordinal(render_ordinal(a)) == a


def test_control_functions():
    assert parse_control("2x") is DOUBLE
    assert parse_control("succ") is SUCC
    assert parse_control("3x")(4) == 12
    with pytest.raises(ValueError):
        ControlFunction(lambda x: x // 2, "half")
    with pytest.raises(ValueError):
        parse_control("x^2")
