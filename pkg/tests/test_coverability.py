import random

import pytest

from nrcskit.coverability import (IterationCapExceeded, OracleGuardError, backward_coverability,
                                  check_certificate, covers, forward_explore, minimize,
                                  pre_basis, pre_basis_oracle, same_upward_closure)
from nrcskit import corpus
from nrcskit.nrcs import Nrcs, Reset, Tree, Update, leq_induced, parse_nrcs, successors
from nrcskit.nrcs import parse_tree as T
from nrcskit.sampling import random_instance

SAMPLE_RUN = [(0, (0,)), (1, ()), (2, ())]


@pytest.fixture(scope="module")
def sample_file():
    return parse_nrcs(corpus.read("sample.nrcs"))


def test_minimize_examples():
    assert minimize([T("q"), T("q(p)")]) == [T("q")]
    assert set(minimize([T("q(p)"), T("q(r)")])) == {T("q(p)"), T("q(r)")}
    assert minimize([]) == []


def test_pre_basis_examples():
    ren = Nrcs(1, ("p", "q"), (Update(("p",), ("q",)),))
    assert pre_basis(ren, T("q")) == [T("p")]
    assert same_upward_closure(pre_basis(ren, T("q")), pre_basis_oracle(ren, T("q")))
    inc = Nrcs(1, ("p", "a"), (Update(("p",), ("p", "a")),))
    assert T("p") in pre_basis(inc, T("p(a)"))
    none = Nrcs(1, ("p", "q"), (Update(("p",), ("p",)),))
    assert pre_basis(none, T("q")) == []
    assert pre_basis_oracle(Nrcs(1, ("p", "q"), ()), T("q")) == []


def test_oracle_guard():
    n = Nrcs(2, ("a", "b", "c", "d"), (Update(("a",), ("b",)),))
    with pytest.raises(OracleGuardError):
        pre_basis_oracle(n, T("b(a(a),b(b),c)"), guard=1000)


def test_pre_basis_sound_bounded_and_matches_oracle():
    rng = random.Random(5)
    done = 0
    while done < 40:
        n, _, c = random_instance(rng, q_max=3, t_max=4, node_max=3)
        try:
            ref = pre_basis_oracle(n, c, guard=20_000)
        except OracleGuardError:
            continue
        got = pre_basis(n, c)
        assert same_upward_closure(got, ref)
        for b in got:
            assert b.size <= c.size + n.k + 1
            assert any(leq_induced(c, s.result) for s in successors(n, b))
        done += 1


def test_sample_backward(sample_file):
    v = backward_coverability(sample_file.nrcs, sample_file.init, sample_file.target)
    assert v.coverable
    assert check_certificate(sample_file.nrcs, sample_file.init, sample_file.target, v.run)
    # the three-step run is also a valid certificate
    assert check_certificate(sample_file.nrcs, sample_file.init, sample_file.target, SAMPLE_RUN)


def test_sample_forward(sample_file):
    r = forward_explore(sample_file.nrcs, sample_file.init, sample_file.target, max_nodes=10)
    assert r.status == "found"
    assert check_certificate(sample_file.nrcs, sample_file.init, sample_file.target, r.run)


def test_target_equals_init():
    n = Nrcs(1, ("a",), ())
    v = backward_coverability(n, T("a(a)"), T("a(a)"))
    assert v.coverable and v.iterations == 0 and v.run == []


def test_no_transitions_not_coverable():
    n = Nrcs(1, ("a", "b"), ())
    v = backward_coverability(n, T("a"), T("b"))
    assert not v.coverable and v.iterations == 1
    assert v.basis == [T("b")]


def test_iteration_cap():
    n = Nrcs(1, ("a", "b"), (Update(("a",), ("b",)), Update(("b",), ("a", "b"))))
    with pytest.raises(IterationCapExceeded):
        backward_coverability(n, T("a"), T("a(b,b,b,b,b)"), iteration_cap=1)


def test_forward_exhausted_on_renamings():
    n = Nrcs(1, ("a", "b", "c"), (Update(("a",), ("b",)), Update(("b",), ("a",))))
    r = forward_explore(n, T("a(c)"), T("c"))
    assert r.status == "exhausted" and not r.pruned and r.decisive


def test_forward_cutoff():
    n = parse_nrcs(corpus.read("nontrivial.nrcs"))
    r = forward_explore(n.nrcs, n.init, n.target, max_nodes=8, max_frontier=1)
    assert r.status == "cutoff" and not r.decisive
    r = forward_explore(n.nrcs, n.init, n.target, max_nodes=3)
    assert r.status == "exhausted" and r.pruned and not r.decisive
    with pytest.raises(ValueError):
        forward_explore(n.nrcs, n.init, n.target, max_nodes=0)


def test_backward_forward_agree_on_sample():
    rng = random.Random(17)
    for _ in range(60):
        n, init, target = random_instance(rng)
        v = backward_coverability(n, init, target)
        if v.coverable:
            assert check_certificate(n, init, target, v.run)
            r = forward_explore(n, init, target, max_nodes=8)
            assert r.status == "found"
        else:
            assert not covers(v.basis, init)


def test_monotone_in_init():
    rng = random.Random(23)
    for _ in range(40):
        n, init, target = random_instance(rng, node_max=4)
        v = backward_coverability(n, init, target)
        bigger = Tree(init.label, init.children + (Tree(init.label),))
        if bigger.height <= n.k and v.coverable:
            assert backward_coverability(n, bigger, target).coverable


def test_reset_is_not_monotone_in_run_but_verdict_is():
    n = Nrcs(1, ("p", "q", "r"), (Reset(("p",), "q", ("r",)),))
    v = backward_coverability(n, T("p(q)"), T("r"))
    assert v.coverable
    v = backward_coverability(n, T("p(q)"), T("r(q)"))
    assert not v.coverable
