import pytest

from nrcskit.gadgets import (KINDS, GadgetError, build, check_soundness_by_search,
                             encoder_inputs, make_input, perfect_output, replay_run,
                             synthesize_perfect_run, validate_encoder)
from nrcskit.nrcs import Tree, parse_tree, render_nrcs
from nrcskit.ordinal import SUCC, Ordinal, hardy_eval, parse_ordinal
from nrcskit.ordinal_encoding import (EncodingParams, HardyState, decode_hardy_config,
                                      hardy_rewrite, make_hardy_config)

P12 = EncodingParams(1, 2)
T = parse_tree


def o(text):
    return parse_ordinal(text)


def renders(kind, k=1, ell=2):
    return {t.render() for t in build(kind, k, ell).nrcs.transitions}


def test_build_rejects_bad_parameters():
    with pytest.raises(GadgetError):
        build("copy", 0, 2)
    with pytest.raises(GadgetError):
        build("copy", 1, 0)
    with pytest.raises(GadgetError):
        build("bogus", 1, 1)


def test_build_is_deterministic():
    for kind in KINDS:
        a = build(kind, 1, 2).nrcs
        build.cache_clear()
        b = build(kind, 1, 2).nrcs
        assert render_nrcs(a) == render_nrcs(b)


def test_copy_contains_marking_transition():
    assert "update start_copy,mrkd@w1 -> start_copy',mrkd_1@w1" in renders("copy")


def test_hardy_forward_transitions():
    r = renders("hardyForward")
    assert "update w,w@w0 -> succ" in r
    assert "update succ -> w,#" in r


def test_hardy_backward_duality_transition():
    assert "update w,# -> w,w@w0" in renders("hardyBackward")


def test_inductive_wiring():
    cmp1 = build("comparator", 1, 2).nrcs.transitions
    sm1 = build("smallest", 1, 2).nrcs
    labels = set(sm1.states)
    assert any(lab.startswith("sm1.") for lab in labels)
    # the comparator is embedded below a prefix: each of its transitions
    # appears in the smallest gadget with a longer source path
    n_embedded = sum(1 for t in sm1.transitions if "start_cmp" in t.render())
    assert n_embedded >= 1
    assert len(sm1.transitions) > len(cmp1)
    cmp2 = build("comparator", 2, 1).nrcs
    assert len(cmp2.transitions) > len(build("smallest", 1, 1).nrcs.transitions)


def test_smallest_perfect_run_example():
    inp = T("start_sm(w@w1,w@w0)")
    run = synthesize_perfect_run("smallest", inp, P12)
    out = replay_run("smallest", inp, P12, run)
    assert out == T("end_sm(w@w1,smallest@w0)")
    assert validate_encoder("smallest", out, inp, P12, perfect=True)


def test_copy_perfect_run_example():
    inp = T("start_copy(mrkd@w1,w@w0)")
    out = replay_run("copy", inp, P12, synthesize_perfect_run("copy", inp, P12))
    assert out == T("end_copy(w@w1,cpd@w1,w@w0)")


def test_comparator_k1_results():
    for a, b, res in [("w@w2", "w@w0", ("big_cmp@w2", "small_cmp@w0")),
                      ("w@w1", "w@w1", ("equal_cmp@w1", "equal_cmp@w1"))]:
        inp = Tree("start_cmp", [T(a.replace("w@", "A_cmp@")), T(b.replace("w@", "B_cmp@"))])
        out = replay_run("comparator", inp, P12, synthesize_perfect_run("comparator", inp, P12))
        assert out == Tree("end_cmp", [T(res[0]), T(res[1])])


def test_hardy_forward_perfect_run():
    inp = make_hardy_config(o("w"), 2, P12)
    out = replay_run("hardyForward", inp, P12, synthesize_perfect_run("hardyForward", inp, P12))
    assert decode_hardy_config(out, P12) == (Ordinal.nat(0), 4)
    assert hardy_eval(SUCC, o("w"), 2) == 4


def test_hardy_backward_inverts_rewrites():
    for alpha, n in [(o("w"), 1), (o("w*2"), 2)]:
        src = HardyState(alpha, n)
        dst = hardy_rewrite(src)
        start = make_hardy_config(dst.alpha, dst.n, P12)
        goal = make_hardy_config(src.alpha, src.n, P12)
        run = synthesize_perfect_run("hardyBackward", start, P12, goal=goal)
        assert replay_run("hardyBackward", start, P12, run) == goal


def test_validate_rejects_wrong_outputs():
    inp = T("start_sm(w@w1,w@w0)")
    assert not validate_encoder("smallest", T("end_sm(smallest@w1,w@w0)"), inp, P12)
    assert not validate_encoder("smallest", T("end_sm(w@w1,smallest@w0,w@w0)"), inp, P12)
    assert validate_encoder("smallest", T("end_sm(smallest@w0)"), inp, P12)
    assert not validate_encoder("smallest", T("end_sm(smallest@w0)"), inp, P12, perfect=True)


def test_soundness_examples():
    rep = check_soundness_by_search("smallest", T("start_sm(w@w1,w@w0)"), P12)
    assert not rep.violations and not rep.cutoff and rep.terminals > 0
    rep = check_soundness_by_search("hardyForward", make_hardy_config(Ordinal.nat(2), 1, P12), P12)
    assert not rep.violations and not rep.cutoff
    rep = check_soundness_by_search("smallest", T("start_sm(w@w1,w@w0)"), P12, frontier_cap=1)
    assert rep.cutoff and not rep.ok


@pytest.mark.parametrize("kind", ["copy", "comparator", "smallest", "biggest"])
def test_completeness_k1_small_pool(kind):
    for inp in encoder_inputs(kind, P12, 4):
        run = synthesize_perfect_run(kind, inp, P12)
        out = replay_run(kind, inp, P12, run)
        assert out == perfect_output(kind, inp, P12)
        assert validate_encoder(kind, out, inp, P12, perfect=True)


@pytest.mark.parametrize("kind", ["copy", "comparator", "smallest", "biggest"])
def test_completeness_k2_tiny(kind):
    p = EncodingParams(2, 1)
    for inp in encoder_inputs(kind, p, 4)[:4]:
        out = replay_run(kind, inp, p, synthesize_perfect_run(kind, inp, p))
        assert validate_encoder(kind, out, inp, p, perfect=True)


def test_make_input_errors():
    with pytest.raises(GadgetError):
        make_input("comparator", P12, Ordinal.nat(1))
    with pytest.raises(GadgetError):
        make_input("bogus", P12, Ordinal.nat(1))
