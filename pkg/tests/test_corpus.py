import pytest

from nrcskit import corpus
from nrcskit.nrcs import parse_nrcs
from nrcskit.ordinal_encoding import decode_tree, encode_tree
from nrcskit.reductions import parse_minsky


def test_names():
    assert set(corpus.names()) >= {"sample.nrcs", "nontrivial.nrcs", "encoders.txt",
                                   "honest.minsky", "dishonest.minsky", "trivial.minsky"}
    assert not any(n.startswith(("_", ".")) for n in corpus.names())


@pytest.mark.parametrize("name", [n for n in corpus.names() if n.endswith(".nrcs")])
def test_machine_files_parse(name):
    f = parse_nrcs(corpus.read(name))
    assert f.init is not None and f.target is not None


@pytest.mark.parametrize("name", [n for n in corpus.names() if n.endswith(".minsky")])
def test_minsky_files_parse(name):
    mf = parse_minsky(corpus.read(name))
    assert mf.init in mf.machine.states and mf.target in mf.machine.states


def test_encoders_file():
    p, rows = corpus.parse_encoders(corpus.read("encoders.txt"))
    assert (p.k, p.ell) == (1, 2) and len(rows) == 5
    for alpha, tree in rows:
        assert encode_tree(alpha, p) == tree
        assert decode_tree(tree, p) == alpha


def test_missing_name():
    with pytest.raises(FileNotFoundError):
        corpus.read("nope.nrcs")
