"""Compile tiny Minsky machines into nested reset counter systems and decide them."""
import time

from nrcskit import corpus
from nrcskit.coverability import backward_coverability
from nrcskit.reductions import build_bounded_reduction, parse_minsky

for name in ("trivial.minsky", "honest.minsky", "dishonest.minsky"):
    mf = parse_minsky(corpus.read(name))
    inst = build_bounded_reduction(mf.machine, 1, 1, mf.init, mf.target)
    t0 = time.time()
    v = backward_coverability(inst.nrcs, inst.init, inst.target)
    print(f"{name:18} {len(inst.nrcs.states):4} labels {len(inst.nrcs.transitions):4} transitions"
          f"  coverable={v.coverable}  ({time.time() - t0:.1f}s)")
