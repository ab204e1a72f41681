"""Replay a three-step run of the bundled k=2 machine and decide coverability."""
from nrcskit import corpus
from nrcskit.coverability import backward_coverability, check_certificate, forward_explore
from nrcskit.nrcs import format_anchor, parse_nrcs, replay

f = parse_nrcs(corpus.read("sample.nrcs"))
run = [(0, (0,)), (1, ()), (2, ())]

print("machine:")
for i, t in enumerate(f.nrcs.transitions):
    print(f"  t{i + 1}: {t.render()}")
print("three-step run:")
for (i, a), c in zip([(None, None)] + run, replay(f.nrcs, f.init, run)):
    step = "start" if i is None else f"t{i + 1} at {format_anchor(a)}"
    print(f"  {step:12} {c.key}")
print("certificate accepted:", check_certificate(f.nrcs, f.init, f.target, run))

v = backward_coverability(f.nrcs, f.init, f.target)
print(f"backward: coverable={v.coverable} after {v.iterations} iterations, "
      f"basis sizes {v.basis_sizes}")
r = forward_explore(f.nrcs, f.init, f.target)
print(f"forward: {r.status} after exploring {r.explored} configurations, "
      f"shortest run has {len(r.run)} step(s)")
