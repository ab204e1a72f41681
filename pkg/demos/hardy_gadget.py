"""Run the hardyForward gadget on an encoded Hardy configuration."""
from nrcskit.gadgets import build, replay_run, synthesize_perfect_run
from nrcskit.ordinal import SUCC, hardy_eval, parse_ordinal
from nrcskit.ordinal_encoding import (EncodingParams, HardyState, decode_hardy_config,
                                      hardy_fold, make_hardy_config)

p = EncodingParams(1, 2)
alpha = parse_ordinal("w")
n = 2

print("rewrite sequence:")
for s in hardy_fold(HardyState(alpha, n)):
    print(f"  ({s.alpha}, {s.n})")
print(f"H^{alpha}({n}) = {hardy_eval(SUCC, alpha, n)}")

g = build("hardyForward", p.k, p.ell)
print(f"hardyForward gadget: {len(g.nrcs.states)} labels, {len(g.nrcs.transitions)} transitions")
start = make_hardy_config(alpha, n, p)
run = synthesize_perfect_run("hardyForward", start, p)
end = replay_run("hardyForward", start, p, run)
print(f"perfect run of {len(run)} steps: {start.key} -> {end.key}")
beta, m = decode_hardy_config(end, p)
print(f"decoded end configuration: ({beta}, {m})")
