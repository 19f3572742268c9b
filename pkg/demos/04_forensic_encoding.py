"""Dissect one noisy run: witness, break sets, lossless bitstream.

The encoded string spends m bits on the first break set and one unary
block per step; decoding it (plus the priority order) rebuilds the
entire witness sequence without ever seeing the states.
"""

from flawchain import (NoiseModel, attach_noise, break_sets, decode, encode,
                       gen_coloring, reconstruct_witness, run, witness)

if __name__ == "__main__":
    triangle = gen_coloring([(0, 1), (1, 2), (0, 2)], 3, explicit=True)
    noisy = attach_noise(triangle, NoiseModel.greedy_adversarial(), 0.15)

    traj = run(noisy, seed=7, max_steps=500, trial=3)
    names = noisy.flaw_names
    print("states:  " + " -> ".join(str(s) for s in traj.states))
    print("noise:   " + "".join("*" if n else "." for n in traj.noise if n is not None))
    w = witness(traj)
    print("witness: " + " ".join(names[f] for f in w))

    seq = break_sets(traj)
    for i in range(seq.z):
        star = sorted(names[f] for f in seq.b_star[i])
        extra = sorted(names[f] for f in seq.collateral[i] | seq.neglected[i])
        print(f"  B*_{i} = {star or '{}'}" + (f"  (dropped {extra})" if extra else ""))

    bits = encode(seq.b_star[0], seq.lengths, noisy.m)
    print(f"encoded [{len(bits)} bits = m + 2Z - |B0*| = "
          f"{noisy.m} + {2 * seq.z} - {len(seq.b_star[0])}]: {bits.to01()}")

    b0, lengths = decode(bits, noisy.m)
    rebuilt = reconstruct_witness(seq, noisy.priority)
    print(f"decode round-trip ok: {b0 == seq.b_star[0] and lengths == seq.lengths}")
    print(f"witness rebuilt from break sets alone: {rebuilt == w}")
