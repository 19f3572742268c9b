"""Exact process tree of the noisy star, truncated at the 2^-x stratum.

Every leaf is reached with probability in (2^-x-B, 2^-x] unless the walk
was absorbed at a flawless state first.  The all-flawed leaves carry the
bad mass; the prefix entropy is wedged between x * bad_mass and the
certified ceiling lambda * x + m0.
"""

import math
from collections import Counter

from flawchain import (NoiseModel, attach_noise, bad_mass, certify, gen_star,
                       prefix_entropy, truncated_tree, verify_stratification)

if __name__ == "__main__":
    noisy = attach_noise(gen_star(8), NoiseModel.point(0), 0.2)
    _, cert = certify(noisy)

    x = 4
    tree = truncated_tree(noisy, x)
    print(f"x={x}: {tree.n_leaves} leaves, mass {tree.mass():.12f}")
    groups = Counter((len(leaf.prefix), leaf.bad) for leaf in tree.leaves)
    for (depth, bad), count in sorted(groups.items()):
        prob = sum(l.prob for l in tree.leaves
                   if len(l.prefix) == depth and l.bad == bad)
        tag = "bad " if bad else "good"
        print(f"  depth {depth} {tag}: {count:2d} leaves, mass {prob:.4f}")
    print(f"bad mass {bad_mass(tree):.6f}  (p^2 = {noisy.p ** 2:.6f})")
    print(f"prefix entropy {prefix_entropy(tree):.6f} in "
          f"[{x * bad_mass(tree):.6f}, {cert.lam * x + cert.m0:.6f}]")

    print(f"\nstrata x = 1..8, floor H >= x * bad_mass:")
    for x, row in zip(range(1, 9), verify_stratification(noisy, range(1, 9),
                                                         certificate=cert)):
        flags = all(row[k] for k in ("mass_ok", "sandwich_ok", "absorbed_ok",
                                     "entropy_floor_ok", "entropy_ceiling_ok"))
        print(f"  x={x}: leaves={row['n_leaves']:4d} "
              f"bad={row['bad_mass']:.6f} H={row['prefix_entropy']:.4f} "
              f"{'ok' if flags else 'VIOLATED'}")
