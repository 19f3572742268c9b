"""Certify the noisy star and turn the condition into step budgets.

Also shows a failing case: the noiseless 2-coloring of a path has
congested principal rows and the condition sum lands exactly at 1.
"""

import math

from flawchain import NoiseModel, attach_noise, certify, gen_coloring, gen_star

if __name__ == "__main__":
    noisy = attach_noise(gen_star(8), NoiseModel.point(0), 0.2)
    condition, cert = certify(noisy)
    print(f"certified: {cert is not None}")
    for row in condition.rows:
        print(f"  sum over Gamma({row.name}) = {row.total:.6f} "
              f"< {condition.threshold:.6f}")
    print(f"  lambda* = {cert.lam_star:.6f}  (using lambda = {cert.lam:.6f})")
    print(f"  arc bound B = {cert.B}, m0 = {cert.m0:.3f}, x0 = {cert.x0:.3f}")
    print("  tail guarantee Pr[no flawless state within steps(s)] <= e^-s:")
    for s in (1.0, 2.0, 3.0):
        print(f"    s={s:.0f}: distance {cert.distance_bound(s):10.1f} bits, "
              f"steps {math.ceil(cert.step_bound(s)):>7}")
    print(f"  work ratio (steps per unit distance): {cert.work_ratio():.3f}")

    path = gen_coloring([(0, 1), (1, 2)], 2, explicit=True)
    condition, cert = certify(path)
    print(f"\npath 2-coloring certified: {cert is not None}")
    for row in condition.rows:
        print(f"  sum over Gamma({row.name}) = {row.total:.6f} "
              f"(needs < {condition.threshold:.6f})")
