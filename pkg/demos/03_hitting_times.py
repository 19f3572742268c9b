"""Seeded Monte Carlo hitting times against the certified tail."""

from flawchain import (NoiseModel, attach_noise, certify, gen_star,
                       monte_carlo, tail_check)

if __name__ == "__main__":
    noisy = attach_noise(gen_star(8), NoiseModel.point(0), 0.2)
    _, cert = certify(noisy)

    # budget past steps(3) so the tail rows are decidable, not censored
    stats = monte_carlo(noisy, trials=20_000, seed=11, budget=20_000)
    print(f"trials={stats.trials} censored={stats.censored}")
    # the hub escapes whenever the principal kernel fires, so the hit
    # time is geometric with mean 1/(1-p)
    print(f"mean hit {stats.mean_hit():.4f}  (geometric predicts "
          f"{1 / (1 - noisy.p):.4f})")
    print("tail: " + "  ".join(f"P[Z>{t}]={frac:.4f}"
                               for t, frac in stats.tail_table()[:6]))

    print("\ncertified budget check (empirical vs e^-s + 3 sigma):")
    report = tail_check(stats, cert)
    for row in report["rows"]:
        emp = "n/a" if row["empirical"] is None else f"{row['empirical']:.2e}"
        print(f"  s={row['s']:.0f} steps={row['steps']:9.1f} "
              f"empirical={emp} bound={row['bound']:.4f} -> {row['status']}")
