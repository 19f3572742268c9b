"""Seeded simulation of the mixed chain.

Reproducibility contract: every trial draws from its own counter-based
Philox stream keyed by (master seed, trial index), so results do not
depend on execution order and any single trial can be replayed in
isolation.  Within a step the draw order is fixed: first the mixture
coin, then one uniform pushed through the inverse CDF of the chosen
kernel row (support in ascending state order).  Instances sharing row
construction therefore produce byte-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Distribution, ModelError


def trial_stream(seed: int, trial: int = 0) -> np.random.Generator:
    """The deterministic RNG stream of one trial."""
    ss = np.random.SeedSequence(seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(ss))


def step(instance, state: int, rng) -> tuple:
    """One mixed-chain step; returns (successor, noise_flag)."""
    coin = rng.random()
    noisy = coin < instance.p
    row = instance.noise_row(state) if noisy else instance.principal_row(state)
    return row.sample(rng.random()), noisy


@dataclass(frozen=True)
class Trajectory:
    """One run: states s_1..s_{k+1} with per-step addressed flaws and
    noise flags.  z is the bad-prefix horizon: states[0..z-1] are flawed
    and, unless the budget censored the run, states[z] is the first
    flawless state (hit_step == z).  Forensics reads flaw membership
    back through the carried instance."""

    instance: object
    seed: int
    trial: int
    states: tuple
    flaws: tuple   # addressed flaw per executed step (None past the hit)
    noise: tuple   # noise flag per executed step
    terminal: str  # "flawless_hit" | "budget_exhausted"
    z: int
    hit_step: int | None

    @property
    def n_steps(self) -> int:
        return len(self.flaws)


def run(instance, seed: int, max_steps: int, continue_after: bool = False,
        trial: int = 0) -> Trajectory:
    """Run one trajectory from the instance's initial state.

    Stops at the first flawless state unless `continue_after` keeps
    stepping to the budget (the hit index is recorded either way).  A run
    that never sees a flawless state within `max_steps` steps is
    censored: its observed prefix is entirely bad.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be positive, got {max_steps}")
    rng = trial_stream(seed, trial)
    if isinstance(instance.initial, Distribution):
        state = instance.initial.sample(rng.random())
    else:
        state = instance.initial
    states = [state]
    flaws = []
    noise = []
    hit = None
    for i in range(max_steps):
        current = states[-1]
        if instance.is_flawless(current):
            if hit is None:
                hit = i
            if not continue_after:
                break
        nxt, flag = step(instance, current, rng)
        flaws.append(instance.addressed(current))
        noise.append(flag)
        states.append(nxt)
    if hit is None and instance.is_flawless(states[-1]):
        hit = len(flaws)
    terminal = "flawless_hit" if hit is not None else "budget_exhausted"
    z = hit if hit is not None else len(flaws)
    return Trajectory(instance=instance, seed=seed, trial=trial,
                      states=tuple(states), flaws=tuple(flaws),
                      noise=tuple(noise), terminal=terminal, z=z,
                      hit_step=hit)


@dataclass(frozen=True)
class HittingStats:
    """Hitting-time summary of a batch of independent trials."""

    trials: int
    seed: int
    budget: int
    hits: tuple  # per trial: hitting step, or None when censored

    @property
    def censored(self) -> int:
        return sum(1 for h in self.hits if h is None)

    def tail(self, t: int) -> float:
        """Fraction of trials still flawed after t steps (t <= budget)."""
        if t > self.budget:
            raise ValueError(f"tail({t}) undefined beyond the budget {self.budget}")
        bad = sum(1 for h in self.hits if h is None or h > t)
        return bad / self.trials

    def tail_table(self, ts=None) -> list:
        if ts is None:
            seen = sorted({h for h in self.hits if h is not None})
            ts = sorted({0, *seen[:1000], min(self.budget, (seen[-1] if seen else 0) + 1)})
        return [(int(t), self.tail(t)) for t in ts]

    def mean_hit(self) -> float:
        done = [h for h in self.hits if h is not None]
        return sum(done) / len(done) if done else math.nan


def monte_carlo(instance, trials: int, seed: int, budget: int) -> HittingStats:
    """Independent trials; trial i replays exactly as run(..., trial=i)."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    hits = []
    for i in range(trials):
        traj = run(instance, seed, budget, trial=i)
        hits.append(traj.hit_step)
    return HittingStats(trials=trials, seed=seed, budget=budget, hits=tuple(hits))


def tail_check(stats: HittingStats, certificate, s_values=(1.0, 2.0, 3.0)) -> dict:
    """Empirical tails against the certified exp(-s) budgets.

    Each s yields the row {s, steps, empirical, bound, sigma, status}
    with status "ok" / "violated" / "inconclusive" (budget smaller than
    the certified step count).  Without a certificate there is nothing
    to check and the report only carries the no-guarantee flag.
    """
    if certificate is None:
        return {"guarantee": False, "rows": []}
    rows = []
    for s in s_values:
        steps_needed = certificate.step_bound(s)
        budget_needed = math.inf if steps_needed == math.inf else int(math.ceil(steps_needed))
        bound = math.exp(-s)
        sigma = math.sqrt(bound * (1.0 - bound) / stats.trials)
        if budget_needed > stats.budget:
            rows.append({"s": s, "steps": budget_needed, "empirical": None,
                         "bound": bound, "sigma": sigma, "status": "inconclusive"})
            continue
        emp = stats.tail(budget_needed)
        status = "ok" if emp <= bound + 3.0 * sigma else "violated"
        rows.append({"s": s, "steps": budget_needed, "empirical": emp,
                     "bound": bound, "sigma": sigma, "status": status})
    return {"guarantee": True, "rows": rows}


def transition_frequencies(instance, state: int, draws: int, seed: int) -> dict:
    """Empirical successor frequencies of repeated single steps from one
    state, for distribution sanity checks."""
    if draws < 1:
        raise ValueError("draws must be positive")
    rng = trial_stream(seed, 0)
    counts = {}
    for _ in range(draws):
        nxt, _ = step(instance, state, rng)
        counts[nxt] = counts.get(nxt, 0) + 1
    return {s: c / draws for s, c in sorted(counts.items())}
