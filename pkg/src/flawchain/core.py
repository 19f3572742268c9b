"""Finite flaw-structured Markov systems with a principal/noise kernel mix.

States are integers 0..n-1.  A flaw is a subset of states sharing a defect;
a state belonging to no flaw is flawless.  Each step follows the noise
kernel with probability p and the principal kernel otherwise.  The
principal kernel is controlled: a flawed state addresses its
highest-priority present flaw, and flawless states hold still (their
principal rows are exact unit self-loops).

Two instance flavors share one behavioural surface.  The explicit flavor
enumerates every kernel row and supports the full analysis stack; the
implicit flavor encodes states as variable assignments and builds rows on
demand from callbacks, which is enough for simulation and forensics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

ROW_TOL = 1e-9  # kernel rows must sum to 1 within this


class ModelError(ValueError):
    """An instance description that violates the model constraints."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class ModelWarning(UserWarning):
    pass


def binary_entropy(p: float) -> float:
    """h(p) in bits, with h(0) = h(1) = 0 by the limit convention."""
    if p < 0.0 or p > 1.0:
        raise ValueError(f"binary_entropy needs p in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def shannon_entropy(dist) -> float:
    """Entropy in bits of a Distribution or an iterable of (state, prob)."""
    pairs = dist.support if isinstance(dist, Distribution) else dist
    return -sum(pr * math.log2(pr) for _, pr in pairs if pr > 0.0)


@dataclass(frozen=True)
class Distribution:
    """A sparse probability row: ((state, prob), ...) sorted by state.

    Rows are canonical: support sorted ascending by state, no duplicate
    states, every probability strictly positive, total mass 1.  `sample`
    maps a uniform draw through the inverse CDF in canonical order; fixing
    that order is what makes seeded runs reproducible across flavors.
    """

    support: tuple

    @classmethod
    def from_pairs(cls, pairs, where: str = "row") -> "Distribution":
        support = tuple(sorted((int(s), float(pr)) for s, pr in pairs))
        problems = _row_problems(support, where)
        if problems:
            raise ModelError(problems)
        return cls(support)

    @classmethod
    def unit(cls, state: int) -> "Distribution":
        return cls(((int(state), 1.0),))

    def states(self) -> tuple:
        return tuple(s for s, _ in self.support)

    def probs(self) -> tuple:
        return tuple(pr for _, pr in self.support)

    def total(self) -> float:
        return sum(pr for _, pr in self.support)

    def entropy(self) -> float:
        return shannon_entropy(self.support)

    def sample(self, u: float) -> int:
        """Inverse-CDF draw: u in [0, 1) against the sorted support."""
        if not self.support:
            raise ModelError("cannot sample from an empty row")
        acc = 0.0
        for state, pr in self.support:
            acc += pr
            if u < acc:
                return state
        return self.support[-1][0]

    def is_unit_self_loop(self, state: int) -> bool:
        return self.support == ((state, 1.0),)

    def __len__(self):
        return len(self.support)


def _row_problems(support, where):
    problems = []
    states = [s for s, _ in support]
    if len(set(states)) != len(states):
        problems.append(f"{where}: duplicate states in support")
    for s, pr in support:
        if not (pr > 0.0):
            problems.append(f"{where}: probability {pr} for state {s} is not positive")
    if support and abs(sum(pr for _, pr in support) - 1.0) > ROW_TOL:
        problems.append(f"{where}: mass {sum(pr for _, pr in support)!r} != 1")
    if not support:
        problems.append(f"{where}: empty support")
    return problems


@dataclass(frozen=True)
class ExplicitInstance:
    """Fully enumerated instance: one materialized row per state and kernel.

    Fields are canonical after `validate_instance`: flaw sets are
    frozensets, rows are sorted Distributions, `present_map[s]` lists the
    flaws containing state s in ascending index order and `addressed_map[s]`
    holds the highest-priority present flaw (None when flawless).
    """

    n_states: int
    flaws: tuple
    priority: tuple
    principal: tuple
    noise: tuple
    p: float
    initial: object  # fixed state int, or a Distribution over states
    flaw_names: tuple
    widths: tuple | None
    present_map: tuple
    addressed_map: tuple

    explicit = True

    @property
    def m(self) -> int:
        return len(self.flaws)

    @property
    def log2_states(self) -> float:
        return math.log2(self.n_states)

    def present(self, state: int) -> tuple:
        return self.present_map[state]

    def addressed(self, state: int):
        return self.addressed_map[state]

    def is_flawless(self, state: int) -> bool:
        return self.addressed_map[state] is None

    def principal_row(self, state: int) -> Distribution:
        return self.principal[state]

    def noise_row(self, state: int) -> Distribution:
        return self.noise[state]

    def states(self):
        return range(self.n_states)


class ImplicitInstance:
    """Variable-assignment state space with callback kernels.

    States are mixed-radix encodings of assignment vectors: variable i
    takes widths[i] values and the last variable varies fastest.  Flaw
    membership comes from predicates over the decoded assignment; kernel
    rows are built on demand.  Analysis needs full enumeration, so only
    the simulator and forensics accept this flavor.

    principal_fn(state, values, flaw) must return the row used when
    `flaw` is addressed at `state`; rows for flawless states are pinned
    to unit self-loops here, not in the callback.
    """

    explicit = False

    def __init__(self, widths, flaw_predicates, priority, principal_fn,
                 noise_fn, p, initial, flaw_names=None):
        self.widths = tuple(int(w) for w in widths)
        if any(w < 1 for w in self.widths):
            raise ModelError("variable widths must be at least 1")
        self.flaw_predicates = tuple(flaw_predicates)
        self.priority = tuple(int(i) for i in priority)
        if sorted(self.priority) != list(range(len(self.flaw_predicates))):
            raise ModelError("priority is not a permutation of the flaw indices")
        self.principal_fn = principal_fn
        self.noise_fn = noise_fn
        self.p = float(p)
        if not (0.0 <= self.p <= 1.0):
            raise ModelError(f"mix probability {p} outside [0, 1]")
        self.initial = initial
        self.flaw_names = tuple(flaw_names) if flaw_names else tuple(
            f"f{i + 1}" for i in range(len(self.flaw_predicates)))
        self._strides = _strides(self.widths)
        self.n_states = math.prod(self.widths)

    @property
    def m(self) -> int:
        return len(self.flaw_predicates)

    @property
    def log2_states(self) -> float:
        return sum(math.log2(w) for w in self.widths)

    def decode(self, state: int) -> tuple:
        values = []
        for stride, width in zip(self._strides, self.widths):
            values.append((state // stride) % width)
        return tuple(values)

    def encode(self, values) -> int:
        return sum(v * s for v, s in zip(values, self._strides))

    def present(self, state: int) -> tuple:
        values = self.decode(state)
        return tuple(i for i, pred in enumerate(self.flaw_predicates) if pred(values))

    def addressed(self, state: int):
        values = self.decode(state)
        for i in self.priority:
            if self.flaw_predicates[i](values):
                return i
        return None

    def is_flawless(self, state: int) -> bool:
        return self.addressed(state) is None

    def principal_row(self, state: int) -> Distribution:
        flaw = self.addressed(state)
        if flaw is None:
            return Distribution.unit(state)
        return self.principal_fn(state, self.decode(state), flaw)

    def noise_row(self, state: int) -> Distribution:
        return self.noise_fn(state, self.decode(state))


def _strides(widths):
    strides = []
    acc = 1
    for w in reversed(widths):
        strides.append(acc)
        acc *= w
    return tuple(reversed(strides))


def present_flaws(instance, state: int) -> tuple:
    """Indices of the flaws containing `state`, ascending."""
    return instance.present(state)


def addressed_flaw(instance, state: int):
    """Highest-priority present flaw at `state`, or None when flawless."""
    return instance.addressed(state)


def mixed_row(instance, state: int) -> Distribution:
    """The step distribution (1-p) * principal + p * noise at `state`.

    Degenerate mixes short-circuit: p = 0 returns the principal row
    unchanged and p = 1 the noise row, so supports never carry zero-mass
    entries.
    """
    p = instance.p
    if p == 0.0:
        return instance.principal_row(state)
    noise = instance.noise_row(state)
    if p == 1.0:
        return noise
    acc = {}
    for s, pr in instance.principal_row(state).support:
        acc[s] = (1.0 - p) * pr
    for s, pr in noise.support:
        acc[s] = acc.get(s, 0.0) + p * pr
    return Distribution(tuple(sorted(acc.items())))


def arc_bound(instance) -> int:
    """Smallest B with 2^-B < rho < 1 - 2^-B on every mixed arc leaving a flawed state.

    Flawless states are exempt: the model pins their principal rows to
    unit self-loops, which no finite B admits, and bad prefixes never
    step out of a flawless state.  A flawed state carrying a
    probability-1 arc makes the bound undefined and is an error.
    """
    require_explicit(instance, "arc_bound")
    best = 1
    for state in instance.states():
        if instance.is_flawless(state):
            continue
        for target, pr in mixed_row(instance, state).support:
            if pr >= 1.0:
                raise ModelError(
                    f"arc bound undefined: flawed state {state} moves to "
                    f"{target} with probability {pr}")
            b = best
            while not (math.ldexp(1.0, -b) < pr < 1.0 - math.ldexp(1.0, -b)):
                b += 1
            best = b
    return best


def require_explicit(instance, what: str):
    if not getattr(instance, "explicit", False):
        raise ModelError(f"{what} requires the explicit instance flavor")


DEFAULT_EXPLICIT_CAP = 2 ** 16


def validate_instance(n_states, flaws, priority, principal, noise, p, initial,
                      flaw_names=None, widths=None) -> ExplicitInstance:
    """Normalize and check an explicit instance description.

    `principal` and `noise` map (or list, indexed by state) each state to
    an iterable of (target, probability) pairs.  Raises ModelError with
    the full violation list; use `instance_violations` to collect without
    raising.  Normalization sorts every row support by state index,
    which is the canonical form the seeded sampler relies on.
    """
    instance, problems = _build(n_states, flaws, priority, principal, noise,
                                p, initial, flaw_names, widths)
    if problems:
        raise ModelError(problems)
    return instance


def instance_violations(n_states, flaws, priority, principal, noise, p, initial,
                        flaw_names=None, widths=None) -> list:
    _, problems = _build(n_states, flaws, priority, principal, noise, p,
                         initial, flaw_names, widths)
    return problems


def _build(n_states, flaws, priority, principal, noise, p, initial,
           flaw_names, widths):
    problems = []
    n = int(n_states)
    if n < 1:
        return None, [f"state count {n} must be positive"]
    if widths is not None:
        widths = tuple(int(w) for w in widths)
        if math.prod(widths) != n:
            problems.append(f"widths {widths} do not multiply to {n} states")

    flaw_sets = []
    names = list(flaw_names) if flaw_names else [f"f{i + 1}" for i in range(len(flaws))]
    if len(names) != len(flaws):
        problems.append("flaw_names length does not match the flaw count")
        names = [f"f{i + 1}" for i in range(len(flaws))]
    if len(set(names)) != len(names):
        problems.append("duplicate flaw names")
    for i, members in enumerate(flaws):
        fs = frozenset(int(s) for s in members)
        if any(s < 0 or s >= n for s in fs):
            problems.append(f"flaw {names[i]} has members outside 0..{n - 1}")
            fs = frozenset(s for s in fs if 0 <= s < n)
        if not fs:
            warnings.warn(f"flaw {names[i]} is empty", ModelWarning, stacklevel=3)
        flaw_sets.append(fs)

    m = len(flaw_sets)
    priority = tuple(int(i) for i in priority)
    if sorted(priority) != list(range(m)):
        problems.append(f"priority {priority} is not a permutation of 0..{m - 1}")
        priority = tuple(range(m))

    present = []
    addressed = []
    for s in range(n):
        here = tuple(i for i in range(m) if s in flaw_sets[i])
        present.append(here)
        pick = None
        for i in priority:
            if s in flaw_sets[i]:
                pick = i
                break
        addressed.append(pick)

    def rows_of(kernel, label):
        out = []
        for s in range(n):
            try:
                pairs = kernel[s]
            except (KeyError, IndexError):
                problems.append(f"{label} kernel has no row for state {s}")
                out.append(Distribution.unit(s))
                continue
            support = tuple(sorted((int(t), float(pr)) for t, pr in pairs))
            row_problems = _row_problems(support, f"{label} row of state {s}")
            if any(t < 0 or t >= n for t, _ in support):
                row_problems.append(f"{label} row of state {s} targets outside 0..{n - 1}")
            if row_problems:
                problems.extend(row_problems)
                out.append(Distribution.unit(s))
            else:
                out.append(Distribution(support))
        return tuple(out)

    principal_rows = rows_of(principal, "principal")
    noise_rows = rows_of(noise, "noise")

    for s in range(n):
        if addressed[s] is None and not principal_rows[s].is_unit_self_loop(s):
            problems.append(
                f"flawless state {s} must have the exact unit self-loop as its "
                f"principal row, got {principal_rows[s].support}")

    p = float(p)
    if not (0.0 <= p <= 1.0):
        problems.append(f"mix probability {p} outside [0, 1]")

    if isinstance(initial, Distribution):
        bad = [s for s, _ in initial.support if s < 0 or s >= n]
        if bad:
            problems.append(f"initial distribution covers unknown states {bad}")
    else:
        initial = int(initial)
        if initial < 0 or initial >= n:
            problems.append(f"initial state {initial} outside 0..{n - 1}")

    instance = None
    if not problems:
        instance = ExplicitInstance(
            n_states=n, flaws=tuple(flaw_sets), priority=priority,
            principal=principal_rows, noise=noise_rows, p=p, initial=initial,
            flaw_names=tuple(names), widths=widths,
            present_map=tuple(present), addressed_map=tuple(addressed))
    return instance, problems
