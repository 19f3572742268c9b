"""Instance files: canonical JSON serialization of the explicit flavor.

Document layout (format tag "flawchain-instance-v1"):

    states     int count, or {"widths": [w0, w1, ...]} for assignment
               spaces (count = product, mixed-radix indexing, last
               variable fastest)
    flaws      [{"name": str, "members": [state, ...]}, ...]
    priority   flaw names, highest priority first
    principal  [[state, [[target, prob], ...]], ...] sparse rows
    noise      same shape; omitted rows default to unit self-loops
    p          mix probability
    initial    state, or {"theta": [[state, prob], ...]}

Canonical form sorts rows by source state and supports by target state;
`dumps` always emits it, so equal instances serialize to equal bytes and
the digest is well defined.
"""

from __future__ import annotations

import hashlib
import json
import math

from .core import Distribution, ExplicitInstance, ModelError, validate_instance

FORMAT = "flawchain-instance-v1"


def to_dict(instance: ExplicitInstance) -> dict:
    if not instance.explicit:
        raise ModelError("only explicit instances serialize to files")
    doc = {
        "format": FORMAT,
        "states": ({"widths": list(instance.widths)} if instance.widths
                   else instance.n_states),
        "flaws": [{"name": instance.flaw_names[i],
                   "members": sorted(instance.flaws[i])}
                  for i in range(instance.m)],
        "priority": [instance.flaw_names[i] for i in instance.priority],
        "principal": _kernel_out(instance.principal),
        "noise": _kernel_out(instance.noise),
        "p": instance.p,
    }
    if isinstance(instance.initial, Distribution):
        doc["initial"] = {"theta": [[s, pr] for s, pr in instance.initial.support]}
    else:
        doc["initial"] = instance.initial
    return doc


def _kernel_out(rows):
    return [[s, [[t, pr] for t, pr in row.support]]
            for s, row in enumerate(rows)]


def from_dict(doc: dict) -> ExplicitInstance:
    if not isinstance(doc, dict):
        raise ModelError("instance document must be a JSON object")
    if doc.get("format", FORMAT) != FORMAT:
        raise ModelError(f"unknown format tag {doc.get('format')!r}")
    for key in ("states", "flaws", "priority", "principal", "p", "initial"):
        if key not in doc:
            raise ModelError(f"missing field {key!r}")

    states = doc["states"]
    widths = None
    if isinstance(states, dict):
        widths = tuple(int(w) for w in states.get("widths", ()))
        if not widths:
            raise ModelError("states.widths must be a nonempty list")
        n = math.prod(widths)
    else:
        n = int(states)

    names = []
    members = []
    for entry in doc["flaws"]:
        names.append(str(entry["name"]))
        members.append([int(s) for s in entry["members"]])
    try:
        priority = [names.index(str(nm)) for nm in doc["priority"]]
    except ValueError as exc:
        raise ModelError(f"priority names unknown: {exc}") from None

    principal = _kernel_in(doc["principal"], n, "principal")
    flawless_default = {s: [(s, 1.0)] for s in range(n)}
    noise = _kernel_in(doc.get("noise") or [], n, "noise",
                       default=flawless_default)
    # principal rows may omit flawless states; they default to self-loops
    for s in range(n):
        if principal.get(s) is None:
            principal[s] = [(s, 1.0)]

    initial = doc["initial"]
    if isinstance(initial, dict):
        initial = Distribution.from_pairs(
            [(int(s), float(pr)) for s, pr in initial["theta"]],
            where="initial distribution")
    else:
        initial = int(initial)

    return validate_instance(
        n_states=n, flaws=members, priority=priority, principal=principal,
        noise=noise, p=float(doc["p"]), initial=initial, flaw_names=names,
        widths=widths)


def _kernel_in(entries, n, label, default=None):
    rows = dict(default) if default else {}
    for entry in entries:
        try:
            source, pairs = entry
        except (TypeError, ValueError):
            raise ModelError(f"{label} rows must be [state, [[target, prob], ...]] "
                             f"entries, got {entry!r}") from None
        rows[int(source)] = [(int(t), float(pr)) for t, pr in pairs]
    missing = [s for s in range(n) if s not in rows]
    if missing and default is None:
        # leave holes for the caller's default; report only junk keys here
        pass
    junk = [s for s in rows if s < 0 or s >= n]
    if junk:
        raise ModelError(f"{label} rows for unknown states {sorted(junk)}")
    return rows


def dumps(instance: ExplicitInstance) -> str:
    return json.dumps(to_dict(instance), sort_keys=True,
                      separators=(",", ":")) + "\n"


def loads(text: str) -> ExplicitInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"not valid JSON: {exc}") from None
    return from_dict(doc)


def save(instance: ExplicitInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance))


def load(path) -> ExplicitInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def digest(instance: ExplicitInstance) -> str:
    """sha256 of the canonical serialization."""
    return hashlib.sha256(dumps(instance).encode("utf-8")).hexdigest()
