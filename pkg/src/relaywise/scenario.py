"""Scenario files: a JSON tree of relays, their budgets and their users.

Example::

    {
      "name": "two users",
      "units": "db",
      "relays": [
        {"id": "R1", "total_power": 1.0, "users": [
          {"id": 1, "direct_snr_db": 3, "source_relay_snr_db": 10, "relay_dest_gain_db": 5}
        ]}
      ]
    }

With ``"units": "linear"`` the user fields are ``*_linear`` and are taken
as-is. Users may instead be declared in a top-level ``users`` list and
referenced from relays by id.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from .model import LinkBudget, RelayGroup, Scenario, SourceNode, to_linear

TOP_KEYS = {"name", "description", "notes", "units", "user_count", "relays", "users", "sweep"}
RELAY_KEYS = {"id", "total_power", "users"}
SWEEP_KEYS = {"min", "max", "points", "spacing", "modes"}
FIELDS = ("direct_snr", "source_relay_snr", "relay_dest_gain")
SUFFIX = {"db": "_db", "linear": "_linear"}


class ScenarioError(ValueError):
    """Malformed or invalid scenario file."""


def bundled(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``paper_sec6``."""
    filename = name if name.endswith(".json") else f"{name}.json"
    return Path(str(resources.files("relaywise") / "data" / filename))


def resolve(path) -> Path:
    path = Path(path)
    if not path.exists() and bundled(path.name).exists() and path.parent == Path("."):
        return bundled(path.name)
    return path


def _number(value, where: str, *, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: must be finite")
    if nonneg and value < 0:
        raise ScenarioError(f"{where}: must be >= 0, got {value:g}")
    return value


def _identifier(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ScenarioError(f"{where}: id must be an integer or string, got {value!r}")
    return value


def _unknown(obj: dict, allowed: set, where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(extra)}")


def _user(obj, units: str, where: str) -> SourceNode:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object")
    suffix = SUFFIX[units]
    wanted = {"id"} | {f + suffix for f in FIELDS}
    other = SUFFIX["linear" if units == "db" else "db"]
    for key in obj:
        if key.endswith(other) and key[: -len(other)] in FIELDS:
            raise ScenarioError(f"{where}.{key}: units is {units!r}, expected {key[: -len(other)] + suffix}")
    _unknown(obj, wanted, where)
    for key in sorted(wanted):
        if key not in obj:
            raise ScenarioError(f"{where}: missing {key}")
    uid = _identifier(obj["id"], f"{where}.id")
    values = []
    for f in FIELDS:
        key = f + suffix
        v = _number(obj[key], f"{where}.{key}", nonneg=(units == "linear"))
        values.append(to_linear(v) if units == "db" else v)
    try:
        return SourceNode(uid, LinkBudget(*values))
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def parse_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("top level: expected an object")
    _unknown(data, TOP_KEYS, "top level")
    units = data.get("units", "db")
    if units not in SUFFIX:
        raise ScenarioError(f"units: expected 'db' or 'linear', got {units!r}")

    pool = {}
    for k, obj in enumerate(data.get("users", [])):
        node = _user(obj, units, f"users[{k}]")
        if node.id in pool:
            raise ScenarioError(f"users[{k}].id: duplicate user id {node.id!r}")
        pool[node.id] = node

    relays_raw = data.get("relays")
    if not isinstance(relays_raw, list) or not relays_raw:
        raise ScenarioError("relays: expected a non-empty list")
    seen_users, seen_relays, relays = set(), set(), []
    for r, robj in enumerate(relays_raw):
        where = f"relays[{r}]"
        if not isinstance(robj, dict):
            raise ScenarioError(f"{where}: expected an object")
        _unknown(robj, RELAY_KEYS, where)
        rid = _identifier(robj.get("id", f"R{r + 1}"), f"{where}.id")
        if rid in seen_relays:
            raise ScenarioError(f"{where}.id: duplicate relay id {rid!r}")
        seen_relays.add(rid)
        power = _number(robj.get("total_power", 1.0), f"{where}.total_power", nonneg=True)
        entries = robj.get("users", [])
        if not isinstance(entries, list):
            raise ScenarioError(f"{where}.users: expected a list")
        if not entries:
            raise ScenarioError(f"{where}: relay has no users")
        users = []
        for k, entry in enumerate(entries):
            uwhere = f"{where}.users[{k}]"
            if isinstance(entry, dict):
                node = _user(entry, units, uwhere)
            else:
                ref = _identifier(entry, uwhere)
                if ref not in pool:
                    raise ScenarioError(f"{uwhere}: unknown user {ref!r}")
                node = pool[ref]
            if node.id in seen_users:
                raise ScenarioError(f"{uwhere}: duplicate user id {node.id!r}")
            seen_users.add(node.id)
            users.append(node)
        relays.append(RelayGroup(rid, power, tuple(users)))

    orphans = [uid for uid in pool if uid not in seen_users]
    if orphans:
        raise ScenarioError(f"users: {orphans[0]!r} is assigned to no relay")

    count = data.get("user_count", 0)
    if count:
        if isinstance(count, bool) or not isinstance(count, int) or count <= 0:
            raise ScenarioError("user_count: expected a positive integer")
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ScenarioError("sweep: expected an object")
    _unknown(sweep, SWEEP_KEYS, "sweep")
    meta = {k: data[k] for k in ("description", "notes") if k in data}
    if sweep:
        meta["sweep"] = dict(sweep)
    return Scenario(tuple(relays), count, str(data.get("name", "")), meta)


def load_scenario(path) -> Scenario:
    path = resolve(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return parse_scenario(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
