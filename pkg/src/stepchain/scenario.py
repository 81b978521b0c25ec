"""Scenario file loading: TOML sections -> Scenario.

Schema (see scenarios/ for committed examples)::

    seed = 42
    nodes = 4
    steps = 300
    verify_interval = 0          # optional: re-verify all chains every N steps

    [consensus]
    type = "pow"                 # or "poa"
    mining_difficulty = 256      # pow
    attempts_per_step = 8        # pow, simulation nonce attempts per step
    # signers = [0, 1, 2]        # poa
    # block_period = 5           # poa
    # diff_inturn = 2            # poa
    # diff_noturn = 1            # poa
    # delay_noturn = 2           # poa
    trust = false

    [genesis]
    program = "counter"          # built-in contract program name
    [genesis.balances]
    "0" = 100                    # account ids are decimal strings in TOML
    [genesis.contract]
    n = 0

    [topology]
    kind = "full"                # full | ring | schedule
    # [[topology.events]]        # for kind = "schedule"
    # step = 1
    # action = "add"             # add | remove (removes apply before adds)
    # a = 0
    # b = 1

    [[workload]]
    step = 5
    sender = 0
    receiver = 1
    value = 3
    # data = "note"              # raw payload, or:
    # call = { function = "increment", inputs = [2] }

    [random_workload]            # optional seeded generator
    count = 40
    start = 1
    end = 150
    max_value = 5
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .simulator import PeerEvent, RandomWorkload, Scenario, ScenarioError, WorkloadEvent
from .state import encode_contract_call


def _require_int(value, fieldname: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(fieldname, f"expected an integer, got {value!r}")
    return value


def scenario_from_dict(raw: dict) -> Scenario:
    raw = dict(raw)
    known = {
        "seed", "nodes", "steps", "verify_interval", "consensus", "genesis",
        "topology", "workload", "random_workload",
    }
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(sorted(unknown)[0], "unknown scenario key")
    if "nodes" not in raw:
        raise ScenarioError("nodes", "missing")
    if "steps" not in raw:
        raise ScenarioError("steps", "missing")
    if "consensus" not in raw or not isinstance(raw["consensus"], dict):
        raise ScenarioError("consensus", "missing [consensus] section")

    genesis = raw.get("genesis", {})
    if not isinstance(genesis, dict):
        raise ScenarioError("genesis", "must be a section")
    balances_raw = genesis.get("balances", {})
    balances: dict[int, int] = {}
    for key, value in balances_raw.items():
        if not str(key).isdigit():
            raise ScenarioError("genesis.balances", f"account key {key!r} is not a node id")
        balances[int(key)] = _require_int(value, f"genesis.balances.{key}")
        if balances[int(key)] < 0:
            raise ScenarioError(f"genesis.balances.{key}", "must be >= 0")

    topology = raw.get("topology", {})
    if not isinstance(topology, dict):
        raise ScenarioError("topology", "must be a section")
    events = []
    for i, ev in enumerate(topology.get("events", [])):
        missing = {"step", "action", "a", "b"} - set(ev)
        if missing:
            raise ScenarioError(f"topology.events[{i}]", f"missing {sorted(missing)}")
        events.append(
            PeerEvent(
                step=_require_int(ev["step"], f"topology.events[{i}].step"),
                action=ev["action"],
                a=_require_int(ev["a"], f"topology.events[{i}].a"),
                b=_require_int(ev["b"], f"topology.events[{i}].b"),
            )
        )

    workload = []
    for i, w in enumerate(raw.get("workload", [])):
        if not isinstance(w, dict):
            raise ScenarioError(f"workload[{i}]", "must be a table")
        missing = {"step", "sender", "receiver"} - set(w)
        if missing:
            raise ScenarioError(f"workload[{i}]", f"missing {sorted(missing)}")
        if "data" in w and "call" in w:
            raise ScenarioError(f"workload[{i}]", "give either data or call, not both")
        if "call" in w:
            call = w["call"]
            if (
                not isinstance(call, dict)
                or set(call) != {"function", "inputs"}
                or not isinstance(call["inputs"], list)
            ):
                raise ScenarioError(
                    f"workload[{i}].call", "needs exactly function = <name>, inputs = [...]"
                )
            data = encode_contract_call(call["function"], call["inputs"])
        else:
            data = w.get("data", "")
            if not isinstance(data, str):
                raise ScenarioError(f"workload[{i}].data", "must be a string")
        workload.append(
            WorkloadEvent(
                step=_require_int(w["step"], f"workload[{i}].step"),
                sender=_require_int(w["sender"], f"workload[{i}].sender"),
                receiver=_require_int(w["receiver"], f"workload[{i}].receiver"),
                value=_require_int(w.get("value", 0), f"workload[{i}].value"),
                data=data,
            )
        )

    random_workload = None
    if "random_workload" in raw:
        rw = raw["random_workload"]
        if not isinstance(rw, dict):
            raise ScenarioError("random_workload", "must be a section")
        missing = {"count", "start", "end"} - set(rw)
        if missing:
            raise ScenarioError("random_workload", f"missing {sorted(missing)}")
        random_workload = RandomWorkload(
            count=_require_int(rw["count"], "random_workload.count"),
            start=_require_int(rw["start"], "random_workload.start"),
            end=_require_int(rw["end"], "random_workload.end"),
            max_value=_require_int(rw.get("max_value", 10), "random_workload.max_value"),
        )

    scenario = Scenario(
        node_count=_require_int(raw["nodes"], "nodes"),
        steps=_require_int(raw["steps"], "steps"),
        consensus=dict(raw["consensus"]),
        seed=_require_int(raw.get("seed", 0), "seed"),
        genesis_balances=balances,
        genesis_contract=dict(genesis.get("contract", {})),
        program=genesis.get("program", "none"),
        topology_kind=topology.get("kind", "full"),
        topology_events=events,
        workload=workload,
        random_workload=random_workload,
        verify_interval=_require_int(raw.get("verify_interval", 0), "verify_interval"),
    )
    scenario.validate()
    return scenario


def load_scenario_dict(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError("scenario", f"no such file: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("scenario", f"{path}: {exc}") from exc


def load_scenario(path: str | Path, overrides: list[str] | None = None) -> Scenario:
    raw = load_scenario_dict(path)
    for item in overrides or []:
        apply_override(raw, item)
    return scenario_from_dict(raw)


def _parse_override_value(text: str):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        return text


def apply_override(raw: dict, item: str) -> None:
    """Apply a "dotted.key=value" override onto the raw scenario dict."""
    if "=" not in item:
        raise ScenarioError("override", f"expected key=value, got {item!r}")
    key, _, value = item.partition("=")
    parts = key.strip().split(".")
    target = raw
    for part in parts[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise ScenarioError("override", f"{key!r} does not address a section")
    target[parts[-1]] = _parse_override_value(value.strip())
