"""Built-in example contract programs.

A program is a named set of contract functions installed into a
ContractRegistry; scenarios pick one by name.
"""

from __future__ import annotations

from .state import ContractRegistry


def _counter_increment(store: dict, sender: int, value: int, inputs: list) -> None:
    amount = inputs[0] if inputs and isinstance(inputs[0], int) else 1
    store["n"] = store.get("n", 0) + amount


def _counter_read(store: dict, sender: int, value: int, inputs: list) -> None:
    # Reading happens off-chain (the store is open data); kept as a no-op so
    # read calls are valid transactions.
    return None


def _estimate(store: dict, sender: int, value: int, inputs: list) -> None:
    if not inputs or not isinstance(inputs[0], int) or isinstance(inputs[0], bool):
        return
    store["sum"] = store.get("sum", 0) + inputs[0]
    store["count"] = store.get("count", 0) + 1
    store["mean"] = store["sum"] // store["count"]


PROGRAMS: dict[str, dict] = {
    "none": {},
    "counter": {
        "increment": _counter_increment,
        "read": _counter_read,
    },
    # Nodes submit integer estimates; the store keeps the running mean.
    "estimate-mean": {
        "estimate": _estimate,
    },
}


def build_registry(program: str = "none") -> ContractRegistry:
    if program not in PROGRAMS:
        raise ValueError(f"unknown contract program: {program!r} (have {sorted(PROGRAMS)})")
    return ContractRegistry(PROGRAMS[program])
