"""Deterministic world state and its transition function.

The state digest is SHA-256 over the canonical JSON form of the state:
keys sorted lexicographically at every level, compact separators, UTF-8.
Balance keys are rendered as decimal strings. Contract store values are
restricted to integers, strings, and lists of integers so the canonical
form is total.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Callable

ContractFn = Callable[[dict, int, int, list], None]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def valid_store_value(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, str)):
        return True
    if isinstance(value, list):
        return all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    return False


@dataclass(frozen=True)
class ContractCall:
    """A decoded smart-contract invocation: function name plus inputs."""

    function: str
    inputs: list


def decode_contract_call(data: str) -> ContractCall | None:
    """Decode a transaction payload into a contract call.

    Only a JSON object with exactly the keys "function" (string) and
    "inputs" (list) qualifies; anything else is opaque data and yields None.
    """
    try:
        obj = json.loads(data)
    except (ValueError, TypeError):
        return None
    if not isinstance(obj, dict) or set(obj) != {"function", "inputs"}:
        return None
    if not isinstance(obj["function"], str) or not isinstance(obj["inputs"], list):
        return None
    return ContractCall(obj["function"], obj["inputs"])


def encode_contract_call(function: str, inputs: list) -> str:
    return canonical_json({"function": function, "inputs": inputs})


class ContractRegistry:
    """Named deterministic transition functions over the contract store.

    Registered callables take (store, sender, value, inputs) and mutate the
    store in place; they never see the balances map.
    """

    def __init__(self, functions: dict[str, ContractFn] | None = None):
        self.functions: dict[str, ContractFn] = dict(functions or {})

    def register(self, name: str, fn: ContractFn) -> None:
        self.functions[name] = fn

    def get(self, name: str) -> ContractFn | None:
        return self.functions.get(name)


class WorldState:
    """Toycoin balances plus the contract store.

    Instances are treated as immutable once produced; transitions return
    new states, sharing unchanged parts.
    """

    def __init__(self, balances: dict[int, int] | None = None, contract: dict | None = None):
        self.balances: dict[int, int] = dict(balances or {})
        self.contract: dict = dict(contract or {})

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, WorldState)
            and self.balances == other.balances
            and self.contract == other.contract
        )

    def __repr__(self) -> str:
        return f"WorldState(balances={self.balances!r}, contract={self.contract!r})"

    def balance(self, account: int) -> int:
        return self.balances.get(account, 0)

    def total_supply(self) -> int:
        return sum(self.balances.values())

    def with_contract_entry(self, key: str, value) -> "WorldState":
        contract = dict(self.contract)
        contract[key] = value
        return WorldState(self.balances, contract)

    def to_json_obj(self) -> dict:
        return {
            "balances": {str(k): v for k, v in self.balances.items()},
            "contract": copy.deepcopy(self.contract),
        }

    @classmethod
    def from_json_obj(cls, obj) -> "WorldState":
        if not isinstance(obj, dict) or set(obj) != {"balances", "contract"}:
            raise ValueError(f"bad state object: {obj!r}")
        balances: dict[int, int] = {}
        for key, value in obj["balances"].items():
            if not isinstance(key, str) or not key.isdigit():
                raise ValueError(f"bad balance key: {key!r}")
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"bad balance for account {key}: {value!r}")
            balances[int(key)] = value
        if not isinstance(obj["contract"], dict):
            raise ValueError("contract store must be an object")
        for key, value in obj["contract"].items():
            if not isinstance(key, str) or not valid_store_value(value):
                raise ValueError(f"bad contract entry {key!r}: {value!r}")
        return cls(balances, copy.deepcopy(obj["contract"]))

    def digest(self) -> str:
        text = canonical_json(self.to_json_obj())
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def state_digest(state: WorldState) -> str:
    return state.digest()


def apply_transaction(state: WorldState, tx, registry: ContractRegistry) -> WorldState:
    """Apply one transaction, returning the next state.

    The transfer happens only if the sender holds at least tx.value; an
    underfunded transaction is a complete no-op (the contract call does not
    run either). After a successful transfer, an undecodable payload or an
    unregistered function degrades to a no-op call. Nothing raises, so
    replicas can never diverge on error handling.
    """
    if state.balance(tx.sender) < tx.value:
        return state
    balances = dict(state.balances)
    balances[tx.sender] = balances.get(tx.sender, 0) - tx.value
    balances[tx.receiver] = balances.get(tx.receiver, 0) + tx.value

    contract = state.contract
    call = decode_contract_call(tx.data)
    if call is not None:
        fn = registry.get(call.function)
        if fn is not None:
            contract = copy.deepcopy(state.contract)
            fn(contract, tx.sender, tx.value, list(call.inputs))
    return WorldState(balances, contract)


def apply_transactions(state: WorldState, txs, registry: ContractRegistry) -> WorldState:
    for tx in txs:
        state = apply_transaction(state, tx, registry)
    return state


def apply_block(state: WorldState, block, registry: ContractRegistry) -> WorldState:
    """Left fold of apply_transaction over the block body, in order."""
    return apply_transactions(state, block.data, registry)
