"""Canonical data types and the hashing/serialization rules everything else
depends on bit-for-bit.

Canonical serializations (all SHA-256 over UTF-8 text):

* transaction id preimage::

    sender=<int>|receiver=<int>|value=<int>|data=<raw string>|timestamp=<int>|nonce=<int>

* block hash preimage::

    height=<int>|parent_hash=<64hex>|timestamp=<int>|miner_id=<int>|difficulty=<int>|total_difficulty=<int>|transactions_root=<64hex>|state_digest=<64hex>|nonce=<int>

* transactions root: SHA-256 over the in-order concatenation of the raw
  32-byte transaction ids; the empty list hashes the empty byte string.

Integers are decimal, digests lowercase hex. The block hash covers the
digest of the recorded post-state, so recorded state is tamper-evident
even when verifiers skip transaction re-execution.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Any

from .state import WorldState

Hash = str

ZERO_HASH = "0" * 64

_HASH_RE = re.compile(r"^[0-9a-f]{64}$")
_ENODE_RE = re.compile(r"^enode://(?P<id>[^@]*)@(?P<host>[^@:]+):(?P<port>[^:]*)$")


def sha256_hex(text: str) -> Hash:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def is_hash(value: Any) -> bool:
    return isinstance(value, str) and bool(_HASH_RE.match(value))


class EnodeError(ValueError):
    """Raised for text that does not match enode://<id>@<host>:<port>."""


@dataclass(frozen=True, order=True)
class NodeIdentity:
    """Network identity of a node: unique integer id plus TCP endpoint."""

    id: int
    host: str
    port: int

    def __post_init__(self) -> None:
        if self.id < 0:
            raise EnodeError(f"node id must be non-negative, got {self.id}")
        if not (1 <= self.port <= 65535):
            raise EnodeError(f"port out of range 1-65535: {self.port}")

    @property
    def endpoint(self) -> tuple[str, int]:
        return (self.host, self.port)


def parse_enode(text: str) -> NodeIdentity:
    """Parse ``enode://<id>@<host>:<port>``; errors name the bad component."""
    if not isinstance(text, str) or not text.startswith("enode://"):
        raise EnodeError(f"missing enode:// scheme in {text!r}")
    m = _ENODE_RE.match(text)
    if m is None:
        raise EnodeError(f"malformed enode (expected enode://<id>@<host>:<port>): {text!r}")
    if not m.group("id").isdigit():
        raise EnodeError(f"non-numeric node id in enode: {m.group('id')!r}")
    if not m.group("port").isdigit():
        raise EnodeError(f"non-numeric port in enode: {m.group('port')!r}")
    return NodeIdentity(int(m.group("id")), m.group("host"), int(m.group("port")))


def format_enode(ident: NodeIdentity) -> str:
    return f"enode://{ident.id}@{ident.host}:{ident.port}"


@dataclass
class Transaction:
    """A value transfer with an opaque data payload (optionally a contract
    call document), identified by the digest of its own fields."""

    sender: int
    receiver: int
    value: int
    data: str
    timestamp: int
    id: Hash
    nonce: int

    def to_json_obj(self) -> dict:
        return {
            "sender": self.sender,
            "receiver": self.receiver,
            "value": self.value,
            "data": self.data,
            "timestamp": self.timestamp,
            "id": self.id,
            "nonce": self.nonce,
        }

    @classmethod
    def from_json_obj(cls, obj: Any) -> "Transaction":
        if not isinstance(obj, dict) or set(obj) != {
            "sender", "receiver", "value", "data", "timestamp", "id", "nonce",
        }:
            raise ValueError(f"bad transaction object: {obj!r}")
        for key in ("sender", "receiver", "value", "timestamp", "nonce"):
            if not isinstance(obj[key], int) or isinstance(obj[key], bool) or obj[key] < 0:
                raise ValueError(f"transaction field {key} must be a non-negative integer")
        if not isinstance(obj["data"], str):
            raise ValueError("transaction data must be a string")
        if not is_hash(obj["id"]):
            raise ValueError(f"bad transaction id: {obj['id']!r}")
        return cls(**obj)


def transaction_id_preimage(
    sender: int, receiver: int, value: int, data: str, timestamp: int, nonce: int
) -> str:
    return (
        f"sender={sender}|receiver={receiver}|value={value}"
        f"|data={data}|timestamp={timestamp}|nonce={nonce}"
    )


def compute_transaction_id(
    sender: int, receiver: int, value: int, data: str, timestamp: int, nonce: int
) -> Hash:
    return sha256_hex(transaction_id_preimage(sender, receiver, value, data, timestamp, nonce))


def make_transaction(
    sender: int, receiver: int, value: int, data: str, timestamp: int, nonce: int
) -> Transaction:
    """Build a transaction with its id computed from the other fields."""
    tx_id = compute_transaction_id(sender, receiver, value, data, timestamp, nonce)
    return Transaction(sender, receiver, value, data, timestamp, tx_id, nonce)


def transaction_id_recomputes(tx: Transaction) -> bool:
    return tx.id == compute_transaction_id(
        tx.sender, tx.receiver, tx.value, tx.data, tx.timestamp, tx.nonce
    )


def compute_transactions_root(txs: list[Transaction]) -> Hash:
    digest = hashlib.sha256()
    for tx in txs:
        digest.update(bytes.fromhex(tx.id))
    return digest.hexdigest()


def block_hash_preimage(
    height: int,
    parent_hash: Hash,
    timestamp: int,
    miner_id: int,
    difficulty: int,
    total_difficulty: int,
    transactions_root: Hash,
    state_digest: Hash,
    nonce: int,
) -> str:
    return (
        f"height={height}|parent_hash={parent_hash}|timestamp={timestamp}"
        f"|miner_id={miner_id}|difficulty={difficulty}|total_difficulty={total_difficulty}"
        f"|transactions_root={transactions_root}|state_digest={state_digest}|nonce={nonce}"
    )


def compute_block_hash(
    height: int,
    parent_hash: Hash,
    timestamp: int,
    miner_id: int,
    difficulty: int,
    total_difficulty: int,
    transactions_root: Hash,
    state_digest: Hash,
    nonce: int,
) -> Hash:
    return sha256_hex(
        block_hash_preimage(
            height,
            parent_hash,
            timestamp,
            miner_id,
            difficulty,
            total_difficulty,
            transactions_root,
            state_digest,
            nonce,
        )
    )


@dataclass
class Block:
    """One block: header fields, ordered transaction body, and the recorded
    post-state that results from applying the body to the parent state."""

    height: int
    parent_hash: Hash
    data: list[Transaction]
    timestamp: int
    miner_id: int
    difficulty: int
    total_difficulty: int
    transactions_root: Hash
    state: WorldState
    nonce: int = 0
    hash: Hash = field(default="")

    def compute_hash(self) -> Hash:
        return compute_block_hash(
            self.height,
            self.parent_hash,
            self.timestamp,
            self.miner_id,
            self.difficulty,
            self.total_difficulty,
            self.transactions_root,
            self.state.digest(),
            self.nonce,
        )

    def seal(self) -> "Block":
        self.hash = self.compute_hash()
        return self

    def tx_ids(self) -> set[Hash]:
        return {tx.id for tx in self.data}

    def to_json_obj(self) -> dict:
        return {
            "height": self.height,
            "parent_hash": self.parent_hash,
            "data": [tx.to_json_obj() for tx in self.data],
            "timestamp": self.timestamp,
            "miner_id": self.miner_id,
            "difficulty": self.difficulty,
            "total_difficulty": self.total_difficulty,
            "transactions_root": self.transactions_root,
            "state": self.state.to_json_obj(),
            "nonce": self.nonce,
            "hash": self.hash,
        }

    @classmethod
    def from_json_obj(cls, obj: Any) -> "Block":
        expected = {
            "height", "parent_hash", "data", "timestamp", "miner_id", "difficulty",
            "total_difficulty", "transactions_root", "state", "nonce", "hash",
        }
        if not isinstance(obj, dict) or set(obj) != expected:
            raise ValueError(f"bad block object: {obj!r}")
        for key in ("height", "timestamp", "miner_id", "difficulty", "total_difficulty", "nonce"):
            if not isinstance(obj[key], int) or isinstance(obj[key], bool) or obj[key] < 0:
                raise ValueError(f"block field {key} must be a non-negative integer")
        for key in ("parent_hash", "transactions_root", "hash"):
            if not is_hash(obj[key]):
                raise ValueError(f"bad block field {key}: {obj[key]!r}")
        if not isinstance(obj["data"], list):
            raise ValueError("block data must be a list")
        return cls(
            height=obj["height"],
            parent_hash=obj["parent_hash"],
            data=[Transaction.from_json_obj(t) for t in obj["data"]],
            timestamp=obj["timestamp"],
            miner_id=obj["miner_id"],
            difficulty=obj["difficulty"],
            total_difficulty=obj["total_difficulty"],
            transactions_root=obj["transactions_root"],
            state=WorldState.from_json_obj(obj["state"]),
            nonce=obj["nonce"],
            hash=obj["hash"],
        )


def build_genesis(state: WorldState) -> Block:
    """Height-0 block shared by every node of a network: zero parent hash,
    miner 0, difficulty 0, nonce 0, timestamp 0, no transactions."""
    block = Block(
        height=0,
        parent_hash=ZERO_HASH,
        data=[],
        timestamp=0,
        miner_id=0,
        difficulty=0,
        total_difficulty=0,
        transactions_root=compute_transactions_root([]),
        state=state,
        nonce=0,
    )
    return block.seal()
