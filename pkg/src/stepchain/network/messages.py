"""Wire protocol.

Frame = 4-byte big-endian unsigned body length, then a UTF-8 JSON body::

    {"type": <tag>, "payload": {...}}

with keys sorted and compact separators, hashes as 64-hex strings and
integers as plain decimal numbers. Block and transaction objects carry the
exact field names of their canonical serializations. Sync protocol tags:

    status_req   {}                                   -> status_rep
    status_rep   {tip_hash, total_difficulty}
    block_req    {known_hashes: [<=5 hashes]}         -> block_rep
    block_rep    {common: hash|null, partial: [block, ...]}
    mempool_req  {}                                   -> mempool_rep
    mempool_rep  {transactions: [tx, ...]}

Control-socket tags (same framing, used by the CLI against a live node):

    submit_tx    {receiver, value, data}              -> tx_accepted
    tx_accepted  {transaction: tx}
    dump_status  {}                                   -> node_status
    node_status  {tip_hash, height, total_difficulty, mempool_size, peer_count}

Any malformed frame (truncated, oversize, unknown tag, schema violation)
raises DecodeError and the connection handling it is closed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from ..core import Block, Hash, Transaction, is_hash
from ..state import canonical_json

MAX_FRAME = 64 * 1024 * 1024
MAX_KNOWN_HASHES = 5


class DecodeError(ValueError):
    """A frame or message body that violates the wire format."""


@dataclass(frozen=True)
class ChainStatusRequest:
    TYPE = "status_req"


@dataclass(frozen=True)
class ChainStatusReply:
    TYPE = "status_rep"
    tip_hash: Hash = ""
    total_difficulty: int = 0


@dataclass(frozen=True)
class BlockRequest:
    TYPE = "block_req"
    known_hashes: tuple[Hash, ...] = ()

    def __post_init__(self):
        if len(self.known_hashes) > MAX_KNOWN_HASHES:
            raise ValueError(f"block request carries at most {MAX_KNOWN_HASHES} hashes")


@dataclass
class BlockReply:
    """Partial chain after a common block, or the none answer
    (common is None) when no common block was found."""

    TYPE = "block_rep"
    common: Optional[Hash] = None
    partial: list[Block] = field(default_factory=list)

    def __post_init__(self):
        if self.common is None and self.partial:
            raise ValueError("a none block reply cannot carry blocks")


@dataclass(frozen=True)
class MempoolRequest:
    TYPE = "mempool_req"


@dataclass
class MempoolReply:
    TYPE = "mempool_rep"
    transactions: list[Transaction] = field(default_factory=list)


@dataclass(frozen=True)
class SubmitTransaction:
    TYPE = "submit_tx"
    receiver: int = 0
    value: int = 0
    data: str = ""


@dataclass
class TransactionAccepted:
    TYPE = "tx_accepted"
    transaction: Transaction = None


@dataclass(frozen=True)
class StatusDump:
    TYPE = "dump_status"


@dataclass(frozen=True)
class NodeStatus:
    TYPE = "node_status"
    tip_hash: Hash = ""
    height: int = 0
    total_difficulty: int = 0
    mempool_size: int = 0
    peer_count: int = 0


Message = Union[
    ChainStatusRequest,
    ChainStatusReply,
    BlockRequest,
    BlockReply,
    MempoolRequest,
    MempoolReply,
    SubmitTransaction,
    TransactionAccepted,
    StatusDump,
    NodeStatus,
]


def _payload(msg: Message) -> dict:
    if isinstance(msg, (ChainStatusRequest, MempoolRequest, StatusDump)):
        return {}
    if isinstance(msg, ChainStatusReply):
        return {"tip_hash": msg.tip_hash, "total_difficulty": msg.total_difficulty}
    if isinstance(msg, BlockRequest):
        return {"known_hashes": list(msg.known_hashes)}
    if isinstance(msg, BlockReply):
        return {
            "common": msg.common,
            "partial": [b.to_json_obj() for b in msg.partial],
        }
    if isinstance(msg, MempoolReply):
        return {"transactions": [t.to_json_obj() for t in msg.transactions]}
    if isinstance(msg, SubmitTransaction):
        return {"receiver": msg.receiver, "value": msg.value, "data": msg.data}
    if isinstance(msg, TransactionAccepted):
        return {"transaction": msg.transaction.to_json_obj()}
    if isinstance(msg, NodeStatus):
        return {
            "tip_hash": msg.tip_hash,
            "height": msg.height,
            "total_difficulty": msg.total_difficulty,
            "mempool_size": msg.mempool_size,
            "peer_count": msg.peer_count,
        }
    raise TypeError(f"not a wire message: {msg!r}")


def encode_body(msg: Message) -> bytes:
    text = canonical_json({"type": msg.TYPE, "payload": _payload(msg)})
    return text.encode("utf-8")


def encode(msg: Message) -> bytes:
    """Full frame: length prefix plus body."""
    body = encode_body(msg)
    if len(body) > MAX_FRAME:
        raise ValueError(f"message body exceeds {MAX_FRAME} bytes")
    return struct.pack(">I", len(body)) + body


def _expect_keys(payload: Any, keys: set[str], tag: str) -> dict:
    if not isinstance(payload, dict) or set(payload) != keys:
        raise DecodeError(f"bad payload for {tag}: {payload!r}")
    return payload


def _uint(payload: dict, key: str, tag: str) -> int:
    value = payload[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise DecodeError(f"{tag}.{key} must be a non-negative integer")
    return value


def _hash(payload: dict, key: str, tag: str) -> Hash:
    value = payload[key]
    if not is_hash(value):
        raise DecodeError(f"{tag}.{key} is not a 64-hex digest: {value!r}")
    return value


def decode_body(body: bytes) -> Message:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"body is not UTF-8 JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"type", "payload"}:
        raise DecodeError(f"top level must be {{type, payload}}: {obj!r}")
    tag = obj["type"]
    payload = obj["payload"]
    try:
        if tag == ChainStatusRequest.TYPE:
            _expect_keys(payload, set(), tag)
            return ChainStatusRequest()
        if tag == ChainStatusReply.TYPE:
            _expect_keys(payload, {"tip_hash", "total_difficulty"}, tag)
            return ChainStatusReply(
                tip_hash=_hash(payload, "tip_hash", tag),
                total_difficulty=_uint(payload, "total_difficulty", tag),
            )
        if tag == BlockRequest.TYPE:
            _expect_keys(payload, {"known_hashes"}, tag)
            hashes = payload["known_hashes"]
            if (
                not isinstance(hashes, list)
                or len(hashes) > MAX_KNOWN_HASHES
                or not all(is_hash(h) for h in hashes)
            ):
                raise DecodeError(f"bad known_hashes: {hashes!r}")
            return BlockRequest(known_hashes=tuple(hashes))
        if tag == BlockReply.TYPE:
            _expect_keys(payload, {"common", "partial"}, tag)
            common = payload["common"]
            if common is not None and not is_hash(common):
                raise DecodeError(f"bad common hash: {common!r}")
            if not isinstance(payload["partial"], list):
                raise DecodeError("partial must be a list")
            partial = [Block.from_json_obj(b) for b in payload["partial"]]
            return BlockReply(common=common, partial=partial)
        if tag == MempoolRequest.TYPE:
            _expect_keys(payload, set(), tag)
            return MempoolRequest()
        if tag == MempoolReply.TYPE:
            _expect_keys(payload, {"transactions"}, tag)
            if not isinstance(payload["transactions"], list):
                raise DecodeError("transactions must be a list")
            txs = [Transaction.from_json_obj(t) for t in payload["transactions"]]
            return MempoolReply(transactions=txs)
        if tag == SubmitTransaction.TYPE:
            _expect_keys(payload, {"receiver", "value", "data"}, tag)
            if not isinstance(payload["data"], str):
                raise DecodeError("submit_tx.data must be a string")
            return SubmitTransaction(
                receiver=_uint(payload, "receiver", tag),
                value=_uint(payload, "value", tag),
                data=payload["data"],
            )
        if tag == TransactionAccepted.TYPE:
            _expect_keys(payload, {"transaction"}, tag)
            return TransactionAccepted(Transaction.from_json_obj(payload["transaction"]))
        if tag == StatusDump.TYPE:
            _expect_keys(payload, set(), tag)
            return StatusDump()
        if tag == NodeStatus.TYPE:
            keys = {"tip_hash", "height", "total_difficulty", "mempool_size", "peer_count"}
            _expect_keys(payload, keys, tag)
            return NodeStatus(
                tip_hash=_hash(payload, "tip_hash", tag),
                height=_uint(payload, "height", tag),
                total_difficulty=_uint(payload, "total_difficulty", tag),
                mempool_size=_uint(payload, "mempool_size", tag),
                peer_count=_uint(payload, "peer_count", tag),
            )
    except DecodeError:
        raise
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    raise DecodeError(f"unknown message type: {tag!r}")


def decode(frame: bytes) -> Message:
    """Decode one complete frame; the length prefix must match exactly."""
    if len(frame) < 4:
        raise DecodeError("frame shorter than the length prefix")
    (length,) = struct.unpack(">I", frame[:4])
    if length > MAX_FRAME:
        raise DecodeError(f"declared frame length {length} exceeds {MAX_FRAME}")
    if len(frame) - 4 != length:
        raise DecodeError(f"frame declares {length} bytes but carries {len(frame) - 4}")
    return decode_body(frame[4:])
