"""Message handling and the two periodic synchronization tasks.

The chain pinger asks each peer for its tip status; only when the peer
reports a strictly higher total difficulty does it start the block-request
walk, offering its last 5 block hashes (then the next-older 5, and so on)
until the peer finds a common block and answers with the partial chain
after it. The mempool pinger simply merges novel transactions.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from . import messages
from .messages import (
    BlockReply,
    BlockRequest,
    ChainStatusReply,
    ChainStatusRequest,
    DecodeError,
    MempoolReply,
    MempoolRequest,
    NodeStatus,
    StatusDump,
    SubmitTransaction,
    TransactionAccepted,
)
from .transport import PeerUnreachable

if TYPE_CHECKING:
    from ..core import NodeIdentity
    from ..node import Node

logger = logging.getLogger(__name__)

CHAIN_SYNC_INTERVAL = 2
MEMPOOL_SYNC_INTERVAL = 2
MEMPOOL_SYNC_PHASE = 1


class ProtocolError(Exception):
    """The peer answered with the wrong message type or inconsistent data."""


def handle_message(node: "Node", msg: messages.Message) -> messages.Message:
    """Answer one request against the node's current chain and mempool."""
    if isinstance(msg, ChainStatusRequest):
        tip = node.tip
        return ChainStatusReply(tip_hash=tip.hash, total_difficulty=tip.total_difficulty)
    if isinstance(msg, MempoolRequest):
        return MempoolReply(transactions=node.mempool.ordered())
    if isinstance(msg, BlockRequest):
        known = set(msg.known_hashes)
        chain = node.chain
        for i in range(len(chain) - 1, -1, -1):
            if chain[i].hash in known:
                return BlockReply(common=chain[i].hash, partial=list(chain[i + 1 :]))
        return BlockReply(common=None, partial=[])
    if isinstance(msg, SubmitTransaction):
        tx = node.submit_transaction(msg.receiver, msg.value, msg.data)
        return TransactionAccepted(transaction=tx)
    if isinstance(msg, StatusDump):
        tip = node.tip
        return NodeStatus(
            tip_hash=tip.hash,
            height=tip.height,
            total_difficulty=tip.total_difficulty,
            mempool_size=len(node.mempool),
            peer_count=len(node.peers),
        )
    raise ProtocolError(f"not a request: {msg.TYPE}")


class _Pinger:
    """Periodic per-peer task, stepped in simulations and looped by a
    thread in real time. A tick visits peers in node-id order; an
    unreachable or misbehaving peer is skipped until the next tick."""

    interval = 2
    phase = 0

    def __init__(self, node: "Node"):
        self.node = node

    def due(self, now: int) -> bool:
        return now % self.interval == self.phase

    def tick(self) -> None:
        for peer in self.node.sorted_peers():
            try:
                self._visit(peer)
            except (PeerUnreachable, DecodeError, ProtocolError) as exc:
                logger.debug("node %s skipping peer %s: %s", self.node.identity.id, peer.id, exc)

    def _request(self, peer: "NodeIdentity", msg: messages.Message) -> messages.Message:
        reply_frame = self.node.transport.request(peer, messages.encode(msg))
        return messages.decode(reply_frame)

    def _visit(self, peer: "NodeIdentity") -> None:
        raise NotImplementedError


class ChainPinger(_Pinger):
    interval = CHAIN_SYNC_INTERVAL
    phase = 0

    def _visit(self, peer: "NodeIdentity") -> None:
        status = self._request(peer, ChainStatusRequest())
        if not isinstance(status, ChainStatusReply):
            raise ProtocolError(f"expected status_rep, got {status.TYPE}")
        with self.node.lock:
            tip = self.node.tip
            if status.tip_hash == tip.hash:
                return  # synchronized, no action needed
            if status.total_difficulty <= tip.total_difficulty:
                return  # equal or lower total difficulty: keep own chain
        self._walk_back(peer)

    def _walk_back(self, peer: "NodeIdentity") -> None:
        offset = 0
        while True:
            with self.node.lock:
                chain = self.node.chain
                upper = len(chain) - offset
                known = [b.hash for b in reversed(chain[max(0, upper - 5) : upper])]
            if not known:
                # The whole chain, genesis included, is unknown to the peer:
                # incompatible network, give up on this peer for now.
                raise ProtocolError("no common block, genesis differs")
            reply = self._request(peer, BlockRequest(known_hashes=tuple(known)))
            if not isinstance(reply, BlockReply):
                raise ProtocolError(f"expected block_rep, got {reply.TYPE}")
            if reply.common is None:
                offset += 5
                continue
            with self.node.lock:
                self.node.sync_chain(reply.partial, reply.common)
            return


class MempoolPinger(_Pinger):
    interval = MEMPOOL_SYNC_INTERVAL
    phase = MEMPOOL_SYNC_PHASE

    def _visit(self, peer: "NodeIdentity") -> None:
        reply = self._request(peer, MempoolRequest())
        if not isinstance(reply, MempoolReply):
            raise ProtocolError(f"expected mempool_rep, got {reply.TYPE}")
        with self.node.lock:
            for tx in reply.transactions:
                self.node.mempool.insert(tx, self.node.chain_tx_ids)
