"""Proof-of-Work: a block seals when its hash, read as a 256-bit integer,
is strictly below floor(2^256 / mining_difficulty), so the difficulty is
the expected number of attempts.
"""

from __future__ import annotations

from typing import Optional

from ..core import Block, compute_block_hash, compute_transactions_root
from ..state import apply_transactions
from .base import ConsensusProtocol, ProductionTask

DEFAULT_ATTEMPTS_PER_STEP = 8


def pow_target(mining_difficulty: int) -> int:
    if mining_difficulty < 1:
        raise ValueError(f"mining difficulty must be >= 1, got {mining_difficulty}")
    return (1 << 256) // mining_difficulty


def meets_target(block_hash: str, target: int) -> bool:
    return int(block_hash, 16) < target


class MiningTask(ProductionTask):
    """Bounded nonce search: each step rebuilds the draft from the current
    tip and mempool (stale drafts never seal), then tries a fixed number of
    nonces. The nonce counter survives across steps while the draft content
    is unchanged."""

    idle_seconds = 0.005

    def __init__(self, node, protocol: "ProofOfWork"):
        super().__init__(node)
        self.protocol = protocol
        self._work_key = None
        self._nonce = 0

    def step(self) -> Optional[Block]:
        if not self.active:
            return None
        draft = self.protocol.update_block(self.node)
        key = (draft.height, draft.parent_hash, draft.timestamp, draft.transactions_root)
        if key != self._work_key:
            self._work_key = key
            self._nonce = 0
        state_digest = draft.state.digest()
        target = self.protocol.target
        for _ in range(self.protocol.attempts_per_step):
            candidate = compute_block_hash(
                draft.height,
                draft.parent_hash,
                draft.timestamp,
                draft.miner_id,
                draft.difficulty,
                draft.total_difficulty,
                draft.transactions_root,
                state_digest,
                self._nonce,
            )
            if meets_target(candidate, target):
                draft.nonce = self._nonce
                draft.hash = candidate
                self._work_key = None
                self._nonce = 0
                self.node.append_block(draft)
                return draft
            self._nonce += 1
        return None


class ProofOfWork(ConsensusProtocol):
    name = "pow"

    def __init__(
        self,
        genesis_state,
        registry,
        mining_difficulty: int,
        trust: bool = False,
        attempts_per_step: int = DEFAULT_ATTEMPTS_PER_STEP,
    ):
        if mining_difficulty < 1:
            raise ValueError("mining difficulty must be >= 1")
        if attempts_per_step < 1:
            raise ValueError("attempts_per_step must be >= 1")
        self.mining_difficulty = mining_difficulty
        self.attempts_per_step = attempts_per_step
        self.target = pow_target(mining_difficulty)
        super().__init__(genesis_state, registry, trust)

    def rule_params(self) -> dict:
        return {"type": self.name, "mining_difficulty": self.mining_difficulty}

    def update_block(self, node) -> Block:
        """Fresh draft on top of the node's tip carrying the full mempool
        ordered by (timestamp, id). The timestamp is bumped past the tip's
        when the clock has not moved (sub-second real-time production)."""
        tip = node.tip
        data = node.mempool.ordered()
        timestamp = max(node.clock.now(), tip.timestamp + 1)
        draft = Block(
            height=tip.height + 1,
            parent_hash=tip.hash,
            data=data,
            timestamp=timestamp,
            miner_id=node.identity.id,
            difficulty=self.mining_difficulty,
            total_difficulty=tip.total_difficulty + self.mining_difficulty,
            transactions_root=compute_transactions_root(data),
            state=apply_transactions(tip.state, data, self.registry),
            nonce=0,
        )
        return draft

    def production_task(self, node) -> MiningTask:
        return MiningTask(node, self)

    def _timestamp_ok(self, block: Block, prev: Block) -> bool:
        return block.timestamp > prev.timestamp

    def _difficulty_ok(self, block: Block, prev: Block) -> bool:
        return block.difficulty == self.mining_difficulty

    def _seal_ok(self, block: Block) -> bool:
        return meets_target(block.hash, self.target)
