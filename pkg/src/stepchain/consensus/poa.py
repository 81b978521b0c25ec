"""Proof-of-Authority: only authorized signers produce blocks, at least
block_period apart. The round-robin preferred signer for a height seals
with diff_inturn; the others wait delay_noturn longer and seal with
diff_noturn, so an in-turn block always outweighs a no-turn competitor.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..core import Block, compute_transactions_root
from ..state import apply_transactions
from .base import ConsensusProtocol, ProductionTask

DIFF_INTURN = 2
DIFF_NOTURN = 1
DELAY_NOTURN = 2


class SigningTask(ProductionTask):
    """Produces a block once the signer's clock reaches the tip timestamp
    plus block_period (plus delay_noturn when out of turn). A competing
    block adopted in the meantime moves the tip, which abandons the pending
    draft automatically because everything is recomputed from the tip."""

    idle_seconds = 0.1

    def __init__(self, node, protocol: "ProofOfAuthority"):
        super().__init__(node)
        self.protocol = protocol

    def step(self) -> Optional[Block]:
        proto = self.protocol
        node = self.node
        if not self.active or node.identity.id not in proto.signers:
            return None
        tip = node.tip
        height = tip.height + 1
        inturn = proto.inturn_signer(height) == node.identity.id
        ready_at = tip.timestamp + proto.block_period
        if not inturn:
            ready_at += proto.delay_noturn
        # Polled, never slept: the node lock is held during a step, and a
        # competing block adopted while waiting must abandon this round.
        if node.clock.now() < ready_at:
            return None
        data = node.mempool.ordered()
        difficulty = proto.diff_inturn if inturn else proto.diff_noturn
        block = Block(
            height=height,
            parent_hash=tip.hash,
            data=data,
            timestamp=node.clock.now(),
            miner_id=node.identity.id,
            difficulty=difficulty,
            total_difficulty=tip.total_difficulty + difficulty,
            transactions_root=compute_transactions_root(data),
            state=apply_transactions(tip.state, data, proto.registry),
            nonce=0,
        ).seal()
        node.append_block(block)
        return block


class ProofOfAuthority(ConsensusProtocol):
    name = "poa"

    def __init__(
        self,
        genesis_state,
        registry,
        signers: Sequence[int],
        block_period: int,
        diff_inturn: int = DIFF_INTURN,
        diff_noturn: int = DIFF_NOTURN,
        delay_noturn: int = DELAY_NOTURN,
        trust: bool = False,
    ):
        signers = list(signers)
        if not signers:
            raise ValueError("signers must be non-empty")
        if len(set(signers)) != len(signers):
            raise ValueError("signers must not contain duplicates")
        if block_period < 1:
            raise ValueError("block_period must be >= 1")
        if not diff_inturn > diff_noturn:
            raise ValueError("diff_inturn must exceed diff_noturn")
        if diff_noturn < 1:
            raise ValueError("diff_noturn must be >= 1")
        if delay_noturn < 0:
            raise ValueError("delay_noturn must be >= 0")
        self.signers = signers
        self.block_period = block_period
        self.diff_inturn = diff_inturn
        self.diff_noturn = diff_noturn
        self.delay_noturn = delay_noturn
        super().__init__(genesis_state, registry, trust)

    def rule_params(self) -> dict:
        return {
            "type": self.name,
            "signers": self.signers,
            "block_period": self.block_period,
            "diff_inturn": self.diff_inturn,
            "diff_noturn": self.diff_noturn,
            "delay_noturn": self.delay_noturn,
        }

    def inturn_signer(self, height: int) -> int:
        """Round-robin preferred signer for a height: signers[height mod n]."""
        return self.signers[height % len(self.signers)]

    def production_task(self, node) -> SigningTask:
        return SigningTask(node, self)

    def _timestamp_ok(self, block: Block, prev: Block) -> bool:
        # Inclusive bound: block_period is the minimum gap.
        return block.timestamp - prev.timestamp >= self.block_period

    def _difficulty_ok(self, block: Block, prev: Block) -> bool:
        if block.miner_id not in self.signers:
            return False
        expected = (
            self.diff_inturn
            if self.inturn_signer(block.height) == block.miner_id
            else self.diff_noturn
        )
        return block.difficulty == expected
