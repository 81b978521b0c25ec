"""Consensus plug-in contract.

A protocol contributes three things: the genesis block every node starts
from, a block-production task, and a chain verifier. Rule parameters are
embedded into the genesis state (contract key "consensus") so that nodes
configured with different rules end up with different genesis hashes and
cannot accidentally merge chains. The trust flag is deliberately not
embedded: it is a local verification policy, and trusting and re-executing
verifiers must accept the same honestly produced chains.
"""

from __future__ import annotations

import logging
from typing import Optional

from ..core import Block, build_genesis, compute_transactions_root, transaction_id_recomputes
from ..state import ContractRegistry, WorldState, apply_block, canonical_json

logger = logging.getLogger(__name__)

CONSENSUS_STATE_KEY = "consensus"


class ProductionTask:
    """Block production driver with start/stop/step.

    In simulations step() is called once per node step; in real time a
    thread calls step() in a loop. Either way one invocation performs a
    bounded amount of work and appends at most one block via
    node.append_block().
    """

    idle_seconds = 0.05  # pause between real-time step() calls

    def __init__(self, node):
        self.node = node
        self.active = False

    def start(self) -> None:
        self.active = True

    def stop(self) -> None:
        self.active = False

    def step(self) -> Optional[Block]:
        raise NotImplementedError


class ConsensusProtocol:
    """Base class for consensus plug-ins; holds genesis, trust flag, and the
    contract registry used for state re-execution."""

    name = "base"

    def __init__(self, genesis_state: WorldState, registry: ContractRegistry, trust: bool):
        self.registry = registry
        self.trust = trust
        embedded = genesis_state.with_contract_entry(
            CONSENSUS_STATE_KEY, canonical_json(self.rule_params())
        )
        self.genesis = build_genesis(embedded)

    def rule_params(self) -> dict:
        """Chain-rule parameters shared by all nodes of a network."""
        raise NotImplementedError

    def production_task(self, node) -> ProductionTask:
        raise NotImplementedError

    # Per-protocol verification hooks.

    def _timestamp_ok(self, block: Block, prev: Block) -> bool:
        raise NotImplementedError

    def _difficulty_ok(self, block: Block, prev: Block) -> bool:
        raise NotImplementedError

    def _seal_ok(self, block: Block) -> bool:
        return True

    def verify_block(self, block: Block, previous_state: WorldState) -> bool:
        """Structural and state checks independent of the block's position:
        every transaction id recomputes, the transactions root recomputes,
        the header hash recomputes (binding the recorded state digest), the
        protocol seal holds, and - unless trust is set - re-executing the
        body from the previous state reproduces the recorded state digest.
        """
        for tx in block.data:
            if not transaction_id_recomputes(tx):
                return False
        if compute_transactions_root(block.data) != block.transactions_root:
            return False
        if block.compute_hash() != block.hash:
            return False
        if not self._seal_ok(block):
            return False
        if not self.trust:
            replayed = apply_block(previous_state, block, self.registry)
            if replayed.digest() != block.state.digest():
                return False
        return True

    def verify_chain(
        self, chain: list[Block], previous_block: Block, previous_state: WorldState
    ) -> bool:
        """Check a (partial) chain against the block that precedes it.

        True iff every block in order links to its predecessor, satisfies
        the protocol's timestamp and difficulty rules, accumulates total
        difficulty, and passes verify_block.
        """
        prev = previous_block
        state = previous_state
        for block in chain:
            if block.parent_hash != prev.hash:
                return False
            if block.height != prev.height + 1:
                return False
            if not self._timestamp_ok(block, prev):
                return False
            if not self._difficulty_ok(block, prev):
                return False
            if block.total_difficulty != prev.total_difficulty + block.difficulty:
                return False
            if not self.verify_block(block, state):
                return False
            prev = block
            state = block.state
        return True
