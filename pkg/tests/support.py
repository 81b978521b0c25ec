"""Shared builders for tests: protocols, simulation nodes, hand-built chains."""

from __future__ import annotations

from stepchain.clock import SimulatedClock
from stepchain.consensus import ProofOfAuthority, ProofOfWork
from stepchain.contracts import build_registry
from stepchain.core import (
    Block,
    NodeIdentity,
    compute_transactions_root,
)
from stepchain.network.transport import InProcessBus
from stepchain.node import Node
from stepchain.state import WorldState, apply_transactions

DEFAULT_BALANCES = {0: 100, 1: 100, 2: 100, 3: 100}


def make_pow(difficulty=4, trust=False, attempts=8, balances=None, program="none"):
    return ProofOfWork(
        WorldState(DEFAULT_BALANCES if balances is None else balances),
        build_registry(program),
        mining_difficulty=difficulty,
        trust=trust,
        attempts_per_step=attempts,
    )


def make_poa(signers=(0, 1, 2), block_period=5, delay_noturn=2, trust=False,
             balances=None, program="none", **kwargs):
    return ProofOfAuthority(
        WorldState(DEFAULT_BALANCES if balances is None else balances),
        build_registry(program),
        signers=list(signers),
        block_period=block_period,
        delay_noturn=delay_noturn,
        trust=trust,
        **kwargs,
    )


def make_node(protocol, node_id=0, bus=None, start=True, mine=False):
    bus = bus if bus is not None else InProcessBus()
    node = Node(
        NodeIdentity(node_id, "127.0.0.1", 5000 + node_id),
        protocol,
        SimulatedClock(),
        bus,
    )
    if start:
        node.start_tcp()
    if mine:
        node.start_mining()
    return node


def connect(a: Node, b: Node) -> None:
    a.add_peer(b.enode())
    b.add_peer(a.enode())


def build_block(protocol, parent: Block, miner: int, timestamp: int, txs=(),
                difficulty=None) -> Block:
    """Hand-build a sealed block on a parent, defaulting to the protocol's
    correct difficulty for the miner/height (PoA) or mining difficulty (PoW)."""
    txs = list(txs)
    height = parent.height + 1
    if difficulty is None:
        if isinstance(protocol, ProofOfAuthority):
            inturn = protocol.inturn_signer(height) == miner
            difficulty = protocol.diff_inturn if inturn else protocol.diff_noturn
        else:
            difficulty = protocol.mining_difficulty
    return Block(
        height=height,
        parent_hash=parent.hash,
        data=txs,
        timestamp=timestamp,
        miner_id=miner,
        difficulty=difficulty,
        total_difficulty=parent.total_difficulty + difficulty,
        transactions_root=compute_transactions_root(txs),
        state=apply_transactions(parent.state, txs, protocol.registry),
        nonce=0,
    ).seal()


def build_poa_chain(protocol, length: int, start_ts: int = None, txs_at=None) -> list[Block]:
    """In-turn chain of `length` blocks on the protocol's genesis."""
    txs_at = txs_at or {}
    period = protocol.block_period
    blocks = []
    parent = protocol.genesis
    for i in range(1, length + 1):
        ts = (start_ts or period) + (i - 1) * period
        miner = protocol.inturn_signer(parent.height + 1)
        block = build_block(protocol, parent, miner, ts, txs_at.get(i, ()))
        blocks.append(block)
        parent = block
    return blocks


def copy_block(block: Block) -> Block:
    """Deep copy through the wire serialization."""
    return Block.from_json_obj(block.to_json_obj())


def copy_chain(chain: list[Block]) -> list[Block]:
    return [copy_block(b) for b in chain]
