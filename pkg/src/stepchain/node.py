"""Per-node orchestration: local chain, mempool, peer set, consensus task
lifecycle, and partial-chain adoption with fork handling.

The same node code runs in two modes. In simulation mode everything
advances through step() and message delivery is synchronous on the
in-process bus. In real-time mode a TCP server answers requests while the
production task and the two pingers run as threads; chain, mempool, and
peer set are guarded by one lock held for the duration of a single
protocol action, never across network waits.
"""

from __future__ import annotations

import logging
import threading
import time
from typing import Optional

from .clock import ClockModeError
from .core import (
    Block,
    Hash,
    NodeIdentity,
    Transaction,
    format_enode,
    make_transaction,
    parse_enode,
    transaction_id_recomputes,
)
from .network import sync as netsync
from .network.transport import NodeServer

logger = logging.getLogger(__name__)


class Mempool:
    """Pending transactions keyed by id.

    Insertion is idempotent and refuses ids already present in the local
    chain, so a transaction id appears at most once across chain + mempool.
    """

    def __init__(self):
        self.entries: dict[Hash, Transaction] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, tx_id: Hash) -> bool:
        return tx_id in self.entries

    def insert(self, tx: Transaction, chain_ids: set[Hash]) -> bool:
        if tx.id in self.entries or tx.id in chain_ids:
            return False
        if not transaction_id_recomputes(tx):
            return False  # structurally invalid, degrade to a no-op
        self.entries[tx.id] = tx
        return True

    def remove_ids(self, ids) -> None:
        for tx_id in ids:
            self.entries.pop(tx_id, None)

    def ordered(self) -> list[Transaction]:
        """Mempool contents in the canonical block-inclusion order."""
        return sorted(self.entries.values(), key=lambda tx: (tx.timestamp, tx.id))


class Node:
    """One blockchain node: chain, mempool, peers, consensus, clock."""

    def __init__(self, identity: NodeIdentity, consensus, clock, transport, realtime: bool = False):
        self.identity = identity
        self.consensus = consensus
        self.clock = clock
        self.transport = transport
        self.realtime = realtime

        self.chain: list[Block] = [consensus.genesis]
        self.mempool = Mempool()
        self.chain_tx_ids: set[Hash] = set()
        self.peers: dict[int, NodeIdentity] = {}
        self.lock = threading.RLock()
        self.fork_count = 0

        self._production = consensus.production_task(self)
        self._chain_pinger = netsync.ChainPinger(self)
        self._mempool_pinger = netsync.MempoolPinger(self)
        self._started = False
        self._submitted = 0
        self._server: Optional[NodeServer] = None
        self._net_stop = threading.Event()
        self._net_threads: list[threading.Thread] = []
        self._mining_thread: Optional[threading.Thread] = None

    # chain accessors -----------------------------------------------------

    @property
    def tip(self) -> Block:
        return self.chain[-1]

    @property
    def total_difficulty(self) -> int:
        return self.tip.total_difficulty

    @property
    def mining(self) -> bool:
        return self._production.active

    def enode(self) -> str:
        return format_enode(self.identity)

    def sorted_peers(self) -> list[NodeIdentity]:
        return [self.peers[i] for i in sorted(self.peers)]

    def verify_own_chain(self) -> bool:
        genesis = self.chain[0]
        if genesis.hash != self.consensus.genesis.hash:
            return False
        return self.consensus.verify_chain(self.chain[1:], genesis, genesis.state)

    # peering --------------------------------------------------------------

    def add_peer(self, enode: str) -> None:
        ident = parse_enode(enode)
        if ident.id == self.identity.id:
            return  # never our own peer
        with self.lock:
            self.peers[ident.id] = ident

    def remove_peer(self, enode: str) -> None:
        ident = parse_enode(enode)
        with self.lock:
            self.peers.pop(ident.id, None)

    # transactions ----------------------------------------------------------

    def submit_transaction(self, receiver: int, value: int, data: str = "") -> Transaction:
        """Build a transaction from this node (nonce = submissions so far)
        and insert it into the local mempool; pingers propagate it."""
        with self.lock:
            tx = make_transaction(
                sender=self.identity.id,
                receiver=receiver,
                value=value,
                data=data,
                timestamp=self.clock.now(),
                nonce=self._submitted,
            )
            self._submitted += 1
            self.mempool.insert(tx, self.chain_tx_ids)
            return tx

    # production -------------------------------------------------------------

    def start_mining(self) -> None:
        self._production.start()
        if self.realtime and (self._mining_thread is None or not self._mining_thread.is_alive()):
            self._mining_thread = threading.Thread(
                target=self._mining_loop, daemon=True, name=f"miner-{self.identity.id}"
            )
            self._mining_thread.start()

    def stop_mining(self) -> None:
        self._production.stop()
        if self._mining_thread is not None:
            self._mining_thread.join(timeout=5)
            self._mining_thread = None

    def _mining_loop(self) -> None:
        task = self._production
        while task.active:
            with self.lock:
                task.step()
            time.sleep(task.idle_seconds)

    def append_block(self, block: Block) -> None:
        """Append a locally produced block; its transactions leave the
        mempool so they can never be included twice."""
        with self.lock:
            if block.parent_hash != self.tip.hash:
                raise ValueError("produced block does not extend the current tip")
            self.chain.append(block)
            ids = block.tx_ids()
            self.chain_tx_ids |= ids
            self.mempool.remove_ids(ids)

    # chain synchronization ---------------------------------------------------

    def sync_chain(self, partial: list[Block], common_block_hash: Hash) -> bool:
        """Adopt a higher-difficulty partial chain on top of a common block.

        In order: re-check that the local total difficulty is still strictly
        lower; verify the partial chain under the consensus rules; drop its
        transactions from the mempool; if the common block is not the tip,
        truncate the fork and re-inject the orphaned transactions that the
        partial chain does not carry; append. Any failure leaves chain and
        mempool untouched.
        """
        with self.lock:
            if not partial:
                return False
            common_index = None
            for i in range(len(self.chain) - 1, -1, -1):
                if self.chain[i].hash == common_block_hash:
                    common_index = i
                    break
            if common_index is None:
                return False
            if partial[0].parent_hash != common_block_hash:
                return False
            if self.total_difficulty >= partial[-1].total_difficulty:
                return False
            common = self.chain[common_index]
            if not self.consensus.verify_chain(partial, common, common.state):
                logger.debug("node %s dropped invalid partial chain", self.identity.id)
                return False

            partial_ids = {tx.id for block in partial for tx in block.data}
            self.mempool.remove_ids(partial_ids)

            if common_index != len(self.chain) - 1:
                dropped = self.chain[common_index + 1 :]
                del self.chain[common_index + 1 :]
                self.fork_count += 1
                for block in dropped:
                    self.chain_tx_ids -= block.tx_ids()
                for block in dropped:
                    for tx in block.data:
                        if tx.id not in partial_ids:
                            self.mempool.insert(tx, self.chain_tx_ids)

            for block in partial:
                self.chain.append(block)
                self.chain_tx_ids |= block.tx_ids()
            return True

    # message handling -----------------------------------------------------------

    def handle_message(self, msg) -> object:
        with self.lock:
            return netsync.handle_message(self, msg)

    # drivers ----------------------------------------------------------------------

    def step(self) -> None:
        """Advance one simulation step: clock, production, chain pinger,
        mempool pinger. Inbound requests are answered synchronously by the
        bus whenever a peer steps, so there is no inbound queue to drain."""
        if self.realtime:
            raise ClockModeError("step() drives simulation nodes only")
        self.clock.step()
        if self._production.active:
            self._production.step()
        if self._started:
            now = self.clock.now()
            if self._chain_pinger.due(now):
                self._chain_pinger.tick()
            if self._mempool_pinger.due(now):
                self._mempool_pinger.tick()

    def start_tcp(self) -> None:
        if self._started:
            return
        if self.realtime:
            server = NodeServer(self, self.identity.host, self.identity.port)
            server.start()
            self._server = server
            self._net_stop.clear()
            self._net_threads = [
                threading.Thread(
                    target=self._pinger_loop,
                    args=(self._chain_pinger, 0.0),
                    daemon=True,
                    name=f"chain-pinger-{self.identity.id}",
                ),
                threading.Thread(
                    target=self._pinger_loop,
                    args=(self._mempool_pinger, 1.0),
                    daemon=True,
                    name=f"mempool-pinger-{self.identity.id}",
                ),
            ]
            for t in self._net_threads:
                t.start()
        else:
            self.transport.register(self)
        self._started = True

    def stop_tcp(self) -> None:
        if not self._started:
            return
        self._started = False
        if self.realtime:
            self._net_stop.set()
            for t in self._net_threads:
                t.join(timeout=5)
            self._net_threads = []
            if self._server is not None:
                self._server.stop()
                self._server = None
        else:
            self.transport.unregister(self)

    def _pinger_loop(self, pinger, initial_delay: float) -> None:
        if self._net_stop.wait(initial_delay):
            return
        while not self._net_stop.is_set():
            pinger.tick()
            if self._net_stop.wait(pinger.interval):
                return
