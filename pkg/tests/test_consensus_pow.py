"""Proof-of-Work: target arithmetic, mining behavior, chain verification."""

import statistics

from stepchain.consensus.pow import meets_target, pow_target
from stepchain.core import compute_block_hash, make_transaction

from support import build_block, copy_chain, make_node, make_pow


class TestTarget:
    def test_difficulty_one_admits_every_hash(self):
        assert pow_target(1) == 1 << 256
        assert meets_target("f" * 64, pow_target(1))

    def test_difficulty_two_requires_top_bit_zero(self):
        assert pow_target(2) == 1 << 255
        assert meets_target("7" + "f" * 63, pow_target(2))
        assert not meets_target("8" + "0" * 63, pow_target(2))

    def test_mean_attempts_tracks_difficulty(self):
        # Geometric sampling: over 1000 sealed blocks at difficulty 1000 the
        # mean attempt count sits within 3 sigma of 1000
        # (sigma_mean ~= 1000/sqrt(1000) ~= 31.6).
        difficulty = 1000
        target = pow_target(difficulty)
        protocol = make_pow(difficulty=difficulty)
        genesis = protocol.genesis
        state_digest = genesis.state.digest()
        attempts = []
        for trial in range(1000):
            nonce = 0
            while True:
                digest = compute_block_hash(
                    1, genesis.hash, trial + 1, 0, difficulty, difficulty,
                    genesis.transactions_root, state_digest, nonce,
                )
                nonce += 1
                if meets_target(digest, target):
                    break
            attempts.append(nonce)
        mean = statistics.fmean(attempts)
        sigma_mean = difficulty / (len(attempts) ** 0.5)
        assert abs(mean - difficulty) < 3 * sigma_mean


class TestUpdateBlock:
    def test_empty_mempool_draft(self):
        protocol = make_pow()
        node = make_node(protocol)
        draft = protocol.update_block(node)
        assert draft.data == []
        assert draft.state.digest() == node.tip.state.digest()
        assert draft.parent_hash == node.tip.hash
        assert draft.height == 1
        assert draft.total_difficulty == protocol.mining_difficulty

    def test_new_transaction_enters_next_draft(self):
        protocol = make_pow()
        node = make_node(protocol)
        first = protocol.update_block(node)
        assert first.data == []
        tx = node.submit_transaction(receiver=1, value=2)
        second = protocol.update_block(node)
        assert [t.id for t in second.data] == [tx.id]

    def test_identical_nodes_draft_identically_except_miner(self):
        protocol = make_pow()
        a = make_node(protocol, node_id=0)
        b = make_node(protocol, node_id=1)
        tx = make_transaction(2, 3, 1, "", 0, 0)
        a.mempool.insert(tx, a.chain_tx_ids)
        b.mempool.insert(tx, b.chain_tx_ids)
        da = protocol.update_block(a)
        db = protocol.update_block(b)
        assert da.miner_id == 0 and db.miner_id == 1
        da.miner_id = db.miner_id = 99
        assert da == db


class TestMiningStep:
    def test_sealed_block_meets_target(self):
        protocol = make_pow(difficulty=8, attempts=8)
        node = make_node(protocol, mine=True)
        sealed = None
        for _ in range(500):
            node.step()
            if len(node.chain) > 1:
                sealed = node.chain[1]
                break
        assert sealed is not None
        assert meets_target(sealed.hash, protocol.target)
        assert sealed.difficulty == 8
        assert sealed.total_difficulty == 8

    def test_difficulty_one_seals_on_first_attempt(self):
        protocol = make_pow(difficulty=1, attempts=1)
        node = make_node(protocol, mine=True)
        node.step()
        assert len(node.chain) == 2
        assert node.chain[1].nonce == 0

    def test_inactive_task_never_produces(self):
        protocol = make_pow(difficulty=1)
        node = make_node(protocol, mine=False)
        for _ in range(20):
            node.step()
        assert len(node.chain) == 1


class TestVerifyChain:
    def _mined_chain(self, protocol, blocks=3):
        node = make_node(protocol, mine=True)
        for _ in range(10000):
            node.step()
            if len(node.chain) > blocks:
                break
        assert len(node.chain) > blocks
        return node

    def test_accepts_own_mined_chain(self):
        protocol = make_pow(difficulty=4)
        node = self._mined_chain(protocol)
        genesis = node.chain[0]
        assert protocol.verify_chain(node.chain[1:], genesis, genesis.state)

    def test_rejects_tampered_transaction(self):
        protocol = make_pow(difficulty=2)
        node = make_node(protocol, mine=True)
        node.submit_transaction(receiver=1, value=5)
        for _ in range(200):
            node.step()
            if len(node.chain) >= 3:
                break
        chain = copy_chain(node.chain[1:])
        victim = next(b for b in chain if b.data)
        victim.data[0].value += 1
        genesis = node.chain[0]
        assert not protocol.verify_chain(chain, genesis, genesis.state)

    def test_rejects_equal_timestamps(self):
        protocol = make_pow(difficulty=1)
        genesis = protocol.genesis
        a = _mine_block(protocol, genesis, timestamp=5)
        b = _mine_block(protocol, a, timestamp=5)
        assert not protocol.verify_chain([a, b], genesis, genesis.state)
        c = _mine_block(protocol, a, timestamp=6)
        assert protocol.verify_chain([a, c], genesis, genesis.state)

    def test_rejects_wrong_difficulty(self):
        protocol = make_pow(difficulty=1)
        genesis = protocol.genesis
        block = build_block(protocol, genesis, miner=0, timestamp=5, difficulty=2)
        assert not protocol.verify_chain([block], genesis, genesis.state)

    def test_rejects_broken_linkage(self):
        protocol = make_pow(difficulty=1)
        genesis = protocol.genesis
        a = _mine_block(protocol, genesis, timestamp=5)
        b = _mine_block(protocol, a, timestamp=6)
        assert not protocol.verify_chain([b], genesis, genesis.state)

    def test_trust_skips_state_replay_but_not_header_binding(self):
        trusting = make_pow(difficulty=1, trust=True)
        strict = make_pow(difficulty=1, trust=False)
        assert trusting.genesis.hash == strict.genesis.hash
        genesis = trusting.genesis
        block = _mine_block(trusting, genesis, timestamp=5)
        assert trusting.verify_chain([block], genesis, genesis.state)
        assert strict.verify_chain([block], genesis, genesis.state)


def _mine_block(protocol, parent, timestamp):
    """Seal a block at a fixed timestamp by brute nonce search."""
    block = build_block(protocol, parent, miner=0, timestamp=timestamp)
    while not meets_target(block.compute_hash(), protocol.target):
        block.nonce += 1
    return block.seal()
