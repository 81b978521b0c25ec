"""Scenario runner: determinism, topology schedules, validation, reports."""

import pytest

from stepchain.simulator import (
    PeerEvent,
    RandomWorkload,
    Scenario,
    ScenarioError,
    Simulation,
    WorkloadEvent,
    contract_call_data,
    run_scenario,
)


def poa_scenario(**overrides):
    base = dict(
        node_count=3,
        steps=60,
        consensus={"type": "poa", "signers": [0, 1, 2], "block_period": 5, "delay_noturn": 2},
        genesis_balances={0: 100, 1: 100, 2: 100},
        seed=1,
    )
    base.update(overrides)
    return Scenario(**base)


class TestRunScenario:
    def test_single_signer_production_cadence(self):
        scenario = Scenario(
            node_count=1,
            steps=50,
            consensus={"type": "poa", "signers": [0], "block_period": 5},
        )
        report = run_scenario(scenario)
        expected = 1 + (50 - 1) // 5
        assert abs(report.nodes[0]["chain_length"] - expected) <= 1
        assert report.block_intervals["min"] >= 5

    def test_disconnected_nodes_never_converge(self):
        scenario = poa_scenario(node_count=2, topology_kind="schedule",
                                genesis_balances={0: 100, 1: 100},
                                consensus={"type": "poa", "signers": [0, 1], "block_period": 5})
        report = run_scenario(scenario)
        assert not report.converged
        assert report.convergence_step is None
        assert all(n["chain_length"] > 1 for n in report.nodes)
        tips = {n["tip_hash"] for n in report.nodes}
        assert len(tips) == 2

    def test_identical_scenarios_are_byte_identical(self):
        sims = [Simulation(poa_scenario(random_workload=RandomWorkload(8, 1, 40, 5)))
                for _ in range(2)]
        reports = [sim.run() for sim in sims]
        assert reports[0].to_json_text() == reports[1].to_json_text()
        assert sims[0].csv_text() == sims[1].csv_text()

    def test_workload_contract_end_to_end(self):
        scenario = poa_scenario(
            steps=40,
            program="estimate-mean",
            workload=[
                WorkloadEvent(2, 0, 1, 0, contract_call_data("estimate", [30])),
                WorkloadEvent(4, 1, 2, 0, contract_call_data("estimate", [20])),
            ],
        )
        sim = Simulation(scenario)
        sim.run()
        contract = sim.nodes[0].tip.state.contract
        assert contract["sum"] == 50 and contract["count"] == 2 and contract["mean"] == 25

    def test_tx_ids_unique_across_chain_and_mempool_at_every_step(self):
        scenario = poa_scenario(steps=50, random_workload=RandomWorkload(10, 1, 30, 4))
        sim = Simulation(scenario)
        while sim.step_index < scenario.steps:
            sim.step_once()
            for node in sim.nodes:
                chain_ids = [tx.id for b in node.chain for tx in b.data]
                assert len(chain_ids) == len(set(chain_ids))
                assert not (set(chain_ids) & set(node.mempool.entries))

    def test_safety_spot_check_runs_clean(self):
        run_scenario(poa_scenario(verify_interval=10))


class TestSchedules:
    def test_remove_then_add_same_step_leaves_edge(self):
        scenario = poa_scenario(
            node_count=2,
            genesis_balances={0: 100, 1: 100},
            consensus={"type": "poa", "signers": [0], "block_period": 5},
            topology_kind="schedule",
            topology_events=[
                PeerEvent(1, "add", 0, 1),
                PeerEvent(3, "remove", 0, 1),
                PeerEvent(3, "add", 0, 1),
            ],
            steps=4,
        )
        sim = Simulation(scenario)
        sim.run()
        assert 1 in sim.nodes[0].peers and 0 in sim.nodes[1].peers

    def test_empty_schedule_keeps_initial_topology(self):
        sim = Simulation(poa_scenario(steps=2))
        assert all(len(node.peers) == 2 for node in sim.nodes)
        sim.run()
        assert all(len(node.peers) == 2 for node in sim.nodes)

    def test_partition_then_heal_converges(self):
        events = [PeerEvent(1, "add", a, b) for a, b in ((0, 1), (2, 3))]
        events += [PeerEvent(41, "add", a, b) for a in (0, 1) for b in (2, 3)]
        scenario = Scenario(
            node_count=4,
            steps=75,
            consensus={"type": "poa", "signers": [0, 1, 2, 3], "block_period": 5},
            topology_kind="schedule",
            topology_events=events,
            seed=3,
        )
        sim = Simulation(scenario)
        sim.run_to(40)
        assert sim.nodes[0].tip.hash != sim.nodes[2].tip.hash  # really partitioned
        sim.run_to(75)
        assert len(set(sim.tips())) == 1


class TestValidation:
    def test_unknown_node_in_event(self):
        with pytest.raises(ScenarioError, match="topology.events"):
            poa_scenario(topology_kind="schedule",
                         topology_events=[PeerEvent(1, "add", 0, 9)]).validate()

    def test_unknown_workload_sender(self):
        with pytest.raises(ScenarioError, match="workload"):
            poa_scenario(workload=[WorkloadEvent(1, 9, 0, 1)]).validate()

    def test_bad_topology_kind(self):
        with pytest.raises(ScenarioError, match="topology.kind"):
            poa_scenario(topology_kind="mesh").validate()

    def test_zero_nodes(self):
        with pytest.raises(ScenarioError, match="nodes"):
            poa_scenario(node_count=0).validate()

    def test_signer_out_of_range(self):
        with pytest.raises(ScenarioError, match="consensus.signers"):
            poa_scenario(node_count=2, genesis_balances={0: 100, 1: 100}).validate()

    def test_bad_random_workload_range(self):
        with pytest.raises(ScenarioError, match="random_workload"):
            poa_scenario(random_workload=RandomWorkload(5, 9, 2)).validate()

    def test_bad_consensus_config_reported_before_nodes_exist(self):
        scenario = poa_scenario(consensus={"type": "poa", "signers": [0, 1, 2]})
        with pytest.raises(ScenarioError, match="consensus"):
            Simulation(scenario)

    def test_event_self_edge_rejected(self):
        with pytest.raises(ScenarioError, match="peer with itself"):
            poa_scenario(topology_kind="schedule",
                         topology_events=[PeerEvent(1, "add", 1, 1)]).validate()


class TestReport:
    def test_report_shape(self):
        report = run_scenario(poa_scenario())
        obj = report.to_json_obj()
        assert set(obj) == {
            "seed", "node_count", "steps", "converged", "convergence_step",
            "fork_count", "message_counts", "block_intervals", "nodes",
        }
        assert {n["id"] for n in obj["nodes"]} == {0, 1, 2}
        for entry in obj["nodes"]:
            assert set(entry) == {
                "id", "tip_hash", "chain_length", "total_difficulty",
                "state_digest", "mempool_size",
            }

    def test_convergence_step_implies_equal_final_tips(self):
        report = run_scenario(poa_scenario(steps=63))
        if report.converged:
            tips = {n["tip_hash"] for n in report.nodes}
            assert len(tips) == 1

    def test_csv_rows_cover_every_step_and_node(self):
        scenario = poa_scenario(steps=10)
        sim = Simulation(scenario)
        sim.run()
        lines = sim.csv_text().strip().splitlines()
        assert lines[0] == "step,node,chain_height,tip_hash_prefix,mempool_size"
        assert len(lines) == 1 + 10 * 3
