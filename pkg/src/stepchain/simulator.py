"""Deterministic multi-node scenario runner.

Builds one node per scenario slot on an in-process bus, applies the
topology and timed peering events, injects the workload, and steps every
node once per simulation step in node-id order. A report of identical
scenarios is byte-identical.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .clock import SimulatedClock
from .consensus import make_consensus
from .contracts import build_registry
from .core import NodeIdentity, Transaction, format_enode
from .network.transport import InProcessBus
from .node import Node
from .state import WorldState, encode_contract_call, valid_store_value

BASE_PORT = 5000


class ScenarioError(ValueError):
    """Scenario validation failure; names the offending field."""

    def __init__(self, fieldname: str, message: str):
        self.fieldname = fieldname
        super().__init__(f"{fieldname}: {message}")


@dataclass
class PeerEvent:
    step: int
    action: str  # "add" | "remove"
    a: int
    b: int


@dataclass
class WorkloadEvent:
    step: int
    sender: int
    receiver: int
    value: int
    data: str = ""


@dataclass
class RandomWorkload:
    count: int
    start: int
    end: int
    max_value: int = 10


@dataclass
class Scenario:
    node_count: int
    steps: int
    consensus: dict
    seed: int = 0
    genesis_balances: dict[int, int] = field(default_factory=dict)
    genesis_contract: dict = field(default_factory=dict)
    program: str = "none"
    topology_kind: str = "full"
    topology_events: list[PeerEvent] = field(default_factory=list)
    workload: list[WorkloadEvent] = field(default_factory=list)
    random_workload: Optional[RandomWorkload] = None
    verify_interval: int = 0

    def validate(self) -> None:
        if self.node_count < 1:
            raise ScenarioError("nodes", f"need at least 1 node, got {self.node_count}")
        if self.steps < 1:
            raise ScenarioError("steps", f"need at least 1 step, got {self.steps}")
        if self.topology_kind not in ("full", "ring", "schedule"):
            raise ScenarioError("topology.kind", f"unknown kind {self.topology_kind!r}")
        if self.verify_interval < 0:
            raise ScenarioError("verify_interval", "must be >= 0")

        def check_id(value: int, fieldname: str) -> None:
            if not isinstance(value, int) or isinstance(value, bool) or not (
                0 <= value < self.node_count
            ):
                raise ScenarioError(fieldname, f"node id {value!r} out of range 0..{self.node_count - 1}")

        for account in self.genesis_balances:
            check_id(account, "genesis.balances")
        for i, ev in enumerate(self.topology_events):
            if ev.action not in ("add", "remove"):
                raise ScenarioError(f"topology.events[{i}].action", f"unknown action {ev.action!r}")
            check_id(ev.a, f"topology.events[{i}].a")
            check_id(ev.b, f"topology.events[{i}].b")
            if ev.a == ev.b:
                raise ScenarioError(f"topology.events[{i}]", "a node cannot peer with itself")
        for i, w in enumerate(self.workload):
            if w.step < 1:
                raise ScenarioError(f"workload[{i}].step", "must be >= 1")
            check_id(w.sender, f"workload[{i}].sender")
            check_id(w.receiver, f"workload[{i}].receiver")
            if w.value < 0:
                raise ScenarioError(f"workload[{i}].value", "must be >= 0")
        rw = self.random_workload
        if rw is not None:
            if rw.count < 0:
                raise ScenarioError("random_workload.count", "must be >= 0")
            if not (1 <= rw.start <= rw.end):
                raise ScenarioError("random_workload", f"bad step range {rw.start}..{rw.end}")
            if rw.max_value < 0:
                raise ScenarioError("random_workload.max_value", "must be >= 0")
        for key, value in self.genesis_contract.items():
            if not isinstance(key, str) or not valid_store_value(value):
                raise ScenarioError(f"genesis.contract.{key}", f"bad store value {value!r}")
        if self.consensus.get("type") == "poa":
            for signer in self.consensus.get("signers", []):
                check_id(signer, "consensus.signers")


@dataclass
class RunReport:
    seed: int
    node_count: int
    steps: int
    converged: bool
    convergence_step: Optional[int]
    fork_count: int
    message_counts: dict[str, int]
    block_intervals: dict
    nodes: list[dict]

    def to_json_obj(self) -> dict:
        return {
            "seed": self.seed,
            "node_count": self.node_count,
            "steps": self.steps,
            "converged": self.converged,
            "convergence_step": self.convergence_step,
            "fork_count": self.fork_count,
            "message_counts": dict(sorted(self.message_counts.items())),
            "block_intervals": self.block_intervals,
            "nodes": self.nodes,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2) + "\n"


CSV_HEADER = "step,node,chain_height,tip_hash_prefix,mempool_size"


class Simulation:
    """Stepwise driver: build once, then step_once()/run_to()/run()."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.registry = build_registry(scenario.program)
        genesis_state = WorldState(scenario.genesis_balances, scenario.genesis_contract)
        # make_consensus re-raises bad config as ValueError -> ScenarioError
        try:
            self.protocol = make_consensus(scenario.consensus, genesis_state, self.registry)
        except (ValueError, KeyError, TypeError) as exc:
            raise ScenarioError("consensus", str(exc)) from exc
        self.bus = InProcessBus()
        self.nodes = [
            Node(
                NodeIdentity(i, "127.0.0.1", BASE_PORT + i),
                self.protocol,
                SimulatedClock(),
                self.bus,
            )
            for i in range(scenario.node_count)
        ]
        for node in self.nodes:
            node.start_tcp()
            node.start_mining()
        self._apply_initial_topology()

        self._events_by_step: dict[int, list[PeerEvent]] = {}
        for ev in sorted(scenario.topology_events, key=lambda e: e.step):
            self._events_by_step.setdefault(ev.step, []).append(ev)
        self._workload_by_step: dict[int, list[WorkloadEvent]] = {}
        for w in self._expand_workload():
            self._workload_by_step.setdefault(w.step, []).append(w)

        self.step_index = 0
        self.submitted: list[Transaction] = []
        self.step_rows: list[str] = []
        self._converged_since: Optional[int] = None

    def _apply_initial_topology(self) -> None:
        kind = self.scenario.topology_kind
        n = len(self.nodes)
        if kind == "full":
            for i in range(n):
                for j in range(i + 1, n):
                    self.connect(i, j)
        elif kind == "ring" and n > 1:
            for i in range(n):
                self.connect(i, (i + 1) % n)

    def _expand_workload(self) -> list[WorkloadEvent]:
        events = list(self.scenario.workload)
        rw = self.scenario.random_workload
        if rw is not None and rw.count > 0:
            rng = random.Random(self.scenario.seed)
            n = self.scenario.node_count
            for _ in range(rw.count):
                step = rng.randint(rw.start, rw.end)
                sender = rng.randrange(n)
                receiver = rng.randrange(n - 1) if n > 1 else 0
                if n > 1 and receiver >= sender:
                    receiver += 1
                events.append(WorkloadEvent(step, sender, receiver, rng.randint(0, rw.max_value)))
        return sorted(events, key=lambda w: w.step)

    def connect(self, a: int, b: int) -> None:
        self.nodes[a].add_peer(format_enode(self.nodes[b].identity))
        self.nodes[b].add_peer(format_enode(self.nodes[a].identity))

    def disconnect(self, a: int, b: int) -> None:
        self.nodes[a].remove_peer(format_enode(self.nodes[b].identity))
        self.nodes[b].remove_peer(format_enode(self.nodes[a].identity))

    def tips(self) -> list[str]:
        return [node.tip.hash for node in self.nodes]

    def step_once(self) -> None:
        self.step_index += 1
        events = self._events_by_step.get(self.step_index, ())
        # removes first, so remove-then-add of the same edge leaves it present
        for ev in events:
            if ev.action == "remove":
                self.disconnect(ev.a, ev.b)
        for ev in events:
            if ev.action == "add":
                self.connect(ev.a, ev.b)
        for w in self._workload_by_step.get(self.step_index, ()):
            data = w.data
            tx = self.nodes[w.sender].submit_transaction(w.receiver, w.value, data)
            self.submitted.append(tx)
        for node in self.nodes:
            node.step()

        tips = self.tips()
        if all(t == tips[0] for t in tips):
            if self._converged_since is None:
                self._converged_since = self.step_index
        else:
            self._converged_since = None

        for node in self.nodes:
            self.step_rows.append(
                f"{self.step_index},{node.identity.id},{node.tip.height},"
                f"{node.tip.hash[:12]},{len(node.mempool)}"
            )

        vi = self.scenario.verify_interval
        if vi and self.step_index % vi == 0:
            for node in self.nodes:
                if not node.verify_own_chain():
                    raise RuntimeError(
                        f"safety violation: node {node.identity.id} chain fails verification "
                        f"at step {self.step_index}"
                    )

    def run_to(self, step: int) -> None:
        while self.step_index < step:
            self.step_once()

    def run(self) -> RunReport:
        self.run_to(self.scenario.steps)
        return self.build_report()

    def build_report(self) -> RunReport:
        chain0 = self.nodes[0].chain
        intervals = [
            chain0[i].timestamp - chain0[i - 1].timestamp for i in range(1, len(chain0))
        ]
        if intervals:
            stats = {
                "count": len(intervals),
                "min": min(intervals),
                "max": max(intervals),
                "mean": round(sum(intervals) / len(intervals), 3),
            }
        else:
            stats = {"count": 0, "min": None, "max": None, "mean": None}
        return RunReport(
            seed=self.scenario.seed,
            node_count=self.scenario.node_count,
            steps=self.scenario.steps,
            converged=self._converged_since is not None,
            convergence_step=self._converged_since,
            fork_count=sum(node.fork_count for node in self.nodes),
            message_counts=dict(self.bus.message_counts),
            block_intervals=stats,
            nodes=[
                {
                    "id": node.identity.id,
                    "tip_hash": node.tip.hash,
                    "chain_length": len(node.chain),
                    "total_difficulty": node.total_difficulty,
                    "state_digest": node.tip.state.digest(),
                    "mempool_size": len(node.mempool),
                }
                for node in self.nodes
            ],
        )

    def csv_text(self) -> str:
        return "\n".join([CSV_HEADER, *self.step_rows]) + "\n"


def run_scenario(scenario: Scenario) -> RunReport:
    """Run a validated scenario to completion and report on it."""
    return Simulation(scenario).run()


def contract_call_data(function: str, inputs: list) -> str:
    """Payload text for a workload event that invokes a contract function."""
    return encode_contract_call(function, inputs)
