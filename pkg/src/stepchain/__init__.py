"""stepchain: a lightweight research blockchain with pluggable consensus
and a deterministic stepped simulator."""

from .clock import ClockModeError, SimulatedClock, SystemClock
from .consensus import ProofOfAuthority, ProofOfWork, make_consensus, pow_target
from .contracts import build_registry
from .core import (
    Block,
    EnodeError,
    NodeIdentity,
    Transaction,
    ZERO_HASH,
    build_genesis,
    compute_block_hash,
    compute_transaction_id,
    compute_transactions_root,
    format_enode,
    make_transaction,
    parse_enode,
)
from .node import Mempool, Node
from .simulator import (
    PeerEvent,
    RandomWorkload,
    RunReport,
    Scenario,
    ScenarioError,
    Simulation,
    WorkloadEvent,
    contract_call_data,
    run_scenario,
)
from .state import (
    ContractCall,
    ContractRegistry,
    WorldState,
    apply_block,
    apply_transaction,
    decode_contract_call,
    encode_contract_call,
    state_digest,
)

__version__ = "0.1.0"

__all__ = [
    "Block",
    "ClockModeError",
    "ContractCall",
    "ContractRegistry",
    "EnodeError",
    "Mempool",
    "Node",
    "NodeIdentity",
    "PeerEvent",
    "ProofOfAuthority",
    "ProofOfWork",
    "RandomWorkload",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "SimulatedClock",
    "Simulation",
    "SystemClock",
    "Transaction",
    "WorkloadEvent",
    "WorldState",
    "ZERO_HASH",
    "apply_block",
    "apply_transaction",
    "build_genesis",
    "build_registry",
    "compute_block_hash",
    "compute_transaction_id",
    "compute_transactions_root",
    "contract_call_data",
    "decode_contract_call",
    "encode_contract_call",
    "format_enode",
    "make_consensus",
    "make_transaction",
    "parse_enode",
    "pow_target",
    "run_scenario",
    "state_digest",
]
