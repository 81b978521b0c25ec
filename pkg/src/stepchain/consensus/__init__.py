"""Pluggable consensus protocols: Proof-of-Work and Proof-of-Authority."""

from __future__ import annotations

from ..state import ContractRegistry, WorldState
from .base import CONSENSUS_STATE_KEY, ConsensusProtocol, ProductionTask
from .poa import DELAY_NOTURN, DIFF_INTURN, DIFF_NOTURN, ProofOfAuthority
from .pow import DEFAULT_ATTEMPTS_PER_STEP, ProofOfWork, meets_target, pow_target

__all__ = [
    "CONSENSUS_STATE_KEY",
    "ConsensusProtocol",
    "ProductionTask",
    "ProofOfAuthority",
    "ProofOfWork",
    "DIFF_INTURN",
    "DIFF_NOTURN",
    "DELAY_NOTURN",
    "DEFAULT_ATTEMPTS_PER_STEP",
    "pow_target",
    "meets_target",
    "make_consensus",
]


def make_consensus(
    config: dict, genesis_state: WorldState, registry: ContractRegistry
) -> ConsensusProtocol:
    """Build a protocol from a scenario-style config section.

    Required key "type" ("pow" or "poa"); the rest are the protocol's
    parameters, with the usual defaults applied.
    """
    cfg = dict(config)
    kind = cfg.pop("type", None)
    if kind == "pow":
        kwargs = dict(
            mining_difficulty=cfg.pop("mining_difficulty", None),
            trust=cfg.pop("trust", False),
            attempts_per_step=cfg.pop("attempts_per_step", DEFAULT_ATTEMPTS_PER_STEP),
        )
        if kwargs["mining_difficulty"] is None:
            raise ValueError("consensus.mining_difficulty is required for pow")
        if cfg:
            raise ValueError(f"unknown consensus option(s): {sorted(cfg)}")
        return ProofOfWork(genesis_state, registry, **kwargs)
    if kind == "poa":
        kwargs = dict(
            signers=cfg.pop("signers", None),
            block_period=cfg.pop("block_period", None),
            diff_inturn=cfg.pop("diff_inturn", DIFF_INTURN),
            diff_noturn=cfg.pop("diff_noturn", DIFF_NOTURN),
            delay_noturn=cfg.pop("delay_noturn", DELAY_NOTURN),
            trust=cfg.pop("trust", False),
        )
        if kwargs["signers"] is None:
            raise ValueError("consensus.signers is required for poa")
        if kwargs["block_period"] is None:
            raise ValueError("consensus.block_period is required for poa")
        if cfg:
            raise ValueError(f"unknown consensus option(s): {sorted(cfg)}")
        return ProofOfAuthority(genesis_state, registry, **kwargs)
    raise ValueError(f"unknown consensus type: {kind!r}")
