"""Command line: run scenarios, launch a real-time node, talk to its
control socket.

    stepchain run <scenario.toml> [--out DIR] [--override k=v ...]
    stepchain node --enode E --genesis FILE [--peer E ...] [--mine]
                   [--control-port P]
    stepchain ctl --port P status
    stepchain ctl --port P submit --receiver R --value V [--data D]

Exit codes for run: 0 success, 1 scenario validation error, 2 internal
error.
"""

from __future__ import annotations

import argparse
import signal
import sys
import threading
from pathlib import Path

from .clock import SystemClock
from .consensus import make_consensus
from .contracts import build_registry
from .core import EnodeError, parse_enode
from .network import messages
from .network.transport import NodeServer, PeerUnreachable, TcpTransport
from .node import Node
from .scenario import load_scenario, load_scenario_dict
from .simulator import ScenarioError, Simulation
from .state import WorldState


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation scenario")
    p_run.add_argument("scenario", help="scenario TOML file")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument(
        "--override", action="append", default=[], metavar="K=V",
        help="override a scenario key, e.g. steps=10 or consensus.trust=true",
    )

    p_node = sub.add_parser("node", help="run a real-time node")
    p_node.add_argument("--enode", required=True, help="own identity, enode://<id>@<host>:<port>")
    p_node.add_argument("--genesis", required=True, help="TOML file with [consensus] and [genesis]")
    p_node.add_argument("--peer", action="append", default=[], help="peer enode (repeatable)")
    p_node.add_argument("--mine", action="store_true", help="start block production")
    p_node.add_argument("--control-port", type=int, default=0,
                        help="local control socket port (0 = disabled)")

    p_ctl = sub.add_parser("ctl", help="talk to a node's control socket")
    p_ctl.add_argument("--host", default="127.0.0.1")
    p_ctl.add_argument("--port", type=int, required=True)
    ctl_sub = p_ctl.add_subparsers(dest="ctl_command", required=True)
    ctl_sub.add_parser("status", help="print the node's tip status")
    p_submit = ctl_sub.add_parser("submit", help="submit a transaction via the node")
    p_submit.add_argument("--receiver", type=int, required=True)
    p_submit.add_argument("--value", type=int, default=0)
    p_submit.add_argument("--data", default="")

    return parser


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario, args.override)
        sim = Simulation(scenario)
        report = sim.run()
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface as exit code 2
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json_text())
    (out_dir / "steps.csv").write_text(sim.csv_text())
    tag = f"converged at step {report.convergence_step}" if report.converged else "not converged"
    print(
        f"{tag}; chain length {report.nodes[0]['chain_length']}; "
        f"forks {report.fork_count}; report in {out_dir}/report.json"
    )
    return 0


def _load_genesis_setup(path: str):
    raw = load_scenario_dict(path)
    if "consensus" not in raw:
        raise ScenarioError("consensus", "missing [consensus] section")
    genesis = raw.get("genesis", {})
    balances = {int(k): v for k, v in genesis.get("balances", {}).items()}
    registry = build_registry(genesis.get("program", "none"))
    state = WorldState(balances, genesis.get("contract", {}))
    protocol = make_consensus(dict(raw["consensus"]), state, registry)
    return protocol


def cmd_node(args: argparse.Namespace) -> int:
    try:
        identity = parse_enode(args.enode)
        for peer in args.peer:
            parse_enode(peer)
    except EnodeError as exc:
        print(f"bad enode: {exc}", file=sys.stderr)
        return 2
    try:
        protocol = _load_genesis_setup(args.genesis)
    except (ScenarioError, ValueError) as exc:
        print(f"genesis error: {exc}", file=sys.stderr)
        return 1

    node = Node(identity, protocol, SystemClock(), TcpTransport(), realtime=True)
    control = None
    try:
        node.start_tcp()
        if args.control_port:
            control = NodeServer(node, "127.0.0.1", args.control_port)
            control.start()
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return 1

    for peer in args.peer:
        node.add_peer(peer)
    if args.mine:
        node.start_mining()

    stop = threading.Event()
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    print(f"node {identity.id} listening on {identity.host}:{identity.port}", flush=True)
    stop.wait()
    node.stop_mining()
    node.stop_tcp()
    if control is not None:
        control.stop()
    return 0


def cmd_ctl(args: argparse.Namespace) -> int:
    transport = TcpTransport()
    from .core import NodeIdentity

    target = NodeIdentity(0, args.host, args.port)
    if args.ctl_command == "status":
        request = messages.StatusDump()
    else:
        request = messages.SubmitTransaction(
            receiver=args.receiver, value=args.value, data=args.data
        )
    try:
        reply = messages.decode(transport.request(target, messages.encode(request)))
    except (PeerUnreachable, messages.DecodeError) as exc:
        print(f"control request failed: {exc}", file=sys.stderr)
        return 1
    if isinstance(reply, messages.NodeStatus):
        print(
            f"height {reply.height} tip {reply.tip_hash} "
            f"td {reply.total_difficulty} mempool {reply.mempool_size} peers {reply.peer_count}"
        )
    elif isinstance(reply, messages.TransactionAccepted):
        print(f"accepted {reply.transaction.id}")
    else:
        print(f"unexpected reply: {reply!r}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "node":
        return cmd_node(args)
    return cmd_ctl(args)


if __name__ == "__main__":
    sys.exit(main())
