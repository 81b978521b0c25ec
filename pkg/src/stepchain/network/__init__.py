"""Wire protocol, transports, and the periodic synchronization tasks."""

from .messages import (
    BlockReply,
    BlockRequest,
    ChainStatusReply,
    ChainStatusRequest,
    DecodeError,
    MempoolReply,
    MempoolRequest,
    Message,
    NodeStatus,
    StatusDump,
    SubmitTransaction,
    TransactionAccepted,
    decode,
    encode,
)
from .sync import ChainPinger, MempoolPinger, ProtocolError, handle_message
from .transport import InProcessBus, NodeServer, PeerUnreachable, TcpTransport

__all__ = [
    "BlockReply",
    "BlockRequest",
    "ChainStatusReply",
    "ChainStatusRequest",
    "MempoolReply",
    "MempoolRequest",
    "Message",
    "NodeStatus",
    "StatusDump",
    "SubmitTransaction",
    "TransactionAccepted",
    "DecodeError",
    "ProtocolError",
    "PeerUnreachable",
    "decode",
    "encode",
    "handle_message",
    "ChainPinger",
    "MempoolPinger",
    "InProcessBus",
    "NodeServer",
    "TcpTransport",
]
