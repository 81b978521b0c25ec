"""Request/reply transports.

Both modes move the same frames produced by messages.encode/decode: the
simulation bus takes bytes in and hands bytes back so stepped runs
exercise the real wire encoding, only replacing sockets with a
synchronous, deterministic dispatch.
"""

from __future__ import annotations

import logging
import socket
import struct
import threading
from collections import Counter

from ..core import NodeIdentity
from . import messages

logger = logging.getLogger(__name__)

REQUEST_TIMEOUT = 2.0


class PeerUnreachable(Exception):
    """The peer did not accept or answer the request; skip it this tick."""


class InProcessBus:
    """Synchronous in-memory transport keyed by (host, port).

    request() decodes the frame, invokes the target node's message handler
    and returns the encoded reply, counting every message by type.
    """

    def __init__(self):
        self._endpoints: dict[tuple[str, int], object] = {}
        self.message_counts: Counter = Counter()

    def register(self, node) -> None:
        self._endpoints[node.identity.endpoint] = node

    def unregister(self, node) -> None:
        self._endpoints.pop(node.identity.endpoint, None)

    def request(self, target: NodeIdentity, frame: bytes) -> bytes:
        node = self._endpoints.get(target.endpoint)
        if node is None:
            raise PeerUnreachable(f"no listener at {target.endpoint}")
        msg = messages.decode(frame)
        self.message_counts[msg.TYPE] += 1
        reply = node.handle_message(msg)
        self.message_counts[reply.TYPE] += 1
        return messages.encode(reply)


def _read_exact(conn: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = conn.recv(min(remaining, 65536))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(conn: socket.socket) -> bytes:
    """Read one length-prefixed frame off a stream socket."""
    header = _read_exact(conn, 4)
    (length,) = struct.unpack(">I", header)
    if length > messages.MAX_FRAME:
        raise messages.DecodeError(f"declared frame length {length} exceeds limit")
    return header + _read_exact(conn, length)


class TcpTransport:
    """One request and one reply per TCP connection."""

    def __init__(self, timeout: float = REQUEST_TIMEOUT):
        self.timeout = timeout

    def request(self, target: NodeIdentity, frame: bytes) -> bytes:
        try:
            with socket.create_connection(target.endpoint, timeout=self.timeout) as conn:
                conn.sendall(frame)
                return read_frame(conn)
        except (OSError, ConnectionError) as exc:
            raise PeerUnreachable(f"{target.endpoint}: {exc}") from exc


class NodeServer:
    """Accept loop answering one connection at a time (real-time mode)."""

    def __init__(self, node, host: str, port: int):
        self.node = node
        self.host = host
        self.port = port
        self._listener: socket.socket | None = None
        self._thread: threading.Thread | None = None
        self._stopping = threading.Event()

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.host, self.port))  # bind failure surfaces here
        listener.listen(8)
        listener.settimeout(0.2)
        self._listener = listener
        self._stopping.clear()
        self._thread = threading.Thread(target=self._serve, daemon=True, name=f"server-{self.port}")
        self._thread.start()

    def stop(self) -> None:
        self._stopping.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        if self._listener is not None:
            self._listener.close()
            self._listener = None

    def _serve(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with conn:
                try:
                    conn.settimeout(REQUEST_TIMEOUT)
                    frame = read_frame(conn)
                    msg = messages.decode(frame)
                    reply = self.node.handle_message(msg)
                    conn.sendall(messages.encode(reply))
                except Exception as exc:  # noqa: BLE001 - close, keep serving
                    logger.debug("dropping connection: %s", exc)
