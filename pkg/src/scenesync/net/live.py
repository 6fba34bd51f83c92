"""UDP transport carrying the same encoded messages as the simulator."""

from __future__ import annotations

import socket
from typing import Optional

from ..errors import TransportError
from .wire import MAX_DATAGRAM, Message, decode, encode

Address = tuple[str, int]


class DatagramTransport:
    """One bound UDP socket per node; peers are addressed by node id.

    Unknown senders are learned from incoming datagrams, so a server does
    not need its clients' ports up front.
    """

    def __init__(self, node_id: int, bind: Address = ("127.0.0.1", 0), peers: Optional[dict[int, Address]] = None):
        self.node_id = node_id
        self.peers: dict[int, Address] = dict(peers or {})
        try:
            self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self.sock.bind(bind)
        except OSError as exc:
            raise TransportError(f"cannot bind {bind}: {exc}") from exc
        self.captured: list[bytes] = []

    @property
    def address(self) -> Address:
        return self.sock.getsockname()

    def live_send(self, dst: int, msg: Message) -> bytes:
        try:
            addr = self.peers[dst]
        except KeyError:
            raise TransportError(f"no address known for node {dst}") from None
        data = encode(msg)
        try:
            self.sock.sendto(data, addr)
        except OSError as exc:
            raise TransportError(f"send to {addr} failed: {exc}") from exc
        return data

    def live_recv(self, timeout: Optional[float] = None) -> Optional[Message]:
        """Next decoded message, or ``None`` if nothing arrived in ``timeout`` seconds."""
        self.sock.settimeout(timeout)
        try:
            data, addr = self.sock.recvfrom(MAX_DATAGRAM + 64)
        except (socket.timeout, BlockingIOError):
            return None
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        self.captured.append(data)
        msg = decode(data)
        self.peers.setdefault(msg.sender, addr)
        return msg

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
