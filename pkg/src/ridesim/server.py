"""Socket front end for the session engine.

One listen endpoint accepts two framings: newline-delimited frames over a
plain stream, or WebSocket text frames (sniffed from an HTTP upgrade request)
so the browser console connects to the same port. Because the framing is
sniffed from the first inbound bytes, a client starts receiving broadcasts
after its first message; hello is the natural opener. Reader threads only
decode and enqueue; every engine mutation happens on the tick loop. Outbound
fan-out goes through bounded per-client queues so a slow client can never
stall the tick loop (it gets disconnected instead).
"""

from __future__ import annotations

import base64
import hashlib
import json
import queue
import socket
import struct
import sys
import threading
import time
from collections import deque
from pathlib import Path

from . import wire
from .config import EngineConfig
from .errors import BindFailure, ConfigError, MalformedFrame, SchemaViolation, UnknownKind
from .session import SESSION_SENDER, Engine
from .telemetry import LogWriter

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_OUTBOX_LIMIT = 4096  # frames buffered per client before it is dropped
_RECV_LIMIT = 1 << 20


def parse_endpoint(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"listen endpoint must be host:port, got {listen!r}")
    try:
        return host, int(port)
    except ValueError as exc:
        raise ConfigError(f"bad port in listen endpoint {listen!r}") from exc


class _LineReader:
    """Buffered line reader that also lets the first line be sniffed."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.buf = b""

    def read_line(self) -> bytes | None:
        while b"\n" not in self.buf:
            if len(self.buf) > _RECV_LIMIT:
                return None
            chunk = self.sock.recv(65536)
            if not chunk:
                return None
            self.buf += chunk
        line, self.buf = self.buf.split(b"\n", 1)
        return line + b"\n"

    def read_exact(self, n: int) -> bytes | None:
        while len(self.buf) < n:
            chunk = self.sock.recv(65536)
            if not chunk:
                return None
            self.buf += chunk
        out, self.buf = self.buf[:n], self.buf[n:]
        return out


class _Conn:
    """One client connection: framing mode, outbox, reader/writer threads."""

    _next_id = 0
    _id_lock = threading.Lock()

    def __init__(self, sock: socket.socket, server: "SessionServer"):
        with _Conn._id_lock:
            _Conn._next_id += 1
            self.conn_id = _Conn._next_id
        self.sock = sock
        self.server = server
        self.reader = _LineReader(sock)
        self.websocket = False
        self.ready = False  # framing mode known; broadcasts start here
        self.alive = True
        self._outbox: deque[bytes] = deque()
        self._out_ready = threading.Condition()

    # --- outbound ---

    def enqueue(self, frame: bytes) -> None:
        """Queue one encoded wire frame; drops until the framing mode is known."""
        if not self.alive or not self.ready:
            return
        self._enqueue_raw(self._ws_frame(frame) if self.websocket else frame)

    def _enqueue_raw(self, data: bytes) -> None:
        with self._out_ready:
            if len(self._outbox) >= _OUTBOX_LIMIT:
                self.alive = False  # slow client: drop it rather than block
                self._out_ready.notify()
                return
            self._outbox.append(data)
            self._out_ready.notify()

    def _write_loop(self) -> None:
        try:
            while True:
                with self._out_ready:
                    while self.alive and not self._outbox:
                        self._out_ready.wait(timeout=0.25)
                    if not self.alive:
                        break
                    data = self._outbox.popleft()
                self.sock.sendall(data)
        except OSError:
            pass
        finally:
            self.close()

    @staticmethod
    def _ws_frame(payload: bytes) -> bytes:
        n = len(payload)
        head = b"\x81"  # FIN + text
        if n < 126:
            head += bytes([n])
        elif n < 1 << 16:
            head += b"\x7e" + struct.pack(">H", n)
        else:
            head += b"\x7f" + struct.pack(">Q", n)
        return head + payload

    # --- inbound ---

    def _read_loop(self) -> None:
        try:
            first = self.reader.read_line()
            if first is None:
                return
            if first.startswith(b"GET ") and b"HTTP/" in first:
                if not self._ws_handshake():
                    return
                self.websocket = True
                self.ready = True
                self._ws_read_loop()
            else:
                self.ready = True
                self._handle_frame(first)
                while self.alive:
                    line = self.reader.read_line()
                    if line is None:
                        break
                    self._handle_frame(line)
        except OSError:
            pass
        finally:
            self.close()

    def _ws_handshake(self) -> bool:
        headers: dict[str, str] = {}
        while True:
            line = self.reader.read_line()
            if line is None:
                return False
            stripped = line.strip()
            if not stripped:
                break
            name, _, value = stripped.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key")
        if not key:
            self.sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return False
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        self.sock.sendall(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\n"
            b"Connection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept.encode() + b"\r\n\r\n")
        return True

    def _ws_read_loop(self) -> None:
        message = b""
        while self.alive:
            head = self.reader.read_exact(2)
            if head is None:
                return
            fin = head[0] & 0x80
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                ext = self.reader.read_exact(2)
                if ext is None:
                    return
                length = struct.unpack(">H", ext)[0]
            elif length == 127:
                ext = self.reader.read_exact(8)
                if ext is None:
                    return
                length = struct.unpack(">Q", ext)[0]
            if length > _RECV_LIMIT:
                return
            mask = self.reader.read_exact(4) if masked else b""
            payload = self.reader.read_exact(length) if length else b""
            if payload is None:
                return
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                return
            if opcode == 0x9:  # ping -> pong
                self._enqueue_raw(b"\x8a" + bytes([len(payload)]) + payload)
                continue
            if opcode == 0xA:
                continue
            message += payload
            if fin:
                if message:
                    self._handle_frame(message)
                message = b""

    def _handle_frame(self, frame: bytes) -> None:
        recv_ms = time.monotonic_ns() / 1e6
        try:
            msg = wire.decode(frame)
        except (MalformedFrame, SchemaViolation, UnknownKind) as exc:
            reply = wire.WireMessage("error", SESSION_SENDER, 0, 0.0,
                                     {"ref_seq": 0, "message": str(exc)})
            self.enqueue(wire.encode(reply))
            return
        self.server.inbound.put((self, recv_ms, msg))

    def start(self) -> None:
        threading.Thread(target=self._read_loop, daemon=True,
                         name=f"conn{self.conn_id}-r").start()
        threading.Thread(target=self._write_loop, daemon=True,
                         name=f"conn{self.conn_id}-w").start()

    def close(self) -> None:
        if not self.alive:
            return
        self.alive = False
        with self._out_ready:
            self._out_ready.notify()
        try:
            self.sock.close()
        except OSError:
            pass
        self.server.drop(self)


class SessionServer:
    """Wall-clock-paced tick loop servicing socket clients."""

    def __init__(self, cfg: EngineConfig, listen: str,
                 log_path: str | Path | None = None,
                 max_ticks: int | None = None,
                 realtime: bool = True):
        self.cfg = cfg
        self.host, self.port = parse_endpoint(listen)
        self.max_ticks = max_ticks
        self.realtime = realtime
        self.log = LogWriter(log_path, cfg) if log_path else None
        self.engine = Engine(cfg, log=self.log)
        self.inbound: queue.SimpleQueue = queue.SimpleQueue()
        self._conns: list[_Conn] = []
        self._conns_lock = threading.Lock()
        self._stop = threading.Event()
        self._listener: socket.socket | None = None

    def stop(self) -> None:
        self._stop.set()

    def drop(self, conn: _Conn) -> None:
        with self._conns_lock:
            if conn in self._conns:
                self._conns.remove(conn)

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, _addr = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            conn = _Conn(sock, self)
            with self._conns_lock:
                self._conns.append(conn)
            conn.start()

    def run(self) -> dict:
        try:
            listener = socket.create_server((self.host, self.port))
        except OSError as exc:
            if self.log:
                self.log.close()
            raise BindFailure(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        self._listener = listener
        self.port = listener.getsockname()[1]
        print(json.dumps({"listening": f"{self.host}:{self.port}"}), flush=True)
        threading.Thread(target=self._accept_loop, daemon=True, name="accept").start()

        engine = self.engine
        dt = engine.dt
        t0 = time.monotonic()
        ticks = 0
        try:
            while not self._stop.is_set():
                while True:
                    try:
                        conn, recv_ms, msg = self.inbound.get_nowait()
                    except queue.Empty:
                        break
                    for reply in engine.inject(msg, recv_ms=recv_ms):
                        conn.enqueue(wire.encode(reply))
                out = engine.tick()
                frames = [wire.encode(m) for m in out]
                with self._conns_lock:
                    conns = list(self._conns)
                for conn in conns:
                    for frame in frames:
                        conn.enqueue(frame)
                ticks += 1
                if self.max_ticks is not None and ticks >= self.max_ticks:
                    break
                if self.realtime:
                    deadline = t0 + ticks * dt
                    delay = deadline - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
        finally:
            engine.shutdown()
            if self.log:
                self.log.close()
            self._stop.set()
            try:
                listener.close()
            except OSError:
                pass
            with self._conns_lock:
                conns = list(self._conns)
            for conn in conns:
                conn.close()
        return engine.summary()


def run_session(cfg: EngineConfig, listen: str, log_path: str | Path | None,
                max_ticks: int | None, realtime: bool = True) -> dict:
    """Bind, serve, tick until stopped; returns the run summary."""
    server = SessionServer(cfg, listen, log_path=log_path,
                           max_ticks=max_ticks, realtime=realtime)
    import signal

    def _sig(_signum, _frame):
        server.stop()

    previous = []
    if threading.current_thread() is threading.main_thread():
        for signum in (signal.SIGINT, signal.SIGTERM):
            previous.append((signum, signal.signal(signum, _sig)))
    try:
        return server.run()
    finally:
        for signum, handler in previous:
            signal.signal(signum, handler)
