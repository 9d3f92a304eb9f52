"""AVSP v1 wire framing and the remote-victim client.

Frame layout (requests and responses identical):
  magic  : 4 bytes ASCII "AVSP"
  version: u16 little-endian, = 1
  hlen   : u32 little-endian
  header : UTF-8 JSON of exactly hlen bytes with fields
           {"id", "op", "n_views", "height", "width", "dtype", "extra"}
  payload: n_views*height*width*3 little-endian float64, view-major
           row-major; present only for op "render".
Responses must echo the request id.
"""

from __future__ import annotations

import json
import socket
import struct
import subprocess

import numpy as np

from .errors import RemoteError
from .images import validate_image_set
from .victims import Victim

MAGIC = b"AVSP"
VERSION = 1
_PREFIX = struct.Struct("<4sHI")


def pack_frame(frame_id, op, n_views=0, height=0, width=0, extra=None, payload=b""):
    header = json.dumps({
        "id": int(frame_id),
        "op": op,
        "n_views": int(n_views),
        "height": int(height),
        "width": int(width),
        "dtype": "f64",
        "extra": extra or {},
    }).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(header)) + header + payload


def images_payload(images):
    return np.ascontiguousarray(images, dtype="<f8").tobytes()


def read_exact(read, count):
    """Read exactly count bytes from a read(n) callable."""
    chunks = []
    remaining = count
    while remaining:
        chunk = read(remaining)
        if not chunk:
            raise RemoteError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(read):
    """Parse one frame; returns (header dict, payload bytes)."""
    prefix = read_exact(read, _PREFIX.size)
    magic, version, hlen = _PREFIX.unpack(prefix)
    if magic != MAGIC:
        raise RemoteError(f"bad magic {magic!r}")
    if version != VERSION:
        raise RemoteError(f"unsupported protocol version {version}")
    try:
        header = json.loads(read_exact(read, hlen).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RemoteError(f"malformed header: {exc}") from exc
    payload = b""
    if header.get("op") == "render":
        count = header["n_views"] * header["height"] * header["width"] * 3 * 8
        payload = read_exact(read, count)
    return header, payload


class _TcpTransport:
    def __init__(self, host, port, timeout):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise RemoteError(f"cannot connect to {host}:{port}: {exc}") from exc

    def send(self, data):
        self.sock.sendall(data)

    def read(self, count):
        return self.sock.recv(count)

    def close(self):
        self.sock.close()


class _StdioTransport:
    def __init__(self, argv):
        self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                     stdout=subprocess.PIPE)

    def send(self, data):
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def read(self, count):
        return self.proc.stdout.read(count)

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)


class RemoteVictim(Victim):
    """Client-side victim speaking AVSP v1 over TCP or a stdio subprocess.
    Requests are serialized per connection with strict id matching."""

    differentiable = False

    def __init__(self, address=None, command=None, timeout=30.0):
        super().__init__()
        if (address is None) == (command is None):
            raise RemoteError("specify exactly one of address or command")
        if address is not None:
            host, _, port = address.rpartition(":")
            if not host or not port.isdigit():
                raise RemoteError(f"bad address {address!r}, want host:port")
            self._transport = _TcpTransport(host, int(port), timeout)
        else:
            self._transport = _StdioTransport(command)
        self._next_id = 0
        caps = self._roundtrip("capabilities")[0]["extra"]
        self.name = f"remote:{caps.get('name', 'unknown')}"
        self.expected_views = caps.get("expected_views") or None

    def _roundtrip(self, op, images=None):
        frame_id = self._next_id
        self._next_id += 1
        if images is None:
            frame = pack_frame(frame_id, op)
        else:
            nv, h, w, _ = images.shape
            frame = pack_frame(frame_id, op, nv, h, w, payload=images_payload(images))
        try:
            self._transport.send(frame)
            header, payload = read_frame(self._transport.read)
        except socket.timeout as exc:
            raise TimeoutError(f"remote victim timed out: {exc}") from exc
        if header.get("id") != frame_id:
            raise RemoteError(f"response id {header.get('id')} != request id {frame_id}")
        if header.get("op") == "error":
            raise RemoteError(f"server error: {header.get('extra', {}).get('message')}")
        return header, payload

    def _render(self, images):
        images = validate_image_set(images)
        header, payload = self._roundtrip("render", images)
        if header.get("op") != "render":
            raise RemoteError(f"unexpected response op {header.get('op')!r}")
        shape = (header["n_views"], header["height"], header["width"], 3)
        if shape != images.shape:
            raise RemoteError(f"server returned shape {shape}, expected {images.shape}")
        out = np.frombuffer(payload, dtype="<f8")
        return out.reshape(shape).astype(np.float64)

    def close(self):
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
