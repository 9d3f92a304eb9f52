"""AVSP v1 framing, implemented from the wire description.

Every frame is:
  "AVSP" | u16 LE version (=1) | u32 LE header length | JSON header | payload
The header carries id, op, n_views, height, width, dtype ("f64") and a
free-form extra object. A payload (little-endian float64, view-major
row-major, n_views*height*width*3 values) follows only for op "render".
"""

from __future__ import annotations

import json
import struct

MAGIC = b"AVSP"
VERSION = 1
PREFIX = struct.Struct("<4sHI")


class FrameError(Exception):
    """Anything wrong with an incoming frame; the message is safe to echo
    back in an error response."""


def encode_frame(frame_id, op, n_views=0, height=0, width=0, extra=None,
                 payload=b""):
    header = json.dumps({
        "id": int(frame_id),
        "op": op,
        "n_views": int(n_views),
        "height": int(height),
        "width": int(width),
        "dtype": "f64",
        "extra": extra if extra is not None else {},
    }).encode("utf-8")
    return PREFIX.pack(MAGIC, VERSION, len(header)) + header + payload


def _read_exact(read, count, what):
    chunks = []
    remaining = count
    while remaining:
        chunk = read(remaining)
        if not chunk:
            if chunks or what == "payload":
                raise FrameError(f"{what} length mismatch")
            return None  # clean EOF between frames
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_request(read):
    """Read one frame from a read(n) callable. Returns (header, payload)
    or None on clean end-of-stream."""
    prefix = _read_exact(read, PREFIX.size, "prefix")
    if prefix is None:
        return None
    magic, version, hlen = PREFIX.unpack(prefix)
    if magic != MAGIC:
        raise FrameError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FrameError(f"unsupported version {version}")
    raw = _read_exact(read, hlen, "header")
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"malformed header: {exc}") from exc
    for field in ("id", "op"):
        if field not in header:
            raise FrameError(f"header missing {field!r}")
    payload = b""
    if header["op"] == "render":
        try:
            count = (int(header["n_views"]) * int(header["height"])
                     * int(header["width"]) * 3 * 8)
        except (KeyError, TypeError, ValueError) as exc:
            raise FrameError(f"bad render dimensions: {exc}") from exc
        if count <= 0:
            raise FrameError("bad render dimensions: empty image set")
        payload = _read_exact(read, count, "payload")
    return header, payload


def parse_stream(read):
    """Generator over frames until end-of-stream; FrameError propagates."""
    while True:
        frame = read_request(read)
        if frame is None:
            return
        yield frame
