"""Binary PPM (P6, maxval 255) reading and writing.

The one image codec of the package: render output, golden files and card
textures all go through it, so files round-trip bit-exactly.
"""

from __future__ import annotations

import os

import numpy as np


def encode_ppm(pixels: np.ndarray) -> bytes:
    """Encode an (H, W, 3) float array in [0, 1] as P6 bytes.

    Channels are rounded half-up to the 0..255 range.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) pixel array")
    h, w = pixels.shape[:2]
    data = np.floor(np.clip(pixels, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (w, h) + data.tobytes()


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in b" \t\r\n":
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] != ord("\n"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in b" \t\r\n":
        pos += 1
    if start == pos:
        raise ValueError("truncated PPM header")
    return data[start:pos], pos


def decode_ppm(data: bytes) -> np.ndarray:
    """Decode P6 bytes to an (H, W, 3) float64 array in [0, 1]."""
    magic, pos = _next_token(data, 0)
    if magic != b"P6":
        raise ValueError(f"not a binary PPM (P6) file, magic {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        if not tok.isdigit():
            raise ValueError(f"malformed PPM header field {tok!r}")
        fields.append(int(tok))
    w, h, maxval = fields
    if w < 1 or h < 1:
        raise ValueError(f"invalid PPM dimensions {w}x{h}")
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    need = w * h * 3
    raw = data[pos : pos + need]
    if len(raw) != need:
        raise ValueError("truncated PPM pixel data")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3)
    return pixels.astype(np.float64) / 255.0


def write_ppm(path: str | os.PathLike, pixels: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ppm(pixels))


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())
