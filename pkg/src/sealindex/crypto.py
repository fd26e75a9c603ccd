"""Salsa20/20 keystream generation and index key handling.

One 64-byte key drives everything: bytes [0..32) seed the alphabet
scrambling stream, bytes [32..64) seed the per-block encryption streams.
Nonce assignment keeps every keystream distinct within one index:

    nonce 0                alphabet scrambling
    nonce 1 + blockNumber  data block payloads
    nonce 2**48 + item     sequence description encryption

The cipher is Salsa20 with 20 rounds, 256-bit key and 64-bit nonce.
"""

from __future__ import annotations

import os
import stat
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import KeyfileError

KEY_BYTES = 64

NONCE_SCRAMBLE = 0
NONCE_DESCRIPTION_BASE = 1 << 48


def block_nonce(block_number: int) -> int:
    """Nonce for a data block. Offset by one so block 0 never shares
    nonce 0 with the scrambling stream."""
    return 1 + block_number


def description_nonce(item_index: int) -> int:
    return NONCE_DESCRIPTION_BASE + item_index


# ---------------------------------------------------------------------------
# Salsa20 core


def _rotl(x: int, n: int) -> int:
    x &= 0xFFFFFFFF
    return ((x << n) | (x >> (32 - n))) & 0xFFFFFFFF


def _quarterround(y0, y1, y2, y3):
    y1 ^= _rotl(y0 + y3, 7)
    y2 ^= _rotl(y1 + y0, 9)
    y3 ^= _rotl(y2 + y1, 13)
    y0 ^= _rotl(y3 + y2, 18)
    return y0 & 0xFFFFFFFF, y1 & 0xFFFFFFFF, y2 & 0xFFFFFFFF, y3 & 0xFFFFFFFF


def salsa20_core(state16: list[int], rounds: int = 20) -> list[int]:
    """The Salsa20 hash on sixteen 32-bit words. Pure-Python reference,
    kept for test cross-checks against the compiled generator."""
    x = list(state16)
    for _ in range(rounds // 2):
        x[0], x[4], x[8], x[12] = _quarterround(x[0], x[4], x[8], x[12])
        x[5], x[9], x[13], x[1] = _quarterround(x[5], x[9], x[13], x[1])
        x[10], x[14], x[2], x[6] = _quarterround(x[10], x[14], x[2], x[6])
        x[15], x[3], x[7], x[11] = _quarterround(x[15], x[3], x[7], x[11])
        x[0], x[1], x[2], x[3] = _quarterround(x[0], x[1], x[2], x[3])
        x[5], x[6], x[7], x[4] = _quarterround(x[5], x[6], x[7], x[4])
        x[10], x[11], x[8], x[9] = _quarterround(x[10], x[11], x[8], x[9])
        x[15], x[12], x[13], x[14] = _quarterround(x[15], x[12], x[13], x[14])
    return [(a + b) & 0xFFFFFFFF for a, b in zip(x, state16)]


_SIGMA = struct.unpack("<4I", b"expand 32-byte k")


def salsa20_block(key32: bytes, nonce: int, counter: int) -> bytes:
    """One 64-byte keystream block (pure-Python reference path)."""
    if len(key32) != 32:
        raise ValueError("Salsa20 key must be exactly 32 bytes")
    k = struct.unpack("<8I", key32)
    state = [
        _SIGMA[0], k[0], k[1], k[2],
        k[3], _SIGMA[1], nonce & 0xFFFFFFFF, (nonce >> 32) & 0xFFFFFFFF,
        counter & 0xFFFFFFFF, (counter >> 32) & 0xFFFFFFFF, _SIGMA[2], k[4],
        k[5], k[6], k[7], _SIGMA[3],
    ]
    return struct.pack("<16I", *salsa20_core(state))


def keystream_bytes(key32: bytes, nonce: int, offset: int, length: int) -> bytes:
    """``length`` keystream bytes starting ``offset`` bytes into the
    (key32, nonce) stream."""
    if len(key32) != 32:
        raise ValueError("Salsa20 key must be exactly 32 bytes")
    if length < 0:
        raise ValueError("length must be >= 0")
    if length == 0:
        return b""
    first_block, skip = divmod(offset, 64)
    n_blocks = (skip + length + 63) // 64
    key_words = np.frombuffer(key32, dtype="<u4")
    words = _kernels.salsa20_blocks(
        key_words, np.uint64(nonce), np.uint64(first_block), n_blocks
    )
    raw = words.astype("<u4").tobytes()
    return raw[skip : skip + length]


def keystream_symbols(key32: bytes, nonce: int, count: int, bound: int) -> np.ndarray:
    """``count`` integers in [0, bound), one per 4 keystream bytes.

    Matches ``count`` successive CipherStream.next_int calls on a fresh
    stream: each draw reads 4 bytes as a little-endian word and reduces it
    modulo ``bound``.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return np.empty(0, dtype=np.uint32)
    raw = keystream_bytes(key32, nonce, 0, 4 * count)
    words = np.frombuffer(raw, dtype="<u4")
    return (words % np.uint32(bound)).astype(np.uint32)


class CipherStream:
    """Forward-only reader over one (key, nonce) Salsa20 keystream."""

    _CHUNK = 1 << 16  # bytes generated per refill

    def __init__(self, key32: bytes, nonce: int):
        if len(key32) != 32:
            raise ValueError("Salsa20 key must be exactly 32 bytes")
        self._key = bytes(key32)
        self.nonce = int(nonce)
        self.position = 0
        self._buf = b""
        self._buf_start = 0

    def read(self, n: int) -> bytes:
        if n < 0:
            raise ValueError("read size must be >= 0")
        end = self.position + n
        if end > self._buf_start + len(self._buf):
            need = end - self._buf_start - len(self._buf)
            grow = max(need, self._CHUNK)
            self._buf += keystream_bytes(
                self._key, self.nonce, self._buf_start + len(self._buf), grow
            )
        off = self.position - self._buf_start
        out = self._buf[off : off + n]
        self.position = end
        # drop consumed data occasionally so long streams stay bounded
        if self.position - self._buf_start > 4 * self._CHUNK:
            self._buf = self._buf[self.position - self._buf_start :]
            self._buf_start = self.position
        return out

    def next_uint32(self) -> int:
        return struct.unpack("<I", self.read(4))[0]

    def next_int(self, bound: int) -> int:
        """Uniform-ish draw in [0, bound): 4 bytes reduced mod bound.

        The modular reduction carries a bias below 2**-24 for the bounds
        used here; the fixed 4-byte budget is what keeps golden vectors
        stable.
        """
        if bound < 1:
            raise ValueError("bound must be >= 1")
        return self.next_uint32() % bound


# ---------------------------------------------------------------------------
# Key material


@dataclass(frozen=True)
class IndexKey:
    """The 64-byte index secret. Never serialized by any index operation."""

    data: bytes

    def __post_init__(self):
        if len(self.data) != KEY_BYTES:
            raise KeyfileError(
                f"index key must be exactly {KEY_BYTES} bytes, got {len(self.data)}"
            )

    @property
    def scramble_half(self) -> bytes:
        return self.data[:32]

    @property
    def encrypt_half(self) -> bytes:
        return self.data[32:]

    def __repr__(self):  # never echo key material
        return "IndexKey(<64 secret bytes>)"


def generate_key() -> IndexKey:
    """Fresh key from the system entropy source; hard error if unavailable."""
    try:
        raw = os.urandom(KEY_BYTES)
    except (OSError, NotImplementedError) as exc:
        raise KeyfileError(f"system entropy source unavailable: {exc}") from exc
    return IndexKey(raw)


def load_key(path) -> IndexKey:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise KeyfileError(f"cannot read key file {path}: {exc}") from exc
    if len(raw) != KEY_BYTES:
        raise KeyfileError(
            f"key file {path} must hold exactly {KEY_BYTES} bytes, found {len(raw)}"
        )
    if os.name == "posix":
        mode = os.stat(path).st_mode
        if mode & (stat.S_IRWXG | stat.S_IRWXO):
            warnings.warn(
                f"key file {path} is accessible to group/others", stacklevel=2
            )
    return IndexKey(raw)


def save_key(key: IndexKey, path, force: bool = False) -> None:
    flags = os.O_WRONLY | os.O_CREAT | os.O_TRUNC if force else (
        os.O_WRONLY | os.O_CREAT | os.O_EXCL
    )
    try:
        fd = os.open(path, flags, 0o600)
    except FileExistsError:
        raise KeyfileError(f"refusing to overwrite existing key file {path}")
    with os.fdopen(fd, "wb") as fh:
        fh.write(key.data)
