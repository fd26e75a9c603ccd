"""The encrypted on-disk self-index built from the BWT column.

L is cut into fixed-size blocks (16 blocks per superblock). Each block is
remapped to its own minimal alphabet, move-to-front and RLE0 transformed,
encrypted by modular addition with a per-block Salsa20 keystream, and
bit-packed at the smallest width that covers the block alphabet plus the
two RLE0 escapes. Superblocks carry absolute occurrence counts, blocks
carry superblock-relative counts, so occ() decrypts at most one block.

File layout, version 1 (all integers little-endian):

    magic "SLIX", version u16, flags u16
    header      k, bs, sample rate, stride, base symbols, text length,
                eac, primary row, per-item lengths, vocabulary with
                global counts
    superblocks absolute-occ matrix, then per superblock its alphabet
                and the per-block relative count matrix
    blocks      per block: alphabet size, stored/original lengths,
                payload span, alphabet codes
    payloads    concatenated encrypted bit-packed block payloads
    marked rows row and position arrays of the sampled suffix positions
    descriptions per item: encrypted record description

Everything before the payload section is readable without the key; no
payload or description decrypts without it. Per-block alphabets and the
occ tables are plaintext, so symbol presence and frequency per block are
visible to an attacker; the scrambled code assignment is not (see the
README security notes).
"""

from __future__ import annotations

import struct
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .alphabet import (
    BaseAlphabet,
    ExtendedText,
    ScrambledAlphabet,
    encode_collection,
    build_base_alphabet,
    scramble_extended_alphabet,
)
from .bwt import BwtResult, compute_bwt
from .crypto import IndexKey, block_nonce, description_nonce, keystream_bytes, keystream_symbols
from .errors import FormatError, ParameterError
from .fasta_io import SequenceCollection

MAGIC = b"SLIX"
FORMAT_VERSION = 1

MIN_BLOCK_SIZE = 64
MAX_BLOCK_SIZE = 1 << 20
BLOCKS_PER_SUPERBLOCK = 16

# RLE0 uses two escape symbols, so the cipher modulus for a block with
# alphabet size a is a + 2.
RLE0_ESCAPES = 2


# ---------------------------------------------------------------------------
# Block transforms


def mtf(symbols: np.ndarray, alpha_size: int) -> np.ndarray:
    """Move-to-front ranks; the table starts as 0..alpha_size-1 ascending."""
    symbols = np.ascontiguousarray(symbols, dtype=np.int32)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= alpha_size):
        raise ValueError("mtf input symbol outside [0, alpha_size)")
    return _kernels.mtf_encode(symbols, alpha_size)


def mtf_inverse(ranks: np.ndarray, alpha_size: int) -> np.ndarray:
    ranks = np.ascontiguousarray(ranks, dtype=np.int32)
    if ranks.size and (ranks.min() < 0 or ranks.max() >= alpha_size):
        raise ValueError("mtf rank outside [0, alpha_size)")
    return _kernels.mtf_decode(ranks, alpha_size)


def rle0(ranks: np.ndarray) -> np.ndarray:
    """Zero-run encoding: a run of L zeros becomes the binary digits of
    L-1 (most significant first) over escapes Z0=0 / Z1=1, and every
    nonzero rank r is stored as r+1. Never longer than its input."""
    ranks = np.ascontiguousarray(ranks, dtype=np.int32)
    if ranks.size and ranks.min() < 0:
        raise ValueError("rle0 input must be non-negative")
    return _kernels.rle0_encode(ranks)


def rle0_inverse(encoded: np.ndarray, expected_length: int | None = None) -> np.ndarray:
    encoded = np.ascontiguousarray(encoded, dtype=np.int32)
    if expected_length is None:
        expected_length = _rle0_decoded_length(encoded)
    out = np.empty(expected_length, dtype=np.int32)
    n = _kernels.rle0_decode(encoded, out)
    if n != expected_length:
        raise FormatError("RLE0 stream does not decode to the expected length")
    return out


def _rle0_decoded_length(encoded: np.ndarray) -> int:
    total = 0
    i = 0
    n = len(encoded)
    while i < n:
        if encoded[i] <= 1:
            val = 0
            while i < n and encoded[i] <= 1:
                val = val * 2 + int(encoded[i])
                i += 1
            total += val + 1
        else:
            total += 1
            i += 1
    return total


def pack_bits(symbols: np.ndarray, width: int) -> bytes:
    """Pack symbols at ``width`` bits each, LSB-first within bytes."""
    if not 1 <= width <= 32:
        raise ValueError("bit width must be in [1, 32]")
    symbols = np.ascontiguousarray(symbols, dtype=np.uint32)
    if symbols.size and int(symbols.max()) >> width:
        raise ValueError(f"symbol does not fit in {width} bits")
    shifts = np.arange(width, dtype=np.uint32)
    bits = ((symbols[:, None] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def unpack_bits(data: bytes, width: int, count: int) -> np.ndarray:
    if not 1 <= width <= 32:
        raise ValueError("bit width must be in [1, 32]")
    raw = np.frombuffer(data, dtype=np.uint8)
    if len(raw) * 8 < count * width:
        raise FormatError("bit-packed payload shorter than its declared symbol count")
    bits = np.unpackbits(raw, bitorder="little", count=count * width)
    shifts = np.arange(width, dtype=np.uint32)
    return (bits.reshape(count, width).astype(np.uint32) << shifts).sum(
        axis=1, dtype=np.uint32
    )


def block_width(alpha_size: int) -> int:
    """Bits per stored symbol for a block alphabet of the given size."""
    modulus = alpha_size + RLE0_ESCAPES
    return max(1, int(modulus - 1).bit_length())


def encrypt_block(
    symbols: np.ndarray, key: IndexKey, block_number: int, modulus: int
) -> np.ndarray:
    """c[i] = (s[i] + keystream[i]) mod modulus for this block's nonce."""
    symbols = np.ascontiguousarray(symbols, dtype=np.uint32)
    if symbols.size and int(symbols.max()) >= modulus:
        raise ValueError("plaintext symbol outside the cipher modulus")
    ks = keystream_symbols(key.encrypt_half, block_nonce(block_number), len(symbols), modulus)
    return ((symbols + ks) % np.uint32(modulus)).astype(np.uint32)


def decrypt_block(
    symbols: np.ndarray, key: IndexKey, block_number: int, modulus: int
) -> np.ndarray:
    symbols = np.ascontiguousarray(symbols, dtype=np.uint32)
    ks = keystream_symbols(key.encrypt_half, block_nonce(block_number), len(symbols), modulus)
    return (
        (symbols.astype(np.int64) - ks.astype(np.int64)) % modulus
    ).astype(np.uint32)


# ---------------------------------------------------------------------------
# Index model


@dataclass(eq=False)
class Block:
    block_number: int
    block_alphabet: np.ndarray   # sorted distinct codes occurring in the block
    encoded_payload: bytes       # bit-packed encrypted post-RLE0 symbols
    stored_length: int           # symbol count after RLE0
    original_length: int         # L symbols covered

    @property
    def width(self) -> int:
        return block_width(len(self.block_alphabet))


@dataclass(eq=False)
class Superblock:
    absolute_occ: np.ndarray       # per vocab entry, occurrences before this superblock
    sb_alphabet: np.ndarray        # sorted distinct codes within the superblock
    block_relative_occ: np.ndarray  # (blocks_here, |sb_alphabet|) counts before each block


@dataclass(eq=False)
class MarkedRows:
    sample_rate: float
    stride: int
    rows: np.ndarray
    positions: np.ndarray
    _row_to_pos: dict = field(default_factory=dict, repr=False)
    _pos_to_row: dict = field(default_factory=dict, repr=False)

    def row_to_pos(self) -> dict:
        if not self._row_to_pos and len(self.rows):
            self._row_to_pos = dict(
                zip(self.rows.tolist(), self.positions.tolist())
            )
        return self._row_to_pos

    def pos_to_row(self) -> dict:
        if not self._pos_to_row and len(self.rows):
            self._pos_to_row = dict(
                zip(self.positions.tolist(), self.rows.tolist())
            )
        return self._pos_to_row


class QueryStats:
    """Per-index counters for decrypt-on-demand measurements."""

    def __init__(self):
        self.blocks_decrypted = 0
        self.blocks_touched: set[int] = set()

    def reset(self):
        self.blocks_decrypted = 0
        self.blocks_touched = set()


class _BlockCache:
    def __init__(self, limit: int):
        self.limit = limit
        self.key_bytes: bytes | None = None
        self._data: OrderedDict[int, np.ndarray] = OrderedDict()
        self.lock = threading.Lock()

    def rebind(self, key_bytes: bytes):
        if self.key_bytes != key_bytes:
            self._data.clear()
            self.key_bytes = key_bytes

    def get(self, bn: int):
        blk = self._data.get(bn)
        if blk is not None:
            self._data.move_to_end(bn)
        return blk

    def put(self, bn: int, decoded: np.ndarray):
        self._data[bn] = decoded
        if len(self._data) > self.limit:
            self._data.popitem(last=False)


@dataclass(eq=False)
class EncryptedIndex:
    """In-memory form of the index file; see the module docstring for the
    on-disk layout. Open without a key; pass the key to anything that
    needs block contents."""

    k: int
    bs: int
    sample_rate: float
    base_symbols: str
    original_lengths: list[int]
    padded_lengths: list[int]
    primary_row: int
    text_len: int
    eac: int
    vocab: np.ndarray
    global_counts: np.ndarray
    superblocks: list[Superblock]
    blocks: list[Block]
    marked: MarkedRows
    encrypted_descriptions: list[bytes]
    section_offsets: dict = field(default_factory=dict)

    def __post_init__(self):
        self._vocab_index = {int(c): i for i, c in enumerate(self.vocab)}
        self._cum_counts = np.concatenate(
            [[0], np.cumsum(self.global_counts, dtype=np.int64)]
        )
        self._cache = _BlockCache(limit=8192)
        self.stats = QueryStats()
        self._alpha_cache: dict[bytes, ScrambledAlphabet] = {}

    # -- basic geometry ----------------------------------------------------

    @property
    def n_items(self) -> int:
        return len(self.original_lengths)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def item_starts(self) -> list[int]:
        starts = []
        off = 0
        for padded in self.padded_lengths:
            starts.append(off)
            off += padded + 1  # item supers plus one separator
        return starts

    # -- key-derived helpers -------------------------------------------------

    def scrambled_alphabet(self, key: IndexKey) -> ScrambledAlphabet:
        alpha = self._alpha_cache.get(key.data)
        if alpha is None:
            alpha = scramble_extended_alphabet(
                BaseAlphabet(self.base_symbols), self.k, key
            )
            self._alpha_cache[key.data] = alpha
        return alpha

    def decrypt_description(self, item: int, key: IndexKey) -> str:
        blob = self.encrypted_descriptions[item]
        pad = keystream_bytes(key.encrypt_half, description_nonce(item), 0, len(blob))
        return bytes(a ^ b for a, b in zip(blob, pad)).decode("latin-1")

    # -- frequency tables ----------------------------------------------------

    def code_range(self, code: int) -> tuple[int, int]:
        """Rows whose suffix starts with ``code``: [start, end)."""
        vi = self._vocab_index.get(int(code))
        if vi is None:
            return (0, 0)
        return (int(self._cum_counts[vi]), int(self._cum_counts[vi + 1]))

    def global_count(self, code: int) -> int:
        vi = self._vocab_index.get(int(code))
        return 0 if vi is None else int(self.global_counts[vi])

    # -- block access ----------------------------------------------------------

    def decoded_block(self, bn: int, key: IndexKey) -> np.ndarray:
        """Original L codes covered by block bn; decrypts on miss."""
        cache = self._cache
        with cache.lock:
            cache.rebind(key.data)
            self.stats.blocks_touched.add(bn)
            hit = cache.get(bn)
            if hit is not None:
                return hit
            blk = self.blocks[bn]
            decoded = self._decode_block(blk, key)
            cache.put(bn, decoded)
            self.stats.blocks_decrypted += 1
            return decoded

    def _decode_block(self, blk: Block, key: IndexKey) -> np.ndarray:
        alpha_size = len(blk.block_alphabet)
        modulus = alpha_size + RLE0_ESCAPES
        packed = unpack_bits(blk.encoded_payload, blk.width, blk.stored_length)
        plain = decrypt_block(packed, key, blk.block_number, modulus)
        if plain.size and int(plain.max()) > alpha_size:
            raise FormatError("decryption failed or corrupt index")
        out = np.empty(blk.original_length, dtype=np.int32)
        n = _kernels.rle0_decode(plain.astype(np.int32), out)
        if n != blk.original_length:
            raise FormatError("decryption failed or corrupt index")
        dense = _kernels.mtf_decode(out, alpha_size)
        return blk.block_alphabet[dense]

    def decode_all_blocks(self, key: IndexKey) -> np.ndarray:
        """Reconstruct the whole BWT column (used by verification)."""
        parts = [self.decoded_block(bn, key) for bn in range(self.n_blocks)]
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.uint32)

    def code_at(self, row: int, key: IndexKey) -> int:
        """L[row]."""
        bn, off = divmod(row, self.bs)
        return int(self.decoded_block(bn, key)[off])

    # -- occurrence counting -----------------------------------------------------

    def occ(self, code: int, pos: int, key: IndexKey) -> int:
        """Occurrences of ``code`` in L[0, pos). Decrypts at most one block."""
        if not 0 <= pos <= self.text_len:
            raise ValueError(f"occ position {pos} outside [0, {self.text_len}]")
        vi = self._vocab_index.get(int(code))
        if vi is None:
            return 0
        if pos == self.text_len:
            return int(self.global_counts[vi])
        bn, off = divmod(pos, self.bs)
        sb_i, local = divmod(bn, BLOCKS_PER_SUPERBLOCK)
        sb = self.superblocks[sb_i]
        total = int(sb.absolute_occ[vi])
        j = int(np.searchsorted(sb.sb_alphabet, code))
        if j < len(sb.sb_alphabet) and int(sb.sb_alphabet[j]) == int(code):
            total += int(sb.block_relative_occ[local, j])
            if off:
                blk = self.decoded_block(bn, key)
                total += int(np.count_nonzero(blk[:off] == code))
        return total

    def lf_step(self, row: int, key: IndexKey) -> tuple[int, int]:
        """One LF-mapping step: (previous-position row, code at pos-1)."""
        code = self.code_at(row, key)
        start, _ = self.code_range(code)
        return start + self.occ(code, row, key), code


# ---------------------------------------------------------------------------
# Building


def partition_and_build(
    bwt_result: BwtResult,
    ext_text: ExtendedText,
    alpha: ScrambledAlphabet,
    key: IndexKey,
    *,
    bs: int,
    sample_rate: float,
    descriptions: list[str],
) -> EncryptedIndex:
    """Cut L into blocks and superblocks, build the occ tables, sample the
    marked rows, and encrypt payloads and descriptions."""
    if bs < MIN_BLOCK_SIZE or bs > MAX_BLOCK_SIZE or bs & (bs - 1):
        raise ParameterError(
            f"block size must be a power of two in [{MIN_BLOCK_SIZE}, {MAX_BLOCK_SIZE}]"
        )
    if not 0 < sample_rate <= 100:
        raise ParameterError("sample rate must be a percentage in (0, 100]")
    L = np.ascontiguousarray(bwt_result.last_column, dtype=np.uint32)
    n = len(L)
    if n >= 1 << 32:
        raise ParameterError("text too long for format version 1 (needs < 2^32 supers)")

    vocab, inverse = np.unique(L, return_inverse=True)
    inverse = inverse.astype(np.int64)
    global_counts = np.bincount(inverse, minlength=len(vocab)).astype(np.uint32)

    n_blocks = -(-n // bs)
    sb_span = bs * BLOCKS_PER_SUPERBLOCK
    n_sb = -(-n // sb_span)

    # per-superblock and per-block counts over the vocabulary
    V = len(vocab)
    sb_counts = np.zeros((n_sb, V), dtype=np.int64)
    block_counts = np.zeros((n_blocks, V), dtype=np.int64)
    for bn in range(n_blocks):
        seg = inverse[bn * bs : min((bn + 1) * bs, n)]
        block_counts[bn] = np.bincount(seg, minlength=V)
    for s in range(n_sb):
        sb_counts[s] = block_counts[
            s * BLOCKS_PER_SUPERBLOCK : (s + 1) * BLOCKS_PER_SUPERBLOCK
        ].sum(axis=0)
    absolute = np.zeros((n_sb, V), dtype=np.uint32)
    if n_sb > 1:
        absolute[1:] = np.cumsum(sb_counts[:-1], axis=0)

    superblocks: list[Superblock] = []
    for s in range(n_sb):
        present = np.flatnonzero(sb_counts[s] > 0)
        sb_alpha = vocab[present]
        lo = s * BLOCKS_PER_SUPERBLOCK
        hi = min((s + 1) * BLOCKS_PER_SUPERBLOCK, n_blocks)
        rel = np.zeros((hi - lo, len(present)), dtype=np.uint32)
        if hi - lo > 1:
            rel[1:] = np.cumsum(block_counts[lo : hi - 1, present], axis=0)
        superblocks.append(
            Superblock(
                absolute_occ=absolute[s],
                sb_alphabet=sb_alpha.astype(np.uint32),
                block_relative_occ=rel,
            )
        )

    blocks: list[Block] = []
    for bn in range(n_blocks):
        seg = L[bn * bs : min((bn + 1) * bs, n)]
        block_alpha, dense = np.unique(seg, return_inverse=True)
        ranks = mtf(dense.astype(np.int32), len(block_alpha))
        encoded = rle0(ranks)
        modulus = len(block_alpha) + RLE0_ESCAPES
        cipher = encrypt_block(encoded.astype(np.uint32), key, bn, modulus)
        payload = pack_bits(cipher, block_width(len(block_alpha)))
        blocks.append(
            Block(
                block_number=bn,
                block_alphabet=block_alpha.astype(np.uint32),
                encoded_payload=payload,
                stored_length=len(encoded),
                original_length=len(seg),
            )
        )

    stride = max(1, round(100 / sample_rate))
    marked_rows = np.flatnonzero(bwt_result.suffix_positions % stride == 0)
    marked = MarkedRows(
        sample_rate=float(sample_rate),
        stride=stride,
        rows=marked_rows.astype(np.uint32),
        positions=bwt_result.suffix_positions[marked_rows].astype(np.uint32),
    )

    enc_desc = []
    for i, desc in enumerate(descriptions):
        raw = desc.encode("latin-1")
        pad = keystream_bytes(key.encrypt_half, description_nonce(i), 0, len(raw))
        enc_desc.append(bytes(a ^ b for a, b in zip(raw, pad)))

    return EncryptedIndex(
        k=alpha.k,
        bs=bs,
        sample_rate=float(sample_rate),
        base_symbols=alpha.base.symbols,
        original_lengths=list(ext_text.original_lengths),
        padded_lengths=list(ext_text.padded_lengths),
        primary_row=bwt_result.primary_row,
        text_len=n,
        eac=alpha.eac,
        vocab=vocab.astype(np.uint32),
        global_counts=global_counts,
        superblocks=superblocks,
        blocks=blocks,
        marked=marked,
        encrypted_descriptions=enc_desc,
    )


def build_index(
    collection: SequenceCollection,
    key: IndexKey,
    *,
    k: int = 4,
    bs: int = 16384,
    sample_rate: float = 2.0,
    nt: int = 1,
    nr: int | None = None,
) -> EncryptedIndex:
    """Full pipeline: alphabet, encoding, BWT, encrypted block store."""
    base = build_base_alphabet(collection)
    alpha = scramble_extended_alphabet(base, k, key)
    ext = encode_collection(collection, alpha)
    bwt_result = compute_bwt(ext, nt=nt, nr=nr, eac=alpha.eac)
    return partition_and_build(
        bwt_result,
        ext,
        alpha,
        key,
        bs=bs,
        sample_rate=sample_rate,
        descriptions=[r.description for r in collection],
    )


# ---------------------------------------------------------------------------
# Serialization


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []
        self.offset = 0

    def raw(self, data: bytes):
        self.parts.append(data)
        self.offset += len(data)

    def pack(self, fmt: str, *values):
        self.raw(struct.pack("<" + fmt, *values))

    def array(self, arr: np.ndarray, dtype: str):
        self.raw(np.ascontiguousarray(arr).astype(dtype).tobytes())

    def result(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def raw(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise FormatError("index file truncated", offset=self.offset)
        out = self.data[self.offset : self.offset + n]
        self.offset += n
        return out

    def unpack(self, fmt: str):
        fmt = "<" + fmt
        return struct.unpack(fmt, self.raw(struct.calcsize(fmt)))

    def array(self, count: int, dtype: str) -> np.ndarray:
        item = np.dtype(dtype).itemsize
        return np.frombuffer(self.raw(count * item), dtype=dtype).copy()


def serialize_index(index: EncryptedIndex) -> bytes:
    w = _Writer()
    offsets = {"header": 0}
    w.raw(MAGIC)
    w.pack("HH", FORMAT_VERSION, 0)
    w.pack("II", index.k, index.bs)
    w.pack("d", index.sample_rate)
    w.pack("I", index.marked.stride)
    sym = index.base_symbols.encode("latin-1")
    w.pack("I", len(sym))
    w.raw(sym)
    w.pack("QQQ", index.text_len, index.eac, index.primary_row)
    w.pack("I", index.n_items)
    for orig, padded in zip(index.original_lengths, index.padded_lengths):
        w.pack("QQ", orig, padded)
    w.pack("I", len(index.vocab))
    w.array(index.vocab, "<u4")
    w.array(index.global_counts, "<u4")

    offsets["superblocks"] = w.offset
    rel_width = 2 if index.bs * BLOCKS_PER_SUPERBLOCK <= 0xFFFF else 4
    w.pack("IB", len(index.superblocks), rel_width)
    for sb in index.superblocks:
        w.array(sb.absolute_occ, "<u4")
    for sb in index.superblocks:
        w.pack("II", len(sb.sb_alphabet), sb.block_relative_occ.shape[0])
        w.array(sb.sb_alphabet, "<u4")
        w.array(sb.block_relative_occ, "<u2" if rel_width == 2 else "<u4")

    offsets["blocks"] = w.offset
    w.pack("I", index.n_blocks)
    payload_offset = 0
    for blk in index.blocks:
        w.pack(
            "IIIQI",
            len(blk.block_alphabet),
            blk.stored_length,
            blk.original_length,
            payload_offset,
            len(blk.encoded_payload),
        )
        w.array(blk.block_alphabet, "<u4")
        payload_offset += len(blk.encoded_payload)

    offsets["payloads"] = w.offset
    w.pack("Q", payload_offset)
    for blk in index.blocks:
        w.raw(blk.encoded_payload)

    offsets["marked"] = w.offset
    w.pack("I", len(index.marked.rows))
    w.array(index.marked.rows, "<u4")
    w.array(index.marked.positions, "<u4")

    offsets["descriptions"] = w.offset
    w.pack("I", len(index.encrypted_descriptions))
    for blob in index.encrypted_descriptions:
        w.pack("I", len(blob))
        w.raw(blob)

    index.section_offsets = offsets
    return w.result()


def deserialize_index(data: bytes) -> EncryptedIndex:
    r = _Reader(data)
    offsets = {"header": 0}
    if r.raw(4) != MAGIC:
        raise FormatError("not an index file (bad magic)", offset=0)
    version, _flags = r.unpack("HH")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    k, bs = r.unpack("II")
    (sample_rate,) = r.unpack("d")
    (stride,) = r.unpack("I")
    (sym_len,) = r.unpack("I")
    base_symbols = r.raw(sym_len).decode("latin-1")
    text_len, eac, primary_row = r.unpack("QQQ")
    (n_items,) = r.unpack("I")
    original_lengths = []
    padded_lengths = []
    for _ in range(n_items):
        orig, padded = r.unpack("QQ")
        original_lengths.append(orig)
        padded_lengths.append(padded)
    (vocab_size,) = r.unpack("I")
    vocab = r.array(vocab_size, "<u4")
    global_counts = r.array(vocab_size, "<u4")

    offsets["superblocks"] = r.offset
    n_sb, rel_width = r.unpack("IB")
    absolutes = [r.array(vocab_size, "<u4") for _ in range(n_sb)]
    superblocks = []
    for s in range(n_sb):
        alpha_size, n_local = r.unpack("II")
        sb_alpha = r.array(alpha_size, "<u4")
        rel = r.array(n_local * alpha_size, "<u2" if rel_width == 2 else "<u4")
        superblocks.append(
            Superblock(
                absolute_occ=absolutes[s],
                sb_alphabet=sb_alpha,
                block_relative_occ=rel.reshape(n_local, alpha_size).astype(np.uint32),
            )
        )

    offsets["blocks"] = r.offset
    (n_blocks,) = r.unpack("I")
    metas = []
    for _ in range(n_blocks):
        alpha_size, stored, orig, pay_off, pay_len = r.unpack("IIIQI")
        alpha_arr = r.array(alpha_size, "<u4")
        metas.append((alpha_arr, stored, orig, pay_off, pay_len))

    offsets["payloads"] = r.offset
    (total_payload,) = r.unpack("Q")
    payload_base = r.offset
    payloads = r.raw(total_payload)
    blocks = []
    for bn, (alpha_arr, stored, orig, pay_off, pay_len) in enumerate(metas):
        if pay_off + pay_len > total_payload:
            raise FormatError("block payload span outside payload section",
                              offset=payload_base)
        blocks.append(
            Block(
                block_number=bn,
                block_alphabet=alpha_arr,
                encoded_payload=payloads[pay_off : pay_off + pay_len],
                stored_length=stored,
                original_length=orig,
            )
        )

    offsets["marked"] = r.offset
    (n_marked,) = r.unpack("I")
    rows = r.array(n_marked, "<u4")
    positions = r.array(n_marked, "<u4")

    offsets["descriptions"] = r.offset
    (n_desc,) = r.unpack("I")
    enc_desc = []
    for _ in range(n_desc):
        (blob_len,) = r.unpack("I")
        enc_desc.append(r.raw(blob_len))
    if r.offset != len(data):
        raise FormatError("trailing bytes after index data", offset=r.offset)

    index = EncryptedIndex(
        k=k,
        bs=bs,
        sample_rate=sample_rate,
        base_symbols=base_symbols,
        original_lengths=original_lengths,
        padded_lengths=padded_lengths,
        primary_row=primary_row,
        text_len=text_len,
        eac=eac,
        vocab=vocab,
        global_counts=global_counts,
        superblocks=superblocks,
        blocks=blocks,
        marked=MarkedRows(
            sample_rate=sample_rate, stride=stride, rows=rows, positions=positions
        ),
        encrypted_descriptions=enc_desc,
        section_offsets=offsets,
    )
    return index


def write_index(index: EncryptedIndex, path) -> int:
    data = serialize_index(index)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_index(path) -> EncryptedIndex:
    with open(path, "rb") as fh:
        return deserialize_index(fh.read())
