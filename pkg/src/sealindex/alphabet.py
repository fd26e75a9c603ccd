"""Extended and scrambled alphabet construction, and collection encoding.

The base alphabet is the set of symbols observed in the collection plus
two specials: '$' (text terminator) and '&' (item separator / padding).
Length-k symbol blocks (super-characters) are then renumbered by a keyed
permutation of all sigma**k possible k-mers, so the order the BWT sorts by
is secret. Rank 0, the all-'$' super-character, is pinned in place so it
still sorts strictly smallest.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .crypto import NONCE_SCRAMBLE, CipherStream, IndexKey
from .errors import EncodingError, ParameterError
from .fasta_io import SequenceCollection

TERMINATOR = "$"
SEPARATOR = "&"

MAX_K = 8
MAX_EAC = 1 << 32


@dataclass(frozen=True)
class BaseAlphabet:
    """Observed symbols in canonical order: '$', '&', then ascending."""

    symbols: str

    @property
    def sigma_size(self) -> int:
        return len(self.symbols)

    def symbol_index(self, ch: str) -> int:
        i = self.symbols.find(ch)
        if i < 0:
            raise EncodingError(f"symbol {ch!r} is not in the alphabet")
        return i


def build_base_alphabet(collection: SequenceCollection) -> BaseAlphabet:
    """Distinct symbols occurring in any record, plus the two specials."""
    if len(collection) == 0:
        raise ParameterError("cannot build an alphabet from an empty collection")
    observed = set()
    for record in collection:
        observed.update(record.bases)
    if TERMINATOR in observed or SEPARATOR in observed:
        raise EncodingError("collection must not contain the special symbols '$' or '&'")
    ordered = TERMINATOR + SEPARATOR + "".join(sorted(observed))
    return BaseAlphabet(ordered)


@dataclass(eq=False)
class ScrambledAlphabet:
    """Keyed permutation of the k-extension alphabet.

    sk[code] is the unscrambled lexicographic rank of the k-mer that was
    assigned ``code``; sk_inverse maps ranks back to codes. Both are pure
    functions of (base, k, first key half), so an alphabet can always be
    rebuilt from an index header plus the key.
    """

    base: BaseAlphabet
    k: int
    sk: np.ndarray
    sk_inverse: np.ndarray
    _powers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sigma = self.base.sigma_size
        self._powers = sigma ** np.arange(self.k - 1, -1, -1, dtype=np.int64)

    @property
    def eac(self) -> int:
        return len(self.sk)

    def rank_of_kmer(self, kmer: str) -> int:
        """Unscrambled lexicographic rank of a k-mer."""
        if len(kmer) != self.k:
            raise ValueError(f"expected a {self.k}-mer, got {kmer!r}")
        rank = 0
        for ch in kmer:
            rank = rank * self.base.sigma_size + self.base.symbol_index(ch)
        return rank

    def encode_kmer(self, kmer: str) -> int:
        return int(self.sk_inverse[self.rank_of_kmer(kmer)])

    def decode_code(self, code: int) -> str:
        if not 0 <= code < self.eac:
            raise ValueError(f"super-character code {code} out of range [0, {self.eac})")
        rank = int(self.sk[code])
        sigma = self.base.sigma_size
        out = []
        for _ in range(self.k):
            rank, idx = divmod(rank, sigma)
            out.append(self.base.symbols[idx])
        return "".join(reversed(out))

    @property
    def separator_code(self) -> int:
        return self.encode_kmer(SEPARATOR * self.k)

    @property
    def terminator_code(self) -> int:
        return 0  # rank 0 is pinned by the shuffle


def scramble_extended_alphabet(base: BaseAlphabet, k: int, key: IndexKey) -> ScrambledAlphabet:
    """Fisher-Yates shuffle of the k-mer ranks, driven by the Salsa20
    stream for (first key half, nonce 0).

    Index 0 never takes part in a swap, which keeps the all-'$' k-mer at
    code 0. Each rejected draw (a zero from next_int) consumes one stream
    value, so the permutation is reproducible draw for draw.
    """
    if not 1 <= k <= MAX_K:
        raise ParameterError(f"extension order k must be in [1, {MAX_K}], got {k}")
    eac = base.sigma_size**k
    if eac > MAX_EAC:
        raise ParameterError(
            f"extended alphabet of {eac} symbols overflows the 32-bit code space"
        )
    sk = np.arange(eac, dtype=np.uint32)
    stream = CipherStream(key.scramble_half, NONCE_SCRAMBLE)
    for i in range(eac, 1, -1):
        to_swap = stream.next_int(i)
        while to_swap == 0:
            to_swap = stream.next_int(i)
        sk[i - 1], sk[to_swap] = sk[to_swap], sk[i - 1]
    sk_inverse = np.empty(eac, dtype=np.uint32)
    sk_inverse[sk] = np.arange(eac, dtype=np.uint32)
    return ScrambledAlphabet(base=base, k=k, sk=sk, sk_inverse=sk_inverse)


@dataclass(eq=False)
class ExtendedText:
    """The collection re-encoded as one scrambled super-character sequence.

    Layout: item supers, one '&'*k separator after every item, one '$'*k
    terminator at the end. item_starts[i] is the super-character offset of
    item i; padded_lengths[i] = ceil(len_i / k).
    """

    super_chars: np.ndarray
    item_starts: list[int]
    padded_lengths: list[int]
    original_lengths: list[int]

    def __len__(self) -> int:
        return len(self.super_chars)


def _symbol_table(base: BaseAlphabet) -> np.ndarray:
    table = np.full(256, -1, dtype=np.int64)
    for idx, ch in enumerate(base.symbols):
        table[ord(ch)] = idx
    return table


def encode_collection(collection: SequenceCollection, alpha: ScrambledAlphabet) -> ExtendedText:
    """Split every item into k-mers ('&'-padded at the tail), join with
    separators, terminate, and map each k-mer to its scrambled code."""
    k = alpha.k
    table = _symbol_table(alpha.base)
    sep_idx = 1  # '&' is always symbol 1 in canonical order
    sep_code = alpha.separator_code
    pieces = []
    item_starts = []
    padded_lengths = []
    original_lengths = []
    offset = 0
    for record in collection:
        raw = np.frombuffer(record.bases.encode("latin-1"), dtype=np.uint8)
        idx = table[raw]
        if idx.size and idx.min() < 0:
            bad = record.bases[int(np.argmin(idx))]
            raise EncodingError(
                f"symbol {bad!r} not representable in this alphabet "
                "(alphabet/collection mismatch)"
            )
        n_sup = -(-len(raw) // k)
        padded = np.full(n_sup * k, sep_idx, dtype=np.int64)
        padded[: len(raw)] = idx
        ranks = padded.reshape(n_sup, k) @ alpha._powers
        codes = alpha.sk_inverse[ranks].astype(np.uint32)
        pieces.append(codes)
        pieces.append(np.array([sep_code], dtype=np.uint32))
        item_starts.append(offset)
        padded_lengths.append(n_sup)
        original_lengths.append(len(raw))
        offset += n_sup + 1
    pieces.append(np.array([alpha.terminator_code], dtype=np.uint32))
    return ExtendedText(
        super_chars=np.concatenate(pieces),
        item_starts=item_starts,
        padded_lengths=padded_lengths,
        original_lengths=original_lengths,
    )


def decode_super_char(code: int, alpha: ScrambledAlphabet) -> str:
    """Inverse of the k-mer encoding: code back to its k symbols."""
    return alpha.decode_code(code)


def degree_of_homophony(ext_text: ExtendedText) -> int:
    """Number of symbol orderings consistent with the text's decreasing
    frequency array: the product of m! over every group of m occurring
    super-characters that share a frequency."""
    _, counts = np.unique(ext_text.super_chars, return_counts=True)
    result = 1
    for multiplicity in Counter(counts.tolist()).values():
        result *= math.factorial(multiplicity)
    return result
