"""Encrypted, compressed full-text self-index for genomic sequence collections.

Build an index over a k-extended, key-scrambled alphabet, store it
encrypted on disk, and answer exact count/locate/extract queries while
decrypting only the index blocks a query touches.
"""

from .alphabet import (
    BaseAlphabet,
    ExtendedText,
    ScrambledAlphabet,
    build_base_alphabet,
    decode_super_char,
    degree_of_homophony,
    encode_collection,
    scramble_extended_alphabet,
)
from .block_store import (
    EncryptedIndex,
    build_index,
    deserialize_index,
    partition_and_build,
    read_index,
    serialize_index,
    write_index,
)
from .bwt import BwtResult, compute_bwt, naive_bwt
from .corpus import CorpusSpec, generate_corpus
from .crypto import CipherStream, IndexKey, generate_key, load_key, save_key
from .errors import (
    EncodingError,
    FormatError,
    KeyfileError,
    ParameterError,
    ParseError,
    PatternError,
    SealIndexError,
    VerificationError,
)
from .fasta_io import SequenceCollection, SequenceRecord, parse_fasta, write_fasta
from .search import MatchPosition, SuperPattern, count, extract, locate, naive_locate

__version__ = "0.1.0"
