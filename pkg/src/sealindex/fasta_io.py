"""FASTA parsing and serialization for multi-record nucleotide collections.

Records keep their file order; queries later refer to records by that
ordinal index. Sequence data is normalized to uppercase IUPAC codes at
parse time, descriptions are kept verbatim.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError

# The 16 IUPAC nucleotide codes: bases (U kept distinct from T) plus
# ambiguity symbols.
IUPAC_SYMBOLS = frozenset("ACGTURYSWKMBDHVN")


@dataclass(frozen=True)
class SequenceRecord:
    """One FASTA record: header text (without '>') and normalized bases."""

    description: str
    bases: str

    @property
    def length(self) -> int:
        return len(self.bases)


@dataclass
class SequenceCollection:
    records: list[SequenceRecord] = field(default_factory=list)

    @property
    def total_bases(self) -> int:
        return sum(r.length for r in self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i) -> SequenceRecord:
        return self.records[i]


def _iter_lines(source):
    """Yield (line_number, text_line) from bytes, a binary stream, or a path."""
    if isinstance(source, (str, Path)):
        fh = open(source, "rb")
        close = True
    elif isinstance(source, (bytes, bytearray)):
        fh = io.BytesIO(source)
        close = True
    else:
        fh = source
        close = False
    try:
        for number, raw in enumerate(fh, start=1):
            yield number, raw.decode("latin-1").rstrip("\r\n")
    finally:
        if close:
            fh.close()


def parse_fasta(source) -> SequenceCollection:
    """Parse FASTA text from a path, bytes, or binary stream.

    Sequence lines are concatenated with whitespace stripped and letters
    uppercased. Raises ParseError (with a line number) for sequence data
    before any header, an empty record body, or a non-IUPAC symbol.
    """
    records: list[SequenceRecord] = []
    description = None
    chunks: list[str] = []
    header_line = 0

    def flush(at_line):
        if description is None:
            return
        if not chunks:
            raise ParseError(
                f"record {description!r} has no sequence data", line=header_line
            )
        records.append(SequenceRecord(description, "".join(chunks)))

    for number, line in _iter_lines(source):
        stripped = line.strip()
        if not stripped:
            continue  # blank lines inside records are tolerated
        if stripped.startswith(">"):
            flush(number)
            description = line.lstrip()[1:]
            header_line = number
            chunks = []
            continue
        if description is None:
            raise ParseError("sequence data before any '>' header", line=number)
        piece = "".join(stripped.split()).upper()
        bad = set(piece) - IUPAC_SYMBOLS
        if bad:
            raise ParseError(
                f"non-IUPAC symbol {sorted(bad)[0]!r} in sequence data", line=number
            )
        chunks.append(piece)
    flush(None)
    return SequenceCollection(records)


def write_fasta(collection: SequenceCollection, line_width: int = 80) -> bytes:
    """Serialize a collection back to FASTA bytes.

    parse_fasta(write_fasta(c, w)) == c for every valid collection and
    width; wrapping is the only formatting applied.
    """
    if line_width < 1:
        raise ValueError("line_width must be >= 1")
    out = []
    for record in collection:
        out.append(">" + record.description + "\n")
        bases = record.bases
        for i in range(0, len(bases), line_width):
            out.append(bases[i : i + line_width] + "\n")
    return "".join(out).encode("latin-1")
