"""Count, locate, and extract queries against an encrypted index.

A base-alphabet pattern lifts to k super-patterns, one per phase offset
against the k-mer grid. Wildcard slots ('?') can appear only in the first
and last super-character. The fixed middle runs through ordinary backward
search; a masked head costs one extra masked backward step; a masked tail
is resolved either by enumerating the occurring super-characters
compatible with it (cheap when few) or by locating each candidate row and
extracting the super-character at the pattern end.

'?' stands for any base-alphabet symbol except '$' and '&'; in a tail it
may also match '&' in the trailing padding slots, which is what lets
patterns match right up to the end of an item.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .alphabet import SEPARATOR, TERMINATOR, ScrambledAlphabet
from .block_store import EncryptedIndex
from .crypto import IndexKey
from .errors import PatternError
from .fasta_io import SequenceCollection

# Above this many compatible tail super-characters, fall back to per-row
# tail checks instead of enumerating.
TAIL_ENUM_CAP = 1024

WILDCARD = "?"


@dataclass(frozen=True)
class SuperPattern:
    """One displacement's lift of a pattern onto the k-mer grid.

    core holds the codes of the fully determined super-characters, in
    pattern order. head_mask / tail_mask are k-length templates over the
    base symbols plus '?', present only when that edge has wildcards.
    """

    displacement: int
    core: tuple[int, ...]
    head_mask: str | None
    tail_mask: str | None

    @property
    def m(self) -> int:
        return len(self.core) + (self.head_mask is not None) + (
            self.tail_mask is not None
        )


@dataclass(frozen=True, order=True)
class MatchPosition:
    item_index: int
    offset: int


def compute_super_patterns(
    pattern: str, alpha: ScrambledAlphabet
) -> list[SuperPattern]:
    """The k super-patterns of ``pattern``, one per displacement.

    Raises PatternError for patterns shorter than k or containing the
    special symbols. A symbol absent from the alphabet is a no-match
    signal: the result is an empty list, not an error.
    """
    k = alpha.k
    if len(pattern) < k:
        raise PatternError(
            f"pattern length {len(pattern)} unsupported: must be >= k = {k}"
        )
    if TERMINATOR in pattern or SEPARATOR in pattern:
        raise PatternError("pattern may not contain the special symbols '$' or '&'")
    if any(ch not in alpha.base.symbols for ch in pattern):
        return []

    out = []
    for d in range(k):
        span = d + len(pattern)
        n_sup = -(-span // k)
        layout = WILDCARD * d + pattern + WILDCARD * (n_sup * k - span)
        pieces = [layout[i : i + k] for i in range(0, len(layout), k)]
        head = pieces[0] if WILDCARD in pieces[0] else None
        tail = pieces[-1] if len(pieces) > 1 and WILDCARD in pieces[-1] else None
        fixed = pieces[1 if head else 0 : len(pieces) - 1 if tail else len(pieces)]
        core = tuple(alpha.encode_kmer(p) for p in fixed)
        out.append(
            SuperPattern(displacement=d, core=core, head_mask=head, tail_mask=tail)
        )
    return out


def template_matches(kmer: str, template: str, allow_padding_tail: bool) -> bool:
    """Does a decoded k-mer satisfy a '?' template?

    Fixed slots must match exactly. '?' matches any non-special symbol;
    with allow_padding_tail, '?' may also match '&' provided every later
    slot is '&' too (an item's trailing padding).
    """
    in_padding = False
    for ch, t in zip(kmer, template):
        if in_padding and ch != SEPARATOR:
            return False
        if t != WILDCARD:
            if ch != t:
                return False
            continue
        if ch == TERMINATOR:
            return False
        if ch == SEPARATOR:
            if not allow_padding_tail:
                return False
            in_padding = True
    return True


def _vocab_kmer_matrix(index: EncryptedIndex, alpha: ScrambledAlphabet) -> np.ndarray:
    """(V, k) symbol-index matrix of the occurring super-characters."""
    cached = getattr(index, "_vocab_kmer_matrix", None)
    if cached is not None:
        return cached
    sigma = alpha.base.sigma_size
    ranks = alpha.sk[index.vocab].astype(np.int64)
    cols = []
    for j in range(alpha.k - 1, -1, -1):
        cols.append((ranks // (sigma**j)) % sigma)
    matrix = np.stack(cols, axis=1).astype(np.uint8)
    index._vocab_kmer_matrix = matrix
    return matrix


def _matching_codes(
    template: str,
    index: EncryptedIndex,
    alpha: ScrambledAlphabet,
    allow_padding_tail: bool,
) -> np.ndarray:
    """Occurring super-character codes whose k-mer matches the template."""
    matrix = _vocab_kmer_matrix(index, alpha)
    ok = np.ones(len(matrix), dtype=bool)
    tail_pad_ok = np.ones(len(matrix), dtype=bool)  # all later '?' slots are '&'
    for j in range(alpha.k - 1, -1, -1):
        t = template[j]
        col = matrix[:, j]
        if t != WILDCARD:
            ok &= col == alpha.base.symbol_index(t)
            tail_pad_ok = np.zeros(len(matrix), dtype=bool)
            continue
        is_sep = col == 1
        non_special = col >= 2
        if allow_padding_tail:
            ok &= non_special | (is_sep & tail_pad_ok)
            tail_pad_ok = is_sep & tail_pad_ok
        else:
            ok &= non_special
    return index.vocab[ok]


def backward_search(
    core: tuple[int, ...] | list[int], index: EncryptedIndex, key: IndexKey
) -> tuple[int, int] | None:
    """Row range [sp, ep) of suffixes starting with the code sequence, or
    None when no row qualifies."""
    if not core:
        raise ValueError("backward search needs at least one fixed super-character")
    sp, ep = index.code_range(core[-1])
    for code in reversed(core[:-1]):
        if sp >= ep:
            return None
        start, _ = index.code_range(code)
        sp = start + index.occ(code, sp, key)
        ep = start + index.occ(code, ep, key)
    return (sp, ep) if sp < ep else None


def refine_by_head_mask(
    row_range: tuple[int, int],
    head_mask: str,
    index: EncryptedIndex,
    key: IndexKey,
    alpha: ScrambledAlphabet,
) -> list[int]:
    """One more backward step keeping only rows whose preceding
    super-character matches the head template. Returns the surviving rows
    (sorted), which now address the pattern's first super-character."""
    sp, ep = row_range
    candidates = _matching_codes(head_mask, index, alpha, allow_padding_tail=False)
    rows: list[int] = []
    if ep - sp <= max(64, len(candidates)):
        wanted = set(int(c) for c in candidates)
        for r in range(sp, ep):
            code = index.code_at(r, key)
            if code in wanted:
                start, _ = index.code_range(code)
                rows.append(start + index.occ(code, r, key))
    else:
        for code in candidates:
            start, _ = index.code_range(int(code))
            lo = start + index.occ(int(code), sp, key)
            hi = start + index.occ(int(code), ep, key)
            rows.extend(range(lo, hi))
    rows.sort()
    return rows


def locate_row(index: EncryptedIndex, key: IndexKey, row: int) -> int:
    """Text position of the suffix at ``row`` via marked rows + LF walk."""
    row_to_pos = index.marked.row_to_pos()
    steps = 0
    r = row
    while r not in row_to_pos:
        r, _ = index.lf_step(r, key)
        steps += 1
    return row_to_pos[r] + steps


def _anchor_at_or_after(index: EncryptedIndex, position: int) -> tuple[int, int]:
    """(row, pos) of the nearest sampled text position >= ``position``;
    falls back to the primary row, which stands for the virtual position n."""
    stride = index.marked.stride
    q = -(-position // stride) * stride
    if q >= index.text_len:
        return index.primary_row, index.text_len
    return index.marked.pos_to_row()[q], q


def read_code_span(
    index: EncryptedIndex, key: IndexKey, first: int, last: int
) -> list[int]:
    """Super-character codes at text positions [first, last], by walking
    the LF chain down from the nearest sampled anchor."""
    row, pos = _anchor_at_or_after(index, last + 1)
    out: list[int] = []
    while pos > first:
        row, code = index.lf_step(row, key)
        pos -= 1
        if pos <= last:
            out.append(code)
    out.reverse()
    return out


def check_last_char(
    row: int,
    super_pattern: SuperPattern,
    index: EncryptedIndex,
    key: IndexKey,
    alpha: ScrambledAlphabet,
) -> int | None:
    """Locate ``row``, extract the super-character at its final pattern
    position, and return the text position if it satisfies the tail mask."""
    pos = locate_row(index, key, row)
    q = pos + super_pattern.m - 1
    (code,) = read_code_span(index, key, q, q)
    kmer = alpha.decode_code(code)
    if template_matches(kmer, super_pattern.tail_mask, allow_padding_tail=True):
        return pos
    return None


def _search_super_pattern(
    sp: SuperPattern,
    index: EncryptedIndex,
    key: IndexKey,
    alpha: ScrambledAlphabet,
    need_positions: bool,
) -> tuple[int, list[int]]:
    """Count and (optionally) start positions for one super-pattern.
    Positions are super-character indexes of the pattern's first super."""
    count = 0
    positions: list[int] = []

    def consume_rows(rows):
        nonlocal count
        count += len(rows)
        if need_positions:
            positions.extend(locate_row(index, key, r) for r in rows)

    def rows_after_head(rng):
        if sp.head_mask is not None:
            return refine_by_head_mask(rng, sp.head_mask, index, key, alpha)
        return range(rng[0], rng[1])

    if sp.tail_mask is not None:
        tail_codes = _matching_codes(sp.tail_mask, index, alpha, allow_padding_tail=True)
        if len(tail_codes) <= TAIL_ENUM_CAP or not sp.core:
            for tc in tail_codes:
                rng = backward_search(list(sp.core) + [int(tc)], index, key)
                if rng is None:
                    continue
                consume_rows(rows_after_head(rng))
            return count, positions
        # too many compatible tails: check rows one by one (Locate+Extract)
        rng = backward_search(sp.core, index, key)
        if rng is None:
            return 0, []
        for row in rows_after_head(rng):
            pos = check_last_char(row, sp, index, key, alpha)
            if pos is not None:
                count += 1
                if need_positions:
                    positions.append(pos)
        return count, positions

    rng = backward_search(sp.core, index, key)
    if rng is None:
        return 0, []
    consume_rows(rows_after_head(rng))
    return count, positions


def _to_match_positions(
    index: EncryptedIndex, super_positions: list[int], displacement: int, m_bases: int
) -> list[MatchPosition]:
    starts = index.item_starts()
    out = []
    for pos in super_positions:
        item = bisect.bisect_right(starts, pos) - 1
        offset = (pos - starts[item]) * index.k + displacement
        assert 0 <= offset <= index.original_lengths[item] - m_bases
        out.append(MatchPosition(item, offset))
    return out


def count(pattern: str, index: EncryptedIndex, key: IndexKey) -> int:
    """Number of occurrences of ``pattern`` across all items (overlapping
    occurrences included)."""
    alpha = index.scrambled_alphabet(key)
    total = 0
    for sp in compute_super_patterns(pattern, alpha):
        c, _ = _search_super_pattern(sp, index, key, alpha, need_positions=False)
        total += c
    return total


def locate(pattern: str, index: EncryptedIndex, key: IndexKey) -> list[MatchPosition]:
    """All (item, offset) occurrences of ``pattern``, sorted."""
    alpha = index.scrambled_alphabet(key)
    matches: list[MatchPosition] = []
    for sp in compute_super_patterns(pattern, alpha):
        _, super_positions = _search_super_pattern(
            sp, index, key, alpha, need_positions=True
        )
        matches.extend(
            _to_match_positions(index, super_positions, sp.displacement, len(pattern))
        )
    matches.sort()
    assert len(set(matches)) == len(matches), "duplicate match positions"
    return matches


def extract(
    item_index: int, start: int, length: int, index: EncryptedIndex, key: IndexKey
) -> str:
    """The original bases of one item over [start, start+length)."""
    if not 0 <= item_index < index.n_items:
        raise ValueError(f"item index {item_index} out of range")
    item_len = index.original_lengths[item_index]
    if start < 0 or length < 0 or start + length > item_len:
        raise ValueError(
            f"extract range [{start}, {start + length}) outside item of length {item_len}"
        )
    if length == 0:
        return ""
    alpha = index.scrambled_alphabet(key)
    k = index.k
    istart = index.item_starts()[item_index]
    first = istart + start // k
    last = istart + (start + length - 1) // k
    codes = read_code_span(index, key, first, last)
    text = "".join(alpha.decode_code(c) for c in codes)
    lead = start % k
    return text[lead : lead + length]


# ---------------------------------------------------------------------------
# Reference scanner (the oracle used by index verification)


def naive_locate(collection: SequenceCollection, pattern: str) -> list[MatchPosition]:
    """Plain substring scan over the collection, overlapping matches
    included. Independent of the index machinery by construction."""
    out = []
    for i, record in enumerate(collection):
        at = record.bases.find(pattern)
        while at >= 0:
            out.append(MatchPosition(i, at))
            at = record.bases.find(pattern, at + 1)
    return out
