"""Burrows-Wheeler transform over the scrambled super-character text.

The builder partitions the code space into contiguous ranges, buckets
rotation start positions by their first super-character, hands contiguous
groups of ranges to sorting workers with a greedy balancer, sorts each
range independently, and concatenates the results. Because the terminator
super-character is unique and has the smallest code, sorting rotations is
the same as sorting suffixes, which every internal strategy relies on.

Within a range, multi-key quicksort does the work; positions inside a run
of one repeated code are set aside and their order induced from the suffix
just after the run, so single-symbol runs cost linear time instead of
quadratic. Past a size threshold the builder switches to a shared rank
array computed by prefix doubling, which also bounds worst-case behaviour
on highly repetitive collections. Either way the output must equal
naive_bwt exactly; the strategy is invisible to callers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

from . import _kernels
from .alphabet import ExtendedText
from .errors import ParameterError

# Inputs longer than this are ordered via the shared prefix-doubling rank
# array instead of per-range quicksort.
RANK_PATH_THRESHOLD = 4096

_INSERTION_CUTOFF = 16


@dataclass(eq=False)
class RotationRange:
    """Rotations whose first super-character falls in [first, last)."""

    first_character: int
    last_character: int
    rotations: np.ndarray  # start positions, ascending


@dataclass(eq=False)
class BwtResult:
    last_column: np.ndarray      # L
    suffix_positions: np.ndarray  # row -> text position of that suffix
    primary_row: int              # row of the rotation starting at 0

    def __len__(self) -> int:
        return len(self.last_column)


def _check_terminated(codes: np.ndarray) -> None:
    if len(codes) == 0:
        raise ValueError("extended text is empty")
    if codes[-1] != 0:
        raise ValueError("extended text does not end with the terminator code 0")
    if int(np.count_nonzero(codes == 0)) != 1:
        raise ValueError("terminator code 0 must occur exactly once")


def _result_from_order(codes: np.ndarray, order: np.ndarray) -> BwtResult:
    prev = np.where(order == 0, len(codes) - 1, order - 1)
    return BwtResult(
        last_column=codes[prev],
        suffix_positions=order.astype(np.int64),
        primary_row=int(np.flatnonzero(order == 0)[0]),
    )


# ---------------------------------------------------------------------------
# Naive oracle


def naive_bwt(ext_text: ExtendedText) -> BwtResult:
    """Sort all rotations outright and take the last column.

    Used as the test oracle for compute_bwt. Rotations are compared as
    fixed-width big-endian byte strings over a doubled buffer, chunk by
    chunk, so comparisons run at C speed without materialising n^2 bytes.
    """
    codes = ext_text.super_chars
    _check_terminated(codes)
    n = len(codes)
    top = int(codes.max())
    width = 1 if top < 0x100 else 2 if top < 0x10000 else 4
    dtype = {1: ">u1", 2: ">u2", 4: ">u4"}[width]
    doubled = np.concatenate([codes, codes]).astype(dtype).tobytes()
    total = width * n
    chunk = 1024

    def compare(i: int, j: int) -> int:
        if i == j:
            return 0
        a0 = width * i
        b0 = width * j
        for off in range(0, total, chunk):
            a = doubled[a0 + off : a0 + off + chunk]
            b = doubled[b0 + off : b0 + off + chunk]
            if a != b:
                return -1 if a < b else 1
        return 0

    order = np.array(sorted(range(n), key=cmp_to_key(compare)), dtype=np.int64)
    return _result_from_order(codes, order)


# ---------------------------------------------------------------------------
# Range plumbing


def make_ranges(eac: int, nr: int) -> list[RotationRange]:
    """Partition [0, eac) into nr right-open ranges of near-equal width."""
    if nr < 1:
        raise ParameterError("range count nr must be >= 1")
    if nr > eac:
        raise ParameterError(f"range count nr={nr} exceeds alphabet size {eac}")
    bounds = [i * eac // nr for i in range(nr + 1)]
    empty = np.empty(0, dtype=np.int64)
    return [
        RotationRange(bounds[i], bounds[i + 1], empty) for i in range(nr)
    ]


def distribute_rotations(
    ext_text: ExtendedText, ranges: list[RotationRange], nt: int = 1
) -> list[RotationRange]:
    """Assign every rotation start to the range holding its first code.

    Positions come out ascending within each range regardless of nt, so
    the result is deterministic.
    """
    if nt < 1:
        raise ParameterError("thread count nt must be >= 1")
    codes = ext_text.super_chars
    starts = np.array([r.first_character for r in ranges], dtype=np.int64)
    which = np.searchsorted(starts, codes, side="right") - 1
    order = np.argsort(which, kind="stable")
    counts = np.bincount(which, minlength=len(ranges))
    split_at = np.cumsum(counts)[:-1]
    buckets = np.split(order, split_at)
    for rng, bucket in zip(ranges, buckets):
        rng.rotations = bucket.astype(np.int64)
    return ranges


def rebalance_ranges(
    ranges: list[RotationRange], ext_text: ExtendedText, nr: int
) -> list[RotationRange]:
    """Second pass over the equal-width partition: re-split any range
    holding more than 4x its fair share at observed code-frequency
    quantiles. Purely a load-balancing refinement; the set of rotations
    and their per-range ascending order are preserved."""
    n = len(ext_text.super_chars)
    limit = 4 * max(1, n // max(1, nr))
    out: list[RotationRange] = []
    for rng in ranges:
        if len(rng.rotations) <= limit:
            out.append(rng)
            continue
        codes = ext_text.super_chars[rng.rotations]
        pieces = max(2, -(-len(rng.rotations) // limit))
        # cut at code values that split the observed load evenly
        uniq, counts = np.unique(codes, return_counts=True)
        cum = np.cumsum(counts)
        targets = [len(rng.rotations) * (i + 1) // pieces for i in range(pieces - 1)]
        cut_codes = sorted({int(uniq[min(np.searchsorted(cum, t), len(uniq) - 1)]) + 1 for t in targets})
        bounds = [rng.first_character] + [
            c for c in cut_codes if rng.first_character < c < rng.last_character
        ] + [rng.last_character]
        for lo, hi in zip(bounds, bounds[1:]):
            mask = (codes >= lo) & (codes < hi)
            out.append(RotationRange(lo, hi, rng.rotations[mask]))
    return out


def split_ranges(ranges: list[RotationRange], nt: int) -> list[tuple[int, int]]:
    """Greedy contiguous assignment of ranges to at most nt workers.

    Walk the ranges in order accumulating rotation counts; close the
    current group once it exceeds ceil(total/nt). Max group load stays
    within twice the ideal for any input.
    """
    if nt < 1:
        raise ParameterError("thread count nt must be >= 1")
    total = sum(len(r.rotations) for r in ranges)
    target = -(-total // nt) if total else 1
    groups: list[tuple[int, int]] = []
    start = 0
    acc = 0
    for i, rng in enumerate(ranges):
        acc += len(rng.rotations)
        closing_leaves_room = len(groups) + 1 < nt
        if acc > target and closing_leaves_room:
            groups.append((start, i + 1))
            start = i + 1
            acc = 0
    if start < len(ranges):
        groups.append((start, len(ranges)))
    return groups


# ---------------------------------------------------------------------------
# Per-range sorting


def _mkqs(arr: list[int], codes: list[int], n: int, stats: dict | None) -> None:
    """In-place iterative multi-key quicksort of suffix start positions."""
    cmps = 0

    def char(p: int, d: int) -> int:
        q = p + d
        return codes[q - n] if q >= n else codes[q]

    stack = [(0, len(arr), 0)]
    while stack:
        lo, hi, d = stack.pop()
        size = hi - lo
        if size <= 1:
            continue
        if size <= _INSERTION_CUTOFF:
            for i in range(lo + 1, hi):
                p = arr[i]
                j = i
                while j > lo:
                    q = arr[j - 1]
                    dd = d
                    while True:
                        a = char(p, dd)
                        b = char(q, dd)
                        cmps += 1
                        if a != b:
                            break
                        dd += 1
                    if a < b:
                        arr[j] = q
                        j -= 1
                    else:
                        break
                arr[j] = p
            continue
        # median-of-three pivot character at this depth
        a = char(arr[lo], d)
        b = char(arr[lo + size // 2], d)
        c = char(arr[hi - 1], d)
        v = max(min(a, b), min(max(a, b), c))
        lt, i, gt = lo, lo, hi
        while i < gt:
            x = char(arr[i], d)
            cmps += 1
            if x < v:
                arr[lt], arr[i] = arr[i], arr[lt]
                lt += 1
                i += 1
            elif x > v:
                gt -= 1
                arr[gt], arr[i] = arr[i], arr[gt]
            else:
                i += 1
        stack.append((lo, lt, d))
        stack.append((lt, gt, d + 1))
        stack.append((gt, hi, d))
    if stats is not None:
        stats["char_cmps"] = stats.get("char_cmps", 0) + cmps


def _order_range_positions(
    positions: np.ndarray, codes: list[int], n: int, stats: dict | None
) -> list[int]:
    """Order one range's rotation starts by suffix, inducing run members.

    Positions inside a same-code run (successor has the same code) are
    set aside; multi-key quicksort handles the rest. Within the bucket of
    first code c the sorted order is

        direct with successor code < c   (run ends of descending runs)
        deferred from descending runs    (induced by a forward sweep)
        deferred from ascending runs     (induced by a backward sweep)
        direct with successor code > c   (run ends of ascending runs)

    because a deferred position compares as c + (its successor's suffix).
    Each sweep visits elements in final order and appends the predecessor
    of every visited position the moment it is seen, so chains through a
    run cost one step per member.
    """
    pos_set = set(positions.tolist())
    direct: list[int] = []
    have_deferred = False
    for p in positions.tolist():
        succ = p + 1 if p + 1 < n else 0
        if codes[p] == codes[succ] and succ in pos_set:
            have_deferred = True
        else:
            direct.append(p)
    _mkqs(direct, codes, n, stats)
    if not have_deferred:
        return direct

    result: list[int] = []
    i = 0
    while i < len(direct):
        j = i
        c = codes[direct[i]]
        while j < len(direct) and codes[direct[j]] == c:
            j += 1
        bucket = direct[i:j]
        i = j
        less: list[int] = []
        greater: list[int] = []
        for p in bucket:
            succ = p + 1 if p + 1 < n else 0
            (less if codes[succ] < c else greater).append(p)

        fwd = list(less)
        idx = 0
        while idx < len(fwd):
            x = fwd[idx]
            idx += 1
            pred = x - 1 if x > 0 else n - 1
            if codes[pred] == c and pred in pos_set:
                fwd.append(pred)
        bwd = list(reversed(greater))
        idx = 0
        while idx < len(bwd):
            x = bwd[idx]
            idx += 1
            pred = x - 1 if x > 0 else n - 1
            if codes[pred] == c and pred in pos_set:
                bwd.append(pred)

        result.extend(fwd)                      # less, then descending-run members
        result.extend(reversed(bwd[len(greater):]))  # ascending-run members
        result.extend(greater)
    return result


def sort_range(
    rng: RotationRange,
    ext_text: ExtendedText,
    ranks: np.ndarray | None = None,
    stats: dict | None = None,
) -> np.ndarray:
    """Rotation starts of one range in full lexicographic rotation order.

    With a precomputed rank array this is a plain argsort; otherwise
    multi-key quicksort plus run induction (see _order_range_positions).
    """
    positions = rng.rotations
    if len(positions) <= 1:
        return positions.copy()
    if ranks is not None:
        return positions[np.argsort(ranks[positions], kind="stable")]
    codes = ext_text.super_chars.tolist()
    ordered = _order_range_positions(positions, codes, len(codes), stats)
    return np.array(ordered, dtype=positions.dtype)


def _suffix_ranks_doubling(codes: np.ndarray) -> np.ndarray:
    """Suffix ranks by prefix doubling (numpy lexsort), O(n log n)."""
    n = len(codes)
    _, rank = np.unique(codes, return_inverse=True)
    rank = rank.astype(np.int32)
    step = 1
    while True:
        hi = rank
        lo = np.full(n, -1, dtype=np.int32)
        lo[: n - step] = rank[step:]
        order = np.lexsort((lo, hi))
        boundary = np.empty(n, dtype=bool)
        boundary[0] = False
        boundary[1:] = (hi[order[1:]] != hi[order[:-1]]) | (
            lo[order[1:]] != lo[order[:-1]]
        )
        new_rank = np.empty(n, dtype=np.int32)
        new_rank[order] = np.cumsum(boundary)
        rank = new_rank
        if rank[order[-1]] == n - 1:
            return rank
        step *= 2


def compute_bwt(
    ext_text: ExtendedText,
    nt: int = 1,
    nr: int | None = None,
    eac: int | None = None,
) -> BwtResult:
    """Full BWT through the range pipeline; output equals naive_bwt.

    nt and nr steer the work distribution only. nr defaults to 16 * nt
    and is clamped to the alphabet size.
    """
    codes = ext_text.super_chars
    _check_terminated(codes)
    if nt < 1:
        raise ParameterError("thread count nt must be >= 1")
    if eac is None:
        eac = int(codes.max()) + 1
    if nr is None:
        nr = min(16 * nt, eac)
    if not 1 <= nr <= eac:
        raise ParameterError(f"range count nr must be in [1, {eac}], got {nr}")

    n = len(codes)
    ranges = make_ranges(eac, nr)
    distribute_rotations(ext_text, ranges, nt)
    ranges = rebalance_ranges(ranges, ext_text, nr)
    groups = split_ranges(ranges, nt)

    ranks = _suffix_ranks_doubling(codes) if n > RANK_PATH_THRESHOLD else None
    codes_list = None if ranks is not None else codes.tolist()

    sorted_parts: dict[int, np.ndarray] = {}

    def run_group(bounds: tuple[int, int]) -> None:
        lo, hi = bounds
        for ri in range(lo, hi):
            sorted_parts[ri] = _sort_range_cached(
                ranges[ri], ext_text, ranks, codes_list
            )

    if nt == 1 or len(groups) <= 1:
        for grp in groups:
            run_group(grp)
    else:
        with ThreadPoolExecutor(max_workers=nt) as pool:
            list(pool.map(run_group, groups))

    order = np.concatenate([sorted_parts[i] for i in range(len(ranges))])
    if len(order) != n:
        raise AssertionError("ranges lost or duplicated rotations")
    return _result_from_order(codes, order.astype(np.int64))


def _sort_range_cached(rng, ext_text, ranks, codes_list):
    """sort_range, reusing one shared code list across ranges."""
    if ranks is not None or codes_list is None:
        return sort_range(rng, ext_text, ranks)
    positions = rng.rotations
    if len(positions) <= 1:
        return positions.copy()
    ordered = _order_range_positions(positions, codes_list, len(codes_list), None)
    return np.array(ordered, dtype=positions.dtype)


def inverse_bwt(last_column: np.ndarray, primary_row: int) -> np.ndarray:
    """Rebuild the text from L and the primary row via LF mapping."""
    n = len(last_column)
    order = np.argsort(last_column, kind="stable")
    lf = np.empty(n, dtype=np.int64)
    lf[order] = np.arange(n, dtype=np.int64)
    return _kernels.bwt_inverse_walk(lf, last_column, primary_row)
