"""Synthetic collections: one random reference, many derived individuals.

Each individual applies uniform point substitutions at ``mutation_rate``
and insertions/deletions at ``indel_rate`` with lengths uniform over the
configured interval, mirroring the average genetic variation between
human individuals. Everything is deterministic under the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fasta_io import SequenceCollection, SequenceRecord

_BASES = np.frombuffer(b"ACGT", dtype=np.uint8)


@dataclass(frozen=True)
class CorpusSpec:
    reference_length: int
    individuals: int
    mutation_rate: float = 0.001
    indel_rate: float = 0.00013
    indel_min: int = 1
    indel_max: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.reference_length < 1 or self.individuals < 1:
            raise ParameterError("reference length and individual count must be >= 1")
        if not (0 <= self.mutation_rate <= 1 and 0 <= self.indel_rate <= 1):
            raise ParameterError("rates must lie in [0, 1]")
        if not 1 <= self.indel_min <= self.indel_max:
            raise ParameterError("indel length range must satisfy 1 <= min <= max")


def _to_string(arr: np.ndarray) -> str:
    return _BASES[arr].tobytes().decode("ascii")


def _apply_indels(seq: np.ndarray, rng: np.random.Generator, spec: CorpusSpec) -> np.ndarray:
    n_indels = rng.binomial(len(seq), spec.indel_rate)
    if n_indels == 0:
        return seq
    positions = np.sort(rng.choice(len(seq), size=n_indels, replace=False))
    inserts = rng.random(n_indels) < 0.5
    lengths = rng.integers(spec.indel_min, spec.indel_max + 1, size=n_indels)
    pieces = []
    prev = 0
    for pos, ins, ln in zip(positions, inserts, lengths):
        pos = int(pos)
        ln = int(ln)
        if ins:
            pieces.append(seq[prev:pos])
            pieces.append(rng.integers(0, 4, size=ln))
            prev = pos
        else:
            pieces.append(seq[prev:pos])
            prev = min(len(seq), pos + ln)
    pieces.append(seq[prev:])
    return np.concatenate(pieces).astype(np.uint8)


def generate_corpus(spec: CorpusSpec) -> SequenceCollection:
    """Reference drawn uniformly over {A,C,G,T}; individuals derived from it."""
    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    reference = rng.integers(0, 4, size=spec.reference_length, dtype=np.uint8)
    records = []
    for i in range(spec.individuals):
        seq = reference.copy()
        n_mut = rng.binomial(len(seq), spec.mutation_rate)
        if n_mut:
            at = rng.choice(len(seq), size=n_mut, replace=False)
            # uniform over the three other bases, so every chosen site changes
            seq[at] = (seq[at] + rng.integers(1, 4, size=n_mut, dtype=np.uint8)) % 4
        seq = _apply_indels(seq, rng, spec)
        records.append(SequenceRecord(f"individual_{i:04d}", _to_string(seq)))
    return SequenceCollection(records)
