"""Command-line interface.

Commands: keygen, build, count, locate, extract, verify, gen-corpus.
Exit codes: 0 success, 2 usage, 3 I/O, 4 input or index format,
5 key handling, 6 verification failure.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from . import crypto, fasta_io, search
from .block_store import build_index, read_index, write_index
from .corpus import CorpusSpec, generate_corpus
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

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_KEY = 5
EXIT_VERIFY = 6

PATTERN_SYMBOLS = fasta_io.IUPAC_SYMBOLS


def _read_patterns(args) -> list[str]:
    if args.patterns_file:
        with open(args.patterns_file, "r") as fh:
            patterns = [line.strip().upper() for line in fh if line.strip()]
    elif args.pattern:
        patterns = [args.pattern.upper()]
    else:
        raise ParameterError("supply a pattern or --patterns-file")
    for p in patterns:
        bad = set(p) - PATTERN_SYMBOLS
        if bad:
            raise ParameterError(
                f"pattern {p!r} contains non-IUPAC symbol {sorted(bad)[0]!r}"
            )
    return patterns


def cmd_keygen(args) -> int:
    key = crypto.generate_key()
    crypto.save_key(key, args.out, force=args.force)
    print(f"wrote 64-byte key to {args.out}")
    return EXIT_OK


def cmd_build(args) -> int:
    key = crypto.load_key(args.key)
    t0 = time.monotonic()
    collection = fasta_io.parse_fasta(args.fasta)
    index = build_index(
        collection,
        key,
        k=args.k,
        bs=args.bs,
        sample_rate=args.sample_rate,
        nt=args.threads,
        nr=args.ranges,
    )
    index_bytes = write_index(index, args.out)
    seconds = time.monotonic() - t0
    import os

    input_bytes = os.stat(args.fasta).st_size
    print("# ratio = index_bytes / input_bytes")
    print(f"input_bytes={input_bytes}")
    print(f"index_bytes={index_bytes}")
    print(f"ratio={index_bytes / input_bytes:.6f}")
    print(f"seconds={seconds:.3f}")
    print(f"threads={args.threads}")
    return EXIT_OK


def cmd_count(args) -> int:
    key = crypto.load_key(args.key)
    index = read_index(args.index)
    patterns = _read_patterns(args)
    if len(patterns) == 1 and not args.patterns_file:
        print(search.count(patterns[0], index, key))
    else:
        for p in patterns:
            print(f"{p}\t{search.count(p, index, key)}")
    return EXIT_OK


def cmd_locate(args) -> int:
    key = crypto.load_key(args.key)
    index = read_index(args.index)
    patterns = _read_patterns(args)
    batch = args.patterns_file is not None
    for p in patterns:
        for match in search.locate(p, index, key):
            if batch:
                print(f"{p}\t{match.item_index}\t{match.offset}")
            else:
                print(f"{match.item_index}\t{match.offset}")
    return EXIT_OK


def cmd_extract(args) -> int:
    key = crypto.load_key(args.key)
    index = read_index(args.index)
    try:
        bases = search.extract(args.item, args.start, args.length, index, key)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    description = index.decrypt_description(args.item, key)
    record = fasta_io.SequenceRecord(description, bases)
    sys.stdout.write(
        fasta_io.write_fasta(fasta_io.SequenceCollection([record]), 80).decode("latin-1")
    )
    return EXIT_OK


def verify_index(index, key, collection, trials: int, seed: int) -> int:
    """Compare ``trials`` random patterns against the reference scanner.

    Returns the number of patterns checked; raises VerificationError with
    the reproduction seed on the first disagreement.
    """
    rng = random.Random(seed)
    lengths = [index.k, 15, 20, 50, 100, 200, 500]
    checked = 0
    for trial in range(trials):
        record = collection[rng.randrange(len(collection))]
        usable = [m for m in lengths if m <= record.length]
        if not usable:
            continue
        m = rng.choice(usable)
        at = rng.randint(0, record.length - m)
        pattern = record.bases[at : at + m]
        if trial % 5 == 4:  # sprinkle in likely-absent patterns
            i = rng.randrange(len(pattern))
            repl = rng.choice("ACGT")
            pattern = pattern[:i] + repl + pattern[i + 1 :]
        expected = search.naive_locate(collection, pattern)
        got_count = search.count(pattern, index, key)
        got = search.locate(pattern, index, key)
        if got_count != len(expected) or got != sorted(expected):
            raise VerificationError(
                f"index disagrees with scanner on pattern {pattern!r} "
                f"(trial {trial}, reproduction seed {seed})"
            )
        checked += 1
    return checked


def cmd_verify(args) -> int:
    key = crypto.load_key(args.key)
    index = read_index(args.index)
    collection = fasta_io.parse_fasta(args.fasta)
    checked = verify_index(index, key, collection, args.trials, args.seed)
    print(f"verify: PASS ({checked} patterns, seed {args.seed})")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    spec = CorpusSpec(
        reference_length=args.reference_length,
        individuals=args.individuals,
        mutation_rate=args.mutation_rate,
        indel_rate=args.indel_rate,
        indel_min=args.indel_min,
        indel_max=args.indel_max,
        seed=args.seed,
    )
    collection = generate_corpus(spec)
    data = fasta_io.write_fasta(collection, 80)
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"wrote {len(collection)} sequences, {collection.total_bases} bases to {args.out}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="sealindex",
        description="Encrypted, compressed full-text index for FASTA collections",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a new 64-byte key file")
    p.add_argument("out")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("build", help="build an encrypted index from FASTA")
    p.add_argument("fasta")
    p.add_argument("--key", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=4, help="extension order (default 4)")
    p.add_argument("--bs", type=int, default=16384, help="block size (default 16Ki)")
    p.add_argument(
        "--sample-rate", type=float, default=2.0, help="marked rows percentage"
    )
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--ranges", type=int, default=None, help="sort ranges (default 16*threads)")
    p.set_defaults(func=cmd_build)

    for name, fn in (("count", cmd_count), ("locate", cmd_locate)):
        p = sub.add_parser(name, help=f"{name} pattern occurrences")
        p.add_argument("index")
        p.add_argument("pattern", nargs="?")
        p.add_argument("--key", required=True)
        p.add_argument("--patterns-file", help="one pattern per line")
        p.set_defaults(func=fn)

    p = sub.add_parser("extract", help="extract a subsequence of one item")
    p.add_argument("index")
    p.add_argument("item", type=int)
    p.add_argument("start", type=int)
    p.add_argument("length", type=int)
    p.add_argument("--key", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="check the index against the original FASTA")
    p.add_argument("index")
    p.add_argument("fasta")
    p.add_argument("--key", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-corpus", help="generate a synthetic FASTA collection")
    p.add_argument("out")
    p.add_argument("--reference-length", type=int, required=True)
    p.add_argument("--individuals", type=int, required=True)
    p.add_argument("--mutation-rate", type=float, default=0.001)
    p.add_argument("--indel-rate", type=float, default=0.00013)
    p.add_argument("--indel-min", type=int, default=1)
    p.add_argument("--indel-max", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_corpus)
    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, PatternError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyfileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KEY
    except (ParseError, FormatError, EncodingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except SealIndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
