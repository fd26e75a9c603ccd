"""Numba-compiled kernels for the per-symbol hot loops.

Everything here is deliberately free of Python objects: plain integer
arrays in, plain integer arrays out. Wrappers in the owning modules do
argument validation and error reporting.
"""

import numpy as np
from numba import njit, uint64

_MASK32 = uint64(0xFFFFFFFF)


@njit(cache=True)
def salsa20_blocks(key_words, nonce, first_block, n_blocks):
    """Generate ``n_blocks`` 64-byte Salsa20/20 keystream blocks.

    key_words: 8 little-endian uint32 words of the 256-bit key.
    Returns a uint32 array of length 16 * n_blocks (little-endian words).
    """
    out = np.empty(16 * n_blocks, dtype=np.uint32)
    k0 = uint64(key_words[0])
    k1 = uint64(key_words[1])
    k2 = uint64(key_words[2])
    k3 = uint64(key_words[3])
    k4 = uint64(key_words[4])
    k5 = uint64(key_words[5])
    k6 = uint64(key_words[6])
    k7 = uint64(key_words[7])
    n0 = uint64(nonce) & _MASK32
    n1 = (uint64(nonce) >> uint64(32)) & _MASK32
    for blk in range(n_blocks):
        ctr = uint64(first_block) + uint64(blk)
        c0 = ctr & _MASK32
        c1 = (ctr >> uint64(32)) & _MASK32
        # initial state: constants on the diagonal, key, nonce, counter
        i0 = uint64(0x61707865)
        i1, i2, i3, i4 = k0, k1, k2, k3
        i5 = uint64(0x3320646E)
        i6, i7 = n0, n1
        i8, i9 = c0, c1
        i10 = uint64(0x79622D32)
        i11, i12, i13, i14 = k4, k5, k6, k7
        i15 = uint64(0x6B206574)
        x0, x1, x2, x3 = i0, i1, i2, i3
        x4, x5, x6, x7 = i4, i5, i6, i7
        x8, x9, x10, x11 = i8, i9, i10, i11
        x12, x13, x14, x15 = i12, i13, i14, i15
        for _ in range(10):
            # column round
            s = (x0 + x12) & _MASK32
            x4 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x4 + x0) & _MASK32
            x8 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x8 + x4) & _MASK32
            x12 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x12 + x8) & _MASK32
            x0 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x5 + x1) & _MASK32
            x9 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x9 + x5) & _MASK32
            x13 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x13 + x9) & _MASK32
            x1 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x1 + x13) & _MASK32
            x5 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x10 + x6) & _MASK32
            x14 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x14 + x10) & _MASK32
            x2 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x2 + x14) & _MASK32
            x6 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x6 + x2) & _MASK32
            x10 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x15 + x11) & _MASK32
            x3 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x3 + x15) & _MASK32
            x7 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x7 + x3) & _MASK32
            x11 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x11 + x7) & _MASK32
            x15 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            # row round
            s = (x0 + x3) & _MASK32
            x1 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x1 + x0) & _MASK32
            x2 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x2 + x1) & _MASK32
            x3 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x3 + x2) & _MASK32
            x0 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x5 + x4) & _MASK32
            x6 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x6 + x5) & _MASK32
            x7 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x7 + x6) & _MASK32
            x4 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x4 + x7) & _MASK32
            x5 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x10 + x9) & _MASK32
            x11 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x11 + x10) & _MASK32
            x8 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x8 + x11) & _MASK32
            x9 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x9 + x8) & _MASK32
            x10 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
            s = (x15 + x14) & _MASK32
            x12 ^= ((s << uint64(7)) | (s >> uint64(25))) & _MASK32
            s = (x12 + x15) & _MASK32
            x13 ^= ((s << uint64(9)) | (s >> uint64(23))) & _MASK32
            s = (x13 + x12) & _MASK32
            x14 ^= ((s << uint64(13)) | (s >> uint64(19))) & _MASK32
            s = (x14 + x13) & _MASK32
            x15 ^= ((s << uint64(18)) | (s >> uint64(14))) & _MASK32
        base = 16 * blk
        out[base + 0] = (x0 + i0) & _MASK32
        out[base + 1] = (x1 + i1) & _MASK32
        out[base + 2] = (x2 + i2) & _MASK32
        out[base + 3] = (x3 + i3) & _MASK32
        out[base + 4] = (x4 + i4) & _MASK32
        out[base + 5] = (x5 + i5) & _MASK32
        out[base + 6] = (x6 + i6) & _MASK32
        out[base + 7] = (x7 + i7) & _MASK32
        out[base + 8] = (x8 + i8) & _MASK32
        out[base + 9] = (x9 + i9) & _MASK32
        out[base + 10] = (x10 + i10) & _MASK32
        out[base + 11] = (x11 + i11) & _MASK32
        out[base + 12] = (x12 + i12) & _MASK32
        out[base + 13] = (x13 + i13) & _MASK32
        out[base + 14] = (x14 + i14) & _MASK32
        out[base + 15] = (x15 + i15) & _MASK32
    return out


@njit(cache=True)
def mtf_encode(symbols, alpha_size):
    """Move-to-front ranks of ``symbols`` (dense codes below alpha_size)."""
    table = np.arange(alpha_size, dtype=np.int32)
    out = np.empty(len(symbols), dtype=np.int32)
    for i in range(len(symbols)):
        s = symbols[i]
        j = 0
        while table[j] != s:
            j += 1
        out[i] = j
        while j > 0:
            table[j] = table[j - 1]
            j -= 1
        table[0] = s
    return out


@njit(cache=True)
def mtf_decode(ranks, alpha_size):
    table = np.arange(alpha_size, dtype=np.int32)
    out = np.empty(len(ranks), dtype=np.int32)
    for i in range(len(ranks)):
        j = ranks[i]
        s = table[j]
        out[i] = s
        while j > 0:
            table[j] = table[j - 1]
            j -= 1
        table[0] = s
    return out


@njit(cache=True)
def rle0_encode(ranks):
    """Replace each maximal zero run with escape digits, shift other ranks by 1.

    A run of length L is written as the binary digits of L-1, most
    significant first, one escape symbol (0 or 1) per digit. Output never
    exceeds the input length.
    """
    n_in = len(ranks)
    out = np.empty(n_in, dtype=np.int32)
    i = 0
    n = 0
    while i < n_in:
        v = ranks[i]
        if v == 0:
            run = 1
            i += 1
            while i < n_in and ranks[i] == 0:
                run += 1
                i += 1
            x = run - 1
            if x == 0:
                out[n] = 0
                n += 1
            else:
                bl = 0
                t = x
                while t > 0:
                    bl += 1
                    t >>= 1
                for j in range(bl - 1, -1, -1):
                    out[n] = (x >> j) & 1
                    n += 1
        else:
            out[n] = v + 1
            n += 1
            i += 1
    return out[:n].copy()


@njit(cache=True)
def rle0_decode(encoded, out):
    """Inverse of rle0_encode into preallocated ``out``.

    Returns the number of ranks written, or -1 if the stream does not fit
    (the caller treats that as corruption or a wrong key).
    """
    n_in = len(encoded)
    cap = len(out)
    i = 0
    n = 0
    while i < n_in:
        v = encoded[i]
        if v <= 1:
            val = 0
            while i < n_in and encoded[i] <= 1:
                val = val * 2 + encoded[i]
                i += 1
                if val > cap:
                    return -1
            run = val + 1
            if n + run > cap:
                return -1
            for _ in range(run):
                out[n] = 0
                n += 1
        else:
            if n >= cap:
                return -1
            out[n] = v - 1
            n += 1
            i += 1
    return n


@njit(cache=True)
def bwt_inverse_walk(lf, last, primary):
    """Rebuild the text from its BWT by following the LF chain."""
    n = len(lf)
    out = np.empty(n, dtype=last.dtype)
    r = primary
    for i in range(n - 1, -1, -1):
        out[i] = last[r]
        r = lf[r]
    return out
