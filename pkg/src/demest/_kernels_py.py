"""Pure numpy / Python versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def xor_bits(row, positions):
    positions = np.asarray(positions, dtype=np.int64)
    if positions.size == 0:
        return
    bits = np.left_shift(np.uint64(1), (positions & 63).astype(np.uint64))
    np.bitwise_xor.at(row, positions >> 6, bits)


def coincidence_counts(words, sets):
    sets = np.asarray(sets, dtype=np.int64)
    out = np.zeros(len(sets), dtype=np.int64)
    for s, row in enumerate(sets):
        idx = row[row >= 0]
        acc = np.bitwise_and.reduce(words[idx], axis=0)
        out[s] = int(np.bitwise_count(acc).sum())
    return out


def pattern_counts(words, idx, n_shots):
    idx = np.asarray(idx, dtype=np.int64)
    m = len(idx)
    rows = words[idx]
    out = np.zeros(1 << m, dtype=np.int64)
    for x in range(1 << m):
        acc = np.full(words.shape[1], np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        for j in range(m):
            acc &= rows[j] if (x >> j) & 1 else ~rows[j]
        out[x] = int(np.bitwise_count(acc).sum())
    out[0] -= words.shape[1] * 64 - n_shots
    return out


def match_dp(dist, bdist):
    k = len(bdist)
    if k > 24:
        raise ValueError("subset DP limited to 24 defects")
    dist = [list(map(float, r)) for r in np.asarray(dist)]
    bdist = [float(b) for b in bdist]
    n_masks = 1 << k
    f = [0.0] * n_masks
    choice = [-2] * n_masks
    for mask in range(1, n_masks):
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        best = bdist[i] + f[rest]
        ch = -1
        mj = rest
        di = dist[i]
        while mj:
            low = mj & -mj
            j = low.bit_length() - 1
            mj ^= low
            c = di[j] + f[rest ^ low]
            if c < best:
                best = c
                ch = j
        f[mask] = best
        choice[mask] = ch
    partner = np.full(k, -1, dtype=np.int64)
    mask = n_masks - 1
    while mask:
        i = (mask & -mask).bit_length() - 1
        ch = choice[mask]
        mask ^= 1 << i
        if ch >= 0:
            partner[i] = ch
            partner[ch] = i
            mask ^= 1 << ch
    return partner, f[n_masks - 1]
