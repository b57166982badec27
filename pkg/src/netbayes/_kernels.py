"""Compiled inner loops shared by the statistics and the samplers.

Graphs arrive here as bit-packed rows (uint64, shape (n, n_words)).
Term codes: 0 = edges, 1 = gwesp, 2 = gwnsp. ``wtab[t, k]`` holds the
geometric weight of a dyad with k shared partners for term t.
"""

import numpy as np
from numba import njit

EDGES, GWESP, GWNSP = 0, 1, 2

PROPOSAL_RANDOM_DYAD = 0
PROPOSAL_TIE_NO_TIE = 1

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, inline="always")
def get_bit(rows, i, j):
    return (rows[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)


@njit(cache=True, inline="always")
def flip_bit(rows, i, j):
    rows[i, j >> 6] ^= np.uint64(1) << np.uint64(j & 63)


@njit(cache=True)
def shared_partners(rows, i, j):
    total = 0
    for w in range(rows.shape[1]):
        total += popcount64(rows[i, w] & rows[j, w])
    return total


@njit(cache=True)
def _gw_neighbour_delta(rows, a, other, adding, codes, wtab, out):
    # Dyads (a, k) for k in N(other) \ {a}: their shared-partner count moves by +-1.
    n_words = rows.shape[1]
    for w in range(n_words):
        word = rows[other, w]
        while word != np.uint64(0):
            low = word & (~word + np.uint64(1))
            k = w * 64 + popcount64(low - np.uint64(1))
            word ^= low
            if k == a:
                continue
            s = shared_partners(rows, a, k)
            connected = get_bit(rows, a, k) == np.uint64(1)
            for t in range(codes.shape[0]):
                c = codes[t]
                if (c == GWESP and connected) or (c == GWNSP and not connected):
                    if adding:
                        out[t] += wtab[t, s + 1] - wtab[t, s]
                    else:
                        out[t] += wtab[t, s - 1] - wtab[t, s]


@njit(cache=True)
def change_stats(rows, i, j, codes, wtab, out):
    """Write s(y with (i,j) toggled) - s(y) into ``out``."""
    present = get_bit(rows, i, j) == np.uint64(1)
    sign = -1.0 if present else 1.0
    has_gw = False
    for t in range(codes.shape[0]):
        out[t] = 0.0
        if codes[t] == EDGES:
            out[t] = sign
        else:
            has_gw = True
    if not has_gw:
        return
    sp = shared_partners(rows, i, j)
    for t in range(codes.shape[0]):
        if codes[t] == GWESP:
            out[t] += sign * wtab[t, sp]
        elif codes[t] == GWNSP:
            out[t] -= sign * wtab[t, sp]
    adding = not present
    _gw_neighbour_delta(rows, i, j, adding, codes, wtab, out)
    _gw_neighbour_delta(rows, j, i, adding, codes, wtab, out)


@njit(cache=True)
def _dyad_key(i, j, n, directed):
    if directed:
        return i * n + j
    if i < j:
        return i * n + j
    return j * n + i


@njit(cache=True)
def _draw_dyad(rng, n, directed):
    i = rng.integers(0, n)
    j = rng.integers(0, n - 1)
    if j >= i:
        j += 1
    if not directed and j < i:
        return j, i
    return i, j


@njit(cache=True)
def _p_tie(m, n_dyads):
    if m == 0:
        return 0.0
    if m == n_dyads:
        return 1.0
    return 0.5


@njit(cache=True)
def _graph_code(rows, n, directed):
    # Bit index follows the row-major order of dyads (i<j for undirected).
    code = 0
    b = 0
    for i in range(n):
        start = 0 if directed else i + 1
        for j in range(start, n):
            if i == j:
                continue
            if get_bit(rows, i, j) == np.uint64(1):
                code |= 1 << b
            b += 1
    return code


@njit(cache=True)
def run_chain(
    rows,
    directed,
    theta,
    codes,
    wtab,
    stats,
    burn,
    n_records,
    thin,
    proposal,
    rng,
    rec_stats,
    rec_codes,
    record_codes,
):
    """Single-dyad Metropolis-Hastings on the ERGM at ``theta``.

    ``rows`` and ``stats`` are updated in place. After ``burn`` proposals,
    ``n_records`` snapshots are taken, each after a further ``thin``
    proposals. Returns the number of accepted toggles.
    """
    n = rows.shape[0]
    p = codes.shape[0]
    n_dyads = n * (n - 1) if directed else n * (n - 1) // 2
    delta = np.zeros(p)

    tie_key = np.empty(0, dtype=np.int64)
    tie_pos = np.empty(0, dtype=np.int32)
    m = 0
    if proposal == PROPOSAL_TIE_NO_TIE:
        tie_key = np.empty(n_dyads, dtype=np.int64)
        tie_pos = np.full(n * n, -1, dtype=np.int32)
        for i in range(n):
            start = 0 if directed else i + 1
            for j in range(start, n):
                if i != j and get_bit(rows, i, j) == np.uint64(1):
                    key = i * n + j
                    tie_key[m] = key
                    tie_pos[key] = m
                    m += 1

    accepted = 0
    total = burn + n_records * thin
    rec = 0
    for step in range(1, total + 1):
        log_h = 0.0
        if proposal == PROPOSAL_TIE_NO_TIE:
            pt = _p_tie(m, n_dyads)
            if rng.random() < pt:
                key = tie_key[rng.integers(0, m)]
                i = key // n
                j = key % n
                log_h = np.log((1.0 - _p_tie(m - 1, n_dyads)) / (n_dyads - m + 1)) - np.log(pt / m)
            else:
                while True:
                    i, j = _draw_dyad(rng, n, directed)
                    if get_bit(rows, i, j) == np.uint64(0):
                        break
                log_h = np.log(_p_tie(m + 1, n_dyads) / (m + 1)) - np.log((1.0 - pt) / (n_dyads - m))
        else:
            i, j = _draw_dyad(rng, n, directed)

        change_stats(rows, i, j, codes, wtab, delta)
        log_r = log_h
        for t in range(p):
            log_r += theta[t] * delta[t]
        if log_r >= 0.0 or np.log(rng.random()) < log_r:
            accepted += 1
            present = get_bit(rows, i, j) == np.uint64(1)
            flip_bit(rows, i, j)
            if not directed:
                flip_bit(rows, j, i)
            for t in range(p):
                stats[t] += delta[t]
            if proposal == PROPOSAL_TIE_NO_TIE:
                key = _dyad_key(i, j, n, directed)
                if present:
                    pos = tie_pos[key]
                    last = tie_key[m - 1]
                    tie_key[pos] = last
                    tie_pos[last] = pos
                    tie_pos[key] = -1
                    m -= 1
                else:
                    tie_key[m] = key
                    tie_pos[key] = m
                    m += 1

        if step > burn and (step - burn) % thin == 0 and rec < n_records:
            for t in range(p):
                rec_stats[rec, t] = stats[t]
            if record_codes:
                rec_codes[rec] = _graph_code(rows, n, directed)
            rec += 1
    return accepted
