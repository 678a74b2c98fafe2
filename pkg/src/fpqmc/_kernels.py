"""Numba kernels for the walker propagation engine.

States are packed 8 occupations per 64-bit word, central (low-momentum)
modes first, so word 0 carries most of the entropy.  Every vector is kept
sorted by (state hash, packed words); merges are two-pointer joins and
batch sorting is a stable 16-bit radix pass over the hash, which keeps
the whole step free of Python-level per-entry work.

All randomness is counter-based: a draw is a pure function of
(seed, step, replica, state hash, phase, counter), so results do not
depend on the order entries are processed in.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64

_MIX_MULT1 = U64(0xBF58476D1CE4E5B9)
_MIX_MULT2 = U64(0x94D049BB133111EB)
_HASH_SEED = U64(0x243F6A8885A308D3)
_RUN_MULT1 = U64(0x9E3779B97F4A7C15)
_RUN_MULT2 = U64(0xC2B2AE3D27D4EB4F)

PHASE_SPAWN = U64(0x1) << U64(56)
PHASE_COMPRESS = U64(0x2) << U64(56)

FLAG_OK = 0
FLAG_TIMESTEP = 1
FLAG_OVERFLOW = 2


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX_MULT1
    z = (z ^ (z >> U64(27))) * _MIX_MULT2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _uniform(base, phase, counter):
    bits = _mix(base ^ (phase + U64(counter)))
    return float(bits >> U64(11)) * 1.1102230246251565e-16  # 2**-53


@njit(cache=True, inline="always")
def _run_key(seed, step, replica):
    return _mix(U64(seed) ^ (U64(step) * _RUN_MULT1) ^ (U64(replica) * _RUN_MULT2))


@njit(cache=True)
def hash_rows(words):
    n = words.shape[0]
    K = words.shape[1]
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = _HASH_SEED
        for w in range(K):
            h = _mix(h ^ words[i, w])
        out[i] = h
    return out


@njit(cache=True, inline="always")
def _hash_one(words, row):
    h = _HASH_SEED
    for w in range(words.shape[1]):
        h = _mix(h ^ words[row, w])
    return h


@njit(cache=True, inline="always")
def _cmp_rows(wa, ia, wb, ib):
    for w in range(wa.shape[1]):
        a = wa[ia, w]
        b = wb[ib, w]
        if a < b:
            return -1
        if a > b:
            return 1
    return 0


@njit(cache=True)
def canonical_order(hashes, words):
    """Stable order by (hash, packed words); ties keep input order."""
    n = hashes.shape[0]
    order = np.arange(n, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    counts = np.empty(65536, dtype=np.int64)
    for shift in (U64(0), U64(16), U64(32), U64(48)):
        counts[:] = 0
        for i in range(n):
            counts[int((hashes[order[i]] >> shift) & U64(0xFFFF))] += 1
        total = 0
        for b in range(65536):
            c = counts[b]
            counts[b] = total
            total += c
        for i in range(n):
            idx = order[i]
            b = int((hashes[idx] >> shift) & U64(0xFFFF))
            buf[counts[b]] = idx
            counts[b] += 1
        order, buf = buf, order
    # radix ordered by full hash; resolve hash collisions by word compare
    for i in range(1, n):
        idx = order[i]
        h = hashes[idx]
        j = i
        while j > 0 and hashes[order[j - 1]] == h and _cmp_rows(
                words, order[j - 1], words, idx) > 0:
            order[j] = order[j - 1]
            j -= 1
        if j != i:
            order[j] = idx
    return order


@njit(cache=True, inline="always")
def _get_byte(words, row, pos):
    return int((words[row, pos >> 3] >> U64((7 - (pos & 7)) << 3)) & U64(0xFF))


@njit(cache=True, inline="always")
def _byte_unit(pos):
    return U64(1) << U64((7 - (pos & 7)) << 3)


@njit(cache=True)
def qmc_step_kernel(
    keys, hashes, coeffs, meta,
    num_modes, joff, kappa_step, total_momentum, coupling,
    dtau, shift, det_threshold, compress_min, compress_mag,
    seed, step, replica,
):
    """One projector application 1 - dtau (H - S) on a sorted vector.

    Returns (keys, hashes, coeffs, meta, walker_number, vacuum_coeff,
    flag, bad_diagonal, spawn_count).  On a nonzero flag the inputs are
    untouched and the other outputs are meaningless.
    """
    n = coeffs.shape[0]
    K = keys.shape[1]
    run = _run_key(seed, step, replica)

    # pass 1: diagonal factors, spawn budget, death-factor validation
    death = np.empty(n, dtype=np.float64)
    budget = 0
    for i in range(n):
        diff = total_momentum - kappa_step * meta[i, 1]
        diag = meta[i, 0] + diff * diff
        d = 1.0 - dtau * (diag - shift)
        if d < 0.0:
            empty_f = np.empty(0, dtype=np.float64)
            return (keys, hashes, empty_f, meta, 0.0, 0.0,
                    FLAG_TIMESTEP, diag, 0)
        death[i] = d
        if coupling > 0.0:
            ac = abs(coeffs[i])
            if ac >= det_threshold:
                budget += num_modes + meta[i, 2]
            else:
                budget += int(np.ceil(ac))

    skeys = np.empty((budget, K), dtype=np.uint64)
    shash = np.empty(budget, dtype=np.uint64)
    scoeff = np.empty(budget, dtype=np.float64)
    smeta = np.empty((budget, 3), dtype=np.int32)

    # pass 2: generate off-diagonal contributions
    s = 0
    if coupling > 0.0:
        for i in range(n):
            c = coeffs[i]
            ac = abs(c)
            if ac >= det_threshold:
                # exact row: every creation, then every occupied annihilation
                for pos in range(num_modes):
                    b = _get_byte(keys, i, pos)
                    if b >= 255:
                        empty_f = np.empty(0, dtype=np.float64)
                        return (keys, hashes, empty_f, meta, 0.0, 0.0,
                                FLAG_OVERFLOW, 0.0, 0)
                    for w in range(K):
                        skeys[s, w] = keys[i, w]
                    skeys[s, pos >> 3] += _byte_unit(pos)
                    amp = -coupling * np.sqrt(b + 1.0)
                    scoeff[s] = -dtau * amp * c
                    smeta[s, 0] = meta[i, 0] + 1
                    smeta[s, 1] = meta[i, 1] + joff[pos]
                    smeta[s, 2] = meta[i, 2] + (1 if b == 0 else 0)
                    shash[s] = _hash_one(skeys, s)
                    s += 1
                for pos in range(num_modes):
                    b = _get_byte(keys, i, pos)
                    if b > 0:
                        for w in range(K):
                            skeys[s, w] = keys[i, w]
                        skeys[s, pos >> 3] -= _byte_unit(pos)
                        amp = -coupling * np.sqrt(float(b))
                        scoeff[s] = -dtau * amp * c
                        smeta[s, 0] = meta[i, 0] - 1
                        smeta[s, 1] = meta[i, 1] - joff[pos]
                        smeta[s, 2] = meta[i, 2] - (1 if b == 1 else 0)
                        shash[s] = _hash_one(skeys, s)
                        s += 1
            else:
                attempts = int(np.ceil(ac))
                conn = num_modes + meta[i, 2]
                base = _mix(run ^ hashes[i])
                for att in range(attempts):
                    u = _uniform(base, PHASE_SPAWN, att)
                    r = int(u * conn)
                    if r >= conn:
                        r = conn - 1
                    if r < num_modes:
                        pos = r
                        b = _get_byte(keys, i, pos)
                        if b >= 255:
                            empty_f = np.empty(0, dtype=np.float64)
                            return (keys, hashes, empty_f, meta, 0.0, 0.0,
                                    FLAG_OVERFLOW, 0.0, 0)
                        create = True
                    else:
                        want = r - num_modes
                        pos = 0
                        b = 0
                        for q in range(num_modes):
                            b = _get_byte(keys, i, q)
                            if b > 0:
                                if want == 0:
                                    pos = q
                                    break
                                want -= 1
                        create = False
                    for w in range(K):
                        skeys[s, w] = keys[i, w]
                    if create:
                        skeys[s, pos >> 3] += _byte_unit(pos)
                        amp = -coupling * np.sqrt(b + 1.0)
                        smeta[s, 0] = meta[i, 0] + 1
                        smeta[s, 1] = meta[i, 1] + joff[pos]
                        smeta[s, 2] = meta[i, 2] + (1 if b == 0 else 0)
                    else:
                        skeys[s, pos >> 3] -= _byte_unit(pos)
                        amp = -coupling * np.sqrt(float(b))
                        smeta[s, 0] = meta[i, 0] - 1
                        smeta[s, 1] = meta[i, 1] - joff[pos]
                        smeta[s, 2] = meta[i, 2] - (1 if b == 1 else 0)
                    scoeff[s] = -dtau * amp * c * conn / attempts
                    shash[s] = _hash_one(skeys, s)
                    s += 1

    order = canonical_order(shash[:s], skeys[:s])

    # pass 3: join diagonal-scaled parents with sorted spawns, annihilate,
    # compress, and gather statistics
    out_keys = np.empty((n + s, K), dtype=np.uint64)
    out_hash = np.empty(n + s, dtype=np.uint64)
    out_coeff = np.empty(n + s, dtype=np.float64)
    out_meta = np.empty((n + s, 3), dtype=np.int32)
    m = 0
    nw = 0.0
    vac = 0.0
    spawned = s
    i = 0
    j = 0
    while i < n or j < s:
        take_base = False
        take_spawn = False
        if i >= n:
            take_spawn = True
        elif j >= s:
            take_base = True
        else:
            sj = order[j]
            if hashes[i] < shash[sj]:
                take_base = True
            elif hashes[i] > shash[sj]:
                take_spawn = True
            else:
                cres = _cmp_rows(keys, i, skeys, sj)
                if cres < 0:
                    take_base = True
                elif cres > 0:
                    take_spawn = True
        if take_base:
            c = coeffs[i] * death[i]
            h = hashes[i]
            src_keys, src_meta, src = keys, meta, i
            i += 1
        elif take_spawn:
            sj = order[j]
            c = scoeff[sj]
            h = shash[sj]
            src_keys, src_meta, src = skeys, smeta, sj
            j += 1
            while j < s:
                nxt = order[j]
                if shash[nxt] != h or _cmp_rows(skeys, sj, skeys, nxt) != 0:
                    break
                c += scoeff[nxt]
                j += 1
        else:
            sj = order[j]
            c = coeffs[i] * death[i]
            h = hashes[i]
            src_keys, src_meta, src = keys, meta, i
            j += 1
            c += scoeff[sj]
            while j < s:
                nxt = order[j]
                if shash[nxt] != h or _cmp_rows(skeys, sj, skeys, nxt) != 0:
                    break
                c += scoeff[nxt]
                j += 1
            i += 1
        if c == 0.0:
            continue
        ac = abs(c)
        if ac < compress_min:
            u = _uniform(_mix(run ^ h), PHASE_COMPRESS, 0)
            if u * compress_mag >= ac:
                continue
            c = compress_mag if c > 0.0 else -compress_mag
            ac = compress_mag
        for w in range(K):
            out_keys[m, w] = src_keys[src, w]
        out_hash[m] = h
        out_coeff[m] = c
        out_meta[m, 0] = src_meta[src, 0]
        out_meta[m, 1] = src_meta[src, 1]
        out_meta[m, 2] = src_meta[src, 2]
        nw += ac
        if src_meta[src, 0] == 0:
            vac = c
        m += 1

    return (out_keys[:m].copy(), out_hash[:m].copy(), out_coeff[:m].copy(),
            out_meta[:m].copy(), nw, vac, FLAG_OK, 0.0, spawned)


@njit(cache=True)
def dot_kernel(hash_a, keys_a, coeff_a, hash_b, keys_b, coeff_b):
    na = coeff_a.shape[0]
    nb = coeff_b.shape[0]
    total = 0.0
    i = 0
    j = 0
    while i < na and j < nb:
        if hash_a[i] < hash_b[j]:
            i += 1
        elif hash_a[i] > hash_b[j]:
            j += 1
        else:
            cres = _cmp_rows(keys_a, i, keys_b, j)
            if cres < 0:
                i += 1
            elif cres > 0:
                j += 1
            else:
                total += coeff_a[i] * coeff_b[j]
                i += 1
                j += 1
    return total


@njit(cache=True)
def axpy_kernel(hash_a, keys_a, coeff_a, meta_a,
                beta, hash_b, keys_b, coeff_b, meta_b):
    """Merged a + beta*b over sorted vectors; exact zeros are dropped."""
    na = coeff_a.shape[0]
    nb = coeff_b.shape[0]
    K = keys_a.shape[1]
    out_keys = np.empty((na + nb, K), dtype=np.uint64)
    out_hash = np.empty(na + nb, dtype=np.uint64)
    out_coeff = np.empty(na + nb, dtype=np.float64)
    out_meta = np.empty((na + nb, 3), dtype=np.int32)
    i = 0
    j = 0
    m = 0
    while i < na or j < nb:
        if i >= na:
            take = 1
        elif j >= nb:
            take = -1
        elif hash_a[i] < hash_b[j]:
            take = -1
        elif hash_a[i] > hash_b[j]:
            take = 1
        else:
            take = _cmp_rows(keys_a, i, keys_b, j)
        if take < 0:
            c = coeff_a[i]
            src_keys, src_meta, src, h = keys_a, meta_a, i, hash_a[i]
            i += 1
        elif take > 0:
            c = beta * coeff_b[j]
            src_keys, src_meta, src, h = keys_b, meta_b, j, hash_b[j]
            j += 1
        else:
            c = coeff_a[i] + beta * coeff_b[j]
            src_keys, src_meta, src, h = keys_a, meta_a, i, hash_a[i]
            i += 1
            j += 1
        if c == 0.0:
            continue
        for w in range(K):
            out_keys[m, w] = src_keys[src, w]
        out_hash[m] = h
        out_coeff[m] = c
        out_meta[m, 0] = src_meta[src, 0]
        out_meta[m, 1] = src_meta[src, 1]
        out_meta[m, 2] = src_meta[src, 2]
        m += 1
    return (out_keys[:m].copy(), out_hash[:m].copy(), out_coeff[:m].copy(),
            out_meta[:m].copy())


@njit(cache=True)
def overlap_density_kernel(hash_a, keys_a, coeff_a, hash_b, keys_b, coeff_b,
                           num_modes, storage_index):
    """Replica-product sums: overlap, vacuum product, per-mode n_k sums.

    storage_index maps packed byte positions to ascending-momentum mode
    indices, so the density comes out in grid order.
    """
    na = coeff_a.shape[0]
    nb = coeff_b.shape[0]
    den = 0.0
    vac = 0.0
    sums = np.zeros(num_modes, dtype=np.float64)
    i = 0
    j = 0
    while i < na and j < nb:
        if hash_a[i] < hash_b[j]:
            i += 1
        elif hash_a[i] > hash_b[j]:
            j += 1
        else:
            cres = _cmp_rows(keys_a, i, keys_b, j)
            if cres < 0:
                i += 1
            elif cres > 0:
                j += 1
            else:
                w = coeff_a[i] * coeff_b[j]
                den += w
                occupied = False
                for pos in range(num_modes):
                    b = _get_byte(keys_a, i, pos)
                    if b > 0:
                        sums[storage_index[pos]] += b * w
                        occupied = True
                if not occupied:
                    vac = w
                i += 1
                j += 1
    return den, vac, sums
