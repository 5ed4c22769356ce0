"""Jitted inner loops.

Random draws inside these kernels come from the same keyed splitmix64 hash
as :meth:`RngStream.bits`, indexed by an explicit counter, so results are
bit-reproducible and independent of thread scheduling.
"""

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LOW32 = np.uint64(0xFFFFFFFF)


@njit(inline="always")
def _mix(x):
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


@njit(inline="always")
def _hash(key, counter):
    return _mix(key + np.uint64(counter) * _GAMMA)


@njit(inline="always")
def _bounded(word, r, key, salt):
    """Lemire's unbiased draw in [0, r) from a 32-bit word; rejection re-hashes."""
    m = word * np.uint64(r)
    low = m & _LOW32
    if low < np.uint64(r):
        t = (np.uint64(1 << 32) - np.uint64(r)) % np.uint64(r)
        k = np.uint64(0)
        while low < t:
            word = _hash(key ^ np.uint64(0xD1B54A32D192ED03), salt * np.uint64(64) + k) & _LOW32
            m = word * np.uint64(r)
            low = m & _LOW32
            k += np.uint64(1)
    return np.int64(m >> np.uint64(32))


@njit(inline="always")
def _shuffle(perm, key, base):
    """In-place Fisher-Yates shuffle; two bounded draws per 64-bit hash."""
    n = perm.shape[0]
    c = np.uint64(base)
    i = n - 1
    while i > 0:
        h = _hash(key, c)
        j = _bounded(h >> np.uint64(32), i + 1, key, c)
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
        i -= 1
        if i > 0:
            j = _bounded(h & _LOW32, i + 1, key, c + np.uint64(1) * np.uint64(1 << 40))
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
            i -= 1
        c += np.uint64(1)


@njit(nogil=True, cache=True)
def random_permutations(n, count, key):
    """``count`` independent uniform permutations of ``range(n)``."""
    out = np.empty((count, n), dtype=np.int64)
    perm = np.arange(n)
    stride = (n + 1) // 2
    for m in range(count):
        perm[:] = np.arange(n)
        _shuffle(perm, key, np.uint64(m) * np.uint64(stride))
        out[m] = perm
    return out


@njit(nogil=True, cache=True)
def assignment_energies(xi, count, key):
    """Energies of ``count`` uniform assignments; same draws as ``random_permutations``."""
    n = xi.shape[0]
    out = np.empty(count)
    perm = np.arange(n)
    stride = (n + 1) // 2
    scale = 1.0 / np.sqrt(n)
    for m in range(count):
        for i in range(n):
            perm[i] = i
        _shuffle(perm, key, np.uint64(m) * np.uint64(stride))
        s = 0.0
        for i in range(n):
            s += xi[i, perm[i]]
        out[m] = s * scale
    return out


@njit(nogil=True, cache=True)
def prufer_decode_batch(seqs, n):
    """Decode Prüfer sequences (rows, values in 0..n-1) into edge arrays (u < v)."""
    count = seqs.shape[0]
    edges = np.empty((count, n - 1, 2), dtype=np.int64)
    degree = np.empty(n, dtype=np.int64)
    for t in range(count):
        seq = seqs[t]
        for v in range(n):
            degree[v] = 1
        for i in range(n - 2):
            degree[seq[i]] += 1
        ptr = 0
        while degree[ptr] != 1:
            ptr += 1
        leaf = ptr
        for i in range(n - 2):
            v = seq[i]
            a, b = (leaf, v) if leaf < v else (v, leaf)
            edges[t, i, 0] = a
            edges[t, i, 1] = b
            degree[v] -= 1
            degree[leaf] -= 1
            if degree[v] == 1 and v < ptr:
                leaf = v
            else:
                ptr += 1
                while degree[ptr] != 1:
                    ptr += 1
                leaf = ptr
        # the last edge joins the remaining leaf and vertex n-1
        u = leaf
        a, b = (u, n - 1) if u < n - 1 else (n - 1, u)
        edges[t, n - 2, 0] = a
        edges[t, n - 2, 1] = b
    return edges
