"""Numba-compiled finite-field array kernels.

All kernels take C-contiguous int64 arrays of residues reduced mod q and
return freshly allocated int64 arrays.  q must be below 2**62; products are
formed through a width-aware mulmod so no intermediate ever overflows.

Batch conventions: the leading axis is the batch.  Where two batched operands
are combined, either may have batch size 1 and is then broadcast.
"""

import numba as nb
import numpy as np

# Largest q whose products fit directly in int64 (floor(sqrt(2**63 - 1))).
_DIRECT_Q = 3037000499
_M61 = (1 << 61) - 1

U64 = np.uint64


@nb.njit(nb.int64(nb.int64, nb.int64, nb.int64), cache=True, inline="always")
def mulmod(a, b, q):
    if q <= _DIRECT_Q:
        return (a * b) % q
    # 64x64 -> 128 bit product via 32-bit limbs.
    au = U64(a)
    bu = U64(b)
    mask = U64(0xFFFFFFFF)
    a0 = au & mask
    a1 = au >> U64(32)
    b0 = bu & mask
    b1 = bu >> U64(32)
    p00 = a0 * b0
    mid = a0 * b1 + (p00 >> U64(32))
    mid2 = a1 * b0 + (mid & mask)
    hi = a1 * b1 + (mid >> U64(32)) + (mid2 >> U64(32))
    lo = (mid2 << U64(32)) | (p00 & mask)
    if q == _M61:
        # 2**64 = 8 (mod 2**61 - 1): fold high word in twice.
        m = U64(_M61)
        r = (hi << U64(3)) + (lo >> U64(61)) + (lo & m)
        r = (r >> U64(61)) + (r & m)
        if r >= m:
            r -= m
        return np.int64(r)
    # Generic 128-by-64 reduction: shift lo in bit by bit.  r < q < 2**62 so
    # the doubling never overflows uint64.
    qu = U64(q)
    r = hi % qu
    for i in range(64):
        r = (r << U64(1)) | ((lo >> U64(63 - i)) & U64(1))
        if r >= qu:
            r -= qu
    return np.int64(r)


@nb.njit(nb.int64(nb.int64, nb.int64, nb.int64), cache=True, inline="always")
def powmod(a, e, q):
    r = np.int64(1)
    base = a % q
    while e > 0:
        if e & 1:
            r = mulmod(r, base, q)
        base = mulmod(base, base, q)
        e >>= 1
    return r


@nb.njit(nb.int64(nb.int64, nb.int64), cache=True, inline="always")
def invmod(a, q):
    # q prime, a nonzero mod q.
    return powmod(a % q, q - 2, q)


@nb.njit(cache=True, parallel=True)
def matmul_batch(a, b, q):
    bn = max(a.shape[0], b.shape[0])
    m = a.shape[1]
    k = a.shape[2]
    n = b.shape[2]
    sa = 1 if a.shape[0] > 1 else 0
    sb = 1 if b.shape[0] > 1 else 0
    out = np.empty((bn, m, n), dtype=np.int64)
    for idx in nb.prange(bn):
        ia = idx * sa
        ib = idx * sb
        for i in range(m):
            for j in range(n):
                acc = np.int64(0)
                for t in range(k):
                    acc += mulmod(a[ia, i, t], b[ib, t, j], q)
                    if acc >= q:
                        acc -= q
                out[idx, i, j] = acc
    return out


@nb.njit(cache=True, parallel=True)
def glat_batch(m1, m2, m3, t, q):
    bn = max(m1.shape[0], t.shape[0])
    d1 = m1.shape[1]
    d2 = m2.shape[1]
    d3 = m3.shape[1]
    sm = 1 if m1.shape[0] > 1 else 0
    st = 1 if t.shape[0] > 1 else 0
    out = np.empty((bn, d1, d2, d3), dtype=np.int64)
    for idx in nb.prange(bn):
        im = idx * sm
        it = idx * st
        # mode-1 product
        w1 = np.empty((d1, d2, d3), dtype=np.int64)
        for i in range(d1):
            for j in range(d2):
                for k in range(d3):
                    acc = np.int64(0)
                    for l in range(d1):
                        acc += mulmod(m1[im, i, l], t[it, l, j, k], q)
                        if acc >= q:
                            acc -= q
                    w1[i, j, k] = acc
        # mode-2 product
        w2 = np.empty((d1, d2, d3), dtype=np.int64)
        for i in range(d1):
            for j in range(d2):
                for k in range(d3):
                    acc = np.int64(0)
                    for l in range(d2):
                        acc += mulmod(m2[im, j, l], w1[i, l, k], q)
                        if acc >= q:
                            acc -= q
                    w2[i, j, k] = acc
        # mode-3 product
        for i in range(d1):
            for j in range(d2):
                for k in range(d3):
                    acc = np.int64(0)
                    for l in range(d3):
                        acc += mulmod(m3[im, k, l], w2[i, j, l], q)
                        if acc >= q:
                            acc -= q
                    out[idx, i, j, k] = acc
    return out


@nb.njit(cache=True, parallel=True)
def inv_batch(a, q):
    bn = a.shape[0]
    n = a.shape[1]
    out = np.empty((bn, n, n), dtype=np.int64)
    ok = np.empty(bn, dtype=np.uint8)
    for idx in nb.prange(bn):
        # Gauss-Jordan on [A | I].
        w = np.empty((n, 2 * n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                w[i, j] = a[idx, i, j]
                w[i, n + j] = np.int64(1) if i == j else np.int64(0)
        good = True
        for col in range(n):
            piv = -1
            for r in range(col, n):
                if w[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                good = False
                break
            if piv != col:
                for j in range(2 * n):
                    tmp = w[col, j]
                    w[col, j] = w[piv, j]
                    w[piv, j] = tmp
            pinv = invmod(w[col, col], q)
            for j in range(2 * n):
                w[col, j] = mulmod(w[col, j], pinv, q)
            for r in range(n):
                if r != col and w[r, col] != 0:
                    f = w[r, col]
                    for j in range(2 * n):
                        v = w[r, j] - mulmod(f, w[col, j], q)
                        if v < 0:
                            v += q
                        w[r, j] = v
        ok[idx] = np.uint8(1) if good else np.uint8(0)
        for i in range(n):
            for j in range(n):
                out[idx, i, j] = w[i, n + j] if good else np.int64(0)
    return out, ok


@nb.njit(cache=True, parallel=True)
def fullrank_batch(a, q):
    bn = a.shape[0]
    n = a.shape[1]
    out = np.empty(bn, dtype=np.uint8)
    for idx in nb.prange(bn):
        w = a[idx].copy()
        good = True
        for col in range(n):
            piv = -1
            for r in range(col, n):
                if w[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                good = False
                break
            if piv != col:
                for j in range(col, n):
                    tmp = w[col, j]
                    w[col, j] = w[piv, j]
                    w[piv, j] = tmp
            pinv = invmod(w[col, col], q)
            for r in range(col + 1, n):
                if w[r, col] != 0:
                    f = mulmod(w[r, col], pinv, q)
                    for j in range(col, n):
                        v = w[r, j] - mulmod(f, w[col, j], q)
                        if v < 0:
                            v += q
                        w[r, j] = v
        out[idx] = np.uint8(1) if good else np.uint8(0)
    return out


@nb.njit(cache=True)
def rank_batch(a, q):
    bn = a.shape[0]
    m = a.shape[1]
    n = a.shape[2]
    out = np.empty(bn, dtype=np.int64)
    for idx in range(bn):
        w = a[idx].copy()
        rank = 0
        row = 0
        for col in range(n):
            if row >= m:
                break
            piv = -1
            for r in range(row, m):
                if w[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != row:
                for j in range(n):
                    tmp = w[row, j]
                    w[row, j] = w[piv, j]
                    w[piv, j] = tmp
            pinv = invmod(w[row, col], q)
            for j in range(col, n):
                w[row, j] = mulmod(w[row, j], pinv, q)
            for r in range(m):
                if r != row and w[r, col] != 0:
                    f = w[r, col]
                    for j in range(col, n):
                        v = w[r, j] - mulmod(f, w[row, j], q)
                        if v < 0:
                            v += q
                        w[r, j] = v
            rank += 1
            row += 1
        out[idx] = rank
    return out


@nb.njit(cache=True)
def rref_single(a, q):
    m = a.shape[0]
    n = a.shape[1]
    w = a.copy()
    row = 0
    for col in range(n):
        if row >= m:
            break
        piv = -1
        for r in range(row, m):
            if w[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != row:
            for j in range(n):
                tmp = w[row, j]
                w[row, j] = w[piv, j]
                w[piv, j] = tmp
        pinv = invmod(w[row, col], q)
        for j in range(n):
            w[row, j] = mulmod(w[row, j], pinv, q)
        for r in range(m):
            if r != row and w[r, col] != 0:
                f = w[r, col]
                for j in range(n):
                    v = w[r, j] - mulmod(f, w[row, j], q)
                    if v < 0:
                        v += q
                    w[r, j] = v
        row += 1
    return w, row


@nb.njit(cache=True)
def det_batch(a, q):
    bn = a.shape[0]
    n = a.shape[1]
    out = np.empty(bn, dtype=np.int64)
    for idx in range(bn):
        w = a[idx].copy()
        det = np.int64(1)
        for col in range(n):
            piv = -1
            for r in range(col, n):
                if w[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                det = np.int64(0)
                break
            if piv != col:
                for j in range(n):
                    tmp = w[col, j]
                    w[col, j] = w[piv, j]
                    w[piv, j] = tmp
                det = q - det if det != 0 else det
            det = mulmod(det, w[col, col], q)
            pinv = invmod(w[col, col], q)
            for r in range(col + 1, n):
                if w[r, col] != 0:
                    f = mulmod(w[r, col], pinv, q)
                    for j in range(col, n):
                        v = w[r, j] - mulmod(f, w[col, j], q)
                        if v < 0:
                            v += q
                        w[r, j] = v
        out[idx] = det % q
    return out
