"""Pure-numpy / pure-Python fallback kernels.

Mirrors the numba kernel signatures.  For moduli small enough that int64
accumulation cannot overflow the hot paths use vectorized numpy; otherwise
the code drops to exact Python-integer arithmetic (object arrays), which is
slow but correct for any modulus.
"""

import numpy as np


def _int64_safe(q, terms):
    # terms accumulated products of residues < q must stay below 2**63
    return terms * (q - 1) * (q - 1) < (1 << 63)


def _out_dtype(q):
    # residues themselves must fit int64, else exact Python ints
    return np.int64 if q < (1 << 62) else object


def _pairs(sa, sb):
    bn = max(sa, sb)
    return bn, (sa > 1), (sb > 1)


def matmul_batch(a, b, q):
    k = a.shape[2]
    if _int64_safe(q, k):
        return np.matmul(a, b) % q
    bn, stepa, stepb = _pairs(a.shape[0], b.shape[0])
    m, n = a.shape[1], b.shape[2]
    out = np.empty((bn, m, n), dtype=_out_dtype(q))
    for idx in range(bn):
        aa = a[idx if stepa else 0].tolist()
        bb = b[idx if stepb else 0].tolist()
        for i in range(m):
            row = aa[i]
            for j in range(n):
                acc = 0
                for t in range(k):
                    acc = (acc + row[t] * bb[t][j]) % q
                out[idx, i, j] = acc
    return out


def glat_batch(m1, m2, m3, t, q):
    d1, d2, d3 = m1.shape[1], m2.shape[1], m3.shape[1]
    bn = max(m1.shape[0], t.shape[0])
    if m1.shape[0] != bn:
        m1 = np.broadcast_to(m1, (bn,) + m1.shape[1:])
        m2 = np.broadcast_to(m2, (bn,) + m2.shape[1:])
        m3 = np.broadcast_to(m3, (bn,) + m3.shape[1:])
    if t.shape[0] != bn:
        t = np.broadcast_to(t, (bn,) + t.shape[1:])
    if _int64_safe(q, max(d1, d2, d3)):
        w = np.einsum("bil,bljk->bijk", m1, t) % q
        w = np.einsum("bjl,bilk->bijk", m2, w) % q
        return np.einsum("bkl,bijl->bijk", m3, w) % q
    # exact object-dtype path
    w = np.einsum("bil,bljk->bijk", m1.astype(object), t.astype(object)) % q
    w = np.einsum("bjl,bilk->bijk", m2.astype(object), w) % q
    w = np.einsum("bkl,bijl->bijk", m3.astype(object), w) % q
    return w.astype(np.int64) if q < (1 << 62) else w


def _inv_single(rows, n, q):
    w = [list(rows[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if w[r][col] % q != 0), None)
        if piv is None:
            return None
        w[col], w[piv] = w[piv], w[col]
        pinv = pow(w[col][col] % q, -1, q)
        w[col] = [(x * pinv) % q for x in w[col]]
        for r in range(n):
            if r != col and w[r][col] % q != 0:
                f = w[r][col] % q
                w[r] = [(x - f * y) % q for x, y in zip(w[r], w[col])]
    return [row[n:] for row in w]


def inv_batch(a, q):
    bn, n = a.shape[0], a.shape[1]
    out = np.zeros((bn, n, n), dtype=_out_dtype(q))
    ok = np.zeros(bn, dtype=np.uint8)
    for idx in range(bn):
        res = _inv_single(a[idx].tolist(), n, q)
        if res is not None:
            out[idx] = res
            ok[idx] = 1
    return out, ok


def _echelon(rows, q, reduce_full):
    m = len(rows)
    n = len(rows[0]) if m else 0
    w = [list(r) for r in rows]
    row = 0
    for col in range(n):
        if row >= m:
            break
        piv = next((r for r in range(row, m) if w[r][col] % q != 0), None)
        if piv is None:
            continue
        w[row], w[piv] = w[piv], w[row]
        pinv = pow(w[row][col] % q, -1, q)
        w[row] = [(x * pinv) % q for x in w[row]]
        targets = range(m) if reduce_full else range(row + 1, m)
        for r in targets:
            if r != row and w[r][col] % q != 0:
                f = w[r][col] % q
                w[r] = [(x - f * y) % q for x, y in zip(w[r], w[row])]
        row += 1
    return w, row


def rank_batch(a, q):
    out = np.empty(a.shape[0], dtype=np.int64)
    for idx in range(a.shape[0]):
        _, rank = _echelon(a[idx].tolist(), q, reduce_full=False)
        out[idx] = rank
    return out


def fullrank_batch(a, q):
    n = a.shape[1]
    return (rank_batch(a, q) == n).astype(np.uint8)


def rref_single(a, q):
    w, rank = _echelon(a.tolist(), q, reduce_full=True)
    return np.array(w, dtype=_out_dtype(q)), rank


def det_batch(a, q):
    bn, n = a.shape[0], a.shape[1]
    out = np.empty(bn, dtype=_out_dtype(q))
    for idx in range(bn):
        w = [list(r) for r in a[idx].tolist()]
        det = 1
        for col in range(n):
            piv = next((r for r in range(col, n) if w[r][col] % q != 0), None)
            if piv is None:
                det = 0
                break
            if piv != col:
                w[col], w[piv] = w[piv], w[col]
                det = (-det) % q
            det = (det * w[col][col]) % q
            pinv = pow(w[col][col] % q, -1, q)
            for r in range(col + 1, n):
                if w[r][col] % q != 0:
                    f = (w[r][col] * pinv) % q
                    w[r] = [(x - f * y) % q for x, y in zip(w[r], w[col])]
        out[idx] = det % q
    return out
