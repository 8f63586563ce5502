"""Compiled bulk arithmetic for the Solinas prime q = 2^64 - 2^32 + 1.

This module carries the hot loops (butterfly stages, gadget decomposition,
negacyclic rotation, multiply-accumulate pipelines) as numba kernels over
uint64 arrays.  The arithmetic is the same segment-split reduction as
``field``; the two are cross-checked by tests.

Wraparound notes, used throughout: with eps = 2^32 - 1 we have
2^64 = q + eps, so a uint64 addition that wraps is fixed by adding eps and
a subtraction that borrows is fixed by subtracting eps.  All helpers keep
values in canonical range [0, q).
"""

import numpy as np
from numba import njit, uint64, vectorize

Q = np.uint64((1 << 64) - (1 << 32) + 1)
EPS = np.uint64((1 << 32) - 1)  # 2^64 - q
_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)


@njit
def _add(x, y):
    s = x + y
    if s < x:  # wrapped past 2^64: s = x + y - (q + eps)
        s += EPS
    elif s >= Q:
        s -= Q
    return s


@njit
def _sub(x, y):
    d = x - y
    if x < y:  # borrowed: d = x - y + q + eps
        d -= EPS
    return d


@njit
def _neg(x):
    if x == _ZERO:
        return _ZERO
    return Q - x


@njit
def _mul(x, y):
    # 64x64 -> 128 via four 32-bit partial products, then segment reduction.
    xl = x & _M32
    xh = x >> _S32
    yl = y & _M32
    yh = y >> _S32
    ll = xl * yl
    lh = xl * yh
    hl = xh * yl
    hh = xh * yh
    cross = (ll >> _S32) + (lh & _M32) + (hl & _M32)
    lo = (ll & _M32) | ((cross & _M32) << _S32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (cross >> _S32)
    # reduce (hi, lo): result = lo - hi_hi + hi_lo*(2^32 - 1)  (mod q)
    hi_hi = hi >> _S32
    hi_lo = hi & _M32
    t0 = lo - hi_hi
    if lo < hi_hi:
        t0 -= EPS
    t1 = hi_lo * EPS
    t2 = t0 + t1
    if t2 < t1:
        t2 += EPS
    if t2 >= Q:
        t2 -= Q
    return t2


@vectorize(["uint64(uint64, uint64)"], cache=True)
def add_mod(x, y):
    return _add(x, y)


@vectorize(["uint64(uint64, uint64)"], cache=True)
def sub_mod(x, y):
    return _sub(x, y)


@vectorize(["uint64(uint64, uint64)"], cache=True)
def mul_mod(x, y):
    return _mul(x, y)


@vectorize(["uint64(uint64)"], cache=True)
def neg_mod(x):
    return _neg(x)


@njit(cache=True)
def ntt_forward_batch(a, psi_brv):
    """In-place forward negacyclic NTT of every row of a: (B, N) uint64.

    Cooley-Tukey butterflies, natural-order input, bit-reversed output.
    psi_brv[j] = psi^bitrev(j) so each stage reads its twiddles
    contiguously.
    """
    rows, n = a.shape
    for b in range(rows):
        t = n
        m = 1
        while m < n:
            t //= 2
            for i in range(m):
                j1 = 2 * i * t
                s = psi_brv[m + i]
                for j in range(j1, j1 + t):
                    u = a[b, j]
                    v = _mul(a[b, j + t], s)
                    a[b, j] = _add(u, v)
                    a[b, j + t] = _sub(u, v)
            m *= 2


@njit(cache=True)
def ntt_inverse_batch(a, psi_inv_brv, scale):
    """In-place inverse NTT of every row: bit-reversed input, natural output.

    Gentleman-Sande butterflies with inverted twiddles.  ``scale`` is the
    final per-coefficient factor, normally N^-1; pass 1 to skip it (used
    when the scale was folded into the other operand beforehand).
    """
    rows, n = a.shape
    for b in range(rows):
        t = 1
        m = n
        while m > 1:
            j1 = 0
            h = m // 2
            for i in range(h):
                s = psi_inv_brv[h + i]
                for j in range(j1, j1 + t):
                    u = a[b, j]
                    v = a[b, j + t]
                    a[b, j] = _add(u, v)
                    a[b, j + t] = _mul(_sub(u, v), s)
                j1 += 2 * t
            t *= 2
            m = h
        if scale != _ONE:
            for j in range(n):
                a[b, j] = _mul(a[b, j], scale)


@njit(cache=True)
def gadget_decompose_batch(x, beta, ell, s_ell, out):
    """Signed base-beta decomposition of canonical residues x: (M,).

    Rounds x to the nearest multiple of s_ell = round(q/beta^ell) (ties
    toward the floor), then emits ``ell`` balanced digits, carry-propagated
    so every centered digit lies in [-beta/2, beta/2).  out: (M, ell) holds
    the digits as canonical residues, column 0 most significant (the digit
    that multiplies round(q/beta^1)).
    """
    m_count = x.shape[0]
    half = beta >> _ONE
    for m in range(m_count):
        u = x[m] // s_ell
        r = x[m] - u * s_ell
        if r > s_ell - r:
            u += _ONE
        carry = _ZERO
        for j in range(ell - 1, -1, -1):
            d = (u % beta) + carry
            u //= beta
            if d >= half:
                t = beta - d  # in [0, half]
                if t == _ZERO:
                    out[m, j] = _ZERO
                else:
                    out[m, j] = Q - t
                carry = _ONE
            else:
                out[m, j] = d
                carry = _ZERO


@njit(cache=True)
def rotate_negacyclic_batch(src, t, out):
    """out = src * X^t mod (X^N + 1), per row; t in [0, 2N).

    Coefficients that wrap past degree N flip sign (negation is q - g,
    with 0 fixed).
    """
    rows, n = src.shape
    flip = False
    tt = t
    if tt >= n:
        tt -= n
        flip = not flip
    for c in range(rows):
        for j in range(n):
            if j < tt:
                v = src[c, n + j - tt]
                wrap = not flip
            else:
                v = src[c, j - tt]
                wrap = flip
            if wrap:
                v = _neg(v)
            out[c, j] = v


@njit(cache=True)
def ext_mul_accumulate(digits, rows, out):
    """out[c] += sum_d digits[d] * rows[d, c], element-wise in Z_q.

    digits: (D, N), rows: (D, C, N), out: (C, N); all NTT-domain.
    """
    d_count, n = digits.shape
    c_count = rows.shape[1]
    for d in range(d_count):
        for c in range(c_count):
            for j in range(n):
                out[c, j] = _add(out[c, j], _mul(digits[d, j], rows[d, c, j]))


@njit(cache=True)
def ks_accumulate(digits, ksk, out):
    """out += sum_{m,l} digits[m, l] * ksk[m, l, :], element-wise in Z_q.

    digits: (M, L) canonical residues, ksk: (M, L, W), out: (W,).
    """
    m_count, l_count = digits.shape
    w_count = ksk.shape[2]
    for m in range(m_count):
        for l in range(l_count):
            d = digits[m, l]
            if d == _ZERO:
                continue
            for w in range(w_count):
                out[w] = _add(out[w], _mul(d, ksk[m, l, w]))


@njit(cache=True)
def dot_mod(a, b):
    """<a, b> mod q for equal-length uint64 vectors."""
    acc = _ZERO
    for i in range(a.shape[0]):
        acc = _add(acc, _mul(a[i], b[i]))
    return acc
