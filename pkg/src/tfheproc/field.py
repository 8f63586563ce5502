"""Exact arithmetic modulo the Solinas prime q = 2^64 - 2^32 + 1.

The prime's limb structure (2^64 ≡ 2^32 - 1 and 2^96 ≡ -1 mod q) allows a
128-bit product to be reduced with 32-bit segment splits, shifts and
additions only -- no division.  Everything in this package is built on the
residue arithmetic defined here.

All functions take and return canonical residues: plain Python ints in
[0, q).  They are pure and safe to call concurrently.  Bulk (array)
variants of the same arithmetic live in ``_kernels``; their agreement with
this module is covered by tests.
"""

from __future__ import annotations

# q = 2^64 - 2^32 + 1; the multiplicative group has order
# q - 1 = 2^32 * 3 * 5 * 17 * 257 * 65537.
MODULUS = (1 << 64) - (1 << 32) + 1
Q = MODULUS

#: Fixed generator of the multiplicative group, verified at import time.
GENERATOR = 7

#: Prime factors of q - 1, used to verify the generator.
_GROUP_ORDER_PRIME_FACTORS = (2, 3, 5, 17, 257, 65537)

_MASK32 = 0xFFFFFFFF
_MASK16 = 0xFFFF


def fe_add(x: int, y: int) -> int:
    """(x + y) mod q via a single conditional subtraction (simple reduction)."""
    r = x + y
    if r >= Q:
        r -= Q
    return r


def fe_sub(x: int, y: int) -> int:
    """(x - y) mod q via a single conditional addition (simple reduction)."""
    r = x - y
    if r < 0:
        r += Q
    return r


def fe_neg(x: int) -> int:
    """Additive inverse; 0 maps to 0, otherwise q - x."""
    return Q - x if x else 0


def reduce128(v: int) -> int:
    """Reduce a 128-bit value v to its canonical residue mod q.

    Splits v into 32-bit segments a, b, c, d (most to least significant):

        v = a*2^96 + b*2^64 + c*2^32 + d
          = (b + c)*2^32 + (d - a - b)      (mod q)

    using 2^96 ≡ -1 and 2^64 ≡ 2^32 - 1.  The combination is at most
    ~2^65 < 3q, and at least -(2^33) > -q, so landing in [0, q) needs one
    conditional addition or at most two conditional subtractions.  Both
    branches are written out explicitly.
    """
    if v >> 128:
        raise ValueError("reduce128 input exceeds 128 bits")
    d = v & _MASK32
    c = (v >> 32) & _MASK32
    b = (v >> 64) & _MASK32
    a = v >> 96
    r = ((b + c) << 32) + d - a - b
    if r < 0:
        r += Q
    else:
        if r >= Q:
            r -= Q
        if r >= Q:
            r -= Q
    return r


def fe_mul(x: int, y: int) -> int:
    """(x * y) mod q: exact 128-bit product followed by reduce128."""
    return reduce128(x * y)


def _karatsuba32(x: int, y: int) -> int:
    """Exact 64-bit-ish product of two values < 2^33 from three 16/17-bit products."""
    x1, x0 = x >> 16, x & _MASK16
    y1, y0 = y >> 16, y & _MASK16
    z2 = x1 * y1
    z0 = x0 * y0
    z1 = (x1 + x0) * (y1 + y0) - z2 - z0
    return (z2 << 32) + (z1 << 16) + z0


def karatsuba_mul(x: int, y: int) -> int:
    """Exact 128-bit product x*y using two Karatsuba levels.

    Each level replaces four half-width multiplications with three; the
    recursion depth is fixed at two, so the base multiplications operate on
    16/17-bit halves.  Must equal the direct product for all inputs; the
    rest of the library is free to use either path.
    """
    x1, x0 = x >> 32, x & _MASK32
    y1, y0 = y >> 32, y & _MASK32
    z2 = _karatsuba32(x1, y1)
    z0 = _karatsuba32(x0, y0)
    z1 = _karatsuba32(x1 + x0, y1 + y0) - z2 - z0
    return (z2 << 64) + (z1 << 32) + z0


def fe_pow(x: int, e: int) -> int:
    """x^e mod q by square-and-multiply; e must be non-negative."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    result = 1
    base = x % Q
    while e:
        if e & 1:
            result = fe_mul(result, base)
        base = fe_mul(base, base)
        e >>= 1
    return result


def fe_inv(x: int) -> int:
    """Multiplicative inverse via Fermat: x^(q-2) mod q."""
    if x == 0:
        raise ZeroDivisionError("non-invertible zero")
    return fe_pow(x, Q - 2)


def _verify_generator(g: int) -> None:
    # g generates the full group iff g^((q-1)/f) != 1 for every prime factor f.
    order = Q - 1
    for f in _GROUP_ORDER_PRIME_FACTORS:
        if fe_pow(g, order // f) == 1:
            raise AssertionError(f"{g} is not a generator of Z_q^* (fails factor {f})")


_verify_generator(GENERATOR)


def primitive_root_2n(n: int) -> int:
    """Return psi, a primitive 2N-th root of unity: psi^N = -1, psi^(2N) = 1.

    Derived deterministically as GENERATOR^((q-1)/2N).  Requires N a power
    of two with 2N | q - 1, which holds for all N <= 2^31.
    """
    if n <= 0 or n & (n - 1):
        raise ValueError("unsupported transform size: N must be a power of two")
    if (Q - 1) % (2 * n):
        raise ValueError("unsupported transform size: 2N does not divide q - 1")
    psi = fe_pow(GENERATOR, (Q - 1) // (2 * n))
    # psi^N = -1 is the defining property; cheap, so always check.
    if fe_pow(psi, n) != Q - 1:
        raise AssertionError("derived root fails psi^N = -1")
    return psi
