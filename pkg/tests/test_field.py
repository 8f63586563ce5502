"""Tests for scalar residue arithmetic mod q = 2^64 - 2^32 + 1."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfheproc import _kernels as kern
from tfheproc.field import (
    GENERATOR,
    Q,
    fe_add,
    fe_inv,
    fe_mul,
    fe_neg,
    fe_pow,
    fe_sub,
    karatsuba_mul,
    primitive_root_2n,
    reduce128,
)

residues = st.integers(min_value=0, max_value=Q - 1)
wide = st.integers(min_value=0, max_value=(1 << 128) - 1)


def test_add_identity_and_wrap():
    assert fe_add(0, 0) == 0
    assert fe_add(Q - 1, 1) == 0


def test_sub_basic():
    assert fe_sub(5, 5) == 0
    assert fe_sub(0, 1) == Q - 1


def test_add_sub_against_bigint_oracle():
    rng = np.random.default_rng(11)
    xs = rng.integers(0, Q, 10_000, dtype=np.uint64)
    ys = rng.integers(0, Q, 10_000, dtype=np.uint64)
    for x, y in zip(xs.tolist(), ys.tolist()):
        assert fe_add(x, y) == (x + y) % Q
        assert fe_sub(x, y) == (x - y) % Q


def test_reduce128_known_congruences():
    assert reduce128(1 << 64) == (1 << 32) - 1
    assert reduce128(1 << 96) == Q - 1


def test_reduce128_edge_set():
    for v in (0, Q, Q - 1, (1 << 64) - 1, (1 << 128) - 1, Q * Q):
        assert reduce128(v) == v % Q


def test_reduce128_random_vs_oracle():
    rng = np.random.default_rng(12)
    for _ in range(20_000):
        v = int(rng.integers(0, 1 << 63)) << 65 | int(rng.integers(0, 1 << 62))
        assert reduce128(v) == v % Q


def test_reduce128_rejects_oversized():
    with pytest.raises(ValueError):
        reduce128(1 << 128)


def test_mul_identities():
    assert fe_mul(1, 12345) == 12345
    assert fe_mul(1 << 32, 1 << 32) == (1 << 32) - 1


def test_mul_random_vs_oracle():
    rng = np.random.default_rng(13)
    xs = rng.integers(0, Q, 10_000, dtype=np.uint64)
    ys = rng.integers(0, Q, 10_000, dtype=np.uint64)
    for x, y in zip(xs.tolist(), ys.tolist()):
        assert fe_mul(x, y) == (x * y) % Q


def test_karatsuba_trivial():
    assert karatsuba_mul(0, 987654321) == 0
    x = (1 << 32) + 1
    assert karatsuba_mul(x, x) == (1 << 64) + (1 << 33) + 1


@given(residues, residues)
@settings(max_examples=500)
def test_karatsuba_equals_direct_product(x, y):
    assert karatsuba_mul(x, y) == x * y


def test_pow_edges():
    assert fe_pow(0, 0) == 1
    assert fe_pow(12345, 0) == 1
    assert fe_pow(7, Q - 1) == 1  # Fermat


def test_pow_square_consistency():
    rng = np.random.default_rng(14)
    for x in rng.integers(0, Q, 100, dtype=np.uint64).tolist():
        assert fe_pow(x, 2) == fe_mul(x, x)


def test_inv():
    assert fe_inv(1) == 1
    assert fe_inv(Q - 1) == Q - 1
    rng = np.random.default_rng(15)
    for x in rng.integers(1, Q, 50, dtype=np.uint64).tolist():
        assert fe_mul(x, fe_inv(x)) == 1
    with pytest.raises(ZeroDivisionError):
        fe_inv(0)


def test_neg():
    assert fe_neg(0) == 0
    assert fe_add(42, fe_neg(42)) == 0


@given(residues, residues, residues)
@settings(max_examples=300)
def test_ring_laws(x, y, z):
    assert fe_mul(x, y) == fe_mul(y, x)
    assert fe_mul(fe_mul(x, y), z) == fe_mul(x, fe_mul(y, z))
    assert fe_mul(x, fe_add(y, z)) == fe_add(fe_mul(x, y), fe_mul(x, z))


def test_generator_against_group_factorization():
    # q - 1 = 2^32 * 3 * 5 * 17 * 257 * 65537
    assert (1 << 32) * 3 * 5 * 17 * 257 * 65537 == Q - 1
    for f in (2, 3, 5, 17, 257, 65537):
        assert fe_pow(GENERATOR, (Q - 1) // f) != 1


def test_primitive_root_defining_property():
    assert primitive_root_2n(1) == Q - 1
    for n in (2, 8, 64, 1024, 16384):
        psi = primitive_root_2n(n)
        assert fe_pow(psi, n) == Q - 1
        assert fe_pow(psi, 2 * n) == 1


def test_primitive_root_order_exhaustive_small():
    for n in (1, 2, 4, 8, 16, 32, 64):
        psi = primitive_root_2n(n)
        acc = 1
        for k in range(1, 2 * n):
            acc = fe_mul(acc, psi)
            assert acc != 1, f"psi^{k} = 1 for N={n}"


def test_primitive_root_rejects_bad_sizes():
    with pytest.raises(ValueError):
        primitive_root_2n(3)
    with pytest.raises(ValueError):
        primitive_root_2n(0)
    with pytest.raises(ValueError):
        primitive_root_2n(1 << 32)  # 2N would not divide q - 1


def test_kernel_arithmetic_matches_scalar_reference():
    rng = np.random.default_rng(16)
    x = rng.integers(0, Q, 5_000, dtype=np.uint64)
    y = rng.integers(0, Q, 5_000, dtype=np.uint64)
    add = kern.add_mod(x, y)
    sub = kern.sub_mod(x, y)
    mul = kern.mul_mod(x, y)
    neg = kern.neg_mod(x)
    for i in range(0, 5_000, 7):
        xi, yi = int(x[i]), int(y[i])
        assert int(add[i]) == fe_add(xi, yi)
        assert int(sub[i]) == fe_sub(xi, yi)
        assert int(mul[i]) == fe_mul(xi, yi)
        assert int(neg[i]) == fe_neg(xi)


def test_kernel_addition_near_wraparound():
    # sums just below/above 2^64 exercise the wrap correction
    vals = np.array([Q - 1, Q - 2, (1 << 63), (1 << 63) + 12345], dtype=np.uint64)
    for x in vals.tolist():
        for y in vals.tolist():
            assert int(kern.add_mod(np.uint64(x), np.uint64(y))) == (x + y) % Q
            assert int(kern.sub_mod(np.uint64(x), np.uint64(y))) == (x - y) % Q
