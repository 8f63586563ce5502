"""Negacyclic number-theoretic transform over Z_q with a staged cost model.

The functional transform is exact: an N-point evaluation of the input
polynomial at the odd powers psi^(2k+1) of a 2N-th primitive root of
unity, so that pointwise products correspond to multiplication modulo
X^N + 1.  Forward transforms use Cooley-Tukey butterflies (natural-order
in, bit-reversed out); inverses use Gentleman-Sande butterflies
(bit-reversed in, natural out) with a final N^-1 scale.

Separately from the functional result, ``stage_schedule`` models the
streamed hardware decomposition of the transform: log(N/T) streamed
stages followed by one fully parallel T-point stage, processing T
coefficients per cycle, with the buffer and fill-latency accounting used
by the cost estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as kern
from .field import Q, fe_add, fe_inv, fe_mul, fe_sub, primitive_root_2n

#: Pipeline registers charged per stage in the fill-latency model.  Single
#: calibration constant; see stage_schedule.
STAGE_REGISTER_DEPTH = 2


def _is_pow2(x: int) -> bool:
    return x > 0 and not (x & (x - 1))


@dataclass(frozen=True)
class NttConfig:
    """Transform size N and sustained hardware throughput T (coeffs/cycle)."""

    n: int
    t: int

    def __post_init__(self):
        if not _is_pow2(self.n):
            raise ValueError("transform size N must be a power of two")
        if not _is_pow2(self.t) or self.t < 2:
            raise ValueError("throughput must be a power of two >= 2")
        if self.t > self.n:
            raise ValueError("throughput cannot exceed transform size")


def bitrev(x: int, bits: int) -> int:
    """Reverse the low ``bits`` bits of x."""
    r = 0
    for _ in range(bits):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@dataclass(frozen=True)
class TwiddleTable:
    """Precomputed butterfly constants for one transform size.

    forward_brv[j] = psi^bitrev(j) and inverse_brv[j] = psi^-bitrev(j), so
    forward_brv[j] * inverse_brv[j] = 1 element-wise and every butterfly
    stage reads a contiguous slice.  n_inv is the inverse-transform scale.
    """

    n: int
    psi: int
    psi_inv: int
    n_inv: int
    forward_brv: np.ndarray
    inverse_brv: np.ndarray

    def forward_stage(self, stage: int) -> np.ndarray:
        """Twiddles consumed by forward stage ``stage`` (0-based, 2^stage blocks)."""
        m = 1 << stage
        return self.forward_brv[m : 2 * m]

    def inverse_stage(self, stage: int) -> np.ndarray:
        """Twiddles consumed by inverse stage ``stage`` (0-based)."""
        h = self.n >> (stage + 1)
        return self.inverse_brv[h : 2 * h]


_TABLE_CACHE: dict[int, TwiddleTable] = {}


def twiddle_table(n: int) -> TwiddleTable:
    cached = _TABLE_CACHE.get(n)
    if cached is not None:
        return cached
    table = _build_twiddle_table(n)
    _TABLE_CACHE[n] = table
    return table


def _build_twiddle_table(n: int) -> TwiddleTable:
    psi = primitive_root_2n(n)
    psi_inv = fe_inv(psi)
    bits = n.bit_length() - 1
    fwd = np.empty(n, dtype=np.uint64)
    inv = np.empty(n, dtype=np.uint64)
    # psi^j and psi^-j for all j, then permute into bit-reversed order.
    powers = [1] * n
    inv_powers = [1] * n
    for j in range(1, n):
        powers[j] = fe_mul(powers[j - 1], psi)
        inv_powers[j] = fe_mul(inv_powers[j - 1], psi_inv)
    for j in range(n):
        fwd[j] = powers[bitrev(j, bits)]
        inv[j] = inv_powers[bitrev(j, bits)]
    fwd.setflags(write=False)
    inv.setflags(write=False)
    return TwiddleTable(
        n=n,
        psi=psi,
        psi_inv=psi_inv,
        n_inv=fe_inv(n % Q),
        forward_brv=fwd,
        inverse_brv=inv,
    )


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial in coefficient representation, normal order (index = degree)."""

    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.dtype != np.uint64 or self.coeffs.ndim != 1:
            raise ValueError("coefficients must be a 1-D uint64 array")

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class PolyNtt:
    """Polynomial in NTT representation, values in bit-reversed index order."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.dtype != np.uint64 or self.values.ndim != 1:
            raise ValueError("values must be a 1-D uint64 array")

    def __len__(self):
        return len(self.values)


def ct_butterfly(a0: int, a1: int, w: int) -> tuple[int, int]:
    """Cooley-Tukey butterfly: (a0 + w*a1, a0 - w*a1) mod q."""
    t = fe_mul(w, a1)
    return fe_add(a0, t), fe_sub(a0, t)


def gs_butterfly(a0: int, a1: int, w_inv: int) -> tuple[int, int]:
    """Gentleman-Sande butterfly: (a0 + a1, (a0 - a1)*w_inv) mod q."""
    return fe_add(a0, a1), fe_mul(fe_sub(a0, a1), w_inv)


def _forward_raw(batch: np.ndarray, table: TwiddleTable) -> None:
    """In-place forward transform of each row of ``batch``: (B, N) uint64."""
    kern.ntt_forward_batch(batch, table.forward_brv)


def _inverse_raw(batch: np.ndarray, table: TwiddleTable, scale: bool = True) -> None:
    """In-place inverse transform of each row; scale=False skips the N^-1 factor."""
    s = np.uint64(table.n_inv) if scale else np.uint64(1)
    kern.ntt_inverse_batch(batch, table.inverse_brv, s)


def forward_ntt(p: PolyCoeffs, cfg: NttConfig) -> PolyNtt:
    """Negacyclic transform: output[bitrev(k)] = sum_i p_i * psi^((2k+1)i)."""
    if len(p) != cfg.n:
        raise ValueError(f"polynomial length {len(p)} does not match N={cfg.n}")
    work = p.coeffs.reshape(1, -1).copy()
    _forward_raw(work, twiddle_table(cfg.n))
    return PolyNtt(work[0])


def inverse_ntt(v: PolyNtt, cfg: NttConfig) -> PolyCoeffs:
    """Exact inverse of forward_ntt, including the N^-1 scale."""
    if len(v) != cfg.n:
        raise ValueError(f"input length {len(v)} does not match N={cfg.n}")
    work = v.values.reshape(1, -1).copy()
    _inverse_raw(work, twiddle_table(cfg.n))
    return PolyCoeffs(work[0])


def pointwise_mul(a: PolyNtt, b: PolyNtt) -> PolyNtt:
    if len(a) != len(b):
        raise ValueError("pointwise operands differ in length")
    return PolyNtt(kern.mul_mod(a.values, b.values))


def _negacyclic_mul_raw(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a*b mod (X^N + 1) for uint64 rows of equal shape (..., N)."""
    n = a.shape[-1]
    table = twiddle_table(n)
    fa = a.reshape(-1, n).copy()
    fb = b.reshape(-1, n).copy()
    _forward_raw(fa, table)
    _forward_raw(fb, table)
    prod = kern.mul_mod(fa, fb)
    _inverse_raw(prod, table)
    return prod.reshape(a.shape)


def negacyclic_mul(a: PolyCoeffs, b: PolyCoeffs) -> PolyCoeffs:
    """Exact product modulo X^N + 1 via forward NTT, pointwise, inverse NTT."""
    if len(a) != len(b):
        raise ValueError("operands differ in length")
    return PolyCoeffs(_negacyclic_mul_raw(a.coeffs, b.coeffs))


# Slot width for the packed-integer convolution below: wide enough that a
# full column sum (N products of 64-bit values) can never spill into the
# next slot for any N <= 2^31.
_PACK_SLOT_BYTES = 20


def schoolbook_negacyclic_mul(a: PolyCoeffs, b: PolyCoeffs) -> PolyCoeffs:
    """Reference negacyclic product: direct convolution, then sign-folded.

    The double convolution c_k = sum_{i+j=k} a_i b_j is evaluated exactly
    by packing each operand's coefficients into disjoint fixed-width slots
    of one big integer and taking a single arbitrary-precision product;
    slot k of the result is exactly c_k.  The output is then
    c_i - c_{N+i} mod q.  Deliberately shares nothing with the butterfly
    path, so the two can check each other.
    """
    if len(a) != len(b):
        raise ValueError("operands differ in length")
    n = len(a)
    slot = _PACK_SLOT_BYTES
    pa = b"".join(int(c).to_bytes(slot, "little") for c in a.coeffs)
    pb = b"".join(int(c).to_bytes(slot, "little") for c in b.coeffs)
    prod = int.from_bytes(pa, "little") * int.from_bytes(pb, "little")
    raw = prod.to_bytes(2 * n * slot, "little")
    conv = [
        int.from_bytes(raw[k * slot : (k + 1) * slot], "little")
        for k in range(2 * n - 1)
    ]
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        hi = conv[n + i] if n + i < len(conv) else 0
        out[i] = (conv[i] - hi) % Q
    return PolyCoeffs(out)


@dataclass(frozen=True)
class StageModel:
    """Cycle/buffer accounting for the streamed transform datapath.

    Streamed stages are numbered 1..num_streamed_stages and are followed by
    one fully parallel T-point stage with no stream buffer.  Each stage
    holds a butterfly block of T/2 butterflies.  ``stage_start_delays``
    model when a stage can begin emitting: half of one of its output
    sub-transforms must have arrived, N/(2^(i+1)*T) cycles for stage i,
    plus STAGE_REGISTER_DEPTH pipeline registers per stage.
    """

    config: NttConfig
    butterflies_per_block: int
    stage_buffer_words: tuple[int, ...]
    stage_start_delays: tuple[int, ...]
    register_depth: int
    num_streamed_stages: int
    num_stages: int
    interval_cycles: int
    fill_cycles: int
    latency_cycles: int
    total_buffer_words: int


def stage_schedule(cfg: NttConfig) -> StageModel:
    """Stage/buffer/latency model for a streamed N-point transform at throughput T."""
    n, t = cfg.n, cfg.t
    streamed = int(math.log2(n // t))
    # Output buffer of stage i covers 3/4 of its sub-transform span; the
    # remaining quarter streams through directly.
    buffers = tuple(3 * n // (4 * (1 << i)) for i in range(streamed))
    delays = tuple(n // ((1 << (i + 1)) * t) for i in range(1, streamed + 1))
    num_stages = streamed + 1  # plus the fully parallel T-point stage
    interval = n // t
    fill = sum(delays) + num_stages * STAGE_REGISTER_DEPTH
    return StageModel(
        config=cfg,
        butterflies_per_block=t // 2,
        stage_buffer_words=buffers,
        stage_start_delays=delays,
        register_depth=STAGE_REGISTER_DEPTH,
        num_streamed_stages=streamed,
        num_stages=num_stages,
        interval_cycles=interval,
        fill_cycles=fill,
        latency_cycles=interval + fill,
        total_buffer_words=sum(buffers),
    )


def ntt_cycle_model(cfg: NttConfig, f: float) -> dict:
    """Throughput/latency figures for the streamed transform at clock f (Hz)."""
    if f <= 0:
        raise ValueError("clock frequency must be positive")
    model = stage_schedule(cfg)
    return {
        "interval_cycles": model.interval_cycles,
        "latency_cycles": model.latency_cycles,
        "ntts_per_ms": f / model.interval_cycles / 1000.0,
    }


def _corrupt_twiddles_for_testing(n: int) -> None:
    """Poison the cached twiddle table for size n.

    Negative control for the self-test: a corrupted table must make the
    transform suites fail.  Never call outside tests/self-test.
    """
    table = twiddle_table(n)
    fwd = table.forward_brv.copy()
    fwd.setflags(write=True)
    fwd[n // 2] = fe_add(int(fwd[n // 2]), 1)
    fwd.setflags(write=False)
    _TABLE_CACHE[n] = replace(table, forward_brv=fwd)


def _reset_twiddle_cache() -> None:
    _TABLE_CACHE.clear()
