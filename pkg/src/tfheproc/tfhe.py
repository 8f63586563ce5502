"""TFHE over Z_q with q = 2^64 - 2^32 + 1: keys, encryption, gadget
decomposition, external product, CMUX, blind rotation, programmable
bootstrapping with arbitrary lookup tables, sample extraction, key
switching, and linear ciphertext arithmetic.

Messages m in [0, p) are encoded as Delta*m with Delta = round(q/2p); this
allocates 2p torus slots and keeps every message in the lower (padding
clear) half so lookup tables survive the negacyclic wrap.  Since q is
prime, every q/beta^j and q/2p that appears is rounded to the nearest
integer; all bounds below are stated with the rounded values.  Rounding
ties in decode and modulus switching go toward +infinity.

Ciphertext containers hold uint64 arrays in canonical range [0, q) and are
treated as immutable once created; all operations are pure functions of
their inputs plus an explicit seed, so independent calls may run
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .field import Q, fe_add, fe_sub
from .ntt import _forward_raw, _inverse_raw, _negacyclic_mul_raw, twiddle_table


class PaddingOverflowError(ValueError):
    """Phase decoded into the upper (padding) half of the slot space."""


def _is_pow2(x: int) -> bool:
    return x > 0 and not (x & (x - 1))


def _round_div(num: int, den: int) -> int:
    """round(num/den) with ties toward +infinity."""
    return (2 * num + den) // (2 * den)


@dataclass(frozen=True)
class GadgetParams:
    """Geometry of one signed base-beta decomposition of depth ell."""

    log_beta: int
    ell: int

    def __post_init__(self):
        if self.log_beta < 1 or self.ell < 1:
            raise ValueError("decomposition base and depth must be positive")
        if self.ell * self.log_beta > 64:
            raise ValueError("decomposition exceeds 64 bits")

    @property
    def beta(self) -> int:
        return 1 << self.log_beta

    @property
    def scales(self) -> tuple[int, ...]:
        """round(q/beta^j) for j = 1..ell; level j digits multiply scales[j-1]."""
        return tuple(_round_div(Q, self.beta**j) for j in range(1, self.ell + 1))

    @property
    def eps(self) -> int:
        """Reconstruction error bound round(q/(2 beta^ell))."""
        return _round_div(Q, 2 * self.beta**self.ell)


@dataclass(frozen=True)
class TfheParams:
    """Scheme parameters; q is fixed to the Solinas prime of this package.

    n        LWE mask dimension
    N        RLWE polynomial degree (power of two)
    k        RLWE mask dimension
    ell      decomposition depth of the bootstrap gadget
    log_beta log2 of the bootstrap decomposition base
    p        plaintext modulus (power of two, p <= N)
    sigma    noise standard deviation as a fraction of q
    log_beta_ks / ell_ks   key-switch decomposition, default (2^4, 4)
    """

    n: int
    N: int
    k: int
    ell: int
    log_beta: int
    p: int = 16
    sigma: float = 2.0**-25
    log_beta_ks: int = 4
    ell_ks: int = 4

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("dimensions must be positive")
        if not _is_pow2(self.N):
            raise ValueError("N must be a power of two")
        if not _is_pow2(self.p) or self.p > self.N:
            raise ValueError("p must be a power of two with p <= N")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        self.gadget  # triggers depth/base validation
        self.gadget_ks

    @property
    def gadget(self) -> GadgetParams:
        return GadgetParams(self.log_beta, self.ell)

    @property
    def gadget_ks(self) -> GadgetParams:
        return GadgetParams(self.log_beta_ks, self.ell_ks)

    @property
    def beta(self) -> int:
        return 1 << self.log_beta

    @property
    def delta(self) -> int:
        """Message scale round(q/2p)."""
        return _round_div(Q, 2 * self.p)

    @property
    def e_max(self) -> int:
        """Largest tolerable error magnitude, Delta/2."""
        return self.delta // 2

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "k": self.k,
            "ell": self.ell,
            "log_beta": self.log_beta,
            "p": self.p,
            "sigma": self.sigma,
            "log_beta_ks": self.log_beta_ks,
            "ell_ks": self.ell_ks,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfheParams":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


# ---------------------------------------------------------------------------
# keys and ciphertext containers


@dataclass(frozen=True)
class LweSecretKey:
    bits: np.ndarray  # (n,) or (kN,) uint64 in {0, 1}


@dataclass(frozen=True)
class GlweSecretKey:
    polys: np.ndarray  # (k, N) uint64 in {0, 1}


@dataclass(frozen=True)
class LweCiphertext:
    mask: np.ndarray  # (n,) or (kN,) uint64
    body: int


@dataclass(frozen=True)
class GlweCiphertext:
    """k mask polynomials plus a body polynomial: data is (k+1, N), body last."""

    data: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return self.data[:-1]

    @property
    def body(self) -> np.ndarray:
        return self.data[-1]


@dataclass(frozen=True)
class GlevCiphertext:
    """ell GLWE layers; layer j encrypts the message scaled by round(q/beta^(j+1))."""

    data: np.ndarray  # (ell, k+1, N)
    gadget: GadgetParams

    def level(self, j: int) -> GlweCiphertext:
        return GlweCiphertext(self.data[j])


@dataclass(frozen=True)
class GgswCiphertext:
    """(k+1) GLev rows in coefficient domain; see generate_bootstrap_key."""

    data: np.ndarray  # (k+1, ell, k+1, N)
    gadget: GadgetParams

    def row(self, i: int) -> GlevCiphertext:
        return GlevCiphertext(self.data[i], self.gadget)


@dataclass(frozen=True)
class GgswNtt:
    """GGSW with every polynomial in NTT domain, pre-scaled by N^-1 so the
    external product's final inverse transform can skip its scale."""

    data: np.ndarray  # (k+1, ell, k+1, N)
    gadget: GadgetParams


@dataclass(frozen=True)
class BootstrapKey:
    """n NTT-domain GGSW elements; element i encrypts LWE key bit i."""

    elements: np.ndarray  # (n, k+1, ell, k+1, N)
    gadget: GadgetParams

    def __len__(self):
        return self.elements.shape[0]

    def element(self, i: int) -> GgswNtt:
        return GgswNtt(self.elements[i], self.gadget)


@dataclass(frozen=True)
class KeySwitchKey:
    """kN Lev ciphertexts under the small key; element i encrypts the
    negation of flattened RLWE key bit i (negated at generation so the key
    switch is a single accumulation)."""

    data: np.ndarray  # (kN, ell_ks, n+1); [..., :n] masks, [..., n] bodies
    gadget: GadgetParams
    negated: bool = True


@dataclass(frozen=True)
class DecompDigits:
    """Signed digits of a decomposition, stored as canonical residues.

    digits[j] multiplies round(q/beta^(j+1)); shape (ell,) for a scalar
    input or (ell, N) for a polynomial.
    """

    digits: np.ndarray
    gadget: GadgetParams

    def reconstruct(self):
        """Sum digit_j * round(q/beta^j) mod q; scalar or per-coefficient."""
        scales = self.gadget.scales
        acc = None
        for j in range(self.gadget.ell):
            term = kern.mul_mod(self.digits[j], np.uint64(scales[j]))
            acc = term if acc is None else kern.add_mod(acc, term)
        if self.digits.ndim == 1:
            return int(acc)
        return acc


# ---------------------------------------------------------------------------
# randomness


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based PRNG stream for a seed; all randomness flows through here."""
    return np.random.Generator(np.random.Philox(key=seed))


def _uniform_residues(rng, shape) -> np.ndarray:
    return rng.integers(0, Q, size=shape, dtype=np.uint64)


def _gaussian_residues(rng, sigma: float, shape) -> np.ndarray:
    """Rounded zero-centered Gaussian with standard deviation sigma*q, as residues."""
    if sigma == 0.0:
        return np.zeros(shape, dtype=np.uint64)
    raw = np.atleast_1d(
        np.rint(rng.normal(0.0, sigma * float(Q), size=shape)).astype(np.int64)
    )
    out = raw.astype(np.uint64)  # two's-complement pattern: raw + 2^64 when negative
    out[raw < 0] -= kern.EPS  # pattern - (2^64 - q) == q + raw
    return out.reshape(shape)


def keygen(params: TfheParams, seed: int) -> tuple[LweSecretKey, GlweSecretKey]:
    """Sample the LWE and RLWE secret keys, uniform over {0,1}, deterministically."""
    rng = make_rng(seed)
    sk = rng.integers(0, 2, size=params.n, dtype=np.uint64)
    glwe = rng.integers(0, 2, size=(params.k, params.N), dtype=np.uint64)
    return LweSecretKey(sk), GlweSecretKey(glwe)


def flatten_key(sk: GlweSecretKey) -> LweSecretKey:
    """Concatenate the coefficient vectors: bit iN+j = coefficient j of polynomial i."""
    return LweSecretKey(sk.polys.reshape(-1).copy())


# ---------------------------------------------------------------------------
# LWE / GLWE encryption


def lwe_encrypt(
    m_scaled: int, key: LweSecretKey, sigma: float, seed: int
) -> LweCiphertext:
    """b = <a, sk> + m_scaled + e with uniform mask and rounded-Gaussian e."""
    rng = make_rng(seed)
    return _lwe_encrypt_rng(m_scaled, key, sigma, rng)


def _lwe_encrypt_rng(m_scaled, key, sigma, rng) -> LweCiphertext:
    mask = _uniform_residues(rng, key.bits.shape[0])
    e = int(_gaussian_residues(rng, sigma, ())[()])
    body = fe_add(fe_add(int(kern.dot_mod(mask, key.bits)), int(m_scaled) % Q), e)
    return LweCiphertext(mask, body)


def lwe_decrypt(ct: LweCiphertext, key: LweSecretKey) -> int:
    """Phase b - <a, sk> mod q; decoding is a separate step (see decode)."""
    if ct.mask.shape[0] != key.bits.shape[0]:
        raise ValueError("ciphertext/key length mismatch")
    return fe_sub(ct.body, int(kern.dot_mod(ct.mask, key.bits)))


def encode(m: int, params: TfheParams) -> int:
    m = int(m)
    if not 0 <= m < params.p:
        raise ValueError(f"message must lie in [0, {params.p})")
    return (params.delta * m) % Q


def phase_to_slot(phase: int, params: TfheParams) -> int:
    """Nearest of the 2p torus slots, ties toward +infinity, in [0, 2p)."""
    # int() guards against numpy scalars, whose products would wrap at 2^64
    return _round_div(int(phase) * 2 * params.p, Q) % (2 * params.p)


def decode(phase: int, params: TfheParams) -> int:
    """Map a phase to its message in [0, p); the upper half of the slot
    space is padding and raises PaddingOverflowError."""
    slot = phase_to_slot(phase, params)
    if slot >= params.p:
        raise PaddingOverflowError(f"padding overflow: slot {slot} >= p={params.p}")
    return slot


def decode_mod_p(phase: int, params: TfheParams) -> int:
    """Slot reduced mod p, permitting upper-half slots.

    Signed linear combinations (negative scalars in MulAdd) legitimately
    land in the padding half; their value is meaningful modulo p.
    """
    return phase_to_slot(phase, params) % params.p


def glwe_encrypt(
    f_scaled: np.ndarray, key: GlweSecretKey, sigma: float, seed: int
) -> GlweCiphertext:
    """Encrypt a scaled message polynomial coefficient-wise over R_q^N."""
    rng = make_rng(seed)
    return _glwe_encrypt_rng(f_scaled, key, sigma, rng)


def _glwe_encrypt_rng(f_scaled, key, sigma, rng) -> GlweCiphertext:
    k, n = key.polys.shape
    if f_scaled.shape != (n,):
        raise ValueError("message polynomial has wrong length")
    data = np.empty((k + 1, n), dtype=np.uint64)
    data[:k] = _uniform_residues(rng, (k, n))
    prods = _negacyclic_mul_raw(data[:k], key.polys)
    body = f_scaled.astype(np.uint64)
    for i in range(k):
        body = kern.add_mod(body, prods[i])
    data[k] = kern.add_mod(body, _gaussian_residues(rng, sigma, n))
    return GlweCiphertext(data)


def glwe_trivial(f_scaled: np.ndarray, k: int) -> GlweCiphertext:
    """Noiseless zero-mask ciphertext; decrypts to f_scaled under any key."""
    n = f_scaled.shape[0]
    data = np.zeros((k + 1, n), dtype=np.uint64)
    data[k] = f_scaled
    return GlweCiphertext(data)


def glwe_decrypt(ct: GlweCiphertext, key: GlweSecretKey) -> np.ndarray:
    """Phase polynomial body - <mask, key> mod (X^N + 1)."""
    k, n = key.polys.shape
    if ct.data.shape != (k + 1, n):
        raise ValueError("ciphertext/key shape mismatch")
    prods = _negacyclic_mul_raw(ct.mask, key.polys)
    phase = ct.body.copy()
    for i in range(k):
        phase = kern.sub_mod(phase, prods[i])
    return phase


def glwe_add(a: GlweCiphertext, b: GlweCiphertext) -> GlweCiphertext:
    return GlweCiphertext(kern.add_mod(a.data, b.data))


def glwe_sub(a: GlweCiphertext, b: GlweCiphertext) -> GlweCiphertext:
    return GlweCiphertext(kern.sub_mod(a.data, b.data))


# ---------------------------------------------------------------------------
# gadget decomposition


def decompose(x, params) -> DecompDigits:
    """Signed base-beta decomposition of a scalar residue or a coefficient array.

    The value's 64-bit representative is rounded to the nearest multiple of
    round(q/beta^ell) (dropping the uncovered low bits), then split into
    ell balanced digits with carry propagation, each centered digit in
    [-beta/2, beta/2).  Digits come back as canonical residues; the
    reconstruction sum digit_j * round(q/beta^j) lands within
    round(q/(2 beta^ell)) of x in centered distance.

    ``params`` may be TfheParams (its bootstrap gadget is used) or a
    GadgetParams directly.
    """
    gadget = params.gadget if isinstance(params, TfheParams) else params
    scalar = np.isscalar(x) or getattr(x, "ndim", 0) == 0
    flat = np.atleast_1d(np.asarray(x, dtype=np.uint64)).reshape(-1)
    out = np.empty((flat.shape[0], gadget.ell), dtype=np.uint64)
    kern.gadget_decompose_batch(
        flat,
        np.uint64(gadget.beta),
        gadget.ell,
        np.uint64(gadget.scales[-1]),
        out,
    )
    if scalar:
        return DecompDigits(out[0], gadget)
    return DecompDigits(np.ascontiguousarray(out.T), gadget)


def _decompose_glwe_ntt(ct: GlweCiphertext, gadget: GadgetParams) -> np.ndarray:
    """All (k+1)*ell digit polynomials of a GLWE ciphertext, NTT-transformed.

    Returned shape (D, N) with D = (k+1)*ell, row i*ell+j holding level-j
    digits of ciphertext entry i -- matching GGSW row order.
    """
    kp1, n = ct.data.shape
    flat = ct.data.reshape(-1)
    digits = np.empty((flat.shape[0], gadget.ell), dtype=np.uint64)
    kern.gadget_decompose_batch(
        flat, np.uint64(gadget.beta), gadget.ell, np.uint64(gadget.scales[-1]), digits
    )
    # (kp1*N, ell) -> (kp1, ell, N) contiguous
    arranged = np.ascontiguousarray(
        digits.reshape(kp1, n, gadget.ell).transpose(0, 2, 1)
    ).reshape(kp1 * gadget.ell, n)
    _forward_raw(arranged, twiddle_table(n))
    return arranged


# ---------------------------------------------------------------------------
# GGSW encryption, bootstrap / key-switch key generation


def ggsw_encrypt_bit(
    bit: int, key: GlweSecretKey, params: TfheParams, seed: int
) -> GgswCiphertext:
    """GGSW of a bit: row (i, j) is a fresh zero encryption with
    bit*round(q/beta^(j+1)) added to mask polynomial i (constant term), or
    to the body for the last row.  Adding to a mask slot encrypts the
    negation of (key_i * scale), which is what the external product's
    accumulation needs to reproduce bit * phase."""
    rng = make_rng(seed)
    return _ggsw_encrypt_bit_rng(bit, key, params, rng)


def _ggsw_encrypt_bit_rng(bit, key, params, rng) -> GgswCiphertext:
    k, n = key.polys.shape
    gadget = params.gadget
    zeros = np.zeros(n, dtype=np.uint64)
    data = np.empty((k + 1, gadget.ell, k + 1, n), dtype=np.uint64)
    for i in range(k + 1):
        for j in range(gadget.ell):
            glwe = _glwe_encrypt_rng(zeros, key, params.sigma, rng)
            block = glwe.data
            if bit:
                scale = np.uint64(gadget.scales[j])
                block[i, 0] = kern.add_mod(block[i, 0], scale)
            data[i, j] = block
    return GgswCiphertext(data, gadget)


def ggsw_to_ntt(g: GgswCiphertext) -> GgswNtt:
    """Transform every polynomial forward and fold in the N^-1 inverse scale."""
    kp1, ell, _, n = g.data.shape
    table = twiddle_table(n)
    work = g.data.reshape(-1, n).copy()
    _forward_raw(work, table)
    work = kern.mul_mod(work, np.uint64(table.n_inv))
    return GgswNtt(work.reshape(g.data.shape), g.gadget)


def ggsw_ntt_to_coeff(g: GgswNtt) -> GgswCiphertext:
    """Undo ggsw_to_ntt: inverse transform without the (already folded) scale."""
    shape = g.data.shape
    n = shape[-1]
    work = g.data.reshape(-1, n).copy()
    _inverse_raw(work, twiddle_table(n), scale=False)
    return GgswCiphertext(work.reshape(shape), g.gadget)


def generate_bootstrap_key(
    sk: LweSecretKey, glwe_key: GlweSecretKey, params: TfheParams, seed: int
) -> BootstrapKey:
    """n GGSW encryptions of the LWE key bits, stored NTT-domain with the
    inverse-transform scale pre-applied."""
    k, n = glwe_key.polys.shape
    gadget = params.gadget
    elements = np.empty(
        (params.n, k + 1, gadget.ell, k + 1, n), dtype=np.uint64
    )
    children = np.random.SeedSequence(seed).spawn(params.n)
    for i in range(params.n):
        rng = np.random.Generator(np.random.Philox(children[i]))
        ggsw = _ggsw_encrypt_bit_rng(int(sk.bits[i]), glwe_key, params, rng)
        elements[i] = ggsw_to_ntt(ggsw).data
    return BootstrapKey(elements, gadget)


def generate_key_switch_key(
    sk: LweSecretKey, glwe_key: GlweSecretKey, params: TfheParams, seed: int
) -> KeySwitchKey:
    """kN Lev encryptions under sk of the negated flattened RLWE key bits."""
    gadget = params.gadget_ks
    big_bits = flatten_key(glwe_key).bits
    kn = big_bits.shape[0]
    data = np.empty((kn, gadget.ell, params.n + 1), dtype=np.uint64)
    children = np.random.SeedSequence(seed).spawn(kn)
    for i in range(kn):
        rng = np.random.Generator(np.random.Philox(children[i]))
        bit = int(big_bits[i])
        for j in range(gadget.ell):
            value = (Q - bit * gadget.scales[j]) % Q  # negated at generation
            ct = _lwe_encrypt_rng(value, sk, params.sigma, rng)
            data[i, j, : params.n] = ct.mask
            data[i, j, params.n] = ct.body
    return KeySwitchKey(data, gadget, negated=True)


# ---------------------------------------------------------------------------
# external product and CMUX


def external_product(
    ct: GlweCiphertext, g: GgswNtt, params: TfheParams
) -> GlweCiphertext:
    """Decompose every polynomial of ct, transform the digit polynomials,
    multiply element-wise against the GGSW rows, accumulate in the NTT
    domain, and inverse-transform without the N^-1 scale (folded into g)."""
    kp1, n = ct.data.shape
    if g.data.shape != (kp1, g.gadget.ell, kp1, n):
        raise ValueError("GGSW shape does not match ciphertext")
    return _external_product_raw(ct, g)


def _external_product_raw(ct: GlweCiphertext, g: GgswNtt) -> GlweCiphertext:
    kp1, n = ct.data.shape
    digits_ntt = _decompose_glwe_ntt(ct, g.gadget)
    out = np.zeros((kp1, n), dtype=np.uint64)
    kern.ext_mul_accumulate(digits_ntt, g.data.reshape(-1, kp1, n), out)
    _inverse_raw(out, twiddle_table(n), scale=False)
    return GlweCiphertext(out)


def cmux(g: GgswNtt, c0: GlweCiphertext, c1: GlweCiphertext) -> GlweCiphertext:
    """Select c0 or c1 under the GGSW-encrypted bit: c0 + (c1 - c0) boxdot g."""
    return glwe_add(c0, _external_product_raw(glwe_sub(c1, c0), g))


# ---------------------------------------------------------------------------
# rotation, modulus switch, blind rotation


def monomial_rotate(f: np.ndarray, t: int) -> np.ndarray:
    """f * X^t mod (X^N + 1) for t in [0, 2N); wrapped coefficients negate."""
    n = f.shape[-1]
    if not 0 <= t < 2 * n:
        raise ValueError(f"rotation amount {t} outside [0, {2 * n})")
    src = np.ascontiguousarray(f, dtype=np.uint64).reshape(-1, n)
    out = np.empty_like(src)
    kern.rotate_negacyclic_batch(src, t, out)
    return out.reshape(f.shape)


def modswitch_2n(x: int, n: int) -> int:
    """round(x * 2N / q) mod 2N, ties toward +infinity, exact arithmetic."""
    return _round_div(int(x) * 2 * n, Q) % (2 * n)


def blind_rotate_step(
    acc: GlweCiphertext, a_i: int, bsk_i: GgswNtt, params: TfheParams
) -> GlweCiphertext:
    """One CMUX iteration: acc <- rotate(acc boxdot bsk_i, a~) + acc - (acc boxdot bsk_i),
    where a~ is the mask element switched to the exponent group mod 2N."""
    a_tilde = modswitch_2n(a_i, params.N)
    return _blind_rotate_step_switched(acc, a_tilde, bsk_i)


def _blind_rotate_step_switched(acc, a_tilde, bsk_i) -> GlweCiphertext:
    if a_tilde == 0:
        return acc  # X^0 - 1 = 0: iteration is exactly the identity
    acc_p = _external_product_raw(acc, bsk_i)
    rotated = np.empty_like(acc_p.data)
    kern.rotate_negacyclic_batch(acc_p.data, a_tilde, rotated)
    return GlweCiphertext(
        kern.add_mod(rotated, kern.sub_mod(acc.data, acc_p.data))
    )


def blind_rotate(
    acc: GlweCiphertext, ct: LweCiphertext, bsk: BootstrapKey, params: TfheParams
) -> GlweCiphertext:
    """Rotate acc by the encrypted phase: initialize with X^-b, then one
    CMUX per mask element.  The result decrypts to F * X^(<a~, sk> - b~)."""
    if ct.mask.shape[0] != params.n or len(bsk) != params.n:
        raise ValueError("mask/bootstrap-key length mismatch")
    two_n = 2 * params.N
    b_tilde = modswitch_2n(ct.body, params.N)
    init = monomial_rotate(acc.data, (two_n - b_tilde) % two_n)
    cur = GlweCiphertext(init)
    for i, a_i in enumerate(ct.mask.tolist()):
        cur = _blind_rotate_step_switched(
            cur, modswitch_2n(a_i, params.N), bsk.element(i)
        )
    return cur


# ---------------------------------------------------------------------------
# lookup tables, sample extraction, PBS


def build_lut(table: Sequence[int], params: TfheParams) -> GlweCiphertext:
    """Trivial GLWE holding the redundant lookup polynomial.

    Delta*table[m] fills the N/p-coefficient window centered on m*N/p; the
    final half-window is the wrapped (negated) tail of window 0.  Blind
    rotation by the phase of a valid encryption of m then lands
    Delta*table[m] on coefficient 0.
    """
    if len(table) != params.p:
        raise ValueError(f"lookup table must have exactly p={params.p} entries")
    vals = np.asarray(table, dtype=np.int64)
    if vals.min() < 0 or vals.max() >= params.p:
        raise ValueError("table entries must lie in [0, p)")
    window = params.N // params.p
    body = np.repeat(
        (vals.astype(np.uint64) * np.uint64(params.delta)) % np.uint64(Q), window
    )
    rot = (2 * params.N - window // 2) % (2 * params.N)
    body = monomial_rotate(body, rot)
    return glwe_trivial(body, params.k)


def sample_extract(ct: GlweCiphertext, h: int) -> LweCiphertext:
    """LWE ciphertext (length kN, under the flattened key) of coefficient h."""
    kp1, n = ct.data.shape
    if not 0 <= h < n:
        raise ValueError(f"extract index {h} outside [0, {n})")
    k = kp1 - 1
    mask = np.empty(k * n, dtype=np.uint64)
    for i in range(k):
        row = ct.data[i]
        mask[i * n : i * n + h + 1] = row[h::-1]
        if h + 1 < n:
            mask[i * n + h + 1 : (i + 1) * n] = kern.neg_mod(row[n - 1 : h : -1])
    return LweCiphertext(mask, int(ct.data[k, h]))


def pbs(
    ct: LweCiphertext,
    lut: GlweCiphertext,
    bsk: BootstrapKey,
    params: TfheParams,
    h: int = 0,
) -> LweCiphertext:
    """Programmable bootstrap: blind-rotate the lookup accumulator by the
    encrypted phase and sample-extract coefficient h (variable per call).
    Output noise is fresh -- independent of the input noise magnitude for
    any in-bound input."""
    return sample_extract(blind_rotate(lut, ct, bsk, params), h)


# ---------------------------------------------------------------------------
# key switch


def key_switch(
    ct: LweCiphertext, ksk: KeySwitchKey, params: TfheParams
) -> LweCiphertext:
    """Switch a length-kN ciphertext back under the small LWE key.

    With the key negated at generation this is one large accumulation
    (0, ..., 0, b) + sum digits * KSK -- no sign switching mid-stream.
    """
    kn = ksk.data.shape[0]
    if ct.mask.shape[0] != kn:
        raise ValueError("ciphertext length does not match key-switch key")
    gadget = ksk.gadget
    digits = np.empty((kn, gadget.ell), dtype=np.uint64)
    kern.gadget_decompose_batch(
        np.ascontiguousarray(ct.mask),
        np.uint64(gadget.beta),
        gadget.ell,
        np.uint64(gadget.scales[-1]),
        digits,
    )
    out = np.zeros(params.n + 1, dtype=np.uint64)
    kern.ks_accumulate(digits, ksk.data, out)
    return LweCiphertext(out[: params.n].copy(), fe_add(int(out[params.n]), ct.body))


# ---------------------------------------------------------------------------
# linear ciphertext arithmetic and noise instrumentation


def lwe_add(c1: LweCiphertext, c2: LweCiphertext) -> LweCiphertext:
    if c1.mask.shape != c2.mask.shape:
        raise ValueError("ciphertext length mismatch")
    return LweCiphertext(kern.add_mod(c1.mask, c2.mask), fe_add(c1.body, c2.body))


def lwe_scalar_mul(ct: LweCiphertext, s: int) -> LweCiphertext:
    """Component-wise scale by a canonical residue; s = q - t decodes as -t."""
    su = np.uint64(s % Q)
    return LweCiphertext(
        kern.mul_mod(ct.mask, su), int(kern.mul_mod(np.uint64(ct.body), su))
    )


def lwe_zero(length: int) -> LweCiphertext:
    return LweCiphertext(np.zeros(length, dtype=np.uint64), 0)


def centered(x: int) -> int:
    """Representative of x mod q in (-q/2, q/2]."""
    x %= Q
    return x if x <= Q // 2 else x - Q


def noise_of(ct: LweCiphertext, key: LweSecretKey, expected_scaled: int) -> int:
    """Centered error of a ciphertext against its intended scaled message.

    Test instrumentation: requires the secret key.
    """
    return centered(lwe_decrypt(ct, key) - expected_scaled)
