"""TFHE processor emulator over the Solinas prime q = 2^64 - 2^32 + 1.

Exact reference implementations of every arithmetic and cryptographic
pipeline of the processor (segment reduction, staged negacyclic NTT,
external product, blind rotation, programmable bootstrapping, key
switching, MulAdd), its 3-opcode instruction set and object store, and a
calibrated cycle/bandwidth cost model.
"""

from .field import GENERATOR, MODULUS, Q
from .ntt import NttConfig, PolyCoeffs, PolyNtt, TwiddleTable
from .processor import CostReport, ExecConfig, Instruction, ObjectStore, Opcode
from .tfhe import (
    BootstrapKey,
    GadgetParams,
    GgswCiphertext,
    GgswNtt,
    GlevCiphertext,
    GlweCiphertext,
    GlweSecretKey,
    KeySwitchKey,
    LweCiphertext,
    LweSecretKey,
    PaddingOverflowError,
    TfheParams,
)

__version__ = "0.1.0"
