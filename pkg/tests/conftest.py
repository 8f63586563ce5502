import pytest

from tfheproc.tfhe import (
    TfheParams,
    generate_bootstrap_key,
    generate_key_switch_key,
    keygen,
)

#: Boolean-style benchmark parameter set used across the suite.
STANDARD = TfheParams(n=500, N=1024, k=1, ell=2, log_beta=10, p=16, sigma=2.0**-25)

#: Same set with the key noise recalibrated so that 500 accumulated external
#: products stay ~10 sigma below the p=16 decode threshold.  At sigma=2^-25
#: the accumulated blind-rotation noise std is ~0.8*e_max, which flips slots
#: in roughly a fifth of all bootstraps; 2^-28 restores a comfortable margin.
STANDARD_CALIBRATED = TfheParams(
    n=500, N=1024, k=1, ell=2, log_beta=10, p=16, sigma=2.0**-28
)

#: Large parameter set (cost-model only; keys at this size are impractical here).
LARGE = TfheParams(n=800, N=16384, k=1, ell=5, log_beta=6, p=16, sigma=2.0**-25)


@pytest.fixture(scope="session")
def standard_keys():
    """Full key material for the calibrated standard set; expensive, built once."""
    params = STANDARD_CALIBRATED
    sk, glwe_sk = keygen(params, seed=1000)
    bsk = generate_bootstrap_key(sk, glwe_sk, params, seed=1001)
    ksk = generate_key_switch_key(sk, glwe_sk, params, seed=1002)
    return params, sk, glwe_sk, bsk, ksk
