"""Command-line front end: parameter registry, key and ciphertext lifecycle,
program assembly and execution, software benchmarking, and hardware-model
estimation reports.

Key and ciphertext files are versioned JSON with hex-encoded 64-bit words
and an embedded parameter block, so artifacts are self-describing,
auditable and diff-friendly.  Instruction streams are the bit-exact binary
format of the processor module.

Program files are line-based assembly, one instruction per line,
``#`` comments allowed::

    PBS     dst, src, lut[, h]
    KS      dst, src, kskid
    MULADD  dst, src, aux, imm

Store manifests map addresses to objects::

    {"format_version": 1,
     "objects": {"0x10": {"kind": "bootstrap_key", "file": "bsk.json"},
                 "0x11": {"kind": "key_switch_key", "file": "ksk.json"},
                 "0x20": {"kind": "lut", "table": [0, 1, 2, 3]},
                 "0x30": {"kind": "lwe", "file": "ct.json"}},
     "outputs": {"0x50": "result.json"}}

Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import ntt, processor
from .field import Q
from .ntt import NttConfig, PolyCoeffs, forward_ntt, inverse_ntt
from .processor import (
    ExecConfig,
    Instruction,
    ObjectStore,
    Opcode,
    decode_program,
    encode_program,
    execute,
    report,
    report_to_csv,
    render_report,
)
from .tfhe import (
    BootstrapKey,
    GadgetParams,
    GlweCiphertext,
    GlweSecretKey,
    KeySwitchKey,
    LweCiphertext,
    LweSecretKey,
    PaddingOverflowError,
    TfheParams,
    build_lut,
    decode,
    decompose,
    encode,
    flatten_key,
    generate_bootstrap_key,
    generate_key_switch_key,
    glwe_decrypt,
    glwe_trivial,
    key_switch,
    keygen,
    lwe_decrypt,
    lwe_encrypt,
    modswitch_2n,
    monomial_rotate,
    pbs,
    phase_to_slot,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

FORMAT_VERSION = 1

#: Built-in parameter sets.  "standard" and "large" mirror the benchmark
#: hardware configurations; "standard-lownoise" recalibrates sigma so that
#: accumulated blind-rotation noise sits ~10 sigma under the p=16 decode
#: threshold (at 2^-25 it reaches ~0.8*e_max and bootstraps misdecode; see
#: README); "toy" is a fast noiseless set for demos and pipeline tests.
BUILTIN_PARAM_SETS: dict[str, TfheParams] = {
    "standard": TfheParams(n=500, N=1024, k=1, ell=2, log_beta=10, p=16,
                           sigma=2.0**-25),
    "standard-lownoise": TfheParams(n=500, N=1024, k=1, ell=2, log_beta=10,
                                    p=16, sigma=2.0**-28),
    "large": TfheParams(n=800, N=16384, k=1, ell=5, log_beta=6, p=16,
                        sigma=2.0**-25),
    "toy": TfheParams(n=8, N=256, k=1, ell=2, log_beta=10, p=4, sigma=0.0),
}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def load_param_registry(config_path: str | None) -> dict[str, TfheParams]:
    registry = dict(BUILTIN_PARAM_SETS)
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read parameter file {config_path}: {exc}")
        for name, entry in raw.items():
            try:
                registry[name] = TfheParams.from_dict(entry)
            except (TypeError, ValueError, KeyError) as exc:
                raise DataError(f"invalid parameter set {name!r}: {exc}")
    return registry


def resolve_params(args) -> TfheParams:
    registry = load_param_registry(getattr(args, "params_file", None))
    name = args.params
    if name not in registry:
        raise UsageError(
            f"unknown parameter set {name!r} (known: {', '.join(sorted(registry))})"
        )
    return registry[name]


# ---------------------------------------------------------------------------
# JSON artifact codec


def _hex_words(arr: np.ndarray) -> list[str]:
    return [f"{int(w):016x}" for w in arr.reshape(-1)]


def _unhex_words(words, shape) -> np.ndarray:
    arr = np.array([int(w, 16) for w in words], dtype=np.uint64)
    return arr.reshape(shape)


def _array_block(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "words": _hex_words(arr)}


def _array_from_block(block) -> np.ndarray:
    return _unhex_words(block["words"], tuple(block["shape"]))


def _write_json(path: Path, kind: str, params: TfheParams, payload: dict) -> None:
    doc = {"format_version": FORMAT_VERSION, "kind": kind,
           "params": params.to_dict()}
    doc.update(payload)
    path.write_text(json.dumps(doc))


def _read_json(path: Path, kind: str) -> tuple[dict, TfheParams]:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}")
    try:
        if doc["format_version"] != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported format_version")
        if doc["kind"] != kind:
            raise DataError(f"{path}: expected {kind}, found {doc['kind']}")
        return doc, TfheParams.from_dict(doc["params"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: malformed {kind} file: {exc}")


def save_lwe_secret_key(path: Path, key: LweSecretKey, params: TfheParams):
    _write_json(path, "lwe_secret_key", params, {"bits": _hex_words(key.bits)})


def load_lwe_secret_key(path: Path) -> tuple[LweSecretKey, TfheParams]:
    doc, params = _read_json(path, "lwe_secret_key")
    bits = _unhex_words(doc["bits"], (-1,))
    return LweSecretKey(bits), params


def save_glwe_secret_key(path: Path, key: GlweSecretKey, params: TfheParams):
    _write_json(path, "glwe_secret_key", params, {"polys": _array_block(key.polys)})


def load_glwe_secret_key(path: Path) -> tuple[GlweSecretKey, TfheParams]:
    doc, params = _read_json(path, "glwe_secret_key")
    return GlweSecretKey(_array_from_block(doc["polys"])), params


def save_bootstrap_key(path: Path, bsk: BootstrapKey, params: TfheParams):
    _write_json(path, "bootstrap_key", params, {
        "elements": _array_block(bsk.elements),
        "gadget": {"log_beta": bsk.gadget.log_beta, "ell": bsk.gadget.ell},
        "domain": "ntt-scaled",
    })


def load_bootstrap_key(path: Path) -> tuple[BootstrapKey, TfheParams]:
    doc, params = _read_json(path, "bootstrap_key")
    gadget = GadgetParams(**doc["gadget"])
    return BootstrapKey(_array_from_block(doc["elements"]), gadget), params


def save_key_switch_key(path: Path, ksk: KeySwitchKey, params: TfheParams):
    _write_json(path, "key_switch_key", params, {
        "data": _array_block(ksk.data),
        "gadget": {"log_beta": ksk.gadget.log_beta, "ell": ksk.gadget.ell},
        "negated": ksk.negated,
    })


def load_key_switch_key(path: Path) -> tuple[KeySwitchKey, TfheParams]:
    doc, params = _read_json(path, "key_switch_key")
    gadget = GadgetParams(**doc["gadget"])
    return KeySwitchKey(_array_from_block(doc["data"]), gadget,
                        doc.get("negated", True)), params


def save_lwe_ciphertext(path: Path, ct: LweCiphertext, params: TfheParams):
    _write_json(path, "lwe_ciphertext", params, {
        "mask": _hex_words(ct.mask), "body": f"{ct.body:016x}",
    })


def load_lwe_ciphertext(path: Path) -> tuple[LweCiphertext, TfheParams]:
    doc, params = _read_json(path, "lwe_ciphertext")
    return LweCiphertext(_unhex_words(doc["mask"], (-1,)),
                         int(doc["body"], 16)), params


def save_glwe_ciphertext(path: Path, ct: GlweCiphertext, params: TfheParams):
    _write_json(path, "glwe_ciphertext", params, {"data": _array_block(ct.data)})


def load_glwe_ciphertext(path: Path) -> tuple[GlweCiphertext, TfheParams]:
    doc, params = _read_json(path, "glwe_ciphertext")
    return GlweCiphertext(_array_from_block(doc["data"])), params


def _check_geometry(params: TfheParams, other: TfheParams, what: str) -> None:
    for name in ("n", "N", "k", "ell", "log_beta", "p"):
        if getattr(params, name) != getattr(other, name):
            raise DataError(
                f"{what}: parameter mismatch ({name}: "
                f"{getattr(other, name)} != {getattr(params, name)})"
            )


# ---------------------------------------------------------------------------
# program files


def parse_program(text: str, n: int) -> list[Instruction]:
    """Parse line-based assembly into instructions (see module docstring)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        mnemonic, operands = parts[0].upper(), parts[1:]
        try:
            values = [int(tok, 0) for tok in operands]
        except ValueError:
            raise DataError(f"line {lineno}: bad operand in {raw!r}")
        try:
            if mnemonic == "PBS" and len(values) in (3, 4):
                dst, src, lut = values[:3]
                h = values[3] if len(values) == 4 else 0
                ins = Instruction(Opcode.PBS, src, lut, dst, extract_idx=h)
            elif mnemonic == "KS" and len(values) == 3:
                dst, src, kskid = values
                ins = Instruction(Opcode.KS, src, kskid, dst)
            elif mnemonic == "MULADD" and len(values) == 4:
                dst, src, aux, imm = values
                ins = Instruction(Opcode.MULADD, src, aux, dst,
                                  imm_scalar=imm % (1 << 64))
            else:
                raise DataError(
                    f"line {lineno}: unknown instruction or operand count: {raw!r}"
                )
            ins.validate(n)
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}")
        out.append(ins)
    return out


def load_store_from_manifest(
    manifest_path: Path, params: TfheParams
) -> tuple[ObjectStore, dict[int, Path]]:
    try:
        doc = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read manifest {manifest_path}: {exc}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError("manifest: missing or unsupported format_version")
    base = manifest_path.parent
    store = ObjectStore()
    for addr_str, entry in doc.get("objects", {}).items():
        addr = int(addr_str, 0)
        kind = entry.get("kind")
        if kind == "lwe":
            obj, p = load_lwe_ciphertext(base / entry["file"])
            _check_geometry(params, p, entry["file"])
        elif kind == "lut":
            if "table" in entry:
                obj = build_lut(entry["table"], params)
            else:
                obj, p = load_glwe_ciphertext(base / entry["file"])
                _check_geometry(params, p, entry["file"])
        elif kind == "bootstrap_key":
            obj, p = load_bootstrap_key(base / entry["file"])
            _check_geometry(params, p, entry["file"])
        elif kind == "key_switch_key":
            obj, p = load_key_switch_key(base / entry["file"])
            _check_geometry(params, p, entry["file"])
        elif kind == "scalar":
            obj = int(entry["value"]) % Q
        else:
            raise DataError(f"manifest: unknown object kind {kind!r} at {addr_str}")
        store.put(addr, obj)
    outputs = {int(a, 0): base / f for a, f in doc.get("outputs", {}).items()}
    return store, outputs


# ---------------------------------------------------------------------------
# commands


def cmd_params(args) -> int:
    registry = load_param_registry(args.params_file)
    if args.action == "list":
        for name in sorted(registry):
            p = registry[name]
            print(f"{name}: n={p.n} N={p.N} k={p.k} ell={p.ell} "
                  f"log_beta={p.log_beta} p={p.p} sigma={p.sigma:.3e}")
        return EXIT_OK
    name = args.name
    if name not in registry:
        raise UsageError(f"unknown parameter set {name!r}")
    p = registry[name]
    if args.json:
        doc = p.to_dict()
        doc.update({"delta": p.delta, "e_max": p.e_max,
                    "gadget_scales": list(p.gadget.scales)})
        print(json.dumps(doc, indent=2))
    else:
        print(f"{name}:")
        for key, value in p.to_dict().items():
            print(f"  {key} = {value}")
        print(f"  delta = {p.delta}   (round(q/2p))")
        print(f"  e_max = {p.e_max}   (delta/2)")
        print(f"  ks gadget = (2^{p.log_beta_ks}, {p.ell_ks})")
    return EXIT_OK


def cmd_keygen(args) -> int:
    params = resolve_params(args)
    bsk_bytes = params.n * (params.k + 1) ** 2 * params.ell * params.N * 8
    if bsk_bytes > 1 << 30:
        raise UsageError(
            f"bootstrap key for this set is {bsk_bytes / 2**30:.1f} GiB; "
            "this set is intended for the cost model (`estimate`), not key I/O"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sk, glwe_sk = keygen(params, args.seed)
    bsk = generate_bootstrap_key(sk, glwe_sk, params, args.seed + 1)
    ksk = generate_key_switch_key(sk, glwe_sk, params, args.seed + 2)
    save_lwe_secret_key(out / "sk.json", sk, params)
    save_glwe_secret_key(out / "glwe_sk.json", glwe_sk, params)
    save_bootstrap_key(out / "bsk.json", bsk, params)
    save_key_switch_key(out / "ksk.json", ksk, params)
    print(f"wrote sk.json glwe_sk.json bsk.json ksk.json to {out}")
    return EXIT_OK


def cmd_encrypt(args) -> int:
    params = resolve_params(args)
    if not 0 <= args.message < params.p:
        raise UsageError(f"message must lie in [0, {params.p})")
    sk, key_params = load_lwe_secret_key(Path(args.keys) / "sk.json")
    _check_geometry(params, key_params, "sk.json")
    ct = lwe_encrypt(encode(args.message, params), sk, params.sigma, args.seed)
    save_lwe_ciphertext(Path(args.out), ct, params)
    print(f"encrypted {args.message} -> {args.out}")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    ct, params = load_lwe_ciphertext(Path(args.infile))
    keys = Path(args.keys)
    if ct.mask.shape[0] == params.n:
        sk, _ = load_lwe_secret_key(keys / "sk.json")
    elif ct.mask.shape[0] == params.k * params.N:
        glwe_sk, _ = load_glwe_secret_key(keys / "glwe_sk.json")
        sk = flatten_key(glwe_sk)
    else:
        raise DataError(f"ciphertext length {ct.mask.shape[0]} matches no key")
    try:
        m = decode(lwe_decrypt(ct, sk), params)
    except PaddingOverflowError as exc:
        raise DataError(f"padding overflow: {exc}")
    if args.json:
        print(json.dumps({"message": m}))
    else:
        print(m)
    return EXIT_OK


def cmd_asm(args) -> int:
    params = resolve_params(args)
    try:
        text = Path(args.program).read_text()
    except OSError as exc:
        raise DataError(str(exc))
    program = parse_program(text, params.N)
    blob = encode_program(program, params.N)
    Path(args.out).write_bytes(blob)
    print(f"assembled {len(program)} instructions -> {args.out} ({len(blob)} bytes)")
    return EXIT_OK


def cmd_run(args) -> int:
    params = resolve_params(args)
    if bool(args.program) == bool(args.binary):
        raise UsageError("provide exactly one of --program or --binary")
    if args.program:
        try:
            text = Path(args.program).read_text()
        except OSError as exc:
            raise DataError(str(exc))
        program = parse_program(text, params.N)
    else:
        try:
            blob = Path(args.binary).read_bytes()
        except OSError as exc:
            raise DataError(str(exc))
        try:
            program = decode_program(blob, params.N)
        except ValueError as exc:
            raise DataError(f"bad instruction stream: {exc}")
    store, outputs = load_store_from_manifest(Path(args.manifest), params)
    try:
        execute(program, store, params)
    except (processor.UnmappedAddressError, processor.ObjectTypeError) as exc:
        raise DataError(str(exc))
    for addr, path in outputs.items():
        obj = store.get(addr)
        if not isinstance(obj, LweCiphertext):
            raise DataError(f"output {addr:#x} is not an LWE ciphertext")
        save_lwe_ciphertext(path, obj, params)
    print(f"executed {len(program)} instructions; wrote {len(outputs)} outputs")
    return EXIT_OK


def cmd_bench(args) -> int:
    params = resolve_params(args)
    if args.trials < 1:
        raise UsageError("trials must be >= 1")
    sk, glwe_sk = keygen(params, args.seed)
    bsk = generate_bootstrap_key(sk, glwe_sk, params, args.seed + 1)
    ksk = generate_key_switch_key(sk, glwe_sk, params, args.seed + 2)
    lut = build_lut(list(range(params.p)), params)
    ct = lwe_encrypt(encode(1 % params.p, params), sk, params.sigma, args.seed + 3)
    pbs(ct, lut, bsk, params)  # warm-up (compilation, caches)
    durations = []
    for _ in range(args.trials):
        t0 = time.perf_counter()
        out = pbs(ct, lut, bsk, params)
        key_switch(out, ksk, params)
        durations.append(time.perf_counter() - t0)
    rates = [1.0 / d for d in durations]
    mean = statistics.fmean(rates)
    std = statistics.stdev(rates) if len(rates) > 1 else 0.0
    result = {
        "params": args.params,
        "trials": args.trials,
        "pbs_per_s_mean": mean,
        "pbs_per_s_std": std,
        "ms_per_op_mean": statistics.fmean(durations) * 1000,
        "note": "software emulator wall-clock measurement; informational only",
    }
    if args.json:
        print(json.dumps(result))
    else:
        print(f"{args.trials} PBS+KS trials at {args.params}: "
              f"{mean:.1f} +/- {std:.1f} PBS/s "
              f"({result['ms_per_op_mean']:.1f} ms/op; informational)")
    return EXIT_OK


def cmd_estimate(args) -> int:
    params = resolve_params(args)
    try:
        cfg = ExecConfig(t=args.throughput, f=args.f_mhz * 1e6,
                         batch_size=args.batch, mem_bw=args.mem_bw)
        rep = report(params, cfg, params_name=args.params)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.csv:
        print(report_to_csv(rep), end="")
    elif args.json:
        print(json.dumps(dataclasses.asdict(rep)))
    else:
        print(render_report(rep))
    return EXIT_OK


# ---------------------------------------------------------------------------
# self-test


def _selftest_reduction(rng) -> str | None:
    from .field import reduce128

    for v in (0, Q, Q - 1, (1 << 64) - 1, (1 << 128) - 1, Q * Q):
        if reduce128(v) != v % Q:
            return f"edge case {v:#x}"
    for _ in range(100_000):
        v = int(rng.integers(0, 1 << 62)) << 66 | int(rng.integers(0, 1 << 62))
        if reduce128(v) != v % Q:
            return f"random input {v:#x}"
    return None


def _selftest_ntt_oracle(rng) -> str | None:
    from .ntt import negacyclic_mul, schoolbook_negacyclic_mul

    for n, trials in ((64, 20), (1024, 3)):
        for _ in range(trials):
            a = PolyCoeffs(rng.integers(0, Q, n, dtype=np.uint64))
            b = PolyCoeffs(rng.integers(0, Q, n, dtype=np.uint64))
            if not (negacyclic_mul(a, b).coeffs
                    == schoolbook_negacyclic_mul(a, b).coeffs).all():
                return f"mismatch against convolution oracle at N={n}"
    return None


def _selftest_round_trip(rng) -> str | None:
    cfg = NttConfig(1024, 2)
    for _ in range(5):
        p = PolyCoeffs(rng.integers(0, Q, 1024, dtype=np.uint64))
        if not (inverse_ntt(forward_ntt(p, cfg), cfg).coeffs == p.coeffs).all():
            return "forward/inverse round trip broke"
    return None


def _selftest_decomposition(rng) -> str | None:
    from .tfhe import centered

    for log_beta, ell in ((10, 2), (6, 5)):
        gadget = GadgetParams(log_beta, ell)
        xs = rng.integers(0, Q, 10_000, dtype=np.uint64)
        dd = decompose(xs, gadget)
        rec = dd.reconstruct()
        from . import _kernels as kern

        err = kern.sub_mod(xs, rec)
        if max(abs(centered(int(e))) for e in err.tolist()) > gadget.eps:
            return f"reconstruction bound broke at (2^{log_beta}, {ell})"
    return None


def _selftest_blind_rotation(rng) -> str | None:
    import itertools

    params = TfheParams(n=2, N=16, k=1, ell=2, log_beta=10, p=4, sigma=0.0)
    _, glwe_sk = keygen(params, seed=424)
    f = rng.integers(0, Q, params.N, dtype=np.uint64)
    acc = glwe_trivial(f, params.k)
    mask = rng.integers(0, Q, params.n, dtype=np.uint64)
    body = int(rng.integers(0, Q, dtype=np.uint64))
    ct = LweCiphertext(mask, body)
    a_t = [modswitch_2n(int(a), params.N) for a in mask]
    b_t = modswitch_2n(body, params.N)
    from .tfhe import blind_rotate

    for bits in itertools.product((0, 1), repeat=params.n):
        sk = LweSecretKey(np.array(bits, dtype=np.uint64))
        bsk = generate_bootstrap_key(sk, glwe_sk, params, seed=425)
        got = glwe_decrypt(blind_rotate(acc, ct, bsk, params), glwe_sk)
        exp = monomial_rotate(
            f, (sum(a * s for a, s in zip(a_t, bits)) - b_t) % (2 * params.N)
        )
        got_slots = [phase_to_slot(int(c), params) for c in got]
        exp_slots = [phase_to_slot(int(c), params) for c in exp]
        if got_slots != exp_slots:
            return f"plaintext simulation mismatch for key bits {bits}"
    return None


def _selftest_instructions(rng) -> str | None:
    from tfheproc.processor import decode_instruction, encode_instruction

    for n in (1024, 16384):
        for _ in range(1000):
            opcode = Opcode(int(rng.integers(0, 3)))
            ins = Instruction(
                opcode=opcode,
                addr_src=int(rng.integers(0, 1 << 64, dtype=np.uint64)),
                addr_aux=int(rng.integers(0, 1 << 64, dtype=np.uint64)),
                addr_dst=int(rng.integers(0, 1 << 64, dtype=np.uint64)),
                extract_idx=int(rng.integers(0, n)) if opcode is Opcode.PBS else 0,
                imm_scalar=int(rng.integers(0, 1 << 64, dtype=np.uint64))
                if opcode is Opcode.MULADD else None,
            )
            if decode_instruction(encode_instruction(ins, n), n) != ins:
                return f"encode/decode round trip broke at N={n}"
    return None


SELFTEST_SUITES = [
    ("reduction-oracle", _selftest_reduction),
    ("ntt-vs-convolution", _selftest_ntt_oracle),
    ("ntt-round-trip", _selftest_round_trip),
    ("decomposition-bounds", _selftest_decomposition),
    ("noiseless-blind-rotation", _selftest_blind_rotation),
    ("instruction-round-trip", _selftest_instructions),
]


def cmd_selftest(args) -> int:
    if args.inject_twiddle_fault:
        for n in (64, 1024):
            ntt._corrupt_twiddles_for_testing(n)
    failures = 0
    rng = np.random.default_rng(args.seed)
    for name, suite in SELFTEST_SUITES:
        t0 = time.perf_counter()
        try:
            detail = suite(rng)
        except Exception as exc:  # a crash is a failure, not an abort
            detail = f"exception: {exc}"
        dt = time.perf_counter() - t0
        status = "PASS" if detail is None else "FAIL"
        if detail is not None:
            failures += 1
        line = f"{name:<28} {status}  ({dt:.2f}s)"
        if detail:
            line += f"  {detail}"
        print(line)
    if args.inject_twiddle_fault:
        ntt._reset_twiddle_cache()
    if failures:
        print(f"{failures} suite(s) failed")
        return EXIT_VERIFY
    print("all suites passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tfheproc",
                     description="TFHE processor emulator and cost model")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, params=True):
        if params:
            p.add_argument("--params", default="standard",
                           help="parameter set name (see `params list`)")
            p.add_argument("--params-file", default=None,
                           help="JSON file with user-defined parameter sets")
        p.add_argument("--seed", type=int, default=0, help="PRNG seed")

    p = sub.add_parser("params", help="list or show parameter sets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?", default="standard")
    p.add_argument("--params-file", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("keygen", help="generate and write all key material")
    add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a message")
    add_common(p)
    p.add_argument("--keys", required=True, help="key directory")
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--out", required=True, help="ciphertext file")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext file")
    p.add_argument("--keys", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("asm", help="assemble a text program to binary")
    add_common(p)
    p.add_argument("--program", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="execute a program against a store manifest")
    add_common(p)
    p.add_argument("--program", help="text program file")
    p.add_argument("--binary", help="assembled binary program")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="wall-clock software PBS benchmark")
    add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("estimate", help="hardware cost-model report")
    add_common(p)
    p.add_argument("-T", "--throughput", type=int, required=True,
                   help="coefficients per cycle (power of two)")
    p.add_argument("--f-mhz", type=float, required=True, help="clock in MHz")
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--mem-bw", type=float, default=None,
                   help="stream bandwidth bytes/s for batch sizing")
    p.add_argument("--json", action="store_true")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("selftest", help="run the built-in oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-twiddle-fault", action="store_true",
                   help="negative control: corrupt twiddles, suites must fail")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
