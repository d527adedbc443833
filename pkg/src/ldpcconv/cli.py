"""Command-line entry point: ``ldpcconv <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import codes
from .analysis import (
    INF,
    PseudoCodeword,
    active_part_has_cycle,
    conv_cycle_spectrum,
    cycle_spectrum,
    format_pseudoweights,
    format_spectrum_csv,
    fundamental_polytope_contains,
    girth,
    pseudoweights,
)
from .convcode import ConvCode, from_tanner_poly, materialize_window, read_conv_code, write_conv_code
from .cover import build_cover, cover_spec_from_poly, read_parts
from .gf2 import PolyMatrix, SparseBinMatrix, expand_poly, parse_alist, parse_poly, read_poly, write_alist, write_poly
from .sim import config_from_mapping, emit_csv, read_config, run_ber
from .unwrap import (
    cut_params,
    diagonal_cut_code,
    jfz_random_cut,
    jfz_unwrap,
    reduce_memory,
    tanner_unwrap,
    write_decomposition,
)

BUILTINS = {
    "tanner_qc_31": lambda: codes.tanner_qc_matrix(31),
    "tanner_qc_48": lambda: codes.tanner_qc_matrix(48),
    "tanner_qc_80": lambda: codes.tanner_qc_matrix(80),
    "tanner_ti": codes.tanner_time_invariant,
    "tanner_tv_31": lambda: codes.tanner_time_varying(31),
    "tanner_tv_48": lambda: codes.tanner_time_varying(48),
    "tanner_tv_80": lambda: codes.tanner_time_varying(80),
    "hamming_8_4": codes.hamming_8_4,
    "toy": codes.toy_code,
    "rate_half_10": codes.rate_half_10,
}


@dataclass
class RunManifest:
    subcommand: str
    inputs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    seed: int | None = None
    outputs: list = field(default_factory=list)

    def write(self, path: Path) -> None:
        data = {
            "subcommand": self.subcommand,
            "inputs": [str(p) for p in self.inputs],
            "params": self.params,
            "seed": self.seed,
            "outputs": [str(p) for p in self.outputs],
        }
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


class InputError(Exception):
    pass


def _manifest_path(out: Path) -> Path:
    return out / "run.json" if out.is_dir() else out.with_name(out.name + ".run.json")


def _load_code(ref: str) -> SparseBinMatrix | ConvCode:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in BUILTINS:
            raise InputError(f"unknown builtin code {name!r}; choose from {sorted(BUILTINS)}")
        return BUILTINS[name]()
    p = Path(ref)
    if p.is_dir() or p.name == "manifest.txt":
        return read_conv_code(p)
    return parse_alist(p.read_text())


def _read_matrix_or_poly(path: Path):
    text = path.read_text()
    head = text.split("\n", 1)[0].split()
    if len(head) == 3:
        return parse_poly(text)
    return parse_alist(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_construct(a) -> int:
    if bool(a.proto) == bool(a.parts):
        raise InputError("give exactly one of --proto or --parts")
    if a.proto:
        M = read_poly(a.proto)
        r = a.r if a.r is not None else M.modulus
        if r is None:
            raise InputError("--r is required when the proto file has no modulus")
        if M.modulus is not None and a.r is not None and M.modulus != a.r:
            raise InputError(f"--r {a.r} contradicts the file modulus {M.modulus}")
        M = M.with_modulus(r)
        if a.kind == "qc":
            H = expand_poly(M)
        else:
            H = build_cover(cover_spec_from_poly(M, a.kind), cancel=a.cancel).matrix
        inputs = [a.proto]
    else:
        spec = read_parts(a.parts)
        if a.kind != "qc":
            spec = spec.with_kind(a.kind)
        H = build_cover(spec, cancel=a.cancel).matrix
        inputs = [a.parts]
    out = Path(a.output)
    write_alist(H, out)
    RunManifest("construct", inputs, {"kind": a.kind, "r": a.r, "cancel": a.cancel}, None, [out]).write(_manifest_path(out))
    print(f"rows={H.rows} cols={H.cols} nnz={H.nnz}")
    return 0


def cmd_unwrap(a) -> int:
    src = Path(a.input)
    obj = _read_matrix_or_poly(src)
    params: dict = {}
    out = Path(a.output)
    outputs = [out]
    if a.tanner:
        if not isinstance(obj, PolyMatrix):
            raise InputError("--tanner needs a polynomial matrix file")
        D = tanner_unwrap(obj) if obj.modulus is not None else obj
        code = from_tanner_poly(D)
        params["method"] = "tanner"
    else:
        if not isinstance(obj, SparseBinMatrix):
            obj = expand_poly(obj)
        if a.jfz_diagonal:
            p = cut_params(obj.rows, obj.cols, a.ell)
            code = diagonal_cut_code(obj, a.ell)
            params.update(method="jfz-diagonal", ell=a.ell)
            print(p.report())
        else:
            if a.seed is None:
                raise InputError("--jfz-random needs --seed")
            d = jfz_random_cut(obj, a.seed)
            code = jfz_unwrap(d)
            params.update(method="jfz-random")
            if a.decomposition:
                write_decomposition(d, a.decomposition)
                outputs.append(Path(a.decomposition))
    write_conv_code(code, out)
    RunManifest("unwrap", [src], params, a.seed, outputs).write(_manifest_path(out))
    print(f"R={code.rate} m_s={code.m_s} nu_s={code.nu_s} T_s={code.T_s} b={code.b} c={code.c}")
    return 0


def cmd_reduce(a) -> int:
    M = read_poly(a.input)
    if M.modulus is not None:
        M = tanner_unwrap(M)
    R = reduce_memory(M)
    out = Path(a.output)
    write_poly(R, out)
    RunManifest("reduce", [a.input], {}, None, [out]).write(_manifest_path(out))
    print(f"m_s {max(M.max_exponent(), 0)} -> {max(R.max_exponent(), 0)}")
    return 0


def cmd_analyze(a) -> int:
    code = _load_code(a.input)
    if isinstance(code, ConvCode):
        probe = materialize_window(code, 0, max(4, 4 * (code.m_s + 1)))
        g = girth(probe)
        max_len = a.max_len or (12 if g == INF else int(2 * g - 2))
        spec = conv_cycle_spectrum(code, max_len) if g != INF else None
    else:
        g = girth(code)
        max_len = a.max_len or (12 if g == INF else int(2 * g - 2))
        spec = cycle_spectrum(code, max_len) if g != INF else None
    gtxt = "inf" if g == INF else str(int(g))
    csv = format_spectrum_csv(spec) if spec is not None else "length,count,normalized_avg\n"
    out = Path(a.output)
    out.write_text(csv)
    RunManifest("analyze", [a.input], {"max_len": max_len}, None, [out]).write(_manifest_path(out))
    print(f"girth={gtxt}")
    return 0


def _read_vector(path: Path) -> tuple[Fraction, ...]:
    toks = path.read_text().replace(",", " ").split()
    try:
        return tuple(Fraction(t) for t in toks)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad vector entry: {exc}") from None


def cmd_pseudoweight(a) -> int:
    H = parse_alist(Path(a.matrix).read_text())
    om = PseudoCodeword(_read_vector(Path(a.vector)))
    if len(om) != H.cols:
        raise InputError(f"vector has {len(om)} entries, matrix has {H.cols} columns")
    text = format_pseudoweights(
        pseudoweights(om),
        fundamental_polytope_contains(H, om),
        active_part_has_cycle(H, om),
    )
    if a.output:
        out = Path(a.output)
        out.write_text(text)
        RunManifest("pseudoweight", [a.vector, a.matrix], {}, None, [out]).write(_manifest_path(out))
    sys.stdout.write(text)
    return 0


def cmd_simulate(a) -> int:
    kv = read_config(a.config)
    if a.seed is not None:
        kv["seed"] = str(a.seed)
    if "seed" not in kv:
        raise InputError("simulate needs a seed (--seed or seed= in the config)")
    if a.threads is not None:
        kv["workers"] = str(a.threads)
    if "code" not in kv:
        raise InputError("config lacks code=")
    ref = kv["code"]
    if not ref.startswith("builtin:") and not Path(ref).is_absolute():
        ref = str(Path(a.config).parent / ref)
    cfg = config_from_mapping(kv, _load_code(ref))
    res = run_ber(cfg)
    out = Path(a.output)
    emit_csv(res, out)
    params = {k: v for k, v in sorted(kv.items()) if k not in ("seed", "workers")}
    RunManifest("simulate", [a.config], params, cfg.seed, [out]).write(_manifest_path(out))
    for p in res.points:
        flag = " (few errors)" if p.flagged(cfg.min_bit_errors) else ""
        print(f"{p.ebn0_db:g} dB: BER={p.ber:.3e} FER={p.fer:.3e} frames={p.frames}{flag}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ldpcconv", description="LDPC convolutional codes from graph covers")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("construct", help="expand a proto-matrix into a cover and write an alist")
    p.add_argument("--proto", help="polynomial proto file (cells are exponent sets)")
    p.add_argument("--parts", help="parts file with explicit permutations")
    p.add_argument("--r", type=int, help="lifting degree")
    p.add_argument("--kind", choices=("gcc1", "gcc2", "qc"), default="gcc1")
    p.add_argument("--cancel", action="store_true", help="reduce parallel edges modulo 2")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("unwrap", help="derive a convolutional code")
    p.add_argument("input", help="alist or polynomial matrix file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tanner", action="store_true")
    g.add_argument("--jfz-diagonal", action="store_true")
    g.add_argument("--jfz-random", action="store_true")
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--decomposition", help="also write the random cut parts here")
    p.add_argument("-o", "--output", required=True, help="output directory for the code manifest")
    p.set_defaults(func=cmd_unwrap)

    p = sub.add_parser("reduce", help="divide each row of a D-domain matrix by its lowest power")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("analyze", help="girth and short-cycle spectrum")
    p.add_argument("input", help="alist, code manifest or builtin:NAME")
    p.add_argument("--max-len", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pseudoweight", help="pseudo-weights and polytope membership of a vector")
    p.add_argument("vector")
    p.add_argument("matrix")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pseudoweight)

    p = sub.add_parser("simulate", help="Monte-Carlo BER over BPSK/AWGN")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
