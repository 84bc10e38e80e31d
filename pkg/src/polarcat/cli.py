"""Command line: construct code specs, encode/decode single vectors, run sweeps.

Bit files hold '0'/'1' characters (whitespace ignored); LLR files hold
whitespace-separated reals.  Codeword matrices are serialized row-major
(row 0 left to right, then row 1, ...).
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import concat as _concat
from . import polar as _polar
from .channel import ChannelParam, snr_to_sigma
from .construction import construct_concat_spec, construct_polar_spec
from .crc import CrcConfig, crc_append
from .inner_codes import parse_inner_code
from .sim import SimConfig, ebn0_report, emit_outputs, run_sweep
from .specfiles import (
    ConcatSpec,
    PolarFileSpec,
    SpecFormatError,
    load_spec_file,
    save_spec_file,
)


def _read_bits(path) -> np.ndarray:
    text = "".join(Path(path).read_text().split())
    if set(text) - {"0", "1"}:
        raise ValueError(f"{path}: bit files may contain only 0/1 characters")
    return np.array([int(c) for c in text], dtype=np.uint8)


def _write_bits(path, bits):
    Path(path).write_text("".join(str(int(b)) for b in bits) + "\n")


def _read_llrs(path) -> np.ndarray:
    return np.array([float(t) for t in Path(path).read_text().split()])


def _parse_crc(text: str) -> CrcConfig | None:
    return None if text == "-" else CrcConfig.from_string(text)


def _design_channel(args, rate: float) -> ChannelParam:
    if args.channel == "bsc":
        return ChannelParam(kind="bsc", crossover=args.crossover)
    if args.sigma is not None:
        return ChannelParam(kind="awgn", sigma=args.sigma)
    sigma = snr_to_sigma(args.design_ebn0_db, rate)
    return ChannelParam(kind="awgn", sigma=sigma)


def _load_family_file(path) -> tuple:
    """Generic inner-code family: blank-line separated generator blocks."""
    blocks = [b for b in Path(path).read_text().split("\n\n") if b.strip()]
    return tuple(parse_inner_code(b.splitlines()) for b in blocks)


def _cmd_construct(args) -> int:
    if args.scheme == "polar":
        block = args.block_length
        crc = _parse_crc(args.crc)
        r = 0 if crc is None else crc.degree
        rate = args.info_bits / block
        channel = _design_channel(args, rate)
        spec = construct_polar_spec(channel, block, args.info_bits + r,
                                    grid_step=args.grid_step, clamp=args.clamp)
        out = PolarFileSpec(spec=spec, payload_bits=args.info_bits, crc=crc,
                            list_size=args.list_size)
        save_spec_file(out, args.out)
        if channel.kind == "awgn":
            print(ebn0_report(args.design_ebn0_db, rate)
                  if args.sigma is None else f"sigma = {channel.sigma:.4f}")
        print(f"wrote polar spec ({block},{args.info_bits}) to {args.out}")
        return 0
    block = args.n_columns * args.column_length
    rate = args.info_bits / block
    channel = _design_channel(args, rate)
    crc = _parse_crc(args.crc)
    family = "polar" if args.family_file is None \
        else _load_family_file(args.family_file)
    result = construct_concat_spec(
        channel, family, args.n_columns, args.column_length, args.info_bits,
        crc=crc, list_target=args.list_target,
        grid_step=args.grid_step, clamp=args.clamp)
    save_spec_file(result.spec, args.out)
    if channel.kind == "awgn":
        print(ebn0_report(args.design_ebn0_db, rate)
              if args.sigma is None else f"sigma = {channel.sigma:.4f}")
    print(f"wrote concat spec ({block},{args.info_bits}) to {args.out}")
    print(f"predicted union-bound sum: {result.bound:.6e}")
    return 0


def _cmd_encode(args) -> int:
    loaded = load_spec_file(args.spec)
    info = _read_bits(getattr(args, "in"))
    if isinstance(loaded, ConcatSpec):
        x = _concat.concat_encode(info, loaded)
        _write_bits(args.out, x.flatten())
    else:
        payload = info if loaded.crc is None else crc_append(info, loaded.crc)
        if payload.size != loaded.spec.info_count:
            raise ValueError(
                f"expected {loaded.payload_bits} payload bits, got {info.size}")
        x = _polar.polar_encode(_polar.embed_info(payload, loaded.spec))
        _write_bits(args.out, x)
    return 0


def _cmd_decode(args) -> int:
    loaded = load_spec_file(args.spec)
    llrs = _read_llrs(getattr(args, "in"))
    if isinstance(loaded, ConcatSpec):
        mat = llrs.reshape(loaded.column_length, loaded.n_columns)
        info, stats = _concat.concat_decode(mat, loaded)
        _write_bits(args.out, info)
        print(f"decoded {info.size} bits, realized average list size "
              f"{stats.avg_list_size:.2f}")
    else:
        if loaded.list_size == 1 and loaded.crc is None:
            u = _polar.sc_decode(llrs, loaded.spec)
        else:
            u, meta = _polar.scl_decode(llrs, loaded.spec, loaded.list_size,
                                        loaded.crc)
            if loaded.crc is not None and not meta.crc_passed:
                print("warning: no list path passed the CRC; best metric returned")
        info = _polar.extract_info(u, loaded.spec)[:loaded.payload_bits]
        _write_bits(args.out, info)
    return 0


def _cmd_simulate(args) -> int:
    cfg = SimConfig(
        scheme=args.scheme, spec_path=args.spec,
        snrs_db=tuple(float(s) for s in args.snrs.split(",")),
        max_frames=args.max_frames, target_frame_errors=args.target_errors,
        seed=args.seed, workers=args.workers)
    result = run_sweep(cfg)
    for row in result.rows:
        print(f"{ebn0_report(row.snr_db, result.rate)} | frames {row.frames} "
              f"FER {row.fer:.4e} BER {row.ber:.4e} "
              f"L_av {row.avg_list_size:.2f} ops/frame {row.op_count_mean:.0f}")
    paths = emit_outputs(result, args.out)
    print(f"wrote {paths['csv']} and {paths['plot']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarcat",
        description="Concatenated polar codes: construction, codec, simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    con = sub.add_parser("construct", help="build a code spec file")
    con.add_argument("--scheme", choices=("concat", "polar"), default="concat")
    con.add_argument("--channel", choices=("awgn", "bsc"), default="awgn")
    con.add_argument("--design-ebn0-db", type=float, default=3.0)
    con.add_argument("--sigma", type=float, default=None,
                     help="AWGN noise deviation (overrides --design-ebn0-db)")
    con.add_argument("--crossover", type=float, default=0.1)
    con.add_argument("--grid-step", type=float, default=1 / 16)
    con.add_argument("--clamp", type=float, default=_polar.LLR_MAX)
    con.add_argument("--n-columns", type=int, default=16)
    con.add_argument("--column-length", type=int, default=32)
    con.add_argument("--block-length", type=int, default=512,
                     help="polar scheme only")
    con.add_argument("--info-bits", type=int, required=True)
    con.add_argument("--crc", default="10011",
                     help='CRC polynomial bits, or "-" for none')
    con.add_argument("--list-target", type=float, default=8.0)
    con.add_argument("--list-size", type=int, default=1,
                     help="polar scheme only")
    con.add_argument("--family-file", default=None,
                     help="generic inner-code family (generator blocks)")
    con.add_argument("--out", required=True)
    con.set_defaults(func=_cmd_construct)

    enc = sub.add_parser("encode", help="encode one message from a bit file")
    enc.add_argument("--spec", required=True)
    enc.add_argument("--in", required=True)
    enc.add_argument("--out", required=True)
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="decode one LLR vector from a file")
    dec.add_argument("--spec", required=True)
    dec.add_argument("--in", required=True)
    dec.add_argument("--out", required=True)
    dec.set_defaults(func=_cmd_decode)

    simp = sub.add_parser("simulate", help="run a Monte Carlo SNR sweep")
    simp.add_argument("--scheme", choices=("plain-polar", "scl-crc", "concat"),
                      required=True)
    simp.add_argument("--spec", required=True)
    simp.add_argument("--snrs", required=True,
                      help="comma-separated Eb/N0 values in dB")
    simp.add_argument("--max-frames", type=int, default=10000)
    simp.add_argument("--target-errors", type=int, default=100)
    simp.add_argument("--seed", type=int, default=0)
    simp.add_argument("--workers", type=int, default=1)
    simp.add_argument("--out", required=True)
    simp.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, SpecFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
