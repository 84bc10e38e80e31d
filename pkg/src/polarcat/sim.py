"""Monte Carlo frame-error sweeps for the three schemes (BPSK over AWGN;
sweep points are Eb/N0 in dB, converted through the scheme's net rate).

Every frame draws its message and noise from an independent RNG substream
keyed by (seed, snr index, frame index), so results are identical however the
frames are chunked or spread over workers, and extending max_frames only
appends frames.  An SNR point stops at target_frame_errors (counted in frame
order) or max_frames, whichever comes first.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import concat as _concat
from . import polar as _polar
from .channel import ebn0_to_esn0, frame_rng, snr_to_sigma
from .concat import ConcatSpec
from .crc import crc_append
from .polar import OpCounter
from .specfiles import PolarFileSpec, load_spec_file

SCHEMES = ("plain-polar", "scl-crc", "concat")
_CHUNK_FRAMES = 1024

CSV_HEADER = "snr_db,frames,frame_errors,bit_errors,fer,ber,avg_list_size,op_count_mean"


@dataclass
class SimConfig:
    scheme: str
    spec_path: str
    snrs_db: tuple
    max_frames: int = 10000
    target_frame_errors: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        self.snrs_db = tuple(float(s) for s in self.snrs_db)
        if not self.snrs_db:
            raise ValueError("snr list must be nonempty")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.target_frame_errors < 1:
            raise ValueError("target_frame_errors must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SweepRow:
    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    avg_list_size: float
    op_count_mean: float


@dataclass
class SimResult:
    scheme: str
    payload_bits: int
    block_length: int
    rows: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.payload_bits / self.block_length


@dataclass
class _Runner:
    """Picklable per-scheme encode/decode kernel for one chunk of frames."""

    scheme: str
    polar: PolarFileSpec | None = None
    cspec: ConcatSpec | None = None

    @property
    def payload_bits(self) -> int:
        return self.polar.payload_bits if self.polar is not None \
            else self.cspec.total_info

    @property
    def block_length(self) -> int:
        return self.polar.spec.block_length if self.polar is not None \
            else self.cspec.block_length

    def run_chunk(self, sigma: float, seed: int, snr_idx: int,
                  lo: int, hi: int):
        batch = hi - lo
        k = self.payload_bits
        length = self.block_length
        info = np.empty((batch, k), dtype=np.uint8)
        noise = np.empty((batch, length))
        for f in range(lo, hi):
            rng = frame_rng(seed, snr_idx, f)
            info[f - lo] = rng.integers(0, 2, size=k, dtype=np.uint8)
            noise[f - lo] = rng.standard_normal(length)
        counter = OpCounter()
        if self.scheme == "concat":
            x = _concat.concat_encode_batch(info, self.cspec)
            flat = x.reshape(batch, length)
            llr = _polar.clamp_llrs(
                2.0 * ((1.0 - 2.0 * flat) + sigma * noise) / sigma ** 2)
            decoded, stats = _concat.concat_decode_batch(
                llr.reshape(batch, self.cspec.column_length, self.cspec.n_columns),
                self.cspec, counter=counter)
            avg_list = stats.avg_list_size
        else:
            pspec = self.polar.spec
            payload = info
            if self.polar.crc is not None:
                payload = crc_append(info, self.polar.crc)
            u = _polar.embed_info(payload, pspec)
            x = _polar.polar_encode(u)
            llr = _polar.clamp_llrs(
                2.0 * ((1.0 - 2.0 * x) + sigma * noise) / sigma ** 2)
            if self.scheme == "plain-polar":
                u_hat = _polar.sc_decode_batch(llr, pspec, counter=counter)
                avg_list = 1.0
            else:
                u_hat, _, meta = _polar.scl_decode_batch(
                    llr, pspec, self.polar.list_size, self.polar.crc,
                    counter=counter)
                avg_list = float(meta["path_count"])
            decoded = _polar.extract_info(u_hat, pspec)[:, :k]
        diff = decoded != info
        return (diff.any(axis=1), diff.sum(axis=1).astype(np.int64),
                counter.total / batch, avg_list)


def _make_runner(cfg: SimConfig) -> _Runner:
    loaded = load_spec_file(cfg.spec_path)
    if cfg.scheme == "concat":
        if not isinstance(loaded, ConcatSpec):
            raise ValueError(f"{cfg.spec_path}: concat scheme needs a concat spec file")
        return _Runner(scheme=cfg.scheme, cspec=loaded)
    if not isinstance(loaded, PolarFileSpec):
        raise ValueError(f"{cfg.spec_path}: {cfg.scheme} needs a polar spec file")
    if cfg.scheme == "scl-crc" and loaded.crc is None:
        raise ValueError(f"{cfg.spec_path}: scl-crc scheme needs a CRC polynomial")
    return _Runner(scheme=cfg.scheme, polar=loaded)


def _chunk_job(args):
    runner, sigma, seed, snr_idx, lo, hi = args
    return runner.run_chunk(sigma, seed, snr_idx, lo, hi)


def run_sweep(cfg: SimConfig) -> SimResult:
    """Simulate every SNR point of the config; see the module docstring for
    the stopping and reproducibility rules."""
    runner = _make_runner(cfg)
    k = runner.payload_bits
    result = SimResult(scheme=cfg.scheme, payload_bits=k,
                       block_length=runner.block_length)
    rate = k / runner.block_length
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for snr_idx, snr_db in enumerate(cfg.snrs_db):
            sigma = snr_to_sigma(snr_db, rate)
            bounds = list(range(0, cfg.max_frames, _CHUNK_FRAMES)) + [cfg.max_frames]
            jobs = [(runner, sigma, cfg.seed, snr_idx, lo, hi)
                    for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            err_flags, bit_errs, op_chunks = [], [], []
            avg_list = 1.0
            stop = False
            total_errors = 0
            # Chunks are consumed in frame order; workers only run them in
            # parallel waves, so the stopping frame is worker-independent.
            wave = max(1, cfg.workers)
            for w0 in range(0, len(jobs), wave):
                batch_jobs = jobs[w0:w0 + wave]
                outs = list(pool.map(_chunk_job, batch_jobs)) if pool is not None \
                    else [_chunk_job(j) for j in batch_jobs]
                for (flags, bits, ops, avg_list) in outs:
                    err_flags.append(flags)
                    bit_errs.append(bits)
                    op_chunks.append((flags.size, ops))
                    total_errors += int(flags.sum())
                    if total_errors >= cfg.target_frame_errors:
                        stop = True
                if stop:
                    break
            flags = np.concatenate(err_flags)
            bits = np.concatenate(bit_errs)
            frames = flags.size
            if stop:
                cum = np.cumsum(flags)
                frames = int(np.argmax(cum >= cfg.target_frame_errors)) + 1
            n_err = int(flags[:frames].sum())
            n_bits = int(bits[:frames].sum())
            used, acc = 0, 0.0
            for size, ops in op_chunks:
                take = min(size, frames - used)
                if take <= 0:
                    break
                acc += take * ops
                used += take
            result.rows.append(SweepRow(
                snr_db=snr_db, frames=frames, frame_errors=n_err,
                bit_errors=n_bits, fer=n_err / frames, ber=n_bits / (frames * k),
                avg_list_size=avg_list, op_count_mean=acc / frames))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def result_to_csv(result: SimResult) -> str:
    lines = [CSV_HEADER]
    for r in result.rows:
        lines.append(",".join([
            repr(r.snr_db), str(r.frames), str(r.frame_errors),
            str(r.bit_errors), repr(r.fer), repr(r.ber),
            repr(r.avg_list_size), repr(r.op_count_mean)]))
    return "\n".join(lines) + "\n"


def parse_results_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized results CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append(SweepRow(
            snr_db=float(parts[0]), frames=int(parts[1]),
            frame_errors=int(parts[2]), bit_errors=int(parts[3]),
            fer=float(parts[4]), ber=float(parts[5]),
            avg_list_size=float(parts[6]), op_count_mean=float(parts[7])))
    return rows


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Overlay FER/BER curves from results CSV files (default: the ones below)."""
import csv
import sys

import matplotlib.pyplot as plt

paths = sys.argv[1:] or {paths!r}
fig, ax = plt.subplots()
for path in paths:
    snrs, fers = [], []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            snrs.append(float(row["snr_db"]))
            fers.append(float(row["fer"]))
    ax.semilogy(snrs, fers, marker="o", label=path)
ax.set_xlabel("Eb/N0 (dB)")
ax.set_ylabel("FER")
ax.grid(True, which="both", alpha=0.4)
ax.legend()
fig.savefig("fer_comparison.png", dpi=150)
print("wrote fer_comparison.png")
'''


def write_plot_script(csv_paths, out_path):
    with open(out_path, "w") as fh:
        fh.write(_PLOT_TEMPLATE.format(paths=[str(p) for p in csv_paths]))


def emit_outputs(result: SimResult, out_dir) -> dict:
    """Write results.csv and a plot script; returns the file paths."""
    if not result.rows:
        raise ValueError("cannot emit an empty sweep")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w") as fh:
        fh.write(result_to_csv(result))
    plot_path = os.path.join(out_dir, "plot_results.py")
    write_plot_script([csv_path], plot_path)
    return {"csv": csv_path, "plot": plot_path}


def ebn0_report(snr_db: float, rate: float) -> str:
    """Both SNR conventions, to avoid axis-convention traps when comparing."""
    return (f"Eb/N0 = {snr_db:.2f} dB, Es/N0 = {ebn0_to_esn0(snr_db, rate):.2f} dB, "
            f"sigma = {snr_to_sigma(snr_db, rate):.4f}")
