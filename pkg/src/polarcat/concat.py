"""The concatenated code: inner codewords in the columns of an M x N bit
matrix, every row encoded by the rate-1 polar transform.

Decoding alternates one SC step across all M rows (producing a column of
LLRs) with a column decode: soft ML for explicit-generator columns, CRC-aided
list decoding for polar columns.  The hard column decision feeds back into
the row steppers as known context.

The per-column row stage is embarrassingly parallel and may be split over
threads (`row_workers`); results are bit-identical regardless because the row
steppers never interact within a step.  Column steps are strictly sequential.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import inner_codes as _inner
from . import polar as _polar
from .inner_codes import InnerCode
from .polar import LLR_MAX, OpCounter, PolarSpec, clamp_llrs
from .validation import as_bit_array, as_llr_array


@dataclass
class ConcatSpec:
    """Full description of a concatenated code.

    `family` entries are InnerCode values; polar-kind entries carry the column
    frozen mask and no CRC of their own.  The CRC (if any) is a per-column
    choice, so the effective column code is the family entry restricted to
    CRC-consistent codewords.
    """

    column_length: int
    n_columns: int
    total_info: int
    family: tuple
    assignments: tuple
    list_sizes: tuple
    column_crcs: tuple

    _columns: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.family = tuple(self.family)
        self.assignments = tuple(int(a) for a in self.assignments)
        self.list_sizes = tuple(int(l) for l in self.list_sizes)
        self.column_crcs = tuple(self.column_crcs)
        n = self.n_columns
        if n & (n - 1):
            raise ValueError("the number of columns must be a power of two")
        for name, seq in (("assignments", self.assignments),
                          ("list_sizes", self.list_sizes),
                          ("column_crcs", self.column_crcs)):
            if len(seq) != n:
                raise ValueError(f"{name} must have one entry per column")
        if any(l < 1 for l in self.list_sizes):
            raise ValueError("list sizes must be >= 1")
        if not all(0 <= a < len(self.family) for a in self.assignments):
            raise ValueError("assignment index out of family range")
        has_polar = any(code.kind == "polar" for code in self.family)
        if has_polar and self.column_length & (self.column_length - 1):
            raise ValueError("polar columns require a power-of-two column length")
        for code in self.family:
            if code.length != self.column_length:
                raise ValueError("family codes must all have the column length")
        self._columns = tuple(self._resolve_column(i) for i in range(n))
        net = sum(c.dimension for c in self._columns)
        if net != self.total_info:
            raise ValueError(
                f"column dimensions sum to {net}, expected total_info={self.total_info}")

    def _resolve_column(self, i: int) -> InnerCode:
        base = self.family[self.assignments[i]]
        crc = self.column_crcs[i]
        if crc is None:
            return base
        if base.kind != "polar":
            raise ValueError("a column CRC requires a polar column code")
        return InnerCode.polar_column(base.column_spec, crc)

    @property
    def columns(self) -> tuple:
        return self._columns

    @property
    def row_spec(self) -> PolarSpec:
        return PolarSpec.rate_one(self.n_columns)

    @property
    def block_length(self) -> int:
        return self.column_length * self.n_columns

    @property
    def rate(self) -> float:
        return self.total_info / self.block_length


class CodeMatrix:
    """An M x N GF(2) matrix (the inner-coded V or the transmitted X)."""

    def __init__(self, bits):
        self.bits = as_bit_array(bits, name="matrix")
        if self.bits.ndim != 2:
            raise ValueError("matrix must be 2-D")

    @property
    def shape(self):
        return self.bits.shape

    def row(self, j: int) -> np.ndarray:
        return self.bits[j, :]

    def col(self, i: int) -> np.ndarray:
        return self.bits[:, i]

    def flatten(self) -> np.ndarray:
        """Row-major serialization (row 0 left to right, then row 1, ...)."""
        return self.bits.reshape(-1)


@dataclass
class DecodeStats:
    """Instrumentation from one concatenated decode (or a batch of frames).

    paths_used holds the realized list width per column; crc_selected holds,
    per column, the fraction of frames whose winner passed the CRC (None for
    columns without one); crc_fallbacks counts best-metric fallbacks across
    all frames and columns; op_count is decoder node visits per frame.
    """

    list_sizes: tuple
    paths_used: tuple
    crc_selected: tuple
    crc_fallbacks: int
    avg_list_size: float
    op_count: float


def concat_encode_batch(info: np.ndarray, spec: ConcatSpec) -> np.ndarray:
    """Encode (batch, K) info bits into (batch, M, N) codeword matrices."""
    info = as_bit_array(info, name="info")
    if info.shape[-1] != spec.total_info:
        raise ValueError(f"expected {spec.total_info} info bits, got {info.shape[-1]}")
    squeeze = info.ndim == 1
    if squeeze:
        info = info[None, :]
    batch = info.shape[0]
    v = np.zeros((batch, spec.column_length, spec.n_columns), dtype=np.uint8)
    pos = 0
    for i, code in enumerate(spec.columns):
        k = code.dimension
        if k:
            v[:, :, i] = _inner.encode(code, info[:, pos:pos + k])
            pos += k
    x = _polar.polar_encode(v)
    return x[0] if squeeze else x


def concat_encode(info, spec: ConcatSpec) -> CodeMatrix:
    """Encode one K-bit message; returns the transmitted M x N matrix."""
    info = as_bit_array(info, name="info")
    if info.ndim != 1:
        raise ValueError("info must be one-dimensional")
    return CodeMatrix(concat_encode_batch(info, spec))


def _decode_columns(llrs: np.ndarray, spec: ConcatSpec, counter: OpCounter,
                    row_workers: int):
    batch, m_len, n_cols = llrs.shape
    if row_workers < 1:
        raise ValueError("row_workers must be >= 1")
    row_workers = min(row_workers, m_len)
    bounds = np.linspace(0, m_len, row_workers + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    engines = [
        _polar._ScEngine(
            llrs[:, lo:hi, :].reshape(batch * (hi - lo), n_cols), counter)
        for lo, hi in chunks
    ]
    pool = ThreadPoolExecutor(max_workers=row_workers) if len(chunks) > 1 else None

    def row_llrs() -> np.ndarray:
        if pool is None:
            parts = [eng.leaf_llr() for eng in engines]
        else:
            parts = list(pool.map(lambda e: e.leaf_llr(), engines))
        return np.concatenate(
            [p.reshape(batch, hi - lo) for p, (lo, hi) in zip(parts, chunks)], axis=1)

    def row_feed(bits: np.ndarray):
        jobs = [(eng, bits[:, lo:hi].reshape(batch * (hi - lo), 1))
                for eng, (lo, hi) in zip(engines, chunks)]
        if pool is None:
            for eng, b in jobs:
                eng.feed(b)
        else:
            list(pool.map(lambda job: job[0].feed(job[1]), jobs))

    info_out = np.zeros((batch, spec.total_info), dtype=np.uint8)
    v_hat = np.zeros((batch, m_len, n_cols), dtype=np.uint8)
    paths_used = []
    crc_selected = []
    crc_fallbacks = 0
    pos = 0
    try:
        for i in range(n_cols):
            lam = row_llrs()
            code = spec.columns[i]
            if code.dimension == 0:
                cw = np.zeros((batch, m_len), dtype=np.uint8)
                paths_used.append(1)
                crc_selected.append(None)
            elif code.kind == "polar":
                u, cw, meta = _polar.scl_decode_batch(
                    lam, code.column_spec, spec.list_sizes[i], code.crc,
                    counter=counter, llr_max=np.inf)
                k = code.dimension
                info_out[:, pos:pos + k] = u[:, code.column_spec.info_positions[:k]]
                pos += k
                paths_used.append(int(meta["path_count"]))
                if code.crc is not None:
                    sel = meta["crc_selected"]
                    crc_selected.append(float(np.mean(sel)))
                    crc_fallbacks += int(np.count_nonzero(~sel))
                else:
                    crc_selected.append(None)
            else:
                cw, info_ints = _inner.ml_decode_batch(code, lam)
                counter.add(batch * (1 << code.dimension) * m_len)
                k = code.dimension
                shifts = np.arange(k - 1, -1, -1, dtype=np.uint32)
                info_out[:, pos:pos + k] = (
                    (info_ints.astype(np.uint32)[:, None] >> shifts) & 1
                ).astype(np.uint8)
                pos += k
                paths_used.append(1)
                crc_selected.append(None)
            v_hat[:, :, i] = cw
            row_feed(cw)
    finally:
        if pool is not None:
            pool.shutdown()
    return info_out, v_hat, paths_used, crc_selected, crc_fallbacks


def concat_decode_batch(llrs: np.ndarray, spec: ConcatSpec,
                        counter: OpCounter | None = None,
                        row_workers: int = 1,
                        llr_max: float = LLR_MAX):
    """Decode (batch, M, N) channel LLR matrices.

    Returns (info, stats) with info of shape (batch, K).  Channel LLRs are
    clamped here; the internal row-to-column LLRs are used unclamped.
    """
    llrs = as_llr_array(llrs, name="channel llrs")
    squeeze = llrs.ndim == 2
    if squeeze:
        llrs = llrs[None, :, :]
    if llrs.ndim != 3 or llrs.shape[1:] != (spec.column_length, spec.n_columns):
        raise ValueError(
            f"expected LLR shape (batch, {spec.column_length}, {spec.n_columns})")
    llrs = clamp_llrs(llrs, llr_max)
    counter = counter if counter is not None else OpCounter()
    start_ops = counter.total
    batch = llrs.shape[0]
    info, v_hat, paths_used, crc_selected, crc_fallbacks = _decode_columns(
        llrs, spec, counter, row_workers)
    stats = DecodeStats(
        list_sizes=spec.list_sizes,
        paths_used=tuple(paths_used),
        crc_selected=tuple(crc_selected),
        crc_fallbacks=crc_fallbacks,
        avg_list_size=float(np.mean(paths_used)),
        op_count=(counter.total - start_ops) / batch,
    )
    if squeeze:
        return info[0], stats
    return info, stats


def concat_decode(channel_llrs, spec: ConcatSpec,
                  row_workers: int = 1,
                  llr_max: float = LLR_MAX):
    """Decode one M x N channel LLR matrix; returns (info bits, DecodeStats)."""
    llrs = as_llr_array(channel_llrs, name="channel llrs")
    if llrs.ndim != 2:
        raise ValueError("channel LLRs must be an M x N matrix")
    return concat_decode_batch(llrs, spec, row_workers=row_workers, llr_max=llr_max)


@dataclass
class ComplexityReport:
    counted_ops: float
    model_ops: float
    ratio: float


def operation_count(stats: DecodeStats, spec: ConcatSpec) -> ComplexityReport:
    """Counted node visits against N M (L_av log2 M + log2 N)."""
    n, m = spec.n_columns, spec.column_length
    model = n * m * (stats.avg_list_size * math.log2(m) + math.log2(n))
    counted = stats.op_count
    return ComplexityReport(counted_ops=counted, model_ops=model,
                            ratio=counted / model if model else math.inf)
