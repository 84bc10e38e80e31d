"""Rate-1 polar transform and successive-cancellation (SC / SC-list) decoding.

Bit order is natural throughout: the generator is the n-fold Kronecker power
of [[1, 0], [1, 1]] with no bit-reversal permutation.  That matrix is an
involution over GF(2), so the same butterfly encodes and inverts.

The decoders share one stepwise engine (`_ScEngine`) that operates on a batch
of independent LLR rows plus an optional path axis, so the same code drives
plain SC, SC-list and the externally-driven row steppers used by the
concatenated decoder.  A decoder instance must not be shared between threads
during a decode; distinct instances are independent.
"""

from dataclasses import dataclass

import numpy as np

from .crc import CrcConfig, crc_remainder_batch
from .validation import as_bit_array, as_llr_array

# Channel LLRs are clamped to +-LLR_MAX on ingestion so internal arithmetic
# stays finite (no inf - inf in the box-plus).
LLR_MAX = 40.0


def clamp_llrs(llrs, llr_max: float = LLR_MAX) -> np.ndarray:
    return np.clip(np.asarray(llrs, dtype=np.float64), -llr_max, llr_max)


@dataclass
class PolarSpec:
    """Polar code description: length 2**n with a boolean frozen mask."""

    n: int
    block_length: int
    frozen_mask: np.ndarray
    info_count: int

    def __post_init__(self):
        self.frozen_mask = np.asarray(self.frozen_mask, dtype=bool)
        if self.block_length != 1 << self.n:
            raise ValueError("block_length must equal 2**n")
        if self.frozen_mask.shape != (self.block_length,):
            raise ValueError("frozen_mask length must equal block_length")
        if self.info_count != int(np.count_nonzero(~self.frozen_mask)):
            raise ValueError("info_count inconsistent with frozen_mask")

    @classmethod
    def from_frozen_mask(cls, frozen_mask) -> "PolarSpec":
        mask = np.asarray(frozen_mask, dtype=bool)
        size = mask.size
        n = int(size - 1).bit_length()
        return cls(n=n, block_length=size, frozen_mask=mask,
                   info_count=int(np.count_nonzero(~mask)))

    @classmethod
    def rate_one(cls, block_length: int) -> "PolarSpec":
        return cls.from_frozen_mask(np.zeros(block_length, dtype=bool))

    @property
    def info_positions(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)


def polar_encode(u, spec: PolarSpec | None = None) -> np.ndarray:
    """Encode u with the rate-1 transform x = u G (frozen mask not applied here)."""
    x = as_bit_array(u)
    size = x.shape[-1]
    if spec is not None and size != spec.block_length:
        raise ValueError(f"expected length {spec.block_length}, got {size}")
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    x = x.copy(order="C")
    h = 1
    while h < size:
        blocks = x.reshape(x.shape[:-1] + (size // (2 * h), 2 * h))
        blocks[..., :h] ^= blocks[..., h:]
        h *= 2
    return x


def embed_info(info, spec: PolarSpec) -> np.ndarray:
    """Place information bits at the unfrozen positions of a u-vector."""
    info = as_bit_array(info)
    if info.shape[-1] != spec.info_count:
        raise ValueError(f"expected {spec.info_count} info bits, got {info.shape[-1]}")
    u = np.zeros(info.shape[:-1] + (spec.block_length,), dtype=np.uint8)
    u[..., spec.info_positions] = info
    return u


def extract_info(u, spec: PolarSpec) -> np.ndarray:
    return as_bit_array(u)[..., spec.info_positions]


def _boxplus(a, b):
    # Exact LLR check-node combination, stable for |a|, |b| up to ~1e300:
    # ln((1 + e^{a+b}) / (e^a + e^b)).
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def _softplus(x):
    return np.logaddexp(0.0, x)


class OpCounter:
    """Counts elementary decoder node visits (scalar f/g evaluations)."""

    __slots__ = ("total",)

    def __init__(self):
        self.total = 0

    def add(self, amount: int):
        self.total += int(amount)


def _trailing_zeros(i: int) -> int:
    return (i & -i).bit_length() - 1


class _ScEngine:
    """Batched stepwise SC recursion over (batch, path, position) arrays.

    The engine holds the LLR buffers of the active tree node at every depth
    plus the left-child codeword awaiting its sibling.  Two tricks keep list
    decoding cheap: buffers stay width 1 along the path axis until their
    content actually diverges between paths, and `gather` only composes a
    per-depth path permutation, applied lazily when a buffer is next read.
    """

    def __init__(self, channel_llrs: np.ndarray, counter: OpCounter | None = None,
                 track_decisions: bool = True):
        chan = np.asarray(channel_llrs, dtype=np.float64)
        if chan.ndim != 2:
            raise ValueError("channel LLRs must be (batch, N)")
        self.batch, self.size = chan.shape
        if self.size & (self.size - 1):
            raise ValueError("N must be a power of two")
        self.n = self.size.bit_length() - 1
        self.paths = 1
        self.counter = counter
        self._chan = chan[:, None, :]
        self._llr: list[np.ndarray | None] = [None] * (self.n + 1)
        self._low: list[np.ndarray] = [
            np.zeros((self.batch, 1, self.size >> (d + 1)), dtype=np.uint8)
            for d in range(self.n)
        ]
        self._perm_llr: list[np.ndarray | None] = [None] * (self.n + 1)
        self._perm_low: list[np.ndarray | None] = [None] * self.n
        self._track = track_decisions
        self._u = np.zeros((self.batch, 1, self.size), dtype=np.uint8) \
            if track_decisions else None
        self._x: np.ndarray | None = None
        self.leaf = 0
        self._cached_llr: np.ndarray | None = None

    def _llr_buf(self, d: int) -> np.ndarray:
        """Parent LLR buffer at depth d, path permutation applied."""
        if d == 0:
            return self._chan
        buf = self._llr[d]
        perm = self._perm_llr[d]
        if perm is not None:
            buf = np.take_along_axis(buf, perm[:, :, None], axis=1)
            self._llr[d] = buf
            self._perm_llr[d] = None
        return buf

    def _low_buf(self, d: int) -> np.ndarray:
        buf = self._low[d]
        perm = self._perm_low[d]
        if perm is not None:
            buf = np.take_along_axis(buf, perm[:, :, None], axis=1)
            self._low[d] = buf
            self._perm_low[d] = None
        return buf

    def leaf_llr(self) -> np.ndarray:
        """LLR of the current leaf for every (batch, path); idempotent."""
        if self.leaf >= self.size:
            raise RuntimeError("all bits already decided")
        if self._cached_llr is not None:
            return self._cached_llr
        i, n = self.leaf, self.n
        first = 1 if i == 0 else n - _trailing_zeros(i)
        for d in range(first, n + 1):
            m = self.size >> d
            parent = self._llr_buf(d - 1)
            if (i >> (n - d)) & 1 == 0:
                val = _boxplus(parent[..., :m], parent[..., m:])
            else:
                sign = 1.0 - 2.0 * self._low_buf(d - 1)
                val = parent[..., m:] + sign * parent[..., :m]
            self._llr[d] = val
            self._perm_llr[d] = None
            if self.counter is not None:
                self.counter.add(self.batch * self.paths * m)
        out = self._llr_buf(n)[..., 0]
        if out.shape[1] != self.paths:
            out = np.broadcast_to(out, (self.batch, self.paths))
        self._cached_llr = out
        return out

    def feed(self, bits: np.ndarray):
        """Decide the current leaf and propagate partial sums upward."""
        if self.leaf >= self.size:
            raise RuntimeError("all bits already decided")
        i, n = self.leaf, self.n
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (self.batch, self.paths):
            bits = np.broadcast_to(bits, (self.batch, self.paths))
        if self._track:
            if self._u.shape[1] != self.paths:
                self._u = np.broadcast_to(
                    self._u, (self.batch, self.paths, self.size)).copy()
            self._u[:, :, i] = bits
        cw = bits[:, :, None]
        d = n
        while d >= 1 and (i >> (n - d)) & 1 == 1:
            left = self._low_buf(d - 1)
            cw = np.concatenate(np.broadcast_arrays(left ^ cw, cw), axis=2)
            d -= 1
        if d == 0:
            self._x = cw
        else:
            self._low[d - 1] = cw
            self._perm_low[d - 1] = None
        self.leaf += 1
        self._cached_llr = None

    def gather(self, parents: np.ndarray):
        """Reorder the path axis: new path p descends from old path parents[b, p]."""
        for d in range(1, self.n + 1):
            buf = self._llr[d]
            if buf is not None and buf.shape[1] > 1:
                perm = self._perm_llr[d]
                self._perm_llr[d] = parents if perm is None else \
                    np.take_along_axis(perm, parents, axis=1)
        for d in range(self.n):
            if self._low[d].shape[1] > 1:
                perm = self._perm_low[d]
                self._perm_low[d] = parents if perm is None else \
                    np.take_along_axis(perm, parents, axis=1)
        if self._track:
            if self._u.shape[1] > 1:
                self._u = np.take_along_axis(self._u, parents[:, :, None], axis=1)
            else:
                self._u = np.broadcast_to(
                    self._u, (self.batch, parents.shape[1], self.size)).copy()
        self.paths = parents.shape[1]
        self._cached_llr = None

    @property
    def decisions(self) -> np.ndarray:
        if self._u is None:
            raise RuntimeError("decision tracking disabled")
        return self._u

    @property
    def codeword(self) -> np.ndarray:
        if self._x is None:
            raise RuntimeError("decode not finished")
        return self._x


class RowDecoderState:
    """Stepwise SC state for one rate-1 row; bit decisions come from outside.

    Safe to move between threads between steps; not shareable during a step.
    """

    def __init__(self, channel_llrs, llr_max: float = LLR_MAX,
                 counter: OpCounter | None = None):
        llrs = as_llr_array(channel_llrs)
        if llrs.ndim != 1:
            raise ValueError("channel LLRs must be one-dimensional")
        self.channel_llrs = clamp_llrs(llrs, llr_max)
        self._engine = _ScEngine(self.channel_llrs[None, :], counter)
        self._decided: list[int] = []

    @property
    def block_length(self) -> int:
        return self._engine.size

    @property
    def decided_bits(self) -> np.ndarray:
        return np.array(self._decided, dtype=np.uint8)

    def llr(self, index: int) -> float:
        if index != len(self._decided):
            raise ValueError(
                f"out-of-order step: position {index} queried with "
                f"{len(self._decided)} bits decided")
        return float(self._engine.leaf_llr()[0, 0])

    def feed(self, bit: int):
        if len(self._decided) >= self.block_length:
            raise ValueError("all positions already decided")
        bit = int(bit) & 1
        self._engine.feed(np.array([[bit]], dtype=np.uint8))
        self._decided.append(bit)

    def codeword(self) -> np.ndarray:
        return self._engine.codeword[0, 0]


def row_step_llr(state: RowDecoderState, index: int) -> float:
    """Exact SC LLR of position `index` given the decided prefix."""
    return state.llr(index)


def row_step_feed(state: RowDecoderState, bit: int) -> RowDecoderState:
    state.feed(bit)
    return state


def sc_decode_batch(llrs: np.ndarray, spec: PolarSpec,
                    counter: OpCounter | None = None,
                    llr_max: float = LLR_MAX) -> np.ndarray:
    """Greedy SC decode of a (batch, N) LLR array; returns u-vectors."""
    llrs = clamp_llrs(llrs, llr_max)
    if llrs.ndim == 1:
        llrs = llrs[None, :]
    if llrs.shape[1] != spec.block_length:
        raise ValueError(f"expected {spec.block_length} LLRs, got {llrs.shape[1]}")
    eng = _ScEngine(llrs, counter)
    frozen = spec.frozen_mask
    zeros = np.zeros((eng.batch, 1), dtype=np.uint8)
    for i in range(spec.block_length):
        lam = eng.leaf_llr()
        if frozen[i]:
            eng.feed(zeros)
        else:
            eng.feed((lam < 0).astype(np.uint8))
    return eng.decisions[:, 0, :]


def sc_decode(llrs, spec: PolarSpec, llr_max: float = LLR_MAX) -> np.ndarray:
    """SC decode one LLR vector; frozen positions forced to 0."""
    llrs = as_llr_array(llrs)
    if llrs.ndim != 1:
        raise ValueError("llrs must be one-dimensional")
    return sc_decode_batch(llrs[None, :], spec, llr_max=llr_max)[0]


@dataclass
class SclMeta:
    """Per-frame list-decoder outcome."""

    path_count: int
    crc_selected: bool
    crc_passed: bool
    metric: float


def _crc_pass(seqs: np.ndarray, crc: CrcConfig) -> np.ndarray:
    """True where the trailing crc bits of (..., L) sequences match."""
    data = seqs[..., :-crc.degree]
    tail = seqs[..., -crc.degree:]
    rem = crc_remainder_batch(data, crc)
    return np.all(rem == tail, axis=-1)


def scl_decode_batch(llrs: np.ndarray, spec: PolarSpec, list_size: int,
                     crc: CrcConfig | None = None,
                     counter: OpCounter | None = None,
                     llr_max: float = LLR_MAX,
                     return_lists: bool = False):
    """CRC-aided SC list decode of a (batch, N) LLR array.

    Path metric is the exact negative log-posterior accumulated along the SC
    chain rule: deciding u at a leaf with LLR lam adds softplus(-(1-2u) lam),
    so the lowest final metric is the most likely path.  With no CRC the best-metric path wins;
    with a CRC the best-metric path that checks wins, falling back to the
    best metric overall when none do (flagged in the metadata).

    Returns (u, x, meta) where u/x are (batch, N) and meta is a dict of
    per-frame arrays; with return_lists=True the full final lists are added.
    """
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    llrs = clamp_llrs(llrs, llr_max)
    if llrs.ndim == 1:
        llrs = llrs[None, :]
    if llrs.shape[1] != spec.block_length:
        raise ValueError(f"expected {spec.block_length} LLRs, got {llrs.shape[1]}")
    if crc is not None and spec.info_count <= crc.degree:
        raise ValueError("info_count must exceed the CRC degree")
    batch = llrs.shape[0]
    eng = _ScEngine(llrs, counter, track_decisions=False)
    frozen = spec.frozen_mask
    metrics = np.zeros((batch, 1))
    # Decisions are reconstructed afterwards from the per-leaf fork history,
    # which avoids reordering a (batch, paths, N) array at every prune.
    dec_hist: list[np.ndarray | None] = []
    parent_hist: list[np.ndarray | None] = []
    for i in range(spec.block_length):
        lam = eng.leaf_llr()
        paths = eng.paths
        if frozen[i]:
            metrics = metrics + _softplus(-lam)
            eng.feed(np.zeros((batch, paths), dtype=np.uint8))
            dec_hist.append(None)
            parent_hist.append(None)
            continue
        cand = np.concatenate([metrics + _softplus(-lam),
                               metrics + _softplus(lam)], axis=1)
        if 2 * paths <= list_size:
            parents = np.broadcast_to(
                np.tile(np.arange(paths), 2), (batch, 2 * paths))
            bits = np.broadcast_to(
                np.repeat(np.array([0, 1], dtype=np.uint8), paths),
                (batch, 2 * paths))
            metrics = cand
        else:
            # Stable sort keeps the lowest candidate index on metric ties:
            # bit-0 children precede bit-1 children of the same parent.
            order = np.argsort(cand, axis=1, kind="stable")[:, :list_size]
            parents = order % paths
            bits = (order // paths).astype(np.uint8)
            metrics = np.take_along_axis(cand, order, axis=1)
        eng.gather(parents)
        eng.feed(bits)
        dec_hist.append(bits)
        parent_hist.append(parents)
    u_all = np.zeros((batch, eng.paths, spec.block_length), dtype=np.uint8)
    cur = np.broadcast_to(np.arange(eng.paths), (batch, eng.paths))
    for i in range(spec.block_length - 1, -1, -1):
        if dec_hist[i] is not None:
            u_all[:, :, i] = np.take_along_axis(dec_hist[i], cur, axis=1)
            cur = np.take_along_axis(parent_hist[i], cur, axis=1)
    info_all = u_all[:, :, spec.info_positions]
    rank = np.argsort(metrics, axis=1, kind="stable")
    if crc is not None:
        passes = _crc_pass(info_all, crc)
        pass_ranked = np.take_along_axis(passes, rank, axis=1)
        any_pass = pass_ranked.any(axis=1)
        first_pass = np.argmax(pass_ranked, axis=1)
        pick_rank = np.where(any_pass, first_pass, 0)
    else:
        passes = np.zeros(info_all.shape[:2], dtype=bool)
        any_pass = np.zeros(batch, dtype=bool)
        pick_rank = np.zeros(batch, dtype=np.int64)
    pick = np.take_along_axis(rank, pick_rank[:, None], axis=1)
    u = np.take_along_axis(u_all, pick[:, :, None], axis=1)[:, 0, :]
    x = np.take_along_axis(eng.codeword, pick[:, :, None], axis=1)[:, 0, :]
    meta = {
        "path_count": eng.paths,
        "crc_selected": any_pass,
        "crc_passed": np.take_along_axis(passes, pick, axis=1)[:, 0],
        "metric": np.take_along_axis(metrics, pick, axis=1)[:, 0],
    }
    if return_lists:
        meta["list_u"] = u_all
        meta["list_metrics"] = metrics
    return u, x, meta


def scl_decode(llrs, spec: PolarSpec, list_size: int,
               crc: CrcConfig | None = None,
               llr_max: float = LLR_MAX) -> tuple[np.ndarray, SclMeta]:
    """List decode one LLR vector; returns (u, metadata)."""
    llrs = as_llr_array(llrs)
    if llrs.ndim != 1:
        raise ValueError("llrs must be one-dimensional")
    u, _, meta = scl_decode_batch(llrs[None, :], spec, list_size, crc,
                                  llr_max=llr_max)
    return u[0], SclMeta(path_count=int(meta["path_count"]),
                         crc_selected=bool(meta["crc_selected"][0]),
                         crc_passed=bool(meta["crc_passed"][0]),
                         metric=float(meta["metric"][0]))
