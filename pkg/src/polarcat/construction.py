"""Code construction: quantized LLR density evolution, union-bound error
estimates for the column codes, and the dynamic program that assigns a code
to every column under a total-rate constraint.

Densities live on a uniform grid of step `grid_step` clamped to the extent
the pmf was created with; mass that leaves the grid accumulates at the
boundary atoms.  The check-node transform combines atoms by the exact
box-plus value and rounds back to the grid, so the only approximation is the
requantization.  All operations here are pure; the bit-channel tree is
memoized per channel.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .channel import ChannelParam
from .concat import ConcatSpec
from .crc import CrcConfig
from .inner_codes import InnerCode, weight_spectrum
from .polar import LLR_MAX, PolarSpec

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 1.0 / 16.0
LIST_LADDER = (1, 2, 4, 8, 16)


class InfeasibleRateError(ValueError):
    """No assignment of column codes reaches the requested information total."""


@dataclass
class QuantPmf:
    """Quantized pmf of an LLR value: mass[j] sits at (j - offset) * grid_step."""

    grid_step: float
    offset: int
    masses: np.ndarray

    def __post_init__(self):
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        masses = np.asarray(self.masses, dtype=np.float64)
        if masses.ndim != 1 or masses.size == 0:
            raise ValueError("masses must be a nonempty vector")
        if (masses < 0).any():
            raise ValueError("masses must be nonnegative")
        if not 0 <= self.offset < masses.size:
            raise ValueError("offset must index into masses")
        total = masses.sum()
        if total <= 0:
            raise ValueError("total mass must be positive")
        if total != 1.0:
            if abs(total - 1.0) > 1e-12:
                logger.debug("renormalizing pmf, drift %.3e", total - 1.0)
            masses = masses / total
        self.masses = masses

    @property
    def values(self) -> np.ndarray:
        return (np.arange(self.masses.size) - self.offset) * self.grid_step

    def mean(self) -> float:
        return float(self.values @ self.masses)

    def variance(self) -> float:
        mu = self.mean()
        return float(((self.values - mu) ** 2) @ self.masses)

    @classmethod
    def point_mass(cls, value: float, grid_step: float = DEFAULT_GRID_STEP,
                   clamp: float = LLR_MAX) -> "QuantPmf":
        half = int(round(clamp / grid_step))
        masses = np.zeros(2 * half + 1)
        idx = int(np.clip(round(value / grid_step), -half, half))
        masses[half + idx] = 1.0
        return cls(grid_step=grid_step, offset=half, masses=masses)


def channel_pmf(channel: ChannelParam, grid_step: float = DEFAULT_GRID_STEP,
                clamp: float = LLR_MAX) -> QuantPmf:
    """Quantized LLR distribution given the zero symbol.

    AWGN: N(2/sigma^2, 4/sigma^2) integrated over the grid bins, tails folded
    into the boundary atoms.  BSC(p): atoms +-ln((1-p)/p) with weights (1-p, p).
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if not clamp > 0:
        raise ValueError("clamp must be positive")
    half = int(round(clamp / grid_step))
    masses = np.zeros(2 * half + 1)
    if channel.kind == "awgn":
        mu = 2.0 / channel.sigma ** 2
        sd = 2.0 / channel.sigma
        values = (np.arange(2 * half + 1) - half) * grid_step
        upper = ndtr((values + grid_step / 2 - mu) / sd)
        lower = ndtr((values - grid_step / 2 - mu) / sd)
        masses[:] = upper - lower
        masses[0] += lower[0]
        masses[-1] += 1.0 - upper[-1]
    else:
        p = channel.crossover
        mag = math.log((1.0 - p) / p)
        idx = int(np.clip(round(mag / grid_step), -half, half))
        masses[half + idx] += 1.0 - p
        masses[half - idx] += p
    return QuantPmf(grid_step=grid_step, offset=half, masses=masses)


def _fold_convolve(a: np.ndarray, b: np.ndarray, offset: int, size: int) -> np.ndarray:
    """Convolution of two grids with common zero index, folded back to size."""
    conv = np.convolve(a, b)
    # the output zero bin sits at 2*offset; overflow piles up at the edges
    idx = np.arange(conv.size) - offset
    np.clip(idx, 0, size - 1, out=idx)
    return np.bincount(idx, weights=conv, minlength=size)


_BOXPLUS_CACHE: dict = {}


def _boxplus_index_matrix(grid_step: float, offset: int, size: int) -> np.ndarray:
    key = (grid_step, offset, size)
    cached = _BOXPLUS_CACHE.get(key)
    if cached is None:
        v = (np.arange(size) - offset) * grid_step
        x = v[:, None]
        y = v[None, :]
        z = np.logaddexp(0.0, x + y) - np.logaddexp(x, y)
        idx = np.rint(z / grid_step).astype(np.int64) + offset
        np.clip(idx, 0, size - 1, out=idx)
        cached = idx
        _BOXPLUS_CACHE[key] = cached
    return cached


def de_transform(f: QuantPmf) -> tuple[QuantPmf, QuantPmf]:
    """One density-evolution level: (check-node box-plus, variable-node sum).

    The minus output is the distribution of the box-plus of two independent
    draws (atom pairs combined exactly, then requantized); the plus output is
    the distribution of their sum (discrete convolution).
    """
    size = f.masses.size
    idx = _boxplus_index_matrix(f.grid_step, f.offset, size)
    pair = np.outer(f.masses, f.masses)
    minus = np.bincount(idx.ravel(), weights=pair.ravel(), minlength=size)
    plus = _fold_convolve(f.masses, f.masses, f.offset, size)
    return (QuantPmf(f.grid_step, f.offset, minus),
            QuantPmf(f.grid_step, f.offset, plus))


_TREE_CACHE: dict = {}


def _channel_key(channel: ChannelParam) -> tuple:
    param = channel.sigma if channel.kind == "awgn" else channel.crossover
    return (channel.kind, param)


def bit_channel_tree(channel: ChannelParam, depth: int,
                     grid_step: float = DEFAULT_GRID_STEP,
                     clamp: float = LLR_MAX) -> list:
    """levels[d][i] = pmf of bit-channel i of the depth-d transform (memoized)."""
    key = (_channel_key(channel), grid_step, clamp)
    levels = _TREE_CACHE.get(key)
    if levels is None:
        levels = [[channel_pmf(channel, grid_step, clamp)]]
        _TREE_CACHE[key] = levels
    while len(levels) <= depth:
        nxt = []
        for f in levels[-1]:
            minus, plus = de_transform(f)
            nxt.append(minus)
            nxt.append(plus)
        levels.append(nxt)
    return levels[:depth + 1]


def bit_channel_pmf(channel: ChannelParam, n: int, i: int,
                    grid_step: float = DEFAULT_GRID_STEP,
                    clamp: float = LLR_MAX) -> QuantPmf:
    """Density of the SC LLR for bit i of the length-2**n rate-1 transform.

    Follows the binary expansion of i most-significant bit first; a 0 digit
    takes the check-node (minus) branch, a 1 digit the variable-node (plus)
    branch, matching the natural-order SC recursion.
    """
    if not 0 <= i < (1 << n):
        raise ValueError(f"bit index {i} out of range for n={n}")
    return bit_channel_tree(channel, n, grid_step, clamp)[n][i]


def tail_prob(f: QuantPmf, w: int) -> float:
    """P(sum of w independent draws <= 0); zero is counted as an error."""
    if w < 1:
        raise ValueError("w must be >= 1")
    g = f.masses
    for _ in range(w - 1):
        g = _fold_convolve(g, f.masses, f.offset, f.masses.size)
    return float(g[:f.offset + 1].sum())


def _tail_table(f: QuantPmf, max_w: int) -> np.ndarray:
    """tails[w] = tail_prob(f, w) for w = 1..max_w (same recurrence, shared)."""
    tails = np.zeros(max_w + 1)
    g = f.masses
    tails[1] = g[:f.offset + 1].sum()
    for w in range(2, max_w + 1):
        g = _fold_convolve(g, f.masses, f.offset, f.masses.size)
        tails[w] = g[:f.offset + 1].sum()
    return tails


def estimate_error(f: QuantPmf, code: InnerCode) -> float:
    """Minimum-weight union-bound estimate: multiplicity * P(f, distance).

    The zero code never errs.  For CRC-constrained polar columns the spectrum
    of the CRC-consistent subcode is used, treating the list decoder as ML
    (an optimistic proxy).
    """
    if code.dimension == 0:
        return 0.0
    d, mult = weight_spectrum(code)
    return float(np.clip(mult * tail_prob(f, d), 0.0, 1.0))


@dataclass
class ErrorTable:
    """estimates[i, k]: error proxy for column i using family code k."""

    estimates: np.ndarray
    dims: tuple

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=np.float64)
        if est.ndim != 2 or est.shape[1] != len(self.dims):
            raise ValueError("estimates must be (n_columns, n_codes)")
        if ((est < 0) | (est > 1)).any():
            raise ValueError("estimates must lie in [0, 1]")
        zero_dims = [k for k, d in enumerate(self.dims) if d == 0]
        if zero_dims and est[:, zero_dims].any():
            raise ValueError("zero-dimension codes must have zero estimates")
        self.estimates = est
        self.dims = tuple(int(d) for d in self.dims)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("i,k,E_i_k\n")
            for i in range(self.estimates.shape[0]):
                for k in range(self.estimates.shape[1]):
                    fh.write(f"{i},{k},{self.estimates[i, k]!r}\n")


def dp_assign(table: ErrorTable, k_target: int) -> np.ndarray:
    """Exact minimizer of the summed estimates subject to the rate constraint.

    Dynamic program over (column, accumulated information bits); ties prefer
    the smaller family index.  Raises InfeasibleRateError when no assignment
    reaches k_target.
    """
    est = table.estimates
    dims = np.array(table.dims, dtype=np.int64)
    n_cols, n_codes = est.shape
    if k_target < 0:
        raise InfeasibleRateError("k_target must be nonnegative")
    cost = np.full(k_target + 1, np.inf)
    cost[0] = 0.0
    choice = np.full((n_cols, k_target + 1), -1, dtype=np.int64)
    for i in range(n_cols):
        new = np.full(k_target + 1, np.inf)
        for k in range(n_codes):
            kk = dims[k]
            if kk > k_target:
                continue
            cand = np.full(k_target + 1, np.inf)
            cand[kk:] = cost[:k_target + 1 - kk] + est[i, k]
            better = cand < new
            new[better] = cand[better]
            choice[i, better] = k
        cost = new
    if not np.isfinite(cost[k_target]):
        reachable = np.flatnonzero(np.isfinite(cost))
        hi = int(reachable.max()) if reachable.size else 0
        raise InfeasibleRateError(
            f"no assignment yields {k_target} information bits "
            f"(largest reachable total <= {k_target}: {hi})")
    assign = np.zeros(n_cols, dtype=np.int64)
    s = k_target
    for i in range(n_cols - 1, -1, -1):
        k = int(choice[i, s])
        assign[i] = k
        s -= int(dims[k])
    assert s == 0
    return assign


def assignment_bound(table: ErrorTable, assignments) -> float:
    idx = np.arange(len(assignments))
    return float(table.estimates[idx, np.asarray(assignments)].sum())


def construct_polar_spec(channel: ChannelParam, block_length: int,
                         unfrozen_count: int,
                         grid_step: float = DEFAULT_GRID_STEP,
                         clamp: float = LLR_MAX) -> PolarSpec:
    """Classical construction: unfreeze the positions with the smallest
    density-evolution error probability."""
    if block_length & (block_length - 1):
        raise ValueError("block_length must be a power of two")
    if not 0 <= unfrozen_count <= block_length:
        raise ValueError("unfrozen_count out of range")
    n = block_length.bit_length() - 1
    leaves = bit_channel_tree(channel, n, grid_step, clamp)[n]
    errs = np.array([f.masses[:f.offset + 1].sum() for f in leaves])
    order = np.argsort(errs, kind="stable")
    mask = np.ones(block_length, dtype=bool)
    mask[order[:unfrozen_count]] = False
    return PolarSpec.from_frozen_mask(mask)


def _list_size_profile(errors: np.ndarray, active: np.ndarray,
                       target: float | None) -> np.ndarray:
    """Ladder list sizes by error quantile: the worst columns are stepped up
    first (to the ladder cap) until the average over all columns reaches the
    target, so well-polarized columns keep small lists."""
    sizes = np.ones(errors.size, dtype=np.int64)
    if target is None or not active.any():
        return sizes
    order = np.argsort(-errors, kind="stable")
    order = [c for c in order if active[c]]
    max_l = LIST_LADDER[-1]
    while sizes.mean() < target - 1e-9:
        col = next((c for c in order if sizes[c] < max_l), None)
        if col is None:
            break
        sizes[col] *= 2
    return sizes


@dataclass
class ConstructionResult:
    spec: ConcatSpec
    bound: float
    table: ErrorTable
    assignments: np.ndarray
    column_errors: np.ndarray


# Candidate masks are kept to spectra enumerable through a 2^16-word side so
# construction stays fast; only column lengths above 32 are actually filtered.
_CANDIDATE_ENUM_CAP = 16


def _polar_family_candidates(column_length: int, crc: CrcConfig | None) -> list:
    """(net dimension, crc or None) candidates, limited to enumerable spectra.

    When a CRC is configured, every dimension is offered both plain and
    CRC-constrained and the dynamic program decides column by column where
    the check bits pay for themselves.
    """
    cands: list[tuple[int, CrcConfig | None]] = [(0, None)]
    for k in range(1, column_length + 1):
        if min(k, column_length - k) <= _CANDIDATE_ENUM_CAP:
            cands.append((k, None))
    if crc is not None:
        r = crc.degree
        for k in range(1, column_length - r + 1):
            total = k + r
            if min(total, column_length - total) <= _CANDIDATE_ENUM_CAP:
                cands.append((k, crc))
    return cands


def construct_concat_spec(channel: ChannelParam, family, n_columns: int,
                          column_length: int, k_target: int,
                          crc: CrcConfig | None = None,
                          list_target: float | None = None,
                          grid_step: float = DEFAULT_GRID_STEP,
                          clamp: float = LLR_MAX) -> ConstructionResult:
    """Build a complete concatenated-code description for a channel.

    family is either the string "polar" (per-column polar codes whose frozen
    masks adapt to each column channel, optionally CRC-constrained) or a
    sequence of InnerCode values of the column length (decoded by soft ML; no
    CRC in that mode).  Returns the spec plus the predicted union-bound sum.
    """
    if n_columns & (n_columns - 1) or n_columns < 1:
        raise ValueError("n_columns must be a power of two")
    n = n_columns.bit_length() - 1
    col_pmfs = bit_channel_tree(channel, n, grid_step, clamp)[n]

    if isinstance(family, str):
        if family != "polar":
            raise ValueError(f"unknown family {family!r}")
        if column_length & (column_length - 1):
            raise ValueError("polar columns need a power-of-two column length")
        m = column_length.bit_length() - 1
        cands = _polar_family_candidates(column_length, crc)
        cand_dims = tuple(k for k, _ in cands)
        leaves = bit_channel_tree(channel, n + m, grid_step, clamp)[n + m]
        est = np.zeros((n_columns, len(cands)))
        col_codes: list[list[InnerCode | None]] = []
        for i in range(n_columns):
            leaf_err = np.array([
                leaves[i * column_length + j].masses[:leaves[0].offset + 1].sum()
                for j in range(column_length)])
            rel_order = np.argsort(leaf_err, kind="stable")
            tails = _tail_table(col_pmfs[i], column_length)
            row_codes: list[InnerCode | None] = []
            for c, (kdim, kcrc) in enumerate(cands):
                if kdim == 0:
                    row_codes.append(None)
                    continue
                total = kdim + (0 if kcrc is None else kcrc.degree)
                mask = np.ones(column_length, dtype=bool)
                mask[rel_order[:total]] = False
                cspec = PolarSpec.from_frozen_mask(mask)
                code = InnerCode.polar_column(cspec, kcrc)
                d, mult = weight_spectrum(code)
                est[i, c] = np.clip(mult * tails[d], 0.0, 1.0)
                row_codes.append(code)
            col_codes.append(row_codes)
        table = ErrorTable(estimates=est, dims=cand_dims)
        cand_assign = dp_assign(table, k_target)
        column_errors = est[np.arange(n_columns), cand_assign]
        active = np.array([cand_dims[c] > 0 for c in cand_assign])
        sizes = _list_size_profile(column_errors, active, list_target)
        # Dedupe per-column masks into a family; the CRC stays per column.
        family_entries: list[InnerCode] = []
        mask_index: dict = {}
        assignments = []
        crcs = []
        for i, c in enumerate(cand_assign):
            if cand_dims[c] == 0:
                mask = np.ones(column_length, dtype=bool)
            else:
                mask = col_codes[i][c].column_spec.frozen_mask
            key = mask.tobytes()
            if key not in mask_index:
                mask_index[key] = len(family_entries)
                family_entries.append(InnerCode.polar_column(
                    PolarSpec.from_frozen_mask(mask), None))
            assignments.append(mask_index[key])
            crcs.append(cands[c][1] if cand_dims[c] > 0 else None)
        spec = ConcatSpec(
            column_length=column_length, n_columns=n_columns,
            total_info=k_target, family=tuple(family_entries),
            assignments=tuple(assignments), list_sizes=tuple(int(s) for s in sizes),
            column_crcs=tuple(crcs))
        return ConstructionResult(
            spec=spec, bound=assignment_bound(table, cand_assign), table=table,
            assignments=cand_assign, column_errors=column_errors)

    codes = tuple(family)
    if crc is not None:
        raise ValueError("per-column CRCs apply to polar columns only")
    for code in codes:
        if code.length != column_length:
            raise ValueError("family codes must match the column length")
    est = np.zeros((n_columns, len(codes)))
    max_d = 0
    spectra = []
    for code in codes:
        if code.dimension == 0:
            spectra.append((0, 0))
        else:
            spectra.append(weight_spectrum(code))
            max_d = max(max_d, spectra[-1][0])
    for i in range(n_columns):
        tails = _tail_table(col_pmfs[i], max(max_d, 1))
        for k, code in enumerate(codes):
            if code.dimension == 0:
                continue
            d, mult = spectra[k]
            est[i, k] = np.clip(mult * tails[d], 0.0, 1.0)
    table = ErrorTable(estimates=est, dims=tuple(c.dimension for c in codes))
    assignments = dp_assign(table, k_target)
    column_errors = est[np.arange(n_columns), assignments]
    spec = ConcatSpec(
        column_length=column_length, n_columns=n_columns, total_info=k_target,
        family=codes, assignments=tuple(int(a) for a in assignments),
        list_sizes=(1,) * n_columns, column_crcs=(None,) * n_columns)
    return ConstructionResult(
        spec=spec, bound=assignment_bound(table, assignments), table=table,
        assignments=assignments, column_errors=column_errors)
