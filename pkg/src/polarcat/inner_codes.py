"""Short linear block codes over GF(2) with soft maximum-likelihood decoding.

These are the column codes of the concatenated construction.  Two kinds exist:
explicit-generator codes, and polar columns (a polar code of the column length,
optionally constrained by a per-column CRC) which delegate their decoding to
:mod:`polarcat.polar` but still expose a generator here so spectra and sanity
checks treat both kinds uniformly.

All values are immutable after construction and safe to share across threads.
"""

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import polar as _polar
from .crc import CrcConfig, crc_append
from .validation import as_bit_array, as_llr_array

# Brute-force enumeration cap: 2^20 words keeps spectra and ML search cheap.
ENUM_MAX_DIM = 20


def _gf2_rank(matrix: np.ndarray) -> int:
    m = matrix.astype(np.uint8).copy()
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivots = np.flatnonzero(m[rank:, col]) + rank
        if pivots.size == 0:
            continue
        p = pivots[0]
        m[[rank, p]] = m[[p, rank]]
        hits = np.flatnonzero(m[:, col])
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_nullspace(matrix: np.ndarray) -> np.ndarray:
    """Basis of {x : matrix @ x = 0 mod 2}, rows are basis vectors."""
    rows, cols = matrix.shape
    m = matrix.astype(np.uint8).copy()
    pivot_cols = []
    r = 0
    for c in range(cols):
        pivots = np.flatnonzero(m[r:, c]) + r
        if pivots.size == 0:
            continue
        p = pivots[0]
        m[[r, p]] = m[[p, r]]
        hits = np.flatnonzero(m[:, c])
        hits = hits[hits != r]
        m[hits] ^= m[r]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    free_cols = [c for c in range(cols) if c not in pivot_cols]
    basis = np.zeros((len(free_cols), cols), dtype=np.uint8)
    for k, fc in enumerate(free_cols):
        basis[k, fc] = 1
        for i, pc in enumerate(pivot_cols):
            basis[k, pc] = m[i, fc]
    return basis


def _enumerate_codewords(generator: np.ndarray) -> np.ndarray:
    """All 2^K codewords, row index = information word as an MSB-first integer.

    Built by doubling: appending row j toggles it onto a copy of the block of
    codewords spanned by rows j+1.., which keeps the MSB-first index order.
    """
    k, m = generator.shape
    if k > ENUM_MAX_DIM:
        raise ValueError(f"dimension {k} exceeds enumeration cap {ENUM_MAX_DIM}")
    cb = np.zeros((1, m), dtype=np.uint8)
    for row in generator[::-1]:
        cb = np.concatenate([cb, cb ^ row[None, :]], axis=0)
    return cb


@functools.lru_cache(maxsize=8)
def _krawtchouk_table(m: int) -> tuple:
    """K[j][i] = sum_l (-1)^l C(i, l) C(m - i, j - l), exact integers."""
    table = []
    for j in range(m + 1):
        row = []
        for i in range(m + 1):
            total = 0
            for l in range(j + 1):
                total += (-1) ** l * math.comb(i, l) * math.comb(m - i, j - l)
            row.append(total)
        table.append(tuple(row))
    return tuple(table)


def _spectrum_from_dual(generator: np.ndarray) -> np.ndarray:
    """Weight distribution via the dual code and the MacWilliams identity."""
    k, m = generator.shape
    dual = _gf2_nullspace(generator)
    dual_words = _enumerate_codewords(dual)
    dual_weights = dual_words.sum(axis=1, dtype=np.int64)
    b = [int(c) for c in np.bincount(dual_weights, minlength=m + 1)]
    kraw = _krawtchouk_table(m)
    dual_size = 1 << (m - k)
    dist = []
    for j in range(m + 1):
        acc = sum(b[i] * kraw[j][i] for i in range(m + 1) if b[i])
        q, rem = divmod(acc, dual_size)
        if rem != 0 or q < 0:
            raise ArithmeticError("MacWilliams transform produced a non-integer count")
        dist.append(q)
    return dist


@dataclass
class InnerCode:
    """A (length, dimension) linear code given by its generator matrix.

    dimension counts net information bits; for polar columns with a CRC the
    generator already spans only the CRC-consistent codewords.
    """

    length: int
    dimension: int
    generator: np.ndarray
    kind: str = "generator"
    column_spec: "_polar.PolarSpec | None" = None
    crc: CrcConfig | None = None
    _codebook: np.ndarray | None = field(default=None, repr=False, compare=False)
    _spectrum: tuple[int, int] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        gen = as_bit_array(self.generator, name="generator")
        gen = gen.reshape((self.dimension, self.length)) if gen.size else \
            np.zeros((0, self.length), dtype=np.uint8)
        if gen.shape != (self.dimension, self.length):
            raise ValueError("generator shape must be (dimension, length)")
        if self.dimension and _gf2_rank(gen) != self.dimension:
            raise ValueError("generator rows must be linearly independent")
        self.generator = gen

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_generator(cls, matrix) -> "InnerCode":
        gen = as_bit_array(matrix, name="generator")
        if gen.ndim != 2:
            raise ValueError("generator must be 2-D")
        return cls(length=gen.shape[1], dimension=gen.shape[0], generator=gen)

    @classmethod
    def zero(cls, length: int) -> "InnerCode":
        return cls(length=length, dimension=0,
                   generator=np.zeros((0, length), dtype=np.uint8))

    @classmethod
    def identity(cls, length: int) -> "InnerCode":
        return cls(length=length, dimension=length,
                   generator=np.eye(length, dtype=np.uint8))

    @classmethod
    def repetition(cls, length: int) -> "InnerCode":
        return cls(length=length, dimension=1,
                   generator=np.ones((1, length), dtype=np.uint8))

    @classmethod
    def polar_column(cls, spec: "_polar.PolarSpec",
                     crc: CrcConfig | None = None) -> "InnerCode":
        """Polar column code; CRC bits (if any) sit in the last unfrozen slots."""
        r = 0 if crc is None else crc.degree
        dim = spec.info_count - r
        if dim < 0:
            raise ValueError("CRC degree exceeds the unfrozen positions")
        if dim == 0 and spec.info_count > 0:
            raise ValueError("a CRC needs at least one information bit")
        if dim:
            info = np.eye(dim, dtype=np.uint8)
            gen = _polar_column_encode(info, spec, crc)
        else:
            gen = np.zeros((0, spec.block_length), dtype=np.uint8)
        return cls(length=spec.block_length, dimension=dim, generator=gen,
                   kind="polar", column_spec=spec, crc=crc)

    # -- core operations -------------------------------------------------

    def codebook(self) -> np.ndarray:
        if self._codebook is None:
            self._codebook = _enumerate_codewords(self.generator)
        return self._codebook


def _polar_column_encode(info: np.ndarray, spec: "_polar.PolarSpec",
                         crc: CrcConfig | None) -> np.ndarray:
    payload = crc_append(info, crc) if crc is not None else info
    u = _polar.embed_info(payload, spec)
    return _polar.polar_encode(u)


def encode(code: InnerCode, info) -> np.ndarray:
    """info @ generator over GF(2); accepts a leading batch axis."""
    info = as_bit_array(info)
    if info.shape[-1] != code.dimension:
        raise ValueError(f"expected {code.dimension} info bits, got {info.shape[-1]}")
    if code.dimension == 0:
        return np.zeros(info.shape[:-1] + (code.length,), dtype=np.uint8)
    if code.kind == "polar":
        return _polar_column_encode(info, code.column_spec, code.crc)
    return (info @ code.generator) % 2


def ml_decode_batch(code: InnerCode, lam: np.ndarray):
    """Soft ML decode of (..., M) LLR arrays; returns (codewords, info ints).

    Minimizes the correlation cost sum_j c_j lam_j over the codebook;
    ties go to the smallest information word read as an MSB-first integer.
    """
    lam = as_llr_array(lam, n_values=code.length, name="lambda")
    if code.dimension == 0:
        zeros = np.zeros(lam.shape[:-1] + (code.length,), dtype=np.uint8)
        return zeros, np.zeros(lam.shape[:-1], dtype=np.int64)
    cb = code.codebook()
    cost = lam @ cb.T.astype(np.float64)
    best = np.argmin(cost, axis=-1)
    return cb[best], best


def ml_decode(code: InnerCode, lam) -> np.ndarray:
    """Codeword minimizing the soft correlation cost for one LLR vector."""
    lam = as_llr_array(lam, name="lambda")
    if lam.ndim != 1:
        raise ValueError("lambda must be one-dimensional")
    cw, _ = ml_decode_batch(code, lam[None, :])
    return cw[0]


def weight_spectrum(code: InnerCode) -> tuple[int, int]:
    """(minimum nonzero weight, multiplicity), exhaustively enumerated.

    The zero code has no nonzero codewords and reports (0, 0).  Codes whose
    dimension and codimension both exceed the enumeration cap are rejected;
    high-rate codes are handled through the dual spectrum.
    """
    if code.dimension == 0:
        return (0, 0)
    if code._spectrum is not None:
        return code._spectrum
    k, m = code.dimension, code.length
    if k <= ENUM_MAX_DIM:
        weights = code.codebook().sum(axis=1)
        weights = weights[weights > 0]
        d = int(weights.min())
        mult = int(np.count_nonzero(weights == d))
    elif m - k <= ENUM_MAX_DIM:
        dist = _spectrum_from_dual(code.generator)
        d = next(j for j in range(1, m + 1) if dist[j] > 0)
        mult = int(dist[d])
    else:
        raise ValueError(
            f"({m},{k}) code: neither dimension nor codimension within the "
            f"enumeration cap {ENUM_MAX_DIM}")
    code._spectrum = (d, mult)
    return code._spectrum


def load_inner_code(path) -> InnerCode:
    """Read a generator matrix file: first line "M K", then K rows of M chars."""
    text = Path(path).read_text()
    return parse_inner_code(text.splitlines())


def parse_inner_code(lines) -> InnerCode:
    lines = [ln.strip() for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("empty inner-code definition")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError('inner-code header must be "M K"')
    m, k = int(head[0]), int(head[1])
    if len(lines) != 1 + k:
        raise ValueError(f"expected {k} generator rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        if len(ln) != m or set(ln) - {"0", "1"}:
            raise ValueError(f"generator row must be {m} chars of 0/1: {ln!r}")
        rows.append([int(c) for c in ln])
    gen = np.array(rows, dtype=np.uint8).reshape((k, m))
    return InnerCode(length=m, dimension=k, generator=gen)


def dump_inner_code(code: InnerCode) -> str:
    lines = [f"{code.length} {code.dimension}"]
    for row in code.generator:
        lines.append("".join(str(int(b)) for b in row))
    return "\n".join(lines) + "\n"
