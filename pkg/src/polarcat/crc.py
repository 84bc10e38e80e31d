"""Cyclic redundancy checks over GF(2).

Bit conventions are fixed and documented once: polynomials and messages are
consumed most-significant bit first, no reflection, no final XOR.  With an
all-zero register seed the remainder equals (data * x^r) mod g, which makes
the map linear in the data bits.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import as_bit_array


@dataclass(frozen=True)
class CrcConfig:
    """Full generator polynomial (r+1 coefficients, MSB first) plus seed."""

    polynomial: tuple[int, ...]
    init_value: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        poly = tuple(int(b) & 1 for b in self.polynomial)
        if len(poly) < 2 or poly[0] != 1:
            raise ValueError("polynomial needs degree >= 1 and leading coefficient 1")
        object.__setattr__(self, "polynomial", poly)
        init = self.init_value
        if init is None:
            init = (0,) * (len(poly) - 1)
        init = tuple(int(b) & 1 for b in init)
        if len(init) != len(poly) - 1:
            raise ValueError("init_value must hold degree bits")
        object.__setattr__(self, "init_value", init)

    @property
    def degree(self) -> int:
        return len(self.polynomial) - 1

    @classmethod
    def from_string(cls, bits: str, init: str | None = None) -> "CrcConfig":
        """Parse a coefficient string such as "10011" for x^4 + x + 1."""
        return cls(polynomial=tuple(int(c) for c in bits.strip()),
                   init_value=None if init is None else tuple(int(c) for c in init))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.polynomial)


CRC4 = CrcConfig.from_string("10011")          # x^4 + x + 1
CRC8 = CrcConfig.from_string("100000111")      # x^8 + x^2 + x + 1


def crc_remainder_batch(data: np.ndarray, cfg: CrcConfig) -> np.ndarray:
    """Remainder bits for (..., L) message arrays, register seeded per cfg."""
    data = as_bit_array(data)
    r = cfg.degree
    tail = np.array(cfg.polynomial[1:], dtype=np.uint8)
    reg = np.zeros(data.shape[:-1] + (r,), dtype=np.uint8)
    reg[...] = np.array(cfg.init_value, dtype=np.uint8)
    for t in range(data.shape[-1]):
        top = reg[..., 0] ^ data[..., t]
        reg[..., :-1] = reg[..., 1:]
        reg[..., -1] = 0
        reg ^= top[..., None] * tail
    return reg


def crc_compute(data, cfg: CrcConfig) -> np.ndarray:
    """CRC remainder of one message (MSB-first long division by cfg.polynomial)."""
    data = as_bit_array(data)
    if data.ndim != 1 or data.size == 0:
        raise ValueError("data must be a nonempty bit vector")
    return crc_remainder_batch(data, cfg)


def crc_check(data_with_crc, cfg: CrcConfig) -> bool:
    """True iff the trailing degree bits match the remainder of the rest."""
    word = as_bit_array(data_with_crc)
    if word.ndim != 1 or word.size <= cfg.degree:
        raise ValueError("word must be longer than the CRC degree")
    r = cfg.degree
    return bool(np.array_equal(crc_compute(word[:-r], cfg), word[-r:]))


def crc_append(data, cfg: CrcConfig) -> np.ndarray:
    """Systematic encoding: data followed by its remainder (batch friendly)."""
    data = as_bit_array(data)
    return np.concatenate([data, crc_remainder_batch(data, cfg)], axis=-1)
