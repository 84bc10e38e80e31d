"""Symmetric channel models: BPSK over AWGN, and the binary symmetric channel.

Bit 0 maps to +1 and bit 1 to -1, so given the all-zero word AWGN LLRs are
N(2/sigma^2, 4/sigma^2) and BSC LLRs are +-ln((1-p)/p).  Randomness comes from
numpy Generators; `frame_rng` derives an independent substream per frame index
so Monte Carlo results do not depend on how frames are partitioned.
"""

import math
from dataclasses import dataclass

import numpy as np

from .polar import LLR_MAX, clamp_llrs
from .validation import as_bit_array


@dataclass(frozen=True)
class ChannelParam:
    """AWGN ('awgn', sigma) or BSC ('bsc', crossover) with a reproducibility seed."""

    kind: str = "awgn"
    sigma: float = 1.0
    crossover: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("awgn", "bsc"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "awgn" and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.kind == "bsc" and not 0 < self.crossover < 0.5:
            raise ValueError("crossover must lie in (0, 1/2)")


def snr_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise deviation for unit-energy BPSK at the given Eb/N0 and code rate."""
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    if not math.isfinite(ebn0_db):
        raise ValueError("ebn0_db must be finite")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def ebn0_to_esn0(ebn0_db: float, rate: float) -> float:
    return ebn0_db + 10.0 * math.log10(rate)


def frame_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one (seed, stream...) coordinate."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(stream)))


def transmit(bits, ch: ChannelParam, rng: np.random.Generator | None = None,
             llr_max: float = LLR_MAX) -> np.ndarray:
    """Modulate, add noise and return channel LLRs (any batch shape)."""
    bits = as_bit_array(bits)
    if rng is None:
        rng = np.random.default_rng(ch.seed)
    if ch.kind == "awgn":
        symbols = 1.0 - 2.0 * bits.astype(np.float64)
        y = symbols + ch.sigma * rng.standard_normal(bits.shape)
        llrs = 2.0 * y / (ch.sigma ** 2)
    else:
        flips = rng.random(bits.shape) < ch.crossover
        received = bits ^ flips
        mag = math.log((1.0 - ch.crossover) / ch.crossover)
        llrs = np.where(received == 0, mag, -mag)
    return clamp_llrs(llrs, llr_max)
