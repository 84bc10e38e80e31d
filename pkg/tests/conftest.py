import numpy as np
import pytest

from polarcat.channel import ChannelParam, snr_to_sigma
from polarcat.construction import construct_concat_spec, construct_polar_spec
from polarcat.crc import CRC4, CRC8
from polarcat.polar import clamp_llrs
from polarcat.specfiles import PolarFileSpec


def awgn_llrs(codewords: np.ndarray, sigma: float,
              rng: np.random.Generator) -> np.ndarray:
    """BPSK + AWGN channel LLRs for 0/1 codeword arrays."""
    symbols = 1.0 - 2.0 * codewords.astype(np.float64)
    y = symbols + sigma * rng.standard_normal(codewords.shape)
    return clamp_llrs(2.0 * y / sigma ** 2)


def kron_generator(n: int) -> np.ndarray:
    """Explicit Kronecker-power generator, independent of the butterfly."""
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.array([[1]], dtype=np.uint8)
    for _ in range(n):
        g = np.kron(g, f) % 2
    return g


@pytest.fixture(scope="session")
def design_3db():
    """Design channel shared by the length-512 rate-3/4 comparisons."""
    sigma = snr_to_sigma(3.0, 384 / 512)
    return ChannelParam(kind="awgn", sigma=sigma)


@pytest.fixture(scope="session")
def concat_512_384(design_3db):
    return construct_concat_spec(design_3db, "polar", 16, 32, 384,
                                 crc=CRC4, list_target=8.0)


@pytest.fixture(scope="session")
def concat_512_416(design_3db):
    return construct_concat_spec(design_3db, "polar", 16, 32, 416,
                                 crc=CRC4, list_target=8.0)


@pytest.fixture(scope="session")
def plain_512_384(design_3db):
    spec = construct_polar_spec(design_3db, 512, 384)
    return PolarFileSpec(spec=spec, payload_bits=384, crc=None, list_size=1)


@pytest.fixture(scope="session")
def listcrc_512_384(design_3db):
    spec = construct_polar_spec(design_3db, 512, 384 + CRC8.degree)
    return PolarFileSpec(spec=spec, payload_bits=384, crc=CRC8, list_size=8)
