"""Concatenated polar codes with CRC-aided list decoding.

Functional core:

- :mod:`polarcat.polar` - rate-1 polar transform, SC and CRC-aided SC-list decoding
- :mod:`polarcat.crc` - configurable cyclic redundancy checks
- :mod:`polarcat.inner_codes` - short linear block codes with soft ML decoding
- :mod:`polarcat.concat` - the concatenated encoder/decoder (columns are inner
  codewords, rows carry the rate-1 polar transform)
- :mod:`polarcat.construction` - density evolution, error estimates and the
  dynamic-programming rate allocation
- :mod:`polarcat.channel` - AWGN/BSC models and LLR generation
- :mod:`polarcat.sim` - Monte Carlo sweeps, CSV output, plot scripts

Estimator facade (scikit-learn conventions): :mod:`polarcat.estimators`.
Command line: ``polarcat construct|encode|decode|simulate``.
"""

from .channel import ChannelParam, snr_to_sigma, transmit
from .concat import ConcatSpec, DecodeStats, concat_decode, concat_encode, operation_count
from .construction import (
    ErrorTable,
    QuantPmf,
    bit_channel_pmf,
    channel_pmf,
    construct_concat_spec,
    de_transform,
    dp_assign,
    estimate_error,
    tail_prob,
)
from .crc import CRC4, CRC8, CrcConfig, crc_append, crc_check, crc_compute
from .estimators import ConcatenatedPolarCodec, PolarCodec
from .inner_codes import InnerCode, ml_decode, weight_spectrum
from .polar import (
    LLR_MAX,
    PolarSpec,
    RowDecoderState,
    polar_encode,
    row_step_feed,
    row_step_llr,
    sc_decode,
    scl_decode,
)
from .sim import SimConfig, SimResult, emit_outputs, run_sweep
from .specfiles import PolarFileSpec, SpecFormatError, load_spec_file, save_spec_file

__version__ = "0.1.0"

__all__ = [
    "CRC4",
    "CRC8",
    "ChannelParam",
    "ConcatSpec",
    "ConcatenatedPolarCodec",
    "CrcConfig",
    "DecodeStats",
    "ErrorTable",
    "InnerCode",
    "LLR_MAX",
    "PolarCodec",
    "PolarFileSpec",
    "PolarSpec",
    "QuantPmf",
    "RowDecoderState",
    "SimConfig",
    "SimResult",
    "SpecFormatError",
    "bit_channel_pmf",
    "channel_pmf",
    "concat_decode",
    "concat_encode",
    "construct_concat_spec",
    "crc_append",
    "crc_check",
    "crc_compute",
    "de_transform",
    "dp_assign",
    "emit_outputs",
    "estimate_error",
    "load_spec_file",
    "ml_decode",
    "operation_count",
    "polar_encode",
    "row_step_feed",
    "row_step_llr",
    "run_sweep",
    "save_spec_file",
    "sc_decode",
    "scl_decode",
    "snr_to_sigma",
    "tail_prob",
    "transmit",
    "weight_spectrum",
]
