"""scikit-learn style codecs.

`fit` runs the code construction for the configured design channel (density
evolution plus rate allocation), `transform` encodes batches of messages and
`inverse_transform` decodes batches of channel LLRs, so a codec drops into
pipelines and parameter searches like any other transformer.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import polar as _polar
from .channel import ChannelParam, snr_to_sigma
from .concat import concat_decode_batch, concat_encode_batch
from .construction import (
    DEFAULT_GRID_STEP,
    construct_concat_spec,
    construct_polar_spec,
)
from .crc import CrcConfig, crc_append
from .validation import check_bit_matrix, check_llr_matrix


def _design_channel(kind: str, ebn0_db: float, rate: float,
                    crossover: float) -> ChannelParam:
    if kind == "awgn":
        return ChannelParam(kind="awgn", sigma=snr_to_sigma(ebn0_db, rate))
    return ChannelParam(kind="bsc", crossover=crossover)


class PolarCodec(BaseEstimator, TransformerMixin):
    """Polar code with SC or CRC-aided list decoding.

    Parameters mirror the construction knobs; `fit` chooses the frozen set
    for the design channel.  transform maps (n_frames, info_bits) messages to
    (n_frames, block_length) codewords; inverse_transform maps channel LLRs
    back to messages.
    """

    def __init__(self, block_length=256, info_bits=128, list_size=1,
                 crc_polynomial=None, design_ebn0_db=2.0, channel_kind="awgn",
                 crossover=0.1, grid_step=DEFAULT_GRID_STEP,
                 llr_clamp=_polar.LLR_MAX):
        self.block_length = block_length
        self.info_bits = info_bits
        self.list_size = list_size
        self.crc_polynomial = crc_polynomial
        self.design_ebn0_db = design_ebn0_db
        self.channel_kind = channel_kind
        self.crossover = crossover
        self.grid_step = grid_step
        self.llr_clamp = llr_clamp

    def fit(self, X=None, y=None):
        crc = None if self.crc_polynomial is None \
            else CrcConfig.from_string(self.crc_polynomial)
        r = 0 if crc is None else crc.degree
        rate = self.info_bits / self.block_length
        channel = _design_channel(self.channel_kind, self.design_ebn0_db,
                                  rate, self.crossover)
        self.crc_ = crc
        self.spec_ = construct_polar_spec(
            channel, self.block_length, self.info_bits + r,
            grid_step=self.grid_step, clamp=self.llr_clamp)
        self.design_channel_ = channel
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        info = check_bit_matrix(X, self.info_bits, name="messages")
        payload = info if self.crc_ is None else crc_append(info, self.crc_)
        return _polar.polar_encode(_polar.embed_info(payload, self.spec_))

    def inverse_transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        llrs = check_llr_matrix(X, self.block_length, name="channel LLRs")
        if self.list_size == 1 and self.crc_ is None:
            u = _polar.sc_decode_batch(llrs, self.spec_, llr_max=self.llr_clamp)
        else:
            u, _, _ = _polar.scl_decode_batch(
                llrs, self.spec_, self.list_size, self.crc_,
                llr_max=self.llr_clamp)
        return _polar.extract_info(u, self.spec_)[:, :self.info_bits]


class ConcatenatedPolarCodec(BaseEstimator, TransformerMixin):
    """Concatenated code: polar columns with per-column CRC and list sizes.

    transform returns row-major flattened codewords of length
    column_length * n_columns; inverse_transform expects LLRs in the same
    layout.  After `fit`, `spec_` holds the full code description and
    `predicted_bound_` the union-bound sum from the construction.
    """

    def __init__(self, n_columns=16, column_length=32, info_bits=416,
                 crc_polynomial="10011", list_target=8.0, design_ebn0_db=3.0,
                 channel_kind="awgn", crossover=0.1,
                 grid_step=DEFAULT_GRID_STEP, llr_clamp=_polar.LLR_MAX):
        self.n_columns = n_columns
        self.column_length = column_length
        self.info_bits = info_bits
        self.crc_polynomial = crc_polynomial
        self.list_target = list_target
        self.design_ebn0_db = design_ebn0_db
        self.channel_kind = channel_kind
        self.crossover = crossover
        self.grid_step = grid_step
        self.llr_clamp = llr_clamp

    def fit(self, X=None, y=None):
        crc = None if self.crc_polynomial is None \
            else CrcConfig.from_string(self.crc_polynomial)
        block = self.n_columns * self.column_length
        rate = self.info_bits / block
        channel = _design_channel(self.channel_kind, self.design_ebn0_db,
                                  rate, self.crossover)
        result = construct_concat_spec(
            channel, "polar", self.n_columns, self.column_length,
            self.info_bits, crc=crc, list_target=self.list_target,
            grid_step=self.grid_step, clamp=self.llr_clamp)
        self.spec_ = result.spec
        self.predicted_bound_ = result.bound
        self.construction_ = result
        self.design_channel_ = channel
        return self

    @property
    def block_length(self) -> int:
        return self.n_columns * self.column_length

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        info = check_bit_matrix(X, self.info_bits, name="messages")
        x = concat_encode_batch(info, self.spec_)
        return x.reshape(info.shape[0], -1)

    def inverse_transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        llrs = check_llr_matrix(X, self.block_length, name="channel LLRs")
        mats = llrs.reshape(-1, self.column_length, self.n_columns)
        info, _ = concat_decode_batch(mats, self.spec_, llr_max=self.llr_clamp)
        return info
