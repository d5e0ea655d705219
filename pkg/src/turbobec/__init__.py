"""Turbo codes on the binary erasure channel: trellises, decoding, stopping sets."""

from .bec_decode import ERASED, DecodeOutcome, ReceivedWord, Status, improved_decode, ml_decode_oracle, turbo_decode
from .pccc import TurboCode, TurboCodeSpec, encode, hamming74, hamming_spec, make_turbo_code, toy_constituent, toy_spec
from .trellis import ConvCodeSpec, build_extended_module, build_minimal_module, module_complexity

__version__ = "0.1.0"
