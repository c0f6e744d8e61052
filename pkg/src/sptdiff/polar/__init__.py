"""CRC-aided polar coding with a compiled list-decoder core and numpy fallback."""

from ._backend import COMPILED, kernel
from .code import (
    CRC6_POLY,
    PolarCode,
    crc6_append,
    crc6_check,
    crc6_remainder,
    ga_reliability,
)

__all__ = [
    "COMPILED",
    "kernel",
    "CRC6_POLY",
    "PolarCode",
    "crc6_append",
    "crc6_check",
    "crc6_remainder",
    "ga_reliability",
    "scl_decode",
]


def scl_decode(channel_llrs, code: PolarCode, list_size: int = 32):
    """Convenience wrapper: list-decode and return (info_bits, crc_ok)."""
    return code.decode(channel_llrs, list_size)
