"""Binary codes for grayscale images from de-noising autoencoders and Radon
barcodes, with exhaustive and multi-probe Hamming retrieval."""

from ._accel import backend
from .codes import BinaryCode
from .errors import (
    DdaHashError,
    FormatError,
    ImageLoadError,
    InvalidArgumentError,
    InvalidStateError,
    IrmaParseError,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryCode",
    "DdaHashError",
    "FormatError",
    "ImageLoadError",
    "InvalidArgumentError",
    "InvalidStateError",
    "IrmaParseError",
    "backend",
    "__version__",
]
