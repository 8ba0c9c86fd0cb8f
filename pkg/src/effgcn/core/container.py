"""SKTN binary tensor container.

Layout (little-endian):
    [4 bytes magic "SKTN"] [u32 version=1] [u8 dtype code] [u8 ndim]
    [u32 x ndim dims] [row-major data]
"""

import struct
from pathlib import Path

import numpy as np

from .errors import ArgumentError, FormatError


TENSOR_MAGIC = b"SKTN"
TENSOR_VERSION = 1

DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
CODE_FOR_DTYPE = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}

_PREFIX = struct.Struct("<4sIBB")


def encode_tensor(array: np.ndarray) -> bytes:
    """Serialize a float32/float64 array to SKTN bytes."""
    array = np.asarray(array)
    code = CODE_FOR_DTYPE.get(array.dtype)
    if code is None:
        raise ArgumentError(f"Unsupported dtype for SKTN container: {array.dtype}")
    if array.ndim > 255:
        raise ArgumentError(f"Too many dimensions: {array.ndim}")
    header = _PREFIX.pack(TENSOR_MAGIC, TENSOR_VERSION, code, array.ndim)
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    data = np.ascontiguousarray(array, dtype=DTYPE_CODES[code]).tobytes()
    return header + dims + data


def decode_tensor(buffer: bytes, offset: int = 0) -> tuple[np.ndarray, int]:
    """Decode one SKTN tensor starting at ``offset``.

    Returns:
        Tuple of (array, offset just past the tensor).

    Raises:
        FormatError: On bad magic, version, dtype, or truncated data.
    """
    if len(buffer) - offset < _PREFIX.size:
        raise FormatError("Truncated tensor header", offset=offset)
    magic, version, code, ndim = _PREFIX.unpack_from(buffer, offset)
    if magic != TENSOR_MAGIC:
        raise FormatError(f"Bad tensor magic {magic!r}", offset=offset)
    if version != TENSOR_VERSION:
        raise FormatError(f"Unsupported tensor version {version}", offset=offset + 4)
    if code not in DTYPE_CODES:
        raise FormatError(f"Unknown dtype code {code}", offset=offset + 8)
    pos = offset + _PREFIX.size
    if len(buffer) - pos < 4 * ndim:
        raise FormatError("Truncated tensor dimensions", offset=pos)
    shape = struct.unpack_from(f"<{ndim}I", buffer, pos)
    pos += 4 * ndim
    dtype = DTYPE_CODES[code]
    nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(buffer) - pos < nbytes:
        raise FormatError(
            f"Truncated tensor data: need {nbytes} bytes, have {len(buffer) - pos}",
            offset=pos)
    array = np.frombuffer(buffer, dtype=dtype, count=nbytes // dtype.itemsize, offset=pos)
    array = array.reshape(shape).astype(dtype.newbyteorder("="), copy=True)
    return array, pos + nbytes


def write_tensor(path: Path | str, array: np.ndarray) -> None:
    """Write an array to ``path`` in the SKTN container format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tensor(array))


def read_tensor(path: Path | str) -> np.ndarray:
    """Read an SKTN file, rejecting trailing bytes."""
    buffer = Path(path).read_bytes()
    array, end = decode_tensor(buffer)
    if end != len(buffer):
        raise FormatError("Trailing bytes after tensor data", offset=end)
    return array
