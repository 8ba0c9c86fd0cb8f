"""SKCK checkpoints: named tensors in SKTN containers.

Layout (little-endian):
    [4 bytes magic "SKCK"] [u32 version=1]
    repeated until EOF: [u32 name length] [utf-8 name] [SKTN tensor]
"""

import struct
from collections import OrderedDict
from pathlib import Path

import numpy as np

from ..core.container import decode_tensor, encode_tensor
from ..core.errors import FormatError


CHECKPOINT_MAGIC = b"SKCK"
CHECKPOINT_VERSION = 1

_HEADER = struct.Struct("<4sI")
_NAME_LEN = struct.Struct("<I")


def encode_checkpoint(state: dict[str, np.ndarray]) -> bytes:
    chunks = [_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION)]
    for name, array in state.items():
        raw = name.encode("utf-8")
        chunks.append(_NAME_LEN.pack(len(raw)))
        chunks.append(raw)
        chunks.append(encode_tensor(array))
    return b"".join(chunks)


def decode_checkpoint(buffer: bytes) -> "OrderedDict[str, np.ndarray]":
    """Decode SKCK bytes into an ordered name -> array mapping.

    Raises:
        FormatError: On bad magic/version, truncated records or duplicate names.
    """
    if len(buffer) < _HEADER.size:
        raise FormatError("Truncated checkpoint header", offset=0)
    magic, version = _HEADER.unpack_from(buffer, 0)
    if magic != CHECKPOINT_MAGIC:
        raise FormatError(f"Bad checkpoint magic {magic!r}", offset=0)
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"Unsupported checkpoint version {version}", offset=4)

    state: OrderedDict[str, np.ndarray] = OrderedDict()
    pos = _HEADER.size
    while pos < len(buffer):
        if len(buffer) - pos < _NAME_LEN.size:
            raise FormatError("Truncated tensor name length", offset=pos)
        (length,) = _NAME_LEN.unpack_from(buffer, pos)
        pos += _NAME_LEN.size
        if len(buffer) - pos < length:
            raise FormatError("Truncated tensor name", offset=pos)
        try:
            name = buffer[pos:pos + length].decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"Tensor name is not UTF-8: {e}", offset=pos) from e
        if name in state:
            raise FormatError(f"Duplicate tensor name '{name}'", offset=pos)
        pos += length
        state[name], pos = decode_tensor(buffer, pos)
    return state


def save_checkpoint(path: Path | str, state: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(state))
    return path


def load_checkpoint(path: Path | str) -> "OrderedDict[str, np.ndarray]":
    return decode_checkpoint(Path(path).read_bytes())
