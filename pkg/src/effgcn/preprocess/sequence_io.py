"""Reading and writing sequences as SKTN tensors with a JSON sidecar."""

import json
from pathlib import Path

from ..core.container import read_tensor, write_tensor
from ..core.errors import FormatError
from .features import RawSequence, infer_valid_frames


SEQUENCE_SUFFIX = ".sktn"
SIDECAR_SUFFIX = ".meta.json"

# Byte offset of the first dimension field in an SKTN header.
_DIMS_OFFSET = 10


def sidecar_path(path: Path | str) -> Path:
    """``clip.sktn`` -> ``clip.meta.json``."""
    return Path(path).with_suffix(SIDECAR_SUFFIX)


def save_sequence(path: Path | str, seq: RawSequence) -> Path:
    """Write a sequence and its sidecar.

    Returns:
        Path of the tensor file.
    """
    path = Path(path)
    write_tensor(path, seq.coords)
    meta = {"label": seq.label, "valid_frames": seq.valid_frames}
    sidecar_path(path).write_text(json.dumps(meta))
    return path


def load_sequence(path: Path | str) -> RawSequence:
    """Read a sequence written by :func:`save_sequence`.

    The label comes from the sidecar when it exists; ``valid_frames`` is
    always inferred from the coordinates.

    Raises:
        FormatError: On a malformed container, wrong shape, or bad sidecar.
    """
    path = Path(path)
    coords = read_tensor(path)
    if coords.ndim != 4:
        raise FormatError(
            f"{path.name}: sequence tensor must have 4 dims, got {coords.ndim}",
            offset=_DIMS_OFFSET - 1)
    if coords.shape[0] != 3:
        raise FormatError(
            f"{path.name}: sequence tensor must carry 3 coordinates, got {coords.shape[0]}",
            offset=_DIMS_OFFSET)
    if coords.shape[3] < 1:
        raise FormatError(f"{path.name}: sequence has no bodies", offset=_DIMS_OFFSET + 12)

    label = None
    meta_file = sidecar_path(path)
    if meta_file.exists():
        text = meta_file.read_text()
        try:
            meta = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"{meta_file.name} is not valid JSON: {e}", offset=e.pos) from e
        if not isinstance(meta, dict):
            raise FormatError(f"{meta_file.name} must hold a JSON object", offset=0)
        raw_label = meta.get("label")
        if raw_label is not None:
            if isinstance(raw_label, bool) or not isinstance(raw_label, int) or raw_label < 0:
                raise FormatError(f"{meta_file.name}: invalid label {raw_label!r}")
            label = raw_label

    return RawSequence(coords=coords, label=label, valid_frames=infer_valid_frames(coords))
