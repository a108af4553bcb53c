"""Binary feature container used for every tensor artifact on disk.

Layout: bytes 0-3 magic ``CMGF``, byte 4 version (1), byte 5 rank r in 1..4,
then r little-endian uint32 dims, then the row-major little-endian float32
payload of exactly prod(dims) elements.
"""

import struct

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"CMGF"
VERSION = 1
MAX_RANK = 4

_HEADER = struct.Struct("<4sBB")


def write_feature_file(path, tensor):
    """Serialize ``tensor`` (rank 1..4, dims < 2**32) as float32 to ``path``."""
    arr = np.ascontiguousarray(tensor, dtype=np.float32)
    if arr.ndim < 1 or arr.ndim > MAX_RANK:
        raise ValidationError(f"tensor rank must be 1..{MAX_RANK}, got {arr.ndim}")
    if any(d >= 2**32 for d in arr.shape):
        raise ValidationError(f"dimension too large for container: {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_feature_file(path):
    """Read a container written by :func:`write_feature_file`, bit-exactly."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}", 0)
    version = data[4]
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    rank = data[5]
    if not 1 <= rank <= MAX_RANK:
        raise FormatError(f"rank {rank} outside 1..{MAX_RANK}", 5)
    dims_end = _HEADER.size + 4 * rank
    if len(data) < dims_end:
        raise FormatError("truncated dimension header", len(data))
    dims = struct.unpack(f"<{rank}I", data[_HEADER.size:dims_end])
    expected = 4 * int(np.prod(dims, dtype=np.uint64))
    payload = data[dims_end:]
    if len(payload) < expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes, dims {dims} need {expected}",
            len(data),
        )
    if len(payload) > expected:
        raise FormatError(
            f"{len(payload) - expected} trailing bytes after payload",
            dims_end + expected,
        )
    flat = np.frombuffer(payload, dtype="<f4")
    return flat.reshape(dims).astype(np.float32, copy=True)
