"""On-disk container for third-order tensors.

Layout (little endian throughout):

======  =======  ====================================================
offset  size     content
======  =======  ====================================================
0       4        magic bytes ``T3B1``
4       8        ``n1`` as unsigned 64-bit
12      8        ``n2`` as unsigned 64-bit
20      8        ``n3`` as unsigned 64-bit
28      8*n1*    float64 entries, frontal-slice-major: slice 1 first,
        n2*n3    each slice row-major
======  =======  ====================================================

Frontal-slice-major order matches :class:`~tubal.tensor.Tensor3`'s internal
``(n3, n1, n2)`` layout, so reads and writes are single contiguous copies.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .tensor import Tensor3

MAGIC = b"T3B1"
_HEADER = struct.Struct("<4sQQQ")

# Refuse to allocate for dimensions whose product cannot be a real tensor
# in this process (guards against corrupt headers, not legitimate use).
_MAX_ELEMENTS = 1 << 40


def write_t3b(path: str | Path, a: Tensor3) -> None:
    """Write a tensor to ``path`` in T3B format."""
    payload = np.ascontiguousarray(a.data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, a.n1, a.n2, a.n3))
        fh.write(payload.tobytes())


def read_t3b(path: str | Path) -> Tensor3:
    """Read a tensor from ``path``, validating the header and payload size."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(f"{path}: truncated header ({len(head)} bytes)")
        magic, n1, n2, n3 = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if min(n1, n2, n3) < 1:
            raise FormatError(f"{path}: invalid dimensions ({n1}, {n2}, {n3})")
        count = n1 * n2 * n3
        if count > _MAX_ELEMENTS:
            raise FormatError(f"{path}: implausible element count {count}")
        raw = fh.read(8 * count)
        if len(raw) != 8 * count:
            raise FormatError(
                f"{path}: payload holds {len(raw)} bytes, expected {8 * count}"
            )
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"{path}: trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f8").reshape(n3, n1, n2)
    return Tensor3(data.astype(np.float64))
