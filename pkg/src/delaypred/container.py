"""TensorContainer: the "NOPC" binary format for named dense tensors.

Datasets and operator weights cross the library/trainer boundary in this
format, so the layout is fixed and versioned:

    magic  4 bytes          b"NOPC"
    u32 LE                  format version (currently 1)
    u32 LE                  metadata length, then that many bytes of UTF-8 JSON
    u32 LE                  tensor count
    per tensor:
        u16 LE + bytes      name length, UTF-8 name
        u8                  dtype: 0 = float32, 1 = float64
        u8                  ndim
        ndim x u64 LE       dims
        raw data            row-major, little-endian

Complex tensors are stored as an extra trailing dimension of size 2
(real, imag) under the name suffix ".c"; the reader reassembles them
transparently. Metadata JSON is serialized with sorted keys so equal
inputs give bitwise-equal files.
"""

from __future__ import annotations

import json
import struct
from io import BufferedReader

import numpy as np

from .errors import BadMagic, ContainerFormatError, VersionMismatch

MAGIC = b"NOPC"
VERSION = 1

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}

_COMPLEX_SUFFIX = ".c"


def write_container(path, metadata: dict, tensors: dict) -> None:
    """Write named tensors; insertion order of `tensors` is preserved."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", VERSION)
    meta = json.dumps(metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob += struct.pack("<I", len(meta))
    blob += meta
    blob += struct.pack("<I", len(tensors))
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        if np.iscomplexobj(arr):
            base = np.float32 if arr.dtype == np.complex64 else np.float64
            arr = np.stack([arr.real, arr.imag], axis=-1).astype(base)
            name = name + _COMPLEX_SUFFIX
        if arr.dtype == np.float32:
            code = 0
        else:
            code = 1
            arr = arr.astype(np.float64, copy=False)
        nb = name.encode("utf-8")
        if len(nb) > 0xFFFF:
            raise ValueError(f"tensor name too long: {name[:32]}...")
        blob += struct.pack("<H", len(nb))
        blob += nb
        blob += struct.pack("<BB", code, arr.ndim)
        for d in arr.shape:
            blob += struct.pack("<Q", d)
        blob += np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes()
    with open(path, "wb") as f:
        f.write(blob)


def _read_exact(f: BufferedReader, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise ContainerFormatError(f"truncated container: short read in {what}")
    return data


def read_container(path) -> tuple[dict, dict]:
    """Returns (metadata, tensors); complex tensors come back reassembled."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise BadMagic(f"expected {MAGIC!r}, found {magic!r}")
        (version,) = struct.unpack("<I", _read_exact(f, 4, "version"))
        if version != VERSION:
            raise VersionMismatch(f"container version {version}, reader supports {VERSION}")
        (meta_len,) = struct.unpack("<I", _read_exact(f, 4, "metadata length"))
        try:
            metadata = json.loads(_read_exact(f, meta_len, "metadata").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ContainerFormatError(f"metadata is not valid JSON: {e}") from e
        (count,) = struct.unpack("<I", _read_exact(f, 4, "tensor count"))

        tensors: dict[str, np.ndarray] = {}
        for i in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(f, 2, f"tensor {i} name length"))
            name = _read_exact(f, name_len, f"tensor {i} name").decode("utf-8")
            code, ndim = struct.unpack("<BB", _read_exact(f, 2, f"{name} header"))
            if code not in _DTYPES:
                raise ContainerFormatError(f"tensor {name}: unknown dtype code {code}")
            dims = struct.unpack(f"<{ndim}Q", _read_exact(f, 8 * ndim, f"{name} dims"))
            n_elem = 1
            for d in dims:
                n_elem *= d
            nbytes = n_elem * _DTYPES[code].itemsize
            arr = np.frombuffer(_read_exact(f, nbytes, f"{name} data"),
                                dtype=_DTYPES[code]).reshape(dims).copy()
            if name.endswith(_COMPLEX_SUFFIX):
                if ndim < 1 or dims[-1] != 2:
                    raise ContainerFormatError(
                        f"tensor {name}: complex suffix but trailing dim is not 2")
                arr = arr[..., 0] + 1j * arr[..., 1]
                name = name[: -len(_COMPLEX_SUFFIX)]
            tensors[name] = arr
        if f.read(1):
            raise ContainerFormatError("trailing bytes after the declared tensors")
    return metadata, tensors
