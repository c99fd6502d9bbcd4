"""Binary checkpoint codec.

Layout::

    SPGRU1\\n
    <one line of UTF-8 JSON header>\\n
    <arrays as little-endian float64, concatenated in header order>

The header carries ``arrays``: a list of ``[name, shape]`` pairs in
declaration order, plus caller metadata (dims, seed, model variant, ...).
Reading back yields bit-identical arrays.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Final

import numpy as np

from ..core.errors import DataFileError
from ..numeric.ops import RealMatrix
from .cell import PARAM_NAMES, GruParams

MAGIC: Final[bytes] = b"SPGRU1\n"
DTYPE: Final[str] = "<f8"


def encode_arrays(meta: Mapping[str, Any], arrays: Mapping[str, RealMatrix]) -> bytes:
    header = dict(meta)
    header["arrays"] = [[name, list(arr.shape)] for name, arr in arrays.items()]
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(np.ascontiguousarray(arr, dtype=DTYPE).tobytes() for arr in arrays.values())
    return MAGIC + head + b"\n" + body


def _read_header(raw: bytes, source: str) -> tuple[dict[str, Any], list[tuple[str, list[int]]]]:
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFileError(source, f"unreadable checkpoint header: {e}") from e
    if not isinstance(header, dict) or not isinstance(header.get("arrays"), list):
        raise DataFileError(source, "checkpoint header has no array layout")
    layout: list[tuple[str, list[int]]] = []
    for entry in header.pop("arrays"):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not isinstance(entry[0], str)
            or not isinstance(entry[1], list)
            or not all(isinstance(n, int) and n >= 0 for n in entry[1])
        ):
            raise DataFileError(source, f"malformed array entry {entry!r}")
        layout.append((entry[0], entry[1]))
    return header, layout


def decode_arrays(blob: bytes, source: str = "<bytes>") -> tuple[dict[str, Any], dict[str, RealMatrix]]:
    if not blob.startswith(MAGIC):
        raise DataFileError(source, "not a sporadic checkpoint (bad magic)")
    rest = blob[len(MAGIC) :]
    newline = rest.find(b"\n")
    if newline < 0:
        raise DataFileError(source, "truncated checkpoint header")
    header, layout = _read_header(rest[:newline], source)
    body = memoryview(rest)[newline + 1 :]
    arrays: dict[str, RealMatrix] = {}
    offset = 0
    for name, shape in layout:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise DataFileError(source, f"truncated array {name!r}")
        flat = np.frombuffer(body[offset : offset + nbytes], dtype=DTYPE)
        arrays[name] = flat.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(body):
        raise DataFileError(source, "trailing bytes after last array")
    return header, arrays


def write_checkpoint(path: Path, meta: Mapping[str, Any], arrays: Mapping[str, RealMatrix]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_arrays(meta, arrays))
    except OSError as e:
        raise DataFileError(str(path), f"cannot write checkpoint: {e}") from e


def read_checkpoint(path: Path) -> tuple[dict[str, Any], dict[str, RealMatrix]]:
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise DataFileError(str(path), f"cannot read checkpoint: {e}") from e
    return decode_arrays(blob, str(path))


def gru_arrays(params: GruParams, prefix: str = "") -> dict[str, RealMatrix]:
    return {f"{prefix}{name}": arr for name, arr in params.arrays().items()}


def gru_from_arrays(arrays: Mapping[str, RealMatrix], prefix: str = "") -> GruParams:
    try:
        return GruParams(**{name: arrays[f"{prefix}{name}"] for name in PARAM_NAMES})
    except KeyError as e:
        raise DataFileError("<checkpoint>", f"missing GRU array {e}") from e


def save_gru(path: Path, params: GruParams, seed: int) -> None:
    meta = {"input_dim": params.input_dim, "hidden_dim": params.hidden_dim, "seed": seed}
    write_checkpoint(path, meta, gru_arrays(params))


def load_gru(path: Path) -> tuple[GruParams, int]:
    header, arrays = read_checkpoint(path)
    return gru_from_arrays(arrays), int(header.get("seed", 0))
