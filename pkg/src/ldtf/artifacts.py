"""Binary artifact formats and the history CSV.

Three container formats, all little-endian, all float64 row-major:

* segment archive  magic ``SEG1``: u32 version, u32 count, then per segment
  u8 class index, i64 center index, u16 name length, name bytes,
  u32 rows, u32 cols, data.
* embedding matrix magic ``LDE1``: 16-byte header (magic, u32 rows,
  u32 cols, u32 reserved) followed by the data; an archive is just the
  concatenation of matrices.
* checkpoint magic ``LDTF``: u32 version, u32 header length, a canonical
  JSON header (model configuration plus the run seeds), then every tensor
  as u32 ndim, u32 dims..., data. Round-trips byte-exactly.
"""
from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import BinaryIO, Iterator

import numpy as np

from .aami import AamiClass
from .errors import MalformedArchive
from .model import (
    LAYER_TENSOR_NAMES,
    LayerParams,
    ModelConfig,
    ModelParams,
    TrainHistory,
    iter_tensors,
)
from .records import Segment

SEGMENT_MAGIC = b"SEG1"
EMBEDDING_MAGIC = b"LDE1"
CHECKPOINT_MAGIC = b"LDTF"
FORMAT_VERSION = 1


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise MalformedArchive(f"truncated {what}: wanted {n} bytes, got {len(data)}")
    return data


# --- segment archive --------------------------------------------------------

def write_segments(path: str | Path, segments: list[Segment]) -> None:
    with open(path, "wb") as fh:
        fh.write(SEGMENT_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(segments)))
        for seg in segments:
            name = seg.source[0].encode()
            rows, cols = seg.data.shape
            fh.write(struct.pack("<BqH", int(seg.label), int(seg.source[1]), len(name)))
            fh.write(name)
            fh.write(struct.pack("<II", rows, cols))
            fh.write(np.ascontiguousarray(seg.data, dtype=np.float64).tobytes())


def read_segments(path: str | Path) -> list[Segment]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SEGMENT_MAGIC:
            raise MalformedArchive(f"bad segment-archive magic {magic!r}")
        version, count = struct.unpack("<II", _read_exact(fh, 8, "archive header"))
        if version != FORMAT_VERSION:
            raise MalformedArchive(f"unsupported archive version {version}")
        segments = []
        for _ in range(count):
            label, center, name_len = struct.unpack("<BqH", _read_exact(fh, 11, "segment header"))
            name = _read_exact(fh, name_len, "segment name").decode()
            rows, cols = struct.unpack("<II", _read_exact(fh, 8, "segment shape"))
            data = np.frombuffer(_read_exact(fh, rows * cols * 8, "segment data"),
                                 dtype=np.float64).reshape(rows, cols).copy()
            segments.append(Segment(data=data, label=AamiClass(label),
                                    source=(name, center)))
        return segments


# --- embedding matrices -------------------------------------------------------

def write_matrix(fh: BinaryIO, matrix: np.ndarray) -> None:
    rows, cols = matrix.shape
    fh.write(EMBEDDING_MAGIC)
    fh.write(struct.pack("<III", rows, cols, 0))
    fh.write(np.ascontiguousarray(matrix, dtype=np.float64).tobytes())


def read_matrix(fh: BinaryIO) -> np.ndarray | None:
    """Read one matrix record; None at a clean end of file."""
    magic = fh.read(4)
    if not magic:
        return None
    if magic != EMBEDDING_MAGIC:
        raise MalformedArchive(f"bad embedding magic {magic!r}")
    rows, cols, _ = struct.unpack("<III", _read_exact(fh, 12, "embedding header"))
    data = _read_exact(fh, rows * cols * 8, "embedding data")
    return np.frombuffer(data, dtype=np.float64).reshape(rows, cols).copy()


def write_embedding_archive(path: str | Path, matrices: np.ndarray | list[np.ndarray]) -> None:
    with open(path, "wb") as fh:
        for matrix in matrices:
            write_matrix(fh, matrix)


def iter_embedding_archive(path: str | Path) -> Iterator[np.ndarray]:
    with open(path, "rb") as fh:
        while (matrix := read_matrix(fh)) is not None:
            yield matrix


# --- model checkpoints ----------------------------------------------------------

def _config_to_dict(config: ModelConfig) -> dict:
    return {"rows": config.rows, "seq_len": config.seq_len,
            "num_heads": config.num_heads, "num_layers": config.num_layers,
            "ffb_hidden": config.ffb_hidden, "num_classes": config.num_classes,
            "dropout": config.dropout, "seed": config.seed}


def checkpoint_bytes(params: ModelParams, run_seeds: dict | None = None) -> bytes:
    header = {"config": _config_to_dict(params.config),
              "seeds": run_seeds or {"model": params.config.seed}}
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    buf.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
    buf.write(blob)
    for _, tensor in iter_tensors(params):
        buf.write(struct.pack("<I", tensor.ndim))
        buf.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        buf.write(np.ascontiguousarray(tensor, dtype=np.float64).tobytes())
    return buf.getvalue()


def save_checkpoint(path: str | Path, params: ModelParams,
                    run_seeds: dict | None = None) -> None:
    Path(path).write_bytes(checkpoint_bytes(params, run_seeds))


def load_checkpoint(path: str | Path) -> tuple[ModelParams, dict]:
    """Returns the parameters and the seed block recorded at save time."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise MalformedArchive(f"bad checkpoint magic {magic!r}")
        version, header_len = struct.unpack("<II", _read_exact(fh, 8, "checkpoint header"))
        if version != FORMAT_VERSION:
            raise MalformedArchive(f"unsupported checkpoint version {version}")
        header = json.loads(_read_exact(fh, header_len, "checkpoint json"))
        config = ModelConfig(**header["config"])

        def read_tensor() -> np.ndarray:
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4, "tensor rank"))
            shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim, "tensor shape"))
            size = int(np.prod(shape)) if shape else 1
            data = _read_exact(fh, size * 8, "tensor data")
            return np.frombuffer(data, dtype=np.float64).reshape(shape).copy()

        layers = []
        for _ in range(config.num_layers):
            layers.append(LayerParams(**{name: read_tensor()
                                         for name in LAYER_TENSOR_NAMES}))
        params = ModelParams(config=config, layers=layers,
                             classifier_w=read_tensor(), classifier_b=read_tensor())
        if fh.read(1):
            raise MalformedArchive("trailing bytes after checkpoint tensors")
        return params, header.get("seeds", {})


# --- training history -------------------------------------------------------------

def history_to_csv(history: TrainHistory) -> str:
    """CSV text: epoch,loss,accuracy plus validation columns when present."""
    with_val = any(e.val_recall_macro is not None for e in history.epochs)
    header = "epoch,loss,accuracy"
    if with_val:
        header += ",val_recall_macro,val_precision_macro"
    lines = [header]
    for e in history.epochs:
        row = f"{e.epoch},{e.loss:.12g},{e.accuracy:.12g}"
        if with_val:
            row += f",{e.val_recall_macro:.12g},{e.val_precision_macro:.12g}"
        lines.append(row)
    return "\n".join(lines) + "\n"
