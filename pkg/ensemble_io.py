"""
Ensemble persistence.

Binary (.qmix):
    b"QMIX" | version: u8 | dim: u64 LE | degree: u64 LE |
    label length: u64 LE | label: UTF-8 |
    degree x dim x dim complex entries as (re, im) float64 LE pairs,
    row-major, matrices in ensemble order

Text (.json):
    {"version", "dim", "degree", "label", "unitaries": [[[re, im], ...], ...]}
"""

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from channels import MixedUnitaryEnsemble
from errors import EnsembleFormatError

logger = logging.getLogger(__name__)

MAGIC = b"QMIX"
FORMAT_VERSION = 1
ENCODINGS = ("binary", "text")

_HEADER = struct.Struct("<4sBQQQ")
_ENTRY = np.dtype("<c16")

PathLike = Union[str, Path]


@dataclass
class EnsembleFile:
    """Decoded contents of an ensemble file, before unitarity validation."""
    format_version: int
    dim: int
    degree: int
    label: str
    encoding: str
    payload: np.ndarray

    def to_ensemble(self, validate: bool = True) -> MixedUnitaryEnsemble:
        return MixedUnitaryEnsemble(self.payload, self.label, validate=validate)


def encoding_for(path: PathLike, encoding: Optional[str] = None) -> str:
    """Explicit encoding, else text for .json/.txt files and binary otherwise."""
    if encoding is not None:
        if encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {encoding!r}, expected one of {ENCODINGS}")
        return encoding
    return "text" if Path(path).suffix.lower() in (".json", ".txt") else "binary"


def encode_binary(ensemble: MixedUnitaryEnsemble) -> bytes:
    label = ensemble.label.encode("utf-8")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, ensemble.dim, ensemble.degree, len(label))
    payload = np.ascontiguousarray(ensemble.unitaries, dtype=_ENTRY).tobytes()
    return header + label + payload


def decode_binary(data: bytes, path: PathLike = "<bytes>") -> EnsembleFile:
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise EnsembleFormatError(f"{path}: not a QMIX ensemble file (bad magic)")
    magic, version, dim, degree, label_length = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise EnsembleFormatError(f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})")
    offset = _HEADER.size
    label_bytes = data[offset:offset + label_length]
    if len(label_bytes) != label_length:
        raise EnsembleFormatError(f"{path}: truncated label")
    offset += label_length
    expected = degree * dim * dim * _ENTRY.itemsize
    if dim < 1 or degree < 1 or len(data) - offset != expected:
        raise EnsembleFormatError(
            f"{path}: payload holds {len(data) - offset} bytes, expected {expected} for dim {dim}, degree {degree}"
        )
    try:
        label = label_bytes.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EnsembleFormatError(f"{path}: label is not UTF-8 ({e})") from e
    payload = np.frombuffer(data, dtype=_ENTRY, offset=offset).reshape(degree, dim, dim).astype(complex)
    return EnsembleFile(version, dim, degree, label, "binary", payload)


def encode_text(ensemble: MixedUnitaryEnsemble) -> str:
    document = {
        "version": FORMAT_VERSION,
        "dim": ensemble.dim,
        "degree": ensemble.degree,
        "label": ensemble.label,
        "unitaries": np.stack([ensemble.unitaries.real, ensemble.unitaries.imag], axis=-1).tolist(),
    }
    return json.dumps(document, ensure_ascii=False, indent=2)


def decode_text(text: str, path: PathLike = "<text>") -> EnsembleFile:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise EnsembleFormatError(f"{path}: not a QMIX ensemble file ({e})") from e
    if not isinstance(document, dict):
        raise EnsembleFormatError(f"{path}: expected a JSON object")
    missing = [key for key in ("version", "dim", "degree", "label", "unitaries") if key not in document]
    if missing:
        raise EnsembleFormatError(f"{path}: missing keys {missing}")
    if document["version"] != FORMAT_VERSION:
        raise EnsembleFormatError(
            f"{path}: unsupported format version {document['version']} (expected {FORMAT_VERSION})"
        )
    dim, degree = int(document["dim"]), int(document["degree"])
    try:
        pairs = np.asarray(document["unitaries"], dtype=float)
    except (TypeError, ValueError) as e:
        raise EnsembleFormatError(f"{path}: malformed unitaries ({e})") from e
    if pairs.shape != (degree, dim, dim, 2):
        raise EnsembleFormatError(f"{path}: unitaries have shape {pairs.shape}, expected {(degree, dim, dim, 2)}")
    payload = pairs[..., 0] + 1j * pairs[..., 1]
    return EnsembleFile(FORMAT_VERSION, dim, degree, str(document["label"]), "text", payload)


def serialize(ensemble: MixedUnitaryEnsemble, path: PathLike, encoding: Optional[str] = None) -> Path:
    """Write an ensemble; encoding defaults from the file suffix."""
    path = Path(path)
    encoding = encoding_for(path, encoding)
    if encoding == "binary":
        path.write_bytes(encode_binary(ensemble))
    else:
        path.write_text(encode_text(ensemble), encoding="utf-8")
    logger.debug("wrote %r (%s) to %s", ensemble, encoding, path)
    return path


def read_ensemble_file(path: PathLike, encoding: Optional[str] = None) -> EnsembleFile:
    """Decode without validating unitarity. Binary is recognized by its magic bytes."""
    path = Path(path)
    data = path.read_bytes()
    if encoding is None:
        encoding = "text" if data.lstrip()[:1] == b"{" else "binary"
    if encoding == "binary":
        return decode_binary(data, path)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EnsembleFormatError(f"{path}: not UTF-8 text ({e})") from e
    return decode_text(text, path)


def deserialize(path: PathLike, encoding: Optional[str] = None, validate: bool = True) -> MixedUnitaryEnsemble:
    """Load an ensemble; NotUnitaryError names the offending matrix index."""
    return read_ensemble_file(path, encoding).to_ensemble(validate=validate)
