"""
Binary record formats: matrix files, key files and ciphertext frames.

Every record starts with b"MPAD", a version byte and a record-type byte. Integers are
little-endian. Frames end with the CRC-32 (IEEE) of all preceding frame bytes.
"""

from __future__ import annotations

import zlib
from collections.abc import Iterator
from enum import IntEnum
from pathlib import Path
from struct import Struct

import numpy as np

from .errors import ChecksumError, FormatError
from .model import (
    Ciphertext,
    MatrixSpec,
    Pair,
    PairwiseKey,
    RandomMatrix,
    pack_bits,
    unpack_bits,
)

MAGIC = b"MPAD"
VERSION = 0x01

PREAMBLE = Struct("<4sBB")
MATRIX_HEAD = Struct("<QQd")
KEY_HEAD = Struct("<IIHQQ")
FRAME_HEAD = Struct("<IIHQQ")
CRC = Struct("<I")
U64 = Struct("<Q")


class RecordType(IntEnum):
    MATRIX = 0x01
    KEY = 0x02
    FRAME = 0x03


def _preamble(kind: RecordType) -> bytes:
    return PREAMBLE.pack(MAGIC, VERSION, kind)


def _check_preamble(data: bytes, offset: int, kind: RecordType) -> int:
    if len(data) - offset < PREAMBLE.size:
        raise FormatError("Truncated record: no preamble.")
    magic, version, record = PREAMBLE.unpack_from(data, offset)
    if magic != MAGIC:
        raise FormatError(f"Bad magic {magic!r}.")
    if version != VERSION:
        raise FormatError(f"Unsupported version {version}.")
    if record != kind:
        raise FormatError(f"Expected record type {kind:#04x}, got {record:#04x}.")
    return offset + PREAMBLE.size


def _byte_len(bits: int) -> int:
    return (bits + 7) // 8


def _need(data: bytes, offset: int, size: int, what: str) -> None:
    if len(data) - offset < size:
        raise FormatError(f"Truncated {what}: need {size} bytes at offset {offset}.")


def encode_matrix(matrix: RandomMatrix) -> bytes:
    spec = matrix.spec
    return (
        _preamble(RecordType.MATRIX)
        + MATRIX_HEAD.pack(spec.k, spec.n, spec.bias)
        + pack_bits(matrix.bits)
    )


def decode_matrix(data: bytes) -> RandomMatrix:
    offset = _check_preamble(data, 0, RecordType.MATRIX)
    _need(data, offset, MATRIX_HEAD.size, "matrix header")
    k, n, bias = MATRIX_HEAD.unpack_from(data, offset)
    offset += MATRIX_HEAD.size
    body = data[offset:]
    expected = _byte_len(k * n)
    if len(body) != expected:
        raise FormatError(f"Matrix body is {len(body)} bytes, expected {expected}.")
    bits = unpack_bits(body, k * n).reshape(k, n)
    return RandomMatrix(spec=MatrixSpec(k=k, n=n, bias=bias), bits=bits)


def encode_key(key: PairwiseKey) -> bytes:
    q, l = key.pair
    values = Struct(f"<{key.k}Q").pack(*key.values)
    return _preamble(RecordType.KEY) + KEY_HEAD.pack(q, l, key.slot, key.n, key.k) + values


def decode_key(data: bytes) -> PairwiseKey:
    offset = _check_preamble(data, 0, RecordType.KEY)
    _need(data, offset, KEY_HEAD.size, "key header")
    q, l, slot, n, k = KEY_HEAD.unpack_from(data, offset)
    offset += KEY_HEAD.size
    if len(data) - offset != 8 * k:
        raise FormatError(f"Key body is {len(data) - offset} bytes, expected {8 * k}.")
    values = Struct(f"<{k}Q").unpack_from(data, offset)
    return PairwiseKey(pair=(q, l), slot=slot, n=n, values=tuple(values))


def encode_key_values(values: tuple[int, ...]) -> bytes:
    return b"".join(U64.pack(v) for v in values)


def decode_key_values(data: bytes, k: int) -> tuple[int, ...]:
    _need(data, 0, 8 * k, "key material")
    return tuple(U64.unpack_from(data, 8 * j)[0] for j in range(k))


def _frame_prefix(pair: Pair, slot: int, eta: int, payload: np.ndarray) -> bytes:
    q, l = pair
    return (
        _preamble(RecordType.FRAME)
        + FRAME_HEAD.pack(q, l, slot, eta, payload.size)
        + pack_bits(payload)
    )


def payload_checksum(pair: Pair, slot: int, eta: int, payload: np.ndarray) -> int:
    """CRC-32 a frame with these header fields and payload would carry."""
    return zlib.crc32(_frame_prefix(pair, slot, eta, payload)) & 0xFFFFFFFF


def frame_checksum(ct: Ciphertext) -> int:
    return payload_checksum(ct.pair, ct.slot, ct.eta, ct.payload)


def encode_frame(ct: Ciphertext) -> bytes:
    prefix = _frame_prefix(ct.pair, ct.slot, ct.eta, ct.payload)
    return prefix + CRC.pack(zlib.crc32(prefix) & 0xFFFFFFFF)


def frame_size(m: int) -> int:
    return PREAMBLE.size + FRAME_HEAD.size + _byte_len(m) + CRC.size


def _decode_frame_at(data: bytes, offset: int) -> tuple[Ciphertext, int]:
    start = offset
    offset = _check_preamble(data, offset, RecordType.FRAME)
    _need(data, offset, FRAME_HEAD.size, "frame header")
    q, l, slot, eta, m = FRAME_HEAD.unpack_from(data, offset)
    offset += FRAME_HEAD.size
    body_len = _byte_len(m)
    _need(data, offset, body_len + CRC.size, "frame body")
    payload = unpack_bits(data[offset : offset + body_len], m)
    offset += body_len
    (stored,) = CRC.unpack_from(data, offset)
    actual = zlib.crc32(data[start:offset]) & 0xFFFFFFFF
    if stored != actual:
        raise ChecksumError(f"Frame CRC {stored:#010x} != computed {actual:#010x}.")
    ct = Ciphertext(pair=(q, l), slot=slot, eta=eta, payload=payload, checksum=stored)
    return ct, offset + CRC.size


def decode_frame(data: bytes) -> Ciphertext:
    ct, end = _decode_frame_at(data, 0)
    if end != len(data):
        raise FormatError(f"{len(data) - end} trailing bytes after frame.")
    return ct


def iter_frames(data: bytes) -> Iterator[Ciphertext]:
    """Parse a transcript dump: frames concatenated exactly as wired."""
    offset = 0
    while offset < len(data):
        ct, offset = _decode_frame_at(data, offset)
        yield ct


def write_record(path: Path, data: bytes) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return path


def read_record(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError as e:
        raise FormatError(f"No such record file: {path}") from e
