"""
Domain records shared by every layer.

Indexing: the matrix has rows 1..k and columns 0..n-1 in the usual notation; here row j is
stored at index j-1 and columns keep their 0-based index. Bit arrays are uint8 0/1 vectors;
their packed form is 8 bits per byte, least-significant bit first, row-major for matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ParamError

Pair = tuple[int, int]


def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8).ravel(), bitorder="little").tobytes()


def unpack_bits(data: bytes, count: int) -> np.ndarray:
    if len(data) * 8 < count:
        raise DimensionMismatch(f"{len(data)} bytes cannot hold {count} bits.")
    raw = np.frombuffer(data, dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little", count=count).astype(np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    return int.from_bytes(pack_bits(bits), "little")


def _frozen_bits(bits: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(bits, dtype=np.uint8)
    if arr is bits:
        arr = arr.copy()
    arr.flags.writeable = False
    return arr


def normalize_pair(q: int, l: int) -> Pair:
    if q == l:
        raise ParamError(f"A device cannot pair with itself (device {q}).")
    return (q, l) if q < l else (l, q)


@dataclass(frozen=True)
class MatrixSpec:
    k: int
    n: int
    bias: float = 0.5

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParamError(f"k must be >= 1, got {self.k}.")
        if self.n < 1:
            raise ParamError(f"n must be >= 1, got {self.n}.")
        if not 0.0 <= self.bias <= 1.0:
            raise ParamError(f"bias must lie in [0, 1], got {self.bias}.")


@dataclass(frozen=True, eq=False)
class RandomMatrix:
    spec: MatrixSpec
    bits: np.ndarray  # (k, n) uint8, read-only

    def __post_init__(self) -> None:
        if self.bits.shape != (self.spec.k, self.spec.n):
            raise DimensionMismatch(
                f"matrix bits have shape {self.bits.shape}, spec says {(self.spec.k, self.spec.n)}."
            )
        object.__setattr__(self, "bits", _frozen_bits(self.bits))

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def n(self) -> int:
        return self.spec.n

    def same_as(self, other: RandomMatrix) -> bool:
        return self.spec == other.spec and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class PairwiseKey:
    pair: Pair
    slot: int
    n: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        q, l = self.pair
        if not 0 <= q < l:
            raise ParamError(f"key pair must satisfy 0 <= q < l, got {self.pair}.")
        if not 0 <= self.slot < 2**16:
            raise ParamError(f"slot must fit in 16 bits, got {self.slot}.")
        if not self.values:
            raise ParamError("key has no components.")
        if any(not 0 <= v < self.n for v in self.values):
            raise ParamError(f"key components must lie in [0, {self.n - 1}].")

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def info_bits(self) -> float:
        return self.k * math.log2(self.n) if self.n > 1 else 0.0

    @property
    def storage_bits(self) -> int:
        return 64 * self.k

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)


@dataclass(frozen=True)
class SubKey:
    values: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Keystream:
    pair: Pair
    slot: int
    eta: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", _frozen_bits(self.bits))

    @property
    def m(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True, eq=False)
class Message:
    bits: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", _frozen_bits(np.asarray(self.bits).ravel()))

    @property
    def m(self) -> int:
        return int(self.bits.size)

    @classmethod
    def from_bytes(cls, data: bytes, m: int | None = None) -> Message:
        count = len(data) * 8 if m is None else m
        need = (count + 7) // 8
        if m is not None and len(data) != need:
            raise DimensionMismatch(f"{m}-bit message needs {need} bytes, got {len(data)}.")
        return cls(unpack_bits(data, count))

    @classmethod
    def from_hex(cls, text: str, m: int | None = None) -> Message:
        try:
            data = bytes.fromhex(text)
        except ValueError as e:
            raise ParamError(f"Invalid hex payload {text!r}.") from e
        return cls.from_bytes(data, m)

    @classmethod
    def zeros(cls, m: int) -> Message:
        return cls(np.zeros(m, dtype=np.uint8))

    def to_bytes(self) -> bytes:
        return pack_bits(self.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Message):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Ciphertext:
    """Header (pair, slot, eta, m) is adversary-visible; checksum is CRC-32 of the frame prefix."""

    pair: Pair
    slot: int
    eta: int
    payload: np.ndarray
    checksum: int = field(default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", _frozen_bits(np.asarray(self.payload).ravel()))

    @property
    def m(self) -> int:
        return int(self.payload.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ciphertext):
            return NotImplemented
        return (
            self.pair == other.pair
            and self.slot == other.slot
            and self.eta == other.eta
            and self.checksum == other.checksum
            and np.array_equal(self.payload, other.payload)
        )

    __hash__ = None  # type: ignore[assignment]
