from __future__ import annotations

import secrets
from dataclasses import dataclass, field

import numpy as np

from .errors import EntropyError

SEED_MASK = (1 << 64) - 1


@dataclass
class RandomSource:
    """
    Bit and integer source for matrices, keys and experiments.

    seed=None draws from the OS entropy pool. A 64-bit seed gives a PCG64 stream that is
    bit-identical across runs and platforms; a seeded source is stateful and must not be
    shared between concurrent callers.
    """

    seed: int | None = None
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.seed is not None:
            self.seed &= SEED_MASK
            self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @classmethod
    def seeded(cls, seed: int) -> RandomSource:
        return cls(seed=seed)

    @classmethod
    def os_entropy(cls) -> RandomSource:
        return cls(seed=None)

    @property
    def kind(self) -> str:
        return "os-entropy" if self.seed is None else "seeded"

    def split(self, index: int) -> RandomSource:
        # Worker/chunk rule: seed XOR index.
        if self.seed is None:
            return RandomSource.os_entropy()
        return RandomSource.seeded(self.seed ^ index)

    def bits(self, count: int, bias: float = 0.5) -> np.ndarray:
        """`count` independent bits as uint8 0/1, each 1 with probability `bias`."""
        if count < 0:
            raise ValueError("count must be >= 0")
        if self._gen is not None:
            if bias == 0.5:
                return self._gen.integers(0, 2, size=count, dtype=np.uint8)
            return (self._gen.random(count) < bias).astype(np.uint8)

        if bias == 0.5:
            raw = np.frombuffer(self._os_bytes((count + 7) // 8), dtype=np.uint8)
            return np.unpackbits(raw, bitorder="little")[:count]
        words = np.frombuffer(self._os_bytes(8 * count), dtype=np.uint64)
        uniform = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return (uniform < bias).astype(np.uint8)

    def integers(self, high: int, size: int) -> np.ndarray:
        """`size` integers uniform on [0, high)."""
        if high < 1:
            raise ValueError("high must be >= 1")
        if self._gen is not None:
            return self._gen.integers(0, high, size=size, dtype=np.int64)
        try:
            return np.array([secrets.randbelow(high) for _ in range(size)], dtype=np.int64)
        except OSError as e:
            raise EntropyError(f"OS entropy source failed: {e}") from e

    def _os_bytes(self, count: int) -> bytes:
        try:
            return secrets.token_bytes(count)
        except OSError as e:
            raise EntropyError(f"OS entropy source failed: {e}") from e
