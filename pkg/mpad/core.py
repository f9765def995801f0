from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ChecksumError, DimensionMismatch, HeaderMismatch, ParamError, WindowIndexError
from .model import (
    Ciphertext,
    Keystream,
    MatrixSpec,
    Message,
    Pair,
    PairwiseKey,
    RandomMatrix,
    SubKey,
)
from .rng import RandomSource
from .wire import frame_checksum, payload_checksum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamReport:
    n: int
    k: int
    m: int
    eta_max: int
    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def half_group(self) -> int:
        return (self.n + 1) // 2

    def require(self) -> None:
        if self.violations:
            raise ParamError(
                f"invalid parameters (n={self.n}, k={self.k}, m={self.m}, "
                f"eta_max={self.eta_max}): {', '.join(self.violations)}"
            )


def validate_params(n: int, k: int, m: int, eta_max: int = 1) -> ParamReport:
    violations: list[str] = []
    for name, value in (("n", n), ("k", k), ("m", m), ("eta_max", eta_max)):
        if value < 1:
            violations.append(f"{name}>=1")
    if violations:
        return ParamReport(n, k, m, eta_max, tuple(violations))

    half = (n + 1) // 2
    if not k < m:
        violations.append("k<m")
    if eta_max == 1:
        # Single-message regime is strict.
        if not m < half:
            violations.append("m<floor((n+1)/2)")
    elif not eta_max * m <= half:
        violations.append("eta_max*m<=floor((n+1)/2)")
    return ParamReport(n, k, m, eta_max, tuple(violations))


def generate_matrix(spec: MatrixSpec, rng: RandomSource) -> RandomMatrix:
    logger.debug("generating %dx%d matrix (bias=%s, %s)", spec.k, spec.n, spec.bias, rng.kind)
    bits = rng.bits(spec.k * spec.n, spec.bias).reshape(spec.k, spec.n)
    return RandomMatrix(spec=spec, bits=bits)


def generate_pairwise_key(
    spec: MatrixSpec, pair: Pair, slot: int, rng: RandomSource
) -> PairwiseKey:
    values = rng.integers(spec.n, spec.k)
    return PairwiseKey(pair=pair, slot=slot, n=spec.n, values=tuple(int(v) for v in values))


def _check_window(m: int, eta: int) -> None:
    if m < 1:
        raise WindowIndexError(f"message length must be >= 1, got {m}.")
    if eta < 1:
        raise WindowIndexError(f"eta is 1-based, got {eta}.")


def subkey(key: PairwiseKey, m: int, eta: int, i: int) -> SubKey:
    """Sub-key for bit i (1-based) of window eta: Z +_n (m(eta-1) + i - 1)."""
    _check_window(m, eta)
    if not 1 <= i <= m:
        raise WindowIndexError(f"bit index {i} outside [1, {m}].")
    offset = m * (eta - 1) + i - 1
    return SubKey(values=tuple((z + offset) % key.n for z in key.values))


def window_columns(key: PairwiseKey, m: int, eta: int) -> np.ndarray:
    """(k, m) array: column read in each row for every bit of window eta."""
    _check_window(m, eta)
    offset = (m * (eta - 1)) % key.n
    steps = np.arange(m, dtype=np.int64)
    return (key.as_array()[:, None] + offset + steps[None, :]) % key.n


def _check_dims(matrix: RandomMatrix, key: PairwiseKey) -> None:
    if matrix.n != key.n or matrix.k != key.k:
        raise DimensionMismatch(
            f"key is over Z_{key.n}^{key.k} but matrix is {matrix.k}x{matrix.n}."
        )


def derive_keystream(matrix: RandomMatrix, key: PairwiseKey, m: int, eta: int = 1) -> Keystream:
    _check_dims(matrix, key)
    cols = window_columns(key, m, eta)
    # One gather over the row-major bits: row j starts at j * n.
    cols += (np.arange(key.k, dtype=np.int64) * key.n)[:, None]
    bits = np.bitwise_xor.reduce(matrix.bits.reshape(-1)[cols], axis=0)
    return Keystream(pair=key.pair, slot=key.slot, eta=eta, bits=bits)


def encrypt(
    matrix: RandomMatrix,
    key: PairwiseKey,
    message: Message,
    eta: int = 1,
    *,
    eta_max: int | None = None,
) -> Ciphertext:
    """Algorithm 1 sender side. Budget bookkeeping is the caller's job; eta is trusted."""
    _check_dims(matrix, key)
    budget = eta if eta_max is None else eta_max
    if eta > budget:
        raise ParamError(f"eta={eta} exceeds eta_max={budget}.")
    validate_params(key.n, key.k, message.m, budget).require()

    payload = message.bits ^ derive_keystream(matrix, key, message.m, eta).bits
    checksum = payload_checksum(key.pair, key.slot, eta, payload)
    return Ciphertext(pair=key.pair, slot=key.slot, eta=eta, payload=payload, checksum=checksum)


def decrypt(matrix: RandomMatrix, key: PairwiseKey, ciphertext: Ciphertext) -> Message:
    if ciphertext.pair != key.pair or ciphertext.slot != key.slot:
        raise HeaderMismatch(
            f"ciphertext is for pair {ciphertext.pair} slot {ciphertext.slot}, "
            f"key is pair {key.pair} slot {key.slot}."
        )
    if ciphertext.checksum != frame_checksum(ciphertext):
        raise ChecksumError("ciphertext checksum does not match header and payload.")
    stream = derive_keystream(matrix, key, ciphertext.m, ciphertext.eta)
    return Message(ciphertext.payload ^ stream.bits)
