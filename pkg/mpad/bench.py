"""
Avalanche and runtime harness.

Flipping a plaintext bit and re-encrypting under the same key and window changes exactly one
ciphertext bit: the pad is a XOR. The ~1/2 flip fraction appears only when the second
encryption draws a fresh keystream window, so both variants are reported.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .attack import LabParams
from .core import decrypt, encrypt, generate_matrix, generate_pairwise_key, validate_params
from .errors import ParamError
from .model import MatrixSpec, Message
from .rng import RandomSource

logger = logging.getLogger(__name__)

MIN_AVALANCHE_BITS = 10_000
SAME_WINDOW = "same-window"
FRESH_WINDOW = "fresh-window"

# The 5 Kb / 10 Kb grid scaled by 16. Near 5 Kb fixed per-call work is a large share of encrypt
# time and the m-doubling ratio drops below 1.8.
RUNTIME_SIZES = (81_920, 163_840)
RUNTIME_KS = (10, 13)


@dataclass(frozen=True, eq=False)
class AvalancheRow:
    zero_fraction: float
    variant: str
    m: int
    fractions: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.fractions.mean())

    @property
    def variance(self) -> float:
        return float(self.fractions.var(ddof=1)) if self.fractions.size > 1 else 0.0

    @property
    def expected_variance(self) -> float:
        # Fresh window: every ciphertext bit flips independently with probability 1/2.
        return 0.25 / self.m if self.variant == FRESH_WINDOW else 0.0


@dataclass(frozen=True)
class AvalancheReport:
    trials: int
    rows: tuple[AvalancheRow, ...]

    @property
    def mean_flip_fraction(self) -> float:
        fresh = [r.mean for r in self.rows if r.variant == FRESH_WINDOW]
        return float(np.mean(fresh))

    def csv_rows(self) -> list[tuple[object, ...]]:
        return [(r.variant, r.zero_fraction, self.trials, r.mean, r.variance) for r in self.rows]


AVALANCHE_HEADER = ("variant", "zero_fraction", "trials", "mean_flip_fraction", "variance")


def _flip_fraction(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.count_nonzero(a != b)) / a.size


def avalanche_bench(
    params: LabParams,
    zero_fractions: Iterable[float],
    trials: int,
    rng: RandomSource,
) -> AvalancheReport:
    """
    One matrix for the whole run, a fresh key per trial. Plaintext M has the given fraction of
    zero bits; M' is M with its first bit flipped.
    """
    if params.m < MIN_AVALANCHE_BITS:
        raise ParamError(f"avalanche needs m >= {MIN_AVALANCHE_BITS} bits, got {params.m}.")
    if trials < 1:
        raise ParamError("avalanche needs at least one trial.")
    validate_params(params.n, params.k, params.m, 2).require()

    spec = MatrixSpec(k=params.k, n=params.n)
    matrix = generate_matrix(spec, rng)
    rows: list[AvalancheRow] = []
    for zero_fraction in zero_fractions:
        if not 0.0 <= zero_fraction <= 1.0:
            raise ParamError(f"zero fraction must lie in [0, 1], got {zero_fraction}.")
        same = np.empty(trials)
        fresh = np.empty(trials)
        for t in range(trials):
            key = generate_pairwise_key(spec, (0, 1), 0, rng)
            bits = rng.bits(params.m, 1.0 - zero_fraction)
            flipped = bits.copy()
            flipped[0] ^= 1
            base = encrypt(matrix, key, Message(bits), 1, eta_max=2).payload
            again = encrypt(matrix, key, Message(flipped), 1, eta_max=2).payload
            shifted = encrypt(matrix, key, Message(flipped), 2, eta_max=2).payload
            same[t] = _flip_fraction(base, again)
            fresh[t] = _flip_fraction(base, shifted)
        rows.append(AvalancheRow(zero_fraction, SAME_WINDOW, params.m, same))
        rows.append(AvalancheRow(zero_fraction, FRESH_WINDOW, params.m, fresh))
        logger.info(
            "avalanche zero_fraction=%.2f: same=%.6g fresh=%.6g",
            zero_fraction,
            same.mean(),
            fresh.mean(),
        )
    return AvalancheReport(trials=trials, rows=tuple(rows))


@dataclass(frozen=True)
class RuntimeRow:
    m: int
    k: int
    encrypt_seconds: float
    decrypt_seconds: float

    @property
    def throughput(self) -> float:
        """Encrypted bits per second."""
        return self.m / self.encrypt_seconds if self.encrypt_seconds > 0 else float("inf")


@dataclass(frozen=True)
class RuntimeReport:
    n: int
    repetitions: int
    rows: tuple[RuntimeRow, ...]
    slope: float
    intercept: float
    r_squared: float

    def row(self, m: int, k: int) -> RuntimeRow:
        for r in self.rows:
            if r.m == m and r.k == k:
                return r
        raise KeyError((m, k))

    def csv_rows(self) -> list[tuple[object, ...]]:
        return [
            (r.m, r.k, r.encrypt_seconds, r.decrypt_seconds, r.throughput) for r in self.rows
        ]


RUNTIME_HEADER = ("m", "k", "encrypt_seconds", "decrypt_seconds", "throughput_bits_per_s")


def _median_seconds(fn: Callable[[], object], repetitions: int) -> float:
    fn()  # warm-up
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def runtime_bench(
    grid: Sequence[tuple[int, int]],
    repetitions: int,
    rng: RandomSource,
    *,
    n: int | None = None,
) -> RuntimeReport:
    """
    Median wall-clock encrypt/decrypt time per (m, k), then a least-squares fit
    time = a * m * k + b. Runs sequentially.
    """
    if not grid:
        raise ParamError("runtime grid is empty.")
    if repetitions < 1:
        raise ParamError("need at least one repetition.")
    if n is None:
        n = 1 << (4 * max(m for m, _ in grid) - 1).bit_length()
    matrices = {}
    rows = []
    for m, k in grid:
        validate_params(n, k, m).require()
        if k not in matrices:
            matrices[k] = generate_matrix(MatrixSpec(k=k, n=n), rng)
        matrix = matrices[k]
        key = generate_pairwise_key(matrix.spec, (0, 1), 0, rng)
        message = Message(rng.bits(m))
        ct = encrypt(matrix, key, message)
        enc = _median_seconds(lambda: encrypt(matrix, key, message), repetitions)
        dec = _median_seconds(lambda: decrypt(matrix, key, ct), repetitions)
        rows.append(RuntimeRow(m=m, k=k, encrypt_seconds=enc, decrypt_seconds=dec))
        logger.info("runtime m=%d k=%d: encrypt=%.3gs decrypt=%.3gs", m, k, enc, dec)

    work = np.array([r.m * r.k for r in rows], dtype=np.float64)
    seconds = np.array([r.encrypt_seconds for r in rows])
    if np.unique(work).size > 1:
        fit = stats.linregress(work, seconds)
        slope, intercept, r_squared = float(fit.slope), float(fit.intercept), float(fit.rvalue**2)
    else:
        slope, intercept, r_squared = float(seconds.mean() / work[0]), 0.0, 1.0
    return RuntimeReport(
        n=n,
        repetitions=repetitions,
        rows=tuple(rows),
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
    )
