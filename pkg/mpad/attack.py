"""
Empirical checks of the scheme's probabilistic claims at desk scale.

Estimators are seeded, chunked and optionally parallel: trials are cut into chunks of
CHUNK_TRIALS, chunk c draws from `rng.split(c)`, so the result does not depend on how many
worker processes run the chunks. Exact oracles enumerate keys (and matrices, encoded as
integers whose bit j*n + c is matrix entry (j, c)) under an explicit enumeration budget.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy import stats

from .analytics import bound_terms
from .config import get_settings
from .core import derive_keystream, generate_matrix, generate_pairwise_key
from .errors import DimensionMismatch, EstimatorRefused, ParamError, SearchBudgetExceeded
from .model import Ciphertext, MatrixSpec, Message, PairwiseKey, RandomMatrix, bits_to_int
from .rng import RandomSource

logger = logging.getLogger(__name__)

CHUNK_TRIALS = 10_000
MIN_TRIALS = 10_000
MIN_SAMPLE_BITS = 100_000
ACCEPT_Z = 3.0
FAIL_Z = 4.0
ENUMERATION_LIMIT = 2**30
MATRIX_ENUMERATION_LIMIT = 2**24


def verdict_for(z: float, *, one_sided: bool = False) -> str:
    score = z if one_sided else abs(z)
    if score <= ACCEPT_Z:
        return "pass"
    if score <= FAIL_Z:
        return "warn"
    return "fail"


def _z(estimate: float, expected: float, trials: int) -> float:
    if expected <= 0.0 or expected >= 1.0:
        return 0.0 if estimate == expected else math.copysign(math.inf, estimate - expected)
    return (estimate - expected) / math.sqrt(expected * (1.0 - expected) / trials)


@dataclass(frozen=True)
class LabParams:
    """Experiment parameters. Unlike SystemParams, degenerate and out-of-regime values pass."""

    n: int
    k: int
    m: int
    eta_max: int = 1
    devices: int = 2

    def __post_init__(self) -> None:
        if min(self.n, self.k, self.m, self.eta_max) < 1:
            raise ParamError(f"lab parameters must be positive: {self.label}")
        if self.devices < 2:
            raise ParamError(f"need at least 2 devices, got {self.devices}.")

    @property
    def pair_count(self) -> int:
        return (self.devices**2 - self.devices) // 2

    @property
    def label(self) -> str:
        return (
            f"n={self.n};k={self.k};m={self.m};eta_max={self.eta_max};U={self.devices}"
        )

    def spec(self, bias: float = 0.5) -> MatrixSpec:
        return MatrixSpec(k=self.k, n=self.n, bias=bias)


def _run_chunks(
    fn: Callable[[LabParams, int, RandomSource, Any], tuple[int, ...]],
    params: LabParams,
    trials: int,
    rng: RandomSource,
    extra: Any = None,
    workers: int | None = None,
) -> np.ndarray:
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)
    sources = [rng.split(c) for c in range(len(sizes))]
    workers = workers or get_settings().workers
    if workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, params, s, src, extra) for s, src in zip(sizes, sources)]
            results = [f.result() for f in futures]
    else:
        results = [fn(params, s, src, extra) for s, src in zip(sizes, sources)]
    return np.sum(np.asarray(results, dtype=np.int64), axis=0)


def _in_window(diff: np.ndarray, n: int, width: int) -> np.ndarray:
    # diff in [0, n): is it one of -(width-1) .. width-1 mod n ?
    return (diff <= width - 1) | (diff >= n - (width - 1))


def window_probability(n: int, k: int, width: int) -> Fraction:
    """Probability that all k offsets of two uniform keys fall within +-(width-1)."""
    return Fraction(min(2 * width - 1, n) ** k, n**k)


# -- brute force


@dataclass(frozen=True, eq=False)
class KnownPlaintextPair:
    message: Message
    ciphertext: Ciphertext

    def __post_init__(self) -> None:
        if self.message.m != self.ciphertext.m:
            raise DimensionMismatch("message and ciphertext lengths differ.")

    @property
    def keystream_bits(self) -> np.ndarray:
        return self.message.bits ^ self.ciphertext.payload


@dataclass
class CandidateSet:
    keys: list[PairwiseKey] = field(default_factory=list)
    trials_tested: int = 0
    keyspace: int = 0

    def contains(self, key: PairwiseKey) -> bool:
        return any(c.values == key.values for c in self.keys)

    def false_candidates(self, true_key: PairwiseKey) -> list[PairwiseKey]:
        return [c for c in self.keys if c.values != true_key.values]


def brute_force_recover(
    matrix: RandomMatrix,
    evidence: KnownPlaintextPair,
    search_budget: int | None = None,
) -> CandidateSet:
    """
    Exhaustive key search in lexicographic order (first component most significant).
    Returns every key whose keystream equals message XOR ciphertext.
    """
    budget = search_budget if search_budget is not None else get_settings().search_budget
    n, k = matrix.n, matrix.k
    ct = evidence.ciphertext
    m = ct.m
    space = n**k
    if space > budget:
        logger.warning("refusing search over %d keys (budget %d)", space, budget)
        raise SearchBudgetExceeded(f"keyspace n^k = {space} exceeds search budget {budget}.")

    target = evidence.keystream_bits
    offset = (m * (ct.eta - 1)) % n
    steps = np.arange(m, dtype=np.int64)
    chunk = max(1, min(space, 2**22 // max(m, 1)))

    found = CandidateSet(keyspace=space)
    first_hit: int | None = None
    for start in range(0, space, chunk):
        ranks = np.arange(start, min(start + chunk, space), dtype=np.int64)
        digits = np.unravel_index(ranks, (n,) * k)
        acc = np.zeros((ranks.size, m), dtype=np.uint8)
        for j in range(k):
            cols = (digits[j][:, None] + offset + steps[None, :]) % n
            acc ^= matrix.bits[j, cols]
        hits = np.flatnonzero(np.all(acc == target, axis=1))
        for h in hits:
            values = tuple(int(d[h]) for d in digits)
            found.keys.append(PairwiseKey(pair=ct.pair, slot=ct.slot, n=n, values=values))
        if first_hit is None and hits.size:
            first_hit = int(ranks[hits[0]])
    found.trials_tested = space if first_hit is None else first_hit + 1
    return found


def known_plaintext(
    matrix: RandomMatrix, key: PairwiseKey, message: Message, eta: int = 1
) -> KnownPlaintextPair:
    """Evidence for the lab; skips the operating-regime check so wrapped windows are allowed."""
    stream = derive_keystream(matrix, key, message.m, eta)
    ct = Ciphertext(pair=key.pair, slot=key.slot, eta=eta, payload=message.bits ^ stream.bits)
    return KnownPlaintextPair(message=message, ciphertext=ct)


@dataclass(frozen=True)
class BruteForceSummary:
    params: LabParams
    instances: int
    recovered: int
    multi_candidate: int
    false_candidates: int
    mean_trials: float

    @property
    def expected_trials(self) -> float:
        # Uniform key, lexicographic search: (n^k + 1) / 2.
        return (self.params.n**self.params.k + 1) / 2

    @property
    def multi_candidate_fraction(self) -> float:
        return self.multi_candidate / self.instances


def brute_force_campaign(
    params: LabParams,
    instances: int,
    rng: RandomSource,
    search_budget: int | None = None,
) -> BruteForceSummary:
    """Fresh matrix, key and message per instance, one known-plaintext pair each."""
    if instances < 1:
        raise ParamError("need at least one instance.")
    spec = params.spec()
    recovered = multi = false = 0
    trials = 0
    for _ in range(instances):
        matrix = generate_matrix(spec, rng)
        key = generate_pairwise_key(spec, (0, 1), 0, rng)
        message = Message(rng.bits(params.m))
        found = brute_force_recover(matrix, known_plaintext(matrix, key, message), search_budget)
        recovered += found.contains(key)
        wrong = len(found.false_candidates(key))
        false += wrong
        multi += wrong > 0
        trials += found.trials_tested
    summary = BruteForceSummary(
        params=params,
        instances=instances,
        recovered=recovered,
        multi_candidate=multi,
        false_candidates=false,
        mean_trials=trials / instances,
    )
    logger.info("brute force %s: recovered %d/%d, mean trials %.1f", params.label,
                recovered, instances, summary.mean_trials)
    return summary


# -- collision events


@dataclass(frozen=True)
class CollisionEstimate:
    operation: str
    params: str
    trials: int
    hits: int
    analytic: float
    one_sided: bool = False

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def sigma(self) -> float:
        a = min(max(self.analytic, 0.0), 1.0)
        return math.sqrt(a * (1.0 - a) / self.trials)

    @property
    def z_score(self) -> float:
        if self.one_sided and self.analytic >= 1.0:
            return 0.0
        return _z(self.estimate, self.analytic, self.trials)

    @property
    def verdict(self) -> str:
        return verdict_for(self.z_score, one_sided=self.one_sided)

    def csv_row(self) -> tuple[Any, ...]:
        return (
            self.operation,
            self.params,
            self.trials,
            self.estimate,
            self.analytic,
            self.z_score,
            self.verdict,
        )


def _collision_chunk(params: LabParams, size: int, src: RandomSource, width: int) -> tuple[int]:
    n, k = params.n, params.k
    z = src.integers(n, size * k).reshape(size, k)
    z2 = src.integers(n, size * k).reshape(size, k)
    inside = _in_window((z2 - z) % n, n, width)
    return (int(np.all(inside, axis=1).sum()),)


def collision_probability_mc(
    params: LabParams,
    trials: int,
    rng: RandomSource,
    *,
    multi: bool = False,
    workers: int | None = None,
) -> CollisionEstimate:
    width = (params.eta_max if multi else 1) * params.m
    analytic = window_probability(params.n, params.k, width)
    if trials < MIN_TRIALS:
        raise EstimatorRefused(f"need at least {MIN_TRIALS} trials, got {trials}.")
    if analytic < Fraction(10, trials):
        raise EstimatorRefused(
            f"analytic probability {float(analytic):.3g} is below 10/trials; too rare to estimate."
        )
    (hits,) = _run_chunks(_collision_chunk, params, trials, rng, width, workers)
    est = CollisionEstimate(
        operation="collision_multi" if multi else "collision",
        params=params.label,
        trials=trials,
        hits=int(hits),
        analytic=float(analytic),
    )
    logger.info("%s %s: estimate=%.6g analytic=%.6g z=%.2f", est.operation, est.params,
                est.estimate, est.analytic, est.z_score)
    return est


def _all_keys(n: int, k: int) -> np.ndarray:
    # (n^k, k), lexicographic.
    return np.indices((n,) * k).reshape(k, -1).T.astype(np.int64)


def collision_probability_exact(
    params: LabParams, *, multi: bool = False, budget: int = ENUMERATION_LIMIT
) -> Fraction:
    """Window-event probability by enumerating every ordered key pair."""
    n, k = params.n, params.k
    if n ** (2 * k) > budget:
        raise SearchBudgetExceeded(f"{n ** (2 * k)} key pairs exceed enumeration budget {budget}.")
    width = (params.eta_max if multi else 1) * params.m
    keys = _all_keys(n, k)
    hits = 0
    for z in keys:
        hits += int(np.all(_in_window((keys - z) % n, n, width), axis=1).sum())
    return Fraction(hits, n ** (2 * k))


# -- one-time-pad failure


@dataclass(frozen=True)
class FailureEstimate(CollisionEstimate):
    window_hits: int = 0
    coincidence_hits: int = 0
    cross_window_hits: int = 0


def _streams(mats: np.ndarray, keys: np.ndarray, m: int, windows: int) -> np.ndarray:
    """mats (T, k, n), keys (T, P, k) -> keystream bits (T, P, windows, m)."""
    t, p, k = keys.shape
    n = mats.shape[2]
    steps = np.arange(m, dtype=np.int64)
    out = np.zeros((t, p, windows, m), dtype=np.uint8)
    for e in range(windows):
        cols = (keys[:, :, :, None] + m * e + steps) % n  # (T, P, k, m)
        for j in range(k):
            idx = cols[:, :, j, :].reshape(t, p * m)
            out[:, :, e, :] ^= np.take_along_axis(mats[:, j, :], idx, axis=1).reshape(t, p, m)
    return out


def _otp_chunk(params: LabParams, size: int, src: RandomSource, _: Any) -> tuple[int, ...]:
    n, k, m, e = params.n, params.k, params.m, params.eta_max
    p = params.pair_count
    mats = src.bits(size * k * n).reshape(size, k, n)
    keys = src.integers(n, size * p * k).reshape(size, p, k)

    diff = (keys[:, 1:, :] - keys[:, :1, :]) % n
    window_hit = np.all(_in_window(diff, n, e * m), axis=2).any(axis=1)

    streams = _streams(mats, keys, m, e)
    target = streams[:, 0]  # (T, E, m)
    others = streams[:, 1:]  # (T, P-1, E, m)
    same = np.all(target[:, None, :, None, :] == others[:, :, None, :, :], axis=-1)
    coincidence = same.any(axis=(1, 2, 3))

    cross = np.zeros(size, dtype=bool)
    for a in range(e):
        for b in range(a + 1, e):
            cross |= np.all(target[:, a] == target[:, b], axis=-1)

    failure = window_hit | coincidence
    return int(failure.sum()), int(window_hit.sum()), int(coincidence.sum()), int(cross.sum())


def otp_failure_bound(params: LabParams) -> Fraction:
    """Union bound W ((2 E m - 1)^k / n^k + E / 2^m); half of the advantage bound."""
    report = bound_terms(
        n=params.n, k=params.k, m=params.m, w=params.pair_count, messages=params.eta_max
    )
    return report.bound / 2


def one_time_pad_failure_mc(
    params: LabParams,
    trials: int,
    rng: RandomSource,
    *,
    workers: int | None = None,
) -> FailureEstimate:
    """
    Per trial: fresh matrix and one key per pair. The target pair (0, 1) fails when its window
    overlaps another pair's in every row, or its keystream equals another pair's keystream.
    Same-pair coincidences across its own windows are counted separately, not as failures.
    """
    if trials < MIN_TRIALS:
        raise EstimatorRefused(f"need at least {MIN_TRIALS} trials, got {trials}.")
    cells = params.k * params.n + params.pair_count * params.eta_max * params.m * params.k
    if cells > 4096:
        raise EstimatorRefused(f"{params.label} is too large for per-trial provisioning.")
    failures, window, coincidence, cross = _run_chunks(
        _otp_chunk, params, trials, rng, None, workers
    )
    est = FailureEstimate(
        operation="otp_failure",
        params=params.label,
        trials=trials,
        hits=int(failures),
        analytic=float(otp_failure_bound(params)),
        one_sided=True,
        window_hits=int(window),
        coincidence_hits=int(coincidence),
        cross_window_hits=int(cross),
    )
    logger.info("otp_failure %s: estimate=%.6g bound=%.6g verdict=%s", est.params,
                est.estimate, est.analytic, est.verdict)
    return est


def _window_table(n: int, k: int, m: int) -> np.ndarray:
    """
    table[j, c] = m-bit window of row j starting at column c, as an int, for every matrix.
    Shape (k, n, 2^(k n)).
    """
    mats = np.arange(2 ** (k * n), dtype=np.uint64)
    table = np.zeros((k, n, mats.size), dtype=np.uint64)
    for j in range(k):
        for c in range(n):
            for i in range(m):
                bit = (mats >> np.uint64(j * n + (c + i) % n)) & np.uint64(1)
                table[j, c] |= bit << np.uint64(i)
    return table


def _check_enumeration(params: LabParams, pairs: int, budget: int) -> None:
    n, k = params.n, params.k
    size = 2 ** (k * n) * n ** (k * pairs)
    if 2 ** (k * n) > MATRIX_ENUMERATION_LIMIT or size > budget:
        logger.warning("refusing enumeration of %d (matrix, keys) combinations", size)
        raise SearchBudgetExceeded(
            f"enumeration of 2^(kn) n^(kP) = {size} combinations exceeds budget {budget}."
        )


def _stream_of(table: np.ndarray, key: Sequence[int], n: int, shift: int) -> np.ndarray:
    acc = table[0, (key[0] + shift) % n].copy()
    for j in range(1, len(key)):
        acc ^= table[j, (key[j] + shift) % n]
    return acc


@dataclass(frozen=True)
class OtpFailureExact:
    failure: Fraction
    window: Fraction


def one_time_pad_failure_exact(
    params: LabParams, *, budget: int = ENUMERATION_LIMIT
) -> OtpFailureExact:
    """Exact failure probability of the target pair over every key tuple and every matrix."""
    n, k, m, e = params.n, params.k, params.m, params.eta_max
    p = params.pair_count
    _check_enumeration(params, p, budget)
    table = _window_table(n, k, m)
    matrices = table.shape[2]

    failures = 0
    windows = 0
    for flat in _all_keys(n, k * p):
        keys = flat.reshape(p, k)
        diff = (keys[1:] - keys[0]) % n
        if p > 1 and np.all(_in_window(diff, n, e * m), axis=1).any():
            windows += 1
            failures += matrices
            continue
        target = [_stream_of(table, keys[0], n, m * a) for a in range(e)]
        hit = np.zeros(matrices, dtype=bool)
        for other in keys[1:]:
            for b in range(e):
                s = _stream_of(table, other, n, m * b)
                for t in target:
                    hit |= t == s
        failures += int(hit.sum())
    tuples = n ** (k * p)
    return OtpFailureExact(
        failure=Fraction(failures, tuples * matrices), window=Fraction(windows, tuples)
    )


# -- keystream statistics


@dataclass(frozen=True)
class FrequencyReport:
    spec: MatrixSpec
    sample_bits: int
    ones: int
    predicted: float
    p_value: float

    @property
    def frequency(self) -> float:
        return self.ones / self.sample_bits

    @property
    def z_score(self) -> float:
        return _z(self.frequency, self.predicted, self.sample_bits)

    @property
    def verdict(self) -> str:
        return verdict_for(self.z_score)

    def csv_row(self) -> tuple[Any, ...]:
        label = f"n={self.spec.n};k={self.spec.k};bias={self.spec.bias}"
        return ("frequency", label, self.sample_bits, self.frequency, self.predicted,
                self.z_score, self.verdict)


def predicted_frequency(k: int, bias: float) -> float:
    return (1.0 - (1.0 - 2.0 * bias) ** k) / 2.0


def keystream_frequency_test(
    spec: MatrixSpec, sample_bits: int, rng: RandomSource
) -> FrequencyReport:
    """
    Keystream bit frequency against (1 - (1 - 2 bias)^k) / 2. Each chunk of up to n bits uses a
    fresh matrix of the given spec and one window, so each entry feeds at most one bit.
    """
    if sample_bits < MIN_SAMPLE_BITS:
        raise EstimatorRefused(f"need at least {MIN_SAMPLE_BITS} bits, got {sample_bits}.")
    ones = 0
    remaining = sample_bits
    while remaining:
        width = min(spec.n, remaining)
        matrix = generate_matrix(spec, rng)
        key = generate_pairwise_key(spec, (0, 1), 0, rng)
        ones += int(derive_keystream(matrix, key, width).bits.sum())
        remaining -= width
    predicted = predicted_frequency(spec.k, spec.bias)
    if 0.0 < predicted < 1.0:
        p_value = float(stats.binomtest(ones, sample_bits, predicted).pvalue)
    else:
        p_value = 1.0 if ones == round(predicted * sample_bits) else 0.0
    return FrequencyReport(spec, sample_bits, ones, predicted, p_value)


@dataclass(frozen=True)
class ChiSquareReport:
    samples: int
    statistics: tuple[float, ...]
    p_values: tuple[float, ...]
    alpha: float = 1e-4

    @property
    def passed(self) -> bool:
        # Bonferroni over components.
        return min(self.p_values) >= self.alpha / len(self.p_values)


def subkey_uniformity_test(
    n: int, k: int, m: int, eta: int, samples: int, rng: RandomSource
) -> ChiSquareReport:
    """Chi-square on each sub-key component for uniform keys and a uniform bit index."""
    z = rng.integers(n, samples * k).reshape(samples, k)
    i = rng.integers(m, samples) + 1
    offsets = m * (eta - 1) + i - 1
    sub = (z + offsets[:, None]) % n
    statistics, p_values = [], []
    for j in range(k):
        result = stats.chisquare(np.bincount(sub[:, j], minlength=n))
        statistics.append(float(result.statistic))
        p_values.append(float(result.pvalue))
    return ChiSquareReport(samples, tuple(statistics), tuple(p_values))


@dataclass(frozen=True)
class CorrelationReport:
    samples: int
    correlation: float

    @property
    def z_score(self) -> float:
        return self.correlation * math.sqrt(self.samples)

    @property
    def verdict(self) -> str:
        return verdict_for(self.z_score)


def keystream_correlation_test(
    k: int, sample_bits: int, rng: RandomSource, *, block: int = 2**14
) -> CorrelationReport:
    """Bit-pair correlation of two independent keys whose windows share no matrix position."""
    n = 4 * block
    spec = MatrixSpec(k=k, n=n)
    xs, ys = [], []
    remaining = sample_bits
    while remaining:
        m = min(block, remaining)
        matrix = generate_matrix(spec, rng)
        z = rng.integers(n, k)
        gap = rng.integers(n - 2 * m + 1, k)
        z2 = (z + m + gap) % n
        a = PairwiseKey(pair=(0, 1), slot=0, n=n, values=tuple(int(v) for v in z))
        b = PairwiseKey(pair=(0, 2), slot=0, n=n, values=tuple(int(v) for v in z2))
        xs.append(derive_keystream(matrix, a, m).bits)
        ys.append(derive_keystream(matrix, b, m).bits)
        remaining -= m
    x = np.concatenate(xs).astype(np.float64)
    y = np.concatenate(ys).astype(np.float64)
    return CorrelationReport(samples=x.size, correlation=float(np.corrcoef(x, y)[0, 1]))


# -- semantic-security game


@dataclass(frozen=True)
class GameResult:
    advantage_exact: Fraction
    bound: Fraction
    overlap_probability: Fraction
    transcripts: int

    @property
    def dominated(self) -> bool:
        return self.bound >= 1 or self.advantage_exact <= self.bound


def exact_bayes_advantage(
    params: LabParams,
    messages: tuple[Message, Message],
    others: Sequence[Message],
    *,
    budget: int = ENUMERATION_LIMIT,
) -> GameResult:
    """
    Exact optimal-distinguisher advantage for the target pair (0, 1) when every pair sends one
    message at eta = 1 and the other pairs' plaintexts are fixed and known. The advantage is
    the total-variation distance between the transcript distributions for M0 and M1,
    marginalized over all matrices and all key tuples.
    """
    n, k, m = params.n, params.k, params.m
    p = params.pair_count
    if len(others) != p - 1:
        raise ParamError(f"{p} pairs need {p - 1} known messages, got {len(others)}.")
    if any(msg.m != m for msg in (*messages, *others)):
        raise DimensionMismatch(f"all game messages must be {m} bits.")
    if m * p > 24:
        raise SearchBudgetExceeded(f"transcript space 2^{m * p} is too large to tabulate.")
    _check_enumeration(params, p, budget)

    table = _window_table(n, k, m)
    matrices = table.shape[2]
    m0, m1 = (np.uint64(bits_to_int(msg.bits)) for msg in messages)
    known = [np.uint64(bits_to_int(msg.bits)) for msg in others]
    size = 2 ** (m * p)
    hist0 = np.zeros(size, dtype=np.int64)
    hist1 = np.zeros(size, dtype=np.int64)
    overlaps = 0

    for flat in _all_keys(n, k * p):
        keys = flat.reshape(p, k)
        if p > 1 and np.all(_in_window((keys[1:] - keys[0]) % n, n, m), axis=1).any():
            overlaps += 1
        rest = np.zeros(matrices, dtype=np.uint64)
        for idx, msg in enumerate(known, start=1):
            rest |= (_stream_of(table, keys[idx], n, 0) ^ msg) << np.uint64(m * idx)
        target = _stream_of(table, keys[0], n, 0)
        hist0 += np.bincount((rest | (target ^ m0)).astype(np.int64), minlength=size)
        hist1 += np.bincount((rest | (target ^ m1)).astype(np.int64), minlength=size)

    tuples = n ** (k * p)
    total = tuples * matrices
    advantage = Fraction(int(np.abs(hist0 - hist1).sum()), 2 * total)
    bound = bound_terms(n=n, k=k, m=m, w=p, messages=1).bound
    result = GameResult(
        advantage_exact=advantage,
        bound=bound,
        overlap_probability=Fraction(overlaps, tuples),
        transcripts=size,
    )
    if not result.dominated:
        logger.warning("exact advantage %s exceeds bound %s", advantage, bound)
    return result


def random_layout(
    params: LabParams, rng: RandomSource
) -> tuple[tuple[Message, Message], list[Message]]:
    """Two distinct challenge messages and one known message per other pair."""
    m = params.m
    m0 = Message(rng.bits(m))
    delta = rng.bits(m)
    if not delta.any():
        delta[rng.integers(m, 1)[0]] = 1
    m1 = Message(m0.bits ^ delta)
    others = [Message(rng.bits(m)) for _ in range(params.pair_count - 1)]
    return (m0, m1), others
