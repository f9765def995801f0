"""
Closed-form security and secrecy quantities.

Logarithms are base 2. Bounds and gains are evaluated as exact rationals wherever log2 n is
an integer (n a power of two); mpmath at `Settings.precision_bits` handles logarithms and
non-power-of-two n. Nothing is clamped: a bound >= 1 is reported and flagged vacuous.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import mpmath
from mpmath import mpf

from .config import get_settings
from .core import validate_params
from .errors import ParamError, UnknownDevice
from .model import Pair

logger = logging.getLogger(__name__)


def _workprec() -> Any:
    return mpmath.workprec(get_settings().precision_bits)


def exact_log2(n: int) -> int | None:
    """log2 n when n is a power of two, else None."""
    if n >= 1 and n & (n - 1) == 0:
        return n.bit_length() - 1
    return None


def _log2(n: int) -> mpf:
    exact = exact_log2(n)
    if exact is not None:
        return mpf(exact)
    return mpmath.log(mpf(n), 2)


def _fraction_log2(value: Fraction) -> mpf:
    if value <= 0:
        return mpf("-inf")
    return mpmath.log(mpf(value.numerator), 2) - mpmath.log(mpf(value.denominator), 2)


@dataclass(frozen=True)
class SystemParams:
    n: int
    k: int
    m: int
    devices: int
    eta_max: int = 1
    lam: int = 1
    lambdas: Mapping[Pair, int] = field(default_factory=dict)
    minted: int = 0
    # Star topology: only pairs with this device (the distributor) are provisioned.
    hub: int | None = None

    def __post_init__(self) -> None:
        validate_params(self.n, self.k, self.m, self.eta_max).require()
        if self.devices < 2:
            raise ParamError(f"a fleet needs U >= 2 devices, got {self.devices}.")
        if self.lam < 1 or any(v < 1 for v in self.lambdas.values()):
            raise ParamError("every pair needs lambda >= 1 keys.")
        if self.hub is not None and not 0 <= self.hub < self.devices:
            raise ParamError(f"hub {self.hub} is not in a fleet of {self.devices}.")
        for q, l in self.lambdas:
            if not 0 <= q < l < self.devices:
                raise ParamError(f"lambda given for pair {(q, l)} outside the fleet.")
            if self.hub is not None and self.hub not in (q, l):
                raise ParamError(f"pair {(q, l)} is not provisioned around hub {self.hub}.")
        if self.minted < 0:
            raise ParamError("minted key count cannot be negative.")

    @property
    def pair_count(self) -> int:
        if self.hub is not None:
            return self.devices - 1
        return (self.devices**2 - self.devices) // 2

    def pairs(self) -> Iterator[Pair]:
        if self.hub is not None:
            return ((min(self.hub, d), max(self.hub, d)) for d in self.peers(self.hub))
        return itertools.combinations(range(self.devices), 2)

    def peers(self, device_id: int) -> list[int]:
        """Devices holding a provisioned key with `device_id`."""
        if self.hub is None or device_id == self.hub:
            return [d for d in range(self.devices) if d != device_id]
        return [self.hub]

    def lambda_for(self, q: int, l: int) -> int:
        pair = (q, l) if q < l else (l, q)
        return self.lambdas.get(pair, self.lam)

    @property
    def total_keys(self) -> int:
        if not self.lambdas:
            return self.pair_count * self.lam
        return sum(self.lambda_for(q, l) for q, l in self.pairs())

    @property
    def effective_w(self) -> int:
        # With every lambda = 1 and nothing minted this is (U^2 - U) / 2.
        return self.total_keys + self.minted

    def with_minted(self, count: int) -> SystemParams:
        return replace(self, minted=count)


@dataclass(frozen=True)
class BoundReport:
    bound: Fraction
    log2_bound: float
    term_collision: Fraction
    term_coincidence: Fraction
    effective_w: int
    messages: int

    @property
    def vacuous(self) -> bool:
        return self.bound >= 1

    @property
    def flag(self) -> str:
        return "vacuous bound >= 1" if self.vacuous else ""


def bound_terms(*, n: int, k: int, m: int, w: int, messages: int) -> BoundReport:
    """The bound formula on raw numbers, without parameter validation (attack-lab uses it)."""
    e = messages
    term_collision = Fraction((2 * e * m - 1) ** k, n**k)
    term_coincidence = Fraction(e, 2**m)
    bound = 2 * w * (term_collision + term_coincidence)
    with _workprec():
        log2_bound = float(_fraction_log2(bound))
    return BoundReport(
        bound=bound,
        log2_bound=log2_bound,
        term_collision=term_collision,
        term_coincidence=term_coincidence,
        effective_w=w,
        messages=e,
    )


def advantage_bound(params: SystemParams, *, multi: bool = True) -> BoundReport:
    """
    2 W_eff ((2 E m - 1)^k / n^k + E / 2^m): E = eta_max for the multi-message bound,
    E = 1 for the single-message bound. W_eff counts every key, minted ones included.
    """
    report = bound_terms(
        n=params.n,
        k=params.k,
        m=params.m,
        w=params.effective_w,
        messages=params.eta_max if multi else 1,
    )
    if report.vacuous:
        logger.info("advantage bound is vacuous (2^%.3f)", report.log2_bound)
    return report


@dataclass(frozen=True)
class GainReport:
    numerator_bits: int
    denominator_bits: Fraction | mpf
    exact: bool

    @property
    def gain(self) -> float:
        if self.exact:
            return float(Fraction(self.numerator_bits) / self.denominator_bits)
        with _workprec():
            return float(mpf(self.numerator_bits) / self.denominator_bits)

    def as_fraction(self) -> Fraction:
        if not self.exact:
            raise ParamError("gain is irrational for non-power-of-two n.")
        return Fraction(self.numerator_bits) / self.denominator_bits


def _gain(params: SystemParams, pairs: Iterable[Pair]) -> GainReport:
    lam_sum = sum(params.lambda_for(q, l) for q, l in pairs)
    numerator = lam_sum * params.m * params.eta_max
    log_n = exact_log2(params.n)
    matrix_bits = params.k * params.n
    if log_n is not None:
        return GainReport(numerator, Fraction(lam_sum * params.k * log_n + matrix_bits), exact=True)
    with _workprec():
        denominator = lam_sum * params.k * _log2(params.n) + matrix_bits
    return GainReport(numerator, denominator, exact=False)


def _check_device(params: SystemParams, device_id: int) -> None:
    if not 0 <= device_id < params.devices:
        raise UnknownDevice(f"device {device_id} is not in a fleet of {params.devices}.")


def device_secrecy_gain(params: SystemParams, device_id: int) -> GainReport:
    _check_device(params, device_id)
    return _gain(params, ((device_id, l) for l in params.peers(device_id)))


def system_secrecy_gain(params: SystemParams) -> GainReport:
    return _gain(params, params.pairs())


@dataclass(frozen=True)
class DeviceBudget:
    device_id: int
    exchangeable_bits: int
    stored_secret_bits: Fraction | mpf
    secret_bits_per_encrypted_bit: float
    xors_per_encrypted_bit: int

    @property
    def exchangeable_bytes(self) -> int:
        return self.exchangeable_bits // 8


def device_budget(params: SystemParams, device_id: int) -> DeviceBudget:
    gain = device_secrecy_gain(params, device_id)
    return DeviceBudget(
        device_id=device_id,
        exchangeable_bits=gain.numerator_bits,
        stored_secret_bits=gain.denominator_bits,
        secret_bits_per_encrypted_bit=1.0 / gain.gain,
        xors_per_encrypted_bit=params.k + 1,
    )


def pair_capacity_bits(params: SystemParams, pair: Pair | None = None) -> int:
    lam = params.lam if pair is None else params.lambda_for(*pair)
    return lam * params.m * params.eta_max


def max_eta(n: int, m: int) -> int:
    if n < 1 or m < 1:
        raise ParamError("n and m must be positive.")
    return ((n + 1) // 2) // m


@dataclass(frozen=True)
class RecoveryCost:
    keyspace_log2: float
    expected_trials_log2: float
    success_prob_lower: float
    exact: bool


def key_recovery_cost(n: int, k: int, m: int) -> RecoveryCost:
    log_n = exact_log2(n)
    with _workprec():
        success = float(1 - mpf(2) ** -m)
        if log_n is not None:
            keyspace: float = k * log_n
        else:
            keyspace = float(k * _log2(n))
    return RecoveryCost(
        keyspace_log2=keyspace,
        expected_trials_log2=keyspace - 1,
        success_prob_lower=success,
        exact=log_n is not None,
    )


# sweep


METRICS = (
    "advantage_log2",
    "advantage_single_log2",
    "device_gain",
    "system_gain",
    "pair_capacity_bits",
    "max_eta",
    "expected_trials_log2",
)
SWEEP_FIELDS = ("n", "k", "m", "devices", "eta_max", "lam")


@dataclass(frozen=True)
class SweepRow:
    params: dict[str, int]
    metric: str
    value: float | int | None
    valid: bool
    reason: str = ""


def evaluate_metric(params: SystemParams, metric: str) -> float | int:
    match metric:
        case "advantage_log2":
            return advantage_bound(params).log2_bound
        case "advantage_single_log2":
            return advantage_bound(params, multi=False).log2_bound
        case "device_gain":
            return device_secrecy_gain(params, 0).gain
        case "system_gain":
            return system_secrecy_gain(params).gain
        case "pair_capacity_bits":
            return pair_capacity_bits(params)
        case "max_eta":
            return max_eta(params.n, params.m)
        case "expected_trials_log2":
            return key_recovery_cost(params.n, params.k, params.m).expected_trials_log2
    raise ParamError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}.")


def sweep(grid: Mapping[str, Iterable[int]], metric: str) -> list[SweepRow]:
    """
    One row per combination of the grid values (cartesian product, grid order).
    Every SWEEP_FIELDS name must be present. Invalid combinations become flagged rows.
    """
    if metric not in METRICS:
        raise ParamError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}.")
    missing = [f for f in SWEEP_FIELDS if f not in grid]
    if missing:
        raise ParamError(f"sweep grid is missing {', '.join(missing)}.")
    axes = [list(grid[f]) for f in SWEEP_FIELDS]
    rows: list[SweepRow] = []
    for combo in itertools.product(*axes):
        point = dict(zip(SWEEP_FIELDS, combo, strict=True))
        try:
            params = SystemParams(**point)
        except ParamError as e:
            rows.append(SweepRow(point, metric, None, valid=False, reason=str(e)))
            continue
        rows.append(SweepRow(point, metric, evaluate_metric(params, metric), valid=True))
    logger.debug("sweep over %d combinations for %s", len(rows), metric)
    return rows
