from __future__ import annotations

import math

import pytest

from mpad.attack import LabParams
from mpad.bench import (
    AVALANCHE_HEADER,
    FRESH_WINDOW,
    RUNTIME_KS,
    RUNTIME_SIZES,
    SAME_WINDOW,
    avalanche_bench,
    runtime_bench,
)
from mpad.errors import ParamError
from mpad.report import render_csv
from mpad.rng import RandomSource

AVALANCHE = LabParams(n=2**16, k=4, m=10_000)


def test_same_window_flips_exactly_one_bit() -> None:
    report = avalanche_bench(AVALANCHE, [0.0, 0.5], 10, RandomSource.seeded(1))
    same = [r for r in report.rows if r.variant == SAME_WINDOW]
    assert len(same) == 2
    for row in same:
        assert (row.fractions == 1 / AVALANCHE.m).all()
        assert row.variance == 0


@pytest.mark.parametrize("zero_fraction", [0.0, 0.25, 0.5, 0.9])
def test_fresh_window_flips_half(zero_fraction: float) -> None:
    report = avalanche_bench(AVALANCHE, [zero_fraction], 100, RandomSource.seeded(2))
    assert report.mean_flip_fraction == pytest.approx(0.5, abs=0.003)


def test_fresh_window_variance() -> None:
    trials = 400
    params = LabParams(n=2**16, k=2, m=10_000)
    report = avalanche_bench(params, [0.5], trials, RandomSource.seeded(3))
    (row,) = [r for r in report.rows if r.variant == FRESH_WINDOW]
    assert row.expected_variance == 0.25 / 10_000
    assert abs(row.variance / row.expected_variance - 1) <= 4 * math.sqrt(2 / (trials - 1))


def test_avalanche_csv() -> None:
    report = avalanche_bench(AVALANCHE, [0.5], 3, RandomSource.seeded(4))
    lines = render_csv(AVALANCHE_HEADER, report.csv_rows()).splitlines()
    assert lines[0] == "variant,zero_fraction,trials,mean_flip_fraction,variance"
    assert lines[1].startswith("same-window,0.5,3,")
    assert lines[2].startswith("fresh-window,0.5,3,")


@pytest.mark.parametrize(
    "params, zero_fractions",
    [
        (LabParams(n=2**16, k=4, m=1000), [0.5]),
        (LabParams(n=2**14, k=4, m=10_000), [0.5]),
        (AVALANCHE, [1.5]),
    ],
    ids=["short-message", "outside-regime", "bad-fraction"],
)
def test_avalanche_rejects(params: LabParams, zero_fractions: list[float]) -> None:
    with pytest.raises(ParamError):
        avalanche_bench(params, zero_fractions, 2, RandomSource.seeded(5))


@pytest.mark.slow
@pytest.mark.parametrize("zero_fraction", [0.01, 0.5, 0.99])
def test_megabit_avalanche(zero_fraction: float) -> None:
    params = LabParams(n=2**22, k=3, m=10**6)
    report = avalanche_bench(params, [zero_fraction], 5, RandomSource.seeded(6))
    assert report.mean_flip_fraction == pytest.approx(0.5, abs=0.003)
    (same,) = [r for r in report.rows if r.variant == SAME_WINDOW]
    assert (same.fractions == 1 / params.m).all()


def test_runtime_smoke() -> None:
    report = runtime_bench([(64, 2), (128, 2), (128, 4)], 3, RandomSource.seeded(7))
    assert report.n == 512
    assert len(report.rows) == 3
    assert report.row(128, 4).encrypt_seconds > 0
    assert math.isfinite(report.slope)
    with pytest.raises(KeyError):
        report.row(64, 4)


def test_runtime_rejects_empty_grid() -> None:
    with pytest.raises(ParamError):
        runtime_bench([], 3, RandomSource.seeded(8))


@pytest.mark.slow
def test_runtime_scaling_on_default_grid() -> None:
    grid = [(m, k) for m in RUNTIME_SIZES for k in RUNTIME_KS]
    report = runtime_bench(grid, 21, RandomSource.seeded(9))
    small, large = RUNTIME_SIZES
    low, high = RUNTIME_KS
    for k in RUNTIME_KS:
        ratio = report.row(large, k).encrypt_seconds / report.row(small, k).encrypt_seconds
        assert 1.8 <= ratio <= 2.2
    for m in RUNTIME_SIZES:
        ratio = report.row(m, high).encrypt_seconds / report.row(m, low).encrypt_seconds
        assert 1.15 <= ratio <= 1.45
    for row in report.rows:
        assert row.decrypt_seconds == pytest.approx(row.encrypt_seconds, rel=0.05)
