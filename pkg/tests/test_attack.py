from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from mpad.attack import (
    LabParams,
    brute_force_campaign,
    brute_force_recover,
    keystream_correlation_test,
    keystream_frequency_test,
    collision_probability_exact,
    collision_probability_mc,
    exact_bayes_advantage,
    known_plaintext,
    one_time_pad_failure_exact,
    one_time_pad_failure_mc,
    otp_failure_bound,
    predicted_frequency,
    random_layout,
    subkey_uniformity_test,
    verdict_for,
)
from mpad.core import derive_keystream, generate_matrix, generate_pairwise_key
from mpad.errors import EstimatorRefused, SearchBudgetExceeded
from mpad.model import MatrixSpec, Message, PairwiseKey, RandomMatrix
from mpad.report import ESTIMATE_HEADER, render_estimates_csv
from mpad.rng import RandomSource


@pytest.mark.parametrize(
    ("z", "expected"), [(0.0, "pass"), (-3.0, "pass"), (3.5, "warn"), (-4.5, "fail")]
)
def test_verdict_thresholds(z: float, expected: str) -> None:
    assert verdict_for(z) == expected


def test_one_sided_verdict_ignores_low_estimates() -> None:
    assert verdict_for(-10.0, one_sided=True) == "pass"


# -- brute force


def test_brute_force_singleton_keyspace(rng: RandomSource) -> None:
    spec = MatrixSpec(k=1, n=1)
    matrix = generate_matrix(spec, rng)
    key = PairwiseKey(pair=(0, 1), slot=0, n=1, values=(0,))
    found = brute_force_recover(matrix, known_plaintext(matrix, key, Message(rng.bits(4))))
    assert [c.values for c in found.keys] == [(0,)]
    assert found.trials_tested == 1


def test_brute_force_candidates_are_sound(rng: RandomSource) -> None:
    spec = MatrixSpec(k=2, n=16)
    for _ in range(50):
        matrix = generate_matrix(spec, rng)
        key = generate_pairwise_key(spec, (0, 1), 0, rng)
        evidence = known_plaintext(matrix, key, Message(rng.bits(24)))
        found = brute_force_recover(matrix, evidence)
        assert found.contains(key)
        for candidate in found.keys:
            stream = derive_keystream(matrix, candidate, 24).bits
            assert np.array_equal(stream, evidence.keystream_bits)


def test_brute_force_desk_scale() -> None:
    summary = brute_force_campaign(LabParams(n=16, k=2, m=24), 1000, RandomSource.seeded(2024))
    assert summary.recovered == 1000
    assert summary.expected_trials == pytest.approx(128.5)
    assert summary.mean_trials == pytest.approx(128, rel=0.10)
    # With m > (n + 1) / 2 windows wrap; rows of period 8 make shifted keys equivalent.
    assert summary.multi_candidate_fraction <= 0.05


def test_brute_force_no_false_candidates_in_regime() -> None:
    summary = brute_force_campaign(LabParams(n=64, k=2, m=31), 200, RandomSource.seeded(99))
    assert summary.recovered == 200
    assert summary.false_candidates == 0


def test_brute_force_respects_search_budget(rng: RandomSource) -> None:
    spec = MatrixSpec(k=2, n=64)
    matrix = generate_matrix(spec, rng)
    key = generate_pairwise_key(spec, (0, 1), 0, rng)
    evidence = known_plaintext(matrix, key, Message(rng.bits(10)))
    with pytest.raises(SearchBudgetExceeded):
        brute_force_recover(matrix, evidence, search_budget=1000)


# -- collisions


@pytest.mark.parametrize(
    ("n", "k", "m", "expected"),
    [(8, 1, 2, Fraction(24, 64)), (8, 2, 2, Fraction(576, 4096))],
)
def test_collision_exact(n: int, k: int, m: int, expected: Fraction) -> None:
    assert collision_probability_exact(LabParams(n=n, k=k, m=m)) == expected


@pytest.mark.parametrize(("n", "k", "m"), [(8, 1, 2), (8, 2, 2)])
def test_collision_mc_agrees_with_exact(n: int, k: int, m: int) -> None:
    params = LabParams(n=n, k=k, m=m)
    est = collision_probability_mc(params, 100_000, RandomSource.seeded(n * 10 + k))
    assert est.analytic == float(collision_probability_exact(params))
    assert abs(est.z_score) <= 4


def test_collision_full_window_saturates() -> None:
    est = collision_probability_mc(LabParams(n=4, k=2, m=3), 10_000, RandomSource.seeded(1))
    assert est.analytic == 1.0
    assert est.hits == est.trials
    assert est.verdict == "pass"


def test_collision_multi_window() -> None:
    params = LabParams(n=64, k=1, m=3, eta_max=2)
    assert collision_probability_exact(params, multi=True) == Fraction(11, 64)
    est = collision_probability_mc(params, 50_000, RandomSource.seeded(4), multi=True)
    assert est.verdict != "fail"


def test_collision_refusals() -> None:
    with pytest.raises(EstimatorRefused):
        collision_probability_mc(LabParams(n=8, k=1, m=2), 100, RandomSource.seeded(1))
    with pytest.raises(EstimatorRefused):
        collision_probability_mc(LabParams(n=2**20, k=4, m=2), 10_000, RandomSource.seeded(1))


def test_collision_result_independent_of_workers() -> None:
    params = LabParams(n=16, k=1, m=3)
    one = collision_probability_mc(params, 25_000, RandomSource.seeded(6), workers=1)
    two = collision_probability_mc(params, 25_000, RandomSource.seeded(6), workers=2)
    assert one.hits == two.hits


def test_estimates_csv() -> None:
    est = collision_probability_mc(LabParams(n=8, k=1, m=2), 10_000, RandomSource.seeded(3))
    lines = render_estimates_csv([est.csv_row()]).splitlines()
    assert lines[0] == ",".join(ESTIMATE_HEADER)
    assert lines[1].startswith("collision,n=8;k=1;m=2;eta_max=1;U=2,10000,")


# -- one-time-pad failure


def test_otp_failure_single_pair_never_fails() -> None:
    est = one_time_pad_failure_mc(LabParams(n=16, k=1, m=2), 10_000, RandomSource.seeded(1))
    assert est.hits == 0


def test_otp_failure_below_union_bound() -> None:
    params = LabParams(n=64, k=2, m=3, devices=4)
    est = one_time_pad_failure_mc(params, 100_000, RandomSource.seeded(64))
    assert est.analytic == float(otp_failure_bound(params))
    assert est.verdict != "fail"
    assert est.window_hits <= est.hits


def test_otp_failure_exact_and_mc() -> None:
    params = LabParams(n=16, k=1, m=2, devices=3)
    exact = one_time_pad_failure_exact(params)
    assert exact.failure <= otp_failure_bound(params)
    # Two other pairs, each overlapping the target window with probability 3/16.
    assert exact.window == 1 - (1 - Fraction(3, 16)) ** 2
    est = one_time_pad_failure_mc(params, 100_000, RandomSource.seeded(16))
    p = float(exact.failure)
    z = (est.estimate - p) / np.sqrt(p * (1 - p) / est.trials)
    assert abs(z) <= 4


def test_otp_failure_counts_cross_window_coincidences_separately() -> None:
    params = LabParams(n=64, k=1, m=2, eta_max=4, devices=2)
    est = one_time_pad_failure_mc(params, 20_000, RandomSource.seeded(5))
    assert est.hits == 0
    # Four independent 2-bit windows are pairwise distinct with probability 4! / 4^4.
    assert est.cross_window_hits / est.trials == pytest.approx(1 - 24 / 256, abs=0.01)


def test_otp_exact_enumeration_budget() -> None:
    with pytest.raises(SearchBudgetExceeded):
        one_time_pad_failure_exact(LabParams(n=64, k=1, m=2, devices=3))


# -- keystream statistics


@pytest.mark.parametrize("k", [1, 8, 46])
def test_unbiased_keystream_frequency(k: int) -> None:
    report = keystream_frequency_test(MatrixSpec(k=k, n=2**16), 10**6, RandomSource.seeded(k))
    assert report.predicted == 0.5
    assert report.verdict != "fail"


@pytest.mark.parametrize("bias", [0.1, 0.3])
@pytest.mark.parametrize("k", [1, 3, 8])
def test_biased_keystream_frequency(bias: float, k: int) -> None:
    spec = MatrixSpec(k=k, n=2**16, bias=bias)
    report = keystream_frequency_test(spec, 10**6, RandomSource.seeded(k * 100 + int(bias * 10)))
    assert report.verdict != "fail"


def test_predicted_frequency() -> None:
    assert predicted_frequency(3, 0.1) == pytest.approx(0.244)
    assert predicted_frequency(5, 0.5) == 0.5


def test_zero_bias_keystream_is_all_zero(rng: RandomSource) -> None:
    report = keystream_frequency_test(MatrixSpec(k=3, n=2**16, bias=0.0), 200_000, rng)
    assert report.ones == 0
    assert report.z_score == 0
    assert report.p_value == 1.0


def test_frequency_draws_one_matrix_per_n_bits(
    rng: RandomSource, monkeypatch: pytest.MonkeyPatch
) -> None:
    widths: list[int] = []

    def recording(spec: MatrixSpec, source: RandomSource) -> RandomMatrix:
        widths.append(spec.n)
        return generate_matrix(spec, source)

    monkeypatch.setattr("mpad.attack.generate_matrix", recording)
    report = keystream_frequency_test(MatrixSpec(k=2, n=30_000), 100_000, rng)
    assert widths == [30_000] * 4
    assert report.csv_row()[1] == "n=30000;k=2;bias=0.5"
    assert report.verdict != "fail"


def test_frequency_refuses_short_samples(rng: RandomSource) -> None:
    with pytest.raises(EstimatorRefused):
        keystream_frequency_test(MatrixSpec(k=3, n=64), 1000, rng)


def test_subkey_components_are_uniform(rng: RandomSource) -> None:
    report = subkey_uniformity_test(n=64, k=3, m=5, eta=2, samples=100_000, rng=rng)
    assert len(report.p_values) == 3
    assert report.passed


def test_disjoint_windows_are_uncorrelated() -> None:
    report = keystream_correlation_test(4, 10**6, RandomSource.seeded(21))
    assert report.samples == 10**6
    assert report.verdict != "fail"


# -- game


def test_game_single_pair_advantage_is_zero(rng: RandomSource) -> None:
    params = LabParams(n=8, k=1, m=2)
    challenge, others = random_layout(params, rng)
    result = exact_bayes_advantage(params, challenge, others)
    assert others == []
    assert result.advantage_exact == 0


def test_game_identical_messages_advantage_is_zero(rng: RandomSource) -> None:
    params = LabParams(n=8, k=1, m=2, devices=3)
    (m0, _), others = random_layout(params, rng)
    assert exact_bayes_advantage(params, (m0, m0), others).advantage_exact == 0


def test_game_micro_dominance() -> None:
    params = LabParams(n=8, k=1, m=2, devices=3)
    rng = RandomSource.seeded(31)
    for _ in range(20):
        challenge, others = random_layout(params, rng)
        result = exact_bayes_advantage(params, challenge, others)
        assert result.bound == Fraction(15, 4)
        assert result.dominated
        assert 0 <= result.advantage_exact <= result.overlap_probability
        assert result.overlap_probability == 1 - Fraction(5, 8) ** 2


def test_game_overlap_produces_advantage() -> None:
    # Equal keys give equal keystreams, so two ciphertexts XOR to the plaintext XOR.
    params = LabParams(n=8, k=1, m=3, devices=3)
    rng = RandomSource.seeded(7)
    advantages = [
        exact_bayes_advantage(params, *random_layout(params, rng)).advantage_exact
        for _ in range(5)
    ]
    assert max(advantages) > 0
