from __future__ import annotations

import pytest

from mpad.analytics import SystemParams
from mpad.core import generate_matrix, generate_pairwise_key
from mpad.model import MatrixSpec, PairwiseKey, RandomMatrix
from mpad.rng import RandomSource


@pytest.fixture
def rng() -> RandomSource:
    return RandomSource.seeded(1234)


@pytest.fixture
def small_spec() -> MatrixSpec:
    return MatrixSpec(k=2, n=8)


@pytest.fixture
def small_matrix(small_spec: MatrixSpec, rng: RandomSource) -> RandomMatrix:
    return generate_matrix(small_spec, rng)


@pytest.fixture
def small_key(small_spec: MatrixSpec, small_matrix: RandomMatrix, rng: RandomSource) -> PairwiseKey:
    return generate_pairwise_key(small_spec, (0, 1), 0, rng)


@pytest.fixture
def fleet_params() -> SystemParams:
    # 64 k <= m, so a distributor grant fits in one message.
    return SystemParams(n=2048, k=2, m=128, devices=4, eta_max=4, lam=1)
