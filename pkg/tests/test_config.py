from __future__ import annotations

import pytest

from mpad.config import get_settings
from mpad.errors import ConfigError


def test_defaults(monkeypatch: pytest.MonkeyPatch) -> None:
    for name in ("MPAD_PRECISION_BITS", "MPAD_SEARCH_BUDGET", "MPAD_WORKERS", "MPAD_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = get_settings()
    assert settings.precision_bits == 256
    assert settings.search_budget == 2**26
    assert settings.workers == 1
    assert settings.log_level == "WARNING"


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("MPAD_SEARCH_BUDGET", "0x1000")
    monkeypatch.setenv("MPAD_WORKERS", " 4 ")
    monkeypatch.setenv("MPAD_LOG_LEVEL", "debug")
    settings = get_settings()
    assert settings.search_budget == 4096
    assert settings.workers == 4
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize(
    ("name", "value"),
    [
        ("MPAD_WORKERS", "many"),
        ("MPAD_WORKERS", "0"),
        ("MPAD_PRECISION_BITS", "32"),
        ("MPAD_LOG_LEVEL", "LOUD"),
    ],
)
def test_malformed_values(monkeypatch: pytest.MonkeyPatch, name: str, value: str) -> None:
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError, match=name):
        get_settings()


def test_search_budget_is_read_at_call_time(monkeypatch: pytest.MonkeyPatch) -> None:
    from mpad.attack import brute_force_recover, known_plaintext
    from mpad.core import generate_matrix, generate_pairwise_key
    from mpad.errors import SearchBudgetExceeded
    from mpad.model import MatrixSpec, Message
    from mpad.rng import RandomSource

    rng = RandomSource.seeded(1)
    spec = MatrixSpec(k=2, n=16)
    matrix = generate_matrix(spec, rng)
    key = generate_pairwise_key(spec, (0, 1), 0, rng)
    evidence = known_plaintext(matrix, key, Message(rng.bits(6)))
    monkeypatch.setenv("MPAD_SEARCH_BUDGET", "100")
    with pytest.raises(SearchBudgetExceeded):
        brute_force_recover(matrix, evidence)
