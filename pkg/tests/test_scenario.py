from __future__ import annotations

from pathlib import Path

import pytest

from mpad.errors import ScenarioError
from mpad.fleet import duplicate_windows, hygiene_violations
from mpad.scenario import load_scenario, parse_scenario, run_scenario
from mpad.wire import iter_frames

PAYLOAD = "00112233445566778899aabbccddeeff"

MISSION = f"""\
# four devices, device 0 distributes
provision U=4 n=2048 k=2 m=128 eta_max=2 lambda=1 seed=7
send 1 2 {PAYLOAD}
send 2 1 {PAYLOAD}
send 1 2 {PAYLOAD}   # budget gone
dynkey 1 2
send 1 2 {PAYLOAD}
admit
dynkey 4 3
send 3 4 {PAYLOAD}
eavesdrop-dump out/wire.bin
"""


def test_parse_skips_comments_and_blank_lines() -> None:
    commands = parse_scenario(MISSION)
    assert [c.verb for c in commands][:3] == ["provision", "send", "send"]
    assert commands[0].options["U"] == 4
    assert commands[1].line_no == 3
    assert commands[3].args == ("1", "2", PAYLOAD)


@pytest.mark.parametrize(
    ("text", "line_no"),
    [
        ("", 0),
        ("# nothing\n\n", 0),
        ("send 0 1 00", 1),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1\n", 1),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1 color=3\n", 1),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=x\n", 1),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1\n\nprovision U=2\n", 3),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1\nsend 0 1\n", 2),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1\nbroadcast 0\n", 2),
        ("provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1\ndynkey a 1\n", 2),
    ],
    ids=[
        "empty",
        "only-comments",
        "no-provision",
        "missing-seed",
        "unknown-key",
        "bad-int",
        "second-provision",
        "arity",
        "unknown-verb",
        "bad-device",
    ],
)
def test_parse_errors_carry_line_numbers(text: str, line_no: int) -> None:
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.line_no == line_no


def test_mission_runs_end_to_end(tmp_path: Path) -> None:
    result = run_scenario(parse_scenario(MISSION), base_dir=tmp_path)
    by_line = {o.line_no: o for o in result.outcomes}
    assert by_line[3].detail == "slot=0 eta=1"
    assert by_line[4].detail == "slot=0 eta=2"
    assert not by_line[5].ok
    assert "no slot left" in by_line[5].detail
    assert by_line[6].detail == "slot=1"
    assert by_line[7].detail == "slot=1 eta=1"
    assert by_line[8].detail == "device=4"
    assert by_line[9].detail == "slot=0"
    assert by_line[10].ok
    assert [o.line_no for o in result.failures] == [5]
    assert all(r.delivered for r in result.deliveries)

    (dump,) = result.dumps
    assert dump == tmp_path / "out" / "wire.bin"
    frames = list(iter_frames(dump.read_bytes()))
    # Four sends plus one grant to each end of both dynamic keys.
    assert len(frames) == 4 + 4
    assert duplicate_windows(result.fleet.transcript) == []
    assert hygiene_violations(result.fleet) == []


def test_seeded_mission_is_reproducible(tmp_path: Path) -> None:
    first = run_scenario(parse_scenario(MISSION), base_dir=tmp_path / "a")
    second = run_scenario(parse_scenario(MISSION), base_dir=tmp_path / "b")
    assert first.dumps[0].read_bytes() == second.dumps[0].read_bytes()


@pytest.mark.parametrize(
    ("payload", "message"),
    [("0011", "needs 16 bytes"), (PAYLOAD + "00", "needs 16 bytes"), ("zz" * 16, "Invalid hex")],
)
def test_bad_payload_stops_the_run(payload: str, message: str) -> None:
    text = f"provision U=2 n=2048 k=2 m=128 eta_max=1 lambda=1 seed=1\nsend 0 1 {payload}\n"
    with pytest.raises(ScenarioError, match=message) as info:
        run_scenario(parse_scenario(text))
    assert info.value.line_no == 2


def test_padding_bits_must_be_zero() -> None:
    text = "provision U=2 n=64 k=2 m=12 eta_max=1 lambda=1 seed=1\nsend 0 1 fff0\n"
    with pytest.raises(ScenarioError, match="past bit m"):
        run_scenario(parse_scenario(text))
    ok = "provision U=2 n=64 k=2 m=12 eta_max=1 lambda=1 seed=1\nsend 0 1 ff0f\n"
    assert run_scenario(parse_scenario(ok)).outcomes[1].ok


def test_invalid_provision_parameters() -> None:
    text = "provision U=2 n=64 k=2 m=40 eta_max=1 lambda=1 seed=1\n"
    with pytest.raises(ScenarioError) as info:
        run_scenario(parse_scenario(text))
    assert info.value.line_no == 1


def test_unknown_device_is_recorded() -> None:
    text = "provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1\nsend 0 5 00\n"
    result = run_scenario(parse_scenario(text))
    assert not result.outcomes[1].ok


def test_load_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "absent.scenario")


def test_bundled_mission(tmp_path: Path) -> None:
    bundled = Path(__file__).parent.parent / "scenarios" / "mission.scenario"
    result = run_scenario(load_scenario(bundled), base_dir=tmp_path)
    assert [o.ok for o in result.outcomes].count(False) == 1
    assert result.fleet.size == 5
    assert (tmp_path / "wire.bin").exists()


STAR = f"""\
provision U=3 n=2048 k=2 m=128 eta_max=2 lambda=1 seed=5 distributor=1 star=1
send 0 2 {PAYLOAD}
dynkey 0 2
send 0 2 {PAYLOAD}
send 1 2 {PAYLOAD}
"""


def test_star_mission_routes_peers_through_distributor() -> None:
    result = run_scenario(parse_scenario(STAR))
    fleet = result.fleet
    assert fleet.params.hub == fleet.distributor.device_id == 1
    assert [o.ok for o in result.outcomes] == [True, False, True, True, True]
    assert "share no key" in result.outcomes[1].detail
    assert result.outcomes[3].detail == "slot=0 eta=1"
    assert result.outcomes[4].detail == "slot=0 eta=2"
    assert duplicate_windows(fleet.transcript) == []


def test_star_flag_must_be_boolean() -> None:
    text = "provision U=2 n=64 k=2 m=8 eta_max=1 lambda=1 seed=1 star=2\n"
    with pytest.raises(ScenarioError, match="star must be 0 or 1") as info:
        run_scenario(parse_scenario(text))
    assert info.value.line_no == 1
