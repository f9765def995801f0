"""
Line-oriented mission scripts.

    provision U=4 n=1024 k=2 m=64 eta_max=2 lambda=1 seed=7 [distributor=0] [reserve=2] [star=0]
    send <q> <l> <hex-payload>
    dynkey <q> <l>
    admit
    eavesdrop-dump <path>

Blank lines and `#` comments are ignored. `provision` must come first and only once.
With `star=1` only distributor pairs are provisioned; peers reach each other through `dynkey`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import SystemParams
from .errors import (
    BudgetExhausted,
    MpadError,
    ReserveExhausted,
    ScenarioError,
    UnknownDevice,
    UnknownPair,
)
from .fleet import (
    DeliveryRecord,
    Fleet,
    admit_device,
    provision_fleet,
    request_dynamic_key,
    send_message,
)
from .model import Message
from .rng import RandomSource
from .wire import write_record

logger = logging.getLogger(__name__)

PROVISION_REQUIRED = ("U", "n", "k", "m", "eta_max", "lambda", "seed")
PROVISION_OPTIONAL = ("distributor", "reserve", "star")
RECORDED_ERRORS = (BudgetExhausted, ReserveExhausted, UnknownPair, UnknownDevice)


@dataclass(frozen=True)
class Command:
    line_no: int
    verb: str
    args: tuple[str, ...] = ()
    options: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Outcome:
    line_no: int
    verb: str
    ok: bool
    detail: str = ""
    record: DeliveryRecord | None = None


@dataclass
class ScenarioResult:
    fleet: Fleet
    outcomes: list[Outcome] = field(default_factory=list)
    dumps: list[Path] = field(default_factory=list)

    @property
    def deliveries(self) -> list[DeliveryRecord]:
        return [o.record for o in self.outcomes if o.record is not None]

    @property
    def failures(self) -> list[Outcome]:
        return [o for o in self.outcomes if not o.ok]


def _int(line_no: int, token: str, what: str) -> int:
    try:
        return int(token, 0)
    except ValueError as e:
        raise ScenarioError(line_no, f"{what} must be an integer, got {token!r}.") from e


def _parse_provision(line_no: int, tokens: list[str]) -> Command:
    options: dict[str, int] = {}
    for token in tokens:
        name, sep, value = token.partition("=")
        if not sep:
            raise ScenarioError(line_no, f"expected name=value, got {token!r}.")
        if name not in PROVISION_REQUIRED + PROVISION_OPTIONAL:
            raise ScenarioError(line_no, f"unknown provision key {name!r}.")
        if name in options:
            raise ScenarioError(line_no, f"provision key {name!r} given twice.")
        options[name] = _int(line_no, value, name)
    missing = [name for name in PROVISION_REQUIRED if name not in options]
    if missing:
        raise ScenarioError(line_no, f"provision is missing {', '.join(missing)}.")
    return Command(line_no, "provision", options=options)


def _expect(line_no: int, verb: str, tokens: list[str], count: int) -> None:
    if len(tokens) != count:
        raise ScenarioError(line_no, f"{verb} takes {count} arguments, got {len(tokens)}.")


def parse_scenario(text: str) -> list[Command]:
    commands: list[Command] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        verb, *tokens = line.split()
        match verb:
            case "provision":
                if commands:
                    raise ScenarioError(line_no, "provision must be the first command, once.")
                commands.append(_parse_provision(line_no, tokens))
                continue
            case "send":
                _expect(line_no, verb, tokens, 3)
                _int(line_no, tokens[0], "sender")
                _int(line_no, tokens[1], "receiver")
            case "dynkey":
                _expect(line_no, verb, tokens, 2)
                _int(line_no, tokens[0], "q")
                _int(line_no, tokens[1], "l")
            case "admit":
                _expect(line_no, verb, tokens, 0)
            case "eavesdrop-dump":
                _expect(line_no, verb, tokens, 1)
            case _:
                raise ScenarioError(line_no, f"unknown command {verb!r}.")
        if not commands:
            raise ScenarioError(line_no, f"{verb} before provision.")
        commands.append(Command(line_no, verb, tuple(tokens)))
    if not commands:
        raise ScenarioError(0, "empty scenario.")
    return commands


def _payload(command: Command, m: int) -> Message:
    text = command.args[2]
    try:
        message = Message.from_hex(text, m)
    except MpadError as e:
        raise ScenarioError(command.line_no, str(e)) from e
    if message.to_bytes() != bytes.fromhex(text):
        raise ScenarioError(command.line_no, "payload has nonzero bits past bit m.")
    return message


def _provision(command: Command) -> Fleet:
    o = command.options
    distributor, star = o.get("distributor", 0), o.get("star", 0)
    if star not in (0, 1):
        raise ScenarioError(command.line_no, f"star must be 0 or 1, got {star}.")
    try:
        params = SystemParams(
            n=o["n"],
            k=o["k"],
            m=o["m"],
            devices=o["U"],
            eta_max=o["eta_max"],
            lam=o["lambda"],
            hub=distributor if star else None,
        )
        return provision_fleet(
            params,
            RandomSource.seeded(o["seed"]),
            distributor=distributor,
            reserve=o.get("reserve", 2),
        )
    except MpadError as e:
        raise ScenarioError(command.line_no, str(e)) from e


def run_scenario(commands: list[Command], *, base_dir: Path = Path(".")) -> ScenarioResult:
    """
    Execute parsed commands in order. Budget, reserve and unknown-pair errors are recorded as
    failed outcomes; any other error stops the run.
    """
    result = ScenarioResult(fleet=_provision(commands[0]))
    result.outcomes.append(Outcome(commands[0].line_no, "provision", ok=True))
    fleet = result.fleet

    for command in commands[1:]:
        try:
            match command.verb:
                case "send":
                    q, l = int(command.args[0], 0), int(command.args[1], 0)
                    record = send_message(fleet, q, l, _payload(command, fleet.params.m))
                    outcome = Outcome(
                        command.line_no,
                        "send",
                        ok=record.delivered,
                        detail=f"slot={record.slot} eta={record.eta}",
                        record=record,
                    )
                case "dynkey":
                    q, l = int(command.args[0], 0), int(command.args[1], 0)
                    slot = request_dynamic_key(fleet, q, l)
                    outcome = Outcome(command.line_no, "dynkey", ok=True, detail=f"slot={slot}")
                case "admit":
                    new_id = admit_device(fleet)
                    outcome = Outcome(command.line_no, "admit", ok=True, detail=f"device={new_id}")
                case "eavesdrop-dump":
                    path = write_record(base_dir / command.args[0], fleet.transcript.dump())
                    result.dumps.append(path)
                    frames = len(fleet.transcript)
                    outcome = Outcome(
                        command.line_no, "eavesdrop-dump", ok=True, detail=f"{frames} frames"
                    )
        except RECORDED_ERRORS as e:
            logger.info("line %d: %s", command.line_no, e)
            outcome = Outcome(command.line_no, command.verb, ok=False, detail=str(e))
        except ScenarioError:
            raise
        except MpadError as e:
            raise ScenarioError(command.line_no, str(e)) from e
        result.outcomes.append(outcome)
    return result


def load_scenario(path: Path) -> list[Command]:
    try:
        return parse_scenario(path.read_text())
    except FileNotFoundError as e:
        raise ScenarioError(0, f"no such scenario file: {path}") from e
