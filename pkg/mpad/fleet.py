"""
Mission simulation: provisioning, budgeted exchange, the eavesdropper's transcript and the
on-demand key distributor.

A Fleet is a single state machine. Mutating calls must be serialized by one owner; a transcript
view (`eavesdrop`) is an immutable snapshot and can be read between mutations.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .analytics import SystemParams
from .core import decrypt, encrypt, generate_matrix, generate_pairwise_key
from .errors import BudgetExhausted, ParamError, ReserveExhausted, UnknownDevice, UnknownPair
from .model import Ciphertext, MatrixSpec, Message, Pair, PairwiseKey, RandomMatrix, normalize_pair
from .rng import RandomSource
from .wire import (
    decode_frame,
    decode_key_values,
    encode_frame,
    encode_key,
    encode_key_values,
    iter_frames,
)

logger = logging.getLogger(__name__)

HYGIENE_WINDOW = 16


@dataclass
class Device:
    id: int
    matrix: RandomMatrix
    keyring: dict[tuple[int, int], PairwiseKey] = field(default_factory=dict)

    def install(self, key: PairwiseKey) -> None:
        q, l = key.pair
        if self.id not in key.pair:
            raise ParamError(f"device {self.id} cannot hold a key for pair {key.pair}.")
        peer = l if q == self.id else q
        self.keyring[(peer, key.slot)] = key

    def key_for(self, peer: int, slot: int) -> PairwiseKey:
        try:
            return self.keyring[(peer, slot)]
        except KeyError as e:
            raise UnknownPair(f"device {self.id} holds no key for peer {peer} slot {slot}.") from e


@dataclass
class PairBudget:
    pair: Pair
    slot: int
    eta_max: int
    next_eta: int = 1

    @property
    def remaining(self) -> int:
        return self.eta_max + 1 - self.next_eta

    @property
    def exhausted(self) -> bool:
        return self.next_eta > self.eta_max

    def consume(self) -> int:
        if self.exhausted:
            raise BudgetExhausted(f"pair {self.pair} slot {self.slot} is exhausted.")
        eta = self.next_eta
        self.next_eta += 1
        return eta


@dataclass(frozen=True)
class TranscriptEntry:
    sender: int
    receiver: int
    frame: bytes
    timestamp: int

    def ciphertext(self) -> Ciphertext:
        return decode_frame(self.frame)


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, entry: TranscriptEntry) -> None:
        self.entries.append(entry)

    def view(self) -> tuple[TranscriptEntry, ...]:
        return tuple(self.entries)

    def dump(self) -> bytes:
        """Frames concatenated exactly as wired."""
        return b"".join(e.frame for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class DeliveryRecord:
    sender: int
    receiver: int
    slot: int
    eta: int
    payload: Message
    received: Message
    frame: bytes

    @property
    def delivered(self) -> bool:
        return self.payload == self.received


@dataclass
class DistributorState:
    device_id: int
    reserve: list[PairwiseKey] = field(default_factory=list)
    minted: int = 0
    admitted: int = 0


@dataclass
class Fleet:
    params: SystemParams
    matrix: RandomMatrix
    rng: RandomSource
    devices: list[Device]
    budgets: dict[Pair, list[PairBudget]]
    distributor: DistributorState
    transcript: Transcript = field(default_factory=Transcript)
    clock: int = 0

    @property
    def size(self) -> int:
        return len(self.devices)

    def device(self, device_id: int) -> Device:
        if not 0 <= device_id < len(self.devices):
            raise UnknownDevice(f"device {device_id} is not in a fleet of {len(self.devices)}.")
        return self.devices[device_id]

    def budget(self, q: int, l: int) -> list[PairBudget]:
        pair = normalize_pair(q, l)
        self.device(pair[0])
        self.device(pair[1])
        try:
            return self.budgets[pair]
        except KeyError as e:
            raise UnknownPair(f"devices {pair[0]} and {pair[1]} share no key.") from e

    def tick(self) -> int:
        self.clock += 1
        return self.clock


def provision_fleet(
    params: SystemParams,
    rng: RandomSource,
    *,
    distributor: int | None = None,
    reserve: int = 2,
) -> Fleet:
    """
    One matrix, lambda independent keys per provisioned pair, and `reserve` keys for future
    devices. With `params.hub` set only distributor pairs get keys; every other pair goes
    through `request_dynamic_key`.
    """
    if params.hub is not None:
        if distributor not in (None, params.hub):
            raise ParamError(f"distributor {distributor} differs from hub {params.hub}.")
        distributor = params.hub
    elif distributor is None:
        distributor = 0
    if not 0 <= distributor < params.devices:
        raise UnknownDevice(f"distributor {distributor} is not in a fleet of {params.devices}.")
    if reserve < 0:
        raise ParamError(f"reserve must be >= 0, got {reserve}.")

    spec = MatrixSpec(k=params.k, n=params.n)
    matrix = generate_matrix(spec, rng)
    devices = [Device(id=i, matrix=matrix) for i in range(params.devices)]
    budgets: dict[Pair, list[PairBudget]] = {}
    for q, l in params.pairs():
        slots = budgets.setdefault((q, l), [])
        for slot in range(params.lambda_for(q, l)):
            key = generate_pairwise_key(spec, (q, l), slot, rng)
            devices[q].install(key)
            devices[l].install(key)
            slots.append(PairBudget(pair=(q, l), slot=slot, eta_max=params.eta_max))

    reserved = [
        generate_pairwise_key(spec, normalize_pair(distributor, params.devices + i), 0, rng)
        for i in range(reserve)
    ]
    logger.debug(
        "provisioned %d devices, %d keys (%s), %d reserved",
        params.devices,
        params.total_keys,
        "full" if params.hub is None else f"hub {params.hub}",
        reserve,
    )
    return Fleet(
        params=params,
        matrix=matrix,
        rng=rng,
        devices=devices,
        budgets=budgets,
        distributor=DistributorState(device_id=distributor, reserve=reserved),
    )


def _next_budget(fleet: Fleet, q: int, l: int) -> PairBudget:
    for budget in fleet.budget(q, l):
        if not budget.exhausted:
            return budget
    logger.warning("pair %s has exhausted every slot", normalize_pair(q, l))
    raise BudgetExhausted(
        f"pair {normalize_pair(q, l)} has no slot left; it can no longer communicate securely."
    )


def send_message(fleet: Fleet, q: int, l: int, payload: Message) -> DeliveryRecord:
    """Encrypt on the lowest slot with budget left, wire the frame, decrypt at the receiver."""
    if payload.m != fleet.params.m:
        raise ParamError(f"fleet messages are {fleet.params.m} bits, got {payload.m}.")
    budget = _next_budget(fleet, q, l)
    key = fleet.device(q).key_for(l, budget.slot)
    eta = budget.consume()
    if eta == 1 and budget.slot > 0:
        logger.debug("pair %s rolled over to slot %d", budget.pair, budget.slot)

    ct = encrypt(fleet.matrix, key, payload, eta, eta_max=fleet.params.eta_max)
    frame = encode_frame(ct)
    fleet.transcript.append(TranscriptEntry(q, l, frame, fleet.tick()))

    wired = decode_frame(frame)
    received = decrypt(fleet.matrix, fleet.device(l).key_for(q, wired.slot), wired)
    logger.debug("pair %s slot %d eta %d delivered", budget.pair, budget.slot, eta)
    return DeliveryRecord(
        sender=q,
        receiver=l,
        slot=budget.slot,
        eta=eta,
        payload=payload,
        received=received,
        frame=frame,
    )


def eavesdrop(fleet: Fleet) -> tuple[TranscriptEntry, ...]:
    return fleet.transcript.view()


def grant_chunks(k: int, m: int) -> int:
    """Messages needed to carry one key of k 64-bit components."""
    return (64 * k + m - 1) // m


def _grant(fleet: Fleet, receiver: int, key: PairwiseKey) -> tuple[int, ...]:
    m = fleet.params.m
    material = np.unpackbits(
        np.frombuffer(encode_key_values(key.values), dtype=np.uint8), bitorder="little"
    )
    chunks = grant_chunks(key.k, m)
    padded = np.zeros(chunks * m, dtype=np.uint8)
    padded[: material.size] = material
    d = fleet.distributor.device_id
    received = [
        send_message(fleet, d, receiver, Message(padded[c * m : (c + 1) * m])).received.bits
        for c in range(chunks)
    ]
    bits = np.concatenate(received)[: material.size]
    raw = np.packbits(bits, bitorder="little").tobytes()
    return decode_key_values(raw, key.k)


def request_dynamic_key(fleet: Fleet, q: int, l: int) -> int:
    """
    The distributor mints a fresh key for (q, l) and sends it to q, then to l, over their
    distributor-pair keys. Both install it under the pair's next free slot only after both
    grants arrive; a failed second grant leaves the first grant's frames on the wire.
    """
    pair = normalize_pair(q, l)
    d = fleet.distributor.device_id
    if d in pair:
        raise ParamError(f"the distributor {d} cannot request a key for its own pair {pair}.")
    fleet.device(q)
    fleet.device(l)

    slot = len(fleet.budgets.get(pair, []))
    spec = fleet.matrix.spec
    key = generate_pairwise_key(spec, pair, slot, fleet.rng)
    try:
        at_q = _grant(fleet, q, key)
        at_l = _grant(fleet, l, key)
    except BudgetExhausted:
        logger.warning("distributor grant for pair %s failed; nothing installed", pair)
        raise
    if at_q != key.values or at_l != key.values:
        raise ParamError(f"distributor grant for pair {pair} arrived corrupted.")

    fleet.device(q).install(PairwiseKey(pair=pair, slot=slot, n=spec.n, values=at_q))
    fleet.device(l).install(PairwiseKey(pair=pair, slot=slot, n=spec.n, values=at_l))
    fleet.budgets.setdefault(pair, []).append(
        PairBudget(pair=pair, slot=slot, eta_max=fleet.params.eta_max)
    )
    fleet.distributor.minted += 1
    logger.debug("installed minted key for pair %s slot %d", pair, slot)
    return slot


def admit_device(fleet: Fleet) -> int:
    """Hand the next reserved distributor-pair key to a new device; its id is the fleet size."""
    state = fleet.distributor
    if not state.reserve:
        logger.warning("admission refused: reserve pool is empty")
        raise ReserveExhausted("the distributor has no reserved key left for a new device.")
    new_id = len(fleet.devices)
    key = state.reserve.pop(0)
    if new_id not in key.pair:
        raise ParamError(f"reserved key {key.pair} does not belong to device {new_id}.")

    device = Device(id=new_id, matrix=fleet.matrix)
    device.install(key)
    fleet.devices.append(device)
    fleet.device(state.device_id).install(key)
    fleet.budgets[key.pair] = [PairBudget(pair=key.pair, slot=0, eta_max=fleet.params.eta_max)]
    state.admitted += 1
    logger.debug("admitted device %d", new_id)
    return new_id


def duplicate_windows(
    entries: tuple[TranscriptEntry, ...] | Transcript,
) -> list[tuple[Pair, int, int]]:
    """(pair, slot, eta) triples that appear on more than one frame."""
    if isinstance(entries, Transcript):
        data = entries.dump()
    else:
        data = b"".join(e.frame for e in entries)
    seen = Counter((ct.pair, ct.slot, ct.eta) for ct in iter_frames(data))
    return [triple for triple, count in seen.items() if count > 1]


def _all_keys(fleet: Fleet) -> dict[tuple[Pair, int], PairwiseKey]:
    keys = {(k.pair, k.slot): k for d in fleet.devices for k in d.keyring.values()}
    keys.update({(k.pair, k.slot): k for k in fleet.distributor.reserve})
    return keys


def hygiene_violations(fleet: Fleet) -> list[tuple[Pair, int]]:
    """Keys with a 16-byte window of their serialized form visible in the transcript dump."""
    dump = fleet.transcript.dump()
    leaked = []
    for (pair, slot), key in sorted(_all_keys(fleet).items()):
        blob = encode_key(key)
        windows = (blob[i : i + HYGIENE_WINDOW] for i in range(len(blob) - HYGIENE_WINDOW + 1))
        if any(w in dump for w in windows):
            leaked.append((pair, slot))
    if leaked:
        logger.warning("key material visible in transcript for %d keys", len(leaked))
    return leaked


def fleet_params(fleet: Fleet) -> SystemParams:
    """
    Current parameters: admitted devices included, every minted and admission key counted
    into the effective key count on top of the provisioned lambdas.
    """
    p = fleet.params
    return replace(
        p,
        devices=len(fleet.devices),
        minted=p.minted + fleet.distributor.minted + fleet.distributor.admitted,
    )
