"""One round of the collaborative obfuscation protocol.

Each participant blurs its position slightly and broadcasts it together
with its privacy requirement. The participant with the lowest requirement
becomes the query user (QU), sends the mean of all broadcast positions to
the LBS provider, and forwards the provider's answer to everyone else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal, Protocol, Sequence

import numpy as np

from .errors import (
    BadNoiseConfig,
    DuplicateSender,
    NoParticipants,
    QuNotInGroup,
    ReservedUserId,
)
from .geometry import Point2D, as_array, centroid

if TYPE_CHECKING:
    from .provider import PoiRecord

UserId = int

# Reserved id of the LBS provider in message traces.
PROVIDER_ID: UserId = 0

DEFAULT_INTEREST_RADIUS = 125.0

# Wire sizes in bytes; only used for byte-weighted overhead.
BROADCAST_BYTES = 64
QUERY_BYTES = 64
RESPONSE_BASE_BYTES = 64
POI_BYTES = 16


@dataclass(frozen=True)
class NoiseConfig:
    """Peer-stage blur: uniform in a disc whose radius grows linearly with
    the privacy level from ``rho_min`` (p=0) to ``rho_max`` (p=1)."""

    rho_min: float = 5.0
    rho_max: float = 50.0

    def __post_init__(self):
        if not (math.isfinite(self.rho_min) and math.isfinite(self.rho_max)):
            raise BadNoiseConfig("noise radii must be finite")
        if self.rho_min < 0 or self.rho_max < 0:
            raise BadNoiseConfig("noise radii must be non-negative")
        if self.rho_min > self.rho_max:
            raise BadNoiseConfig(
                f"rho_min ({self.rho_min}) exceeds rho_max ({self.rho_max})"
            )

    def radius(self, privacy: float) -> float:
        return self.rho_min + privacy * (self.rho_max - self.rho_min)


def _check_privacy(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"privacy level must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class User:
    id: UserId
    true_position: Point2D
    privacy: float
    interest_radius: float = DEFAULT_INTEREST_RADIUS

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"user id must be non-negative, got {self.id}")
        _check_privacy(self.privacy)
        if not self.interest_radius > 0:
            raise ValueError("interest_radius must be positive")


@dataclass(frozen=True)
class BroadcastMessage:
    sender: UserId
    obfuscated_position: Point2D
    service: str
    privacy: float


@dataclass(frozen=True)
class LbsQuery:
    qu: UserId
    query_position: Point2D
    service: str


@dataclass(frozen=True)
class LbsResponse:
    provider: UserId
    qu: UserId
    payload: tuple[PoiRecord, ...]

    @property
    def size(self) -> int:
        return RESPONSE_BASE_BYTES + POI_BYTES * len(self.payload)


@dataclass(frozen=True)
class ForwardedResponse:
    qu: UserId
    recipient: UserId
    payload: tuple[PoiRecord, ...]


MessageKind = Literal["broadcast", "query", "response", "forward"]


@dataclass(frozen=True)
class TraceEntry:
    """One transmission: who sent it, who heard it, how many bytes."""

    kind: MessageKind
    sender: UserId
    receivers: tuple[UserId, ...]
    size: int


@dataclass(frozen=True)
class RoundOutcome:
    participants: tuple[UserId, ...]
    broadcasts: tuple[BroadcastMessage, ...]
    elected_qu: UserId
    final_location: Point2D
    query: LbsQuery
    response: LbsResponse
    forwards: tuple[ForwardedResponse, ...]
    messages: tuple[TraceEntry, ...]
    per_user_payloads: dict[UserId, tuple[PoiRecord, ...]] = field(hash=False)


class ServesQueries(Protocol):
    def serve_query(self, query: LbsQuery) -> LbsResponse: ...


def obfuscate(
    true_position: Point2D,
    privacy: float,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> Point2D:
    """Displace ``true_position`` by a point drawn uniformly from the disc of
    radius ``noise.radius(privacy)``."""
    _check_privacy(privacy)
    if not isinstance(noise, NoiseConfig):
        raise BadNoiseConfig(f"expected NoiseConfig, got {type(noise).__name__}")
    rho = noise.radius(privacy)
    u, v = rng.random(2)
    # sqrt(u) makes the radial density proportional to r, i.e. uniform area
    r = rho * math.sqrt(u)
    theta = 2.0 * math.pi * v
    return Point2D(
        true_position.x + r * math.cos(theta),
        true_position.y + r * math.sin(theta),
    )


def elect_qu(messages: Sequence[BroadcastMessage]) -> UserId:
    """Sender with the lowest privacy level; ties go to the smallest id."""
    if not messages:
        raise NoParticipants("cannot elect a query user from no messages")
    seen = set()
    for m in messages:
        if m.sender in seen:
            raise DuplicateSender(f"sender {m.sender} broadcast twice")
        seen.add(m.sender)
    return min(messages, key=lambda m: (m.privacy, m.sender)).sender


def final_location(messages: Sequence[BroadcastMessage]) -> Point2D:
    """Mean of every broadcast position, the QU's own included.

    The least-squares line through these positions always passes through
    this mean, so no separate projection step is needed.
    """
    if not messages:
        raise NoParticipants("no broadcast positions to combine")
    return centroid([m.obfuscated_position for m in messages])


def final_location_array(positions: np.ndarray) -> Point2D:
    """:func:`final_location` over an (n, 2) array of broadcast positions."""
    arr = as_array(positions)
    if arr.shape[0] == 0:
        raise NoParticipants("no broadcast positions to combine")
    return centroid(arr)


def build_query(qu: UserId, final: Point2D, service: str) -> LbsQuery:
    return LbsQuery(qu=qu, query_position=final, service=service)


def forward(response: LbsResponse, participants: Sequence[UserId]) -> list[ForwardedResponse]:
    if response.qu not in participants:
        raise QuNotInGroup(f"query user {response.qu} is not a participant")
    return [
        ForwardedResponse(qu=response.qu, recipient=uid, payload=response.payload)
        for uid in participants
        if uid != response.qu
    ]


def _check_group(users: Sequence[User]) -> None:
    if not users:
        raise NoParticipants("a round needs at least one user")
    ids = [u.id for u in users]
    if len(set(ids)) != len(ids):
        raise DuplicateSender("user ids must be distinct")
    if PROVIDER_ID in ids:
        raise ReservedUserId(f"user id {PROVIDER_ID} is reserved for the provider")


def run_round(
    users: Sequence[User],
    provider: ServesQueries,
    *,
    noise: NoiseConfig,
    service: str,
    rng: np.random.Generator,
) -> RoundOutcome:
    """Execute one full round and record every transmission.

    Connectivity is a single-hop full mesh: each broadcast is heard by every
    other participant. Obfuscation draws are consumed in user order.
    """
    _check_group(users)
    if not service:
        raise ValueError("service tag must be non-empty")
    participants = tuple(u.id for u in users)
    trace: list[TraceEntry] = []

    broadcasts = []
    for u in users:
        msg = BroadcastMessage(
            sender=u.id,
            obfuscated_position=obfuscate(u.true_position, u.privacy, noise, rng),
            service=service,
            privacy=u.privacy,
        )
        broadcasts.append(msg)
        others = tuple(uid for uid in participants if uid != u.id)
        trace.append(TraceEntry("broadcast", u.id, others, BROADCAST_BYTES))

    qu = elect_qu(broadcasts)
    final = final_location(broadcasts)
    query = build_query(qu, final, service)
    trace.append(TraceEntry("query", qu, (PROVIDER_ID,), QUERY_BYTES))

    response = provider.serve_query(query)
    trace.append(TraceEntry("response", response.provider, (qu,), response.size))

    forwards = forward(response, participants)
    for f in forwards:
        trace.append(TraceEntry("forward", qu, (f.recipient,), response.size))

    payloads = {uid: response.payload for uid in participants}
    return RoundOutcome(
        participants=participants,
        broadcasts=tuple(broadcasts),
        elected_qu=qu,
        final_location=final,
        query=query,
        response=response,
        forwards=tuple(forwards),
        messages=tuple(trace),
        per_user_payloads=payloads,
    )
