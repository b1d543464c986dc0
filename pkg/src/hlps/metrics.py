"""Privacy, accuracy, overhead and energy measures for protocol rounds."""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BadAnonymitySetSize, NotAProbabilityVector
from .geometry import Circle, Point2D, overlap_fraction
from .protocol import RoundOutcome, User, UserId

PROBABILITY_TOLERANCE = 1e-9

# Radio cost per message, joules.
DEFAULT_E_TX = 0.66e-3
DEFAULT_E_RX = 0.395e-3


def entropy(p: Sequence[float]) -> float:
    """Shannon entropy in bits. Zero-probability terms contribute nothing."""
    probs = [float(x) for x in p]
    if not probs:
        raise NotAProbabilityVector("empty probability vector")
    for x in probs:
        if not (0.0 <= x <= 1.0):
            raise NotAProbabilityVector(f"probability {x} outside [0, 1]")
    total = math.fsum(probs)
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise NotAProbabilityVector(f"probabilities sum to {total}, not 1")
    h = -math.fsum(x * math.log2(x) for x in probs if x > 0.0)
    return max(0.0, h)


def uniform_entropy(k: int) -> float:
    """Entropy of a uniform choice among ``k`` candidates: log2(k) bits."""
    if isinstance(k, bool) or not isinstance(k, numbers.Integral) or k < 1:
        raise BadAnonymitySetSize(f"anonymity set size must be a positive integer, got {k!r}")
    return math.log2(k)


def provider_view_entropy(group_size: int) -> float:
    """Provider's uncertainty about which group member is behind a query.

    The provider sees one point for the whole group, so every member is
    equally likely.
    """
    return uniform_entropy(group_size)


def service_accuracy(user: User, final: Point2D, serving_radius: float) -> float:
    """Percentage of the user's interest disc covered by the serving disc
    around the query point."""
    if not serving_radius > 0:
        raise ValueError("serving_radius must be positive")
    interest = Circle(user.true_position, user.interest_radius)
    serving = Circle(final, serving_radius)
    return 100.0 * overlap_fraction(interest, serving)


@dataclass(frozen=True)
class Overhead:
    sends: int
    receives: int
    bytes: int


def overhead(outcome: RoundOutcome) -> Overhead:
    msgs = outcome.messages
    return Overhead(
        sends=len(msgs),
        receives=sum(len(m.receivers) for m in msgs),
        bytes=sum(m.size for m in msgs),
    )


@dataclass(frozen=True)
class EnergyConfig:
    e_tx: float = DEFAULT_E_TX
    e_rx: float = DEFAULT_E_RX

    def __post_init__(self):
        if self.e_tx < 0 or self.e_rx < 0:
            raise ValueError("per-message energy must be non-negative")


def energy(counts: Overhead, config: EnergyConfig = EnergyConfig()) -> float:
    """Joules spent on ``counts.sends`` transmissions and ``counts.receives``
    receptions."""
    return counts.sends * config.e_tx + counts.receives * config.e_rx


@dataclass(frozen=True)
class MetricsReport:
    entropy_from_peers: float = 0.0
    entropy_from_provider: float = 0.0
    per_user_accuracy: dict[UserId, float] = field(default_factory=dict, hash=False)
    sends: int = 0
    receives: int = 0
    bytes: int = 0
    energy: float = 0.0
    timing_samples: tuple[tuple[int, float], ...] = ()

    @property
    def mean_accuracy(self) -> float:
        vals = list(self.per_user_accuracy.values())
        return math.fsum(vals) / len(vals) if vals else 0.0

    @property
    def min_accuracy(self) -> float:
        return min(self.per_user_accuracy.values(), default=0.0)


def round_metrics(
    outcome: RoundOutcome,
    users: Sequence[User],
    serving_radius: float,
    energy_config: EnergyConfig = EnergyConfig(),
) -> MetricsReport:
    """Metrics for a single round.

    Peers and provider both face an anonymity set of the whole group: peers
    see only blurred positions and the provider sees only the group mean.
    """
    n = len(outcome.participants)
    counts = overhead(outcome)
    acc = {u.id: service_accuracy(u, outcome.final_location, serving_radius) for u in users}
    return MetricsReport(
        entropy_from_peers=uniform_entropy(n),
        entropy_from_provider=provider_view_entropy(n),
        per_user_accuracy=acc,
        sends=counts.sends,
        receives=counts.receives,
        bytes=counts.bytes,
        energy=energy(counts, energy_config),
    )


def aggregate(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Combine per-round reports: counts and energy are summed, entropies
    and per-user accuracies are averaged over rounds."""
    if not reports:
        return MetricsReport()
    n = len(reports)
    users = reports[0].per_user_accuracy.keys()
    acc = {
        uid: math.fsum(r.per_user_accuracy[uid] for r in reports) / n for uid in users
    }
    return MetricsReport(
        entropy_from_peers=math.fsum(r.entropy_from_peers for r in reports) / n,
        entropy_from_provider=math.fsum(r.entropy_from_provider for r in reports) / n,
        per_user_accuracy=acc,
        sends=sum(r.sends for r in reports),
        receives=sum(r.receives for r in reports),
        bytes=sum(r.bytes for r in reports),
        energy=math.fsum(r.energy for r in reports),
        timing_samples=tuple(s for r in reports for s in r.timing_samples),
    )
