"""Scenario generation, multi-round simulation, sweeps and timing probes."""
from __future__ import annotations

import itertools
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import BadScenarioParams
from .geometry import Point2D, ols_fit
from .metrics import DEFAULT_E_RX, DEFAULT_E_TX, EnergyConfig, MetricsReport, aggregate, round_metrics
from .protocol import (
    DEFAULT_INTEREST_RADIUS,
    BroadcastMessage,
    NoiseConfig,
    RoundOutcome,
    User,
    final_location,
    run_round,
)
from .provider import DEFAULT_SERVING_RADIUS, PoiRecord, ProviderModel

SEED_MODULUS = 2**64

# "uniform", a fixed level for everyone, or one level per user.
PrivacyDistribution = Union[str, float, tuple[float, ...]]

SWEEPABLE = ("n_users", "rho_max", "serving_radius", "privacy")


@dataclass(frozen=True)
class Region:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise BadScenarioParams("region width and height must be positive")

    def contains(self, p: Point2D) -> bool:
        return 0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height


@dataclass(frozen=True)
class ScenarioParams:
    n_users: int
    seed: int
    n_pois: int = 500
    region_width: float = 1000.0
    region_height: float = 1000.0
    privacy: PrivacyDistribution = "uniform"
    rounds: int = 10
    rho_min: float = 5.0
    rho_max: float = 50.0
    service: str = "restaurant"
    # empty means every POI carries the requested service
    poi_categories: tuple[str, ...] = ()
    serving_radius: float = DEFAULT_SERVING_RADIUS
    interest_radius: float = DEFAULT_INTEREST_RADIUS
    e_tx: float = DEFAULT_E_TX
    e_rx: float = DEFAULT_E_RX


@dataclass(frozen=True)
class Scenario:
    region: Region
    users: tuple[User, ...]
    provider: ProviderModel
    seed: int
    rounds: int
    noise: NoiseConfig = NoiseConfig()
    service: str = "restaurant"
    energy: EnergyConfig = EnergyConfig()


@dataclass(frozen=True)
class SimulationResult:
    per_round: tuple[tuple[RoundOutcome, MetricsReport], ...]
    aggregate: MetricsReport


@dataclass(frozen=True)
class SweepRow:
    point: dict = field(hash=False)
    seed: int = 0
    rounds: int = 0
    n_users: int = 0
    aggregate: MetricsReport = MetricsReport()


def _privacy_levels(dist: PrivacyDistribution, n: int, rng: np.random.Generator) -> list[float]:
    if isinstance(dist, str):
        if dist != "uniform":
            raise BadScenarioParams(f"unknown privacy distribution {dist!r}")
        return [float(p) for p in rng.uniform(0.0, 1.0, n)]
    if isinstance(dist, (int, float)) and not isinstance(dist, bool):
        levels = [float(dist)] * n
    else:
        levels = [float(p) for p in dist]
        if len(levels) != n:
            raise BadScenarioParams(
                f"privacy list has {len(levels)} entries for {n} users"
            )
    if any(not 0.0 <= p <= 1.0 for p in levels):
        raise BadScenarioParams("privacy levels must lie in [0, 1]")
    return levels


def _validate(params: ScenarioParams) -> None:
    checks = [
        (isinstance(params.n_users, int) and params.n_users >= 1, "n_users must be >= 1"),
        (isinstance(params.n_pois, int) and params.n_pois >= 0, "n_pois must be >= 0"),
        (isinstance(params.rounds, int) and params.rounds >= 0, "rounds must be >= 0"),
        (isinstance(params.seed, int) and 0 <= params.seed < SEED_MODULUS, "seed must be a 64-bit unsigned integer"),
        (params.serving_radius > 0, "serving_radius must be positive"),
        (params.interest_radius > 0, "interest_radius must be positive"),
        (bool(params.service), "service must be non-empty"),
        (params.e_tx >= 0 and params.e_rx >= 0, "energy per message must be non-negative"),
    ]
    for ok, msg in checks:
        if not ok:
            raise BadScenarioParams(msg)


def _layout_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0])


def _rounds_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1])


def generate_scenario(params: ScenarioParams) -> Scenario:
    """Place users and POIs uniformly in the region, fully determined by
    ``params.seed``. User ids run from 1; id 0 is the provider's."""
    _validate(params)
    region = Region(params.region_width, params.region_height)
    try:
        noise = NoiseConfig(params.rho_min, params.rho_max)
    except ValueError as exc:
        raise BadScenarioParams(str(exc)) from exc
    rng = _layout_rng(params.seed)

    n = params.n_users
    ux = rng.uniform(0.0, region.width, n)
    uy = rng.uniform(0.0, region.height, n)
    levels = _privacy_levels(params.privacy, n, rng)
    users = tuple(
        User(
            id=i + 1,
            true_position=Point2D(float(ux[i]), float(uy[i])),
            privacy=levels[i],
            interest_radius=params.interest_radius,
        )
        for i in range(n)
    )

    cats = params.poi_categories or (params.service,)
    m = params.n_pois
    px = rng.uniform(0.0, region.width, m)
    py = rng.uniform(0.0, region.height, m)
    pc = rng.integers(0, len(cats), m)
    pois = tuple(
        PoiRecord(id=j + 1, position=Point2D(float(px[j]), float(py[j])), category=cats[pc[j]])
        for j in range(m)
    )
    return Scenario(
        region=region,
        users=users,
        provider=ProviderModel(pois, params.serving_radius),
        seed=params.seed,
        rounds=params.rounds,
        noise=noise,
        service=params.service,
        energy=EnergyConfig(params.e_tx, params.e_rx),
    )


def empirical_accuracy(
    user: User,
    payload: Sequence[PoiRecord],
    ground_truth: ProviderModel,
    service: str | None = None,
) -> float:
    """Recall of the payload against the POIs inside the user's interest
    disc, as a percentage. ``service`` restricts the reference set to one
    category. An empty reference set counts as fully served."""
    wanted = ground_truth.within(user.true_position, user.interest_radius, service)
    if len(wanted) == 0:
        return 100.0
    wanted_ids = {ground_truth.pois[i].id for i in wanted}
    got = wanted_ids.intersection(p.id for p in payload)
    return 100.0 * len(got) / len(wanted_ids)


def run_simulation(scenario: Scenario) -> SimulationResult:
    """Run ``scenario.rounds`` rounds with fresh blur draws each round and
    fixed user positions."""
    rng = _rounds_rng(scenario.seed)
    per_round = []
    for _ in range(scenario.rounds):
        outcome = run_round(
            scenario.users,
            scenario.provider,
            noise=scenario.noise,
            service=scenario.service,
            rng=rng,
        )
        report = round_metrics(
            outcome, scenario.users, scenario.provider.serving_radius, scenario.energy
        )
        per_round.append((outcome, report))
    return SimulationResult(
        per_round=tuple(per_round),
        aggregate=aggregate([r for _, r in per_round]),
    )


def grid_points(vary: Mapping[str, Sequence]) -> list[dict]:
    """Cartesian product of the varied values, first key slowest."""
    if not vary:
        raise BadScenarioParams("sweep grid is empty")
    for key, values in vary.items():
        if key not in SWEEPABLE:
            raise BadScenarioParams(f"cannot sweep {key!r}; choose from {', '.join(SWEEPABLE)}")
        if len(values) == 0:
            raise BadScenarioParams(f"no values given for {key!r}")
    keys = list(vary)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]


def derive_seed(base_seed: int, index: int) -> int:
    return (base_seed + index) % SEED_MODULUS


def sweep(base: ScenarioParams, vary: Mapping[str, Sequence], workers: int = 1) -> list[SweepRow]:
    """One simulation per grid point. Grid point ``i`` runs with seed
    ``base.seed + i``; rows come back in grid order."""
    points = grid_points(vary)

    def run(indexed):
        i, point = indexed
        params = replace(base, seed=derive_seed(base.seed, i), **point)
        result = run_simulation(generate_scenario(params))
        return SweepRow(
            point=point,
            seed=params.seed,
            rounds=params.rounds,
            n_users=params.n_users,
            aggregate=result.aggregate,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, enumerate(points)))
    return [run(item) for item in enumerate(points)]


def synthetic_broadcasts(n: int, rng: np.random.Generator) -> list[BroadcastMessage]:
    """``n`` broadcast messages at uniform positions in a 1 km square."""
    xy = rng.uniform(0.0, 1000.0, (n, 2)).tolist()
    levels = rng.uniform(0.0, 1.0, n).tolist()
    return [
        BroadcastMessage(i + 1, Point2D(x, y), "probe", p)
        for i, ((x, y), p) in enumerate(zip(xy, levels))
    ]


def timing_probe(
    sizes: Sequence[int], repetitions: int = 5, seed: int = 0
) -> list[tuple[int, float]]:
    """Median wall time, in seconds, of :func:`final_location` over ``n``
    synthetic broadcast messages, for each ``n`` in ``sizes``.

    Each size gets one untimed warm-up call. Run on an otherwise idle
    machine; concurrent load skews the medians.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if any(int(n) < 1 for n in sizes):
        raise ValueError("every size must be >= 1")
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    kernels.warmup()
    rng = np.random.default_rng(seed)
    out = []
    for n in sizes:
        messages = synthetic_broadcasts(int(n), rng)
        final_location(messages)
        samples = []
        for _ in range(repetitions):
            t0 = time.perf_counter()
            final_location(messages)
            samples.append(time.perf_counter() - t0)
        out.append((int(n), statistics.median(samples)))
        del messages
    return out


def linearity(samples: Sequence[tuple[int, float]]) -> tuple[float, float]:
    """Least-squares slope of duration against n, and the fit's R²."""
    pts = np.array(samples, dtype=np.float64)
    fit = ols_fit(pts)
    if fit.kind == "vertical":
        return math.inf, 0.0
    t = pts[:, 1]
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    ss_res = float(np.sum((t - (fit.slope * pts[:, 0] + fit.intercept)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return fit.slope, r2
