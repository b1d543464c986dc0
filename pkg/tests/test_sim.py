import math

import numpy as np
import pytest

from hlps.errors import BadScenarioParams
from hlps.geometry import Point2D, distance
from hlps.metrics import service_accuracy
from hlps.protocol import LbsQuery, User
from hlps.provider import PoiRecord, ProviderModel, serve_query
from hlps.sim import (
    ScenarioParams,
    derive_seed,
    empirical_accuracy,
    generate_scenario,
    grid_points,
    linearity,
    run_simulation,
    sweep,
    timing_probe,
)


def brute_force_serve(pois, center, radius, service):
    hits = [p for p in pois if p.category == service and distance(p.position, center) <= radius]
    return sorted(hits, key=lambda p: (distance(p.position, center), p.id))


def random_pois(rng, n, cats=("restaurant", "bank", "taxi"), size=1000.0):
    xy = rng.uniform(0, size, (n, 2))
    c = rng.integers(0, len(cats), n)
    return tuple(PoiRecord(i + 1, Point2D(x, y), cats[k]) for i, ((x, y), k) in enumerate(zip(xy, c)))


# --- provider ------------------------------------------------------------


def test_serve_includes_poi_at_query_point():
    prov = ProviderModel((PoiRecord(1, Point2D(10, 10), "bank"),), 125.0)
    resp = serve_query(prov, LbsQuery(4, Point2D(10, 10), "bank"))
    assert [p.id for p in resp.payload] == [1]
    assert resp.qu == 4 and resp.provider == 0


def test_serve_excludes_far_poi():
    prov = ProviderModel((PoiRecord(1, Point2D(200, 0), "bank"),), 125.0)
    assert serve_query(prov, LbsQuery(1, Point2D(0, 0), "bank")).payload == ()


def test_serve_filters_category():
    prov = ProviderModel((PoiRecord(1, Point2D(0, 0), "bank"), PoiRecord(2, Point2D(1, 0), "taxi")), 125.0)
    assert [p.id for p in serve_query(prov, LbsQuery(1, Point2D(0, 0), "taxi")).payload] == [2]


def test_serve_orders_ties_by_id():
    pois = (PoiRecord(9, Point2D(10, 0), "r"), PoiRecord(3, Point2D(-10, 0), "r"), PoiRecord(5, Point2D(0, 5), "r"))
    prov = ProviderModel(pois, 125.0)
    assert [p.id for p in serve_query(prov, LbsQuery(1, Point2D(0, 0), "r")).payload] == [5, 3, 9]


def test_serve_empty_catalogue():
    assert serve_query(ProviderModel((), 125.0), LbsQuery(1, Point2D(0, 0), "r")).payload == ()


def test_serve_matches_brute_force(rng):
    pois = random_pois(rng, 10_000)
    prov = ProviderModel(pois, 125.0)
    for _ in range(10):
        center = Point2D(*rng.uniform(0, 1000, 2))
        got = serve_query(prov, LbsQuery(1, center, "bank")).payload
        assert list(got) == brute_force_serve(pois, center, 125.0, "bank")


def test_provider_rejects_bad_radius():
    with pytest.raises(ValueError):
        ProviderModel((), 0.0)


# --- scenarios -----------------------------------------------------------


def test_scenario_deterministic():
    p = ScenarioParams(n_users=10, seed=99)
    assert generate_scenario(p) == generate_scenario(p)


def test_scenario_seed_changes_layout():
    a = generate_scenario(ScenarioParams(n_users=10, seed=1))
    b = generate_scenario(ScenarioParams(n_users=10, seed=2))
    assert a.users != b.users


def test_scenario_bounds():
    sc = generate_scenario(ScenarioParams(n_users=10, seed=5, region_width=1000, region_height=1000))
    assert len(sc.users) == 10
    assert all(sc.region.contains(u.true_position) for u in sc.users)
    assert all(sc.region.contains(p.position) for p in sc.provider.pois)
    assert [u.id for u in sc.users] == list(range(1, 11))


def test_scenario_uniform_placement_mean():
    sc = generate_scenario(ScenarioParams(n_users=10_000, seed=6, n_pois=0, rounds=0))
    xy = np.array([u.true_position.as_tuple() for u in sc.users])
    np.testing.assert_allclose(xy.mean(axis=0), [500.0, 500.0], rtol=0.02)


def test_scenario_privacy_distributions():
    fixed = generate_scenario(ScenarioParams(n_users=4, seed=1, privacy=0.3))
    assert [u.privacy for u in fixed.users] == [0.3] * 4
    listed = generate_scenario(ScenarioParams(n_users=3, seed=1, privacy=(0.1, 0.5, 0.9)))
    assert [u.privacy for u in listed.users] == [0.1, 0.5, 0.9]
    uni = generate_scenario(ScenarioParams(n_users=200, seed=1))
    assert all(0 <= u.privacy <= 1 for u in uni.users)
    assert len({u.privacy for u in uni.users}) == 200


def test_scenario_poi_categories():
    sc = generate_scenario(ScenarioParams(n_users=2, seed=1, n_pois=300, poi_categories=("a", "b")))
    assert {p.category for p in sc.provider.pois} == {"a", "b"}


@pytest.mark.parametrize(
    "changes",
    [
        dict(n_users=0),
        dict(rounds=-1),
        dict(rho_min=60.0, rho_max=50.0),
        dict(privacy="gaussian"),
        dict(privacy=(0.1, 0.2)),
        dict(privacy=1.5),
        dict(serving_radius=0.0),
        dict(region_width=-1.0),
        dict(seed=-1),
    ],
)
def test_scenario_rejects(changes):
    base = dict(n_users=3, seed=1)
    base.update(changes)
    with pytest.raises(BadScenarioParams):
        generate_scenario(ScenarioParams(**base))


# --- empirical accuracy --------------------------------------------------


def test_empirical_full_cover():
    pois = (PoiRecord(1, Point2D(0, 0), "r"), PoiRecord(2, Point2D(50, 0), "r"))
    prov = ProviderModel(pois, 125.0)
    user = User(1, Point2D(0, 0), 0.5)
    assert empirical_accuracy(user, pois, prov) == 100.0


def test_empirical_vacuous():
    prov = ProviderModel((PoiRecord(1, Point2D(900, 900), "r"),), 125.0)
    assert empirical_accuracy(User(1, Point2D(0, 0), 0.5), (), prov) == 100.0


def test_empirical_partial():
    pois = tuple(PoiRecord(i, Point2D(10.0 * i, 0), "r") for i in range(1, 5))
    prov = ProviderModel(pois, 125.0)
    assert empirical_accuracy(User(1, Point2D(0, 0), 0.5), pois[:1], prov) == 25.0


def test_empirical_respects_service():
    pois = (PoiRecord(1, Point2D(0, 0), "r"), PoiRecord(2, Point2D(1, 0), "bank"))
    prov = ProviderModel(pois, 125.0)
    assert empirical_accuracy(User(1, Point2D(0, 0), 0.5), pois[:1], prov, service="r") == 100.0
    assert empirical_accuracy(User(1, Point2D(0, 0), 0.5), pois[:1], prov) == 50.0


@pytest.mark.parametrize("d", [0.0, 60.0, 125.0, 200.0])
def test_empirical_converges_to_geometric(d):
    rng = np.random.default_rng(int(d) + 1)
    pois = random_pois(rng, 100_000, cats=("r",))
    prov = ProviderModel(pois, 125.0)
    user = User(1, Point2D(500, 500), 0.5)
    final = Point2D(500 + d, 500)
    payload = serve_query(prov, LbsQuery(1, final, "r")).payload
    emp = empirical_accuracy(user, payload, prov, "r")
    assert emp == pytest.approx(service_accuracy(user, final, 125.0), abs=2.0)


# --- simulation ----------------------------------------------------------


def test_zero_rounds():
    res = run_simulation(generate_scenario(ScenarioParams(n_users=3, seed=1, rounds=0)))
    assert res.per_round == ()
    assert res.aggregate.sends == 0 and res.aggregate.energy == 0.0
    assert res.aggregate.per_user_accuracy == {}


def test_simulation_deterministic():
    sc = generate_scenario(ScenarioParams(n_users=6, seed=12, rounds=5))
    assert run_simulation(sc) == run_simulation(sc)


def test_simulation_send_law_every_round():
    res = run_simulation(generate_scenario(ScenarioParams(n_users=5, seed=3, rounds=20)))
    assert len(res.per_round) == 20
    assert all(rep.sends == 11 for _, rep in res.per_round)
    assert res.aggregate.sends == 220


def test_simulation_rounds_draw_fresh_noise():
    res = run_simulation(generate_scenario(ScenarioParams(n_users=3, seed=3, rounds=2)))
    (a, _), (b, _) = res.per_round
    assert a.final_location != b.final_location


def test_simulation_payload_matches_provider():
    sc = generate_scenario(ScenarioParams(n_users=4, seed=8, rounds=3, n_pois=2000))
    for outcome, _ in run_simulation(sc).per_round:
        expected = serve_query(sc.provider, outcome.query).payload
        assert all(p == expected for p in outcome.per_user_payloads.values())


# --- sweeps --------------------------------------------------------------


def test_grid_points_product():
    pts = grid_points({"n_users": [2, 5], "rho_max": [10.0, 20.0, 30.0]})
    assert len(pts) == 6
    assert pts[0] == {"n_users": 2, "rho_max": 10.0}
    assert pts[-1] == {"n_users": 5, "rho_max": 30.0}


@pytest.mark.parametrize("vary", [{}, {"seed": [1]}, {"n_users": []}])
def test_grid_rejects(vary):
    with pytest.raises(BadScenarioParams):
        grid_points(vary)


def test_sweep_single_point_equals_run():
    base = ScenarioParams(n_users=4, seed=77, rounds=5)
    rows = sweep(base, {"rho_max": [80.0]})
    direct = run_simulation(generate_scenario(ScenarioParams(n_users=4, seed=77, rounds=5, rho_max=80.0)))
    assert len(rows) == 1
    assert rows[0].aggregate == direct.aggregate


def test_sweep_send_column():
    rows = sweep(ScenarioParams(n_users=1, seed=1, rounds=3), {"n_users": [2, 5, 10]})
    assert [r.aggregate.sends // r.rounds for r in rows] == [5, 11, 21]


def test_sweep_seeds_distinct_and_ordered():
    rows = sweep(ScenarioParams(n_users=2, seed=2**64 - 2, rounds=1), {"n_users": [2, 3, 4, 5]})
    seeds = [r.seed for r in rows]
    assert len(set(seeds)) == 4
    assert seeds == [derive_seed(2**64 - 2, i) for i in range(4)]


def test_sweep_parallel_matches_sequential():
    base = ScenarioParams(n_users=3, seed=4, rounds=4)
    vary = {"serving_radius": [50.0, 125.0, 250.0], "privacy": ["uniform", 0.2]}
    assert sweep(base, vary, workers=3) == sweep(base, vary, workers=1)


def test_sweep_accuracy_falls_with_noise():
    # users packed together so blur dominates the gap to the group mean
    base = ScenarioParams(n_users=5, seed=21, rounds=200, region_width=10, region_height=10,
                          privacy=1.0, n_pois=0, rho_min=0.0)
    rows = sweep(base, {"rho_max": [10.0, 100.0, 300.0]})
    acc = [r.aggregate.mean_accuracy for r in rows]
    assert acc[0] >= acc[1] >= acc[2]
    assert acc[0] - acc[2] > 10.0


# --- timing --------------------------------------------------------------


def test_timing_probe_shape():
    out = timing_probe([10, 100, 1000], repetitions=3)
    assert [n for n, _ in out] == [10, 100, 1000]
    assert all(t > 0 for _, t in out)


@pytest.mark.parametrize("sizes,reps", [([], 3), ([0, 10], 3), ([10], 2)])
def test_timing_probe_contract(sizes, reps):
    with pytest.raises(ValueError):
        timing_probe(sizes, reps)


def test_linearity_exact_line():
    slope, r2 = linearity([(1, 2.0), (2, 4.0), (4, 8.0)])
    assert slope == pytest.approx(2.0)
    assert r2 == pytest.approx(1.0)
