"""Exit criteria, each at its stated tolerance and trial count.

Run alone with ``pytest tests/test_acceptance.py -s``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import math
import random
from fractions import Fraction

import pytest

from srs_uplink import cli
from srs_uplink.analytic import (
    NonPositiveTransmitTime,
    overall_collision,
    pc_srs,
    sps_max_users,
    sps_required_rate,
    traffic_pmf,
    traffic_pmf_vector,
)
from srs_uplink.grouping import group_users, max_group_diameter, read_positions
from srs_uplink.model import ExternalOccupancy, GroupConfig, Scheme, SpsParams, TrafficModel, UePosition
from srs_uplink.scenario import bundled_names, load_scenario
from srs_uplink.sim import SimConfig, enumerate_exact_poc, monte_carlo_fixed_n, monte_carlo_poc

TRIALS = 1_000_000
FIGURES = {"fig6": (3, 9, 15), "fig7": (5, 11, 20), "fig8": (8, 15, 40)}


def criterion(number, title):
    return pytest.mark.criterion(number, title)


@criterion(1, "SPS rate 92.16 Mbps at N=9, max users 9, N=10 infeasible")
def test_c1_sps_exactness():
    params = SpsParams.from_dict({
        "packet_bytes": 32, "t_uplink_deadline": 500, "t_resource_gap": 500,
        "t_available": Fraction(500) / 2, "t_lbt": 25,
    })
    assert params.packet_bits == 256
    rate = sps_required_rate(9, params)
    assert isinstance(rate, Fraction) and rate == Fraction(92_160_000)
    assert sps_max_users(params, Fraction(92_160_000)) == 9
    assert sps_max_users(params, 92.16e6) == 9
    with pytest.raises(NonPositiveTransmitTime):
        sps_required_rate(10, params)


@criterion(2, "pc_srs = 0 for n <= 1 and = 1 for n > K, all K, L <= 64")
def test_c2_boundaries():
    bad = []
    for k in range(1, 65):
        for l in range(1, 65):
            for n in (0, 1):
                if pc_srs(n, k, l) != 0.0:
                    bad.append((n, k, l))
            for n in range(k + 1, 130):
                if pc_srs(n, k, l) != 1.0:
                    bad.append((n, k, l))
    assert not bad, bad[:10]


@criterion(3, "n=2: enumeration = pc_srs = 1/(K*L) within 1e-12, K, L in [1, 16]")
def test_c3_two_ue_closed_form():
    mismatch_enum, mismatch_reduced = [], []
    for k in range(1, 17):
        for l in range(1, 17):
            exact = enumerate_exact_poc(2, GroupConfig(k, l, 2), Scheme.SRS)
            closed = pc_srs(2, k, l)
            if abs(exact - closed) > 1e-12:
                mismatch_enum.append((k, l, exact, closed))
            if abs(closed - 1 / (k * l)) > 1e-12:
                mismatch_reduced.append((k, l, closed, 1 / (k * l)))
    assert not mismatch_enum, mismatch_enum
    # K=1 with n=2 > K: pc_srs = 1 as criterion 2 requires, which differs from 1/L for L >= 2
    assert not mismatch_reduced, f"{len(mismatch_reduced)} cases: {mismatch_reduced}"


ENUM_CASES = [(n, k, l) for n in range(0, 5) for k in range(1, 5) for l in range(1, 5)]


@criterion(4, "fixed-n Monte Carlo (1e6 trials) vs enumeration within 4 stderr, n, K, L <= 4")
@pytest.mark.parametrize("scheme", list(Scheme))
def test_c4_enumeration_oracle(scheme):
    failures = []
    for n, k, l in ENUM_CASES:
        g = GroupConfig(k, l, 4)
        exact = enumerate_exact_poc(n, g, scheme)
        seed = 4000 + 100 * n + 10 * k + l
        est = monte_carlo_fixed_n(n, g, scheme, ExternalOccupancy(0.0), trials=TRIALS, seed=seed)
        if abs(est.p_hat - exact) > 4 * est.stderr:
            failures.append((n, k, l, exact, est.p_hat, est.stderr))
    assert not failures, failures


@criterion(5, "contention Monte Carlo vs analytic within 3 stderr, fig6, lambda in {1, 3, 5}")
@pytest.mark.parametrize("lam", [1.0, 3.0, 5.0])
def test_c5_contention_agreement(lam):
    g = load_scenario("fig6").group
    t = TrafficModel(lam, g.n_group_size)
    est = monte_carlo_poc(SimConfig(g, Scheme.CONTENTION, t, trials=TRIALS, seed=500 + int(lam)))
    assert abs(est.p_hat - overall_collision(t, g, Scheme.CONTENTION)) <= 3 * est.stderr


@pytest.fixture(scope="module")
def figure_curves():
    curves = {}
    for name in FIGURES:
        s = load_scenario(name)
        g = s.group
        rows = []
        for lam in s.lambda_grid:
            t = TrafficModel(lam, g.n_group_size)
            row = {"lambda": lam}
            for scheme in Scheme:
                row[f"a_{scheme.value}"] = overall_collision(t, g, scheme)
                est = monte_carlo_poc(SimConfig(g, scheme, t, s.external, TRIALS, s.seed))
                row[f"m_{scheme.value}"] = est.p_hat
                row[f"s_{scheme.value}"] = est.stderr
            rows.append(row)
        curves[name] = rows
    return curves


@criterion(6, "figs 6-8: SRS <= contention, nondecreasing in lambda, approaching 1 past K")
@pytest.mark.parametrize("name", list(FIGURES))
def test_c6_figure_properties(figure_curves, name):
    k, _, n_g = FIGURES[name]
    rows = figure_curves[name]
    assert rows[-1]["lambda"] == k + 3
    for r in rows:
        assert r["a_SRS"] <= r["a_CONTENTION"]
        assert r["m_SRS"] <= r["m_CONTENTION"] + 4 * math.hypot(r["s_SRS"], r["s_CONTENTION"])
    for a, b in zip(rows, rows[1:]):
        for scheme in ("SRS", "CONTENTION"):
            assert b[f"a_{scheme}"] >= a[f"a_{scheme}"]
            assert b[f"m_{scheme}"] >= a[f"m_{scheme}"] - 4 * math.hypot(a[f"s_{scheme}"], b[f"s_{scheme}"])
    # past K the blocking mass P(n > K) floors every curve
    last = rows[-1]
    pmf = traffic_pmf_vector(TrafficModel(last["lambda"], n_g))
    floor = 1.0 - math.fsum(pmf[: k + 1])
    for scheme in ("SRS", "CONTENTION"):
        assert last[f"a_{scheme}"] >= floor and last[f"a_{scheme}"] >= 0.75
        assert last[f"m_{scheme}"] >= floor - 4 * last[f"s_{scheme}"]
        assert last[f"m_{scheme}"] >= 0.75
        at_k = next(r for r in rows if r["lambda"] == k)
        assert last[f"a_{scheme}"] > at_k[f"a_{scheme}"]
        assert last[f"m_{scheme}"] > at_k[f"m_{scheme}"]


def _run_to(tmp_path, verb, name, tag, *extra):
    out = tmp_path / f"{name}_{tag}.csv"
    assert cli.main([verb, name, "--out", str(out), *extra]) == 0
    return out.read_bytes()


@criterion(7, "bundled scenarios rerun byte-identical, also across worker counts")
def test_c7_determinism(tmp_path):
    verbs = {"SPS_SWEEP": "sps-sweep", "COLLISION_SWEEP": "collision-sweep", "GROUPING": "grouping"}
    for name in bundled_names():
        verb = verbs[load_scenario(name).kind.value]
        extra = []
        if verb == "collision-sweep" and name != "fig6":
            extra = ["--trials", "50000"]
        a = _run_to(tmp_path, verb, name, "a", *extra)
        b = _run_to(tmp_path, verb, name, "b", *extra)
        assert a == b, name
        if verb == "collision-sweep":
            c = _run_to(tmp_path, verb, name, "c", *extra, "--workers", "3")
            assert a == c, name


@criterion(8, "q=1 gives 1 - P(0) within 3 stderr; q=0 keeps criterion 5/6 behaviour")
@pytest.mark.parametrize("scheme", list(Scheme))
def test_c8_external_channel(scheme):
    g = load_scenario("fig6").group
    t = TrafficModel(3.0, g.n_group_size)
    est = monte_carlo_poc(SimConfig(g, scheme, t, ExternalOccupancy(1.0), TRIALS, seed=81))
    assert abs(est.p_hat - (1.0 - traffic_pmf(t, 0))) <= 3 * est.stderr
    free = monte_carlo_poc(SimConfig(g, scheme, t, ExternalOccupancy(0.0), TRIALS, seed=80))
    if scheme is Scheme.CONTENTION:
        assert abs(free.p_hat - overall_collision(t, g, scheme)) <= 3 * free.stderr
    else:
        other = monte_carlo_poc(SimConfig(g, Scheme.CONTENTION, t, ExternalOccupancy(0.0), TRIALS, seed=80))
        assert free.p_hat <= other.p_hat + 4 * math.hypot(free.stderr, other.stderr)


@criterion(9, "grouping invariants on 1000 random instances; 11-UE / 3-cluster instance")
def test_c9_grouping():
    rnd = random.Random(2021)
    for _ in range(1000):
        n = rnd.randint(1, 60)
        side = rnd.uniform(10, 1000)
        ids = rnd.sample(range(10 * n), n)
        pts = [UePosition(i, rnd.uniform(0, side), rnd.uniform(0, side)) for i in ids]
        r = rnd.uniform(1, side)
        a = group_users(pts, r)
        flat = [u for g in a.groups for u in g]
        assert sorted(flat) == sorted(ids) and len(flat) == len(set(flat))
        assert max_group_diameter(a, pts) <= r
        shuffled = pts[:]
        rnd.shuffle(shuffled)
        assert group_users(shuffled, r) == a

    s = load_scenario("fig3")
    pts = read_positions(s.positions_path)
    assert len(pts) == 11
    a = group_users(pts, s.hearing_range)
    assert len(a.groups) == 3
    # the instance is well separated: every cross-group pair is out of range
    where = {u: gid for gid, g in enumerate(a.groups) for u in g}
    for p in pts:
        for q in pts:
            if where[p.ue_id] != where[q.ue_id]:
                assert math.hypot(p.x - q.x, p.y - q.y) > s.hearing_range
