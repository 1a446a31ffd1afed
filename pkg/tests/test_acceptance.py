"""Acceptance suite: one test per exit criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion. Monte Carlo sizes and tolerances are pinned here, not calibrated
elsewhere.
"""
import math
import random
import time

import numpy as np
import pytest

from derasim import (
    Behavior,
    EquilibriumParams,
    FeasibilityError,
    NemTariff,
    PoAAccess,
    Prosumer,
    QuadraticUtility,
    benefit_sample,
    bundled_trace_path,
    kkt_stationarity_residual,
    equivalence_report,
    load_trace,
    market_firm_count,
    multi_interval_survivors,
    newton_equilibrium,
    nem_surplus,
    optimal_schedule,
    sample_trunc_gauss,
    single_interval_equilibrium,
    utility_value,
    verify_conditions,
    zeta_bar,
)
from derasim.equilibrium import hourly_scenarios
from derasim.experiments import _Population, variant_surplus
from derasim.scenario import TruncGaussSpec, substream_seed
from oracles import golden_max

SEED = 20240810
ALPHA, BETA = 0.4, 0.1
PI_PLUS = 0.3
U = QuadraticUtility(ALPHA, BETA)


def _vi_a_scenarios(count=10_000, seed=SEED, e_g=1.1):
    lmp_spec = TruncGaussSpec(0.05, 0.01, 0.0, PI_PLUS)
    dg_spec = TruncGaussSpec(e_g, 0.2, 0.0, math.inf)
    lmp = sample_trunc_gauss(lmp_spec, count, substream_seed(seed, "lmp"))
    dg = sample_trunc_gauss(dg_spec, count, substream_seed(seed, "dg"))
    return lmp, dg


def test_criterion_1_schedule_matches_brute_force():
    rng = random.Random(SEED)
    start = time.perf_counter()
    checked = 0
    worst = 0.0
    while checked < 1000:
        alpha = rng.uniform(0.1, 1.0)
        beta = rng.uniform(0.01, 0.5)
        g = rng.uniform(0.0, 8.0)
        pi = rng.uniform(0.0, 0.5)
        k = rng.uniform(0.0, 0.5)
        d_max = rng.uniform(1.0, 10.0)
        d_min = rng.uniform(0.0, d_max / 2)
        access = PoAAccess(
            rng.choice([math.inf, rng.uniform(0.0, 4.0)]),
            rng.choice([math.inf, rng.uniform(0.0, 4.0)]),
        )
        p = Prosumer("p", 0, QuadraticUtility(alpha, beta), d_min, d_max)
        lo = max(d_min, g - access.c_inj)
        hi = min(d_max, g + access.c_wd)
        if lo > hi:
            continue
        checked += 1
        d, w = optimal_schedule(p, access, g, pi, k)
        closed = w - pi * (d - g)
        _, brute = golden_max(
            lambda x: utility_value(p.utility, x) - k - pi * (x - g), lo, hi, grid_step=0.01
        )
        worst = max(worst, abs(closed - brute))
        assert abs(closed - brute) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"
    print(f"\n[criterion 1] PASS: 1000 instances, worst |closed - brute| = {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_average_cost_capped_at_retail_rate():
    lmp, dg = _vi_a_scenarios()
    violations = 0
    worst = -math.inf
    for behavior in (Behavior.ACTIVE, Behavior.PASSIVE):
        p = Prosumer("p", 0, U, 0.0, 40.0, behavior)
        for pi, g in zip(lmp, dg):
            tariff = NemTariff(PI_PLUS, float(pi), 0.0)
            s = nem_surplus(p, tariff, PoAAccess.unlimited(), float(g)).surplus
            assert s >= 0.0
            d, w = optimal_schedule(p, PoAAccess.unlimited(), float(g), float(pi), k=s)
            if d > 0:
                ratio = w / d
                worst = max(worst, ratio)
                if ratio > PI_PLUS + 1e-9:
                    violations += 1
    assert violations == 0
    print(f"\n[criterion 2] PASS: 20000 prosumer-scenarios, max omega/d = {worst:.6f} <= {PI_PLUS} + 1e-9")


def test_criterion_3_profitability_and_value_floor():
    lmp, _ = _vi_a_scenarios()
    rng = np.random.Generator(np.random.Philox(key=substream_seed(SEED, "fleet")))
    fleet_g = np.maximum(rng.normal(2.0, 1.5, size=(10_000, 5)), 0.0)
    prosumers = [Prosumer(f"p{i}", 0, U, 0.0, 40.0, Behavior.PASSIVE) for i in range(5)]
    amp = PoAAccess.unlimited()
    min_profit = math.inf
    worst_floor = math.inf
    for s_idx in range(10_000):
        pi = float(lmp[s_idx])
        tariff = NemTariff(PI_PLUS, pi, 0.0)
        gs = [float(v) for v in fleet_g[s_idx]]
        zetas = [zeta_bar(p, tariff, amp, g, pi) for p, g in zip(prosumers, gs)]
        zeta = min(zetas)
        profit = 0.0
        for p, g in zip(prosumers, gs):
            s_nem = nem_surplus(p, tariff, amp, g).surplus
            d, w = optimal_schedule(p, amp, g, pi, k=zeta * s_nem)
            profit += w - pi * (d - g)
            value = utility_value(p.utility, d) - pi * (d - g)
            worst_floor = min(worst_floor, value - s_nem)
            assert value >= s_nem - 1e-12
        min_profit = min(min_profit, profit)
        assert profit >= -1e-9
    print(
        f"\n[criterion 3] PASS: min fleet profit {min_profit:.2e} >= -1e-9; "
        f"min (value - benchmark) = {worst_floor:.2e} >= -1e-12"
    )


def test_criterion_4_direct_vs_aggregated_clearing():
    from test_market import random_network

    rng = random.Random(SEED)
    done = 0
    attempts = 0
    worst_gap = 0.0
    worst_kkt = 0.0
    while done < 50:
        attempts += 1
        assert attempts < 500, "network generator exhausted"
        net, parts = random_network(rng)
        if not parts:
            continue
        try:
            rep = equivalence_report(net, parts)
        except FeasibilityError:
            continue
        done += 1
        worst_gap = max(worst_gap, rep.sw_gap, rep.lmp_gap, rep.surplus_gap)
        kkt = kkt_stationarity_residual(rep.direct, parts)
        worst_kkt = max(worst_kkt, kkt)
        assert rep.sw_gap <= 1e-6
        assert rep.lmp_gap <= 1e-6
        assert rep.surplus_gap <= 1e-6
        assert kkt <= 1e-6
    print(f"\n[criterion 4] PASS: 50 networks, worst clearing gap {worst_gap:.2e}, worst KKT residual {worst_kkt:.2e}")


def test_criterion_5_benefit_decomposition_identity():
    lmp, dg = _vi_a_scenarios()
    accesses = [PoAAccess(1.0, 1.0), PoAAccess.unlimited(), PoAAccess(2.0, 0.5)]
    prosumers = [Prosumer(f"p{i}", 0, U, 0.0, 40.0, Behavior.PASSIVE) for i in range(3)]
    rng = np.random.Generator(np.random.Philox(key=substream_seed(SEED, "dg5")))
    fleet_g = np.maximum(rng.normal(1.1, 0.8, size=(10_000, 3)), 0.0)
    worst = 0.0
    for s_idx in range(10_000):
        pi = float(lmp[s_idx])
        for p, a, g in zip(prosumers, accesses, fleet_g[s_idx]):
            g = float(g)
            sample = benefit_sample(p, a, g, pi, k=0.123)
            d, w = optimal_schedule(p, a, g, pi, k=0.123)
            profit = w - pi * (d - g)
            gap = abs(sample.contribution - profit)
            worst = max(worst, gap)
            assert gap <= 1e-9
            assert sample.phi_wd * sample.phi_inj == 0.0
    print(f"\n[criterion 5] PASS: 30000 prosumer-scenarios, worst decomposition gap {worst:.2e}; exclusivity exact")


def test_criterion_6_equilibrium_closed_form():
    params = EquilibriumParams(
        n_prosumers=50, alpha=ALPHA, beta=BETA, g_total=0.0, k_total=1.6,
        dso_a=0.009, dso_b=0.0005, initial_deras=200,
    )
    out = single_interval_equilibrium(params)
    assert out.exists
    results = []
    for pi in (0.0, 0.05, 0.2):
        marginal, profit = verify_conditions(out, params, pi)
        assert abs(marginal) <= 1e-8
        assert abs(profit) <= 1e-8
        c_newton, k_newton = newton_equilibrium(params, pi, x0=(out.c_star * 0.6, out.k_star * 2 + 0.3))
        assert c_newton == pytest.approx(out.c_star, rel=1e-6)
        assert k_newton == pytest.approx(out.k_star, rel=1e-6)
        results.append((out.c_star, out.k_star))
    assert results[0] == results[1] == results[2]
    print(
        f"\n[criterion 6] PASS: (c*, k*) = ({out.c_star:.6g}, {out.k_star:.6g}) satisfies both conditions "
        "at 1e-8, matches Newton at 1e-6, invariant across pi in {0, 0.05, 0.2}"
    )


def _variant_arrays(e_g: float, count=10_000, adoption=0.8, n=20, delta=None):
    pop = _Population({"n": n, "alpha": ALPHA, "beta": BETA, "d_min": 0.0, "d_max": 40.0})
    tariff = NemTariff(PI_PLUS, 0.0, 0.0)
    lmp = sample_trunc_gauss(TruncGaussSpec(0.05, 0.01, 0.0, PI_PLUS), count, substream_seed(SEED, "lmp7"))
    adopters = int(round(adoption * n))
    g = np.zeros((count, n))
    for j in range(adopters):
        g[:, j] = sample_trunc_gauss(
            TruncGaussSpec(e_g, 0.2, 0.0, math.inf), count, substream_seed(SEED, "dg7", f"{e_g}-{j}")
        )
    zetas = {"co_nema": "prop2", "co_gab": 1.05, "gab": 1.0}
    c = math.inf if delta is None else 8.0 * delta
    out = {}
    for variant in ("NEMa", "NEMp", "GAB", "Co.NEMa", "Co.GAB", "Direct"):
        out[variant] = variant_surplus(variant, pop, g, lmp, tariff, c, c, zetas)
    return out


def test_criterion_7_pareto_front_structure():
    for e_g in (1.1, 5.1):
        arrays = _variant_arrays(e_g)
        direct_total = arrays["Direct"][0] + arrays["Direct"][1]
        for variant in ("Co.NEMa", "Co.GAB"):
            total = arrays[variant][0] + arrays[variant][1]
            assert float(np.max(np.abs(total - direct_total))) <= 1e-9
        for variant in ("NEMa", "NEMp", "GAB"):
            total = arrays[variant][0] + arrays[variant][1]
            assert np.all(total <= direct_total + 1e-9)
        # dominance of the competitive aggregator over the tariff benchmarks,
        # customer axis per scenario, aggregator axis in expectation
        for variant in ("NEMa", "NEMp"):
            assert np.all(arrays["Co.NEMa"][0] >= arrays[variant][0] - 1e-9)
            assert arrays["Co.NEMa"][1].mean() >= arrays[variant][1].mean() - 1e-9
    print("\n[criterion 7] PASS: Co.NEMa/Co.GAB totals equal Direct per scenario (1e-9); benchmarks below; dominance holds")


def test_criterion_8_sweep_orderings():
    # adoption sweep at unlimited access: customer-surplus orderings and the
    # exact NEMa/NEMp aggregator overlap
    for e_g in (1.1, 5.1):
        for adoption in (0.2, 0.5, 0.8, 1.0):
            arrays = _variant_arrays(e_g, count=4000, adoption=adoption, delta=None)
            nema_dera = arrays["NEMa"][1]
            nemp_dera = arrays["NEMp"][1]
            assert float(np.max(np.abs(nema_dera - nemp_dera))) <= 1e-9
            cust_best = max(arrays["Co.NEMa"][0].mean(), arrays["Co.GAB"][0].mean())
            for v in ("NEMa", "NEMp", "GAB"):
                assert cust_best >= arrays[v][0].mean() - 1e-9
            for v in ("NEMa", "GAB", "Co.NEMa", "Co.GAB", "Direct"):
                assert arrays["NEMp"][0].mean() <= arrays[v][0].mean() + 1e-9
    # access-ratio sweep: every aggregator's surplus is nondecreasing in delta
    deltas = [0.0, 0.1, 0.25, 0.5, 1.0]
    for e_g in (1.1, 5.1):
        per_variant = {v: [] for v in ("NEMa", "NEMp", "GAB", "Co.NEMa", "Co.GAB")}
        for delta in deltas:
            arrays = _variant_arrays(e_g, count=4000, adoption=0.5, delta=delta)
            assert float(np.max(np.abs(arrays["NEMa"][1] - arrays["NEMp"][1]))) <= 1e-9
            for v in per_variant:
                per_variant[v].append(arrays[v][1].mean())
        for v, series in per_variant.items():
            assert all(a <= b + 1e-9 for a, b in zip(series, series[1:])), (v, series)
    print(
        "\n[criterion 8] PASS: customer-surplus orderings hold on the adoption sweep; "
        "aggregator surplus nondecreasing in the access ratio; NEMa/NEMp overlap exact"
    )


def test_criterion_9_long_run_survivor_shape():
    start = time.perf_counter()
    trace = load_trace(bundled_trace_path())
    params = EquilibriumParams(
        n_prosumers=50, alpha=ALPHA, beta=BETA, g_total=0.0, k_total=0.0,
        dso_a=0.009, dso_b=0.0005, initial_deras=200,
    )
    tariff = NemTariff(PI_PLUS, 0.0, 0.0)
    eps1_grid = [0.0, 0.15, 0.35, 0.7, 1.0]
    eps2_grid = [0.5, 1.0]
    table = {}
    for eps1 in eps1_grid:
        banks = hourly_scenarios(trace, params, eps1, 10_000, tariff=tariff, zeta=1.01, seed=SEED)
        for eps2 in eps2_grid:
            table[(eps1, eps2)] = multi_interval_survivors(
                trace, params, eps1, eps2, 10_000, tariff=tariff, zeta=1.01, seed=SEED, banks=banks
            )
    for eps2 in eps2_grid:
        series = [table[(e1, eps2)] for e1 in eps1_grid]
        assert series[-1] == 200, f"plateau missing: {series}"
        assert all(a <= b for a, b in zip(series, series[1:])), f"not monotone toward the plateau: {series}"
        assert series[0] < 200
    for eps1 in eps1_grid:
        assert table[(eps1, 0.5)] >= table[(eps1, 1.0)]
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"survivor sweep took {elapsed:.0f}s"
    print(f"\n[criterion 9] PASS: survivors {table}; runtime {elapsed:.0f}s < 300s")
