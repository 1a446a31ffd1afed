import math
import random

import pytest

from derasim import (
    Behavior,
    CompetitiveConfig,
    BenchmarkMode,
    FeasibilityError,
    NemTariff,
    PoAAccess,
    Prosumer,
    QuadraticUtility,
    active_surplus,
    benchmark_k,
    clamp_f,
    nem_bill,
    passive_surplus,
    utility_value,
)
from oracles import golden_max

U = QuadraticUtility(0.4, 0.1)
TARIFF = NemTariff(pi_plus=0.3, pi_minus=0.05, pi_zero=0.0)
AMPLE = PoAAccess.unlimited()


def prosumer(d_min=0.0, d_max=4.0, behavior=Behavior.ACTIVE):
    return Prosumer("p", 0, U, d_min, d_max, behavior)


class TestBill:
    def test_consumer_branch(self):
        assert nem_bill(TARIFF, 2.0) == pytest.approx(0.6)

    def test_producer_branch(self):
        assert nem_bill(TARIFF, -2.0) == pytest.approx(-0.1)

    def test_zero_net(self):
        assert nem_bill(TARIFF, 0.0) == 0.0

    def test_convexity(self):
        rng = random.Random(1)
        for _ in range(200):
            z1, z2 = rng.uniform(-5, 5), rng.uniform(-5, 5)
            t = rng.random()
            mid = nem_bill(TARIFF, t * z1 + (1 - t) * z2)
            assert mid <= t * nem_bill(TARIFF, z1) + (1 - t) * nem_bill(TARIFF, z2) + 1e-12

    def test_tariff_invariants(self):
        with pytest.raises(ValueError):
            NemTariff(0.05, 0.3)
        with pytest.raises(ValueError):
            NemTariff(0.3, 0.05, -1.0)


class TestClampF:
    def test_injection_clamp(self):
        assert clamp_f(prosumer(), PoAAccess(1.0, math.inf), 5.0, 0.05) == pytest.approx(4.0)

    def test_interior(self):
        assert clamp_f(prosumer(), AMPLE, 0.0, 0.3) == pytest.approx(1.0)

    def test_zero_access_pins_to_g(self):
        assert clamp_f(prosumer(), PoAAccess(0.0, 0.0), 2.0, 0.17) == pytest.approx(2.0)

    def test_infeasible_box_names_pair(self):
        with pytest.raises(FeasibilityError, match="exceeds"):
            clamp_f(prosumer(d_max=4.0), PoAAccess(0.0, 0.0), 5.0, 0.1)


class TestActiveSurplus:
    @pytest.mark.parametrize(
        "g,d_expected,s_expected",
        [(0.0, 1.0, 0.05), (2.0, 2.0, 0.6), (5.0, 3.5, 0.8625)],
    )
    def test_examples(self, g, d_expected, s_expected):
        out = active_surplus(prosumer(), TARIFF, AMPLE, g)
        assert out.d == pytest.approx(d_expected, abs=1e-9)
        assert out.surplus == pytest.approx(s_expected, abs=1e-9)
        assert out.z == pytest.approx(out.d - g, abs=1e-12)
        assert out.surplus == pytest.approx(utility_value(U, out.d) - out.bill, abs=1e-12)

    def test_matches_grid_oracle(self):
        rng = random.Random(42)
        for _ in range(120):
            g = rng.uniform(0, 8)
            c_inj = rng.choice([math.inf, rng.uniform(0, 3)])
            c_wd = rng.choice([math.inf, rng.uniform(0, 3)])
            access = PoAAccess(c_inj, c_wd)
            p = prosumer()
            lo = max(p.d_min, g - access.c_inj)
            hi = min(p.d_max, g + access.c_wd)
            if lo > hi:
                continue
            _, best = golden_max(
                lambda d: utility_value(U, d) - nem_bill(TARIFF, d - g), lo, hi, grid_step=1e-4
            )
            out = active_surplus(p, TARIFF, access, g)
            assert out.surplus == pytest.approx(best, abs=1e-6)

    def test_monotone_in_g(self):
        prev_d, prev_s = -1.0, -math.inf
        for g in [0.1 * k for k in range(0, 80)]:
            out = active_surplus(prosumer(), TARIFF, AMPLE, g)
            assert out.d >= prev_d - 1e-12
            assert out.surplus >= prev_s - 1e-12
            prev_d, prev_s = out.d, out.surplus


class TestPassiveSurplus:
    @pytest.mark.parametrize(
        "g,d_expected,s_expected",
        [(0.0, 1.0, 0.05), (2.0, 1.0, 0.40), (1.0, 1.0, 0.35)],
    )
    def test_examples(self, g, d_expected, s_expected):
        out = passive_surplus(prosumer(behavior=Behavior.PASSIVE), TARIFF, AMPLE, g)
        assert out.d == pytest.approx(d_expected, abs=1e-9)
        assert out.surplus == pytest.approx(s_expected, abs=1e-9)

    def test_active_dominates_passive(self):
        rng = random.Random(3)
        checked = 0
        while checked < 200:
            g = rng.uniform(0, 8)
            access = PoAAccess(rng.choice([math.inf, rng.uniform(0.5, 3)]), rng.choice([math.inf, rng.uniform(0.5, 3)]))
            try:
                s_a = active_surplus(prosumer(), TARIFF, access, g).surplus
            except FeasibilityError:
                continue
            checked += 1
            s_p = passive_surplus(prosumer(), TARIFF, access, g).surplus
            assert s_a >= s_p - 1e-12

    def test_zero_access_forces_island(self):
        out_a = active_surplus(prosumer(), TARIFF, PoAAccess(0.0, 0.0), 2.0)
        out_p = passive_surplus(prosumer(), TARIFF, PoAAccess(0.0, 0.0), 2.0)
        assert out_a.d == pytest.approx(2.0)
        assert out_p.d == pytest.approx(2.0)


class TestBenchmarkK:
    def test_passive_zeta_one(self):
        cfg = CompetitiveConfig(zeta=1.0, mode=BenchmarkMode.NEM_PASSIVE)
        k = benchmark_k(cfg, prosumer(behavior=Behavior.PASSIVE), TARIFF, AMPLE, 0.0)
        assert k == pytest.approx(0.05, abs=1e-9)

    def test_passive_markup(self):
        cfg = CompetitiveConfig(zeta=1.05, mode=BenchmarkMode.NEM_PASSIVE)
        k = benchmark_k(cfg, prosumer(behavior=Behavior.PASSIVE), TARIFF, AMPLE, 2.0)
        assert k == pytest.approx(0.42, abs=1e-9)

    def test_fixed_mode(self):
        cfg = CompetitiveConfig(zeta=1.0, mode=BenchmarkMode.FIXED, fixed_k=0.0)
        assert benchmark_k(cfg, prosumer(), TARIFF, AMPLE, 3.0) == 0.0

    def test_negative_k_flagged(self):
        tariff = NemTariff(0.3, 0.05, pi_zero=1.0)
        cfg = CompetitiveConfig(zeta=1.0, mode=BenchmarkMode.NEM_PASSIVE)
        with pytest.warns(RuntimeWarning):
            k = benchmark_k(cfg, prosumer(behavior=Behavior.PASSIVE), tariff, AMPLE, 0.0)
        assert k < 0

    def test_zeta_below_one_rejected(self):
        with pytest.raises(ValueError):
            CompetitiveConfig(zeta=0.99)
