"""The numpy batch formulas must agree with the scalar operations exactly;
the scalar side is what the oracles certify, so this lockstep check is what
lets the sweeps trust the vector engine.
"""
import math
import random

import numpy as np
import pytest

from derasim import _vector as vec
from derasim import (
    Behavior,
    NemTariff,
    PoAAccess,
    Prosumer,
    QuadraticUtility,
    active_surplus,
    clamp_f,
    inverse_marginal,
    marginal_utility,
    nem_surplus,
    optimal_schedule,
    passive_surplus,
    s_no,
    utility_value,
)

RNG = random.Random(12021)


def random_case():
    alpha = RNG.uniform(0.1, 1.0)
    beta = RNG.uniform(0.01, 0.5)
    d_min = RNG.uniform(0.0, 1.0)
    d_max = d_min + RNG.uniform(0.5, 8.0)
    c_inj = RNG.choice([math.inf, RNG.uniform(0.0, 4.0)])
    c_wd = RNG.choice([math.inf, RNG.uniform(0.0, 4.0)])
    g = RNG.uniform(0.0, 8.0)
    pi = RNG.uniform(0.0, 0.35)
    if max(d_min, g - c_inj) > min(d_max, g + c_wd):
        return None
    return alpha, beta, d_min, d_max, c_inj, c_wd, g, pi


def cases(n=400):
    out = []
    while len(out) < n:
        c = random_case()
        if c is not None:
            out.append(c)
    return out


ALL = cases()


@pytest.mark.parametrize("fn_name", ["u_val", "inv_marginal", "clamp", "d_star", "s_active", "s_passive", "s_no"])
def test_vector_matches_scalar(fn_name):
    for alpha, beta, d_min, d_max, c_inj, c_wd, g, pi in ALL:
        u = QuadraticUtility(alpha, beta)
        p = Prosumer("p", 0, u, d_min, d_max, Behavior.ACTIVE)
        access = PoAAccess(c_inj, c_wd)
        pi_plus = max(0.3, pi)
        tariff = NemTariff(pi_plus, pi, 0.0)
        if fn_name == "u_val":
            got = float(vec.u_val(alpha, beta, np.array([g]))[0])
            want = utility_value(u, g)
        elif fn_name == "inv_marginal":
            got = float(vec.inv_marginal(alpha, beta, np.array([pi]))[0])
            want = inverse_marginal(u, pi)
        elif fn_name == "clamp":
            got = float(vec.clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, np.array([g]), pi)[0])
            want = clamp_f(p, access, g, pi)
        elif fn_name == "d_star":
            got = float(vec.d_star(alpha, beta, d_min, d_max, c_inj, c_wd, np.array([g]), pi)[0])
            want = optimal_schedule(p, access, g, pi, 0.0)[0]
        elif fn_name == "s_active":
            got = float(
                vec.s_nem_active(alpha, beta, d_min, d_max, c_inj, c_wd, np.array([g]), pi_plus, pi, 0.0)[0]
            )
            want = active_surplus(p, tariff, access, g).surplus
        elif fn_name == "s_passive":
            got = float(
                vec.s_nem_passive(alpha, beta, d_min, d_max, c_inj, c_wd, np.array([g]), pi_plus, pi, 0.0)[0]
            )
            want = passive_surplus(p, tariff, access, g).surplus
        else:
            got = float(vec.s_no(alpha, beta, d_min, d_max, c_inj, c_wd, np.array([g]), pi_plus)[0])
            want = s_no(p, tariff, access, g)
        assert got == pytest.approx(want, abs=1e-10), (fn_name, alpha, beta, d_min, d_max, c_inj, c_wd, g, pi)


def test_marginal_consistency():
    for alpha, beta, _, _, _, _, g, _ in ALL[:100]:
        u = QuadraticUtility(alpha, beta)
        v = max(0.0, alpha - beta * g) if g < u.saturation else 0.0
        assert marginal_utility(u, g) == pytest.approx(v, abs=1e-15)


def test_nem_surplus_dispatch():
    u = QuadraticUtility(0.4, 0.1)
    t = NemTariff(0.3, 0.05, 0.0)
    active = Prosumer("a", 0, u, 0.0, 4.0, Behavior.ACTIVE)
    passive = Prosumer("p", 0, u, 0.0, 4.0, Behavior.PASSIVE)
    amp = PoAAccess.unlimited()
    assert nem_surplus(active, t, amp, 2.0).surplus == pytest.approx(0.6)
    assert nem_surplus(passive, t, amp, 2.0).surplus == pytest.approx(0.4)
