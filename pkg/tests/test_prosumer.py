import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from derasim import (
    Behavior,
    PoAAccess,
    Prosumer,
    QuadraticUtility,
    inverse_demand,
    inverse_marginal,
    load_population,
    marginal_utility,
    utility_value,
)

U = QuadraticUtility(alpha=0.4, beta=0.1)


def make_prosumer(d_min=0.0, d_max=4.0):
    return Prosumer("p", 0, U, d_min, d_max, Behavior.ACTIVE)


class TestUtilityValue:
    def test_zero(self):
        assert utility_value(U, 0.0) == 0.0

    def test_interior(self):
        assert utility_value(U, 3.5) == pytest.approx(0.7875, abs=1e-12)

    def test_saturated(self):
        assert utility_value(U, 5.0) == pytest.approx(0.8, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            utility_value(U, -0.1)


class TestMarginalUtility:
    def test_at_zero(self):
        assert marginal_utility(U, 0.0) == pytest.approx(0.4)

    def test_interior(self):
        assert marginal_utility(U, 2.0) == pytest.approx(0.2)

    def test_saturated(self):
        assert marginal_utility(U, 6.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            marginal_utility(U, -1e-9)


class TestInverseMarginal:
    def test_interior(self):
        assert inverse_marginal(U, 0.05) == pytest.approx(3.5)
        assert inverse_marginal(U, 0.3) == pytest.approx(1.0)

    def test_price_at_alpha(self):
        assert inverse_marginal(U, 0.4) == 0.0

    def test_negative_price_rejected(self):
        with pytest.raises(ValueError):
            inverse_marginal(U, -0.01)


class TestInverseDemand:
    def test_unclamped(self):
        assert inverse_demand(make_prosumer(0.0, 4.0), 0.05) == pytest.approx(3.5)

    def test_lower_clamp(self):
        assert inverse_demand(make_prosumer(2.0, 4.0), 0.4) == pytest.approx(2.0)

    def test_upper_clamp(self):
        assert inverse_demand(make_prosumer(0.0, 3.0), 0.0) == pytest.approx(3.0)


utilities = st.builds(
    QuadraticUtility,
    alpha=st.floats(0.1, 1.0),
    beta=st.floats(0.01, 0.5),
)


@given(u=utilities, x=st.floats(0.0, 20.0))
@settings(max_examples=80)
def test_inverse_composes_with_marginal(u, x):
    if x >= u.saturation - 1e-9:
        return
    pi = marginal_utility(u, x)
    assert inverse_marginal(u, pi) == pytest.approx(x, abs=1e-9)


@given(u=utilities, p1=st.floats(0.0, 1.2), p2=st.floats(0.0, 1.2))
@settings(max_examples=80)
def test_inverse_demand_nonincreasing(u, p1, p2):
    p = Prosumer("p", 0, u, 0.5, 6.0)
    lo_pi, hi_pi = min(p1, p2), max(p1, p2)
    assert inverse_demand(p, lo_pi) >= inverse_demand(p, hi_pi) - 1e-12


@given(
    u=utilities,
    x1=st.floats(0.0, 15.0),
    x2=st.floats(0.0, 15.0),
    t=st.floats(0.0, 1.0),
)
@settings(max_examples=120)
def test_utility_concave(u, x1, x2, t):
    mid = t * x1 + (1 - t) * x2
    lhs = utility_value(u, mid)
    rhs = t * utility_value(u, x1) + (1 - t) * utility_value(u, x2)
    assert lhs >= rhs - 1e-12


@given(u=utilities, x=st.floats(0.001, 15.0))
@settings(max_examples=80)
def test_marginal_matches_finite_difference(u, x):
    h = 1e-4
    if abs(x - u.saturation) < 10 * h:  # kink
        return
    if x < h:
        return
    fd = (utility_value(u, x + h) - utility_value(u, x - h)) / (2 * h)
    assert marginal_utility(u, x) == pytest.approx(fd, abs=1e-6)


class TestTypes:
    def test_utility_invariants(self):
        with pytest.raises(ValueError):
            QuadraticUtility(0.0, 0.1)
        with pytest.raises(ValueError):
            QuadraticUtility(0.4, -0.1)

    def test_prosumer_box(self):
        with pytest.raises(ValueError):
            Prosumer("p", 0, U, 3.0, 2.0)
        with pytest.raises(ValueError):
            Prosumer("p", 0, U, -1.0, 2.0)

    def test_access_nonnegative(self):
        with pytest.raises(ValueError):
            PoAAccess(-1.0, 0.0)
        a = PoAAccess.unlimited()
        assert math.isinf(a.c_inj) and math.isinf(a.c_wd)


def test_load_population(tmp_path):
    doc = [
        {"id": "a", "poa": 0, "alpha": 0.4, "beta": 0.1, "d_min": 0, "d_max": 4,
         "behavior": "active", "c_inj": 1.5, "c_wd": None},
        {"id": "b", "poa": 1, "alpha": 0.5, "beta": 0.2, "d_min": 0, "d_max": 3,
         "behavior": "passive", "c_inj": None, "c_wd": 2.0},
    ]
    path = tmp_path / "pop.json"
    path.write_text(json.dumps(doc))
    prosumers, accesses = load_population(path)
    assert prosumers[0].behavior is Behavior.ACTIVE
    assert accesses[0].c_inj == 1.5 and math.isinf(accesses[0].c_wd)
    assert math.isinf(accesses[1].c_inj) and accesses[1].c_wd == 2.0
    assert prosumers[1].utility.alpha == 0.5
