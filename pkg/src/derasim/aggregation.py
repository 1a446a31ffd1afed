"""Competitive aggregation: closed-form schedules and payments, profitability
diagnostics, and the multi-device single-PoA scheduling variant.

The aggregator maximizes its profit subject to leaving each customer at least
its benchmark surplus K. The optimum consumes at the price response clipped by
the access window and pays omega = U(d*) - K, so the surplus floor binds
exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import AssumptionError, FeasibilityError
from .nem import NemTariff, nem_surplus
from .prosumer import PoAAccess, Prosumer, QuadraticUtility, inverse_demand, utility_value

XI_QUANTITY_TOL = 1e-12
_XI_MAX_ITER = 200


class BenchmarkMode(Enum):
    """Which competitor's surplus sets the per-customer floor."""

    NEM_ACTIVE = "nem_active"
    NEM_PASSIVE = "nem_passive"
    GAB = "gab"
    FIXED = "fixed"


@dataclass(frozen=True)
class CompetitiveConfig:
    """Benchmark selection and the zeta >= 1 markup applied to it."""

    zeta: float
    mode: BenchmarkMode = BenchmarkMode.NEM_PASSIVE
    fixed_k: float = 0.0

    def __post_init__(self):
        if self.zeta < 1:
            raise ValueError(f"zeta must be >= 1, got {self.zeta}")


@dataclass(frozen=True)
class AggregationOutcome:
    """Fleet-level schedule: per-prosumer consumption, payments, and splits."""

    d_star: tuple[float, ...]
    omega: tuple[float, ...]
    k: tuple[float, ...]
    dera_profit: float
    prosumer_surplus: tuple[float, ...]
    avg_cost: tuple[float | None, ...]


class BindingSide(Enum):
    WITHDRAWAL = "withdrawal"
    INJECTION = "injection"
    NONE = "none"


@dataclass(frozen=True)
class Device:
    """One schedulable load of a multi-device customer."""

    utility: QuadraticUtility
    d_min: float
    d_max: float

    def __post_init__(self):
        if not (0 <= self.d_min <= self.d_max):
            raise ValueError(f"need 0 <= d_min <= d_max, got [{self.d_min}, {self.d_max}]")


@dataclass(frozen=True)
class PoaOutcome:
    """Device schedules at one point of aggregation plus the equalizing price."""

    d_star: tuple[tuple[float, ...], ...]
    omega: tuple[float, ...]
    shadow_price: float
    binding: BindingSide


def _check_box(p: Prosumer, a: PoAAccess, g: float) -> None:
    lo = max(p.d_min, g - a.c_inj)
    hi = min(p.d_max, g + a.c_wd)
    if lo > hi:
        raise FeasibilityError(
            f"infeasible consumption box for prosumer {p.id}: lower bound {lo} exceeds upper bound {hi}"
        )


def optimal_schedule(p: Prosumer, a: PoAAccess, g: float, pi: float, k: float) -> tuple[float, float]:
    """Profit-maximizing consumption and payment for one customer.

    Returns (d_star, omega_star) with
    d* = min(g + c_wd, max(d_hat(pi), g - c_inj)) and omega* = U(d*) - k.
    """
    _check_box(p, a, g)
    d_hat = inverse_demand(p, pi)
    d_star = min(g + a.c_wd, max(d_hat, g - a.c_inj))
    omega_star = utility_value(p.utility, d_star) - k
    return d_star, omega_star


def dera_profit(outcome: AggregationOutcome, g: Sequence[float], pi: float) -> float:
    """Aggregator profit: payments collected minus wholesale settlement."""
    return sum(w - pi * (d - gn) for w, d, gn in zip(outcome.omega, outcome.d_star, g))


def aggregate_fleet(
    prosumers: Sequence[Prosumer],
    accesses: Sequence[PoAAccess],
    g: Sequence[float],
    pi: float,
    ks: Sequence[float],
) -> AggregationOutcome:
    """Schedule a whole fleet at one price and assemble the outcome record."""
    d_star, omega, surplus, cost = [], [], [], []
    for p, a, gn, kn in zip(prosumers, accesses, g, ks):
        d, w = optimal_schedule(p, a, gn, pi, kn)
        d_star.append(d)
        omega.append(w)
        surplus.append(utility_value(p.utility, d) - w)
        cost.append(w / d if d > 0 else None)
    profit = sum(w - pi * (d - gn) for w, d, gn in zip(omega, d_star, g))
    return AggregationOutcome(
        d_star=tuple(d_star),
        omega=tuple(omega),
        k=tuple(ks),
        dera_profit=profit,
        prosumer_surplus=tuple(surplus),
        avg_cost=tuple(cost),
    )


def avg_cost(omega_star: float, d_star: float) -> float | None:
    """Average cost of consumption omega/d; None when nothing is consumed."""
    if d_star <= 0:
        return None
    return omega_star / d_star


def zeta_bar(p: Prosumer, t: NemTariff, a: PoAAccess, g: float, pi: float) -> float:
    """Largest markup on the tariff benchmark that keeps this customer profitable.

    Defined as (U(d*) - pi*(d* - g)) / S_nem, or 1 when the benchmark surplus
    is exactly zero. Requires the tariff sell rate to equal the wholesale
    price and a nonnegative benchmark surplus.
    """
    if not math.isclose(t.pi_minus, pi, rel_tol=0.0, abs_tol=1e-12):
        raise AssumptionError(f"zeta_bar requires pi_minus == pi_lmp, got {t.pi_minus} vs {pi}")
    s_nem = nem_surplus(p, t, a, g).surplus
    if s_nem < 0:
        raise AssumptionError(f"zeta_bar requires a nonnegative benchmark surplus, got {s_nem}")
    d_star, _ = optimal_schedule(p, a, g, pi, k=0.0)
    value = utility_value(p.utility, d_star) - pi * (d_star - g)
    if s_nem == 0:
        return 1.0
    return value / s_nem


def zeta_bar_fleet(
    prosumers: Sequence[Prosumer],
    t: NemTariff,
    accesses: Sequence[PoAAccess],
    g: Sequence[float],
    pi: float,
) -> float:
    """Fleet-wide profitability bound: the minimum of the per-customer bounds."""
    return min(zeta_bar(p, t, a, gn, pi) for p, a, gn in zip(prosumers, accesses, g))


def _device_response(dev: Device, x: float) -> float:
    """Consumption of one device at shadow price x.

    Linear in x between the box corners; extends below zero price so that
    forced consumption past the utility plateau still has a well-defined
    equalizing price.
    """
    u = dev.utility
    raw = (u.alpha - x) / u.beta
    return min(dev.d_max, max(raw, dev.d_min))


def poa_schedule(
    prosumers: Sequence[Sequence[Device]],
    poa_access: PoAAccess,
    g: Sequence[float],
    pi: float,
    ks: Sequence[float],
) -> PoaOutcome:
    """Device-level schedule for several customers sharing one access window.

    All devices are scheduled at a single shadow price: the wholesale price
    when the aggregate flow is interior, otherwise the price that lands the
    fleet exactly on the binding side of the window, found by bisection on
    the monotone aggregate response.
    """
    total_g = float(sum(g))
    sum_dmin = sum(d.d_min for fleet in prosumers for d in fleet)
    sum_dmax = sum(d.d_max for fleet in prosumers for d in fleet)
    if sum_dmin - total_g > poa_access.c_wd + 1e-12:
        raise FeasibilityError(
            f"aggregate infeasibility: minimum fleet withdrawal {sum_dmin - total_g} exceeds c_wd={poa_access.c_wd}"
        )
    if total_g - sum_dmax > poa_access.c_inj + 1e-12:
        raise FeasibilityError(
            f"aggregate infeasibility: minimum fleet injection {total_g - sum_dmax} exceeds c_inj={poa_access.c_inj}"
        )

    devices = [d for fleet in prosumers for d in fleet]

    def aggregate(x: float) -> float:
        return sum(_device_response(d, x) for d in devices)

    def solve(target: float, lo: float, hi: float) -> float:
        # aggregate() is continuous and nonincreasing; the caller guarantees
        # aggregate(lo) >= target >= aggregate(hi). The stop criterion is on
        # the scheduled quantity so the access-flow bound holds to ~1e-12.
        if not (aggregate(lo) >= target - 1e-9 and aggregate(hi) <= target + 1e-9):
            raise RuntimeError(f"shadow-price bisection bracket failure on [{lo}, {hi}] for target {target}")
        xi = 0.5 * (lo + hi)
        for _ in range(_XI_MAX_ITER):
            val = aggregate(xi)
            if abs(val - target) <= XI_QUANTITY_TOL * max(1.0, abs(target)):
                return xi
            if val >= target:
                lo = xi
            else:
                hi = xi
            if hi - lo <= 1e-16 * max(1.0, abs(hi)):
                break
            xi = 0.5 * (lo + hi)
        return xi

    at_pi = aggregate(pi)
    price_cap = max(d.utility.alpha for d in devices)
    price_floor = min(d.utility.alpha - d.utility.beta * d.d_max for d in devices)
    if math.isfinite(poa_access.c_wd) and at_pi >= total_g + poa_access.c_wd:
        shadow = solve(total_g + poa_access.c_wd, lo=pi, hi=max(price_cap, pi))
        binding = BindingSide.WITHDRAWAL
    elif math.isfinite(poa_access.c_inj) and at_pi <= total_g - poa_access.c_inj:
        shadow = solve(total_g - poa_access.c_inj, lo=min(price_floor, 0.0), hi=pi)
        binding = BindingSide.INJECTION
    else:
        shadow = pi
        binding = BindingSide.NONE

    d_star = tuple(tuple(_device_response(d, shadow) for d in fleet) for fleet in prosumers)
    omega = tuple(
        sum(utility_value(d.utility, v) for d, v in zip(fleet, vals)) - kn
        for fleet, vals, kn in zip(prosumers, d_star, ks)
    )
    return PoaOutcome(d_star=d_star, omega=omega, shadow_price=shadow, binding=binding)
