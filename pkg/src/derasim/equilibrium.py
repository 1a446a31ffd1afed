"""Long-run competitive equilibrium of homogeneous aggregators buying network
access from a DSO with quadratic cost.

The single-interval case has a closed form for the access allocation and the
surviving firm count; the multi-interval case finds the largest firm count
whose expected 24-hour profit, net of access payments at market-clearing
prices, stays nonnegative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from . import _vector as vec
from .nem import NemTariff
from .scenario import SolarTrace, TruncGaussSpec, sample_trunc_gauss, substream_seed


@dataclass(frozen=True)
class EquilibriumParams:
    """One aggregator's fleet and the DSO's access-cost coefficients."""

    n_prosumers: int
    alpha: float
    beta: float
    g_total: float
    k_total: float
    dso_a: float
    dso_b: float
    initial_deras: int = 200

    def __post_init__(self):
        if self.n_prosumers < 1:
            raise ValueError(f"need at least one prosumer, got {self.n_prosumers}")
        if self.dso_a <= 0 or self.dso_b <= 0:
            raise ValueError(f"DSO cost coefficients must be positive, got a={self.dso_a}, b={self.dso_b}")


@dataclass(frozen=True)
class EquilibriumOutcome:
    """Closed-form access allocation c_star and fractional firm count k_star."""

    c_star: float
    k_star: float
    gamma: float
    psi: float
    exists: bool
    reason: str
    survivors: int


def fleet_profit(params: EquilibriumParams, c: float, pi_lmp: float) -> float:
    """Aggregator profit when the fleet consumes its DG plus c of withdrawal.

    Quadratic form of the fleet schedule at equal per-prosumer consumption
    (c + G) / N, minus the wholesale settlement and the benchmark total.
    """
    n, g = params.n_prosumers, params.g_total
    return (
        -params.beta * (c + g) ** 2 / (2 * n)
        + params.alpha * (c + g)
        - pi_lmp * c
        - params.k_total
    )


def _marginal_benefit(params: EquilibriumParams, c: float, pi_lmp: float) -> float:
    return params.alpha - pi_lmp - params.beta / params.n_prosumers * (c + params.g_total)


def single_interval_equilibrium(params: EquilibriumParams) -> EquilibriumOutcome:
    """Closed-form long-run equilibrium on the withdrawal side.

    c_star = sqrt(gamma/psi) with gamma = alpha*G - beta*G^2/(2N) - K and
    psi = -beta/(2N); the firm count follows from the access-market clearing
    relation 2*a*K*c = 2*psi*c + beta - b. The equilibrium exists when gamma
    is negative (real allocation) and the clearing numerator is nonnegative
    (nonnegative firm count).
    """
    n = params.n_prosumers
    gamma = params.alpha * params.g_total - 0.5 * params.beta * params.g_total**2 / n - params.k_total
    psi = -params.beta / (2 * n)
    if gamma >= 0:
        return EquilibriumOutcome(
            c_star=math.nan,
            k_star=math.nan,
            gamma=gamma,
            psi=psi,
            exists=False,
            reason=f"gamma={gamma:.6g} >= 0: no real access allocation",
            survivors=0,
        )
    c_star = math.sqrt(gamma / psi)
    numerator = 2 * psi * c_star + params.beta - params.dso_b
    k_star = numerator / (2 * params.dso_a * c_star)
    exists = numerator >= 0
    reason = "" if exists else f"clearing numerator {numerator:.6g} < 0: firm count would be negative"
    survivors = int(min(max(math.floor(k_star), 0), params.initial_deras))
    return EquilibriumOutcome(
        c_star=c_star, k_star=k_star, gamma=gamma, psi=psi, exists=exists, reason=reason, survivors=survivors
    )


def verify_conditions(
    outcome: EquilibriumOutcome, params: EquilibriumParams, pi_lmp: float
) -> tuple[float, float] | None:
    """Residuals of the two equilibrium conditions at the closed-form point.

    Returns (marginal_residual, profit_residual) or None when no equilibrium
    exists. The profit residual is the zero-profit condition with the access
    price at the aggregator's marginal benefit; the wholesale price cancels
    inside it, which is why the equilibrium is price-invariant. The marginal
    residual is the access-market clearing relation tying the firm count to
    the allocation.
    """
    if not outcome.exists:
        return None
    c, k = outcome.c_star, outcome.k_star
    marginal_residual = 2 * params.dso_a * k * c - (2 * outcome.psi * c + params.beta - params.dso_b)
    lam = _marginal_benefit(params, c, pi_lmp)
    profit_residual = fleet_profit(params, c, pi_lmp) - lam * c
    return marginal_residual, profit_residual


def newton_equilibrium(
    params: EquilibriumParams, pi_lmp: float, x0: tuple[float, float] | None = None
) -> tuple[float, float]:
    """Numeric root of the two equilibrium conditions, for cross-checking.

    Solves the zero-profit condition for the allocation and the clearing
    relation for the firm count with a Newton-type root finder.
    """
    if x0 is None:
        x0 = (1.0, 1.0)

    def system(x):
        c, k = x
        lam = _marginal_benefit(params, c, pi_lmp)
        return [
            fleet_profit(params, c, pi_lmp) - lam * c,
            2 * params.dso_a * k * c - (-params.beta / params.n_prosumers * c + params.beta - params.dso_b),
        ]

    root = optimize.fsolve(system, x0, full_output=False)
    return float(abs(root[0])), float(root[1])


def market_firm_count(params: EquilibriumParams, pi_lmp: float) -> float:
    """Firm count implied by pricing access at the DSO's marginal cost.

    Uses the textbook pair: the access price equals both the aggregator's
    marginal benefit at c_star and the DSO marginal cost b*P + a with total
    access P = K * c_star. Unlike the closed-form k_star, this count moves
    with the wholesale price; the multi-interval solver reduces to it when
    every hour looks the same.
    """
    out = single_interval_equilibrium(params)
    if math.isnan(out.c_star):
        raise ValueError("no real access allocation: gamma >= 0")
    lam = _marginal_benefit(params, out.c_star, pi_lmp)
    return (lam - params.dso_a) / (params.dso_b * out.c_star)


# ---------------------------------------------------------------------------
# Multi-interval equilibrium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HourBank:
    """Per-hour Monte Carlo draws shared across firm-count evaluations."""

    pi: np.ndarray
    g_total: np.ndarray
    k_total: np.ndarray


def hourly_scenarios(
    trace: SolarTrace,
    params: EquilibriumParams,
    eps1: float,
    scenarios: int,
    *,
    tariff: NemTariff,
    zeta: float,
    lmp_mean: float = 0.05,
    lmp_std: float = 0.01,
    dg_std: float = 0.2,
    seed: int = 20240901,
) -> list[HourBank]:
    """Draw (price, fleet DG, benchmark) scenarios for each of the 24 hours.

    The tariff sell rate follows the sampled wholesale price. Hours with a
    zero mean produce identically zero DG. Benchmarks use unlimited access:
    the outside-option customers ride the utility's own network.
    """
    if eps1 < 0 or scenarios < 1:
        raise ValueError(f"need eps1 >= 0 and scenarios >= 1, got {eps1}, {scenarios}")
    n = params.n_prosumers
    alpha, beta = params.alpha, params.beta
    lmp_spec = TruncGaussSpec(lmp_mean, lmp_std, 0.0, tariff.pi_plus)
    banks = []
    for hour in range(24):
        pi = sample_trunc_gauss(lmp_spec, scenarios, substream_seed(seed, "eq-lmp", hour))
        mean = eps1 * trace.hourly[hour]
        if mean == 0.0:
            g = np.zeros((scenarios, n))
        else:
            spec = TruncGaussSpec(mean, dg_std, 0.0, math.inf)
            g = sample_trunc_gauss(spec, scenarios * n, substream_seed(seed, "eq-dg", hour)).reshape(
                scenarios, n
            )
        s_bench = vec.s_nem_passive(
            alpha, beta, 0.0, np.inf, np.inf, np.inf, g, tariff.pi_plus, pi[:, None], tariff.pi_zero
        )
        banks.append(HourBank(pi=pi, g_total=g.sum(axis=1), k_total=zeta * s_bench.sum(axis=1)))
    return banks


def _clearing_access(mb, lo: float, hi: float, price_slope: float, price_floor: float) -> float:
    """Access bought when a decreasing marginal benefit meets an increasing price."""
    if mb(lo) <= price_slope * lo + price_floor:
        return lo
    if mb(hi) >= price_slope * hi + price_floor:
        return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mb(mid) >= price_slope * mid + price_floor:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _hour_access(bank: HourBank, params: EquilibriumParams, eps2: float, k: float) -> tuple[float, float]:
    """Withdrawal and injection access one firm buys in one hour's market."""
    n, alpha, beta = params.n_prosumers, params.alpha, params.beta
    a, b = eps2 * params.dso_a, eps2 * params.dso_b
    pi, g_tot = bank.pi, bank.g_total

    def mb_wd(c):
        return float(np.maximum(0.0, alpha - beta * (g_tot + c) / n - pi).mean())

    def mb_inj(c):
        v = np.maximum(0.0, alpha - beta * np.maximum(g_tot - c, 0.0) / n)
        return float(np.maximum(0.0, pi - v).mean())

    c_wd = _clearing_access(mb_wd, 0.0, n * alpha / beta, b * k, a)
    c_inj = _clearing_access(mb_inj, 0.0, float(g_tot.max(initial=0.0)), b * k, a)
    return c_wd, c_inj


def hourly_access_at_count(
    banks: Sequence[HourBank], params: EquilibriumParams, eps2: float, k: float
) -> tuple[list[float], list[float]]:
    """Per-hour access one firm buys when k firms compete (profile output)."""
    wd, inj = [], []
    for bank in banks:
        c_wd, c_inj = _hour_access(bank, params, eps2, k)
        wd.append(c_wd)
        inj.append(c_inj)
    return wd, inj


def expected_profit_at_count(banks: Sequence[HourBank], params: EquilibriumParams, eps2: float, k: float) -> float:
    """Expected 24-hour profit of one firm when k firms clear the access markets."""
    n, alpha, beta = params.n_prosumers, params.alpha, params.beta
    a, b = eps2 * params.dso_a, eps2 * params.dso_b
    total = 0.0
    for bank in banks:
        pi, g_tot, k_tot = bank.pi, bank.g_total, bank.k_total
        c_wd, c_inj = _hour_access(bank, params, eps2, k)
        d_hat = (alpha - pi) / beta
        d = np.minimum((g_tot + c_wd) / n, np.maximum(d_hat, (g_tot - c_inj) / n))
        value = n * vec.u_val(alpha, beta, d) - pi * (n * d - g_tot) - k_tot
        payment = c_wd * (b * k * c_wd + a) if c_wd > 0 else 0.0
        payment += c_inj * (b * k * c_inj + a) if c_inj > 0 else 0.0
        total += float(value.mean()) - payment
    return total


def multi_interval_survivors(
    trace: SolarTrace,
    params: EquilibriumParams,
    eps1: float,
    eps2: float,
    scenarios: int = 10_000,
    *,
    tariff: NemTariff | None = None,
    zeta: float = 1.01,
    seed: int = 20240901,
    k_tol: float = 0.01,
    banks: Sequence[HourBank] | None = None,
) -> int:
    """Surviving firm count over a 24-hour horizon with one count for all hours.

    Bisects for the largest firm count whose expected daily profit, after
    paying market-clearing prices for the hourly access it buys, is still
    nonnegative; the count is floored and capped at the initial population.
    """
    if len(trace.hourly) != 24:
        raise ValueError("trace must cover 24 hours")
    if eps2 < 0:
        raise ValueError(f"eps2 must be nonnegative, got {eps2}")
    if tariff is None:
        tariff = NemTariff(pi_plus=0.3, pi_minus=0.0, pi_zero=0.0)
    if banks is None:
        banks = hourly_scenarios(trace, params, eps1, scenarios, tariff=tariff, zeta=zeta, seed=seed)

    def profit(k: float) -> float:
        return expected_profit_at_count(banks, params, eps2, k)

    hi = float(params.initial_deras)
    if profit(hi) >= 0:
        return params.initial_deras
    lo = 0.0
    if profit(k_tol) < 0:
        return 0
    lo = k_tol
    while hi - lo > k_tol:
        mid = 0.5 * (lo + hi)
        if profit(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return int(min(math.floor(lo), params.initial_deras))
