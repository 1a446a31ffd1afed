"""Aggregator benefit of distribution-network access: per-scenario profit
decomposition, Monte Carlo benefit curves, and the marginal bid curve.

The per-scenario profit splits into a withdrawal-access term, an
injection-access term, and an access-independent term; at most one of the two
access terms is nonzero, and the three always sum (minus the benchmark K) to
the aggregator's optimal profit.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _vector as vec
from .aggregation import BenchmarkMode, CompetitiveConfig, optimal_schedule
from .errors import FeasibilityError
from .nem import NemTariff
from .prosumer import PoAAccess, Prosumer, inverse_marginal, utility_value
from .scenario import ScenarioSet


class AccessAxis(Enum):
    INJECTION = "injection"
    WITHDRAWAL = "withdrawal"


class BenefitBranch(Enum):
    WITHDRAWAL = "withdrawal"
    INJECTION = "injection"
    INTERIOR = "interior"


@dataclass(frozen=True)
class BenefitSample:
    """One prosumer-scenario term of the profit decomposition."""

    q_plus: float
    q_minus: float
    phi_wd: float
    phi_inj: float
    h: float
    k: float
    branch: BenefitBranch

    @property
    def contribution(self) -> float:
        return self.phi_wd + self.phi_inj + self.h - self.k


@dataclass(frozen=True)
class BenefitCurve:
    """Expected benefit on an access grid, with Monte Carlo error bars."""

    axis: AccessAxis
    grid: tuple[float, ...]
    phi: tuple[float, ...]
    phi_stderr: tuple[float, ...]
    mc_count: int
    seed: int


def benefit_sample(p: Prosumer, a: PoAAccess, g: float, pi: float, k: float) -> BenefitSample:
    """Decompose one scenario's optimal profit by which access side binds.

    The interior term is evaluated at the scheduled consumption (not the raw
    price response), so the decomposition identity holds even when the price
    response falls outside the consumption box.
    """
    lo = max(p.d_min, g - a.c_inj)
    hi = min(p.d_max, g + a.c_wd)
    if lo > hi:
        raise FeasibilityError(
            f"infeasible consumption box for prosumer {p.id}: lower bound {lo} exceeds upper bound {hi}"
        )
    v_inv = inverse_marginal(p.utility, pi)
    q_minus = a.c_inj + max(v_inv, p.d_min)
    q_plus = -a.c_wd + min(v_inv, p.d_max)
    phi_wd = phi_inj = h = 0.0
    if g <= q_plus:
        branch = BenefitBranch.WITHDRAWAL
        phi_wd = utility_value(p.utility, g + a.c_wd) - pi * a.c_wd
    elif g >= q_minus:
        branch = BenefitBranch.INJECTION
        phi_inj = utility_value(p.utility, g - a.c_inj) + pi * a.c_inj
    else:
        branch = BenefitBranch.INTERIOR
        d, _ = optimal_schedule(p, a, g, pi, k=0.0)
        h = utility_value(p.utility, d) - pi * (d - g)
    return BenefitSample(
        q_plus=q_plus, q_minus=q_minus, phi_wd=phi_wd, phi_inj=phi_inj, h=h, k=k, branch=branch
    )


def _benchmark_vector(
    cfg: CompetitiveConfig,
    alpha, beta, d_min, d_max, c_inj, c_wd,
    g: np.ndarray,
    pi: np.ndarray,
    tariff: NemTariff,
) -> np.ndarray:
    """Per-scenario, per-prosumer benchmark K under the configured mode.

    The tariff sell rate follows the sampled wholesale price, matching the
    experiment convention pi_minus = pi_lmp.
    """
    if cfg.mode is BenchmarkMode.FIXED:
        return np.full(np.broadcast_shapes(np.shape(g), np.shape(pi)), cfg.fixed_k)
    if cfg.mode is BenchmarkMode.NEM_ACTIVE:
        base = vec.s_nem_active(alpha, beta, d_min, d_max, c_inj, c_wd, g, tariff.pi_plus, pi, tariff.pi_zero)
    elif cfg.mode is BenchmarkMode.NEM_PASSIVE:
        base = vec.s_nem_passive(alpha, beta, d_min, d_max, c_inj, c_wd, g, tariff.pi_plus, pi, tariff.pi_zero)
    else:
        base = vec.s_no(alpha, beta, d_min, d_max, c_inj, c_wd, g, tariff.pi_plus)
    return cfg.zeta * base


def benefit_curve(
    prosumers: Sequence[Prosumer],
    scenarios: ScenarioSet,
    axis: AccessAxis,
    grid: Sequence[float],
    tariff: NemTariff,
    competitive: CompetitiveConfig,
    other_limit: float | None = None,
) -> BenefitCurve:
    """Expected fleet benefit at each access level on ``grid``.

    The swept limit applies per prosumer. By default both sides share the
    swept value (the access-ratio convention; the benefit stays additively
    separable across sides, and ``axis`` records which side the curve is
    about); pass ``other_limit`` to pin the opposite side instead. Common
    random numbers (one scenario set for all grid points) keep the curve
    monotone sample-wise. The benchmark K is recomputed per scenario from
    the DG and price draws, but at the utility's own (unlimited) network
    access: the outside option does not shrink with the bid being priced,
    and a fixed K is what makes the benefit monotone in access.
    """
    if scenarios.count < 1:
        raise ValueError("scenario set is empty")
    grid = [float(c) for c in grid]
    if sorted(grid) != grid:
        raise ValueError("access grid must be sorted ascending")
    alpha = np.array([p.utility.alpha for p in prosumers])
    beta = np.array([p.utility.beta for p in prosumers])
    d_min = np.array([p.d_min for p in prosumers])
    d_max = np.array([p.d_max for p in prosumers])
    g = scenarios.dg
    pi = scenarios.lmp[:, None]
    ks = _benchmark_vector(competitive, alpha, beta, d_min, d_max, np.inf, np.inf, g, pi, tariff)
    phi_means, phi_errs = [], []
    for c in grid:
        other = c if other_limit is None else other_limit
        c_inj, c_wd = (c, other) if axis is AccessAxis.INJECTION else (other, c)
        lo = np.maximum(d_min, g - c_inj)
        hi = np.minimum(d_max, g + c_wd)
        if np.any(lo > hi):
            raise FeasibilityError(
                f"infeasible consumption box at access level {c} for at least one prosumer-scenario"
            )
        d = vec.d_star(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi)
        profit = (vec.u_val(alpha, beta, d) - pi * (d - g) - ks).sum(axis=1)
        phi_means.append(float(profit.mean()))
        phi_errs.append(float(profit.std(ddof=1) / np.sqrt(scenarios.count)) if scenarios.count > 1 else 0.0)
    return BenefitCurve(
        axis=axis,
        grid=tuple(grid),
        phi=tuple(phi_means),
        phi_stderr=tuple(phi_errs),
        mc_count=scenarios.count,
        seed=scenarios.seed,
    )


def _isotonic_nonincreasing(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted pool-adjacent-violators fit, constrained nonincreasing."""
    vals, weights, sizes = [], [], []
    for yi, wi in zip(-y, w):
        vals.append(yi)
        weights.append(wi)
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, w2, s2 = vals.pop(), weights.pop(), sizes.pop()
            v1, w1, s1 = vals.pop(), weights.pop(), sizes.pop()
            vals.append((v1 * w1 + v2 * w2) / (w1 + w2))
            weights.append(w1 + w2)
            sizes.append(s1 + s2)
    out = np.concatenate([np.full(s, v) for v, s in zip(vals, sizes)])
    return -out


def access_bid(curve: BenefitCurve) -> list[tuple[float, float]]:
    """Marginal bid curve: forward differences of the benefit, made monotone.

    The isotonic cleanup only touches the exported bid; stored benefit values
    stay raw. Returns (access kWh, marginal $/kWh) pairs, one per grid step.
    """
    if len(curve.grid) < 2:
        raise ValueError("need at least two grid points to form a bid curve")
    c = np.asarray(curve.grid)
    phi = np.asarray(curve.phi)
    dc = np.diff(c)
    if np.any(dc <= 0):
        raise ValueError("degenerate access grid: repeated points")
    marginal = np.diff(phi) / dc
    repaired = _isotonic_nonincreasing(marginal, dc)
    return [(float(ci), float(mi)) for ci, mi in zip(c[1:], repaired)]
