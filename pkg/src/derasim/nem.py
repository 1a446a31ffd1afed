"""Net-energy-metering tariff billing and benchmark prosumer surpluses.

The tariff bills net consumption z = d - g at a retail rate when importing and
a sell rate when exporting, plus a fixed connection charge. The closed-form
active and passive surpluses computed here are the competitiveness benchmarks
(scaled by zeta) that the aggregation module must beat.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import FeasibilityError
from .prosumer import (
    Behavior,
    PoAAccess,
    Prosumer,
    inverse_marginal,
    utility_value,
)

if TYPE_CHECKING:  # pragma: no cover
    from .aggregation import CompetitiveConfig

MU_BISECTION_TOL = 1e-10
_MU_BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class NemTariff:
    """Retail tariff (pi_plus, pi_minus, pi_zero): buy rate, sell rate, connection charge."""

    pi_plus: float
    pi_minus: float
    pi_zero: float = 0.0

    def __post_init__(self):
        if not (0 <= self.pi_minus <= self.pi_plus):
            raise ValueError(f"need 0 <= pi_minus <= pi_plus, got ({self.pi_minus}, {self.pi_plus})")
        if self.pi_zero < 0:
            raise ValueError(f"connection charge must be nonnegative, got {self.pi_zero}")


@dataclass(frozen=True)
class NemOutcome:
    """Optimal consumption, surplus, net consumption, and bill under the tariff."""

    d: float
    surplus: float
    z: float
    bill: float


def nem_bill(t: NemTariff, z: float) -> float:
    """Bill for net consumption z: max(pi_plus*z, pi_minus*z) + pi_zero. Convex in z."""
    return max(t.pi_plus * z, t.pi_minus * z) + t.pi_zero


def _box(p: Prosumer, a: PoAAccess, g: float) -> tuple[float, float]:
    """Access-clamped consumption box, raising if it is empty."""
    lo_pairs = [(p.d_min, "d_min"), (g - a.c_inj, "g - c_inj")]
    hi_pairs = [(p.d_max, "d_max"), (g + a.c_wd, "g + c_wd")]
    lo, lo_name = max(lo_pairs)
    hi, hi_name = min(hi_pairs)
    if lo > hi:
        raise FeasibilityError(
            f"infeasible consumption box for prosumer {p.id}: {lo_name}={lo} exceeds {hi_name}={hi}"
        )
    return lo, hi


def clamp_f(p: Prosumer, a: PoAAccess, g: float, x: float) -> float:
    """Price response clamped to both the consumption box and the access window.

    Evaluates max(d_min, g - c_inj, min(V^-1(x), d_max, g + c_wd)). Raises
    FeasibilityError when the box is empty, naming the violated pair.
    """
    lo, hi = _box(p, a, g)
    return max(lo, min(inverse_marginal(p.utility, x), hi))


def _mu_star(p: Prosumer, a: PoAAccess, g: float, t: NemTariff) -> float:
    """Bisection for the rate mu in [pi_minus, pi_plus] at which f(mu) = g.

    Only called in the net-zero branch, where the bracket is guaranteed; a
    non-bracketing call indicates a branch-classification bug upstream.
    """
    lo_rate, hi_rate = t.pi_minus, t.pi_plus
    f_lo = clamp_f(p, a, g, lo_rate)
    f_hi = clamp_f(p, a, g, hi_rate)
    # f is nonincreasing in the rate, so f(pi_minus) >= g >= f(pi_plus) must hold.
    if not (f_lo >= g - MU_BISECTION_TOL and f_hi <= g + MU_BISECTION_TOL):
        raise RuntimeError(
            f"mu bisection bracket failure: f({lo_rate})={f_lo}, f({hi_rate})={f_hi}, g={g}"
        )
    for _ in range(_MU_BISECTION_MAX_ITER):
        if hi_rate - lo_rate <= MU_BISECTION_TOL:
            break
        mid = 0.5 * (lo_rate + hi_rate)
        if clamp_f(p, a, g, mid) >= g:
            lo_rate = mid
        else:
            hi_rate = mid
    return 0.5 * (lo_rate + hi_rate)


def active_surplus(p: Prosumer, t: NemTariff, a: PoAAccess, g: float) -> NemOutcome:
    """Surplus of a prosumer that re-optimizes consumption given its DG output.

    Three-branch closed form around d_plus = f(pi_plus) and d_minus =
    f(pi_minus); in the net-zero branch the marginal rate mu*(g) is located by
    bisection and consumption equals g.
    """
    d_plus = clamp_f(p, a, g, t.pi_plus)
    d_minus = clamp_f(p, a, g, t.pi_minus)
    if g <= d_plus:
        d = d_plus
    elif g >= d_minus:
        d = d_minus
    else:
        _mu_star(p, a, g, t)  # validates the branch classification
        d = g
    z = d - g
    bill = nem_bill(t, z)
    return NemOutcome(d=d, surplus=utility_value(p.utility, d) - bill, z=z, bill=bill)


def passive_surplus(p: Prosumer, t: NemTariff, a: PoAAccess, g: float) -> NemOutcome:
    """Surplus of a prosumer that always consumes d_plus, ignoring its DG."""
    d = clamp_f(p, a, g, t.pi_plus)
    z = d - g
    bill = nem_bill(t, z)
    return NemOutcome(d=d, surplus=utility_value(p.utility, d) - bill, z=z, bill=bill)


def nem_surplus(p: Prosumer, t: NemTariff, a: PoAAccess, g: float) -> NemOutcome:
    """Active or passive surplus, per the prosumer's behavior flag."""
    if p.behavior is Behavior.ACTIVE:
        return active_surplus(p, t, a, g)
    return passive_surplus(p, t, a, g)


def benchmark_k(cfg: "CompetitiveConfig", p: Prosumer, t: NemTariff, a: PoAAccess, g: float, pi_lmp: float = 0.0) -> float:
    """Per-prosumer surplus floor the aggregator must guarantee.

    Scales the benchmark surplus selected by ``cfg.mode`` by ``cfg.zeta``; the
    Fixed mode returns the user constant unscaled. A negative result is legal
    (the connection charge can push surpluses below zero) but is flagged,
    because the profitability guarantees assume nonnegative benchmarks.
    """
    from .aggregation import BenchmarkMode  # deferred; aggregation imports this module

    if cfg.mode is BenchmarkMode.FIXED:
        return cfg.fixed_k
    if cfg.mode is BenchmarkMode.NEM_ACTIVE:
        base = active_surplus(p, t, a, g).surplus
    elif cfg.mode is BenchmarkMode.NEM_PASSIVE:
        base = passive_surplus(p, t, a, g).surplus
    else:  # BenchmarkMode.GAB
        from .gab import s_no

        base = s_no(p, t, a, g)
    k = cfg.zeta * base
    if k < 0:
        warnings.warn(
            f"negative benchmark K={k:.6g} for prosumer {p.id}; "
            "profitability and average-cost guarantees assume K >= 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return k
