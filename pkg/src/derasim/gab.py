"""Two-part-pricing benchmark aggregator: a variable energy price plus a
discriminative fixed charge, buying surplus DG from net producers only.

Customers it does not aggregate stay with the utility and keep the opt-out
surplus computed by :func:`s_no`.
"""
from __future__ import annotations

from dataclasses import dataclass

from .nem import NemTariff, clamp_f
from .prosumer import PoAAccess, Prosumer, utility_value


@dataclass(frozen=True)
class GabOutcome:
    """Two-part-pricing result for one prosumer.

    ``aggregated`` is true only for strict net producers at the wholesale
    price; the fixed charge ``delta_star`` is the aggregator's whole margin
    because the variable price equals the wholesale price.
    """

    aggregated: bool
    lambda_star: float
    delta_star: float
    x_star: float
    d_star: float
    prosumer_surplus: float
    dera_profit: float
    s_no: float


def s_no(p: Prosumer, t: NemTariff, a: PoAAccess, g: float) -> float:
    """Opt-out surplus: buy-only retail service with no export credit.

    Three branches depending on where the DG output g falls against the
    zero-price response f(0) and the retail-rate response f(pi_plus).
    """
    d_plus = clamp_f(p, a, g, t.pi_plus)
    d_free = clamp_f(p, a, g, 0.0)
    if d_free <= g:
        return utility_value(p.utility, d_free)
    if d_plus <= g:
        return utility_value(p.utility, g)
    return utility_value(p.utility, d_plus) - t.pi_plus * (d_plus - g)


def gab_outcome(
    p: Prosumer,
    t: NemTariff,
    a: PoAAccess,
    g: float,
    pi_lmp: float,
    zeta: float,
) -> GabOutcome:
    """Optimal two-part price for one prosumer against the opt-out benchmark.

    Aggregates exactly when g > f(pi_lmp); then the variable price is the
    wholesale price, the customer keeps zeta times the opt-out surplus, and
    the fixed charge collects the rest.
    """
    if pi_lmp < 0:
        raise ValueError(f"wholesale price must be nonnegative, got {pi_lmp}")
    if zeta < 1:
        raise ValueError(f"zeta must be >= 1, got {zeta}")
    opt_out = s_no(p, t, a, g)
    k = zeta * opt_out
    d_at_lmp = clamp_f(p, a, g, pi_lmp)
    if g - d_at_lmp > 0:
        x_star = g - d_at_lmp
        delta_star = utility_value(p.utility, d_at_lmp) + pi_lmp * x_star - k
        return GabOutcome(
            aggregated=True,
            lambda_star=pi_lmp,
            delta_star=delta_star,
            x_star=x_star,
            d_star=d_at_lmp,
            prosumer_surplus=k,
            dera_profit=delta_star,
            s_no=opt_out,
        )
    # Not aggregated: the prosumer keeps its opt-out consumption and surplus.
    d_plus = clamp_f(p, a, g, t.pi_plus)
    d_free = clamp_f(p, a, g, 0.0)
    if d_free <= g:
        d_star = d_free
    elif d_plus <= g:
        d_star = g
    else:
        d_star = d_plus
    return GabOutcome(
        aggregated=False,
        lambda_star=pi_lmp,
        delta_star=0.0,
        x_star=0.0,
        d_star=d_star,
        prosumer_surplus=opt_out,
        dera_profit=0.0,
        s_no=opt_out,
    )
