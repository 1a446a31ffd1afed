"""Vectorized counterparts of the scalar closed forms, for Monte Carlo sweeps.

Inputs broadcast like numpy arrays; infinities encode unlimited access exactly
as in the scalar API. Consistency with the scalar operations is enforced by
tests, so any change here must keep the two routes in lockstep.
"""
from __future__ import annotations

import numpy as np


def u_val(alpha, beta, x):
    """Quadratic-with-plateau utility."""
    x = np.asarray(x, dtype=float)
    sat = alpha / beta
    return np.where(x >= sat, alpha**2 / (2.0 * beta), alpha * x - 0.5 * beta * x * x)


def inv_marginal(alpha, beta, pi):
    """Price response of the marginal-utility curve, clipped to [0, alpha/beta]."""
    pi = np.asarray(pi, dtype=float)
    return np.clip((alpha - pi) / beta, 0.0, alpha / beta)


def d_hat(alpha, beta, d_min, d_max, pi):
    """Box-clipped price response."""
    return np.minimum(d_max, np.maximum(inv_marginal(alpha, beta, pi), d_min))


def d_star(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi):
    """Aggregator's optimal consumption under the access window."""
    dh = d_hat(alpha, beta, d_min, d_max, pi)
    return np.minimum(g + c_wd, np.maximum(dh, g - c_inj))


def clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, x):
    """Access-and-box clamped price response used by the tariff benchmarks."""
    v = inv_marginal(alpha, beta, x)
    return np.maximum(np.maximum(d_min, g - c_inj), np.minimum(np.minimum(v, d_max), g + c_wd))


def nem_bill(pi_plus, pi_minus, pi_zero, z):
    z = np.asarray(z, dtype=float)
    return np.maximum(pi_plus * z, pi_minus * z) + pi_zero


def s_nem_active(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus, pi_minus, pi_zero):
    """Active-prosumer tariff surplus (closed three-branch form)."""
    d_plus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus)
    d_minus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_minus)
    d = np.maximum(d_plus, np.minimum(g, d_minus))
    return u_val(alpha, beta, d) - nem_bill(pi_plus, pi_minus, pi_zero, d - g)


def d_nem_active(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus, pi_minus):
    d_plus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus)
    d_minus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_minus)
    return np.maximum(d_plus, np.minimum(g, d_minus))


def s_nem_passive(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus, pi_minus, pi_zero):
    """Passive-prosumer tariff surplus: consumption pinned at the retail response."""
    d_plus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus)
    return u_val(alpha, beta, d_plus) - nem_bill(pi_plus, pi_minus, pi_zero, d_plus - g)


def s_no(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus):
    """Opt-out surplus for the two-part-pricing benchmark (no export credit)."""
    d_plus = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, pi_plus)
    d_free = clamp_f(alpha, beta, d_min, d_max, c_inj, c_wd, g, 0.0)
    out = u_val(alpha, beta, d_plus) - pi_plus * (d_plus - g)
    out = np.where(d_plus <= g, u_val(alpha, beta, g), out)
    return np.where(d_free <= g, u_val(alpha, beta, d_free), out)
