"""Wholesale clearing with DC power flow: virtual-storage supply curves,
a dual-ascent market engine with closed-form primal responses, locational
marginal prices, and the direct-vs-aggregated equivalence harness.

Every participant's net-injection response to its local price is monotone
piecewise linear, so for fixed congestion prices the balancing price is found
exactly by scanning the merged breakpoints (merit order). Congestion prices
are then driven to complementarity by projected subgradient steps with a
coordinate-bisection polish.
"""
from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, CurveRangeError, FeasibilityError
from .prosumer import PoAAccess, Prosumer, marginal_utility, utility_value

_KNOT_EPS = 1e-11
_RESIDUAL_TOL = 1e-10
_SUBGRADIENT_ITERS = 400
_MAX_SWEEPS = 80
_MAX_ITERATIONS = 100_000


@dataclass(frozen=True)
class GeneratorOffer:
    """Quadratic supply offer c1*P + (c2/2)*P^2 on [0, pmax]."""

    c1: float
    c2: float
    pmax: float

    def __post_init__(self):
        if self.c2 < 0:
            raise ValueError(f"generator cost must be convex (c2 >= 0), got {self.c2}")
        if self.pmax < 0:
            raise ValueError(f"pmax must be nonnegative, got {self.pmax}")

    def cost(self, p: float) -> float:
        return self.c1 * p + 0.5 * self.c2 * p * p


@dataclass(frozen=True)
class DemandBid:
    """Concave benefit bid e1*D + (e2/2)*D^2 on [0, dmax] (e2 <= 0)."""

    e1: float
    e2: float
    dmax: float

    def __post_init__(self):
        if self.e2 > 0:
            raise ValueError(f"demand benefit must be concave (e2 <= 0), got {self.e2}")
        if self.dmax < 0:
            raise ValueError(f"dmax must be nonnegative, got {self.dmax}")

    def benefit(self, d: float) -> float:
        return self.e1 * d + 0.5 * self.e2 * d * d


@dataclass(frozen=True)
class TransmissionNetwork:
    """Buses with one optional offer and bid each, plus a shift-factor flow model.

    The slack-bus convention baked into ``shift`` is the input's
    responsibility; only dimensions are validated here.
    """

    gens: tuple[GeneratorOffer | None, ...]
    demands: tuple[DemandBid | None, ...]
    shift: np.ndarray
    line_limits: np.ndarray

    def __post_init__(self):
        shift = np.atleast_2d(np.asarray(self.shift, dtype=float))
        limits = np.atleast_1d(np.asarray(self.line_limits, dtype=float))
        if shift.size == 0:
            shift = shift.reshape(0, len(self.gens))
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "line_limits", limits)
        if shift.shape != (len(limits), len(self.gens)):
            raise ValueError(
                f"shift must be L x M = {len(limits)} x {len(self.gens)}, got {shift.shape}"
            )
        if len(self.demands) != len(self.gens):
            raise ValueError("gens and demands must have one entry per bus")
        if np.any(limits <= 0):
            raise ValueError("line limits must be positive")

    @property
    def m(self) -> int:
        return len(self.gens)

    @property
    def l(self) -> int:
        return len(self.line_limits)

    @classmethod
    def from_json(cls, source: str | Path | dict) -> "TransmissionNetwork":
        data = json.loads(Path(source).read_text()) if isinstance(source, (str, Path)) else source
        gens, demands = [], []
        for bus in data["buses"]:
            gen = bus.get("gen")
            dem = bus.get("demand")
            gens.append(GeneratorOffer(gen["c1"], gen["c2"], gen["pmax"]) if gen else None)
            demands.append(DemandBid(dem["e1"], dem["e2"], dem["dmax"]) if dem else None)
        lines = data.get("lines", [])
        limits = np.array([ln["limit"] for ln in lines], dtype=float)
        shift = np.array(data.get("shift", []), dtype=float).reshape(len(lines), len(gens))
        return cls(gens=tuple(gens), demands=tuple(demands), shift=shift, line_limits=limits)


# ---------------------------------------------------------------------------
# Piecewise-linear participant responses
# ---------------------------------------------------------------------------


class _Unit:
    """Monotone PL net-injection response with possible jumps at its knots.

    ``left[j]``/``right[j]`` bound the set-valued response at ``knots[j]``;
    between knots the response is linear, and it is constant outside them.
    """

    __slots__ = ("bus", "knots", "left", "right")

    def __init__(self, bus: int, knots: Sequence[float], left: Sequence[float], right: Sequence[float]):
        self.bus = bus
        self.knots = [float(k) for k in knots]
        self.left = [float(v) for v in left]
        self.right = [float(v) for v in right]

    def value(self, p: float) -> tuple[float, float]:
        knots = self.knots
        eps = _KNOT_EPS * max(1.0, abs(p))
        j = bisect_left(knots, p - eps)
        if j < len(knots) and abs(knots[j] - p) <= eps:
            return self.left[j], self.right[j]
        if j == 0:
            return self.left[0], self.left[0]
        if j == len(knots):
            return self.right[-1], self.right[-1]
        k0, k1 = knots[j - 1], knots[j]
        v0, v1 = self.right[j - 1], self.left[j]
        t = (p - k0) / (k1 - k0)
        v = v0 + t * (v1 - v0)
        return v, v

    def values_at(self, ps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Set-valued response bounds at many prices at once."""
        knots = np.asarray(self.knots)
        xs = np.repeat(knots, 2)
        ys = np.empty(xs.shape)
        ys[0::2] = self.left
        ys[1::2] = self.right
        mid = np.interp(ps, xs, ys)
        lo = mid.copy()
        hi = mid.copy()
        for j, k in enumerate(self.knots):
            mask = np.abs(ps - k) <= _KNOT_EPS * np.maximum(1.0, np.abs(ps))
            lo[mask] = self.left[j]
            hi[mask] = self.right[j]
        return lo, hi


def _gen_unit(bus: int, offer: GeneratorOffer) -> _Unit:
    if offer.pmax == 0:
        return _Unit(bus, [offer.c1], [0.0], [0.0])
    if offer.c2 == 0:
        return _Unit(bus, [offer.c1], [0.0], [offer.pmax])
    top = offer.c1 + offer.c2 * offer.pmax
    return _Unit(bus, [offer.c1, top], [0.0, offer.pmax], [0.0, offer.pmax])


def _demand_unit(bus: int, bid: DemandBid) -> _Unit:
    if bid.dmax == 0:
        return _Unit(bus, [bid.e1], [0.0], [0.0])
    if bid.e2 == 0:
        return _Unit(bus, [bid.e1], [-bid.dmax], [0.0])
    bottom = bid.e1 + bid.e2 * bid.dmax
    return _Unit(bus, [bottom, bid.e1], [-bid.dmax, 0.0], [-bid.dmax, 0.0])


def _clamp_bounds(p: Prosumer, a: PoAAccess, g: float) -> tuple[float, float]:
    lo = max(p.d_min, g - a.c_inj)
    hi = min(p.d_max, g + a.c_wd)
    if lo > hi:
        raise FeasibilityError(
            f"infeasible consumption box for prosumer {p.id}: lower bound {lo} exceeds upper bound {hi}"
        )
    return lo, hi


def _prosumer_consumption(p: Prosumer, a: PoAAccess, g: float, price: float) -> float:
    """Schedule at a local price, choosing the minimum-consumption point on flats."""
    lo, hi = _clamp_bounds(p, a, g)
    u = p.utility
    v = min(max((u.alpha - max(price, 0.0)) / u.beta, 0.0), u.saturation)
    return min(max(v, lo), hi)


def _prosumer_unit(bus: int, p: Prosumer, a: PoAAccess, g: float) -> _Unit:
    lo, hi = _clamp_bounds(p, a, g)
    u = p.utility
    cands = {0.0, u.alpha}
    for bound in (lo, hi):
        if bound <= u.saturation:
            cands.add(max(u.alpha - u.beta * bound, 0.0))
    knots = sorted(cands)
    left, right = [], []
    for k in knots:
        r = g - _prosumer_consumption(p, a, g, k)
        # Below price zero the prosumer absorbs up to its clamp (utility is flat
        # past saturation), so the response jumps down to g - hi there.
        l = (g - hi) if k == 0.0 else r
        left.append(l)
        right.append(r)
    return _Unit(bus, knots, left, right)


# ---------------------------------------------------------------------------
# Supply curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupplyCurve:
    """Monotone price-to-net-injection map for virtual-storage bidding.

    ``breakpoints`` are (price, quantity) pairs with linear interpolation
    between; ``u_values`` carries the fleet utility at each breakpoint so
    that welfare can be reconstructed from the curve alone. ``q_floor`` is
    the ultimate absorption when prices go nonpositive and the fleet dumps
    into its upper clamps.
    """

    breakpoints: tuple[tuple[float, float], ...]
    g_total: float
    u_values: tuple[float, ...] = field(repr=False, default=())
    q_floor: float = math.nan

    @property
    def prices(self) -> np.ndarray:
        return np.array([b[0] for b in self.breakpoints])

    @property
    def quantities(self) -> np.ndarray:
        return np.array([b[1] for b in self.breakpoints])

    def evaluate(self, pi: float) -> float:
        """Net injection offered at price pi (clamped outside the breakpoints)."""
        ps, qs = self.prices, self.quantities
        return float(np.interp(pi, ps, qs))

    def utility_total(self, pi: float) -> float:
        """Fleet utility at the consumption the curve schedules at price pi.

        Exact for the quadratic fleet: between breakpoints the utility changes
        by minus the integral of price against the quantity slope.
        """
        ps, qs, us = self.prices, self.quantities, np.array(self.u_values)
        if pi <= ps[0]:
            return float(us[0])
        if pi >= ps[-1]:
            return float(us[-1])
        j = int(np.searchsorted(ps, pi, side="right")) - 1
        slope = (qs[j + 1] - qs[j]) / (ps[j + 1] - ps[j])
        return float(us[j] - 0.5 * slope * (pi * pi - ps[j] * ps[j]))


def build_supply_curve(
    prosumers: Sequence[Prosumer],
    accesses: Sequence[PoAAccess],
    g: Sequence[float],
) -> SupplyCurve:
    """Assemble the exact fleet bid curve from each prosumer's clamp breakpoints.

    ``g`` may be the realized output (ex-post analysis) or an expectation
    proxy; the curve algebra is identical either way. Evaluating the curve at
    any price equals the aggregate of the closed-form schedules.
    """
    if not prosumers:
        raise ValueError("need at least one prosumer to build a curve")
    units = [_prosumer_unit(0, p, a, gn) for p, a, gn in zip(prosumers, accesses, g)]
    cands = sorted({k for u in units for k in u.knots if k >= 0.0} | {0.0})
    qs, us = [], []
    for price in cands:
        total_d = [ _prosumer_consumption(p, a, gn, price) for p, a, gn in zip(prosumers, accesses, g) ]
        qs.append(float(sum(g)) - sum(total_d))
        us.append(sum(utility_value(p.utility, d) for p, d in zip(prosumers, total_d)))
    floor = float(sum(g)) - sum(min(p.d_max, gn + a.c_wd) for p, a, gn in zip(prosumers, accesses, g))
    return SupplyCurve(
        breakpoints=tuple(zip(cands, qs)),
        g_total=float(sum(g)),
        u_values=tuple(us),
        q_floor=floor,
    )


def invert_supply(curve: SupplyCurve, q: float) -> float:
    """Smallest price at which the curve offers at least ``q`` (right-continuous)."""
    ps, qs = curve.prices, curve.quantities
    tol = 1e-12 * max(1.0, abs(q))
    if q < qs[0] - tol or q > qs[-1] + tol:
        raise CurveRangeError(f"quantity {q} outside curve range [{qs[0]}, {qs[-1]}]")
    q = min(max(q, qs[0]), qs[-1])
    j = int(np.searchsorted(qs, q, side="left"))
    if qs[j] == q or j == 0:
        return float(ps[j])
    if qs[j] == qs[j - 1]:
        return float(ps[j - 1])
    t = (q - qs[j - 1]) / (qs[j] - qs[j - 1])
    return float(ps[j - 1] + t * (ps[j] - ps[j - 1]))


# ---------------------------------------------------------------------------
# Participants and clearing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProsumerParticipant:
    """One prosumer bidding individually at a transmission bus."""

    bus: int
    prosumer: Prosumer
    access: PoAAccess
    g: float


@dataclass(frozen=True)
class CurveParticipant:
    """A pre-aggregated fleet bidding through its supply curve at one bus."""

    bus: int
    curve: SupplyCurve


Participant = ProsumerParticipant | CurveParticipant


@dataclass(frozen=True)
class ClearingOutcome:
    """Dispatch, duals, prices, and welfare of one market clearing.

    ``balance_residual`` is the absolute total net injection of the final
    dispatch; ``lmp`` is lam minus the shift-factor weighted congestion
    prices, bus by bus.
    """

    p: np.ndarray
    dd: np.ndarray
    d: np.ndarray
    q: np.ndarray
    lam: float
    mu: np.ndarray
    lmp: np.ndarray
    flows: np.ndarray
    sw: float
    balance_residual: float = 0.0


def _curve_unit(bus: int, curve: SupplyCurve) -> _Unit:
    knots = list(curve.prices)
    vals = list(curve.quantities)
    left = list(vals)
    right = list(vals)
    if not math.isnan(curve.q_floor) and knots[0] == 0.0:
        left[0] = curve.q_floor
    return _Unit(bus, knots, left, right)


def _build_units(net: TransmissionNetwork, participants: Sequence[Participant]):
    units: list[_Unit] = []
    tags: list[tuple[str, int]] = []
    for i, gen in enumerate(net.gens):
        if gen is not None and gen.pmax > 0:
            units.append(_gen_unit(i, gen))
            tags.append(("gen", i))
    for i, dem in enumerate(net.demands):
        if dem is not None and dem.dmax > 0:
            units.append(_demand_unit(i, dem))
            tags.append(("demand", i))
    for j, part in enumerate(participants):
        if isinstance(part, ProsumerParticipant):
            units.append(_prosumer_unit(part.bus, part.prosumer, part.access, part.g))
        else:
            units.append(_curve_unit(part.bus, part.curve))
        tags.append(("participant", j))
    if not units:
        raise FeasibilityError("no market participants")
    return units, tags


def _balance_solve(units: Sequence[_Unit], shifts: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact balancing price and dispatch for fixed congestion prices.

    ``shifts[i]`` is the price offset of unit i (shift-factor column dotted
    with the congestion prices); unit i responds to lam - shifts[i]. The
    merged breakpoint scan finds the price at which total net injection
    crosses zero, exactly.
    """
    cands = np.array(sorted({k + s for u, s in zip(units, shifts) for k in u.knots}))
    x_lo = np.zeros(len(cands))
    x_hi = np.zeros(len(cands))
    for u, s in zip(units, shifts):
        lo, hi = u.values_at(cands - s)
        x_lo += lo
        x_hi += hi

    if x_lo[0] > _RESIDUAL_TOL:
        raise FeasibilityError(f"cannot balance: excess injection {x_lo[0]} at the lowest price")
    if x_hi[-1] < -_RESIDUAL_TOL:
        raise FeasibilityError(f"cannot balance: unmet demand {-x_hi[-1]} at the highest price")
    lam_star = None
    for j in range(len(cands)):
        if x_lo[j] <= 0.0 <= x_hi[j]:
            lam_star = float(cands[j])
            break
        if j + 1 < len(cands) and x_hi[j] < 0.0 < x_lo[j + 1]:
            t = -x_hi[j] / (x_lo[j + 1] - x_hi[j])
            lam_star = float(cands[j] + t * (cands[j + 1] - cands[j]))
            break
    if lam_star is None:
        lam_star = float(cands[-1])
    # Dispatch at the minimum-consumption (maximum-injection) end of every
    # flat, then walk the surplus back through the flexible units.
    los, his = [], []
    for u, s in zip(units, shifts):
        a, b = u.value(lam_star - s)
        los.append(a)
        his.append(b)
    x = np.array(his)
    surplus = x.sum()
    for i in range(len(x)):
        if surplus <= 0:
            break
        give = min(his[i] - los[i], surplus)
        x[i] -= give
        surplus -= give
    return lam_star, x


def _flows(net: TransmissionNetwork, units: Sequence[_Unit], x: np.ndarray) -> np.ndarray:
    bus_net = np.zeros(net.m)
    for u, xi in zip(units, x):
        bus_net[u.bus] += xi
    return net.shift @ bus_net if net.l else np.zeros(0)


def clear(net: TransmissionNetwork, participants: Sequence[Participant]) -> ClearingOutcome:
    """Clear the market: dual ascent on (lam, mu) with exact primal responses.

    The balancing price is solved exactly per iteration; congestion prices
    start with diminishing-step projected subgradient updates and finish with
    coordinate bisections until flow feasibility and complementarity
    residuals fall below 1e-10 of scale.
    """
    units, tags = _build_units(net, participants)
    mu = np.zeros(net.l)
    iterations = 0

    def solve_at(mu_vec: np.ndarray):
        shifts = (net.shift.T @ mu_vec) if net.l else np.zeros(net.m)
        unit_shifts = np.array([shifts[u.bus] for u in units])
        lam, x = _balance_solve(units, unit_shifts)
        return lam, x, _flows(net, units, x)

    lam, x, flows = solve_at(mu)
    if net.l and np.any(flows > net.line_limits + _RESIDUAL_TOL):
        for k in range(1, _SUBGRADIENT_ITERS + 1):
            iterations += 1
            viol = flows - net.line_limits
            if np.all(viol <= _RESIDUAL_TOL) and np.all(mu * np.abs(viol) <= _RESIDUAL_TOL):
                break
            step = 0.1 / (k * max(1.0, float(np.abs(viol).max())))
            mu = np.maximum(0.0, mu + step * viol)
            lam, x, flows = solve_at(mu)
        # Coordinate polish: each congestion price is bisected onto its line's
        # complementarity condition; sweeps repeat until residuals settle.
        for _ in range(_MAX_SWEEPS):
            for l in range(net.l):
                trial = mu.copy()
                trial[l] = 0.0
                _, _, f0 = solve_at(trial)
                if f0[l] <= net.line_limits[l] + _RESIDUAL_TOL:
                    mu = trial
                    continue
                lo, hi = 0.0, max(mu[l], 1e-4)
                _, _, fhi = solve_at(_with(mu, l, hi))
                doublings = 0
                while fhi[l] > net.line_limits[l] and doublings < 60:
                    hi *= 2.0
                    _, _, fhi = solve_at(_with(mu, l, hi))
                    doublings += 1
                if fhi[l] > net.line_limits[l] + _RESIDUAL_TOL:
                    raise FeasibilityError(f"line {l} cannot be decongested: flow {fhi[l]} > {net.line_limits[l]}")
                for _ in range(100):
                    iterations += 1
                    mid = 0.5 * (lo + hi)
                    _, _, fm = solve_at(_with(mu, l, mid))
                    if fm[l] > net.line_limits[l]:
                        lo = mid
                    else:
                        hi = mid
                mu = _with(mu, l, hi)
            lam, x, flows = solve_at(mu)
            viol = np.maximum(0.0, flows - net.line_limits)
            comp = np.abs(mu * (net.line_limits - flows))
            if viol.max(initial=0.0) <= _RESIDUAL_TOL and comp.max(initial=0.0) <= 1e-8:
                break
            if iterations > _MAX_ITERATIONS:
                raise ConvergenceError(
                    "clearing did not converge",
                    residuals={"flow_violation": float(viol.max()), "complementarity": float(comp.max())},
                )
        else:
            viol = np.maximum(0.0, flows - net.line_limits)
            comp = np.abs(mu * (net.line_limits - flows))
            if viol.max(initial=0.0) > 1e-8 or comp.max(initial=0.0) > 1e-6:
                raise ConvergenceError(
                    "clearing did not converge",
                    residuals={"flow_violation": float(viol.max()), "complementarity": float(comp.max())},
                )

    lmp = lam - (net.shift.T @ mu) if net.l else np.full(net.m, lam)

    p = np.zeros(net.m)
    dd = np.zeros(net.m)
    d_list, q_list = [], []
    sw = 0.0
    for u, xi, (kind, idx) in zip(units, x, tags):
        if kind == "gen":
            p[idx] = xi
            sw -= net.gens[idx].cost(xi)
        elif kind == "demand":
            dd[idx] = -xi
            sw += net.demands[idx].benefit(-xi)
        else:
            part = participants[idx]
            if isinstance(part, ProsumerParticipant):
                d_val = part.g - xi
                d_list.append((idx, d_val))
                sw += utility_value(part.prosumer.utility, d_val)
            else:
                q_list.append((idx, xi))
                sw += part.curve.utility_total(max(float(lmp[part.bus]), 0.0))
    d_arr = np.array([v for _, v in sorted(d_list)]) if d_list else np.zeros(0)
    q_arr = np.array([v for _, v in sorted(q_list)]) if q_list else np.zeros(0)
    return ClearingOutcome(
        p=p,
        dd=dd,
        d=d_arr,
        q=q_arr,
        lam=float(lam),
        mu=mu,
        lmp=np.asarray(lmp, dtype=float),
        flows=flows,
        sw=float(sw),
        balance_residual=float(abs(x.sum())),
    )


def _with(vec: np.ndarray, idx: int, val: float) -> np.ndarray:
    out = vec.copy()
    out[idx] = val
    return out


def surplus_split(
    outcome: ClearingOutcome, participants: Sequence[Participant]
) -> float:
    """Combined aggregator-plus-customer surplus at the cleared prices."""
    total = 0.0
    di = qi = 0
    for part in participants:
        price = float(outcome.lmp[part.bus])
        if isinstance(part, ProsumerParticipant):
            d = float(outcome.d[di])
            di += 1
            total += utility_value(part.prosumer.utility, d) - price * (d - part.g)
        else:
            q = float(outcome.q[qi])
            qi += 1
            total += part.curve.utility_total(max(price, 0.0)) + price * q
    return total


def kkt_stationarity_residual(
    outcome: ClearingOutcome, participants: Sequence[Participant]
) -> float:
    """Worst violation of price-equals-marginal-utility with clamp multipliers.

    At interior consumption the marginal utility must equal the local price;
    at a clamp the recovered multiplier must be nonnegative.
    """
    worst = 0.0
    di = 0
    for part in participants:
        if not isinstance(part, ProsumerParticipant):
            continue
        d = float(outcome.d[di])
        di += 1
        price = float(outcome.lmp[part.bus])
        lo, hi = _clamp_bounds(part.prosumer, part.access, part.g)
        v = marginal_utility(part.prosumer.utility, d)
        tol = 1e-9
        if d >= hi - tol:
            res = max(0.0, price - v)
            if abs(hi - lo) < tol:
                res = 0.0  # degenerate box: both multipliers free
        elif d <= lo + tol:
            res = max(0.0, v - price)
        else:
            res = abs(v - price) if d < part.prosumer.utility.saturation - tol else max(0.0, -price)
        worst = max(worst, res)
    return worst


@dataclass(frozen=True)
class EquivalenceReport:
    """Gaps between individually-bid and aggregated-curve clearings."""

    sw_gap: float
    lmp_gap: float
    surplus_gap: float
    direct: ClearingOutcome
    aggregated: ClearingOutcome


def equivalence_report(
    net: TransmissionNetwork, participants: Sequence[ProsumerParticipant]
) -> EquivalenceReport:
    """Clear twice, with per-prosumer bids and with per-bus aggregate curves.

    The aggregate curve at each bus is the exact breakpoint sum of its
    prosumers' responses, so the two clearings must coincide.
    """
    direct = clear(net, participants)
    by_bus: dict[int, list[ProsumerParticipant]] = {}
    for part in participants:
        by_bus.setdefault(part.bus, []).append(part)
    curve_parts = [
        CurveParticipant(
            bus=bus,
            curve=build_supply_curve(
                [p.prosumer for p in parts], [p.access for p in parts], [p.g for p in parts]
            ),
        )
        for bus, parts in sorted(by_bus.items())
    ]
    aggregated = clear(net, curve_parts)
    s_direct = surplus_split(direct, participants)
    s_agg = surplus_split(aggregated, curve_parts)
    return EquivalenceReport(
        sw_gap=abs(direct.sw - aggregated.sw),
        lmp_gap=float(np.max(np.abs(direct.lmp - aggregated.lmp))),
        surplus_gap=abs(s_direct - s_agg),
        direct=direct,
        aggregated=aggregated,
    )


def outcome_to_dict(outcome: ClearingOutcome) -> dict:
    """JSON-ready mirror of the clearing outcome."""
    return {
        "p": [float(v) for v in outcome.p],
        "dd": [float(v) for v in outcome.dd],
        "d": [float(v) for v in outcome.d],
        "q": [float(v) for v in outcome.q],
        "lambda": outcome.lam,
        "mu": [float(v) for v in outcome.mu],
        "lmp": [float(v) for v in outcome.lmp],
        "flows": [float(v) for v in outcome.flows],
        "sw": outcome.sw,
    }
