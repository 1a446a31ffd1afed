"""Prosumer utility primitives: quadratic-with-plateau utility, marginal and
inverse-marginal curves, and the clamped inverse demand.

Every downstream module consumes these four operations. All types are frozen
dataclasses and all operations are pure, so they are safe to evaluate from any
number of concurrent workers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

UNLIMITED = math.inf


class Behavior(Enum):
    """Whether a tariff customer re-optimizes consumption against its DG."""

    ACTIVE = "active"
    PASSIVE = "passive"


@dataclass(frozen=True)
class QuadraticUtility:
    """Concave consumption utility a*x - (b/2)*x^2 that plateaus at x = a/b.

    Attributes:
        alpha: marginal value of the first kWh, $/kWh.
        beta: slope of the marginal value curve, $/kWh^2.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"alpha and beta must be positive, got alpha={self.alpha}, beta={self.beta}")

    @property
    def saturation(self) -> float:
        """Consumption level beyond which utility is flat."""
        return self.alpha / self.beta

    @property
    def plateau(self) -> float:
        """Utility value on the flat region."""
        return self.alpha**2 / (2.0 * self.beta)


@dataclass(frozen=True)
class PoAAccess:
    """Injection/withdrawal limits granted at a point of aggregation.

    ``c_inj`` bounds how much the net flow may push into the network,
    ``c_wd`` how much it may draw. ``math.inf`` encodes unlimited access and
    short-circuits every clamp built from these fields.
    """

    c_inj: float
    c_wd: float

    def __post_init__(self):
        if self.c_inj < 0 or self.c_wd < 0:
            raise ValueError(f"access limits must be nonnegative, got c_inj={self.c_inj}, c_wd={self.c_wd}")

    @classmethod
    def unlimited(cls) -> "PoAAccess":
        return cls(UNLIMITED, UNLIMITED)


@dataclass(frozen=True)
class Prosumer:
    """A customer with flexible consumption and behind-the-meter generation.

    The consumption box [d_min, d_max] is a hard physical limit. No relation
    between the box and the inverse marginal utility is assumed here; any
    clamping against prices happens in the operations that need it.
    """

    id: str
    poa: int
    utility: QuadraticUtility
    d_min: float
    d_max: float
    behavior: Behavior = Behavior.PASSIVE

    def __post_init__(self):
        if not (0 <= self.d_min <= self.d_max):
            raise ValueError(f"need 0 <= d_min <= d_max, got [{self.d_min}, {self.d_max}]")


def utility_value(u: QuadraticUtility, x: float) -> float:
    """Utility of consuming ``x`` kWh; flat at the plateau beyond alpha/beta."""
    if x < 0:
        raise ValueError(f"consumption must be nonnegative, got {x}")
    if x >= u.saturation:
        return u.plateau
    return u.alpha * x - 0.5 * u.beta * x * x


def marginal_utility(u: QuadraticUtility, x: float) -> float:
    """Marginal value of the next kWh at consumption ``x``; zero past the plateau."""
    if x < 0:
        raise ValueError(f"consumption must be nonnegative, got {x}")
    if x >= u.saturation:
        return 0.0
    return u.alpha - u.beta * x


def inverse_marginal(u: QuadraticUtility, pi: float) -> float:
    """Consumption at which the marginal value equals price ``pi``.

    Clamped to [0, alpha/beta]: prices at or above alpha yield zero,
    price zero yields the saturation point.
    """
    if pi < 0:
        raise ValueError(f"price must be nonnegative, got {pi}")
    if pi >= u.alpha:
        return 0.0
    return min((u.alpha - pi) / u.beta, u.saturation)


def inverse_demand(p: Prosumer, pi: float) -> float:
    """Price response clipped to the prosumer's consumption box."""
    return min(p.d_max, max(inverse_marginal(p.utility, pi), p.d_min))


def load_population(source: str | Path | Iterable[dict]) -> tuple[list[Prosumer], list[PoAAccess]]:
    """Load a prosumer population from a JSON array (path or parsed records).

    Each record carries {id, poa, alpha, beta, d_min, d_max, behavior,
    c_inj, c_wd}; ``null`` access encodes unlimited.
    """
    if isinstance(source, (str, Path)):
        records = json.loads(Path(source).read_text())
    else:
        records = list(source)
    prosumers, accesses = [], []
    for rec in records:
        prosumers.append(
            Prosumer(
                id=str(rec["id"]),
                poa=int(rec["poa"]),
                utility=QuadraticUtility(float(rec["alpha"]), float(rec["beta"])),
                d_min=float(rec["d_min"]),
                d_max=float(rec["d_max"]),
                behavior=Behavior(str(rec.get("behavior", "passive")).lower()),
            )
        )
        c_inj = rec.get("c_inj")
        c_wd = rec.get("c_wd")
        accesses.append(
            PoAAccess(
                UNLIMITED if c_inj is None else float(c_inj),
                UNLIMITED if c_wd is None else float(c_wd),
            )
        )
    return prosumers, accesses
