"""Reproducible stochastic scenarios: truncated-Gaussian wholesale prices and
DG outputs, plus 24-hour solar trace ingestion.

Sub-streams are derived from the master seed with a stable hash of the stream
role and index, so regeneration is bit-identical and independent of the order
in which streams are drawn.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

_MIN_TRUNCATION_MASS = 1e-12
_BATCH = 4096


@dataclass(frozen=True)
class TruncGaussSpec:
    """Gaussian with mean/std restricted to the open interval (lower, upper)."""

    mean: float
    std: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.std <= 0:
            raise ValueError(f"std must be positive, got {self.std}")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got ({self.lower}, {self.upper})")


@dataclass(frozen=True)
class ScenarioSet:
    """Joint draws of the wholesale price and per-prosumer DG, one row per scenario."""

    lmp: np.ndarray
    dg: np.ndarray
    seed: int
    count: int


@dataclass(frozen=True)
class SolarTrace:
    """24 hourly mean DG values, kWh."""

    hourly: tuple[float, ...]

    def __post_init__(self):
        if len(self.hourly) != 24:
            raise ValueError(f"trace must have 24 hourly values, got {len(self.hourly)}")
        if any(v < 0 for v in self.hourly):
            raise ValueError("trace values must be nonnegative")


def substream_seed(seed: int, role: str, index: int | str = 0) -> int:
    """Derive a 64-bit child seed from (seed, role, index) via a stable hash."""
    digest = hashlib.sha256(f"{role}:{index}".encode()).digest()
    return (seed ^ int.from_bytes(digest[:8], "little")) & 0xFFFFFFFFFFFFFFFF


def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def sample_trunc_gauss(spec: TruncGaussSpec, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from the truncated Gaussian via rejection sampling.

    Deterministic per seed (counter-based generator). Raises when the
    truncation interval carries less than 1e-12 probability mass, where
    rejection would stall.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    lo_z = -math.inf if math.isinf(spec.lower) else (spec.lower - spec.mean) / spec.std
    hi_z = math.inf if math.isinf(spec.upper) else (spec.upper - spec.mean) / spec.std
    mass = _normal_cdf(hi_z) - _normal_cdf(lo_z)
    if mass < _MIN_TRUNCATION_MASS:
        raise ValueError(
            f"truncation interval ({spec.lower}, {spec.upper}) has mass {mass:.3g} < 1e-12"
        )
    rng = np.random.Generator(np.random.Philox(key=seed))
    out = np.empty(n)
    filled = 0
    while filled < n:
        draw = rng.normal(spec.mean, spec.std, size=max(_BATCH, int((n - filled) / mass) + 1))
        keep = draw[(draw > spec.lower) & (draw < spec.upper)]
        take = min(len(keep), n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def trunc_gauss_moments(spec: TruncGaussSpec) -> tuple[float, float]:
    """Analytic mean and variance of the truncated Gaussian."""
    a = -math.inf if math.isinf(spec.lower) else (spec.lower - spec.mean) / spec.std
    b = math.inf if math.isinf(spec.upper) else (spec.upper - spec.mean) / spec.std

    def pdf(x: float) -> float:
        if math.isinf(x):
            return 0.0
        return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    z = _normal_cdf(b) - _normal_cdf(a)
    shift = (pdf(a) - pdf(b)) / z
    mean = spec.mean + spec.std * shift
    a_term = 0.0 if math.isinf(a) else a * pdf(a)
    b_term = 0.0 if math.isinf(b) else b * pdf(b)
    var = spec.std**2 * (1.0 + (a_term - b_term) / z - shift**2)
    return mean, var


def build_scenario_set(
    lmp_spec: TruncGaussSpec,
    dg_specs: Sequence[TruncGaussSpec | None],
    prosumer_ids: Sequence[str],
    count: int,
    seed: int,
) -> ScenarioSet:
    """Sample a scenario set; DG streams are keyed by prosumer id, not position.

    A ``None`` DG spec encodes a non-adopter whose output is identically zero.
    """
    lmp = sample_trunc_gauss(lmp_spec, count, substream_seed(seed, "lmp"))
    dg = np.zeros((count, len(dg_specs)))
    for j, (spec, pid) in enumerate(zip(dg_specs, prosumer_ids)):
        if spec is None:
            continue
        dg[:, j] = sample_trunc_gauss(spec, count, substream_seed(seed, "dg", pid))
    return ScenarioSet(lmp=lmp, dg=dg, seed=seed, count=count)


def export_scenarios(s: ScenarioSet, path: str | Path) -> None:
    """Audit CSV: scenario_id, lmp, dg_1..dg_N."""
    n = s.dg.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario_id", "lmp"] + [f"dg_{j + 1}" for j in range(n)])
        for i in range(s.count):
            writer.writerow([i, repr(float(s.lmp[i]))] + [repr(float(v)) for v in s.dg[i]])


def load_trace(path: str | Path) -> SolarTrace:
    """Parse an ``hour,kwh`` CSV with exactly 24 nonnegative rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["hour", "kwh"]:
            raise ValueError(f"expected 'hour,kwh' header in {path}, got {header}")
        for line in reader:
            if not line or not "".join(line).strip():
                continue
            try:
                rows.append((int(line[0]), float(line[1])))
            except (IndexError, ValueError) as exc:
                raise ValueError(f"malformed trace row {line!r} in {path}") from exc
    if len(rows) != 24:
        raise ValueError(f"trace must have 24 rows, got {len(rows)}")
    hours = [h for h, _ in rows]
    if sorted(hours) != list(range(24)):
        raise ValueError(f"trace hours must be 0..23, got {hours}")
    values = [v for _, v in sorted(rows)]
    if any(v < 0 for v in values):
        raise ValueError("trace contains a negative DG value")
    return SolarTrace(hourly=tuple(values))


def scale_trace(trace: SolarTrace, eps1: float) -> SolarTrace:
    """Scale every hourly mean by eps1 >= 0."""
    if eps1 < 0:
        raise ValueError(f"eps1 must be nonnegative, got {eps1}")
    return SolarTrace(hourly=tuple(eps1 * v for v in trace.hourly))


def bundled_trace_path() -> Path:
    """Path of the synthetic 24-hour solar trace shipped with the package."""
    return Path(__file__).parent / "data" / "solar_trace.csv"
