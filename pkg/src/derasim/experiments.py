"""Experiment runner: validates a JSON config, evaluates the aggregator
variants over Monte Carlo scenarios, and writes deterministic CSV artifacts
plus a manifest.

Variants: NEMa / NEMp (utility tariff with active or passive customers), GAB
(two-part-pricing competitor), Co.NEMa / Co.GAB (competitive aggregation
against those benchmarks), and Direct (customers keep the whole wholesale
surplus). The tariff sell rate tracks the sampled wholesale price.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__ as _version
from . import _vector as vec
from .equilibrium import (
    EquilibriumParams,
    hourly_access_at_count,
    hourly_scenarios,
    multi_interval_survivors,
    single_interval_equilibrium,
)
from .errors import ConfigError
from .market import ProsumerParticipant, TransmissionNetwork, clear, outcome_to_dict
from .nem import NemTariff
from .prosumer import PoAAccess, Prosumer, QuadraticUtility
from .scenario import (
    SolarTrace,
    TruncGaussSpec,
    bundled_trace_path,
    load_trace,
    sample_trunc_gauss,
    scale_trace,
    substream_seed,
)

EXPERIMENTS = (
    "pareto",
    "adoption_sweep",
    "access_sweep",
    "benefit_curve",
    "equilibrium_single",
    "equilibrium_multi",
    "clear_once",
    "aggregate_once",
)
VARIANTS = ("NEMa", "NEMp", "GAB", "Co.NEMa", "Co.GAB", "Direct")

_DEFAULTS = {
    "variants": list(VARIANTS),
    "population": {"n": 50, "alpha": 0.4, "beta": 0.1, "d_min": 0.0, "d_max": 40.0},
    "tariff": {"pi_plus": 0.3, "pi_zero": 0.0},
    "zeta": {"co_nema": "prop2", "co_gab": 1.05, "gab": 1.0},
    "scenarios": {"count": 10000, "lmp_mean": 0.05, "lmp_std": 0.01, "dg_std": 0.2},
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DERASIM_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence):
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Config validation
# ---------------------------------------------------------------------------


def load_config(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _merged(config: dict) -> dict:
    out = dict(config)
    for key, default in _DEFAULTS.items():
        if isinstance(default, dict):
            merged = dict(default)
            merged.update(config.get(key, {}))
            out[key] = merged
        else:
            out.setdefault(key, default)
    return out


def validate(config: dict) -> list[str]:
    """Schema and cross-field validation; returns a list of problem strings."""
    problems: list[str] = []
    exp = config.get("experiment")
    if exp is None:
        problems.append("experiment: missing")
    elif exp not in EXPERIMENTS:
        problems.append(f"experiment: unknown value {exp!r}, expected one of {EXPERIMENTS}")
    cfg = _merged(config)

    def num(path: str, value, lo=None, hi=None):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            problems.append(f"{path}: expected a number, got {value!r}")
            return
        if lo is not None and value < lo:
            problems.append(f"{path}: {value} below minimum {lo}")
        if hi is not None and value > hi:
            problems.append(f"{path}: {value} above maximum {hi}")

    needs_tariff = exp not in ("clear_once", "equilibrium_single", None)
    if needs_tariff:
        if "tariff" not in config and exp in ("pareto", "adoption_sweep", "access_sweep", "benefit_curve", "aggregate_once", "equilibrium_multi"):
            problems.append("tariff: missing")
        else:
            num("tariff.pi_plus", cfg["tariff"].get("pi_plus"), lo=0)
            num("tariff.pi_zero", cfg["tariff"].get("pi_zero", 0.0), lo=0)
    pop = cfg["population"]
    num("population.n", pop.get("n"), lo=1)
    num("population.alpha", pop.get("alpha"), lo=1e-12)
    num("population.beta", pop.get("beta"), lo=1e-12)
    num("population.d_min", pop.get("d_min"), lo=0)
    num("population.d_max", pop.get("d_max"), lo=pop.get("d_min", 0) if isinstance(pop.get("d_min"), (int, float)) else 0)
    for name, z in cfg["zeta"].items():
        if z == "prop2":
            continue
        num(f"zeta.{name}", z, lo=1)
    sc = cfg["scenarios"]
    num("scenarios.count", sc.get("count"), lo=1)
    num("scenarios.lmp_mean", sc.get("lmp_mean"), lo=0)
    num("scenarios.lmp_std", sc.get("lmp_std"), lo=1e-12)
    for v in cfg.get("variants", []):
        if v not in VARIANTS:
            problems.append(f"variants: unknown variant {v!r}")
    grids = cfg.get("grids", {})
    grid_needs = {
        "pareto": ("e_g",),
        "adoption_sweep": ("adoption", "e_g"),
        "access_sweep": ("delta", "e_g"),
        "benefit_curve": ("benefit_access", "e_g"),
        "equilibrium_multi": ("eps1", "eps2"),
    }
    for grid_name in grid_needs.get(exp, ()):  # type: ignore[arg-type]
        grid = grids.get(grid_name)
        if not grid:
            problems.append(f"grids.{grid_name}: missing or empty for experiment {exp}")
    if exp == "clear_once" and "network" not in config:
        problems.append("network: missing for clear_once")
    if exp == "aggregate_once":
        single = config.get("single", {})
        for field_name in ("g", "pi_lmp"):
            if field_name not in single:
                problems.append(f"single.{field_name}: missing for aggregate_once")
    if exp == "equilibrium_single":
        eq = config.get("equilibrium", {})
        for field_name in ("k_total",):
            if field_name not in eq:
                problems.append(f"equilibrium.{field_name}: missing for equilibrium_single")
    if "seed" in config and not isinstance(config["seed"], int):
        problems.append(f"seed: expected an integer, got {config['seed']!r}")
    return problems


# ---------------------------------------------------------------------------
# Variant evaluation engine
# ---------------------------------------------------------------------------


class _Population:
    """Homogeneous fleet parameters broadcast against scenario arrays."""

    def __init__(self, pop: dict):
        self.n = int(pop["n"])
        self.alpha = float(pop["alpha"])
        self.beta = float(pop["beta"])
        self.d_min = float(pop["d_min"])
        self.d_max = float(pop["d_max"])

    def prosumers(self, behavior="passive") -> list[Prosumer]:
        from .prosumer import Behavior

        u = QuadraticUtility(self.alpha, self.beta)
        return [
            Prosumer(f"p{i}", 0, u, self.d_min, self.d_max, Behavior(behavior))
            for i in range(self.n)
        ]


def _sample_population_dg(pop_n: int, adoption: float, e_g: float, dg_std: float, count: int, seed: int) -> np.ndarray:
    """DG draws with the non-adopter fraction fixed at zero output."""
    adopters = int(round(adoption * pop_n))
    g = np.zeros((count, pop_n))
    if e_g > 0:
        for j in range(adopters):
            spec = TruncGaussSpec(e_g, dg_std, 0.0, math.inf)
            g[:, j] = sample_trunc_gauss(spec, count, substream_seed(seed, "dg", f"p{j}"))
    return g


def variant_surplus(
    variant: str,
    pop: _Population,
    g: np.ndarray,
    lmp: np.ndarray,
    tariff: NemTariff,
    c_inj: float,
    c_wd: float,
    zetas: dict,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-scenario expected customer and aggregator surplus for one variant.

    Returns (customer, aggregator) arrays of length scenarios; the sell rate
    equals the sampled wholesale price scenario by scenario.
    """
    a, b = pop.alpha, pop.beta
    dn, dx = pop.d_min, pop.d_max
    pi = lmp[:, None]
    pp, p0 = tariff.pi_plus, tariff.pi_zero
    if variant == "NEMa":
        s = vec.s_nem_active(a, b, dn, dx, c_inj, c_wd, g, pp, pi, p0)
        d = vec.d_nem_active(a, b, dn, dx, c_inj, c_wd, g, pp, pi)
        z = d - g
        margin = np.maximum((pp - pi) * z, 0.0) + p0
        return s.sum(axis=1), margin.sum(axis=1)
    if variant == "NEMp":
        s = vec.s_nem_passive(a, b, dn, dx, c_inj, c_wd, g, pp, pi, p0)
        d = vec.clamp_f(a, b, dn, dx, c_inj, c_wd, g, pp)
        z = d - g
        margin = np.maximum((pp - pi) * z, 0.0) + p0
        return s.sum(axis=1), margin.sum(axis=1)
    if variant == "GAB":
        z_gab = float(zetas.get("gab", 1.0))
        sno = vec.s_no(a, b, dn, dx, c_inj, c_wd, g, pp)
        f_lmp = vec.clamp_f(a, b, dn, dx, c_inj, c_wd, g, pi)
        agg = (g - f_lmp) > 0
        delta = vec.u_val(a, b, f_lmp) + pi * (g - f_lmp) - z_gab * sno
        cust = np.where(agg, z_gab * sno, sno)
        return cust.sum(axis=1), np.where(agg, delta, 0.0).sum(axis=1)
    d_opt = vec.d_star(a, b, dn, dx, c_inj, c_wd, g, pi)
    value = vec.u_val(a, b, d_opt) - pi * (d_opt - g)
    if variant == "Direct":
        return value.sum(axis=1), np.zeros(len(lmp))
    if variant == "Co.NEMa":
        s = vec.s_nem_active(a, b, dn, dx, c_inj, c_wd, g, pp, pi, p0)
        z_setting = zetas.get("co_nema", "prop2")
        if z_setting == "prop2":
            ratio = np.divide(value, s, out=np.ones_like(value), where=s > 0)
            zeta = ratio.min(axis=1)
        else:
            zeta = np.full(len(lmp), float(z_setting))
        cust = zeta[:, None] * s
        return cust.sum(axis=1), value.sum(axis=1) - cust.sum(axis=1)
    if variant == "Co.GAB":
        z = float(zetas.get("co_gab", 1.05))
        sno = vec.s_no(a, b, dn, dx, c_inj, c_wd, g, pp)
        cust = z * sno
        return cust.sum(axis=1), value.sum(axis=1) - cust.sum(axis=1)
    raise ConfigError(f"unknown variant {variant!r}")


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    if len(x) < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _surplus_rows(cfg: dict, adoption_grid, delta_grid, e_g_grid, label: str):
    pop = _Population(cfg["population"])
    sc = cfg["scenarios"]
    seed = int(cfg.get("seed", 0))
    tariff = NemTariff(cfg["tariff"]["pi_plus"], 0.0, cfg["tariff"].get("pi_zero", 0.0))
    count = int(sc["count"])
    lmp_spec = TruncGaussSpec(sc["lmp_mean"], sc["lmp_std"], 0.0, tariff.pi_plus)
    lmp = sample_trunc_gauss(lmp_spec, count, substream_seed(seed, "lmp"))
    base = cfg.get("access", {})
    cells = [
        (adoption, delta, e_g)
        for adoption in adoption_grid
        for delta in delta_grid
        for e_g in e_g_grid
    ]

    def run_cell(cell):
        adoption, delta, e_g = cell
        g = _sample_population_dg(pop.n, adoption, e_g, sc["dg_std"], count, substream_seed(seed, "pop", repr(e_g)))
        if delta is None:
            c_inj = math.inf if base.get("c_inj") is None else float(base["c_inj"])
            c_wd = math.inf if base.get("c_wd") is None else float(base["c_wd"])
        else:
            c_inj = c_wd = 8.0 * delta
        rows = []
        for variant in cfg["variants"]:
            cust, dera = variant_surplus(variant, pop, g, lmp, tariff, c_inj, c_wd, cfg["zeta"])
            cm, cs = _mean_stderr(cust)
            dm, ds = _mean_stderr(dera)
            rows.append(
                [
                    label,
                    variant,
                    adoption,
                    0.0 if delta is None else delta,
                    e_g,
                    cm,
                    cs,
                    dm,
                    ds,
                    cm + dm,
                    count,
                    seed,
                ]
            )
        return rows

    header = [
        "experiment",
        "variant",
        "adoption",
        "delta",
        "e_g",
        "customer_surplus",
        "customer_stderr",
        "dera_surplus",
        "dera_stderr",
        "total_surplus",
        "scenario_count",
        "seed",
    ]
    all_rows = [row for rows in _map(run_cell, cells) for row in rows]
    return header, all_rows


def run_pareto(cfg: dict, out_dir: Path) -> list[Path]:
    adoption = cfg.get("adoption", 0.8)
    header, rows = _surplus_rows(cfg, [adoption], [None], cfg["grids"]["e_g"], "pareto")
    path = out_dir / "pareto.csv"
    _write_csv(path, header, rows)
    return [path]


def run_adoption_sweep(cfg: dict, out_dir: Path) -> list[Path]:
    header, rows = _surplus_rows(cfg, cfg["grids"]["adoption"], [None], cfg["grids"]["e_g"], "adoption_sweep")
    path = out_dir / "adoption_sweep.csv"
    _write_csv(path, header, rows)
    return [path]


def run_access_sweep(cfg: dict, out_dir: Path) -> list[Path]:
    adoption = cfg.get("adoption", 0.5)
    header, rows = _surplus_rows(cfg, [adoption], cfg["grids"]["delta"], cfg["grids"]["e_g"], "access_sweep")
    path = out_dir / "access_sweep.csv"
    _write_csv(path, header, rows)
    return [path]


def run_benefit_curve(cfg: dict, out_dir: Path) -> list[Path]:
    from .access import AccessAxis, benefit_curve
    from .aggregation import BenchmarkMode, CompetitiveConfig
    from .scenario import build_scenario_set

    pop = _Population(cfg["population"])
    sc = cfg["scenarios"]
    seed = int(cfg.get("seed", 0))
    tariff = NemTariff(cfg["tariff"]["pi_plus"], 0.0, cfg["tariff"].get("pi_zero", 0.0))
    competitive = CompetitiveConfig(zeta=float(cfg.get("benefit_zeta", 1.01)), mode=BenchmarkMode.NEM_PASSIVE)
    grid = [float(c) for c in cfg["grids"]["benefit_access"]]
    lmp_spec = TruncGaussSpec(sc["lmp_mean"], sc["lmp_std"], 0.0, tariff.pi_plus)
    rows = []
    for e_g in cfg["grids"]["e_g"]:
        prosumers = pop.prosumers()
        dg_specs = [TruncGaussSpec(float(e_g), sc["dg_std"], 0.0, math.inf)] * pop.n
        scen = build_scenario_set(lmp_spec, dg_specs, [p.id for p in prosumers], int(sc["count"]), seed)
        for axis in (AccessAxis.WITHDRAWAL, AccessAxis.INJECTION):
            curve = benefit_curve(prosumers, scen, axis, grid, tariff, competitive)
            for c, phi, err in zip(curve.grid, curve.phi, curve.phi_stderr):
                rows.append([axis.value, c, e_g, phi, err, curve.mc_count, curve.seed])
    path = out_dir / "benefit_curve.csv"
    _write_csv(path, ["axis", "c_kwh", "e_g", "phi_mean", "phi_stderr", "mc_count", "seed"], rows)
    return [path]


def _equilibrium_params(cfg: dict) -> EquilibriumParams:
    eq = cfg.get("equilibrium", {})
    pop = cfg["population"]
    return EquilibriumParams(
        n_prosumers=int(eq.get("n_prosumers", pop["n"])),
        alpha=float(eq.get("alpha", pop["alpha"])),
        beta=float(eq.get("beta", pop["beta"])),
        g_total=float(eq.get("g_total", 0.0)),
        k_total=float(eq.get("k_total", 0.0)),
        dso_a=float(eq.get("dso_a", 0.009)),
        dso_b=float(eq.get("dso_b", 0.0005)),
        initial_deras=int(eq.get("initial_deras", 200)),
    )


def run_equilibrium_single(cfg: dict, out_dir: Path) -> list[Path]:
    params = _equilibrium_params(cfg)
    out = single_interval_equilibrium(params)
    path = out_dir / "equilibrium_single.csv"
    _write_csv(
        path,
        ["k_total", "g_total", "c_star", "k_star", "gamma", "psi", "exists", "survivors"],
        [[params.k_total, params.g_total, out.c_star, out.k_star, out.gamma, out.psi, out.exists, out.survivors]],
    )
    return [path]


def run_equilibrium_multi(cfg: dict, out_dir: Path) -> list[Path]:
    params = _equilibrium_params(cfg)
    eq = cfg.get("equilibrium", {})
    sc = cfg["scenarios"]
    seed = int(cfg.get("seed", 0))
    tariff = NemTariff(cfg["tariff"]["pi_plus"], 0.0, cfg["tariff"].get("pi_zero", 0.0))
    zeta = float(eq.get("zeta", 1.01))
    trace_src = eq.get("trace", "bundled")
    trace = load_trace(bundled_trace_path() if trace_src == "bundled" else trace_src)
    count = int(sc["count"])
    rows = []
    profile_rows = []
    for eps1 in cfg["grids"]["eps1"]:
        banks = hourly_scenarios(trace, params, float(eps1), count, tariff=tariff, zeta=zeta, seed=seed)
        for eps2 in cfg["grids"]["eps2"]:
            survivors = multi_interval_survivors(
                trace, params, float(eps1), float(eps2), count, tariff=tariff, zeta=zeta, seed=seed, banks=banks
            )
            k_eff = max(float(survivors), 1.0)
            wd_profile, inj_profile = hourly_access_at_count(banks, params, float(eps2), k_eff)
            rows.append(
                [eps1, eps2, survivors, float(np.mean(wd_profile)), float(np.mean(inj_profile)), count, seed]
            )
            for hour in range(24):
                profile_rows.append([eps1, eps2, hour, wd_profile[hour], inj_profile[hour], inj_profile[hour] - wd_profile[hour]])
    path = out_dir / "equilibrium_multi.csv"
    _write_csv(path, ["eps1", "eps2", "survivors", "mean_c_wd", "mean_c_inj", "scenario_count", "seed"], rows)
    profile_path = out_dir / "equilibrium_access.csv"
    _write_csv(profile_path, ["eps1", "eps2", "hour", "c_wd", "c_inj", "net_injection_access"], profile_rows)
    trace_path = out_dir / "dg_trace.csv"
    _write_trace_fan(trace, sc, seed, trace_path)
    return [path, profile_path, trace_path]


def _write_trace_fan(trace: SolarTrace, sc: dict, seed: int, path: Path, samples: int = 30) -> None:
    rows = []
    for hour, mean in enumerate(trace.hourly):
        if mean == 0.0:
            draws = np.zeros(samples)
        else:
            spec = TruncGaussSpec(mean, sc["dg_std"], 0.0, math.inf)
            draws = sample_trunc_gauss(spec, samples, substream_seed(seed, "trace-fan", hour))
        rows.append([hour, mean] + [float(v) for v in draws])
    _write_csv(path, ["hour", "mean_kwh"] + [f"sample_{i}" for i in range(samples)], rows)


def run_clear_once(cfg: dict, out_dir: Path) -> list[Path]:
    net_cfg = cfg["network"]
    net = TransmissionNetwork.from_json(net_cfg if isinstance(net_cfg, dict) else Path(net_cfg))
    participants = []
    for rec in cfg.get("prosumers", []):
        participants.append(
            ProsumerParticipant(
                bus=int(rec["bus"]),
                prosumer=Prosumer(
                    str(rec.get("id", f"b{rec['bus']}")),
                    int(rec["bus"]),
                    QuadraticUtility(float(rec["alpha"]), float(rec["beta"])),
                    float(rec.get("d_min", 0.0)),
                    float(rec.get("d_max", 1e9)),
                ),
                access=PoAAccess(
                    math.inf if rec.get("c_inj") is None else float(rec["c_inj"]),
                    math.inf if rec.get("c_wd") is None else float(rec["c_wd"]),
                ),
                g=float(rec.get("g", 0.0)),
            )
        )
    outcome = clear(net, participants)
    path = out_dir / "clearing.json"
    path.write_text(json.dumps(outcome_to_dict(outcome), indent=2, sort_keys=True) + "\n")
    return [path]


def run_aggregate_once(cfg: dict, out_dir: Path) -> list[Path]:
    from .aggregation import aggregate_fleet
    from .nem import nem_surplus

    pop = _Population(cfg["population"])
    single = cfg["single"]
    tariff = NemTariff(cfg["tariff"]["pi_plus"], float(single.get("pi_minus", single["pi_lmp"])), cfg["tariff"].get("pi_zero", 0.0))
    g = float(single["g"])
    pi = float(single["pi_lmp"])
    zeta = float(single.get("zeta", 1.0))
    access = PoAAccess(
        math.inf if single.get("c_inj") is None else float(single["c_inj"]),
        math.inf if single.get("c_wd") is None else float(single["c_wd"]),
    )
    prosumers = pop.prosumers(behavior=single.get("behavior", "passive"))
    ks = [zeta * nem_surplus(p, tariff, access, g).surplus for p in prosumers]
    outcome = aggregate_fleet(prosumers, [access] * pop.n, [g] * pop.n, pi, ks)
    rows = []
    for i, p in enumerate(prosumers):
        rows.append(
            [
                0,
                p.id,
                g,
                pi,
                outcome.d_star[i],
                outcome.omega[i],
                outcome.k[i],
                outcome.prosumer_surplus[i],
                outcome.omega[i] - pi * (outcome.d_star[i] - g),
                "" if outcome.avg_cost[i] is None else outcome.avg_cost[i],
            ]
        )
    path = out_dir / "aggregate_once.csv"
    _write_csv(
        path,
        ["scenario_id", "prosumer_id", "g", "pi_lmp", "d_star", "omega", "k", "prosumer_surplus", "dera_profit_share", "avg_cost"],
        rows,
    )
    nem_rows = []
    for p in prosumers:
        o = nem_surplus(p, tariff, access, g)
        nem_rows.append([p.id, g, o.d, o.surplus, o.bill])
    nem_path = out_dir / "nem_outcomes.csv"
    _write_csv(nem_path, ["prosumer_id", "g", "d", "surplus", "bill"], nem_rows)
    return [path, nem_path]


_RUNNERS = {
    "pareto": run_pareto,
    "adoption_sweep": run_adoption_sweep,
    "access_sweep": run_access_sweep,
    "benefit_curve": run_benefit_curve,
    "equilibrium_single": run_equilibrium_single,
    "equilibrium_multi": run_equilibrium_multi,
    "clear_once": run_clear_once,
    "aggregate_once": run_aggregate_once,
}


def run(config: dict, out_dir: str | Path) -> list[Path]:
    """Validate, execute, and write one experiment's artifacts plus a manifest."""
    problems = validate(config)
    if problems:
        raise ConfigError("; ".join(problems))
    cfg = _merged(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = _RUNNERS[cfg["experiment"]](cfg, out)
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    manifest = {
        "experiment": cfg["experiment"],
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "seed": int(cfg.get("seed", 0)),
        "derasim_version": _version,
        "numpy_version": np.__version__,
        "outputs": [p.name for p in outputs],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return outputs + [manifest_path]
