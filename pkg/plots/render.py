#!/usr/bin/env python3
"""Render experiment CSVs into the reference figure styles.

Read-only over the CSV contract produced by the ``derasim`` CLI: nothing is
recomputed here, so scientific correctness lives entirely in the simulation
package. Rendering is deterministic for a given input.

Usage:
    python plots/render.py --figure fig2 --in results/pareto --out figs/
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig8")

REQUIRED = {
    "fig2": {"pareto.csv": ["variant", "e_g", "customer_surplus", "dera_surplus"]},
    "fig3": {"adoption_sweep.csv": ["variant", "adoption", "e_g", "customer_surplus", "dera_surplus"]},
    "fig4": {"access_sweep.csv": ["variant", "delta", "e_g", "customer_surplus", "dera_surplus"]},
    "fig5": {"benefit_curve.csv": ["axis", "c_kwh", "e_g", "phi_mean"]},
    "fig6": {
        "equilibrium_multi.csv": ["eps1", "eps2", "survivors"],
        "equilibrium_access.csv": ["eps1", "eps2", "hour", "net_injection_access"],
    },
    "fig8": {"dg_trace.csv": ["hour", "mean_kwh"]},
}

VARIANT_STYLE = {
    "NEMa": dict(color="tab:purple", marker="s"),
    "NEMp": dict(color="tab:gray", marker="v"),
    "GAB": dict(color="tab:orange", marker="^"),
    "Co.NEMa": dict(color="tab:green", marker="o"),
    "Co.GAB": dict(color="tab:red", marker="D"),
    "Direct": dict(color="tab:blue", marker="*"),
}


class SchemaError(ValueError):
    """Input CSV does not match the expected column contract."""


def load_rows(path: Path, columns: list[str]) -> list[dict]:
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path.name}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    return rows


def _series(rows, key_col, x_col, y_col, filt=None):
    out: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if filt and not filt(r):
            continue
        out.setdefault(r[key_col], []).append((float(r[x_col]), float(r[y_col])))
    for vals in out.values():
        vals.sort()
    return out


def render_fig2(in_dir: Path, ax_grid=None):
    rows = load_rows(in_dir / "pareto.csv", REQUIRED["fig2"]["pareto.csv"])
    e_gs = sorted({r["e_g"] for r in rows}, key=float)
    fig, axes = plt.subplots(1, len(e_gs), figsize=(5.2 * len(e_gs), 4.2), squeeze=False)
    for ax, e_g in zip(axes[0], e_gs):
        pts = {r["variant"]: (float(r["customer_surplus"]), float(r["dera_surplus"]))
               for r in rows if r["e_g"] == e_g}
        for variant in ("Co.NEMa", "Co.GAB"):
            if variant in pts:
                x, y = pts[variant]
                x0 = min(v[0] for v in pts.values())
                y0 = min(v[1] for v in pts.values())
                ax.add_patch(
                    Rectangle((x0, y0), x - x0, y - y0, alpha=0.15,
                              color=VARIANT_STYLE[variant]["color"], linewidth=0)
                )
        for variant, (x, y) in pts.items():
            style = VARIANT_STYLE.get(variant, {})
            ax.scatter([x], [y], label=variant, s=70, **style)
        ax.set_xlabel("expected customer surplus ($)")
        ax.set_ylabel("expected aggregator surplus ($)")
        ax.set_title(f"E[g] = {e_g} kWh")
        ax.legend(fontsize=8)
    fig.suptitle("Surplus distribution and efficiency (shaded regions are dominated)")
    return fig


def _sweep_figure(rows, x_col, x_label):
    e_gs = sorted({r["e_g"] for r in rows}, key=float)
    fig, axes = plt.subplots(2, len(e_gs), figsize=(5.2 * len(e_gs), 7.6), squeeze=False)
    for col, e_g in enumerate(e_gs):
        for row_idx, y_col, y_label in ((0, "customer_surplus", "customer surplus ($)"),
                                        (1, "dera_surplus", "aggregator surplus ($)")):
            ax = axes[row_idx][col]
            series = _series(rows, "variant", x_col, y_col, filt=lambda r: r["e_g"] == e_g)
            for variant, pts in sorted(series.items()):
                xs, ys = zip(*pts)
                ax.plot(xs, ys, label=variant, **VARIANT_STYLE.get(variant, {}))
            ax.set_xlabel(x_label)
            ax.set_ylabel(y_label)
            if row_idx == 0:
                ax.set_title(f"E[g] = {e_g} kWh")
            ax.legend(fontsize=7)
    return fig


def render_fig3(in_dir: Path):
    rows = load_rows(in_dir / "adoption_sweep.csv", REQUIRED["fig3"]["adoption_sweep.csv"])
    fig = _sweep_figure(rows, "adoption", "DG adopter ratio")
    fig.suptitle("Expected surpluses vs DG adopter ratio")
    return fig


def render_fig4(in_dir: Path):
    rows = load_rows(in_dir / "access_sweep.csv", REQUIRED["fig4"]["access_sweep.csv"])
    fig = _sweep_figure(rows, "delta", "network access ratio")
    fig.suptitle("Expected surpluses vs network access ratio")
    return fig


def render_fig5(in_dir: Path):
    rows = load_rows(in_dir / "benefit_curve.csv", REQUIRED["fig5"]["benefit_curve.csv"])
    fig, (ax_wd, ax_inj) = plt.subplots(1, 2, figsize=(10.4, 4.2))
    for axis_name, ax, sign, x_label in (
        ("withdrawal", ax_wd, -1.0, "withdrawal access (kWh)"),
        ("injection", ax_inj, 1.0, "injection access (kWh)"),
    ):
        series = _series(rows, "e_g", "c_kwh", "phi_mean", filt=lambda r: r["axis"] == axis_name)
        for e_g, pts in sorted(series.items(), key=lambda kv: float(kv[0])):
            xs = [sign * x for x, _ in pts]
            ys = [y for _, y in pts]
            if sign < 0:
                xs, ys = xs[::-1], ys[::-1]
            ax.plot(xs, ys, marker="o", markersize=3, label=f"E[g] = {e_g}")
        ax.set_xlabel(x_label)
        ax.set_ylabel("expected benefit ($)")
        ax.legend(fontsize=8)
    fig.suptitle("Aggregator benefit of network access")
    return fig


def render_fig6(in_dir: Path):
    surv_rows = load_rows(in_dir / "equilibrium_multi.csv", REQUIRED["fig6"]["equilibrium_multi.csv"])
    prof_rows = load_rows(in_dir / "equilibrium_access.csv", REQUIRED["fig6"]["equilibrium_access.csv"])
    fig, (ax_l, ax_r) = plt.subplots(1, 2, figsize=(10.4, 4.2))
    for eps2, pts in sorted(_series(surv_rows, "eps2", "eps1", "survivors").items(), key=lambda kv: float(kv[0])):
        xs, ys = zip(*pts)
        ax_l.plot(xs, ys, marker="o", label=f"DSO cost scale {eps2}")
    ax_l.set_xlabel("DG capacity ratio")
    ax_l.set_ylabel("surviving aggregators")
    ax_l.legend(fontsize=8)
    eps1_levels = sorted({r["eps1"] for r in prof_rows}, key=float)
    shown = [eps1_levels[0], eps1_levels[len(eps1_levels) // 2], eps1_levels[-1]]
    eps2_max = max({r["eps2"] for r in prof_rows}, key=float)
    for eps1 in shown:
        pts = [
            (int(r["hour"]), float(r["net_injection_access"]))
            for r in prof_rows
            if r["eps1"] == eps1 and r["eps2"] == eps2_max
        ]
        pts.sort()
        ax_r.plot([h for h, _ in pts], [v for _, v in pts], marker=".", label=f"DG ratio {eps1}")
    ax_r.axhline(0.0, color="k", linewidth=0.6)
    ax_r.set_xlabel("hour")
    ax_r.set_ylabel("net injection access (kWh, negative = withdrawal)")
    ax_r.legend(fontsize=8)
    fig.suptitle("Long-run equilibrium over 24 hours")
    return fig


def render_fig8(in_dir: Path):
    rows = load_rows(in_dir / "dg_trace.csv", REQUIRED["fig8"]["dg_trace.csv"])
    sample_cols = [c for c in rows[0] if c.startswith("sample_")]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    hours = [int(r["hour"]) for r in rows]
    for col in sample_cols:
        ax.plot(hours, [float(r[col]) for r in rows], color="tab:gray", alpha=0.25, linewidth=0.6)
    ax.plot(hours, [float(r["mean_kwh"]) for r in rows], color="tab:red", linewidth=2.0, label="mean")
    ax.set_xlabel("hour")
    ax.set_ylabel("DG output (kWh)")
    ax.legend(fontsize=8)
    fig.suptitle("Hourly DG scenarios")
    return fig


RENDERERS = {
    "fig2": render_fig2,
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
    "fig6": render_fig6,
    "fig8": render_fig8,
}


def render(figure: str, in_dir: str | Path, out_dir: str | Path, fmt: str = "png") -> Path:
    """Render one figure from its experiment CSVs; returns the image path."""
    if figure not in RENDERERS:
        raise SchemaError(f"unknown figure {figure!r}, expected one of {FIGURES}")
    if fmt not in ("png", "svg"):
        raise SchemaError(f"unsupported format {fmt!r}, expected png or svg")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig = RENDERERS[figure](Path(in_dir))
    target = out / f"{figure}.{fmt}"
    fig.savefig(target, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return target


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--figure", required=True, choices=FIGURES)
    parser.add_argument("--in", dest="in_dir", required=True, help="directory holding the experiment CSVs")
    parser.add_argument("--out", dest="out_dir", required=True, help="directory for the rendered image")
    parser.add_argument("--format", default="png", choices=("png", "svg"))
    args = parser.parse_args(argv)
    try:
        target = render(args.figure, args.in_dir, args.out_dir, args.format)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(target)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
