"""Experiment recipes: parameter sweeps with CSV output and plots.

Each recipe sweeps one scenario axis, evaluates closed-form curves and
Monte Carlo markers, and writes a long-format CSV; plots are rendered from
the CSV alone, never recomputed.  Sweeps that move only decoding
thresholds (target rates, power split) reuse one sampling pass across all
abscissas, which also gives common random numbers along the sweep.
"""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from . import analytic, geometry, montecarlo
from .config import SystemConfig, derive, with_overrides

DEFAULT_SEED = 1729
DEFAULT_TRIALS = 100000

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "snapshot")

CSV_COLUMNS = (
    "figure", "case", "x_name", "x_value", "quantity", "user", "series",
    "value", "stderr", "n_trials", "seed",
)

# Shared evaluation baseline: 10 MHz channel, -170 dBm/Hz noise floor,
# 30 dBm transmit power, road intensity 5e-4 /m^2, BS intensity 5e-3 /m,
# same-road exponent 3, cross-road exponent 4.
BASELINE = SystemConfig()


def _row(figure, case, x_name, x_value, quantity, user, series, value,
         stderr="", n_trials="", seed=""):
    return {
        "figure": figure, "case": case, "x_name": x_name,
        "x_value": repr(float(x_value)), "quantity": quantity, "user": user,
        "series": series, "value": repr(float(value)),
        "stderr": "" if stderr == "" else repr(float(stderr)),
        "n_trials": str(n_trials), "seed": str(seed),
    }


def _mc_outage_rows(figure, case, x_name, x, cfg, banks, users, seed):
    der = derive(cfg)
    rows = []
    for user in users:
        est_ind = montecarlo.outage_indicators(banks[user], user, der, cfg.beta)
        n = est_ind.size
        p = float(np.count_nonzero(est_ind)) / n
        rows.append(_row(
            figure, case, x_name, x, "outage", user, "mc", p,
            stderr=math.sqrt(p * (1.0 - p) / n), n_trials=n, seed=seed,
        ))
    return rows


def _analytic_outage(cfg, user):
    if user == "comp":
        return analytic.outage_comp(cfg).p
    return analytic.outage_noma(cfg, int(user[-1])).p


def _sum_rate_rows(figure, case, x_name, x, cfg, banks, seed):
    """Outage sum rates, both schemes, analytic curves plus MC markers."""
    der = derive(cfg)
    rows = []
    mc_terms, var = [], 0.0
    for k, user in enumerate(montecarlo.USERS):
        ind = montecarlo.outage_indicators(banks[user], user, der, cfg.beta)
        n = ind.size
        p = float(np.count_nonzero(ind)) / n
        mc_terms.append(cfg.rates[k] * (1.0 - p))
        var += (cfg.rates[k] ** 2) * p * (1.0 - p) / n
    rows.append(_row(figure, case, x_name, x, "sum_rate", "all", "nnoma_mc",
                     sum(mc_terms), stderr=math.sqrt(var),
                     n_trials=banks["comp"].zeta.size, seed=seed))
    ind = montecarlo.outage_indicators(banks["comp"], "comp", der, beta=0.0)
    n = ind.size
    p = float(np.count_nonzero(ind)) / n
    rows.append(_row(figure, case, x_name, x, "sum_rate", "all", "oma_mc",
                     cfg.rates[0] * (1.0 - p),
                     stderr=cfg.rates[0] * math.sqrt(p * (1.0 - p) / n),
                     n_trials=n, seed=seed))

    analytic_total = cfg.rates[0] * (1.0 - analytic.outage_comp(cfg).p)
    for k in (1, 2):
        analytic_total += cfg.rates[k] * (1.0 - analytic.outage_noma(cfg, k).p)
    rows.append(_row(figure, case, x_name, x, "sum_rate", "all",
                     "nnoma_analytic", analytic_total))
    oma_p = analytic.outage_comp(with_overrides(cfg, beta=0.0)).p
    rows.append(_row(figure, case, x_name, x, "sum_rate", "all",
                     "oma_analytic", cfg.rates[0] * (1.0 - oma_p)))
    return rows


# -- recipes -------------------------------------------------------------------

def _fig2_rows(seed, trials, workers):
    """Far-user outage vs its target rate; equal and unequal serving distances."""
    cases = {"case_i": (100.0, 100.0), "case_ii": (100.0, 150.0)}
    r0_grid = np.linspace(0.25, 2.2, 14)     # feasible up to log2(1/beta) ~ 2.32
    rows = []
    for case, (d1, d2) in cases.items():
        cfg_geom = with_overrides(BASELINE, d1=d1, d2=d2, beta=0.2)
        banks = montecarlo.collect_samples(cfg_geom, ("comp",), trials, seed, workers=workers)
        for r0 in r0_grid:
            cfg = with_overrides(cfg_geom, rates=(float(r0), 0.5, 0.5))
            rows.append(_row("fig2", case, "r0", r0, "outage", "comp",
                             "analytic", analytic.outage_comp(cfg).p))
            rows += _mc_outage_rows("fig2", case, "r0", r0, cfg, banks, ("comp",), seed)
    return rows


def _fig3_rows(seed, trials, workers):
    """Sum rates and outages vs BS intensity; moderate and aggressive rates."""
    cases = {"case_i": (1.0, 0.5), "case_ii": (2.0, 1.0)}
    lam_b_grid = [1e-4, 2.154e-4, 4.642e-4, 1e-3, 2.154e-3, 4.642e-3, 1e-2]
    rows = []
    for lam_b in lam_b_grid:
        cfg_geom = with_overrides(BASELINE, lambda_b=lam_b, beta=0.2,
                                  d1=100.0, d2=100.0, seg_radius=20.0)
        banks = montecarlo.collect_samples(
            cfg_geom, montecarlo.USERS, trials, seed, workers=workers)
        for case, (r0, rk) in cases.items():
            cfg = with_overrides(cfg_geom, rates=(r0, rk, rk))
            for user in ("comp", "noma1", "noma2"):
                rows.append(_row("fig3", case, "lambda_b", lam_b, "outage",
                                 user, "analytic", _analytic_outage(cfg, user)))
            rows += _mc_outage_rows("fig3", case, "lambda_b", lam_b, cfg, banks,
                                    montecarlo.USERS, seed)
            rows += _sum_rate_rows("fig3", case, "lambda_b", lam_b, cfg, banks, seed)
    return rows


def _fig4_rows(seed, trials, workers):
    """Outage and sum rate vs the power split; one sampling pass for all points."""
    cases = {"case_i": (0.5, 0.5), "case_ii": (1.0, 1.0)}
    beta_grid = np.linspace(0.02, 0.98, 25)
    cfg_geom = with_overrides(BASELINE, d1=100.0, d2=100.0, seg_radius=20.0)
    banks = montecarlo.collect_samples(
        cfg_geom, montecarlo.USERS, trials, seed, workers=workers)
    rows = []
    for case, (r0, rk) in cases.items():
        for beta in beta_grid:
            cfg = with_overrides(cfg_geom, beta=float(beta), rates=(r0, rk, rk))
            for user in ("comp", "noma1"):
                rows.append(_row("fig4", case, "beta", beta, "outage", user,
                                 "analytic", _analytic_outage(cfg, user)))
            rows += _mc_outage_rows("fig4", case, "beta", beta, cfg, banks,
                                    ("comp", "noma1"), seed)
            rows += _sum_rate_rows("fig4", case, "beta", beta, cfg, banks, seed)
    return rows


def _fig5_rows(seed, trials, workers):
    """Outage vs the left serving distance: far side fixed, or total fixed."""
    d1_grid = np.linspace(100.0, 300.0, 21)
    rows = []
    for case in ("case_i", "case_ii"):
        for d1 in d1_grid:
            d2 = 100.0 if case == "case_i" else 400.0 - float(d1)
            cfg = with_overrides(BASELINE, d1=float(d1), d2=d2, beta=0.25,
                                 rates=(0.5, 0.5, 0.5), seg_radius=20.0)
            banks = montecarlo.collect_samples(
                cfg, ("comp", "noma1"), trials, seed, workers=workers)
            for user in ("comp", "noma1"):
                rows.append(_row("fig5", case, "d1", d1, "outage", user,
                                 "analytic", _analytic_outage(cfg, user)))
            rows += _mc_outage_rows("fig5", case, "d1", d1, cfg, banks,
                                    ("comp", "noma1"), seed)
    return rows


def _fig6_rows(seed, trials, workers):
    """Outage vs BS intensity for several road intensities, serving distance
    tied to the mean BS spacing (d = 1/(2 lambda_b))."""
    lam_l_grid = [2.5e-4, 5e-4, 1e-3]
    lam_b_grid = [1e-3, 2e-3, 5e-3, 1e-2]
    rows = []
    for lam_l in lam_l_grid:
        case = f"lambda_l={lam_l:g}"
        for lam_b in lam_b_grid:
            d = 1.0 / (2.0 * lam_b)
            cfg = with_overrides(BASELINE, lambda_l=lam_l, lambda_b=lam_b,
                                 d1=d, d2=d, exclusion_d=min(50.0, d),
                                 beta=0.25, rates=(0.5, 0.5, 0.5), seg_radius=20.0)
            banks = montecarlo.collect_samples(
                cfg, ("comp", "noma1"), trials, seed, workers=workers)
            for user in ("comp", "noma1"):
                rows.append(_row("fig6", case, "lambda_b", lam_b, "outage", user,
                                 "analytic", _analytic_outage(cfg, user)))
            rows += _mc_outage_rows("fig6", case, "lambda_b", lam_b, cfg, banks,
                                    ("comp", "noma1"), seed)
    return rows


def _fig7_rows(seed, trials, workers):
    """Exact vs dense-roads asymptotic outage at fixed lambda_l * lambda_b."""
    del trials, workers  # closed-form comparison, no sampling
    lam_product = 2.5e-6
    lam_b_grid = [1e-2, 4.642e-3, 2.154e-3, 1e-3, 4.642e-4, 2.154e-4, 1e-4]
    comp_cases = {"case_i": (100.0, 100.0), "case_ii": (100.0, 150.0)}
    rows = []
    for lam_b in lam_b_grid:
        lam_l = lam_product / lam_b
        for case, (d1, d2) in comp_cases.items():
            cfg = with_overrides(BASELINE, lambda_l=lam_l, lambda_b=lam_b,
                                 d1=d1, d2=d2, beta=0.25, rates=(0.5, 0.5, 0.5))
            rows.append(_row("fig7", case, "lambda_b", lam_b, "outage", "comp",
                             "analytic", analytic.outage_comp(cfg).p))
            rows.append(_row("fig7", case, "lambda_b", lam_b, "outage", "comp",
                             "asymptotic", analytic.outage_comp_asymptotic(cfg).p))
        cfg = with_overrides(BASELINE, lambda_l=lam_l, lambda_b=lam_b,
                             d1=100.0, d2=100.0, beta=0.25, rates=(0.5, 0.5, 0.5))
        rows.append(_row("fig7", "noma", "lambda_b", lam_b, "outage", "noma1",
                         "analytic", analytic.outage_noma(cfg, 1).p))
        rows.append(_row("fig7", "noma", "lambda_b", lam_b, "outage", "noma1",
                         "asymptotic", analytic.outage_noma_asymptotic(cfg, 1).p))
    return rows


_BUILDERS = {
    "fig2": _fig2_rows,
    "fig3": _fig3_rows,
    "fig4": _fig4_rows,
    "fig5": _fig5_rows,
    "fig6": _fig6_rows,
    "fig7": _fig7_rows,
}


def write_rows(path, rows, columns=CSV_COLUMNS):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        writer.writerows(rows)


def _snapshot(out_dir, seed):
    """One realization dump (roads, BSs, users) plus its scatter plot."""
    cfg = BASELINE
    trunc = geometry.Truncation(r_max=500.0, half_length=500.0, typical_half_length=500.0)
    rng = montecarlo.trial_generator(seed, 0)
    real = geometry.sample_realization(cfg, trunc, rng)
    users = geometry.sample_users(cfg, real, rng)
    rows = geometry.realization_rows(cfg, real, users)
    csv_path = os.path.join(out_dir, "snapshot.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "rho", "theta", "offset", "x", "y"])
        writer.writerows(rows)
    plot_path = os.path.join(out_dir, "snapshot.pdf")
    _plot_snapshot(csv_path, plot_path, trunc.half_length)
    return csv_path, plot_path


def reproduce_figure(figure_id, out_dir, seed=DEFAULT_SEED,
                     trials=DEFAULT_TRIALS, workers=1):
    """Build one figure's CSV and vector plot; returns their paths."""
    if figure_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}, expected one of {FIGURE_IDS}")
    os.makedirs(out_dir, exist_ok=True)
    if figure_id == "snapshot":
        return _snapshot(out_dir, seed)
    rows = _BUILDERS[figure_id](seed, trials, workers)
    csv_path = os.path.join(out_dir, f"{figure_id}.csv")
    write_rows(csv_path, rows)
    plot_path = os.path.join(out_dir, f"{figure_id}.pdf")
    plot_figure(figure_id, csv_path, plot_path)
    return csv_path, plot_path


# -- plotting (CSV in, vector image out) ----------------------------------------

def _load(csv_path):
    with open(csv_path, "r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["x_value"] = float(r["x_value"])
        r["value"] = float(r["value"])
        r["stderr"] = float(r["stderr"]) if r["stderr"] else 0.0
    return rows


def _series(rows, **filters):
    sub = [r for r in rows if all(r[k] == v for k, v in filters.items())]
    sub.sort(key=lambda r: r["x_value"])
    return ([r["x_value"] for r in sub], [r["value"] for r in sub],
            [r["stderr"] for r in sub])


def _new_axes(n_panels):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, n_panels, figsize=(6.0 * n_panels, 4.5))
    if n_panels == 1:
        axes = [axes]
    return fig, axes


_CASE_COLOR = {"case_i": "tab:blue", "case_ii": "tab:red", "noma": "tab:green"}
_USER_LABEL = {"comp": "CoMP user", "noma1": "NOMA user", "noma2": "NOMA user 2"}


def _plot_outage_panel(ax, rows, cases, users, x_label, logx=False):
    styles = {"comp": "-", "noma1": "--", "noma2": ":"}
    for case in cases:
        color = _CASE_COLOR.get(case)
        for user in users:
            x, y, _ = _series(rows, case=case, user=user,
                              quantity="outage", series="analytic")
            if x:
                ax.plot(x, y, styles.get(user, "-"), color=color,
                        label=f"{_USER_LABEL.get(user, user)}, {case} (analysis)")
            x, y, se = _series(rows, case=case, user=user,
                               quantity="outage", series="mc")
            if x:
                ax.errorbar(x, y, yerr=[3 * s for s in se], fmt="o", mfc="none",
                            color=color, label=f"{_USER_LABEL.get(user, user)}, {case} (simulation)")
    ax.set_xlabel(x_label)
    ax.set_ylabel("Outage probability")
    ax.set_yscale("log")
    if logx:
        ax.set_xscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)


def _plot_sum_rate_panel(ax, rows, cases, x_label, logx=False):
    for case in cases:
        color = _CASE_COLOR.get(case)
        for scheme, style in (("nnoma", "-"), ("oma", "--")):
            x, y, _ = _series(rows, case=case, quantity="sum_rate",
                              series=f"{scheme}_analytic")
            if x:
                ax.plot(x, y, style, color=color, label=f"{scheme.upper()} {case} (analysis)")
            x, y, se = _series(rows, case=case, quantity="sum_rate",
                               series=f"{scheme}_mc")
            if x:
                marker = "o" if scheme == "nnoma" else "s"
                ax.errorbar(x, y, yerr=[3 * s for s in se], fmt=marker, mfc="none",
                            color=color, label=f"{scheme.upper()} {case} (simulation)")
    ax.set_xlabel(x_label)
    ax.set_ylabel("Outage sum rate (bps/Hz)")
    if logx:
        ax.set_xscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)


def plot_figure(figure_id, csv_path, plot_path):
    rows = _load(csv_path)
    if figure_id == "fig2":
        fig, axes = _new_axes(1)
        _plot_outage_panel(axes[0], rows, ("case_i", "case_ii"), ("comp",),
                           "Far-user target rate R0 (bps/Hz)")
    elif figure_id == "fig3":
        fig, axes = _new_axes(2)
        _plot_sum_rate_panel(axes[0], rows, ("case_i", "case_ii"),
                             "BS intensity lambda_b (nodes/m)", logx=True)
        _plot_outage_panel(axes[1], rows, ("case_i", "case_ii"),
                           ("comp", "noma1"), "BS intensity lambda_b (nodes/m)",
                           logx=True)
    elif figure_id == "fig4":
        fig, axes = _new_axes(2)
        _plot_outage_panel(axes[0], rows, ("case_i", "case_ii"),
                           ("comp", "noma1"), "Power allocation coefficient beta")
        _plot_sum_rate_panel(axes[1], rows, ("case_i", "case_ii"),
                             "Power allocation coefficient beta")
    elif figure_id == "fig5":
        fig, axes = _new_axes(1)
        _plot_outage_panel(axes[0], rows, ("case_i", "case_ii"),
                           ("comp", "noma1"), "Serving distance d1 (m)")
    elif figure_id == "fig6":
        fig, axes = _new_axes(1)
        cases = sorted({r["case"] for r in rows})
        ax = axes[0]
        for case in cases:
            for user, style in (("comp", "-"), ("noma1", "--")):
                x, y, _ = _series(rows, case=case, user=user,
                                  quantity="outage", series="analytic")
                ax.plot(x, y, style, label=f"{_USER_LABEL[user]}, {case} (analysis)")
                x, y, se = _series(rows, case=case, user=user,
                                   quantity="outage", series="mc")
                ax.errorbar(x, y, yerr=[3 * s for s in se], fmt="o", mfc="none",
                            color=ax.lines[-1].get_color(),
                            label=f"{_USER_LABEL[user]}, {case} (simulation)")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("BS intensity lambda_b (nodes/m)")
        ax.set_ylabel("Outage probability")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    elif figure_id == "fig7":
        fig, axes = _new_axes(2)
        for ax, cases, users, title in (
            (axes[0], ("case_i", "case_ii"), ("comp",), "Far user"),
            (axes[1], ("noma",), ("noma1",), "Near user"),
        ):
            for case in cases:
                color = _CASE_COLOR.get(case)
                for user in users:
                    x, y, _ = _series(rows, case=case, user=user,
                                      quantity="outage", series="analytic")
                    ax.plot(x, y, "-", color=color, label=f"{case} (exact)")
                    x, y, _ = _series(rows, case=case, user=user,
                                      quantity="outage", series="asymptotic")
                    ax.plot(x, y, "--", color=color, label=f"{case} (asymptotic)")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("BS intensity lambda_b (nodes/m)")
            ax.set_ylabel("Outage probability")
            ax.set_title(title)
            ax.grid(True, which="both", alpha=0.3)
            ax.legend(fontsize=7)
    else:
        raise ValueError(f"no plot recipe for {figure_id!r}")
    fig.tight_layout()
    fig.savefig(plot_path)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return plot_path


def _plot_snapshot(csv_path, plot_path, half_length):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path, "r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(6, 6))
    for r in rows:
        if r["kind"] != "line":
            continue
        rho, theta = float(r["rho"]), float(r["theta"])
        bx, by = rho * math.cos(theta), rho * math.sin(theta)
        tx, ty = -math.sin(theta), math.cos(theta)
        ax.plot([bx - half_length * tx, bx + half_length * tx],
                [by - half_length * ty, by + half_length * ty],
                color="0.8", lw=0.8, zorder=1)
    bs = [(float(r["x"]), float(r["y"])) for r in rows if r["kind"] == "bs"]
    us = [(float(r["x"]), float(r["y"])) for r in rows if r["kind"] == "user"]
    if bs:
        ax.scatter(*zip(*bs), marker="^", s=18, color="tab:red", label="BS", zorder=3)
    if us:
        ax.scatter(*zip(*us), marker=".", s=10, color="tab:blue", label="user", zorder=2)
    ax.scatter([0], [0], marker="*", s=120, color="black", label="far user", zorder=4)
    lim = 0.75 * half_length
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(plot_path)
    plt.close(fig)
    return plot_path
