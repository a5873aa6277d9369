"""Config -> domain objects, and the work behind each CLI subcommand."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from . import csvio
from .config import ConfigError, RunConfig, load_table
from .diagnostics import (Setup, classify_mu0_sign, dmu_steady, map_points, mass_comparison,
                          principal_eigenpair)
from .dynamics import SimState, StepperConfig, advance
from .grid import Field, GridError, LandscapeError, LandscapeSpec, integrate, make_grid, sample_landscape
from .motility import MotilityError, MotilityLaw
from .perception import KernelError, KernelShape, perceive
from .steady import solve_logistic_steady, solve_movement_steady

log = logging.getLogger(__name__)


@dataclass
class Built:
    cfg: RunConfig
    setup: Setup
    sbar_field: object          # PerceivedField
    stepper: StepperConfig

    @property
    def grid(self):
        return self.setup.grid


def build(cfg: RunConfig) -> Built:
    """Validate every module precondition before anything is computed."""
    try:
        grid = make_grid(cfg["grid.ell"], cfg["grid.n_cells"])
    except GridError as exc:
        raise ConfigError("grid.n_cells" if "n_cells" in str(exc) else "grid.ell", str(exc)) from None

    kind = cfg["landscape.kind"]
    try:
        if kind == "custom":
            table = load_table(cfg.path("landscape.file"), "landscape.file", grid.n_cells)
            spec = LandscapeSpec("custom", {}, tuple(table))
        else:
            spec = LandscapeSpec(kind, cfg.landscape_params())
        s = sample_landscape(spec, grid)
    except LandscapeError as exc:
        raise ConfigError("landscape.kind", str(exc)) from None

    try:
        shape = KernelShape(cfg["kernel.shape"], cfg["kernel.R"])
        sbar = perceive(s, shape, cfg["kernel.mode"])
    except KernelError as exc:
        raise ConfigError("kernel.R", str(exc)) from None

    try:
        law = MotilityLaw(cfg["motility.kind"], cfg["motility.c"], cfg["motility.k"],
                          cfg["motility.gamma0"])
    except MotilityError as exc:
        raise ConfigError("motility.kind", str(exc)) from None

    n = grid.n_cells
    alpha = cfg["dynamics.alpha"]
    u0_kind = cfg["initial.u0"]
    if u0_kind == "landscape":
        u0 = s
    elif u0_kind == "constant":
        if not cfg["initial.u0_value"] > 0:
            raise ConfigError("initial.u0_value", "must be positive")
        u0 = Field(grid, np.full(n, cfg["initial.u0_value"]))
    else:
        u0 = Field(grid, load_table(cfg.path("initial.u0_file"), "initial.u0_file", n))
        if np.any(u0.values < 0):
            raise ConfigError("initial.u0_file", "initial density must be nonnegative")

    m0_kind = cfg["initial.m0"]
    if m0_kind == "zero":
        m0 = Field(grid, np.zeros(n))
    elif m0_kind == "alpha_sbar":
        m0 = Field(grid, alpha * sbar.values)
    else:
        m0 = Field(grid, load_table(cfg.path("initial.m0_file"), "initial.m0_file", n))
        if np.any(m0.values < 0):
            raise ConfigError("initial.m0_file", "initial memory must be nonnegative")

    stepper = StepperConfig(t_final=cfg["dynamics.t_final"], alpha=alpha, mu=cfg["dynamics.mu"],
                            growth=cfg["dynamics.growth"], dt_safety=cfg["dynamics.dt_safety"],
                            record_every=cfg["dynamics.record_every"])
    setup = Setup(s, sbar, law, cfg["dynamics.growth"], u0, m0, cfg["dynamics.dt_safety"])
    return Built(cfg, setup, sbar, stepper)


def _plot(csv_path: str, x_col: str, y_cols: list[str], group_col: str | None = None):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping plot for %s", csv_path)
        return None
    header, rows = csvio.read_table(csv_path)
    cols = {h: [r[i] for r in rows] for i, h in enumerate(header)}
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if group_col:
        groups = sorted(set(cols[group_col]))
        for gval in groups:
            idx = [i for i, v in enumerate(cols[group_col]) if v == gval]
            for y in y_cols:
                ax.plot([cols[x_col][i] for i in idx], [cols[y][i] for i in idx],
                        label=f"{y} {group_col}={gval:g}")
    else:
        for y in y_cols:
            ax.plot(cols[x_col], cols[y], marker=".", label=y)
    ax.set_xlabel(x_col)
    ax.legend(fontsize=6)
    out = os.path.splitext(csv_path)[0] + ".svg"
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def simulate(b: Built, out: str, plot: bool = False):
    state = SimState(b.setup.initial_u(), b.setup.initial_m(), 0.0, b.sbar_field)
    res = advance(state, b.stepper, b.setup.law, b.setup.s)
    csvio.emit_profile_csv(out, res.snapshots, b.grid.centers, b.sbar_field.values,
                           b.setup.s.values)
    if plot:
        _plot(out, "x", ["u"], group_col="t")
    return res


def steady(b: Built, out: str, plot: bool = False):
    """Steady profile CSV plus a one-row ``<out>.meta.csv`` with solver scalars."""
    setup, st = b.setup, b.stepper
    if st.growth == "none":
        M = integrate(setup.initial_u())
        sol = solve_movement_steady(b.sbar_field, setup.law, st.alpha, st.mu, M, b.grid)
        u, m = sol.u_inf.values, sol.m_inf.values
        meta = ("movement", st.alpha, st.mu, sol.K, sol.M, sol.residuals["flux"], sol.iterations)
    else:
        sol = solve_logistic_steady(setup.s, b.sbar_field, setup.law, st.alpha, st.mu, b.grid)
        u, m = sol.u_star.values, sol.m_star.values
        meta = ("logistic", st.alpha, st.mu, math.nan, integrate(sol.u_star), sol.residual,
                sol.iterations)
    from .dynamics import Snapshot

    csvio.emit_profile_csv(out, [Snapshot(math.inf, u, m)], b.grid.centers, b.sbar_field.values,
                           setup.s.values)
    csvio.write_table(meta_path(out), csvio.STEADY_META_HEADER, [meta])
    if plot:
        _plot(out, "x", ["u", "m", "s"])
    return sol


def meta_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".meta.csv"


def sweep_tasks(b: Built, axis: str, values, mode: str):
    cfg = b.cfg
    tasks = []
    solver = {"dynamics": "dynamics", "steady_movement": "steady", "steady_logistic": "steady"}[mode]
    growth = {"steady_movement": "none", "steady_logistic": "logistic"}.get(mode, b.setup.growth)
    for v in values:
        if axis == "R":
            sub = build(cfg.with_value("kernel.R", float(v)))
        elif axis == "alpha":
            sub = build(cfg.with_value("dynamics.alpha", float(v)))
        else:
            sub = b
        setup = Setup(sub.setup.s, sub.setup.sbar, sub.setup.law, growth, sub.setup.u0,
                      sub.setup.m0, sub.setup.dt_safety)
        alpha = float(v) if axis == "alpha" else cfg["dynamics.alpha"]
        mu = float(v) if axis == "mu" else cfg["dynamics.mu"]
        tasks.append((setup, alpha, mu, solver, cfg["dynamics.t_final"]))
    return tasks


def sweep(b: Built, out: str, axis: str, values, mode: str, workers: int = 1, plot: bool = False):
    points = map_points(sweep_tasks(b, axis, values, mode), workers)
    csvio.emit_report_csv(out, points)
    if plot:
        _plot(out, axis if axis in ("mu", "alpha") else "mu", ["max_u", "total_u"])
    return points


def diagnose(b: Built, out: str):
    """dudmu profile CSV plus a key,value summary CSV next to it."""
    setup, st = b.setup, b.stepper
    law = setup.law
    M = integrate(setup.initial_u())
    mov = solve_movement_steady(b.sbar_field, law, st.alpha, st.mu, M, b.grid)
    d = dmu_steady(mov, b.sbar_field, law, st.alpha, st.mu)
    rows = zip(b.grid.centers, mov.u_inf.values, mov.m_inf.values, d.dudmu.values,
               d.Fu.values, d.Fmu.values)
    csvio.write_table(out, csvio.DMU_HEADER, rows)

    sign = classify_mu0_sign(b.sbar_field, law, st.alpha, M, b.grid)
    eig = principal_eigenpair(setup.s, law.gamma_at_zero, b.grid)
    logi = solve_logistic_steady(setup.s, b.sbar_field, law, st.alpha, st.mu, b.grid)
    mc = mass_comparison(logi.u_star, setup.s)
    summary = [
        ("alpha", st.alpha), ("mu", st.mu), ("M", M), ("K", mov.K), ("dKdmu", d.dKdmu),
        ("dudmu_centre", d.dudmu.values[b.grid.center_index()]),
        ("mu0_sign", sign.sign),
        ("alpha1", math.nan if sign.alpha1 is None else float(sign.alpha1)),
        ("alpha2", math.nan if sign.alpha2 is None else float(sign.alpha2)),
        ("lambda1", eig.value), ("lambda1_lower_bound", eig.lower_bound),
        ("extinction_unstable", eig.extinction_unstable),
        ("logistic_total_u", mc.total_u), ("total_s", mc.total_s),
        ("logistic_exceeds_s", mc.exceeds),
        ("existence_condition", logi.existence.passed),
        ("uniqueness_condition", logi.uniqueness.passed),
    ]
    csvio.write_table(summary_path(out), ("key", "value"), summary)
    return summary


def summary_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".summary.csv"
