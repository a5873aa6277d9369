"""Explicit time integration of the movement-only and logistic systems.

Each step is operator-split: u takes an explicit Euler step of the
conservative no-flux scheme for Lap(gamma(m) u) (plus growth), then m is
advanced exactly for the frozen updated u.  The step loop itself runs in
the kernel selected by :mod:`lingering._backend`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .grid import Field, integrate
from .motility import MotilityLaw
from .perception import PerceivedField

GROWTH_KINDS = ("none", "logistic")


class DynamicsError(RuntimeError):
    pass


class NumericalBlowUp(DynamicsError):
    """The density left the admissible range (overflow, NaN, or a real undershoot)."""


class NegativeDensityError(NumericalBlowUp):
    pass


@dataclass(frozen=True)
class StepperConfig:
    t_final: float
    alpha: float
    mu: float
    growth: str = "none"
    dt_safety: float = 0.4
    record_every: float | None = None

    def __post_init__(self):
        if not (0 < self.dt_safety <= 1):
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if not (math.isfinite(self.t_final) and self.t_final > 0):
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.alpha < 0 or self.mu < 0:
            raise ValueError("alpha and mu must be nonnegative")
        if self.growth not in GROWTH_KINDS:
            raise ValueError(f"growth must be one of {GROWTH_KINDS}, got {self.growth!r}")
        if self.record_every is not None and not self.record_every > 0:
            raise ValueError("record_every must be positive")


def _values(f):
    if isinstance(f, (Field, PerceivedField)):
        return f.values
    return np.asarray(f, dtype=float)


@dataclass
class SimState:
    u: Field
    m: Field
    t: float
    sbar: PerceivedField | Field
    initial_mass: float = field(default=float("nan"))

    def __post_init__(self):
        if math.isnan(self.initial_mass):
            self.initial_mass = integrate(self.u)

    @property
    def mass(self) -> float:
        return integrate(self.u)


@dataclass(frozen=True)
class Snapshot:
    t: float
    u: np.ndarray
    m: np.ndarray


@dataclass
class RunResult:
    state: SimState
    snapshots: list[Snapshot]
    steps: int
    dt_max: float
    backend: str


def diffusion_rhs(u: Field, m: Field, law: MotilityLaw) -> Field:
    """Conservative no-flux discretisation of Lap(gamma(m) u)."""
    if u.grid is not m.grid and u.grid != m.grid:
        raise ValueError("u and m live on different grids")
    h = u.grid.h
    p = law._gamma(m.values) * u.values
    flux = np.zeros(p.size + 1)
    flux[1:-1] = (p[1:] - p[:-1]) / h
    return Field(u.grid, (flux[1:] - flux[:-1]) / h)


def memory_step(m: Field, u: Field, sbar, alpha: float, mu: float, dt: float) -> Field:
    """Exact update of dm/dt = (alpha*sbar - m) u - mu m with u frozen over ``dt``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    uv, mv = u.values, m.values
    lam = uv + mu
    out = mv.copy()
    live = lam > 0
    target = alpha * _values(sbar)[live] * uv[live] / lam[live]
    with np.errstate(over="ignore"):
        decay = np.exp(-lam[live] * dt)
    out[live] = target + (mv[live] - target) * decay
    return Field(m.grid, out)


def growth_term(u: Field, s: Field, kind: str) -> Field:
    if kind not in GROWTH_KINDS:
        raise ValueError(f"growth must be one of {GROWTH_KINDS}, got {kind!r}")
    if kind == "none":
        return Field(u.grid, np.zeros_like(u.values))
    return Field(u.grid, u.values * (s.values - u.values))


def max_stable_dt(h: float, law: MotilityLaw, dt_safety: float) -> float:
    """dt_safety * h^2 / (2 gamma(0)); gamma(0) bounds the diffusivity for m >= 0."""
    return dt_safety * h * h / (2.0 * law.gamma_at_zero)


def initial_state(u0: Field, m0: Field, sbar) -> SimState:
    return SimState(Field(u0.grid, u0.values.copy(), nonnegative=True),
                    Field(m0.grid, m0.values.copy(), nonnegative=True), 0.0, sbar)


def _checkpoints(t0: float, t_final: float, every: float | None) -> list[float]:
    if every is None:
        return [t_final]
    n = int(math.floor((t_final - t0) / every + 1e-9))
    pts = [t0 + k * every for k in range(1, n + 1)]
    if not pts or t_final - pts[-1] > 1e-9 * max(1.0, t_final):
        pts.append(t_final)
    else:
        pts[-1] = t_final
    return pts


def advance(state: SimState, cfg: StepperConfig, law: MotilityLaw, s: Field,
            kernels=None) -> RunResult:
    """Integrate ``state`` from its time up to ``cfg.t_final``.

    Snapshots are taken at the start, every ``cfg.record_every`` and at the end.
    ``kernels`` overrides the backend module (``_backend.python`` or ``_backend.compiled``).
    """
    kernels = kernels or _backend.kernels
    grid = state.u.grid
    u = np.ascontiguousarray(state.u.values, dtype=float).copy()
    m = np.ascontiguousarray(state.m.values, dtype=float).copy()
    sbar = _values(state.sbar)
    asbar = np.ascontiguousarray(cfg.alpha * sbar, dtype=float)
    if np.any(u < 0) or np.any(m < 0):
        raise ValueError("initial u and m must be nonnegative")
    if np.any(m > asbar * (1 + 1e-12)):
        warnings.warn("m0 exceeds alpha*sbar somewhere; the memory band then starts above alpha*sbar",
                      stacklevel=2)

    kind = 1 if law.kind == "constant" else 0
    logistic = cfg.growth == "logistic"
    dt_max = max_stable_dt(grid.h, law, cfg.dt_safety)
    work = np.zeros(grid.n_cells + 1)
    svals = np.ascontiguousarray(s.values, dtype=float)

    snaps = [Snapshot(state.t, u.copy(), m.copy())]
    t = state.t
    total = 0
    for t_next in _checkpoints(state.t, cfg.t_final, cfg.record_every):
        span = t_next - t
        if span <= 0:
            continue
        nsteps = max(1, int(math.ceil(span / dt_max)))
        dt = span / nsteps
        status, done, bad = kernels.advance_steps(
            u, m, asbar, svals, kind, law.c, law.k, law.gamma0, cfg.mu, dt, grid.h,
            nsteps, logistic, work)
        total += done
        if status == 1:
            raise NegativeDensityError(
                f"u went negative beyond rounding at x={grid.centers[bad]:.6g}, "
                f"t={t + done * dt:.6g}")
        if status == 2:
            raise NumericalBlowUp(
                f"|u| exceeded 1e6 or became NaN at x={grid.centers[bad]:.6g}, t={t + done * dt:.6g}")
        t = t_next
        snaps.append(Snapshot(t, u.copy(), m.copy()))

    new_state = SimState(Field(grid, u, nonnegative=True), Field(grid, m, nonnegative=True),
                         t, state.sbar, state.initial_mass)
    return RunResult(new_state, snaps, total, dt_max, kernels.BACKEND)
