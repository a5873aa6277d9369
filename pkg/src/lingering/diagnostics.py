"""Lingering and persistence diagnostics.

* ``dmu_steady``: derivative of the movement-only steady state in the
  forgetting rate, from the implicit-function formulas for F = gamma(m)u - K.
* ``classify_mu0_sign``: sign of that derivative at x = 0, mu = 0.
* ``lingering_sweep``: peak density and mass over a list of mu values.
* ``principal_eigenvalue``: top eigenvalue of gamma0*Lap + s (no flux).
* ``mass_comparison``: total population against total resource.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .dynamics import SimState, StepperConfig, advance, diffusion_rhs, growth_term
from .grid import Field, Grid1D, integrate
from .motility import MotilityLaw, neg_z_gamma_prime
from .steady import MovementSteady, solve_logistic_steady, solve_movement_steady


class DiagnosticError(RuntimeError):
    pass


class DegenerateDerivativeError(DiagnosticError):
    pass


class EigenConvergenceError(DiagnosticError):
    pass


def _vals(f):
    return f.values if hasattr(f, "values") else np.asarray(f, dtype=float)


# --- d u_inf / d mu -------------------------------------------------------------

@dataclass
class DmuProfile:
    dudmu: Field
    dKdmu: float
    Fu: Field
    Fmu: Field


def dmu_steady(st: MovementSteady, sbar, law: MotilityLaw, alpha: float, mu: float) -> DmuProfile:
    grid = st.u_inf.grid
    u, m = st.u_inf.values, st.m_inf.values
    asbar = alpha * _vals(sbar)
    if mu == 0:
        Fu = law._gamma(asbar)
        Fmu = -asbar * law._gamma_prime(asbar)
    else:
        gp = law._gamma_prime(m)
        Fu = law._gamma(m) + asbar * gp * mu * u / (u + mu) ** 2
        Fmu = -asbar * gp * u**2 / (u + mu) ** 2
    if np.any(Fu <= 0):
        bad = int(np.flatnonzero(Fu <= 0)[0])
        raise DegenerateDerivativeError(
            f"dF/du = {Fu[bad]:.3g} <= 0 at x={grid.centers[bad]:.4g}; implicit derivative undefined")
    # h cancels between numerator and denominator
    dK = math.fsum(Fmu / Fu) / math.fsum(1.0 / Fu)
    dudmu = (dK - Fmu) / Fu
    return DmuProfile(Field(grid, dudmu), float(dK), Field(grid, Fu), Field(grid, Fmu))


class Mu0Sign(NamedTuple):
    sign: int
    dKdmu: float
    centre_rate: float
    alpha1: float | None
    alpha2: float | None
    unimodal: bool


def classify_mu0_sign(sbar, law: MotilityLaw, alpha: float, M: float | None = None,
                      grid: Grid1D | None = None) -> Mu0Sign:
    """Sign of d u_inf/d mu at x = 0 and mu = 0.

    The sign is that of dK/dmu|0 - (-alpha sbar(0) gamma'(alpha sbar(0))), where
    dK/dmu|0 is the 1/gamma(alpha sbar)-weighted average of -alpha sbar gamma'(alpha sbar).
    It does not depend on the mass ``M``, which is accepted for symmetry with the solver.
    """
    grid = grid or sbar.grid
    sb = _vals(sbar)
    a = alpha * sb
    w = 1.0 / law._gamma(a)
    rate = -a * law._gamma_prime(a)
    dK = math.fsum(w * rate) / math.fsum(w)
    ic = grid.center_index()
    diff = dK - rate[ic]
    sign = int(np.sign(diff))
    if law.kind == "power":
        z0 = law.z0
        alpha1, alpha2 = float(z0 / sb[ic]), float(z0 / sb[-1])
        z = np.linspace(0.0, 20.0 * max(z0, 1.0), 4001)
        g = neg_z_gamma_prime(law, z)
        peak = int(np.argmax(g))
        unimodal = bool(np.all(np.diff(g[:peak + 1]) > 0) and np.all(np.diff(g[peak:]) < 0))
    else:
        alpha1 = alpha2 = None
        unimodal = False
    return Mu0Sign(sign, float(dK), float(rate[ic]), alpha1, alpha2, unimodal)


# --- sweeps -------------------------------------------------------------------

@dataclass
class Setup:
    """Everything a single run needs apart from (alpha, mu)."""

    s: Field
    sbar: object
    law: MotilityLaw
    growth: str = "none"
    u0: Field | None = None
    m0: Field | None = None
    dt_safety: float = 0.4

    @property
    def grid(self) -> Grid1D:
        return self.s.grid

    def initial_u(self) -> Field:
        return self.u0 if self.u0 is not None else self.s

    def initial_m(self) -> Field:
        return self.m0 if self.m0 is not None else Field(self.grid, np.zeros(self.grid.n_cells))


class PointResult(NamedTuple):
    alpha: float
    mu: float
    max_u: float
    argmax_x: float
    total_u: float
    total_s: float
    K: float
    residual: float
    status: str
    u: np.ndarray | None = None
    m: np.ndarray | None = None


def run_point(setup: Setup, alpha: float, mu: float, mode: str = "steady",
              t_final: float = 500.0, keep_profiles: bool = False) -> PointResult:
    """One (alpha, mu) evaluation; solver failures become a failed row, not an exception."""
    total_s = integrate(setup.s)
    try:
        K = math.nan
        if mode == "steady":
            if setup.growth == "none":
                st = solve_movement_steady(setup.sbar, setup.law, alpha, mu,
                                           integrate(setup.initial_u()), setup.grid)
                u, m, K = st.u_inf.values, st.m_inf.values, st.K
                residual = st.residuals["flux"]
            else:
                st = solve_logistic_steady(setup.s, setup.sbar, setup.law, alpha, mu, setup.grid)
                u, m, residual = st.u_star.values, st.m_star.values, st.residual
        elif mode == "dynamics":
            state = SimState(setup.initial_u(), setup.initial_m(), 0.0, setup.sbar)
            cfg = StepperConfig(t_final=t_final, alpha=alpha, mu=mu, growth=setup.growth,
                                dt_safety=setup.dt_safety)
            res = advance(state, cfg, setup.law, setup.s)
            u, m = res.state.u.values, res.state.m.values
            rhs = diffusion_rhs(res.state.u, res.state.m, setup.law).values
            rhs = rhs + growth_term(res.state.u, setup.s, setup.growth).values
            residual = float(np.max(np.abs(rhs)))
            if setup.growth == "none":
                K = float(np.mean(setup.law._gamma(m) * u))
        else:
            raise ValueError(f"unknown sweep mode {mode!r}")
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return PointResult(alpha, mu, math.nan, math.nan, math.nan, total_s, math.nan, math.nan,
                           f"failed: {type(exc).__name__}")
    i = int(np.argmax(u))
    return PointResult(alpha, mu, float(u[i]), float(setup.grid.centers[i]),
                       integrate((setup.grid, u)), total_s, float(K), float(residual), "ok",
                       u if keep_profiles else None, m if keep_profiles else None)


def _run_point_star(args):
    return run_point(*args)


def map_points(tasks: Sequence[tuple], workers: int = 1) -> list[PointResult]:
    """Evaluate ``run_point(*task)`` for each task, preserving task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [run_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point_star, tasks, chunksize=1))


@dataclass
class LingeringReport:
    alpha: float
    mu_grid: list[float]
    points: list[PointResult] = field(default_factory=list)

    @property
    def max_u(self) -> np.ndarray:
        return np.array([p.max_u for p in self.points])

    @property
    def total_u(self) -> np.ndarray:
        return np.array([p.total_u for p in self.points])

    @property
    def ok(self) -> np.ndarray:
        return np.array([p.status == "ok" for p in self.points])

    def _argmax(self, values) -> float:
        vals = np.where(self.ok, values, -np.inf)
        return float(self.mu_grid[int(np.argmax(vals))])

    @property
    def argmax_mu_peak(self) -> float:
        return self._argmax(self.max_u)

    @property
    def argmax_mu_mass(self) -> float:
        return self._argmax(self.total_u)

    def monotone_flag(self, slack: float = 1e-6) -> bool:
        """max_u nonincreasing in mu, allowing ``slack`` per step."""
        mx = self.max_u[self.ok]
        return bool(np.all(np.diff(mx) <= slack))

    @property
    def interior_max(self) -> bool:
        i = int(np.argmax(np.where(self.ok, self.max_u, -np.inf)))
        return 0 < i < len(self.points) - 1


def lingering_sweep(mu_values, alpha: float, setup: Setup, mode: str = "steady",
                    t_final: float = 500.0, workers: int = 1) -> LingeringReport:
    mus = [float(v) for v in mu_values]
    if not mus:
        raise ValueError("mu_values is empty")
    if any(b < a for a, b in zip(mus, mus[1:])):
        raise ValueError("mu_values must be sorted")
    points = map_points([(setup, alpha, mu, mode, t_final) for mu in mus], workers)
    return LingeringReport(alpha, mus, points)


# --- principal eigenvalue -------------------------------------------------------

class EigenResult(NamedTuple):
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    lower_bound: float

    @property
    def extinction_unstable(self) -> bool:
        return self.value > 0


def principal_eigenpair(s, gamma0: float, grid: Grid1D | None = None, tol: float = 1e-10,
                        maxiter: int = 5_000_000, kernels=None) -> EigenResult:
    """Top eigenpair of gamma0*L_N + diag(s) by shifted power iteration.

    Stops on the residual ||A v - rho v||_2 <= sqrt(tol) * 1e-2; for a symmetric
    matrix the eigenvalue error is then below residual**2 / gap.
    """
    kernels = kernels or _backend.kernels
    grid = grid or s.grid
    sv = np.ascontiguousarray(_vals(s), dtype=float)
    if np.any(sv <= 0):
        raise ValueError("s must be positive")
    h2 = grid.h * grid.h
    off = gamma0 / h2
    diag = sv - 2.0 * off
    diag[0] += off
    diag[-1] += off
    diag = np.ascontiguousarray(diag)
    # Gershgorin: spectrum of A lies above min(s) - 4 gamma0/h^2
    shift = max(0.0, 4.0 * off - float(sv.min()))
    v = sv.copy()
    rho, it, res = kernels.power_iteration(diag, off, v, shift, math.sqrt(tol) * 1e-2,
                                           max(1, int(maxiter)))
    if res > math.sqrt(tol) * 1e-2:
        raise EigenConvergenceError(
            f"power iteration stopped after {it} iterations with residual {res:.3g}")
    lower = integrate((grid, sv)) / grid.length
    return EigenResult(float(rho), v, int(it), float(res), lower)


def principal_eigenvalue(s, gamma0: float, grid: Grid1D | None = None, tol: float = 1e-10) -> float:
    return principal_eigenpair(s, gamma0, grid, tol).value


class MassComparison(NamedTuple):
    total_u: float
    total_s: float
    exceeds: bool


def mass_comparison(u, s) -> MassComparison:
    tu, ts = integrate(u), integrate(s)
    return MassComparison(tu, ts, tu > ts)
