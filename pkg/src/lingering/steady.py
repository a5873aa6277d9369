"""Direct solvers for the stationary problems.

Movement only: gamma(m)u = K in every cell, m = alpha*sbar*u/(u+mu), and
total mass M.  Solved by nested bisection (per-cell u for a trial K, then K
for the mass), both brackets being exact.

Logistic: with U = gamma(m)u the steady state solves the Neumann problem
Lap U + u(s - u) = 0, u = U/gamma(m(U)), where m(U) is the root of
m = alpha*sbar*U/(U + mu*gamma(m)).  Solved by damped Newton on the
discrete residual with a pseudo-time fallback.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .grid import Field, Grid1D, integrate
from .motility import (ConditionCheck, MotilityLaw, check_existence_condition,
                       check_uniqueness_condition)

log = logging.getLogger(__name__)


class SteadyStateError(RuntimeError):
    pass


class MultipleRootsError(SteadyStateError):
    """u -> gamma(m(u)) u is not monotone on the bracket; the root choice would be arbitrary."""


class NoSignChangeError(SteadyStateError):
    pass


class DivergenceError(SteadyStateError):
    pass


def _vals(f):
    return f.values if hasattr(f, "values") else np.asarray(f, dtype=float)


def _bisect(fun, lo, hi, max_iter=200):
    """Vectorised bisection for increasing ``fun`` with fun(lo) <= 0 <= fun(hi).

    Runs until the brackets stop shrinking, i.e. to full double precision.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        pos = fun(mid) >= 0
        hi = np.where(active & pos, mid, hi)
        lo = np.where(active & ~pos, mid, lo)
    return 0.5 * (lo + hi), it


# --- movement-only ------------------------------------------------------------

@dataclass
class MovementSteady:
    u_inf: Field
    m_inf: Field
    K: float
    M: float
    residuals: dict = field(default_factory=dict)
    iterations: int = 0


def memory_of_density(u, asbar, mu):
    """m = alpha*sbar*u/(u+mu); exactly alpha*sbar when mu = 0."""
    u = np.asarray(u, dtype=float)
    if mu == 0:
        return np.broadcast_to(asbar, u.shape).astype(float)
    return asbar * u / (u + mu)


def _check_monotone(law, asbar, mu, lo, hi, samples=65):
    t = np.linspace(0.0, 1.0, samples)[:, None]
    u = lo[None, :] + t * (hi - lo)[None, :]
    g = law._gamma(memory_of_density(u, asbar[None, :], mu)) * u
    drop = np.diff(g, axis=0)
    tol = 1e-13 * np.abs(g[1:])
    bad = np.flatnonzero((drop < -tol).any(axis=0))
    if bad.size:
        raise MultipleRootsError(
            f"u -> gamma(m(u))u decreases inside the bracket at {bad.size} cell(s) "
            f"(first index {bad[0]}); the flux equation has several roots there")


def solve_movement_steady(sbar, law: MotilityLaw, alpha: float, mu: float, M: float,
                          grid: Grid1D | None = None) -> MovementSteady:
    """Steady state of the movement-only system with total mass ``M``."""
    if not M > 0:
        raise ValueError(f"mass M must be positive, got {M}")
    if mu < 0 or alpha < 0:
        raise ValueError("alpha and mu must be nonnegative")
    grid = grid or sbar.grid
    sb = _vals(sbar)
    asbar = alpha * sb
    h, length = grid.h, grid.length
    g0 = law.gamma_at_zero
    g_low = law._gamma(asbar)           # gamma(alpha*sbar_i), smallest attainable motility

    def mass_of(u):
        return h * np.sum(u)

    if mu == 0:
        # u_i = K/gamma(alpha sbar_i) exactly; mass is linear in K
        K = M / (h * np.sum(1.0 / g_low))
        u = K / g_low
        iters = 0
    else:
        def density_for(K):
            lo = np.full_like(sb, K / g0)
            hi = K / g_low
            u, it = _bisect(lambda v: law._gamma(asbar * v / (v + mu)) * v - K, lo, hi)
            return u, it

        K_lo = law._gamma(asbar.max()) * M / length
        K_hi = g0 * M / length
        iters = 0
        # mass(K) is increasing, mass(K_lo) <= M <= mass(K_hi)
        for iters in range(1, 200):
            K = 0.5 * (K_lo + K_hi)
            if not (K_lo < K < K_hi):
                break
            u, _ = density_for(K)
            if mass_of(u) >= M:
                K_hi = K
            else:
                K_lo = K
        K = 0.5 * (K_lo + K_hi)
        u, _ = density_for(K)
        _check_monotone(law, asbar, mu, np.full_like(sb, K / g0), K / g_low)

    m = memory_of_density(u, asbar, mu)
    P = law._gamma(m) * u
    residuals = {
        "flux": float(np.max(np.abs(P - K)) / K),
        "memory": float(np.max(np.abs((asbar - m) * u - mu * m))),
        "mass": abs(integrate((grid, u)) - M) / M,
    }
    return MovementSteady(Field(grid, u, nonnegative=True), Field(grid, m, nonnegative=True),
                          float(K), float(M), residuals, iters)


# --- logistic -----------------------------------------------------------------

def solve_memory_given_U(U, sbar_x, law: MotilityLaw, alpha: float, mu: float):
    """Root m in [0, alpha*sbar] of m - alpha*sbar*U/(U + mu*gamma(m)).

    Works elementwise on arrays.  U = 0 gives m = 0; mu = 0 (with U > 0) gives alpha*sbar.
    """
    U = np.asarray(U, dtype=float)
    a = alpha * np.asarray(sbar_x, dtype=float) + np.zeros_like(U)
    if np.any(U < 0):
        raise ValueError("U must be nonnegative")
    if mu == 0:
        if np.any(U == 0):
            raise ValueError("mu = 0 requires U > 0")
        out = a.copy()
        return float(out) if out.ndim == 0 else out

    def F(m):
        return m - a * U / (U + mu * law._gamma(m))

    lo, hi = np.zeros_like(a), a.copy()
    if np.any(F(lo) > 0) or np.any(F(hi) < 0):
        raise NoSignChangeError("memory equation has no sign change on [0, alpha*sbar]")
    m, _ = _bisect(F, lo, hi)
    m = np.where(U == 0, 0.0, m)
    return float(m) if m.ndim == 0 else m


def neumann_laplacian_bands(n: int, h: float) -> np.ndarray:
    """No-flux Laplacian in ``solve_banded`` (1, 1) layout."""
    ab = np.zeros((3, n))
    ab[0, 1:] = 1.0 / h**2
    ab[2, :-1] = 1.0 / h**2
    ab[1, :] = -2.0 / h**2
    ab[1, 0] = ab[1, -1] = -1.0 / h**2
    return ab


def apply_neumann_laplacian(U: np.ndarray, h: float) -> np.ndarray:
    flux = np.zeros(U.size + 1)
    flux[1:-1] = (U[1:] - U[:-1]) / h
    return (flux[1:] - flux[:-1]) / h


@dataclass
class LogisticSteady:
    u_star: Field
    m_star: Field
    U_star: Field
    iterations: int
    residual: float
    method: str
    existence: ConditionCheck
    uniqueness: ConditionCheck


class _LogisticProblem:
    def __init__(self, s, sbar, law, alpha, mu, grid):
        self.s = _vals(s)
        self.sb = _vals(sbar)
        self.law, self.alpha, self.mu, self.grid = law, alpha, mu, grid
        self.asbar = alpha * self.sb

    def memory(self, U):
        return solve_memory_given_U(U, self.sb, self.law, self.alpha, self.mu)

    def residual(self, U):
        m = self.memory(U)
        u = U / self.law._gamma(m)
        return apply_neumann_laplacian(U, self.grid.h) + u * (self.s - u), u, m

    def reaction_derivative(self, U, u, m):
        """d/dU of u(s - u) with m = m(U) differentiated implicitly."""
        law, mu = self.law, self.mu
        g = law._gamma(m)
        gp = law._gamma_prime(m)
        if mu == 0:
            dm = np.zeros_like(U)
        else:
            den = (U + mu * g) ** 2
            F_m = 1.0 + self.asbar * U * mu * gp / den
            dm = self.asbar * mu * g / (den * F_m)
        du = 1.0 / g - U * gp / g**2 * dm
        return (self.s - 2.0 * u) * du


def logistic_jacobian(s, sbar, law, alpha, mu, grid, U):
    """Tridiagonal Jacobian of the discrete residual in banded (1, 1) layout."""
    prob = _LogisticProblem(s, sbar, law, alpha, mu, grid)
    _, u, m = prob.residual(U)
    ab = neumann_laplacian_bands(grid.n_cells, grid.h)
    ab[1] += prob.reaction_derivative(U, u, m)
    return ab


def _newton(prob, U, tol, max_iter):
    h = prob.grid.h
    lap = neumann_laplacian_bands(prob.grid.n_cells, h)
    R, u, m = prob.residual(U)
    rnorm = np.max(np.abs(R))
    for it in range(1, max_iter + 1):
        if rnorm <= tol:
            return U, rnorm, it - 1, True
        ab = lap.copy()
        ab[1] += prob.reaction_derivative(U, u, m)
        try:
            delta = solve_banded((1, 1), ab, -R)
        except (np.linalg.LinAlgError, ValueError):
            return U, rnorm, it, False
        step = 1.0
        for _ in range(40):
            trial = U + step * delta
            if np.all(trial > 0):
                R_t, u_t, m_t = prob.residual(trial)
                r_t = np.max(np.abs(R_t))
                if r_t < (1.0 - 1e-4 * step) * rnorm or r_t <= tol:
                    break
            step *= 0.5
        else:
            return U, rnorm, it, False
        U, R, u, m, rnorm = trial, R_t, u_t, m_t, r_t
    return U, rnorm, max_iter, rnorm <= tol


def solve_logistic_steady(s, sbar, law: MotilityLaw, alpha: float, mu: float,
                          grid: Grid1D | None = None, initial_U=None, tol: float = 1e-10,
                          max_iter: int = 100, pseudo_time_limit: float = 5000.0
                          ) -> LogisticSteady:
    """Positive steady state of the logistic system.

    ``initial_U`` defaults to gamma(m(s))*s with m(s) = alpha*sbar*s/(s+mu).
    """
    grid = grid or s.grid
    sv, sb = _vals(s), _vals(sbar)
    if np.any(sv <= 0):
        raise ValueError("the resource s must be strictly positive")
    if mu < 0 or alpha < 0:
        raise ValueError("alpha and mu must be nonnegative")
    M_cond = alpha * float(np.max(sb))
    existence = check_existence_condition(law, M_cond)
    uniqueness = check_uniqueness_condition(law, M_cond, mu, float(np.max(sv)))
    if not existence.passed:
        warnings.warn(
            f"existence condition sup|gamma'/gamma| < 4/M fails (margin {existence.margin:.3g}); "
            "it is sufficient only, proceeding", stacklevel=2)

    prob = _LogisticProblem(sv, sb, law, alpha, mu, grid)
    if initial_U is None:
        U0 = law._gamma(memory_of_density(sv, prob.asbar, mu)) * sv
    else:
        U0 = np.array(_vals(initial_U), dtype=float)
    U, rnorm, iters, ok = _newton(prob, U0, tol, max_iter)
    method = "newton"
    if not ok:
        log.info("Newton stalled at residual %.3g; falling back to pseudo-time", rnorm)
        U, rnorm, extra = _pseudo_time(prob, U0 if not np.all(U > 0) else U, tol,
                                       pseudo_time_limit)
        iters += extra
        method = "pseudo-time+newton"
        if rnorm > tol:
            raise DivergenceError(
                f"logistic steady solve failed: residual {rnorm:.3g} > {tol:g} after Newton "
                f"and pseudo-time (alpha={alpha}, mu={mu})")
    m = prob.memory(U)
    u = U / law._gamma(m)
    return LogisticSteady(Field(grid, u, nonnegative=True), Field(grid, m, nonnegative=True),
                          Field(grid, U, nonnegative=True), iters, float(rnorm), method,
                          existence, uniqueness)


def _pseudo_time(prob, U, tol, t_limit):
    from .dynamics import SimState, StepperConfig, advance

    grid, law = prob.grid, prob.law
    m = prob.memory(U)
    state = SimState(Field(grid, U / law._gamma(m)), Field(grid, m), 0.0, Field(grid, prob.sb))
    s = Field(grid, prob.s)
    t, chunk, iters = 0.0, 50.0, 0
    rnorm = np.inf
    while t < t_limit:
        t += chunk
        cfg = StepperConfig(t_final=t, alpha=prob.alpha, mu=prob.mu, growth="logistic")
        state = advance(state, cfg, law, s).state
        Ut = law._gamma(state.m.values) * state.u.values
        Un, rnorm, it, ok = _newton(prob, Ut, tol, 50)
        iters += it
        if ok:
            return Un, rnorm, iters
    return Ut, rnorm, iters
