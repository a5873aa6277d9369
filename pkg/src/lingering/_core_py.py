"""Pure-numpy versions of the kernels in ``_core.pyx`` (same signatures and results)."""

import numpy as np

STATUS_OK = 0
STATUS_NEGATIVE = 1
STATUS_BLOWUP = 2

CLIP_TOL = 1e-13
BLOWUP = 1e6

BACKEND = "python"


def _gamma(m, kind, c, k, g0):
    if kind == 1:
        return np.full_like(m, g0)
    inv = 1.0 / (m + c)
    if k == 2.0:
        return inv * inv
    if k == 1.0:
        return inv
    return inv ** k


def advance_steps(u, m, asbar, s, kind, c, k, g0, mu, dt, h, nsteps, logistic, work):
    n = u.shape[0]
    r = dt / (h * h)
    for step in range(nsteps):
        p = _gamma(m, kind, c, k, g0) * u
        work[0] = 0.0
        work[n] = 0.0
        np.subtract(p[1:], p[:-1], out=work[1:n])
        if logistic:
            new = u + dt * u * (s - u)
        else:
            new = u.copy()
        new += r * (work[1:] - work[:-1])
        neg = new < 0.0
        if neg.any():
            hard = np.flatnonzero(new < -CLIP_TOL)
            if hard.size:
                return STATUS_NEGATIVE, step, int(hard[0])
            new[neg] = 0.0
        if not np.all(new <= BLOWUP):
            return STATUS_BLOWUP, step, int(np.flatnonzero(~(new <= BLOWUP))[0])
        u[:] = new
        lam = u + mu
        live = lam > 0.0
        if live.all():
            target = asbar * u / lam
            m[:] = target + (m - target) * np.exp(-lam * dt)
        else:
            lv = lam[live]
            target = asbar[live] * u[live] / lv
            m[live] = target + (m[live] - target) * np.exp(-lv * dt)
    return STATUS_OK, nsteps, -1


def power_iteration(diag, off, v, shift, res_tol, maxiter):
    v /= np.linalg.norm(v)
    rho, res, it = 0.0, np.inf, 0
    for it in range(1, maxiter + 1):
        w = diag * v
        w[1:] += off * v[:-1]
        w[:-1] += off * v[1:]
        rho = float(v @ w)
        res = float(np.linalg.norm(w - rho * v))
        if res <= res_tol:
            break
        w += shift * v
        v[:] = w / np.linalg.norm(w)
    return rho, it, res
