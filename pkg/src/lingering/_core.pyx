# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: the explicit stepper and the shifted power iteration."""

from libc.math cimport exp, pow, sqrt
import numpy as np

DEF STATUS_OK = 0
DEF STATUS_NEGATIVE = 1
DEF STATUS_BLOWUP = 2

cdef double CLIP_TOL = 1e-13
cdef double BLOWUP = 1e6

BACKEND = "compiled"


cdef inline double _exp_neg(double x) nogil:
    # exp(-x); Taylor to degree 6 below 1e-3 (truncation < 2e-25), libm otherwise
    if x < 1e-3:
        return 1.0 - x * (1.0 - x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0
               - x * (1.0 / 120.0 - x * (1.0 / 720.0))))))
    return exp(-x)


cdef inline double _gamma(double z, int kind, double c, double k, double g0) nogil:
    cdef double inv
    if kind == 1:
        return g0
    inv = 1.0 / (z + c)
    if k == 2.0:
        return inv * inv
    if k == 1.0:
        return inv
    return pow(inv, k)


def advance_steps(double[::1] u, double[::1] m, const double[::1] asbar,
                  const double[::1] s, int kind, double c, double k, double g0,
                  double mu, double dt, double h, long nsteps, bint logistic,
                  double[::1] work):
    """Advance (u, m) in place by ``nsteps`` steps of size ``dt``.

    ``work`` is scratch of length n + 1 holding interface fluxes.
    Returns (status, steps_done, index) where index is the offending cell on failure.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef long step
    cdef double lam, target, ui, p_prev, p_cur
    cdef double r = dt / (h * h)
    cdef double decay_mu = exp(-mu * dt)
    cdef int status = STATUS_OK
    cdef Py_ssize_t bad = -1

    with nogil:
        for step in range(nsteps):
            # interface differences of P = gamma(m) u; work[i] sits between cells i-1 and i
            work[0] = 0.0
            work[n] = 0.0
            p_prev = _gamma(m[0], kind, c, k, g0) * u[0]
            for i in range(1, n):
                p_cur = _gamma(m[i], kind, c, k, g0) * u[i]
                work[i] = p_cur - p_prev
                p_prev = p_cur
            for i in range(n):
                ui = u[i]
                if logistic:
                    ui = ui + dt * ui * (s[i] - ui)
                ui = ui + r * (work[i + 1] - work[i])
                if ui < 0.0:
                    if ui < -CLIP_TOL:
                        status = STATUS_NEGATIVE
                        bad = i
                        break
                    ui = 0.0
                if not (ui <= BLOWUP):
                    status = STATUS_BLOWUP
                    bad = i
                    break
                u[i] = ui
            if status != STATUS_OK:
                break
            for i in range(n):
                lam = u[i] + mu
                if lam > 0.0:
                    target = asbar[i] * u[i] / lam
                    m[i] = target + (m[i] - target) * (decay_mu * _exp_neg(u[i] * dt))
    if status != STATUS_OK:
        return status, step, bad
    return status, nsteps, bad


def power_iteration(const double[::1] diag, double off, double[::1] v,
                    double shift, double res_tol, long maxiter):
    """Top eigenpair of the symmetric tridiagonal matrix tridiag(off, diag, off).

    Iterates on A + shift*I (shift makes it positive semidefinite) and stops when
    the 2-norm residual ||A v - rho v|| drops below ``res_tol``; ``v`` is
    overwritten with the unit eigenvector.  Returns (rho, iterations, residual).
    """
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef long it
    cdef double norm, rho, res, av
    cdef double[::1] w = np.empty(n)

    norm = 0.0
    for i in range(n):
        norm += v[i] * v[i]
    norm = sqrt(norm)
    for i in range(n):
        v[i] /= norm

    rho = 0.0
    res = 1e300
    with nogil:
        for it in range(1, maxiter + 1):
            # w = A v
            for i in range(n):
                av = diag[i] * v[i]
                if i > 0:
                    av += off * v[i - 1]
                if i < n - 1:
                    av += off * v[i + 1]
                w[i] = av
            rho = 0.0
            for i in range(n):
                rho += v[i] * w[i]
            res = 0.0
            for i in range(n):
                res += (w[i] - rho * v[i]) * (w[i] - rho * v[i])
            res = sqrt(res)
            if res <= res_tol:
                break
            norm = 0.0
            for i in range(n):
                w[i] += shift * v[i]
                norm += w[i] * w[i]
            norm = sqrt(norm)
            for i in range(n):
                v[i] = w[i] / norm
    return rho, it, res
