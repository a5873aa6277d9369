"""Perception kernels and the perceived landscape ``sbar = K * s``.

Both the window normaliser ``Z_R`` and ``sbar`` use the same midpoint
weights ``h * J_R(x_i - y_j)`` restricted to in-domain centres, so in the
normalized mode the weights of every row sum to one discretely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid1D

SHAPES = ("bump", "top_hat")
MODES = ("truncated", "normalized")


class KernelError(ValueError):
    pass


class UnresolvedKernelError(KernelError):
    """Kernel radius spans fewer than two cells."""


@dataclass(frozen=True)
class KernelShape:
    variant: str
    R: float

    def __post_init__(self):
        if self.variant not in SHAPES:
            raise KernelError(f"unknown kernel shape {self.variant!r}; expected one of {SHAPES}")
        if not (math.isfinite(self.R) and self.R > 0):
            raise KernelError(f"kernel radius must be positive, got {self.R!r}")

    def __call__(self, r):
        return kernel_value(self, r)

    def mass(self) -> float:
        """I_R, the integral of J_R over the whole line."""
        if self.variant == "top_hat":
            return 2.0 * self.R
        from scipy.integrate import quad

        val, _ = quad(lambda r: float(kernel_value(self, r)), -self.R, self.R,
                      epsabs=1e-14, epsrel=1e-13, limit=200)
        return val


def kernel_value(shape: KernelShape, r):
    """J_R(r); exactly zero for |r| >= R."""
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) < shape.R
    if shape.variant == "top_hat":
        out = np.where(inside, 1.0, 0.0)
    else:
        q = np.where(inside, (r / shape.R) ** 2, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(inside, np.exp(-1.0 / (1.0 - q)), 0.0)
    return out if out.ndim else float(out)


def _check_resolved(shape: KernelShape, grid: Grid1D):
    if shape.R < 2.0 * grid.h:
        raise UnresolvedKernelError(
            f"kernel radius R={shape.R} is below two cell widths (2h={2 * grid.h:.6g})"
        )
    if shape.R >= 2.0 * grid.ell:
        raise KernelError(
            f"kernel radius R={shape.R} must be smaller than the domain diameter {2 * grid.ell}"
        )


def _weights(shape: KernelShape, grid: Grid1D) -> np.ndarray:
    # J_R evaluated on cell-centre offsets 0, h, 2h, ... inside the support
    w = int(math.ceil(shape.R / grid.h))
    offsets = np.arange(-w, w + 1) * grid.h
    return grid.h * kernel_value(shape, offsets)


def _window_sum(values: np.ndarray, stencil: np.ndarray) -> np.ndarray:
    # direct correlation with zero padding: cells outside the domain contribute nothing
    n = values.shape[0]
    w = (stencil.shape[0] - 1) // 2
    padded = np.zeros(n + 2 * w)
    padded[w:w + n] = values
    out = np.zeros(n)
    for j, c in enumerate(stencil):
        if c != 0.0:
            out += c * padded[j:j + n]
    return out


def compute_zr(shape: KernelShape, grid: Grid1D) -> Field:
    _check_resolved(shape, grid)
    z = _window_sum(np.ones(grid.n_cells), _weights(shape, grid))
    return Field(grid, z, nonnegative=True)


@dataclass(frozen=True)
class PerceivedField:
    sbar: Field
    z_r: Field
    mode: str
    shape: KernelShape

    @property
    def values(self) -> np.ndarray:
        return self.sbar.values

    @property
    def grid(self) -> Grid1D:
        return self.sbar.grid


def perceive(s: Field, shape: KernelShape, mode: str) -> PerceivedField:
    if mode not in MODES:
        raise KernelError(f"unknown perception mode {mode!r}; expected one of {MODES}")
    grid = s.grid
    _check_resolved(shape, grid)
    stencil = _weights(shape, grid)
    z = _window_sum(np.ones(grid.n_cells), stencil)
    raw = _window_sum(s.values, stencil)
    sbar = raw / z if mode == "normalized" else raw
    if mode == "normalized":
        # weights sum to one per row; pin the average into [min s, max s] against rounding
        sbar = np.clip(sbar, s.values.min(), s.values.max())
    return PerceivedField(Field(grid, sbar, nonnegative=True), Field(grid, z, nonnegative=True),
                          mode, shape)
