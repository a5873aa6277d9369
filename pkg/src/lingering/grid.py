"""Uniform cell-centred grid on (-ell, ell) and the resource landscapes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

MIN_CELLS = 8
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class GridError(ValueError):
    pass


class LandscapeError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    ell: float
    n_cells: int
    h: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = 2.0 * self.ell / self.n_cells
        centers = -self.ell + (np.arange(self.n_cells) + 0.5) * h
        centers.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "centers", centers)

    @property
    def length(self) -> float:
        return 2.0 * self.ell

    def center_index(self) -> int:
        """Index of the cell whose centre is closest to x = 0 (left one on ties)."""
        return int(np.argmin(np.abs(self.centers)))


def make_grid(ell: float, n_cells: int) -> Grid1D:
    if not (isinstance(ell, (int, float)) and math.isfinite(ell)) or ell <= 0:
        raise GridError(f"ell must be a positive finite number, got {ell!r}")
    if int(n_cells) != n_cells or n_cells < MIN_CELLS:
        raise GridError(f"n_cells must be an integer >= {MIN_CELLS}, got {n_cells!r}")
    return Grid1D(float(ell), int(n_cells))


class Field:
    """Values sampled at the cell centres of a grid."""

    __slots__ = ("grid", "values", "nonnegative")

    def __init__(self, grid: Grid1D, values, nonnegative: bool = False):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_cells,):
            raise GridError(
                f"field has shape {values.shape}, grid expects ({grid.n_cells},)"
            )
        if nonnegative and np.any(values < 0):
            raise GridError("field tagged nonnegative has negative entries")
        self.grid = grid
        self.values = values
        self.nonnegative = nonnegative

    def __len__(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"Field(n={len(self)}, min={self.values.min():.6g}, max={self.values.max():.6g})"

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.nonnegative)


def integrate(f) -> float:
    """Midpoint rule ``h * sum(values)``; accepts a Field or (grid, values)."""
    if isinstance(f, Field):
        grid, values = f.grid, f.values
    else:
        grid, values = f
        values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise GridError("cannot integrate a field with non-finite values")
    return float(grid.h * math.fsum(values))


# --- landscapes -------------------------------------------------------------

LANDSCAPE_KINDS = ("constant", "gaussian", "sharp_gaussian", "asymmetric", "custom")

_DEFAULTS = {
    "constant": {"c": 1.0},
    # amplitude * exp(-rate * x^2) + offset
    "gaussian": {"amplitude": INV_SQRT_2PI, "rate": 0.5, "offset": 0.1},
    "sharp_gaussian": {"amplitude": INV_SQRT_2PI, "rate": 5.0, "offset": 0.1},
    # a1*exp(-(x-x1)^2/(2 w1^2)) + a2*exp(-(x-x2)^2/(2 w2^2)) + offset
    "asymmetric": {
        "a1": 0.5, "x1": -1.5, "w1": 0.8,
        "a2": 0.25, "x2": 2.0, "w2": 0.6,
        "offset": 0.1,
    },
    "custom": {},
}


@dataclass(frozen=True)
class LandscapeSpec:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in LANDSCAPE_KINDS:
            raise LandscapeError(
                f"unknown landscape kind {self.kind!r}; expected one of {LANDSCAPE_KINDS}"
            )
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise LandscapeError(
                f"landscape kind {self.kind!r} has no parameter(s) {sorted(unknown)}"
            )
        if self.kind == "custom" and self.table is None:
            raise LandscapeError("custom landscape needs a tabulated value list")

    def resolved(self) -> dict[str, float]:
        out = dict(_DEFAULTS[self.kind])
        out.update({k: float(v) for k, v in self.params.items()})
        return out

    def __call__(self, x):
        """Evaluate the analytic landscape at arbitrary points (not for ``custom``)."""
        p = self.resolved()
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, p["c"])
        if self.kind in ("gaussian", "sharp_gaussian"):
            return p["amplitude"] * np.exp(-p["rate"] * x * x) + p["offset"]
        if self.kind == "asymmetric":
            g1 = p["a1"] * np.exp(-((x - p["x1"]) ** 2) / (2 * p["w1"] ** 2))
            g2 = p["a2"] * np.exp(-((x - p["x2"]) ** 2) / (2 * p["w2"] ** 2))
            return g1 + g2 + p["offset"]
        raise LandscapeError("custom landscapes are only defined at cell centres")


def constant(c: float = 1.0) -> LandscapeSpec:
    return LandscapeSpec("constant", {"c": c})


def gaussian(**params) -> LandscapeSpec:
    return LandscapeSpec("gaussian", params)


def sharp_gaussian(**params) -> LandscapeSpec:
    return LandscapeSpec("sharp_gaussian", params)


def sample_landscape(spec: LandscapeSpec, grid: Grid1D) -> Field:
    if spec.kind == "custom":
        values = np.asarray(spec.table, dtype=float)
        if values.shape != (grid.n_cells,):
            raise LandscapeError(
                f"custom landscape has {values.size} values, grid has {grid.n_cells} cells"
            )
    else:
        values = spec(grid.centers)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise LandscapeError(f"landscape {spec.kind!r} is not strictly positive on the grid")
    return Field(grid, values, nonnegative=True)
