"""Memory-dependent motility laws gamma(z) and the steady-state condition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

KINDS = ("power", "constant")


class MotilityError(ValueError):
    pass


@dataclass(frozen=True)
class MotilityLaw:
    """``power``: gamma(z) = 1/(z+c)**k.  ``constant``: gamma(z) = gamma0."""

    kind: str = "power"
    c: float = 1.0
    k: float = 2.0
    gamma0: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MotilityError(f"unknown motility kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "power" and not (self.c > 0 and self.k > 0):
            raise MotilityError(f"power law needs c > 0 and k > 0, got c={self.c}, k={self.k}")
        if self.kind == "constant" and not self.gamma0 > 0:
            raise MotilityError(f"constant motility must be positive, got {self.gamma0}")

    @property
    def z0(self) -> float | None:
        """argmax of -z*gamma'(z) for power laws."""
        return self.c / self.k if self.kind == "power" else None

    @property
    def gamma_at_zero(self) -> float:
        return self.c ** -self.k if self.kind == "power" else self.gamma0

    # array-friendly evaluations; callers that need validation use the module functions
    def _gamma(self, z):
        if self.kind == "constant":
            return np.full_like(np.asarray(z, dtype=float), self.gamma0) + 0.0
        return np.power(np.asarray(z, dtype=float) + self.c, -self.k)

    def _gamma_prime(self, z):
        if self.kind == "constant":
            return np.zeros_like(np.asarray(z, dtype=float))
        return -self.k * np.power(np.asarray(z, dtype=float) + self.c, -self.k - 1.0)


def power(c: float = 1.0, k: float = 2.0) -> MotilityLaw:
    return MotilityLaw("power", c=c, k=k)


def constant(gamma0: float) -> MotilityLaw:
    return MotilityLaw("constant", gamma0=gamma0)


def _nonneg(z):
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise MotilityError("motility is only defined for z >= 0")
    return arr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def gamma(law: MotilityLaw, z):
    return _scalar(law._gamma(_nonneg(z)))


def gamma_prime(law: MotilityLaw, z):
    return _scalar(law._gamma_prime(_nonneg(z)))


def neg_z_gamma_prime(law: MotilityLaw, z):
    """-z*gamma'(z); for power laws k*z/(z+c)**(k+1), unimodal with peak at c/k."""
    z = _nonneg(z)
    return _scalar(-z * law._gamma_prime(z))


def sup_log_derivative(law: MotilityLaw, M: float) -> float:
    """sup over [0, M] of |gamma'/gamma|.

    For power laws |gamma'/gamma| = k/(z+c) is decreasing, so the sup is k/c at z = 0.
    """
    if law.kind == "constant":
        return 0.0
    return law.k / law.c


class ConditionCheck(NamedTuple):
    passed: bool
    margin: float
    sup: float
    bound: float


def check_existence_condition(law: MotilityLaw, M: float) -> ConditionCheck:
    """sup |gamma'/gamma| on [0, M] < 4/M, with M = alpha * max(sbar)."""
    sup = sup_log_derivative(law, M)
    bound = math.inf if M == 0 else 4.0 / M
    return ConditionCheck(sup < bound, bound - sup, sup, bound)


def check_uniqueness_condition(law: MotilityLaw, M: float, mu: float, s_max: float) -> ConditionCheck:
    """sup |gamma'/gamma| on [0, M] <= mu / (M * ||s||_inf)."""
    sup = sup_log_derivative(law, M)
    bound = math.inf if M * s_max == 0 else mu / (M * s_max)
    return ConditionCheck(sup <= bound, bound - sup, sup, bound)
