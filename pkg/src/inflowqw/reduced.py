"""Three-dimensional invariant-subspace dynamics.

By symmetry every internal arc into the marked vertex carries the same
amplitude ``a_t``, every arc out of it ``b_t`` and every remaining internal
arc ``c_t``.  Rescaling by the square roots of the class sizes gives the
reduced state ``alpha_t``, whose Euclidean norm equals the internal-graph
norm of the full field, and an affine recursion

    alpha_{t+1} = T(eps) alpha_t + b_eps,    alpha_0 = 0,    eps = sqrt(2/N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .series import TimeSeries, series_from_alpha


@dataclass(frozen=True)
class Epsilon:
    """Perturbation parameter ``sqrt(2/N)`` kept together with ``N``.

    ``n_vertices`` may be a non-integer when ``eps`` is swept continuously
    (e.g. for perturbation fits); the arc-class weights then lose their
    combinatorial meaning but every matrix-valued formula stays defined.
    """

    value: float
    n_vertices: float

    @classmethod
    def from_n(cls, n: int) -> "Epsilon":
        if n < 3:
            raise ConfigError(f"N must be >= 3, got {n}")
        return cls(math.sqrt(2.0 / n), n)

    @classmethod
    def from_value(cls, eps: float) -> "Epsilon":
        if not 0.0 <= eps <= math.sqrt(2.0 / 3.0) + 1e-15:
            raise ConfigError(f"eps must lie in [0, sqrt(2/3)], got {eps}")
        return cls(float(eps), math.inf if eps == 0 else 2.0 / eps**2)

    def __float__(self) -> float:
        return self.value


def _eps(eps) -> float:
    return float(eps)


@dataclass
class ReducedState:
    alpha: np.ndarray
    time: int = 0


def class_weights(n: float) -> np.ndarray:
    """Square roots of the arc-class sizes ``|A_+|, |A_-|, |A_0|``."""
    return np.array([math.sqrt(n - 1), math.sqrt(n - 1), math.sqrt((n - 1) * (n - 2))])


def t_matrix(eps) -> np.ndarray:
    e2 = _eps(eps) ** 2
    off = math.sqrt(2.0 * e2 * (1.0 - e2))
    return np.array([
        [0.0, -1.0 + e2, off],
        [-1.0 + e2, 0.0, 0.0],
        [0.0, off, 1.0 - 2.0 * e2],
    ])


def b_vector(eps) -> np.ndarray:
    e = _eps(eps)
    e2 = e * e
    side = e * math.sqrt(2.0 - e2)
    return np.array([side, -side, math.sqrt(4.0 - 6.0 * e2 + 2.0 * e2 * e2)])


def unperturbed_matrix() -> np.ndarray:
    """``T(0)``; its spectrum is ``{-1, 1, 1}``."""
    return t_matrix(0.0)


def reduced_step(state: ReducedState, eps) -> ReducedState:
    return ReducedState(t_matrix(eps) @ state.alpha + b_vector(eps), state.time + 1)


def unnormalized_step(a: float, b: float, c: float, n: int) -> tuple[float, float, float]:
    """One step of the raw class-amplitude recursion on K_N."""
    if n < 3:
        raise ConfigError(f"N must be >= 3, got {n}")
    g = 2.0 / n
    a_next = (-1.0 + g) * b + (2.0 - 2.0 * g) * c + g
    b_next = (-1.0 + g) * a - g
    c_next = g * b + (1.0 - 2.0 * g) * c + g
    return a_next, b_next, c_next


def iterate(eps, t_max: int, alpha0=None) -> np.ndarray:
    """Reduced states for ``t = 0..t_max`` stacked as rows."""
    tm, bv = t_matrix(eps), b_vector(eps)
    out = np.empty((t_max + 1, 3))
    out[0] = np.zeros(3) if alpha0 is None else alpha0
    for t in range(t_max):
        out[t + 1] = tm @ out[t] + bv
    return out


def stationary_state(eps) -> ReducedState:
    """Fixed point ``(I - T(eps))^{-1} b_eps`` of the affine recursion."""
    if _eps(eps) == 0.0:
        raise NumericError("no fixed point at unperturbed limit (1 is an eigenvalue of T(0))")
    a = np.eye(3) - t_matrix(eps)
    if np.linalg.cond(a) > 1e14:
        raise NumericError(f"I - T(eps) is numerically singular at eps={_eps(eps)}")
    return ReducedState(np.linalg.solve(a, b_vector(eps)), time=-1)


def spectral_radius(eps) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(t_matrix(eps)))))


def nu_marked(state: ReducedState) -> float:
    """Normalized finding probability of the marked vertex."""
    sq = float(state.alpha @ state.alpha)
    if sq == 0.0:
        raise NumericError("finding probability undefined for the zero state")
    return float(state.alpha[0] ** 2 / sq)


def reduced_series(n: int, t_max: int) -> TimeSeries:
    """Observables of the reduced recursion in the same layout as the full simulator."""
    eps = Epsilon.from_n(n)
    series = series_from_alpha(iterate(eps, t_max), n, method="reduced")
    series.meta["eps"] = eps.value
    return series
