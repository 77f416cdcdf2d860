"""
Spectral analysis of the non-normal reduced matrix ``T(eps)``.

``T(eps)`` has a real eigenvalue near -1 and a conjugate pair near
``1 +- i eps``.  It is diagonalizable but not normal, so its eigenprojections
are oblique: they are built from right and left eigenvectors as
``r l^T / (l^T r)``.  With the projections the affine recursion sums in
closed form,

    alpha_t = sum_j (1 - lambda_j^t) / (1 - lambda_j) P_j b_eps.

The second half of the module holds the unperturbed data at ``eps = 0`` and
the Kato-type first- and second-order eigenvalue coefficients, evaluated
both analytically and by least-squares fits of numerically computed
eigenvalues.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, FitError
from .reduced import ReducedState, b_vector, t_matrix

#: Branch labels in the order used by :class:`SpectralDecomp`.
BRANCHES = ("minus1", "plus1_pos", "plus1_neg")

#: Leading series coefficients ``(lambda^(1), lambda^(2))`` per branch.
SERIES_TARGETS = {
    "minus1": (0.0, 0.5),
    "plus1_pos": (1j, -1.25),
    "plus1_neg": (-1j, -1.25),
}

_CONDITION_FLOOR = 1e-8


@dataclass
class SpectralDecomp:
    eps: float
    eigenvalues: np.ndarray      # (3,) complex, ordered as BRANCHES
    projections: np.ndarray      # (3, 3, 3) complex, projections[k] belongs to eigenvalues[k]

    def branch(self, name: str) -> tuple[complex, np.ndarray]:
        k = BRANCHES.index(name)
        return self.eigenvalues[k], self.projections[k]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.eigenvalues, self.projections)

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


def _branch_targets(eps: float) -> np.ndarray:
    return np.array([-1.0 + 0.5 * eps**2, 1.0 + 1j * eps - 1.25 * eps**2,
                     1.0 - 1j * eps - 1.25 * eps**2])


def decompose(eps) -> SpectralDecomp:
    """Eigenvalues and oblique eigenprojections of ``T(eps)``."""
    e = float(eps)
    w, vl, vr = scipy.linalg.eig(t_matrix(e), left=True, right=True)

    gaps = [abs(w[i] - w[j]) for i, j in itertools.combinations(range(3), 2)]
    if min(gaps) < 1e-12:
        raise DegenerateSpectrumError(f"eigenvalues collide at eps={e}: {w}")

    # assign branches by proximity to the small-eps series so sweeps never swap them
    targets = _branch_targets(e)
    order = min(itertools.permutations(range(3)),
                key=lambda p: sum(abs(w[p[k]] - targets[k]) for k in range(3)))

    vals = np.empty(3, dtype=complex)
    projs = np.empty((3, 3, 3), dtype=complex)
    for k, i in enumerate(order):
        r, left = vr[:, i], vl[:, i].conj()
        denom = left @ r
        if abs(denom) < _CONDITION_FLOOR * np.linalg.norm(left) * np.linalg.norm(r):
            raise DegenerateSpectrumError(f"ill-conditioned eigenvector pair at eps={e}")
        vals[k] = w[i]
        projs[k] = np.outer(r, left) / denom
    return SpectralDecomp(e, vals, projs)


def geometric_weights(eigenvalues: np.ndarray, ts) -> np.ndarray:
    """``(1 - lambda^t) / (1 - lambda)`` for each time (rows) and eigenvalue (columns)."""
    ts = np.atleast_1d(np.asarray(ts))
    return (1.0 - eigenvalues[None, :] ** ts[:, None]) / (1.0 - eigenvalues[None, :])


def closed_form_series(eps, ts, decomp: SpectralDecomp | None = None) -> np.ndarray:
    """Complex reduced states at the given times, one row per time."""
    d = decompose(eps) if decomp is None else decomp
    components = np.einsum("kij,j->ki", d.projections, b_vector(d.eps))
    return geometric_weights(d.eigenvalues, ts) @ components


def closed_form_alpha(t: int, eps, decomp: SpectralDecomp | None = None) -> ReducedState:
    z = closed_form_series(eps, [t], decomp)[0]
    scale = max(1.0, float(np.linalg.norm(z)))
    if np.max(np.abs(z.imag)) > 1e-10 * scale:
        raise DegenerateSpectrumError(
            f"closed form left an imaginary residue {np.abs(z.imag).max():.3e} at t={t}")
    return ReducedState(z.real.copy(), t)


def approx_alpha(t, eps, decomp: SpectralDecomp | None = None,
                 consistent: bool = False) -> ReducedState:
    """Small-eps asymptotic form of ``alpha_t``.

    The exact geometric weights are replaced by exponential approximations
    with all relative ``O(eps)`` corrections inside the exponents dropped;
    the branch vectors ``P_j(eps) b_eps`` stay exact.

    By default the pair near 1 uses damping ``e^{-5 eps^2 t/4}`` and phase
    factor ``e^{+5i eps/4}``.  With ``consistent=True`` both are taken from
    the series ``1 +- i eps - 5 eps^2/4`` itself: ``lambda^t ~ e^{+-i eps t}
    e^{-3 eps^2 t/4}`` and ``1/(1 - lambda) ~ (+-i/eps) e^{-+5i eps/4}``.
    """
    d = decompose(eps) if decomp is None else decomp
    e = d.eps
    bm, bp, bn = np.einsum("kij,j->ki", d.projections, b_vector(e))
    rate, phase = (0.75, -1.25) if consistent else (1.25, 1.25)
    decay = np.exp(-rate * e**2 * t)
    alpha = (
        0.5 * (1.0 - (-1.0) ** t * np.exp(-0.5 * e**2 * t)) * np.exp(0.25 * e**2) * bm
        + (1j / e) * (1.0 - np.exp(1j * e * t) * decay) * np.exp(1j * phase * e) * bp
        - (1j / e) * (1.0 - np.exp(-1j * e * t) * decay) * np.exp(-1j * phase * e) * bn
    )
    return ReducedState(alpha.real.copy(), int(t))


# --- unperturbed data and series coefficients -------------------------------

@dataclass
class UnperturbedData:
    t0: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    p_minus1: np.ndarray
    p_1: np.ndarray
    s_minus1: np.ndarray
    s_1: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    tt1: np.ndarray
    tt2: np.ndarray

    @property
    def p_plus(self) -> np.ndarray:
        return np.outer(self.v_plus, self.v_plus.conj())

    @property
    def p_minus(self) -> np.ndarray:
        return np.outer(self.v_minus, self.v_minus.conj())


def unperturbed_data() -> UnperturbedData:
    """Expansion ``T(eps) = T + eps T1 + eps^2 T2 + O(eps^3)`` and its eigen-data.

    ``tt1`` and ``tt2`` are the first two coefficients of the reduction
    process ``(T(eps) - 1) P_1(eps) / eps`` on the +1 group.
    """
    r2 = np.sqrt(2.0)
    t0 = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    t1 = np.array([[0.0, 0.0, r2], [0.0, 0.0, 0.0], [0.0, r2, 0.0]])
    t2 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -2.0]])

    u = np.array([1.0, 1.0, 0.0]) / r2
    p_m1 = np.outer(u, u)
    p_1 = np.eye(3) - p_m1
    # reduced resolvents: S_lambda = -sum_{mu != lambda} P_mu / (lambda - mu)
    s_m1 = 0.5 * p_1
    s_1 = -0.5 * p_m1

    tt1 = p_1 @ t1 @ p_1
    tt2 = (p_1 @ t2 @ p_1 - p_1 @ t1 @ p_1 @ t1 @ s_1
           - p_1 @ t1 @ s_1 @ t1 @ p_1 - s_1 @ t1 @ p_1 @ t1 @ p_1)
    v_plus = 0.5 * np.array([-1j, 1j, r2])
    return UnperturbedData(t0, t1, t2, p_m1, p_1, s_m1, s_1, v_plus, v_plus.conj(), tt1, tt2)


def kato_coefficients() -> dict[str, tuple[complex, complex]]:
    """First- and second-order eigenvalue coefficients from the analytic formulas."""
    d = unperturbed_data()
    minus1 = (
        complex(np.trace(d.t1 @ d.p_minus1)),
        complex(np.trace(d.t2 @ d.p_minus1 - d.t1 @ d.s_minus1 @ d.t1 @ d.p_minus1)),
    )
    out = {"minus1": minus1}
    for name, p in (("plus1_pos", d.p_plus), ("plus1_neg", d.p_minus)):
        out[name] = (complex(np.trace(d.tt1 @ p)), complex(np.trace(d.tt2 @ p)))
    return out


@dataclass
class PerturbationFit:
    branch: str
    coeff1: complex
    coeff2: complex
    residual: float
    eps: np.ndarray

    @property
    def target1(self) -> complex:
        return SERIES_TARGETS[self.branch][0]

    @property
    def target2(self) -> complex:
        return SERIES_TARGETS[self.branch][1]

    @property
    def error1(self) -> float:
        return abs(self.coeff1 - self.target1)

    @property
    def error2(self) -> float:
        return abs(self.coeff2 - self.target2)


def branch_eigenvalue(branch: str, eps) -> complex:
    d = decompose(eps)
    return complex(d.eigenvalues[BRANCHES.index(branch)])


def fit_perturbation(branch: str, eps_list) -> PerturbationFit:
    """Least-squares fit of ``lambda(eps) - lambda(0)`` against ``(eps, eps^2)``."""
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCHES}")
    eps = np.asarray(sorted(set(float(e) for e in eps_list)))
    if len(eps) < 4:
        raise FitError(f"need at least 4 distinct eps values, got {len(eps)}")
    if eps[0] <= 0 or eps[-1] > 0.1:
        raise FitError("eps values must lie in (0, 0.1]")
    if eps[-1] / eps[0] < 10.0 * (1 - 1e-12):
        raise FitError("eps values must span at least one decade")

    base = -1.0 if branch == "minus1" else 1.0
    y = np.array([branch_eigenvalue(branch, e) for e in eps]) - base
    design = np.column_stack([eps, eps**2]).astype(complex)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.max(np.abs(design @ coeffs - y)))
    return PerturbationFit(branch, complex(coeffs[0]), complex(coeffs[1]), resid, eps)


def series_residual(branch: str, eps) -> float:
    """``|lambda(eps) - (lambda(0) + c1 eps + c2 eps^2)|`` with the analytic coefficients."""
    c1, c2 = SERIES_TARGETS[branch]
    base = -1.0 if branch == "minus1" else 1.0
    e = float(eps)
    return abs(branch_eigenvalue(branch, e) - (base + c1 * e + c2 * e * e))
