"""Long-time limit, mixing time and pulsation of the marked-vertex probability."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .reduced import Epsilon, nu_marked, reduced_series, stationary_state
from .series import TimeSeries
from .spectral import SpectralDecomp, decompose


# --- limit distribution -----------------------------------------------------

def limit_distribution(n: int) -> tuple[float, float]:
    """Stationary finding probability of the marked vertex and of each unmarked one."""
    mu = nu_marked(stationary_state(Epsilon.from_n(n)))
    return mu, (1.0 - mu) / (n - 1)


def limit_marked_probability(n: int) -> float:
    return limit_distribution(n)[0]


# --- distance to the stationary state ---------------------------------------

def _stationary_components(n: int) -> tuple[SpectralDecomp, np.ndarray]:
    eps = Epsilon.from_n(n)
    d = decompose(eps)
    alpha_inf = stationary_state(eps).alpha
    return d, np.einsum("kij,j->ki", d.projections, alpha_inf)


def distance_series(n: int, ts) -> np.ndarray:
    """``||alpha_inf - alpha_t||`` at the requested times.

    Uses ``alpha_inf - alpha_t = T^t alpha_inf`` expanded over the
    eigenprojections, so any time can be evaluated directly.
    """
    d, comps = _stationary_components(n)
    ts = np.atleast_1d(np.asarray(ts))
    z = (d.eigenvalues[None, :] ** ts[:, None]) @ comps
    return np.linalg.norm(z, axis=1)


def distance_bound(n: int, ts) -> np.ndarray:
    """Monotone upper bound ``sum_k |lambda_k|^t ||P_k alpha_inf||`` on the distance."""
    d, comps = _stationary_components(n)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return (np.abs(d.eigenvalues)[None, :] ** ts[:, None]) @ np.linalg.norm(comps, axis=1)


@dataclass
class MixingResult:
    n_vertices: int
    theta: float
    t_theta: int
    horizon_used: int
    converged: bool
    certified_from: int | None = None

    def as_dict(self) -> dict:
        return {"n": self.n_vertices, "theta": self.theta, "t_theta": self.t_theta,
                "horizon": self.horizon_used, "converged": self.converged}


def _certification_time(n: int, level: float) -> int:
    """Smallest t at which the spectral bound drops below ``level``."""
    d, comps = _stationary_components(n)
    mags = np.abs(d.eigenvalues)
    weights = np.linalg.norm(comps, axis=1)
    # each term alone must be below level/3; solve |lambda|^t w < level/3
    with np.errstate(divide="ignore"):
        need = np.where(weights > 0, np.log(level / (3.0 * weights)) / np.log(mags), 0.0)
    t = max(0, int(math.ceil(np.max(need))))
    while distance_bound(n, [t])[0] >= level:
        t += 1
    return t


def mixing_time(n: int, theta: float, horizon_factor: float = 2.0) -> MixingResult:
    """l2 mixing time ``min{s > 0 : ||alpha_inf - alpha_t|| < e^-theta for all t > s}``.

    Distances are scanned exactly up to the time after which the spectral
    bound certifies the rest of the tail.  If that time lies beyond
    ``horizon_factor * N ln N`` the scan stops at the horizon and the
    result is only a lower bound (``converged`` is False).
    """
    if theta <= 0:
        raise ConfigError(f"theta must be positive, got {theta}")
    if horizon_factor < 2:
        raise ConfigError(f"horizon_factor must be >= 2, got {horizon_factor}")
    level = math.exp(-theta)
    horizon = int(math.ceil(horizon_factor * n * math.log(n)))
    cert = _certification_time(n, level)
    stop = min(cert, horizon)
    dist = distance_series(n, np.arange(stop + 1))
    failing = np.flatnonzero(dist >= level)
    last_fail = int(failing[-1]) if failing.size else 0
    return MixingResult(
        n_vertices=n,
        theta=theta,
        t_theta=max(1, last_fail),
        horizon_used=stop,
        converged=cert <= horizon,
        certified_from=cert if cert <= horizon else None,
    )


@dataclass
class ScalingResult:
    theta: float
    results: list[MixingResult]
    ratios: np.ndarray = field(repr=False)

    @property
    def n_values(self) -> list[int]:
        return [r.n_vertices for r in self.results]

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def max_relative_spread(self) -> float:
        return float(np.max(np.abs(self.ratios / self.mean_ratio - 1.0)))

    @property
    def superlinear(self) -> bool:
        per_n = np.array([r.t_theta / r.n_vertices for r in self.results])
        return bool(np.all(np.diff(per_n) > 0))


def _mixing_job(args):
    return mixing_time(*args)


def mixing_scaling(n_list, theta: float, horizon_factor: float = 2.0,
                   jobs: int | None = 1) -> ScalingResult:
    """Mixing times across ``n_list`` and their ratios to ``N ln N``."""
    ns = sorted(int(n) for n in n_list)
    args = [(n, theta, horizon_factor) for n in ns]
    if jobs == 1 or len(ns) == 1:
        results = [_mixing_job(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_mixing_job, args))
    ratios = np.array([r.t_theta / (r.n_vertices * math.log(r.n_vertices)) for r in results])
    return ScalingResult(theta, results, ratios)


@dataclass
class DecayRates:
    n_vertices: int
    crossover: float
    crossover_asymptotic: float
    early_rate: float
    late_rate: float
    early_spectral: float
    late_spectral: float


def _envelope_rate(n: int, lo: int, hi: int, period: float) -> float:
    ts = np.arange(lo, hi + 1)
    logd = np.log(distance_series(n, ts))
    w = max(2, int(math.ceil(period)))
    starts = np.arange(0, len(ts) - w, w)
    peaks_t = np.array([ts[s + np.argmax(logd[s:s + w])] for s in starts])
    peaks_v = np.array([logd[s:s + w].max() for s in starts])
    slope = np.polyfit(peaks_t, peaks_v, 1)[0]
    return -float(slope)


def decay_rates(n: int) -> DecayRates:
    """Exponential decay rates of ``||alpha_inf - alpha_t||`` on both sides of the crossover.

    Early on the oscillating pair near 1 dominates (weight O(1/eps)); late
    the real eigenvalue near -1 takes over (weight O(eps), slower decay).
    ``crossover`` is where the two envelope terms are equal;
    ``crossover_asymptotic`` is the rough scale ``(8/3)|ln eps| / eps^2``.
    Rates are fitted to the per-period envelope of ``ln ||alpha_inf - alpha_t||``
    and reported next to ``-ln|lambda|``.
    """
    eps = Epsilon.from_n(n).value
    d, comps = _stationary_components(n)
    w = np.linalg.norm(comps, axis=1)
    mags = np.abs(d.eigenvalues)
    cross = math.log(2.0 * w[1] / w[0]) / (math.log(mags[0]) - math.log(mags[1]))
    period = 2.0 * math.pi / abs(np.angle(d.eigenvalues[1]))
    early = _envelope_rate(n, int(0.1 * cross), int(0.6 * cross), period)
    late = _envelope_rate(n, int(1.5 * cross), int(3.0 * cross), period)
    return DecayRates(
        n_vertices=n,
        crossover=cross,
        crossover_asymptotic=8.0 * abs(math.log(eps)) / (3.0 * eps**2),
        early_rate=early,
        late_rate=late,
        early_spectral=-math.log(mags[1]),
        late_spectral=-math.log(mags[0]),
    )


# --- pulsation ----------------------------------------------------------------

def pulsation_formula(t, n: int):
    """Closed pulsation estimate ``(1/2)(1 - c cos(eps t))^2 / (1 + c^2)``, ``c = e^{-5t/(2N)}``."""
    t = np.asarray(t, dtype=float)
    c = np.exp(-2.5 * t / n)
    return 0.5 * (1.0 - c * np.cos(t * math.sqrt(2.0 / n))) ** 2 / (1.0 + c * c)


def pulsation_peak_value(n: int) -> float:
    """The estimate above at ``t = pi/eps``."""
    x = 5.0 * math.pi / math.sqrt(2.0 * n)
    return 0.5 * (1.0 + math.exp(-x / 2.0)) ** 2 / (1.0 + math.exp(-x))


def pulsation_profile(t, n: int):
    """Leading-order marked probability built from the eigenvalue pair near 1.

    With ``alpha_t ~ (sqrt2/eps) [1 - c cos, -(1 - c cos), sqrt2 c sin]``
    and ``c = e^{-3 eps^2 t/4}`` (the modulus of ``1 + i eps - 5 eps^2/4``),
    the ratio ``alpha(1)^2 / |alpha|^2`` never exceeds 1/2.
    """
    t = np.asarray(t, dtype=float)
    eps = math.sqrt(2.0 / n)
    c = np.exp(-0.75 * eps**2 * t)
    x = 1.0 - c * np.cos(eps * t)
    s = c * np.sin(eps * t)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(x == 0, 0.0, x**2 / (2.0 * (x**2 + s**2)))


@dataclass
class PulsationReport:
    n_vertices: int
    peak_times: list[int]
    peak_values: list[float]
    fitted_period: float | None
    predicted_period: float
    predicted_first_peak: float
    spectral_period: float
    smoothed: np.ndarray = field(repr=False, default=None)

    def in_phase(self) -> list[tuple[int, float]]:
        """Peaks inside the pulsation phase ``t <= N``."""
        return [(t, v) for t, v in zip(self.peak_times, self.peak_values)
                if t <= self.n_vertices]


def strict_peaks(values) -> list[int]:
    """Interior strict local maxima; a raised plateau counts once at its first index."""
    v = np.asarray(values, dtype=float)
    peaks = []
    i = 1
    while i < len(v) - 1:
        if np.isnan(v[i]) or np.isnan(v[i - 1]) or not v[i] > v[i - 1]:
            i += 1
            continue
        j = i
        while j + 1 < len(v) and v[j + 1] == v[i]:
            j += 1
        if j + 1 < len(v) and v[j + 1] < v[i]:
            peaks.append(i)
        i = j + 1
    return peaks


def detect_peaks(series: TimeSeries, window: int = 1) -> PulsationReport:
    """Peaks of the marked-vertex trace, detected on the raw series.

    ``window`` only sets the moving average stored in ``smoothed``.
    ``fitted_period`` is the mean gap between consecutive peaks with
    ``t <= N`` (None with fewer than two).
    """
    n = series.n_vertices
    if series.t_max < n:
        raise ConfigError(f"series must cover t <= N={n}, ends at {series.t_max}")
    nu = np.asarray(series.nu_marked, dtype=float)
    idx = strict_peaks(nu)
    times = [int(series.t[i]) for i in idx]
    vals = [float(nu[i]) for i in idx]
    early = [t for t in times if t <= n]
    period = float(np.mean(np.diff(early))) if len(early) >= 2 else None

    w = max(1, int(window))
    filled = np.nan_to_num(nu)
    smoothed = np.convolve(filled, np.ones(w) / w, mode="same") if w > 1 else filled

    eps = math.sqrt(2.0 / n)
    lam = decompose(eps).eigenvalues[1]
    return PulsationReport(
        n_vertices=n,
        peak_times=times,
        peak_values=vals,
        fitted_period=period,
        predicted_period=2.0 * math.pi / eps,
        predicted_first_peak=math.pi / eps,
        spectral_period=2.0 * math.pi / abs(np.angle(lam)),
        smoothed=smoothed,
    )


def compare_pulsation(n: int, t_max: int, formula=pulsation_formula) -> float:
    """Max ``|nu_t(u*) - formula(t, N)|`` over ``0 <= t <= t_max`` (exact side: reduced recursion)."""
    if t_max > n:
        raise ConfigError(f"comparison regime needs t_max <= N, got t_max={t_max}, N={n}")
    s = reduced_series(n, t_max)
    exact = np.nan_to_num(s.nu_marked)     # nu_0 := 0 (empty internal field)
    return float(np.max(np.abs(exact - formula(s.t, n))))
