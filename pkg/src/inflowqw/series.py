"""Per-step records produced by the simulators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Columns written by the CSV exporter, in order.
CSV_COLUMNS = ("t", "nu_marked", "nu_unmarked", "norm_kn")


@dataclass
class TimeSeries:
    """Observables of one run, indexed by time step ``t = 0..t_max``.

    ``nu_marked`` and ``nu_unmarked`` are NaN where the internal field is
    identically zero (the normalized probability is undefined there).
    ``a``, ``b``, ``c`` hold the class representatives on A_+, A_- and A_0.
    ``distance`` is ``||alpha_inf - alpha_t||`` when it was computed.
    """

    n_vertices: int
    method: str
    t: np.ndarray
    nu_marked: np.ndarray
    nu_unmarked: np.ndarray
    norm_kn: np.ndarray
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    distance: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t_max(self) -> int:
        return int(self.t[-1]) if len(self.t) else -1

    def alpha(self) -> np.ndarray:
        """Reduced coordinates reconstructed from the class representatives."""
        if self.a is None:
            raise ValueError("series carries no class representatives")
        n = self.n_vertices
        w = np.array([np.sqrt(n - 1), np.sqrt(n - 1), np.sqrt((n - 1) * (n - 2))])
        return np.column_stack([self.a, self.b, self.c]) * w

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def series_from_alpha(alpha: np.ndarray, n_vertices: int, method: str) -> TimeSeries:
    """Build a :class:`TimeSeries` from reduced states stacked as rows."""
    alpha = np.asarray(alpha, dtype=float)
    n = n_vertices
    sq = np.einsum("ij,ij->i", alpha, alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        nu_m = np.where(sq > 0, alpha[:, 0] ** 2 / sq, np.nan)
    nu_u = (1.0 - nu_m) / (n - 1)
    w = np.array([np.sqrt(n - 1), np.sqrt(n - 1), np.sqrt((n - 1) * (n - 2))])
    abc = alpha / w
    return TimeSeries(
        n_vertices=n,
        method=method,
        t=np.arange(len(alpha)),
        nu_marked=nu_m,
        nu_unmarked=nu_u,
        norm_kn=np.sqrt(sq),
        a=abc[:, 0],
        b=abc[:, 1],
        c=abc[:, 2],
    )
