"""Grover walk with constant inflow/outflow on the complete graph K_N.

Three routes to the same dynamics are provided and cross-checked:

* :mod:`inflowqw.model` simulates the walk on every arc of the graph,
* :mod:`inflowqw.reduced` iterates the three-dimensional invariant recursion,
* :mod:`inflowqw.spectral` sums that recursion in closed form.

:mod:`inflowqw.analysis` builds the long-time limit, mixing time and
pulsation analyses on top of them.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    FitError,
    HorizonError,
    InflowWalkError,
    NumericError,
)
from .model import ArcField, ArcIndex, ModelConfig, TailMode, build_arc_index, evolve, initial_state, step
from .reduced import Epsilon, ReducedState, b_vector, reduced_series, stationary_state, t_matrix
from .series import TimeSeries
from .spectral import SpectralDecomp, closed_form_alpha, decompose, fit_perturbation

__all__ = [
    "ArcField", "ArcIndex", "ConfigError", "DegenerateSpectrumError", "Epsilon", "FitError",
    "HorizonError", "InflowWalkError", "ModelConfig", "NumericError", "ReducedState",
    "SpectralDecomp", "TailMode", "TimeSeries", "b_vector", "build_arc_index",
    "closed_form_alpha", "decompose", "evolve", "fit_perturbation", "initial_state",
    "reduced_series", "stationary_state", "step", "t_matrix",
]
