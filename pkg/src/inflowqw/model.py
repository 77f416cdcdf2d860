"""
Arc-space simulation of the Grover walk on the hedgehog graph.

The hedgehog graph is the complete graph K_N with a semi-infinite path (tail)
glued to every vertex.  The walker lives on arcs.  At every vertex the
incoming amplitudes are scattered by the Grover matrix ``Gr(r) = (2/r)J - I``
with an extra overall sign at the marked vertex; on tail vertices ``Gr(2)``
is a plain swap, so tails transport amplitude freely.  The initial state puts
amplitude 1 on every inward tail arc, which becomes a constant inflow into
K_N, while amplitude leaving along a tail never returns.

Two finite realizations of the infinite tails are provided:

``TailMode.TRUNCATED``
    Tails of length ``L = t_max + 1`` with nothing entering at the far end.
    Finite propagation speed makes the internal amplitudes exact up to
    ``t_max``; stepping further raises :class:`HorizonError`.

``TailMode.SOURCE_SINK``
    One tail edge per vertex whose inward arc is refilled with 1 every step,
    and whose outward arc is overwritten each step.  Memory is O(N^2)
    regardless of the horizon.

Arc layout of the dense amplitude vector::

    [ internal arcs (o, t), o != t, row-major | inward tail arcs | outward tail arcs ]

Inward tail arc ``(j, m)`` points from tail vertex ``p_{j,m+1}`` to
``p_{j,m}`` and outward arc ``(j, m)`` from ``p_{j,m}`` to ``p_{j,m+1}``,
with ``p_{j,0}`` identified with internal vertex ``j``.
"""

from __future__ import annotations

import enum
from functools import cached_property
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from .errors import ConfigError, HorizonError
from .series import TimeSeries


class TailMode(str, enum.Enum):
    TRUNCATED = "truncated"
    SOURCE_SINK = "source-sink"


@dataclass(frozen=True)
class ModelConfig:
    n_vertices: int
    marked: int = 0
    t_max: int = 0
    tail_mode: TailMode = TailMode.SOURCE_SINK

    def __post_init__(self):
        if int(self.n_vertices) != self.n_vertices or self.n_vertices < 3:
            raise ConfigError(f"n_vertices must be an integer >= 3, got {self.n_vertices!r}")
        if not 0 <= self.marked < self.n_vertices:
            raise ConfigError(f"marked vertex {self.marked} outside [0, {self.n_vertices})")
        if int(self.t_max) != self.t_max or self.t_max < 0:
            raise ConfigError(f"t_max must be a non-negative integer, got {self.t_max!r}")
        object.__setattr__(self, "tail_mode", TailMode(self.tail_mode))


@dataclass
class ArcIndex:
    """Dense enumeration of the finite arc set.

    Vertices are labelled by ``int`` for internal vertices and by ``(j, m)``
    tuples (``m >= 1``) for tail vertices.
    """

    n_vertices: int
    marked: int
    tail_length: int
    # refill value for the inward arc at the far end of each tail
    boundary_inflow: float
    origin: list = field(repr=False)
    terminus: list = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)
    zero: np.ndarray = field(repr=False)
    _lookup: dict = field(repr=False, default_factory=dict)

    @property
    def n_internal(self) -> int:
        return self.n_vertices * (self.n_vertices - 1)

    @property
    def n_tail(self) -> int:
        return 2 * self.n_vertices * self.tail_length

    @property
    def size(self) -> int:
        return self.n_internal + self.n_tail

    def __len__(self) -> int:
        return self.size

    def index(self, origin: Hashable, terminus: Hashable) -> int:
        try:
            return self._lookup[(origin, terminus)]
        except KeyError:
            raise KeyError(f"no arc {origin!r} -> {terminus!r}") from None

    def internal_index(self, o: int, t: int) -> int:
        return o * (self.n_vertices - 1) + t - (t > o)

    def inward_slice(self) -> slice:
        return slice(self.n_internal, self.n_internal + self.n_tail // 2)

    def outward_slice(self) -> slice:
        return slice(self.n_internal + self.n_tail // 2, self.size)

    @cached_property
    def internal_terminus(self) -> np.ndarray:
        return np.array(self.terminus[: self.n_internal])


@dataclass
class ArcField:
    amplitudes: np.ndarray
    time: int = 0

    def copy(self) -> "ArcField":
        return ArcField(self.amplitudes.copy(), self.time)


def _tail_vertex(j: int, m: int):
    return j if m == 0 else (j, m)


def build_arc_index(config: ModelConfig) -> ArcIndex:
    """Enumerate the arcs of the finite realization chosen by ``config``."""
    n, star = config.n_vertices, config.marked
    if config.tail_mode is TailMode.TRUNCATED:
        length, inflow = config.t_max + 1, 0.0
    else:
        length, inflow = 1, 1.0

    origin: list = []
    terminus: list = []
    for o in range(n):
        for t in range(n):
            if t != o:
                origin.append(o)
                terminus.append(t)
    for j in range(n):
        for m in range(length):
            origin.append(_tail_vertex(j, m + 1))
            terminus.append(_tail_vertex(j, m))
    for j in range(n):
        for m in range(length):
            origin.append(_tail_vertex(j, m))
            terminus.append(_tail_vertex(j, m + 1))

    lookup = {(o, t): i for i, (o, t) in enumerate(zip(origin, terminus))}
    inverse = np.array([lookup[(t, o)] for o, t in zip(origin, terminus)])

    n_int = n * (n - 1)
    o_int = np.array(origin[:n_int])
    t_int = np.array(terminus[:n_int])
    return ArcIndex(
        n_vertices=n,
        marked=star,
        tail_length=length,
        boundary_inflow=inflow,
        origin=origin,
        terminus=terminus,
        inverse=inverse,
        plus=np.flatnonzero(t_int == star),
        minus=np.flatnonzero(o_int == star),
        zero=np.flatnonzero((o_int != star) & (t_int != star)),
        _lookup=lookup,
    )


def initial_state(index: ArcIndex) -> ArcField:
    psi = np.zeros(index.size, dtype=complex)
    psi[index.inward_slice()] = 1.0
    return ArcField(psi, 0)


def _internal_matrix(index: ArcIndex, x: np.ndarray) -> np.ndarray:
    n = index.n_vertices
    full = np.zeros((n, n), dtype=x.dtype)
    full[~np.eye(n, dtype=bool)] = x
    return full


def scatter(index: ArcIndex, psi: np.ndarray) -> np.ndarray:
    """Apply one step of the walk to a raw amplitude vector."""
    n, length = index.n_vertices, index.tail_length
    n_int = index.n_internal
    inward = psi[index.inward_slice()].reshape(n, length)
    outward = psi[index.outward_slice()].reshape(n, length)
    m = _internal_matrix(index, psi[:n_int])

    sign = np.ones(n)
    sign[index.marked] = -1.0
    incoming = m.sum(axis=0) + inward[:, 0]
    mean_part = (2.0 / n) * incoming

    out = np.empty_like(psi)
    new_m = sign[:, None] * (mean_part[:, None] - m.T)
    out[:n_int] = new_m[~np.eye(n, dtype=bool)]

    new_in = np.empty_like(inward)
    new_out = np.empty_like(outward)
    new_in[:, :-1] = inward[:, 1:]
    new_in[:, -1] = index.boundary_inflow
    new_out[:, 1:] = outward[:, :-1]
    new_out[:, 0] = sign * (mean_part - inward[:, 0])
    out[index.inward_slice()] = new_in.ravel()
    out[index.outward_slice()] = new_out.ravel()
    return out


def step(field: ArcField, config: ModelConfig, index: ArcIndex) -> ArcField:
    if config.tail_mode is TailMode.TRUNCATED and field.time >= config.t_max:
        raise HorizonError(
            f"time {field.time} has reached the truncation horizon t_max={config.t_max}"
        )
    return ArcField(scatter(index, field.amplitudes), field.time + 1)


def vertex_weights(field: ArcField, index: ArcIndex) -> np.ndarray:
    """Unnormalized finding weight of every internal vertex.

    Sums ``|psi(a)|^2`` over all internal arcs terminating at the vertex.
    Tail arcs are not counted.
    """
    n = index.n_vertices
    sq = np.abs(field.amplitudes[: index.n_internal]) ** 2
    return np.bincount(index.internal_terminus, weights=sq, minlength=n)


def relative_prob(field: ArcField, index: ArcIndex, u: int) -> tuple[float, float | None]:
    """Return ``(unnormalized, normalized)`` finding probability of vertex ``u``.

    The normalized value is ``None`` while the internal field vanishes.
    """
    w = vertex_weights(field, index)
    total = w.sum()
    return float(w[u]), (float(w[u] / total) if total > 0 else None)


def internal_norm(field: ArcField, index: ArcIndex) -> float:
    """l2 norm of the field restricted to internal arcs."""
    return float(np.linalg.norm(field.amplitudes[: index.n_internal]))


def class_values(field: ArcField, index: ArcIndex) -> tuple[complex, complex, complex]:
    psi = field.amplitudes
    return psi[index.plus[0]], psi[index.minus[0]], psi[index.zero[0]]


def class_spread(field: ArcField, index: ArcIndex) -> float:
    """Largest deviation of any arc from its class representative."""
    psi = field.amplitudes
    return max(float(np.ptp(psi[cls].real) + np.ptp(psi[cls].imag))
               for cls in (index.plus, index.minus, index.zero))


def evolve(config: ModelConfig) -> TimeSeries:
    """Run the full simulator for ``t = 0..t_max`` and record observables."""
    index = build_arc_index(config)
    state = initial_state(index)
    steps = config.t_max + 1
    n = config.n_vertices
    unmarked = 1 if config.marked == 0 else 0
    nu_m = np.full(steps, np.nan)
    nu_u = np.full(steps, np.nan)
    norm = np.empty(steps)
    abc = np.empty((steps, 3))
    spread = np.empty(steps)
    max_imag = 0.0
    for t in range(steps):
        if t:
            state = step(state, config, index)
        w = vertex_weights(state, index)
        total = w.sum()
        if total > 0:
            nu_m[t] = w[config.marked] / total
            nu_u[t] = w[unmarked] / total
        norm[t] = np.sqrt(total)
        abc[t] = np.real(class_values(state, index))
        spread[t] = class_spread(state, index)
        max_imag = max(max_imag, float(np.abs(state.amplitudes.imag).max()))
    return TimeSeries(
        n_vertices=n,
        method="full",
        t=np.arange(steps),
        nu_marked=nu_m,
        nu_unmarked=nu_u,
        norm_kn=norm,
        a=abc[:, 0],
        b=abc[:, 1],
        c=abc[:, 2],
        meta={"tail_mode": config.tail_mode.value, "marked": config.marked,
              "max_class_spread": float(spread.max()), "max_imag": max_imag},
    )
