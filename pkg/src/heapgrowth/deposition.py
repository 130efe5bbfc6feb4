"""Next-nearest-neighbour ballistic deposition.

Columns are numbered ``1..N`` in every public function, matching the
generator labels ``g_1..g_N`` used by :mod:`heapgrowth.heap_words`.  Arrays
handed back to callers are ordinary 0-based numpy arrays, so
``profile.heights[i - 1]`` is the height of column ``i``.

Hard rule: a cell dropped on column ``i`` lands at one plus the tallest of
columns ``i-1, i, i+1``.  Soft rule: the max is replaced by a log-sum-exp at
inverse temperature ``beta``, which is also the free energy of a directed
polymer on the deposition lattice (see :func:`polymer_evolve`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import InputDomainError
from .rng import RngStream


class BoundaryCondition(str, enum.Enum):
    FREE = "free"
    PERIODIC = "periodic"

    @classmethod
    def coerce(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputDomainError(f"unknown boundary condition {value!r}") from None


FREE = BoundaryCondition.FREE
PERIODIC = BoundaryCondition.PERIODIC


@dataclass(frozen=True)
class HeightProfile:
    heights: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights)
        if h.ndim != 1 or h.size == 0:
            raise InputDomainError("heights must be a non-empty 1-d sequence")
        if np.any(h < 0):
            raise InputDomainError("heights must be non-negative")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    @classmethod
    def flat(cls, n_columns: int, soft: bool = False) -> "HeightProfile":
        if n_columns < 1:
            raise InputDomainError("need at least one column")
        return cls(np.zeros(n_columns, dtype=float if soft else np.int64))

    @property
    def n_columns(self) -> int:
        return self.heights.size

    @property
    def h_max(self):
        return self.heights.max()

    def width2(self) -> float:
        """Spatial variance of the profile."""
        return float(np.var(self.heights.astype(float)))

    def __eq__(self, other):
        if not isinstance(other, HeightProfile):
            return NotImplemented
        return np.array_equal(self.heights, other.heights)

    def __hash__(self):
        return hash(self.heights.tobytes())

    def tolist(self) -> list:
        return self.heights.tolist()


@dataclass(frozen=True)
class ColumnSequence:
    """Time-ordered deposition events, 1-based column labels."""

    events: np.ndarray
    n_columns: int

    def __post_init__(self):
        ev = np.asarray(self.events, dtype=np.int64).reshape(-1)
        if ev.size and (ev.min() < 1 or ev.max() > self.n_columns):
            raise InputDomainError(
                f"column indices must lie in [1, {self.n_columns}]"
            )
        ev = ev.copy()
        ev.setflags(write=False)
        object.__setattr__(self, "events", ev)

    def __len__(self):
        return self.events.size

    def __iter__(self):
        return iter(self.events.tolist())

    def zero_based(self) -> np.ndarray:
        return self.events - 1


@dataclass(frozen=True)
class PolymerState:
    """Log partition functions ``ln a_i`` of polymers ending on each column."""

    log_weights: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        lw = np.array(self.log_weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(lw)):
            raise InputDomainError("log weights must be finite")
        if not self.beta > 0:
            raise InputDomainError("beta must be positive")
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def unit(cls, n_columns: int, beta: float) -> "PolymerState":
        """All weights equal to one (flat substrate)."""
        return cls(np.zeros(n_columns), beta)

    @property
    def u(self) -> float:
        return float(np.exp(self.beta))

    def free_energy(self) -> np.ndarray:
        """``ln a_i / beta``; tends to the hard heights as beta grows."""
        return self.log_weights / self.beta


def _neighbours(n: int, i: int, bc: BoundaryCondition) -> list[int]:
    """0-based indices read by a drop on 0-based column ``i``."""
    if bc is PERIODIC:
        return sorted({(i - 1) % n, i, (i + 1) % n})
    return [j for j in (i - 1, i, i + 1) if 0 <= j < n]


def _check_column(column: int, n: int) -> int:
    if not 1 <= column <= n:
        raise InputDomainError(f"column {column} outside [1, {n}]")
    return column - 1


def deposit_hard(profile: HeightProfile, column: int, bc=FREE) -> HeightProfile:
    bc = BoundaryCondition.coerce(bc)
    h = profile.heights
    i = _check_column(column, h.size)
    new = h.copy()
    new[i] = max(h[j] for j in _neighbours(h.size, i, bc)) + 1
    return HeightProfile(new)


def deposit_soft(profile: HeightProfile, column: int, beta: float, bc=FREE) -> HeightProfile:
    if not beta > 0:
        raise InputDomainError("beta must be positive")
    bc = BoundaryCondition.coerce(bc)
    h = profile.heights.astype(float)
    i = _check_column(column, h.size)
    vals = h[_neighbours(h.size, i, bc)]
    m = vals.max()
    new = h.copy()
    # the log term is >= 0 because the max contributes exp(0)
    new[i] = m + np.log(np.exp(beta * (vals - m)).sum()) / beta + 1.0
    return HeightProfile(new)


def replay(n_columns: int, events, bc=FREE, initial: HeightProfile | None = None) -> HeightProfile:
    """Hard-rule replay of a whole event sequence (compiled loop)."""
    bc = BoundaryCondition.coerce(bc)
    seq = events if isinstance(events, ColumnSequence) else ColumnSequence(events, n_columns)
    if seq.n_columns != n_columns:
        raise InputDomainError("event sequence was drawn for a different N")
    h = np.zeros(n_columns, np.int64) if initial is None else initial.heights.astype(np.int64)
    _kernels.replay(h, seq.zero_based(), bc is PERIODIC)
    return HeightProfile(h)


def replay_soft(n_columns: int, events, beta: float, bc=FREE) -> HeightProfile:
    profile = HeightProfile.flat(n_columns, soft=True)
    for c in events:
        profile = deposit_soft(profile, int(c), beta, bc)
    return profile


def simulate(n_columns: int, n_events: int, rng: RngStream, bc=FREE):
    """Drop ``n_events`` cells on uniformly chosen columns.

    Returns the final profile and the exact event sequence that produced it.
    """
    if n_columns < 1:
        raise InputDomainError("n_columns must be >= 1")
    if n_events < 0:
        raise InputDomainError("n_events must be >= 0")
    seq = ColumnSequence(rng.columns(n_columns, n_events) + 1, n_columns)
    return replay(n_columns, seq, bc), seq


def trajectory(n_columns: int, events, bc=FREE):
    """Per-event record ``(t, column, h_max, width2)`` of a hard-rule run."""
    bc = BoundaryCondition.coerce(bc)
    seq = events if isinstance(events, ColumnSequence) else ColumnSequence(events, n_columns)
    h = np.zeros(n_columns, np.int64)
    hmax = np.empty(len(seq), np.int64)
    w2 = np.empty(len(seq), float)
    _kernels.replay_trace(h, np.ascontiguousarray(seq.zero_based()), bc is PERIODIC, hmax, w2)
    t = np.arange(1, len(seq) + 1)
    return t, seq.events.copy(), hmax, w2


def replay_batch(events: np.ndarray, n_columns: int, bc=FREE) -> np.ndarray:
    """Hard-rule replay of many sequences at once.

    ``events`` has shape ``(batch, T)`` with 1-based columns.  Returns the
    height history with shape ``(T + 1, batch, N)``; slice ``[t]`` holds the
    profiles after ``t`` events.
    """
    bc = BoundaryCondition.coerce(bc)
    ev = np.asarray(events, dtype=np.int64)
    if ev.ndim != 2:
        raise InputDomainError("events must be 2-d (batch, T)")
    if ev.size and (ev.min() < 1 or ev.max() > n_columns):
        raise InputDomainError(f"column indices must lie in [1, {n_columns}]")
    batch, steps = ev.shape
    # pad with -1 on both sides so absent neighbours never win the max
    h = np.full((batch, n_columns + 2), -1, dtype=np.int64)
    h[:, 1:-1] = 0
    out = np.empty((steps + 1, batch, n_columns), np.int64)
    out[0] = 0
    rows = np.arange(batch)
    for t in range(steps):
        c = ev[:, t]
        if bc is PERIODIC:
            h[:, 0] = h[:, n_columns]
            h[:, -1] = h[:, 1]
        h[rows, c] = np.maximum(np.maximum(h[rows, c - 1], h[rows, c]), h[rows, c + 1]) + 1
        out[t + 1] = h[:, 1:-1]
    return out


def polymer_evolve(state: PolymerState, events, bc=FREE) -> PolymerState:
    """Transfer the polymer partition functions through a sequence of events.

    A deposit on column ``i`` multiplies the sum of the three ancestor
    weights by ``u = exp(beta)``; done here in log space.
    """
    bc = BoundaryCondition.coerce(bc)
    lw = state.log_weights.copy()
    n = lw.size
    for c in events:
        i = _check_column(int(c), n)
        vals = lw[_neighbours(n, i, bc)]
        m = vals.max()
        lw[i] = state.beta + m + np.log(np.exp(vals - m).sum())
    return PolymerState(lw, state.beta)


def ensemble_profiles(
    n_columns: int,
    checkpoints: Sequence[int],
    runs: int,
    rng: RngStream,
    bc=FREE,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(run, profiles)`` with one row per checkpoint (event counts).

    Run ``r`` draws from ``rng.child(r)``, so any subset of runs can be
    regenerated on its own.
    """
    bc = BoundaryCondition.coerce(bc)
    cps = np.asarray(checkpoints, dtype=np.int64)
    if np.any(np.diff(cps) < 0) or (cps.size and cps[0] < 0):
        raise InputDomainError("checkpoints must be non-decreasing event counts")
    periodic = bc is PERIODIC
    for r in range(runs):
        stream = rng.child(r)
        h = np.zeros(n_columns, np.int64)
        out = np.empty((cps.size, n_columns), np.int64)
        done = 0
        for k, target in enumerate(cps):
            step = int(target) - done
            # draw in bounded chunks to keep memory flat for long runs
            while step > 0:
                chunk = min(step, 1 << 22)
                _kernels.replay(h, stream.columns(n_columns, chunk), periodic)
                step -= chunk
            done = int(target)
            out[k] = h
        yield r, out
