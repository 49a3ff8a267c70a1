"""Exact event-by-event simulation of continuous-time Markov chains.

Every model in the package is a jump process with exponential holding
times. This module holds the pieces they share: seeded random streams,
the direct-method (Gillespie) loop, trajectory containers, and the
replication / aggregation harness that turns per-run statistics into
confidence intervals.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "InvalidParameterError",
    "ModelError",
    "ReplicationError",
    "RngStream",
    "StoppingRule",
    "Trajectory",
    "EstimateSummary",
    "sample_exponential",
    "run_ctmc",
    "replicate",
    "replicate_values",
    "summarize",
]

Jump = tuple
Generator = Callable[[tuple], Sequence[tuple[float, Jump]]]

_BUFFER = 4096


class InvalidParameterError(ValueError):
    """A model or estimator parameter is outside its domain."""


class ModelError(RuntimeError):
    """A generator produced an invalid rate."""


class ReplicationError(RuntimeError):
    """One replication failed; carries the offending stream index."""

    def __init__(self, stream_index: int, cause: BaseException):
        super().__init__(f"replication failed on stream_index={stream_index}: {cause!r}")
        self.stream_index = stream_index
        self.cause = cause


class RngStream:
    """A reproducible random stream identified by ``(base_seed, stream_index)``.

    Streams are PCG64 generators seeded through :class:`numpy.random.SeedSequence`
    with ``spawn_key=(stream_index,)``, which hashes the pair with an
    avalanche mixer. Uniforms are drawn in blocks so the simulation
    loops avoid per-draw call overhead; the block boundaries are fixed,
    so the sequence is still a pure function of the two integers.
    """

    def __init__(self, base_seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise InvalidParameterError("stream_index must be nonnegative")
        self.base_seed = int(base_seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence(self.base_seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.PCG64(seq))
        self._buf: list[float] = []
        self._pos = 0

    def __repr__(self) -> str:
        return f"RngStream(base_seed={self.base_seed}, stream_index={self.stream_index})"

    def uniform(self) -> float:
        """One draw from U[0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self.generator.random(_BUFFER).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def exponential(self, rate: float) -> float:
        return -math.log1p(-self.uniform()) / rate


def sample_exponential(rate: float, rng: RngStream) -> float:
    """Draw from Exp(rate). Raises for non-positive or non-finite rates."""
    if not (rate > 0.0 and math.isfinite(rate)):
        raise InvalidParameterError(f"exponential rate must be positive and finite, got {rate!r}")
    return rng.exponential(rate)


@dataclass(frozen=True)
class StoppingRule:
    """When to end a run. At least one of ``horizon`` / ``max_events`` is required."""

    horizon: Optional[float] = None
    max_events: Optional[int] = None
    absorb_predicate: Optional[Callable[[tuple], bool]] = None

    def __post_init__(self):
        if self.horizon is None and self.max_events is None:
            raise InvalidParameterError("StoppingRule needs a horizon or max_events")
        if self.horizon is not None and not self.horizon > 0:
            raise InvalidParameterError("horizon must be positive")
        if self.max_events is not None and self.max_events < 1:
            raise InvalidParameterError("max_events must be positive")


@dataclass
class Trajectory:
    """Piecewise-constant, right-continuous sample path.

    ``states[0]`` is the initial state and ``states[k]`` (k >= 1) the state
    entered at ``times[k-1]``. ``t_end`` is the end of the observed window.
    When ``thinned`` is set, ``times`` is an observation grid rather than
    the event log and consecutive states may differ by several jumps.
    """

    times: np.ndarray
    states: np.ndarray
    t_end: float
    stop_reason: str = "horizon"
    degenerate: bool = False
    thinned: bool = False
    n_events: int = 0
    occupation: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def budget_exceeded(self) -> bool:
        return self.stop_reason == "budget"

    @property
    def final_state(self) -> tuple:
        return tuple(int(v) for v in self.states[-1])

    def state_at(self, t: float) -> tuple:
        """State at time ``t``: the one entered at the last epoch <= t."""
        k = int(np.searchsorted(self.times, t, side="right"))
        return tuple(int(v) for v in self.states[k])

    def states_at(self, ts: Sequence[float]) -> np.ndarray:
        k = np.searchsorted(self.times, np.asarray(ts, dtype=float), side="right")
        return self.states[k]

    def time_integral(self, t0: float = 0.0, t1: Optional[float] = None) -> np.ndarray:
        """Integral of each coordinate over [t0, t1]."""
        t1 = self.t_end if t1 is None else t1
        if self.thinned:
            raise ValueError("time integrals need the full event log")
        edges = np.concatenate(([0.0], self.times, [max(self.t_end, t1)]))
        lo = np.clip(edges[:-1], t0, t1)
        hi = np.clip(edges[1:], t0, t1)
        return (hi - lo) @ self.states.astype(float)

    def time_average(self, t0: float = 0.0, t1: Optional[float] = None) -> np.ndarray:
        t1 = self.t_end if t1 is None else t1
        return self.time_integral(t0, t1) / (t1 - t0)

    def jumps(self) -> np.ndarray:
        return np.diff(self.states, axis=0)


def _check_rate(r: float) -> None:
    if not (r >= 0.0) or r == math.inf:
        raise ModelError(f"generator returned invalid rate {r!r}")


def run_ctmc(
    generator: Generator,
    init: Sequence[int],
    stop: StoppingRule,
    rng: RngStream,
    *,
    record: bool = True,
    grid: Optional[Sequence[float]] = None,
    integrate_from: Optional[float] = None,
) -> Trajectory:
    """Direct-method simulation of the chain whose transitions ``generator`` lists.

    ``generator(state)`` returns ``(rate, jump)`` pairs; ``jump`` is an integer
    vector added to the state. At each step the holding time is drawn from
    Exp(R), R the total rate, and a jump is picked with probability rate/R
    (ties in the cumulative scan go to the lower index). A state with R = 0
    is absorbing and the path is held constant to the horizon.

    ``record=False`` keeps only the final state; ``grid`` instead stores the
    states seen at the given observation times. ``integrate_from`` makes the
    run accumulate the occupation integral of every coordinate over
    ``[integrate_from, t_end]`` in ``Trajectory.occupation``.
    """
    state = tuple(int(v) for v in init)
    dim = len(state)
    horizon = stop.horizon if stop.horizon is not None else math.inf
    max_events = stop.max_events if stop.max_events is not None else -1
    absorb = stop.absorb_predicate

    times = array("d")
    path: list[tuple] = [state]
    grid_arr = None if grid is None else np.asarray(sorted(grid), dtype=float)
    grid_states: list[tuple] = []
    gi = 0
    occ = [0.0] * dim if integrate_from is not None else None
    occ_from = integrate_from if integrate_from is not None else 0.0

    t = 0.0
    n = 0
    reason = "horizon"
    uniform = rng.uniform
    log1p = math.log1p

    if absorb is not None and absorb(state):
        reason = "absorbed"
        horizon = 0.0

    while True:
        if n == max_events:
            reason = "budget"
            break
        events = generator(state)
        total = 0.0
        for r, _ in events:
            _check_rate(r)
            total += r
        if total == 0.0:
            t_next = math.inf
        else:
            t_next = t - log1p(-uniform()) / total
        t_stop = t_next if t_next < horizon else horizon
        if grid_arr is not None:
            while gi < len(grid_arr) and grid_arr[gi] < t_stop:
                grid_states.append(state)
                gi += 1
        if occ is not None and occ_from < t_stop < math.inf:
            w = t_stop - (t if t > occ_from else occ_from)
            for i in range(dim):
                occ[i] += w * state[i]
        if t_next >= horizon:
            t = horizon if horizon < math.inf else t
            break
        target = uniform() * total
        acc = 0.0
        chosen = events[-1][1]
        for r, j in events:
            acc += r
            if target < acc:
                chosen = j
                break
        state = tuple(a + b for a, b in zip(state, chosen))
        t = t_next
        n += 1
        if record:
            times.append(t)
            path.append(state)
        if absorb is not None and absorb(state):
            reason = "absorbed"
            break

    if grid_arr is not None:
        while gi < len(grid_arr) and grid_arr[gi] <= t:
            grid_states.append(state)
            gi += 1
        out_times = grid_arr[: len(grid_states)]
        out_states = np.array([path[0]] + grid_states, dtype=np.int64).reshape(-1, dim)
        thinned = True
    elif record:
        out_times = np.frombuffer(times, dtype=float).copy()
        out_states = np.array(path, dtype=np.int64).reshape(-1, dim)
        thinned = False
    else:
        out_times = np.empty(0)
        out_states = np.array([path[0], state], dtype=np.int64).reshape(-1, dim)
        thinned = True
    return Trajectory(
        times=out_times,
        states=out_states,
        t_end=t,
        stop_reason=reason,
        thinned=thinned,
        n_events=n,
        occupation=None if occ is None else np.array(occ),
    )


@dataclass(frozen=True)
class EstimateSummary:
    """Monte Carlo point estimate with a two-sided Student-t interval.

    With a single replication the spread is undefined; ``std_error`` and
    ``ci_half_width`` are then reported as 0.
    """

    mean: float
    ci_half_width: float
    std_error: float
    replications: int
    base_seed: int
    level: float = 0.95

    @property
    def lower(self) -> float:
        return self.mean - self.ci_half_width

    @property
    def upper(self) -> float:
        return self.mean + self.ci_half_width

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def excludes_zero(self) -> bool:
        return self.lower > 0.0 or self.upper < 0.0


def summarize(values: Sequence[float], base_seed: int = 0, level: float = 0.95) -> EstimateSummary:
    """Aggregate replication values. Uses exactly rounded sums, so the result
    does not depend on the order of ``values``."""
    x = [float(v) for v in values]
    n = len(x)
    if n == 0:
        raise InvalidParameterError("cannot summarize zero replications")
    mean = math.fsum(x) / n
    if n < 2:
        return EstimateSummary(mean, 0.0, 0.0, n, base_seed, level)
    var = math.fsum((v - mean) ** 2 for v in x) / (n - 1)
    se = math.sqrt(var / n)
    hw = float(stats.t.ppf(0.5 + level / 2, n - 1)) * se
    return EstimateSummary(mean, hw, se, n, base_seed, level)


def replicate_values(
    simulate: Callable[[RngStream], object],
    reps: int,
    base_seed: int,
    reducer: Callable[[object], float] = float,
) -> np.ndarray:
    """Run ``simulate`` on streams ``(base_seed, 0..reps-1)`` and reduce each result."""
    if reps < 1:
        raise InvalidParameterError("reps must be >= 1")
    out = np.empty(reps)
    for i in range(reps):
        try:
            out[i] = reducer(simulate(RngStream(base_seed, i)))
        except ReplicationError:
            raise
        except Exception as exc:
            raise ReplicationError(i, exc) from exc
    return out


def replicate(
    simulate: Callable[[RngStream], object],
    reps: int,
    base_seed: int,
    reducer: Callable[[object], float] = float,
    level: float = 0.95,
) -> EstimateSummary:
    """Independent replications summarized as an :class:`EstimateSummary`."""
    return summarize(replicate_values(simulate, reps, base_seed, reducer), base_seed, level)
