"""Simulators for the file-sharing and branching process models.

All models are continuous-time Markov chains on integer vectors. Most
are driven through :func:`chunknet.kernel.run_ctmc` with a model-specific
transition generator; a few (killed Yule, the interacting W/Z pair, the
time-changed queue) need event sources the generic loop does not have,
and get their own exact loops here.

Boundary convention: the "(x v 1)" rule (an idle permanent server takes
over when a queue of servers is empty) is the default everywhere. The
"x + 1" rule is available only for the single-chunk network.
"""

from __future__ import annotations

import enum
import itertools
import math
from array import array
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .kernel import (
    InvalidParameterError,
    ModelError,
    RngStream,
    StoppingRule,
    Trajectory,
    run_ctmc,
)

__all__ = [
    "YuleParams",
    "RbhParams",
    "KillSchedule",
    "BirthLog",
    "Boundary",
    "RateFunction",
    "Constant",
    "DownloadShare",
    "CappedRatio",
    "Custom",
    "SingleChunkParams",
    "FreeParams",
    "TwoChunkParams",
    "SaturatedParams",
    "VChainParams",
    "WzOutcome",
    "VChainRun",
    "CouplingError",
    "ProcessSpec",
    "MODELS",
    "simulate_yule",
    "simulate_killed_yule",
    "killed_yule_skeleton",
    "simulate_rbh",
    "simulate_branching",
    "branching_extinction_time",
    "simulate_mm1",
    "lamperti_time_change",
    "simulate_z_via_timechange",
    "simulate_single_chunk",
    "simulate_free",
    "simulate_two_chunk",
    "simulate_saturated",
    "simulate_coupled",
    "run_wz_to_extinction",
    "v_chain_step",
    "v_chain_simulate",
    "v_chain_hitting_time",
]


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be a positive finite real, got {value!r}")


# ---------------------------------------------------------------------------
# parameter types


@dataclass(frozen=True)
class YuleParams:
    mu: float

    def __post_init__(self):
        _positive("mu", self.mu)


@dataclass(frozen=True)
class RbhParams:
    """Birth rate ``mu_z * max(z, 1)``, death rate ``nu * z``."""

    mu_z: float
    nu: float

    def __post_init__(self):
        _positive("mu_z", self.mu_z)
        _positive("nu", self.nu)

    @property
    def malthusian(self) -> float:
        return self.mu_z - self.nu

    @property
    def split_probability(self) -> float:
        return self.mu_z / (self.mu_z + self.nu)

    @property
    def split_rate(self) -> float:
        return self.mu_z + self.nu

    @property
    def extinction_probability(self) -> float:
        """Extinction probability of the branching process started from one particle."""
        return min(1.0, self.nu / self.mu_z)


class KillSchedule:
    """Nondecreasing kill epochs sigma_1 <= sigma_2 <= ... with sigma_1 > 0.

    ``source`` is a finite sequence, or a callable ``n -> sigma_n`` for
    n = 1, 2, ... describing an infinite schedule.
    """

    def __init__(self, source: Union[Sequence[float], Callable[[int], float], None] = None, label: str = "custom"):
        self.source = () if source is None else source
        self.label = label
        if not callable(self.source):
            seq = [float(s) for s in self.source]
            if seq and seq[0] <= 0:
                raise InvalidParameterError("kill schedule must start at a positive epoch")
            if any(b < a for a, b in zip(seq, seq[1:])):
                raise InvalidParameterError("kill schedule must be nondecreasing")
            self.source = tuple(seq)

    def __repr__(self) -> str:
        return f"KillSchedule({self.label})"

    @classmethod
    def empty(cls) -> "KillSchedule":
        return cls((), label="none")

    @classmethod
    def linear(cls, scale: float = 1.0) -> "KillSchedule":
        """sigma_n = scale * n."""
        _positive("scale", scale)
        return cls(lambda n: scale * n, label=f"linear({scale:g})")

    @classmethod
    def logarithmic(cls) -> "KillSchedule":
        """sigma_n = log(1 + n); sum of exp(-sigma_n) diverges for unit rate."""
        return cls(lambda n: math.log1p(n), label="log")

    @property
    def is_finite(self) -> bool:
        return not callable(self.source)

    def epochs(self) -> Iterator[float]:
        if not callable(self.source):
            yield from self.source
            return
        prev = 0.0
        for n in itertools.count(1):
            s = float(self.source(n))
            if s < prev or (n == 1 and s <= 0):
                raise InvalidParameterError(f"kill schedule invalid at n={n}: {s!r}")
            prev = s
            yield s

    def prefix(self, t: float) -> np.ndarray:
        """All epochs <= t."""
        out = []
        for s in self.epochs():
            if s > t:
                break
            out.append(s)
        return np.array(out)


@dataclass(frozen=True)
class BirthLog:
    """Birth epochs of a path and their counting function."""

    sigma: np.ndarray

    def count(self, t):
        return np.searchsorted(self.sigma, t, side="right")

    def __len__(self) -> int:
        return len(self.sigma)

    @classmethod
    def from_trajectory(cls, traj: Trajectory, coordinate: int = 0) -> "BirthLog":
        up = np.diff(traj.states[:, coordinate]) > 0
        return cls(traj.times[up])


class Boundary(str, enum.Enum):
    OR_ONE = "or_one"
    PLUS_ONE = "plus_one"


class RateFunction:
    """Efficiency factor r(x0, x1) in [0, 1] for chunk transfers."""

    name = "rate"

    def __call__(self, x0: int, x1: int) -> float:
        raise NotImplementedError

    def satisfies_condition_c(self, probe_x1: int = 50, tol: float = 1e-3) -> bool:
        """Whether r(x0, x1) -> 1 as x0 -> infinity, probed at a large x0."""
        big = 10**9
        return all(self(big, x1) >= 1.0 - tol for x1 in range(probe_x1 + 1))


@dataclass(frozen=True)
class Constant(RateFunction):
    delta: float = 1.0
    name = "constant"

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise InvalidParameterError(f"delta must lie in (0, 1], got {self.delta!r}")

    def __call__(self, x0: int, x1: int) -> float:
        return self.delta

    def satisfies_condition_c(self, probe_x1: int = 50, tol: float = 1e-3) -> bool:
        return self.delta == 1.0


@dataclass(frozen=True)
class DownloadShare(RateFunction):
    """r = x0 / (x0 + x1); taken as 1 on the empty state."""

    name = "download_share"

    def __call__(self, x0: int, x1: int) -> float:
        s = x0 + x1
        return x0 / s if s else 1.0


@dataclass(frozen=True)
class CappedRatio(RateFunction):
    """r = min(1, alpha * x0 / x1); taken as 1 when x1 = 0."""

    alpha: float = 1.0
    name = "capped_ratio"

    def __post_init__(self):
        _positive("alpha", self.alpha)

    def __call__(self, x0: int, x1: int) -> float:
        if x1 == 0:
            return 1.0
        v = self.alpha * x0 / x1
        return v if v < 1.0 else 1.0


class Custom(RateFunction):
    """User-supplied rate function; values outside [0, 1] raise ModelError."""

    name = "custom"

    def __init__(self, fn: Callable[[int, int], float]):
        self.fn = fn

    def __call__(self, x0: int, x1: int) -> float:
        v = float(self.fn(x0, x1))
        if not 0.0 <= v <= 1.0:
            raise ModelError(f"rate function returned {v!r} at ({x0}, {x1})")
        return v


@dataclass(frozen=True)
class SingleChunkParams:
    lam: float
    mu: float
    nu: float
    rate_fn: RateFunction = field(default_factory=Constant)
    boundary: Boundary = Boundary.OR_ONE

    def __post_init__(self):
        _positive("lambda", self.lam)
        _positive("mu", self.mu)
        _positive("nu", self.nu)
        object.__setattr__(self, "boundary", Boundary(self.boundary))


@dataclass(frozen=True)
class FreeParams:
    """Free process: the single-chunk model without the x0 > 0 indicator."""

    delta: float
    mu: float
    nu: float
    lam: float

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise InvalidParameterError(f"delta must lie in (0, 1], got {self.delta!r}")
        _positive("mu", self.mu)
        _positive("nu", self.nu)
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidParameterError(f"lambda must be nonnegative, got {self.lam!r}")


@dataclass(frozen=True)
class TwoChunkParams:
    lam: float
    mu1: float
    mu2: float
    nu: float

    def __post_init__(self):
        for k in ("lam", "mu1", "mu2", "nu"):
            _positive("lambda" if k == "lam" else k, getattr(self, k))

    def saturated(self) -> "SaturatedParams":
        return SaturatedParams(self.mu1, self.mu2, self.nu)


@dataclass(frozen=True)
class SaturatedParams:
    mu1: float
    mu2: float
    nu: float

    def __post_init__(self):
        for k in ("mu1", "mu2", "nu"):
            _positive(k, getattr(self, k))


@dataclass(frozen=True)
class VChainParams:
    """Thinned branching chain V_{n+1} = sum_{k <= A_n(V_n)} I_{n,k}.

    ``thinning="bernoulli"`` keeps each of the A_n individuals with
    probability ``p``. ``thinning="window"`` reproduces the saturated
    system: one window E ~ Exp(mu_w) is drawn per step and each individual
    survives it with probability exp(-nu * E); ``p`` is then only the
    marginal keep probability and is not used for sampling.
    """

    p: float
    mu_w: float
    rbh: RbhParams
    thinning: str = "bernoulli"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidParameterError(f"p must lie in (0, 1), got {self.p!r}")
        _positive("mu_w", self.mu_w)
        if self.thinning not in ("bernoulli", "window"):
            raise InvalidParameterError(f"unknown thinning {self.thinning!r}")

    @classmethod
    def from_saturated(cls, params: SaturatedParams) -> "VChainParams":
        keep = params.mu1 / (params.mu1 + params.nu)
        return cls(keep, params.mu1, RbhParams(params.mu2, params.nu), thinning="window")

    @property
    def stable(self) -> bool:
        return self.rbh.mu_z - self.rbh.nu > self.mu_w


@dataclass(frozen=True)
class WzOutcome:
    h0: float
    z_at_h0: int
    my_star: float
    extinct: bool
    n_events: int = 0


@dataclass(frozen=True)
class VChainRun:
    values: np.ndarray
    n_k: Optional[int]
    visits: int


class CouplingError(AssertionError):
    """A coupled pair broke its pathwise ordering."""


# ---------------------------------------------------------------------------
# helpers


def _vee(x: int) -> int:
    return x if x > 1 else 1


def _constant_path(init: Sequence[int], horizon: Optional[float], degenerate: bool = True) -> Trajectory:
    return Trajectory(
        times=np.empty(0),
        states=np.array([list(init)], dtype=np.int64),
        t_end=0.0 if horizon is None else horizon,
        degenerate=degenerate,
    )


def _check_init(x: Sequence[int], dim: int, allow_negative_first: bool = False) -> tuple:
    x = tuple(int(v) for v in x)
    if len(x) != dim:
        raise InvalidParameterError(f"initial state must have {dim} coordinates, got {x}")
    for i, v in enumerate(x):
        if v < 0 and not (allow_negative_first and i == 0):
            raise InvalidParameterError(f"initial state coordinate {i} is negative: {x}")
    return x


# ---------------------------------------------------------------------------
# Yule processes


def simulate_yule(params: YuleParams, y0: int, stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    """Pure birth process, +1 at rate mu * y. ``y0 = 0`` gives a constant 0 path."""
    if y0 < 0:
        raise InvalidParameterError("y0 must be nonnegative")
    if y0 == 0:
        return _constant_path((0,), stop.horizon)
    mu = params.mu
    up = (1,)

    def gen(s):
        return ((mu * s[0], up),)

    return run_ctmc(gen, (y0,), stop, rng, **kw)


def simulate_killed_yule(params: YuleParams, w0: int, kills: KillSchedule, stop: StoppingRule, rng: RngStream):
    """Yule process losing one individual at each kill epoch.

    Returns ``(trajectory, extinct, extinction_epoch)``. Births occur at
    rate mu * W; at each epoch sigma_n with W > 0 the count drops by one.
    State 0 is absorbing, so later kills are skipped.
    """
    if w0 < 1:
        raise InvalidParameterError("w0 must be >= 1")
    horizon = stop.horizon if stop.horizon is not None else math.inf
    budget = stop.max_events if stop.max_events is not None else -1
    mu = params.mu
    times = array("d")
    path = [w0]
    w, t, n = w0, 0.0, 0
    reason = "horizon"
    extinct_at = None
    sig = kills.epochs()
    nxt = next(sig, math.inf)
    while True:
        if n == budget:
            reason = "budget"
            break
        tb = t + rng.exponential(mu * w)
        if nxt <= tb:
            if nxt > horizon:
                t = horizon
                break
            t = nxt
            w -= 1
            nxt = next(sig, math.inf)
        else:
            if tb > horizon:
                t = horizon
                break
            t = tb
            w += 1
        n += 1
        times.append(t)
        path.append(w)
        if w == 0:
            extinct_at = t
            t = horizon if horizon < math.inf else t
            break
    traj = Trajectory(
        times=np.frombuffer(times, dtype=float).copy(),
        states=np.array(path, dtype=np.int64).reshape(-1, 1),
        t_end=t,
        stop_reason=reason,
        degenerate=extinct_at is not None,
        n_events=n,
    )
    return traj, extinct_at is not None, extinct_at


W_ESCAPE = 10**15


def killed_yule_skeleton(mu: float, w0: int, kills: KillSchedule, horizon: float, rng: RngStream):
    """W(horizon) for a killed Yule process, sampled only at kill epochs.

    Between kills W is a Yule process, whose law after time d from n
    individuals is n + NegBin(n, exp(-mu d)); stepping from epoch to epoch
    with that draw is exact and costs O(kills) instead of O(births).
    Above ``W_ESCAPE`` the relative noise is below 1e-7 and W grows as
    n exp(mu d) instead, returned as a float.
    Returns ``(w_at_horizon, extinction_epoch_or_None)``.
    """
    if w0 < 1:
        raise InvalidParameterError("w0 must be >= 1")
    nb = rng.generator.negative_binomial

    def grow(w, d):
        if w >= W_ESCAPE:
            return w * math.exp(mu * d)
        return w + int(nb(w, math.exp(-mu * d)))

    w, t = w0, 0.0
    for s in kills.epochs():
        if s > horizon:
            break
        if s > t:
            w = grow(w, s - t)
            t = s
        w -= 1
        if w == 0:
            return 0, s
    if horizon > t:
        w = grow(w, horizon - t)
    return w, None


# ---------------------------------------------------------------------------
# renewing birth-death process and its representations


def _rbh_generator(mu_z: float, nu: float):
    up, down = (1,), (-1,)

    def gen(s):
        z = s[0]
        return ((mu_z * (z if z > 1 else 1), up), (nu * z, down))

    return gen


def simulate_rbh(params: RbhParams, z0: int, stop: StoppingRule, rng: RngStream, **kw):
    """Birth rate mu_z * max(z, 1), death rate nu * z. Returns (trajectory, birth log)."""
    if z0 < 0:
        raise InvalidParameterError("z0 must be nonnegative")
    traj = run_ctmc(_rbh_generator(params.mu_z, params.nu), (z0,), stop, rng, **kw)
    log = BirthLog.from_trajectory(traj) if not traj.thinned else BirthLog(np.empty(0))
    return traj, log


def simulate_branching(p: float, rate: float, n0: int, stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    """(p, rate)-branching process: each particle, at ``rate``, splits in two
    with probability p and dies otherwise. Absorbed at 0."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError("p must lie in [0, 1]")
    _positive("rate", rate)
    up, down = (1,), (-1,)

    def gen(s):
        total = rate * s[0]
        return ((p * total, up), ((1.0 - p) * total, down))

    return run_ctmc(gen, (n0,), stop, rng, **kw)


def branching_extinction_time(p: float, rate: float, n0: int, rng: RngStream, t_max: float = math.inf) -> float:
    """Extinction time of a (p, rate)-branching process; inf if it outlives ``t_max``."""
    n, t = n0, 0.0
    while n > 0:
        t += rng.exponential(rate * n)
        if t > t_max:
            return math.inf
        n += 1 if rng.uniform() < p else -1
    return t


def simulate_mm1(arrival: float, service: float, l0: int, stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    """Number of jobs in an M/M/1 queue."""
    up, down = (1,), (-1,)

    def gen(s):
        return ((arrival, up), (service if s[0] > 0 else 0.0, down))

    return run_ctmc(gen, (l0,), stop, rng, **kw)


def lamperti_time_change(queue: Trajectory, horizon: Optional[float] = None) -> Trajectory:
    """Map a queue path L(s) to Z(t) = L(C(t)).

    A(s) is the integral of 1 / max(1, L(u)) over [0, s] and C its inverse.
    The jump chain is kept exactly; epoch s_k becomes A(s_k). With
    ``horizon`` the result is cut at Z-time ``horizon``.
    """
    if queue.thinned:
        raise ValueError("time change needs the full event log")
    levels = np.maximum(queue.states[:, 0], 1).astype(float)
    edges = np.concatenate(([0.0], queue.times, [queue.t_end]))
    a = np.concatenate(([0.0], np.cumsum(np.diff(edges) / levels)))
    epochs = a[1:-1]
    a_end = a[-1]
    states = queue.states
    if horizon is not None:
        if horizon > a_end * (1 + 1e-12) + 1e-12:
            raise ValueError(f"queue path covers Z-time {a_end}, short of {horizon}")
        keep = int(np.searchsorted(epochs, horizon, side="right"))
        epochs, states, a_end = epochs[:keep], states[: keep + 1], horizon
    return Trajectory(
        times=epochs.copy(),
        states=states.copy(),
        t_end=float(a_end),
        stop_reason=queue.stop_reason,
        n_events=len(epochs),
        meta={"queue_time_end": queue.t_end},
    )


def simulate_z_via_timechange(params: RbhParams, z0: int, stop: StoppingRule, rng: RngStream) -> Trajectory:
    """Z built as an M/M/1 queue (arrival mu_z, service nu) run on the clock C.

    The queue is simulated in its own time until its accumulated A-clock
    passes the Z-horizon, then :func:`lamperti_time_change` maps it over.
    """
    if z0 < 0:
        raise InvalidParameterError("z0 must be nonnegative")
    if stop.horizon is None:
        raise InvalidParameterError("the time-changed simulator needs a horizon")
    horizon = stop.horizon
    budget = stop.max_events if stop.max_events is not None else -1
    lam, nu = params.mu_z, params.nu
    times = array("d")
    path = [z0]
    l, s, a, n = z0, 0.0, 0.0, 0
    reason = "horizon"
    while True:
        if n == budget:
            reason = "budget"
            break
        rate = lam + (nu if l > 0 else 0.0)
        d = rng.exponential(rate)
        level = l if l > 1 else 1
        if a + d / level >= horizon:
            s += (horizon - a) * level
            a = horizon
            break
        s += d
        a += d / level
        l += 1 if rng.uniform() * rate < lam else -1
        n += 1
        times.append(s)
        path.append(l)
    queue = Trajectory(
        times=np.frombuffer(times, dtype=float).copy(),
        states=np.array(path, dtype=np.int64).reshape(-1, 1),
        t_end=s,
        stop_reason=reason,
        n_events=n,
    )
    z = lamperti_time_change(queue, horizon if reason == "horizon" else None)
    z.meta["queue"] = queue
    return z


# ---------------------------------------------------------------------------
# single-chunk network and free process

_ARR2 = (1, 0)
_XFER2 = (-1, 1)
_DEP2 = (0, -1)


def _servers(boundary: Boundary):
    if boundary is Boundary.PLUS_ONE:
        return lambda x: x + 1
    return _vee


def single_chunk_generator(params: SingleChunkParams):
    lam, mu, nu, r = params.lam, params.mu, params.nu, params.rate_fn
    servers = _servers(params.boundary)

    def gen(s):
        x0, x1 = s
        tr = mu * r(x0, x1) * servers(x1) if x0 > 0 else 0.0
        return ((lam, _ARR2), (tr, _XFER2), (nu * x1, _DEP2))

    return gen


def simulate_single_chunk(params: SingleChunkParams, x0: Sequence[int], stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    """(requests without the file, servers): arrivals at lambda, transfers at
    mu r(x) (x1 v 1) 1{x0 > 0}, departures at nu x1."""
    return run_ctmc(single_chunk_generator(params), _check_init(x0, 2), stop, rng, **kw)


def free_generator(params: FreeParams, boundary: Boundary = Boundary.OR_ONE):
    lam, rate, nu = params.lam, params.mu * params.delta, params.nu
    servers = _servers(boundary)

    def gen(s):
        y1 = s[1]
        return ((lam, _ARR2), (rate * servers(y1), _XFER2), (nu * y1, _DEP2))

    return gen


def simulate_free(delta: float, mu: float, nu: float, lam: float, y0: Sequence[int], stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    """Free process: transfers at mu delta (y1 v 1) with no positivity
    indicator, so the first coordinate may go negative."""
    params = FreeParams(delta, mu, nu, lam)
    return run_ctmc(free_generator(params), _check_init(y0, 2, allow_negative_first=True), stop, rng, **kw)


# ---------------------------------------------------------------------------
# two-chunk network and saturated system

_E0 = (1, 0, 0)
_E1_E0 = (-1, 1, 0)
_E2_E1 = (0, -1, 1)
_M_E2 = (0, 0, -1)


def two_chunk_generator(params: TwoChunkParams):
    lam, mu1, mu2, nu = params.lam, params.mu1, params.mu2, params.nu

    def gen(s):
        x0, x1, x2 = s
        return (
            (lam, _E0),
            (mu1 * (x1 if x1 > 1 else 1) if x0 > 0 else 0.0, _E1_E0),
            (mu2 * (x2 if x2 > 1 else 1) if x1 > 0 else 0.0, _E2_E1),
            (nu * x2, _M_E2),
        )

    return gen


def simulate_two_chunk(params: TwoChunkParams, x0: Sequence[int], stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
    return run_ctmc(two_chunk_generator(params), _check_init(x0, 3), stop, rng, **kw)


_S_E1 = (1, 0)
_S_E2_E1 = (-1, 1)
_S_M_E2 = (0, -1)

# Above this size the first saturated queue is treated as never returning to 0.
X1_ESCAPE = 10**15


def saturated_generator(params: SaturatedParams):
    mu1, mu2, nu = params.mu1, params.mu2, params.nu

    def gen(s):
        z1, z2 = s
        return (
            (mu1 * (z1 if z1 > 1 else 1), _S_E1),
            (mu2 * (z2 if z2 > 1 else 1) if z1 > 0 else 0.0, _S_E2_E1),
            (nu * z2, _S_M_E2),
        )

    return gen


def simulate_saturated(
    params: SaturatedParams,
    z0: Sequence[int],
    stop: StoppingRule,
    rng: RngStream,
    *,
    lumped: bool = False,
    record: bool = True,
    integrate_from: Optional[float] = None,
    **kw,
) -> Trajectory:
    """Saturated system (first queue never empty).

    With ``lumped=True`` the births of the first coordinate are not
    simulated one by one: while z1 > 0 the second coordinate evolves
    independently of z1's size, so the run jumps from one z2-event to the
    next and draws z1's Yule growth over the gap as a negative binomial.
    The second coordinate's path is exact; the first is exact at the
    recorded epochs only. ``occupation`` then holds [nan, integral of z2].
    Once z1 exceeds ``X1_ESCAPE`` it is frozen there (flagged in ``meta``).
    """
    z0 = _check_init(z0, 2)
    if not lumped:
        return run_ctmc(saturated_generator(params), z0, stop, rng, record=record, integrate_from=integrate_from, **kw)
    if kw:
        raise InvalidParameterError(f"lumped saturated simulation does not support {sorted(kw)}")
    mu1, mu2, nu = params.mu1, params.mu2, params.nu
    horizon = stop.horizon if stop.horizon is not None else math.inf
    budget = stop.max_events if stop.max_events is not None else -1
    nb = rng.generator.negative_binomial
    uniform = rng.uniform
    log1p = math.log1p
    exp = math.exp
    times = array("d")
    p1: list[int] = [z0[0]]
    p2: list[int] = [z0[1]]
    z1, z2 = z0
    t, n = 0.0, 0
    occ_from = integrate_from if integrate_from is not None else math.inf
    occ = 0.0
    reason = "horizon"
    escaped_at = None
    while True:
        if n == budget:
            reason = "budget"
            break
        b2 = mu2 * (z2 if z2 > 1 else 1) if z1 > 0 else 0.0
        d2 = nu * z2
        b1 = mu1 if z1 == 0 else 0.0
        total = b1 + b2 + d2
        t_next = t - log1p(-uniform()) / total
        t_stop = t_next if t_next < horizon else horizon
        if t_stop > occ_from:
            occ += (t_stop - (t if t > occ_from else occ_from)) * z2
        if z1 > 0 and escaped_at is None:
            z1 += int(nb(z1, exp(-mu1 * (t_stop - t))))
            if z1 > X1_ESCAPE:
                z1 = X1_ESCAPE
                escaped_at = t_stop
        if t_next >= horizon:
            t = horizon
            break
        t = t_next
        v = uniform() * total
        if v < b1:
            z1 = 1
        elif v < b1 + b2:
            z2 += 1
            if escaped_at is None:
                z1 -= 1
        else:
            z2 -= 1
        n += 1
        if record:
            times.append(t)
            p1.append(z1)
            p2.append(z2)
    if not record:
        p1, p2 = [z0[0], z1], [z0[1], z2]
    return Trajectory(
        times=np.frombuffer(times, dtype=float).copy() if record else np.empty(0),
        states=np.column_stack([np.array(p1, dtype=np.int64), np.array(p2, dtype=np.int64)]),
        t_end=t,
        stop_reason=reason,
        thinned=not record,
        n_events=n,
        occupation=None if integrate_from is None else np.array([math.nan, occ]),
        meta={"lumped": True, "x1_escaped_at": escaped_at},
    )


# ---------------------------------------------------------------------------
# coupled constructions

_C_ARR = (1, 0, 1, 0)
_C_DEP_BOTH = (0, -1, 0, -1)
_C_DEP_Y = (0, 0, 0, -1)
_C_DEP_X = (0, -1, 0, 0)
_C_XFER_BOTH = (-1, 1, -1, 1)
_C_XFER_Y = (0, 0, -1, 1)
_C_XFER_X = (-1, 1, 0, 0)


def _split_marginal(traj: Trajectory, cols: slice) -> Trajectory:
    st = traj.states[:, cols]
    moved = np.any(np.diff(st, axis=0) != 0, axis=1)
    keep = np.concatenate(([True], moved))
    return Trajectory(
        times=traj.times[moved],
        states=st[keep],
        t_end=traj.t_end,
        stop_reason=traj.stop_reason,
        n_events=int(moved.sum()),
    )


def simulate_coupled(mode: str, params: SingleChunkParams, delta: float, init: Sequence[int], stop: StoppingRule, rng: RngStream):
    """Joint simulation of the single-chunk network X and a free process Y.

    ``mode="upper"``: Y is the free process with delta = 1 and, pathwise,
    X0 >= Y0 and X1 <= Y1 for all t.
    ``mode="lower"``: Y is the free process with the given delta, the run
    stops at the first time r(X) <= delta or X0 = 0, and up to then
    X0 <= Y0 and X1 >= Y1.

    Each shared move (arrival, common departure, common transfer) fires
    both chains on one clock; the excess rate of the faster chain drives a
    move of that chain alone. Returns ``(X, Y, stop_reason)`` with
    stop_reason in {"horizon", "budget", "tau_delta", "sigma"}.
    """
    mode = mode.lower()
    if mode not in ("upper", "lower"):
        raise InvalidParameterError(f"mode must be 'upper' or 'lower', got {mode!r}")
    if not 0.0 < delta <= 1.0:
        raise InvalidParameterError("delta must lie in (0, 1]")
    x = _check_init(init, 2)
    lam, mu, nu, r = params.lam, params.mu, params.nu, params.rate_fn
    servers = _servers(params.boundary)

    if mode == "upper":

        def gen(s):
            x0, x1, y0, y1 = s
            a = mu * r(x0, x1) * servers(x1) if x0 > 0 else 0.0
            b = mu * servers(y1)
            if a > b or x1 > y1:
                raise CouplingError(f"upper coupling broken at {s}")
            return (
                (lam, _C_ARR),
                (nu * x1, _C_DEP_BOTH),
                (nu * (y1 - x1), _C_DEP_Y),
                (a, _C_XFER_BOTH),
                (b - a, _C_XFER_Y),
            )

        absorb = None
    else:

        def gen(s):
            x0, x1, y0, y1 = s
            a = mu * r(x0, x1) * servers(x1) if x0 > 0 else 0.0
            b = mu * delta * servers(y1)
            if b > a or y1 > x1:
                raise CouplingError(f"lower coupling broken at {s}")
            return (
                (lam, _C_ARR),
                (nu * y1, _C_DEP_BOTH),
                (nu * (x1 - y1), _C_DEP_X),
                (b, _C_XFER_BOTH),
                (a - b, _C_XFER_X),
            )

        def absorb(s):
            return s[0] == 0 or r(s[0], s[1]) <= delta

    rule = StoppingRule(stop.horizon, stop.max_events, absorb)
    joint = run_ctmc(gen, x + x, rule, rng)
    st = joint.states
    if mode == "upper":
        bad = (st[:, 0] < st[:, 2]) | (st[:, 1] > st[:, 3])
    else:
        bad = (st[:, 0] > st[:, 2]) | (st[:, 1] < st[:, 3])
    if bad.any():
        k = int(np.argmax(bad))
        raise CouplingError(f"{mode} coupling ordering violated at event {k}: {tuple(st[k])}")
    reason = joint.stop_reason
    if reason == "absorbed":
        f = joint.final_state
        reason = "sigma" if f[0] == 0 else "tau_delta"
    xs = _split_marginal(joint, slice(0, 2))
    ys = _split_marginal(joint, slice(2, 4))
    xs.stop_reason = ys.stop_reason = reason
    return xs, ys, reason


# ---------------------------------------------------------------------------
# interacting pair (W, Z) and the V-chain


def run_wz_to_extinction(
    mu_w: float,
    rbh: RbhParams,
    init: Sequence[int],
    rng: RngStream,
    safety_horizon: float = 1e3,
    max_events: Optional[int] = None,
) -> WzOutcome:
    """Run Z and the Yule process W killed at Z's birth epochs until W = 0.

    The unkilled envelope Y is carried along: a Y birth comes from a W
    individual at rate mu_w * W and from an already-killed lineage at rate
    mu_w * (Y - W). ``my_star`` is the running max of exp(-mu_w t) Y(t),
    which between births only decreases, so checking it at birth epochs
    is exact over [0, H0].
    """
    w0, z0 = (int(v) for v in init)
    if w0 < 1 or z0 < 0:
        raise InvalidParameterError(f"need w0 >= 1 and z0 >= 0, got {(w0, z0)}")
    _positive("mu_w", mu_w)
    mu_z, nu = rbh.mu_z, rbh.nu
    budget = -1 if max_events is None else max_events
    uniform = rng.uniform
    log1p = math.log1p
    exp = math.exp
    y, w, z = w0, w0, z0
    t, n = 0.0, 0
    mstar = float(w0)
    while n != budget:
        rw = mu_w * w
        ry = mu_w * (y - w)
        rb = mu_z * (z if z > 1 else 1)
        total = rw + ry + rb + nu * z
        t -= log1p(-uniform()) / total
        if t >= safety_horizon:
            break
        n += 1
        v = uniform() * total
        if v < rw + ry:
            y += 1
            if v < rw:
                w += 1
            m = y * exp(-mu_w * t)
            if m > mstar:
                mstar = m
        elif v < rw + ry + rb:
            z += 1
            w -= 1
            if w == 0:
                return WzOutcome(t, z, mstar, True, n)
        else:
            z -= 1
    return WzOutcome(math.inf, z, mstar, False, n)


def v_chain_step(params: VChainParams, v: int, rng: RngStream, safety_horizon: float = 1e3) -> int:
    """One transition V -> sum of A thinned indicators, A ~ Z(H0) from (1, v)."""
    out = run_wz_to_extinction(params.mu_w, params.rbh, (1, v), rng, safety_horizon)
    if not out.extinct:
        raise ModelError(f"W did not die out before t={safety_horizon} from (1, {v})")
    a = out.z_at_h0
    if params.thinning == "bernoulli":
        keep = params.p
    else:
        keep = math.exp(-params.rbh.nu * rng.exponential(params.mu_w))
    return int(rng.generator.binomial(a, keep))


def _require_stable(params: VChainParams) -> None:
    if not params.stable:
        raise InvalidParameterError(
            f"V-chain needs mu_z - nu > mu_w, got {params.rbh.mu_z} - {params.rbh.nu} <= {params.mu_w}"
        )


def v_chain_simulate(params: VChainParams, v0: int, steps: int, rng: RngStream, K: Optional[int] = None) -> VChainRun:
    """``steps`` transitions from ``v0``; reports N_K = first n with V_n <= K
    and the number of visits to [0, K]."""
    _require_stable(params)
    if steps < 1 or v0 < 0:
        raise InvalidParameterError("need steps >= 1 and v0 >= 0")
    vals = np.empty(steps + 1, dtype=np.int64)
    vals[0] = v = v0
    for i in range(1, steps + 1):
        v = v_chain_step(params, v, rng)
        vals[i] = v
    n_k, visits = None, 0
    if K is not None:
        inside = np.flatnonzero(vals <= K)
        visits = len(inside)
        n_k = int(inside[0]) if visits else None
    return VChainRun(vals, n_k, visits)


def v_chain_hitting_time(params: VChainParams, v0: int, K: int, rng: RngStream, max_steps: int = 100_000) -> int:
    """N_K = inf{n >= 0 : V_n <= K}, run step by step until it happens."""
    _require_stable(params)
    v, n = v0, 0
    while v > K:
        if n == max_steps:
            raise ModelError(f"V-chain did not enter [0, {K}] within {max_steps} steps")
        v = v_chain_step(params, v, rng)
        n += 1
    return n


# ---------------------------------------------------------------------------
# model registry


@dataclass
class ProcessSpec:
    """A named model with its parameters and initial state, ready to run."""

    model: str
    params: object
    init: tuple
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParameterError(f"unknown model {self.model!r}; known: {sorted(MODELS)}")

    def simulate(self, stop: StoppingRule, rng: RngStream, **kw) -> Trajectory:
        return MODELS[self.model](self, stop, rng, **kw)


def _run_killed(spec, stop, rng, **kw):
    return simulate_killed_yule(spec.params, spec.init[0], spec.options.get("kills", KillSchedule.empty()), stop, rng)[0]


def _run_coupled(spec, stop, rng, **kw):
    xs, ys, reason = simulate_coupled(spec.options.get("mode", "upper"), spec.params, spec.options.get("delta", 1.0), spec.init, stop, rng)
    t = np.union1d(xs.times, ys.times)
    joint = np.hstack([xs.states_at(np.concatenate(([0.0], t))), ys.states_at(np.concatenate(([0.0], t)))])
    joint[0] = list(xs.states[0]) + list(ys.states[0])
    return Trajectory(t, joint, xs.t_end, stop_reason=reason, n_events=len(t))


def _run_wz(spec, stop, rng, **kw):
    mu_w, rbh = spec.params
    out = run_wz_to_extinction(mu_w, rbh, spec.init, rng, stop.horizon or 1e3, stop.max_events)
    return Trajectory(np.empty(0), np.array([list(spec.init), [0, out.z_at_h0]]), out.h0, meta={"outcome": out})


def _run_vchain(spec, stop, rng, **kw):
    steps = spec.options.get("steps", stop.max_events or 100)
    run = v_chain_simulate(spec.params, spec.init[0], steps, rng, spec.options.get("K"))
    return Trajectory(np.arange(1.0, steps + 1), run.values.reshape(-1, 1), float(steps), thinned=True, meta={"run": run})


MODELS: dict[str, Callable] = {
    "yule": lambda s, stop, rng, **kw: simulate_yule(s.params, s.init[0], stop, rng, **kw),
    "killed_yule": _run_killed,
    "rbh": lambda s, stop, rng, **kw: simulate_rbh(s.params, s.init[0], stop, rng, **kw)[0],
    "rbh_timechange": lambda s, stop, rng, **kw: simulate_z_via_timechange(s.params, s.init[0], stop, rng),
    "single_chunk": lambda s, stop, rng, **kw: simulate_single_chunk(s.params, s.init, stop, rng, **kw),
    "free": lambda s, stop, rng, **kw: run_ctmc(free_generator(s.params), _check_init(s.init, 2, True), stop, rng, **kw),
    "two_chunk": lambda s, stop, rng, **kw: simulate_two_chunk(s.params, s.init, stop, rng, **kw),
    "saturated": lambda s, stop, rng, **kw: simulate_saturated(s.params, s.init, stop, rng, lumped=s.options.get("lumped", False), **kw),
    "coupled": _run_coupled,
    "wz": _run_wz,
    "v_chain": _run_vchain,
}
