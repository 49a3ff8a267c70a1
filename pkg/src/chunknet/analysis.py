"""Closed-form thresholds, stationary laws, regime classification and the
Monte Carlo estimators that check the limit behaviour of the models."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .kernel import (
    EstimateSummary,
    InvalidParameterError,
    ReplicationError,
    RngStream,
    StoppingRule,
    replicate_values,
    summarize,
)
from .processes import (
    Boundary,
    KillSchedule,
    ProcessSpec,
    RbhParams,
    SaturatedParams,
    SingleChunkParams,
    TwoChunkParams,
    VChainParams,
    killed_yule_skeleton,
    run_wz_to_extinction,
    simulate_rbh,
    v_chain_hitting_time,
    v_chain_step,
)

__all__ = [
    "DomainError",
    "LambdaModel",
    "Verdict",
    "StabilityVerdict",
    "TailDiagnostic",
    "ScalingRow",
    "ScalingTable",
    "lambda_star",
    "eta_star",
    "gamma_eta",
    "required_z_max",
    "birth_death_stationary",
    "truncated_generator_stationary",
    "series_sum_first_step",
    "classify",
    "estimate_stationary_departure_rate",
    "estimate_growth_slope",
    "estimate_time_average",
    "estimate_survival",
    "estimate_series_sum",
    "estimate_h0_scaling",
    "estimate_nk",
    "log_drift",
    "affine_log_fit",
]

REL_TOL = 1e-12
TAIL_MASS = 1e-10


class DomainError(InvalidParameterError):
    """Argument outside the domain where a formula is defined."""


class LambdaModel(str, enum.Enum):
    FREE_OR_ONE = "FreeOrOne"
    FREE_PLUS_ONE = "FreePlusOne"
    TWO_CHUNK = "TwoChunk"


class Verdict(str, enum.Enum):
    ERGODIC = "Ergodic"
    TRANSIENT = "Transient"
    CRITICAL = "Critical"
    INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# closed forms


def lambda_star(model, mu: float, nu: float, delta: float = 1.0) -> float:
    """Largest stable arrival rate: nu times the mean of the stationary
    birth-death process with birth rate delta*mu*(z v 1) (or delta*mu*(z+1))
    and death rate nu*z.

    ``TwoChunk`` uses the same formula with ``mu = mu2``. For the (z v 1)
    models with rho = delta*mu/nu >= 1 the birth-death process is transient
    and ``inf`` is returned with a warning.
    """
    model = LambdaModel(model)
    for name, v in (("mu", mu), ("nu", nu)):
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{name} must be positive, got {v!r}")
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must lie in (0, 1], got {delta!r}")
    a = delta * mu
    if model is LambdaModel.FREE_PLUS_ONE:
        if nu <= a:
            raise DomainError(f"plus-one threshold needs nu > delta*mu, got nu={nu}, delta*mu={a}")
        return a * nu / (nu - a)
    rho = a / nu
    if rho >= 1.0:
        warnings.warn("second coordinate transient: rho >= 1, threshold is infinite", RuntimeWarning, stacklevel=2)
        return math.inf
    return a / ((1.0 - rho) * (1.0 - math.log1p(-rho)))


def eta_star(x: float) -> float:
    """Smaller root of (1-x) e^2 - (2-x) e + (1-x) = 0 for 0 < x < 1."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x!r}")
    return (2.0 - x - math.sqrt(x * (4.0 - 3.0 * x))) / (2.0 * (1.0 - x))


def gamma_eta(eta: float, mu_z: float, nu: float) -> float:
    """Bound mu_z / ((1 - eta)(mu_z - eta (mu_z - nu))); equals 1 at eta = 0
    and mu_z / nu at eta = eta_star(nu / mu_z)."""
    if not (mu_z > 0 and nu > 0):
        raise DomainError("mu_z and nu must be positive")
    if not 0.0 <= eta < 1.0:
        raise DomainError(f"eta must lie in [0, 1), got {eta!r}")
    if eta * (mu_z - nu) >= mu_z:
        raise DomainError("need eta * (mu_z - nu) < mu_z")
    return mu_z / ((1.0 - eta) * (mu_z - eta * (mu_z - nu)))


def _pi0(rho: float) -> float:
    return 1.0 / (1.0 - math.log1p(-rho))


def required_z_max(rho: float, tail: float = TAIL_MASS) -> int:
    """Smallest z with pi0 rho^(z+1) / ((z+1)(1-rho)) < tail, a bound on the
    stationary mass beyond z."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho!r}")
    p0 = _pi0(rho)
    z = 1
    while p0 * rho ** (z + 1) / ((z + 1) * (1.0 - rho)) >= tail:
        z += 1
    return z


def birth_death_stationary(rho: float, z_max: Optional[int] = None) -> np.ndarray:
    """Stationary law of the chain with birth rate rho*(z v 1), death rate z.

    pi(0) = 1 / (1 - log(1 - rho)) and pi(z) = pi(0) rho^z / z, truncated
    at ``z_max`` (default: :func:`required_z_max`) and renormalized.
    """
    need = required_z_max(rho)
    if z_max is None:
        z_max = need
    elif z_max < need:
        raise DomainError(f"z_max={z_max} leaves tail mass >= {TAIL_MASS}; required z_max={need}")
    z = np.arange(1, z_max + 1, dtype=float)
    pi = np.empty(z_max + 1)
    pi[0] = 1.0
    pi[1:] = np.exp(z * math.log(rho) - np.log(z))
    return pi / math.fsum(pi)


def truncated_generator_stationary(birth: Callable[[int], float], death: Callable[[int], float], z_max: int) -> np.ndarray:
    """Solve pi Q = 0, sum(pi) = 1 for a birth-death generator on {0..z_max}
    (births out of z_max suppressed). Independent of any closed form."""
    n = z_max + 1
    q = np.zeros((n, n))
    for k in range(n):
        if k < z_max:
            q[k, k + 1] = birth(k)
        if k > 0:
            q[k, k - 1] = death(k)
        q[k, k] = -q[k].sum()
    a = q.T.copy()
    a[-1] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def series_sum_first_step(gamma: float, rbh: RbhParams, z0: int, z_max: int = 2000) -> float:
    """E_z0 of sum_n exp(-gamma sigma_n) over the birth epochs, by first-step analysis.

    f(z) = (b_z (1 + f(z+1)) + d_z f(z-1)) / (b_z + d_z + gamma), solved on
    {0..z_max} with f(z_max + 1) replaced by f(z_max).
    """
    if not gamma > max(rbh.mu_z - rbh.nu, 0.0):
        raise DomainError("the series has infinite mean unless gamma > max(mu_z - nu, 0)")
    n = z_max + 1
    a = np.zeros((n, n))
    rhs = np.zeros(n)
    for z in range(n):
        b = rbh.mu_z * max(z, 1)
        d = rbh.nu * z
        a[z, z] = b + d + gamma
        a[z, min(z + 1, z_max)] -= b
        if z > 0:
            a[z, z - 1] -= d
        rhs[z] = b
    ab = np.zeros((3, n))
    ab[0, 1:] = np.diag(a, 1)
    ab[1] = np.diag(a)
    ab[2, :-1] = np.diag(a, -1)
    return float(solve_banded((1, 1), ab, rhs)[z0])


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class TailDiagnostic:
    """Convergence report for a long-run average.

    ``max_to_sum_ratio`` is the largest single replication's share of the
    total; ``stabilized`` says the estimate moved by less than 5% between
    the half-horizon and full-horizon windows of the same runs.
    """

    max_to_sum_ratio: float
    stabilized: bool
    half_estimate: float = math.nan
    full_estimate: float = math.nan
    events: int = 0

    @property
    def relative_change(self) -> float:
        if self.full_estimate == 0:
            return 0.0 if self.half_estimate == 0 else math.inf
        return abs(self.full_estimate - self.half_estimate) / abs(self.full_estimate)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    regime: str
    threshold: Optional[float] = None
    citation: str = ""
    note: str = ""

    def __str__(self) -> str:
        tail = f" [{self.citation}]" if self.citation else ""
        return f"{self.verdict.value} ({self.note}){tail}" if self.note else f"{self.verdict.value}{tail}"


def _cmp(a, b) -> int:
    """Sign of a - b: exact for rationals, else equal within REL_TOL."""
    if isinstance(a, Rational) and isinstance(b, Rational):
        d = Fraction(a) - Fraction(b)
        return (d > 0) - (d < 0)
    if abs(a - b) <= REL_TOL * max(abs(a), abs(b)):
        return 0
    return 1 if a > b else -1


def _cmp_sum(a, b, c) -> int:
    """Sign of a - b - c, with the same tolerance rule as :func:`_cmp`."""
    if all(isinstance(v, Rational) for v in (a, b, c)):
        d = Fraction(a) - Fraction(b) - Fraction(c)
        return (d > 0) - (d < 0)
    d = a - b - c
    if abs(d) <= REL_TOL * max(abs(a), abs(b), abs(c)):
        return 0
    return 1 if d > 0 else -1


def _fmt(x: float) -> str:
    return f"{x:g}"


def _threshold_verdict(lam, thr: float, regime: str, sym: str = "λ*") -> StabilityVerdict:
    c = _cmp(lam, thr)
    if c < 0:
        return StabilityVerdict(Verdict.ERGODIC, regime, thr, "Ergodicity Prop.", f"λ={_fmt(lam)} < {sym}={thr:.6f}")
    if c > 0:
        return StabilityVerdict(Verdict.TRANSIENT, regime, thr, "Transience Prop.", f"λ={_fmt(lam)} > {sym}={thr:.6f}")
    return StabilityVerdict(Verdict.CRITICAL, regime, thr, "", f"λ={sym}={thr:.6f}, no result at the threshold")


def classify(
    model: str,
    params,
    lambda_s_estimate: Optional[EstimateSummary] = None,
    lambda_s_diagnostic: Optional[TailDiagnostic] = None,
) -> StabilityVerdict:
    """Regime of the single-chunk or two-chunk network.

    Parameters on a boundary between regimes give Critical (threshold
    equality) or Inconclusive (rate equalities). For the two-chunk network
    with mu2 - nu > mu1 the threshold lambda^S must be supplied as an
    estimate; it is used only if its diagnostic says it stabilized and its
    interval does not contain lambda.
    """
    key = model.replace("_", "").lower()
    if key == "singlechunk":
        if not isinstance(params, SingleChunkParams):
            raise InvalidParameterError("SingleChunk classification needs SingleChunkParams")
        return _classify_single(params)
    if key == "twochunk":
        if not isinstance(params, TwoChunkParams):
            raise InvalidParameterError("TwoChunk classification needs TwoChunkParams")
        return _classify_two(params, lambda_s_estimate, lambda_s_diagnostic)
    raise InvalidParameterError(f"unknown model {model!r} for classify")


def _classify_single(p: SingleChunkParams) -> StabilityVerdict:
    if not p.rate_fn.satisfies_condition_c():
        return StabilityVerdict(
            Verdict.INCONCLUSIVE,
            "single-chunk",
            None,
            "",
            f"rate function {p.rate_fn.name} does not tend to 1 as x0 grows; no result applies",
        )
    if _cmp(p.mu, p.nu) >= 0:
        return StabilityVerdict(Verdict.ERGODIC, "single-chunk μ≥ν", None, "Ergodicity Prop.", f"μ={_fmt(p.mu)} ≥ ν={_fmt(p.nu)}")
    kind = LambdaModel.FREE_PLUS_ONE if p.boundary is Boundary.PLUS_ONE else LambdaModel.FREE_OR_ONE
    return _threshold_verdict(p.lam, lambda_star(kind, p.mu, p.nu), "single-chunk μ<ν")


def _classify_two(p: TwoChunkParams, est: Optional[EstimateSummary], diag: Optional[TailDiagnostic]) -> StabilityVerdict:
    c_nu = _cmp(p.mu2, p.nu)
    if c_nu == 0:
        return StabilityVerdict(Verdict.INCONCLUSIVE, "two-chunk μ₂=ν", None, "", "μ₂=ν lies between the covered cases")
    if c_nu < 0:
        return _threshold_verdict(p.lam, lambda_star(LambdaModel.TWO_CHUNK, p.mu2, p.nu), "two-chunk case 3")
    c12 = _cmp_sum(p.mu2, p.nu, p.mu1)
    if c12 == 0:
        return StabilityVerdict(Verdict.INCONCLUSIVE, "two-chunk μ₂−ν=μ₁", None, "", "μ₂−ν=μ₁ lies between the covered cases")
    if c12 < 0:
        return StabilityVerdict(Verdict.ERGODIC, "two-chunk case 1", None, "Two-chunk Prop.", "μ₁ > μ₂−ν > 0, any λ")
    regime = "two-chunk case 2"
    if est is None:
        return StabilityVerdict(Verdict.INCONCLUSIVE, regime, None, "", "needs a λ^S estimate")
    if diag is None or not diag.stabilized:
        return StabilityVerdict(Verdict.INCONCLUSIVE, regime, est.mean, "", "λ^S estimate did not stabilize")
    if est.lower <= p.lam <= est.upper:
        return StabilityVerdict(Verdict.INCONCLUSIVE, regime, est.mean, "", f"λ={_fmt(p.lam)} inside λ^S interval [{est.lower:.6f}, {est.upper:.6f}]")
    if p.lam < est.lower:
        return StabilityVerdict(Verdict.ERGODIC, regime, est.mean, "Two-chunk Prop.", f"λ={_fmt(p.lam)} < λ^S≈{est.mean:.6f}")
    return StabilityVerdict(Verdict.TRANSIENT, regime, est.mean, "Two-chunk Prop.", f"λ={_fmt(p.lam)} > λ^S≈{est.mean:.6f}")


# ---------------------------------------------------------------------------
# estimators


def _departure_coordinate(spec: ProcessSpec) -> tuple[int, float]:
    p = spec.params
    if spec.model == "rbh":
        if p.mu_z >= p.nu:
            raise DomainError(f"rbh needs nu > mu_z to be positive recurrent, got mu_z={p.mu_z}, nu={p.nu}")
        return 0, p.nu
    if spec.model == "saturated":
        if not (p.mu2 - p.nu > p.mu1 or p.nu > p.mu2):
            raise DomainError("saturated system is not positive recurrent for these rates")
        return 1, p.nu
    raise InvalidParameterError(f"stationary departure rate is defined for rbh and saturated, not {spec.model!r}")


def _window_integrals(spec: ProcessSpec, cuts: Sequence[float], rng: RngStream, coordinate, max_events: Optional[int]):
    """Occupation integrals over [cuts[k], cuts[k+1]] of one coordinate, or
    of the sum of several when ``coordinate`` is a sequence.

    The run is restarted from the previous end state at each cut, which is
    exact for a Markov chain and lets one path serve several windows.
    """
    state = tuple(spec.init)
    out, events = [], 0
    for k, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
        seg = ProcessSpec(spec.model, spec.params, state, spec.options)
        tr = seg.simulate(StoppingRule(b - a, max_events), rng, record=False, integrate_from=0.0)
        if tr.budget_exceeded:
            raise RuntimeError(f"event budget {max_events} exhausted in window [{a}, {b}]")
        out.append(float(np.sum(tr.occupation[coordinate])))
        events += tr.n_events
        state = tr.final_state
    return out, events


def estimate_stationary_departure_rate(
    spec: ProcessSpec,
    horizon: float,
    burn_in: Optional[float] = None,
    reps: int = 10,
    base_seed: int = 0,
    max_events: Optional[int] = None,
):
    """nu times the long-run mean of the departing coordinate.

    Each replication averages over [burn_in, horizon] (burn_in defaults to
    horizon / 5). The same runs also give the average over
    [burn_in / 2, horizon / 2]; the two are compared in the diagnostic.
    """
    coord, nu = _departure_coordinate(spec)
    b = horizon / 5 if burn_in is None else burn_in
    if not 0 <= b < horizon / 2:
        raise InvalidParameterError("burn_in must lie in [0, horizon / 2)")
    cuts = [0.0, b / 2, b, horizon / 2, horizon]
    events = [0]

    def one(rng):
        w, n = _window_integrals(spec, cuts, rng, coord, max_events)
        events[0] += n
        return w

    runs = []
    for i in range(reps):
        try:
            runs.append(one(RngStream(base_seed, i)))
        except Exception as exc:
            raise ReplicationError(i, exc) from exc
    full = [nu * (w[2] + w[3]) / (horizon - b) for w in runs]
    half = [nu * (w[1] + w[2]) / (horizon / 2 - b / 2) for w in runs]
    summary = summarize(full, base_seed)
    total = math.fsum(full)
    h = math.fsum(half) / reps
    diag = TailDiagnostic(
        max_to_sum_ratio=max(full) / total if total > 0 else 1.0,
        stabilized=abs(summary.mean - h) < 0.05 * abs(summary.mean) if summary.mean else h == 0,
        half_estimate=h,
        full_estimate=summary.mean,
        events=events[0],
    )
    return summary, diag


def estimate_growth_slope(
    spec: ProcessSpec,
    coordinate: int,
    horizon: float,
    reps: int,
    base_seed: int = 0,
    from_time: float = 0.0,
    max_events: Optional[int] = None,
) -> EstimateSummary:
    """Mean of (X_c(horizon) - X_c(from_time)) / (horizon - from_time).

    With from_time = 0 and a zero initial coordinate this is X_c(T)/T. A
    positive from_time removes the stationary level, so for an ergodic
    chain the increments are centred at 0.
    """
    if not 0 <= from_time < horizon:
        raise InvalidParameterError("need 0 <= from_time < horizon")
    def run(rng):
        tr = spec.simulate(StoppingRule(horizon, max_events), rng, grid=[from_time, horizon])
        if tr.budget_exceeded:
            raise RuntimeError("event budget exhausted")
        x = tr.states[:, coordinate]
        return (x[-1] - x[1]) / (horizon - from_time)

    return summarize(replicate_values(run, reps, base_seed), base_seed)


def estimate_time_average(
    spec: ProcessSpec,
    coordinates: Sequence[int],
    horizon: float,
    reps: int,
    base_seed: int = 0,
    max_events: Optional[int] = None,
):
    """Time-average of the summed coordinates over [0, horizon / 2] and over
    [0, horizon], from the same runs.

    Returns ``(half, full, relative_change)``; a positive recurrent chain
    has a small relative change, a transient one roughly doubles.
    """
    coords = list(coordinates)
    runs = []
    for i in range(reps):
        try:
            runs.append(_window_integrals(spec, [0.0, horizon / 2, horizon], RngStream(base_seed, i), coords, max_events)[0])
        except Exception as exc:
            raise ReplicationError(i, exc) from exc
    half = summarize([w[0] / (horizon / 2) for w in runs], base_seed)
    full = summarize([(w[0] + w[1]) / horizon for w in runs], base_seed)
    change = abs(full.mean - half.mean) / abs(half.mean) if half.mean else math.inf
    return half, full, change


def estimate_survival(mu_w: float, w0: int, kills: KillSchedule, horizon: float, reps: int, base_seed: int = 0):
    """Survival frequency of a killed Yule process at ``horizon`` and the mean
    of exp(-mu_w horizon) W(horizon)."""
    scale = math.exp(-mu_w * horizon)
    finals = replicate_values(lambda rng: killed_yule_skeleton(mu_w, w0, kills, horizon, rng)[0], reps, base_seed)
    return summarize(finals >= 1, base_seed), summarize(scale * finals, base_seed)


def estimate_series_sum(gamma: float, rbh: RbhParams, z0: int, horizon: float, reps: int, base_seed: int = 0):
    """Mean of sum_n exp(-gamma sigma_n) over birth epochs sigma_n <= horizon.

    The diagnostic compares it with the same sum truncated at horizon / 2.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    full, half = [], []
    for i in range(reps):
        try:
            _, log = simulate_rbh(rbh, z0, StoppingRule(horizon), RngStream(base_seed, i))
        except Exception as exc:
            raise ReplicationError(i, exc) from exc
        terms = np.exp(-gamma * log.sigma)
        full.append(math.fsum(terms))
        half.append(math.fsum(terms[log.sigma <= horizon / 2]))
    summary = summarize(full, base_seed)
    h = math.fsum(half) / reps
    total = math.fsum(full)
    diag = TailDiagnostic(
        max_to_sum_ratio=max(full) / total if total > 0 else 1.0,
        stabilized=abs(summary.mean - h) < 0.05 * abs(summary.mean) if summary.mean else True,
        half_estimate=h,
        full_estimate=summary.mean,
    )
    return summary, diag


@dataclass(frozen=True)
class ScalingRow:
    x: int
    estimate: EstimateSummary
    excluded: int = 0

    @property
    def flagged(self) -> bool:
        return self.excluded > 0.01 * (self.estimate.replications + self.excluded)


@dataclass(frozen=True)
class ScalingTable:
    """Per-point means and an affine fit of the mean against log(x + shift)."""

    rows: list
    slope: float
    intercept: float
    max_rel_residual: float
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def monotone(self) -> bool:
        m = [r.estimate.mean for r in self.rows]
        return all(b >= a for a, b in zip(m, m[1:]))


def affine_log_fit(xs: Sequence[float], ys: Sequence[float], shift: float = 0.0):
    """Least-squares fit y ~ a + b log(x + shift).

    Residuals are reported relative to max |y|, which stays defined when
    some means are exactly 0 (a hitting time from inside the target set).
    Returns (slope, intercept, residuals, max_rel).
    """
    u = np.log(np.asarray(xs, dtype=float) + shift)
    y = np.asarray(ys, dtype=float)
    if len(np.unique(u)) < 2:
        return math.nan, math.nan, np.zeros_like(y), math.nan
    b, a = np.polyfit(u, y, 1)
    res = y - (a + b * u)
    scale = float(np.max(np.abs(y))) or 1.0
    return float(b), float(a), res, float(np.max(np.abs(res)) / scale)


def _scaling(points, shift: float) -> ScalingTable:
    rows = [ScalingRow(x, est, exc) for x, est, exc in points]
    b, a, res, mx = affine_log_fit([r.x for r in rows], [r.estimate.mean for r in rows], shift)
    return ScalingTable(rows, b, a, mx, res)


def estimate_h0_scaling(
    mu_w: float,
    rbh: RbhParams,
    w0_grid: Sequence[int],
    reps: int,
    base_seed: int = 0,
    safety_horizon: float = 1e3,
) -> ScalingTable:
    """Mean extinction time of W started from each w0, fitted against log(w0).

    Runs that reach ``safety_horizon`` are excluded and counted; a row is
    flagged when more than 1% of its runs were excluded.
    """
    if not rbh.mu_z - rbh.nu > mu_w:
        raise DomainError("H0 scaling needs mu_z - nu > mu_w")
    points = []
    for j, w0 in enumerate(w0_grid):
        seed = base_seed + j
        outs = [run_wz_to_extinction(mu_w, rbh, (w0, 0), RngStream(seed, i), safety_horizon) for i in range(reps)]
        h = [o.h0 for o in outs if o.extinct]
        if not h:
            raise RuntimeError(f"no run from w0={w0} went extinct before {safety_horizon}")
        points.append((w0, summarize(h, seed), reps - len(h)))
    return _scaling(points, 0.0)


def estimate_nk(
    params: VChainParams,
    K: int,
    v_grid: Sequence[int],
    reps: int,
    base_seed: int = 0,
    max_steps: int = 100_000,
) -> ScalingTable:
    """Mean number of V-chain steps to enter [0, K] from each v, fitted against log(1 + v)."""
    if K < 0:
        raise InvalidParameterError("K must be nonnegative")
    points = []
    for j, v in enumerate(v_grid):
        seed = base_seed + j
        vals = replicate_values(lambda rng: v_chain_hitting_time(params, v, K, rng, max_steps), reps, seed)
        points.append((v, summarize(vals, seed), 0))
    return _scaling(points, 1.0)


def log_drift(params: VChainParams, v: int, reps: int, base_seed: int = 0) -> EstimateSummary:
    """Mean of log(1 + V_1) - log(1 + v) for one V-chain step from v."""
    base = math.log1p(v)
    return summarize(replicate_values(lambda rng: math.log1p(v_chain_step(params, v, rng)) - base, reps, base_seed), base_seed)
