"""Property checks run by ``chunknet validate``.

Each check simulates at a fixed seed and compares against an exact law or
a pathwise invariant. Sizes are chosen so the whole suite runs in well
under a minute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .kernel import RngStream, StoppingRule, run_ctmc
from .processes import (
    CappedRatio,
    Constant,
    DownloadShare,
    KillSchedule,
    RbhParams,
    SingleChunkParams,
    YuleParams,
    branching_extinction_time,
    killed_yule_skeleton,
    run_wz_to_extinction,
    simulate_branching,
    simulate_coupled,
    simulate_free,
    simulate_rbh,
    simulate_yule,
    simulate_z_via_timechange,
)

__all__ = ["CheckResult", "CHECKS", "DEFAULT_SEED", "run_validation"]

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _streams(seed: int, n: int):
    return (RngStream(seed, i) for i in range(n))


def yule_geometric(seed: int, reps: int = 10_000) -> CheckResult:
    """Y(1) from Y(0)=1, mu=1 against Geometric(e^-1) on {1, 2, ...}."""
    vals = np.array([simulate_yule(YuleParams(1.0), 1, StoppingRule(1.0), r, record=False).final_state[0] for r in _streams(seed, reps)])
    p = math.exp(-1.0)
    # bins 1..k-1 and a pooled tail, each with expected count >= 5
    k = 1
    while reps * p * (1 - p) ** k >= 5:
        k += 1
    obs = [np.sum(vals == j) for j in range(1, k)] + [np.sum(vals >= k)]
    exp = [reps * p * (1 - p) ** (j - 1) for j in range(1, k)] + [reps * (1 - p) ** (k - 1)]
    pval = stats.chisquare(obs, exp).pvalue
    return CheckResult("yule_geometric_marginal", pval > 1e-3, f"chi2 p={pval:.4g} over {k} bins")


def yule_martingale(seed: int, reps: int = 10_000) -> CheckResult:
    """exp(-t) Y(t) has mean Y(0) = 1 at t = 1, 2, 4."""
    ts = [1.0, 2.0, 4.0]
    rows = np.array([simulate_yule(YuleParams(1.0), 1, StoppingRule(4.0), r, grid=ts).states[1:, 0] for r in _streams(seed, reps)])
    m = rows * np.exp(-np.array(ts))
    z = np.abs(m.mean(axis=0) - 1.0) / (m.std(axis=0, ddof=1) / math.sqrt(reps))
    return CheckResult("yule_martingale_mean", bool(np.all(z < 3)), "z-scores " + ", ".join(f"{v:.2f}" for v in z))


def _up_frequencies(paths, states=range(0, 5)):
    up = np.zeros(len(states))
    tot = np.zeros(len(states))
    for s in paths:
        frm = s[:-1]
        d = np.diff(s)
        for i, z in enumerate(states):
            sel = frm == z
            tot[i] += sel.sum()
            up[i] += (d[sel] > 0).sum()
    return up / np.maximum(tot, 1), tot


def representation_equivalence(seed: int, reps: int = 10_000) -> CheckResult:
    """Direct birth-death simulation vs the time-changed M/M/1 queue: law of
    Z(1) and up-jump frequencies out of states 0..4, from paths run to t = 2."""
    rbh = RbhParams(2.0, 1.0)
    pa = [simulate_rbh(rbh, 0, StoppingRule(2.0), r)[0] for r in _streams(seed, reps)]
    pb = [simulate_z_via_timechange(rbh, 0, StoppingRule(2.0), r) for r in _streams(seed + 1, reps)]
    pval = stats.ks_2samp([t.state_at(1.0)[0] for t in pa], [t.state_at(1.0)[0] for t in pb]).pvalue
    fa, _ = _up_frequencies(t.states[:, 0] for t in pa)
    fb, _ = _up_frequencies(t.states[:, 0] for t in pb)
    gap = float(np.max(np.abs(fa - fb)))
    ok = pval > 1e-3 and gap < 0.02
    return CheckResult("representation_equivalence", ok, f"KS p={pval:.4g}, max jump-frequency gap {gap:.4f}")


def free_marginal(seed: int, reps: int = 5_000) -> CheckResult:
    """Second coordinate of the free process vs the birth-death process with mu_z = mu*delta."""
    a = [simulate_free(0.5, 2.0, 1.0, 1.0, (0, 0), StoppingRule(2.0), r, record=False).final_state[1] for r in _streams(seed, reps)]
    b = [simulate_rbh(RbhParams(1.0, 1.0), 0, StoppingRule(2.0), r, record=False)[0].final_state[0] for r in _streams(seed + 1, reps)]
    pval = stats.ks_2samp(a, b).pvalue
    return CheckResult("free_process_marginal", pval > 1e-3, f"KS p={pval:.4g}")


def branching_equivalence(seed: int, reps: int = 40_000) -> CheckResult:
    """Extinction probability from 1: birth-death chain and (p, mu_z + nu) branching vs nu/mu_z."""
    rbh = RbhParams(2.0, 1.0)
    q = rbh.extinction_probability
    level = 40  # q^40 ~ 1e-12: reaching it counts as survival
    stop = StoppingRule(max_events=10**6, absorb_predicate=lambda s: s[0] == 0 or s[0] >= level)
    e1 = np.mean([simulate_rbh(rbh, 1, stop, r, record=False)[0].final_state[0] == 0 for r in _streams(seed, reps)])
    e2 = np.mean(
        [
            simulate_branching(rbh.split_probability, rbh.split_rate, 1, stop, r, record=False).final_state[0] == 0
            for r in _streams(seed + 1, reps)
        ]
    )
    ok = abs(e1 - q) < 0.02 * q and abs(e2 - q) < 0.02 * q
    return CheckResult("branching_extinction_probability", ok, f"birth-death {e1:.4f}, branching {e2:.4f}, q={q:.4f}")


def subcritical_tail(seed: int, reps: int = 10_000) -> CheckResult:
    """Extinction time of the (nu/(mu_z+nu), mu_z+nu) branching process:
    P(T >= t) <= 1.1 exp((nu - mu_z) t)."""
    mu_z, nu = 2.0, 1.0
    t = np.array([branching_extinction_time(nu / (mu_z + nu), mu_z + nu, 1, r) for r in _streams(seed, reps)])
    ok, parts = True, []
    for s in (1.0, 2.0, 4.0):
        f = float(np.mean(t >= s))
        bound = 1.1 * math.exp((nu - mu_z) * s)
        ok &= f <= bound
        parts.append(f"t={s:g}: {f:.4f} <= {bound:.4f}")
    return CheckResult("subcritical_extinction_tail", ok, "; ".join(parts))


RATE_FUNCTIONS = {
    "constant": Constant(0.75),
    "download_share": DownloadShare(),
    "capped_ratio": CappedRatio(1.0),
}


def coupling_orderings(seed: int, reps: int = 1_000, horizon: float = 100.0) -> CheckResult:
    """Pathwise orderings of both couplings for every built-in rate function.

    Any ordering violation raises inside the simulator; it is counted here.
    """
    failures, runs = 0, 0
    for k, (name, fn) in enumerate(RATE_FUNCTIONS.items()):
        params = SingleChunkParams(2.0, 1.0, 2.0, fn)
        for mode, delta, init in (("upper", 1.0, (0, 0)), ("lower", 0.5, (5, 1))):
            for r in _streams(seed + 10 * k + (mode == "lower"), reps):
                runs += 1
                try:
                    simulate_coupled(mode, params, delta, init, StoppingRule(horizon), r)
                except AssertionError:
                    failures += 1
    return CheckResult("coupling_orderings", failures == 0, f"{failures} violations in {runs} joint runs")


def wz_inequality(seed: int, reps: int = 300) -> CheckResult:
    """Z(H0) - z0 <= exp(mu_w H0) M*_Y in every run."""
    rbh = RbhParams(2.0, 1.0)
    bad, total = 0, 0
    for w0 in (1, 10, 100):
        for r in _streams(seed + w0, reps):
            o = run_wz_to_extinction(0.1, rbh, (w0, 0), r)
            total += 1
            if not o.extinct or o.z_at_h0 > math.exp(0.1 * o.h0) * o.my_star * (1 + 1e-12):
                bad += 1
    return CheckResult("wz_pathwise_bound", bad == 0, f"{bad} failures in {total} runs")


def killed_yule_monotone(seed: int, reps: int = 10_000) -> CheckResult:
    """Later kill epochs cannot lower the survival frequency (paired streams)."""
    early, late = KillSchedule.linear(1.0), KillSchedule.linear(2.0)
    s1 = np.mean([killed_yule_skeleton(1.0, 1, early, 30.0, r)[0] > 0 for r in _streams(seed, reps)])
    s2 = np.mean([killed_yule_skeleton(1.0, 1, late, 30.0, r)[0] > 0 for r in _streams(seed, reps)])
    return CheckResult("killed_yule_monotone", s2 >= s1 and s1 > 0, f"survival sigma_n=n: {s1:.4f}, sigma_n=2n: {s2:.4f}")


def determinism(seed: int) -> CheckResult:
    """Same stream, same path."""
    def path(r):
        return run_ctmc(lambda s: ((1.0, (1,)), (0.5 * s[0], (-1,))), (0,), StoppingRule(50.0), r)

    a, b = path(RngStream(seed, 3)), path(RngStream(seed, 3))
    ok = np.array_equal(a.times, b.times) and np.array_equal(a.states, b.states)
    return CheckResult("determinism", ok, f"{a.n_events} events compared")


CHECKS: dict[str, Callable[[int], CheckResult]] = {
    "yule_geometric_marginal": yule_geometric,
    "yule_martingale_mean": yule_martingale,
    "representation_equivalence": representation_equivalence,
    "free_process_marginal": free_marginal,
    "branching_extinction_probability": branching_equivalence,
    "subcritical_extinction_tail": subcritical_tail,
    "coupling_orderings": coupling_orderings,
    "wz_pathwise_bound": wz_inequality,
    "killed_yule_monotone": killed_yule_monotone,
    "determinism": determinism,
}


def run_validation(seed: int = DEFAULT_SEED, only=None) -> list[CheckResult]:
    names = list(CHECKS) if only is None else list(only)
    return [CHECKS[n](seed + 1000 * i) for i, n in enumerate(names)]
