import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chunknet.kernel import (
    InvalidParameterError,
    ModelError,
    ReplicationError,
    RngStream,
    StoppingRule,
    replicate,
    run_ctmc,
    sample_exponential,
    summarize,
)


def poisson(rate):
    return lambda s: ((rate, (1,)),)


def two_state(a, b):
    # state 0 -> 1 at rate a, 1 -> 0 at rate b
    return lambda s: ((a, (1,)),) if s[0] == 0 else ((b, (-1,)),)


def test_exponential_mean_and_variance():
    rng = RngStream(1)
    x = np.array([sample_exponential(1.0, rng) for _ in range(10**6)])
    assert 0.995 <= x.mean() <= 1.005
    y = np.array([sample_exponential(2.0, rng) for _ in range(10**6)])
    assert 0.245 <= y.var() <= 0.255


@pytest.mark.parametrize("rate", [0.0, -1.0, math.inf, math.nan])
def test_exponential_rejects_bad_rate(rate):
    with pytest.raises(InvalidParameterError):
        sample_exponential(rate, RngStream(0))


def test_streams_are_reproducible():
    a = [RngStream(7, 3).uniform() for _ in range(5)]
    b = [RngStream(7, 3).uniform() for _ in range(5)]
    assert a == b
    r1, r2 = RngStream(7, 3), RngStream(7, 3)
    assert [r1.exponential(1.0) for _ in range(5000)] == [r2.exponential(1.0) for _ in range(5000)]


def test_streams_are_uncorrelated():
    a, b = RngStream(99, 0), RngStream(99, 1)
    u = np.array([a.uniform() for _ in range(10**6)])
    v = np.array([b.uniform() for _ in range(10**6)])
    assert abs(np.corrcoef(u, v)[0, 1]) < 0.01


def test_poisson_counter_rate():
    tr = run_ctmc(poisson(1.0), (0,), StoppingRule(1000.0), RngStream(2))
    assert 0.97 <= tr.n_events / 1000 <= 1.03
    assert tr.final_state == (tr.n_events,)
    assert np.all(np.diff(tr.times) > 0)


def test_zero_rates_absorb():
    tr = run_ctmc(lambda s: ((0.0, (1,)),), (4,), StoppingRule(10.0), RngStream(0))
    assert tr.n_events == 0 and tr.t_end == 10.0 and tr.final_state == (4,)


def test_negative_rate_is_model_error():
    with pytest.raises(ModelError):
        run_ctmc(lambda s: ((-1.0, (1,)),), (0,), StoppingRule(1.0), RngStream(0))


def test_budget_flag():
    tr = run_ctmc(poisson(5.0), (0,), StoppingRule(max_events=10), RngStream(0))
    assert tr.budget_exceeded and tr.n_events == 10


def test_stopping_rule_needs_a_bound():
    with pytest.raises(InvalidParameterError):
        StoppingRule()


def test_two_state_time_fraction():
    tr = run_ctmc(two_state(1.0, 2.0), (0,), StoppingRule(1e4), RngStream(5), record=False, integrate_from=0.0)
    frac0 = 1 - tr.occupation[0] / 1e4
    assert abs(frac0 - 2 / 3) < 0.01 * 2 / 3


def test_occupation_matches_recorded_integral():
    gen = lambda s: ((1.0, (1,)), (0.5 * s[0], (-1,)))
    full = run_ctmc(gen, (0,), StoppingRule(200.0), RngStream(11))
    thin = run_ctmc(gen, (0,), StoppingRule(200.0), RngStream(11), record=False, integrate_from=50.0)
    assert thin.occupation[0] == pytest.approx(full.time_integral(50.0, 200.0)[0], rel=1e-12)
    assert thin.final_state == full.final_state


def test_grid_records_right_continuous_states():
    gen = lambda s: ((1.0, (1,)),)
    full = run_ctmc(gen, (0,), StoppingRule(20.0), RngStream(4))
    grid = run_ctmc(gen, (0,), StoppingRule(20.0), RngStream(4), grid=[1.0, 5.0, 20.0])
    assert grid.thinned
    assert [s[0] for s in grid.states[1:]] == [full.state_at(t)[0] for t in (1.0, 5.0, 20.0)]


def test_absorb_predicate_stops_run():
    tr = run_ctmc(poisson(1.0), (0,), StoppingRule(1e6, absorb_predicate=lambda s: s[0] >= 3), RngStream(0))
    assert tr.stop_reason == "absorbed" and tr.final_state == (3,)


def test_replicate_constant_reducer():
    est = replicate(lambda rng: rng, 100, 0, reducer=lambda _: 1.0)
    assert est.mean == 1.0 and est.ci_half_width == 0.0


def test_replicate_exponential_mean():
    est = replicate(lambda rng: rng.exponential(1.0), 10**4, 3)
    assert abs(est.mean - 1.0) < 3 * est.std_error


def test_replicate_is_deterministic():
    f = lambda rng: rng.exponential(1.0)
    assert replicate(f, 50, 8) == replicate(f, 50, 8)


def test_replicate_names_failing_stream():
    def sim(rng):
        if rng.stream_index == 7:
            raise ValueError("boom")
        return 0.0

    with pytest.raises(ReplicationError) as err:
        replicate(sim, 10, 0)
    assert err.value.stream_index == 7
    assert "stream_index=7" in str(err.value)


def test_single_replication_has_zero_width():
    est = summarize([2.5])
    assert est.ci_half_width == 0 and est.std_error == 0 and est.replications == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50), st.randoms(use_true_random=False))
def test_summary_is_permutation_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a, b = summarize(values), summarize(shuffled)
    assert a.mean == pytest.approx(b.mean, rel=1e-12, abs=1e-12)
    assert a.ci_half_width == pytest.approx(b.ci_half_width, rel=1e-12, abs=1e-12)
    assert a.ci_half_width >= 0 and a.std_error >= 0
