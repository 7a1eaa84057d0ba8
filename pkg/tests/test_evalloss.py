# tests/test_evalloss.py

import math
import statistics
import time

import numpy as np
import pytest

from core.errors import InvariantError, ParameterError
from core.evalloss import (ConstantPolicy, ForecastPolicy, LossLedger, PiecewisePolicy, TrajectoryRow,
                           log_loss, run_experiment)
from core.forecast import GaussianForecast
from core.martingale import MeanJumper, SimpleJumper
from core.simgen import ChangepointSpec, Xoshiro256pp, generate

STUDY_JS = (0.001, 0.01, 0.1, 1.0)
N01 = GaussianForecast(0.0, 1.0)
N11 = GaussianForecast(1.0, 1.0)


def study_oracle():
    return PiecewisePolicy(1000, N01, N11)


def cumulative_gaps(ledger):
    gap = 0.0
    for row in ledger.per_step:
        gap += row.loss_base - row.loss_enhanced
        yield gap, row.log10_capital


def test_log_loss_values():
    assert log_loss(1.0) == 0.0
    assert log_loss(0.3989423) == pytest.approx(0.39909, abs=1e-5)
    assert log_loss(0.1) == pytest.approx(1.0, abs=1e-15)
    assert log_loss(math.e, base10=False) == pytest.approx(-1.0, abs=1e-15)


@pytest.mark.parametrize("value", [0.0, -1.0])
def test_log_loss_sentinel(value):
    assert log_loss(value) == math.inf


def test_piecewise_policy_switches_after_changepoint():
    policy = study_oracle()
    assert policy.forecast_for(1) is N01
    assert policy.forecast_for(1000) is N01
    assert policy.forecast_for(1001) is N11
    with pytest.raises(ParameterError):
        PiecewisePolicy(-1, N01, N11)


def test_forecast_policy_is_abstract():
    with pytest.raises(TypeError):
        ForecastPolicy()

    class Shifted(ForecastPolicy):
        def forecast_for(self, step):
            return GaussianForecast(float(step), 1.0)

    assert Shifted().forecast_for(3).mean == 3.0


def test_run_experiment_rejects_empty():
    with pytest.raises(ParameterError):
        run_experiment([], ConstantPolicy(), SimpleJumper(), ConstantPolicy())


def test_observations_at_the_base_median_leave_capital_alone():
    ledger = run_experiment([0.0] * 50, ConstantPolicy(N01), SimpleJumper(0.01, 1.0), ConstantPolicy(N01))
    assert ledger.final_log10_capital == pytest.approx(0.0, abs=1e-12)
    assert ledger.cum_base == pytest.approx(ledger.cum_enhanced, abs=1e-12)
    assert all(row.u == 0.5 for row in ledger.per_step)


def test_row_fields_are_consistent(study_dataset):
    ledger = run_experiment(study_dataset[:20], ConstantPolicy(N01), SimpleJumper(), study_oracle())
    for row, y in zip(ledger.per_step, study_dataset):
        assert row.y == y
        assert row.u == pytest.approx(N01.cdf(y), abs=1e-15)
        assert row.loss_base == pytest.approx(log_loss(N01.density(y)), abs=1e-12)
    assert ledger.per_step[0].eps_eff == 0.0
    assert ledger.per_step[0].median_enhanced == pytest.approx(0.0, abs=1e-12)


def test_study_configuration(study_dataset):
    start = time.perf_counter()
    ledger = run_experiment(study_dataset, ConstantPolicy(N01), SimpleJumper(0.01, 1.0),
                            study_oracle(), changepoint=1000)
    elapsed = time.perf_counter() - start
    assert ledger.steps == 2000
    assert 70.0 <= ledger.final_log10_capital <= 110.0
    assert 1e-4 <= 10 ** ledger.changepoint_log10_capital <= 1.0
    # oracle <= enhanced <= base at the end
    assert ledger.cum_oracle <= ledger.cum_enhanced <= ledger.cum_base
    ledger.check_identity()
    for gap, log_capital in cumulative_gaps(ledger):
        assert gap == pytest.approx(log_capital, abs=1e-9)
    # generous bound; a run is well under a second on a desktop
    assert elapsed < 5.0


def test_study_configuration_median_over_seeds():
    finals = []
    for seed in range(2021, 2041):
        values = generate(ChangepointSpec(seed=seed))
        ledger = run_experiment(values, ConstantPolicy(N01), SimpleJumper(0.01, 1.0), study_oracle())
        finals.append(ledger.final_log10_capital)
    assert 80.0 <= statistics.median(finals) <= 100.0


def test_wider_range_gets_closer_to_oracle(study_dataset):
    runs = {}
    for E in (1.0, 2.0):
        runs[E] = run_experiment(study_dataset, ConstantPolicy(N01), SimpleJumper(0.01, E), study_oracle())
    gap = {E: ledger.cum_enhanced - ledger.cum_oracle for E, ledger in runs.items()}
    assert gap[2.0] < gap[1.0]
    post_median = {E: np.mean([r.median_enhanced for r in ledger.per_step[1000:]])
                   for E, ledger in runs.items()}
    assert abs(post_median[2.0] - 1.0) < abs(post_median[1.0] - 1.0)


def test_mean_jumper_guarantees_on_fuzz(fuzz_streams):
    # observations whose PIT under N(0,1) is the fuzz value
    for us in fuzz_streams:
        ys = [N01.quantile(min(max(u, 1e-12), 1.0 - 1e-12)) for u in us]
        ledger = run_experiment(ys, ConstantPolicy(N01), MeanJumper(STUDY_JS, 1.0), ConstantPolicy(N01))
        assert ledger.min_log10_capital >= math.log10(0.25 - 1e-12)
        assert ledger.cum_enhanced <= ledger.cum_base + math.log10(4.0) + 1e-9
        for gap, log_capital in cumulative_gaps(ledger):
            assert gap == pytest.approx(log_capital, abs=1e-9)


def test_identity_with_natural_log(study_dataset):
    ledger = run_experiment(study_dataset[:500], ConstantPolicy(N01), MeanJumper(STUDY_JS, 2.0),
                            ConstantPolicy(N01), base10=False)
    assert ledger.capital_gap() == pytest.approx(ledger.final_log10_capital, abs=1e-9)
    assert ledger.cum_enhanced - ledger.cum_base <= math.log(4.0) + 1e-9
    ledger.check_identity()


def test_proper_loss_prefers_true_density():
    rng = Xoshiro256pp(77)
    ys = [rng.next_gaussian(1.0, 1.0) for _ in range(10_000)]
    loss_wrong = np.mean([log_loss(N01.density(y)) for y in ys])
    loss_true = np.mean([log_loss(N11.density(y)) for y in ys])
    assert loss_true < loss_wrong


def test_ledger_counts_degenerate_rows():
    ledger = LossLedger()
    ledger.record(TrajectoryRow(1, 0.0, 0.5, 0.0, 0.0, 0.4, 0.4, 0.4, 0.0))
    ledger.record(TrajectoryRow(2, 99.0, 1.0, 0.0, 0.0, math.inf, math.inf, 0.4, 0.0))
    assert ledger.degenerate_steps == 1
    assert ledger.cum_base == pytest.approx(0.4)
    assert ledger.steps == 2


def test_check_identity_raises_on_mismatch():
    ledger = LossLedger()
    ledger.record(TrajectoryRow(1, 0.0, 0.5, 0.0, 0.5, 0.4, 0.4, 0.4, 0.0))
    with pytest.raises(InvariantError):
        ledger.check_identity()


def test_summary_matches_last_row(study_dataset):
    ledger = run_experiment(study_dataset, ConstantPolicy(N01), SimpleJumper(), study_oracle(),
                            changepoint=1000)
    summary = ledger.summary()
    assert summary["final_log10_capital"] == ledger.per_step[-1].log10_capital
    assert summary["changepoint_log10_capital"] == ledger.per_step[999].log10_capital
    assert summary["steps"] == 2000
