import threading
from unittest.mock import MagicMock

import numpy as np
import pandas as pd
import pytest

from chkpi.internal import instability_session
from chkpi.internal.configuration import ExperimentConfiguration
from chkpi.internal.errors import InsufficientDataError, StabilityError
from chkpi.internal.instability_session import (
    FailureRecord,
    RunReport,
    ScalingTable,
    ThetaSweep,
    fit_linear_growth,
    run_instability,
    scaling_study,
)
from tests.unit_tests.experiment.report_factory import (
    GROWTH_RATE,
    PROJECTION_CONSTANT,
    THETA,
    exponential_record,
    exponential_trace,
    passing_conditions,
    synthetic_report,
)


class TestScalingTable:
    def test_exponential_escape_times_fit_inverse_growth_rate(self):
        table = ScalingTable.from_records([exponential_record(delta) for delta in (1e-3, 1e-4, 1e-5)])
        assert table.slope == pytest.approx(1 / GROWTH_RATE, rel=1e-12)
        assert table.r_squared == pytest.approx(1.0, abs=1e-12)
        assert table.deltas == [1e-3, 1e-4, 1e-5]

    def test_records_without_escape_are_left_out(self):
        records = [exponential_record(delta) for delta in (1e-3, 1e-4, 1e-5, 1e-6)]
        records[1].measured_escape_time = None
        table = ScalingTable.from_records(records)
        assert table.deltas == [1e-3, 1e-5, 1e-6]

    def test_too_few_escapes_raise(self):
        records = [exponential_record(delta) for delta in (1e-3, 1e-4, 1e-5)]
        records[0].measured_escape_time = None
        with pytest.raises(InsufficientDataError):
            ScalingTable.from_records(records)

    def test_data_frame_columns(self):
        table = ScalingTable.from_records([exponential_record(delta) for delta in (1e-3, 1e-4, 1e-5)])
        assert list(table.to_data_frame().columns) == ['delta', 'T_delta_pred', 'T_meas', 'distance_at_T']


class TestRunReport:
    def test_json_round_trip(self):
        report = synthetic_report()
        report.failures.append(FailureRecord(delta=1e-6, error_type='BlowupError', message='max |u_x| too large'))
        assert RunReport.from_json(report.to_json()) == report

    def test_save_and_load(self, tmp_path):
        report = synthetic_report()
        path = report.save(tmp_path / 'nested' / 'report.json')
        assert RunReport.load(path) == report

    def test_exponential_report_passes(self):
        report = synthetic_report()
        verdicts = report.verdicts()
        assert set(verdicts) == {'conditions', 'no_failures', 'growth_fit', 'distance_chain', 'distance_floor',
                                 'scaling_slope', 'scaling_r_squared'}
        assert report.passed

    def test_distance_floor_is_smallest_distance(self):
        report = synthetic_report()
        report.records[1].distance_at_escape = 0.05
        report.records[2].distance_at_escape = 0.046
        assert report.distance_floor == pytest.approx(0.044)

    def test_slow_growth_fit_fails(self):
        report = synthetic_report()
        report.records[0].growth_rate_fit = 0.9 * GROWTH_RATE
        verdict = report.verdicts()['growth_fit']
        assert not verdict['passed']
        assert verdict['margin'] == pytest.approx(-0.05)
        assert not report.passed

    def test_broken_distance_chain_fails(self):
        report = synthetic_report()
        report.records[2].distance_at_escape = 0.01
        assert not report.records[2].distance_chain_holds
        assert not report.verdicts()['distance_chain']['passed']

    def test_failures_fail(self):
        report = synthetic_report()
        report.failures.append(FailureRecord(delta=1e-6, error_type='StabilityError', message='step too large'))
        assert not report.verdicts()['no_failures']['passed']

    def test_report_without_scaling_has_no_scaling_verdicts(self):
        report = synthetic_report(deltas=(1e-3, 1e-4))
        assert 'scaling_slope' not in report.verdicts()
        assert report.passed

    def test_json_carries_verdicts_and_floor(self):
        dictionary = synthetic_report().to_dict()
        assert dictionary['passed'] is True
        assert dictionary['distance_floor'] == pytest.approx(0.044)
        assert dictionary['verdicts']['scaling_r_squared']['passed']


def test_fit_linear_growth_on_exponential_trace():
    trace = exponential_trace(1e-4)
    assert fit_linear_growth(trace, 0.005) == pytest.approx(GROWTH_RATE, rel=1e-10)


def test_fit_linear_growth_needs_two_samples():
    trace = pd.DataFrame({'t': [0.0, 1.0], 'norm_pi_v': [1e-4, 1.0]})
    assert fit_linear_growth(trace, 1e-3) is None


def test_scaling_study_rejects_narrow_amplitude_range():
    configuration = ExperimentConfiguration.new(run={'delta_list': [1e-3, 5e-4, 1e-4]})
    with pytest.raises(ValueError, match='decades'):
        scaling_study(configuration)


def test_scaling_study_rejects_two_amplitudes():
    configuration = ExperimentConfiguration.new(run={'delta_list': [1e-3, 1e-5]})
    with pytest.raises(ValueError):
        scaling_study(configuration)


def test_theta_sweep_intercept_shifts():
    thetas = [0.01, 0.02]
    reports = [synthetic_report(), synthetic_report()]
    reports[1].scaling.intercept += np.log(2) / GROWTH_RATE
    sweep = ThetaSweep(thetas=thetas, reports=reports, real_growth_rate=GROWTH_RATE)
    assert sweep.intercept_shifts() == pytest.approx([0.0, np.log(2) / GROWTH_RATE])
    assert sweep.predicted_intercept_shifts() == pytest.approx([0.0, np.log(2) / GROWTH_RATE])
    assert list(sweep.to_data_frame().columns) == ['theta', 'intercept', 'intercept_shift',
                                                   'predicted_intercept_shift']


def test_amplitudes_run_concurrently_and_report_in_order(monkeypatch):
    deltas = [1e-3, 1e-4, 1e-5]
    context = MagicMock()
    context.mode.base_frequency = 0.4
    context.mode.mode_index = 1
    context.mode.growth_rate = complex(GROWTH_RATE, 0.0)
    context.mode.largest_unstable_index = 2
    context.projection_constant = PROJECTION_CONSTANT
    context.conditions = passing_conditions()
    context.branch.to_data_frame.return_value = pd.DataFrame({'k': [0.4], 're_sigma': [GROWTH_RATE],
                                                              'im_sigma': [0.0]})
    context.hierarchy.to_data_frame.return_value = pd.DataFrame({'t': [0.0], 'order_0': [1.0]})
    context.simulator.time_step = 0.1
    all_started = threading.Barrier(len(deltas), timeout=10)

    def simulate_delta(context_, delta):
        all_started.wait()
        if delta == 1e-4:
            raise StabilityError('The step size exceeds the stability bound.')
        return exponential_record(delta), exponential_trace(delta), None

    monkeypatch.setattr(instability_session, 'prepare_context', lambda configuration: context)
    monkeypatch.setattr(instability_session, 'simulate_delta', simulate_delta)
    configuration = ExperimentConfiguration.new(run={'delta_list': deltas, 'theta': THETA, 'workers': len(deltas)})
    report = run_instability(configuration)
    assert [record.delta for record in report.records] == [1e-3, 1e-5]
    assert list(report.traces) == [1e-3, 1e-5]
    assert [(failure.delta, failure.error_type) for failure in report.failures] == [(1e-4, 'StabilityError')]
    assert report.scaling is None
