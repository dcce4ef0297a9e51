import json
from pathlib import Path

import pandas as pd
import pytest

from chkpi.internal.instability_session import RunReport
from chkpi.internal.report_outputs import (
    GROWTH_CURVE_GID_PREFIX,
    emit_outputs,
    growth_file_name,
    load_report_tables,
    render_plots,
)
from tests.unit_tests.experiment.report_factory import synthetic_report


@pytest.fixture
def emitted(tmp_path) -> tuple[RunReport, Path]:
    report = synthetic_report()
    emit_outputs(report, tmp_path)
    return report, tmp_path


def test_growth_file_name():
    assert growth_file_name(1e-4) == 'growth_1e-04.csv'


def test_close_amplitudes_get_their_own_traces(tmp_path):
    report = synthetic_report((1e-3, 1.2e-3, 1e-5))
    emit_outputs(report, tmp_path)
    trace_paths = {record.trace_path for record in report.records}
    assert len(trace_paths) == 3
    assert (tmp_path / 'growth_1.2e-03.csv').exists()
    assert len(list(tmp_path.glob('growth_*.csv'))) == 3


def test_writes_every_file(emitted):
    _, directory = emitted
    for name in ['report.json', 'branch.csv', 'scaling.csv', 'hierarchy.csv', 'branch.svg', 'growth.svg',
                 'scaling.svg', 'growth_1e-03.csv', 'growth_1e-04.csv', 'growth_1e-05.csv']:
        assert (directory / name).exists(), name


def test_csv_headers(emitted):
    _, directory = emitted
    assert list(pd.read_csv(directory / 'branch.csv').columns) == ['k', 're_sigma', 'im_sigma']
    assert list(pd.read_csv(directory / 'growth_1e-04.csv').columns) == ['t', 'norm_pi_v', 'norm_w', 'H', 'Q']
    assert list(pd.read_csv(directory / 'scaling.csv').columns) == ['delta', 'T_delta_pred', 'T_meas',
                                                                    'distance_at_T']


def test_growth_plot_has_one_series_per_delta(emitted):
    _, directory = emitted
    svg = (directory / 'growth.svg').read_text()
    assert svg.count(f'id="{GROWTH_CURVE_GID_PREFIX}') == 3


def test_report_json_round_trip(emitted):
    report, directory = emitted
    assert RunReport.load(directory / 'report.json') == report


def test_records_point_to_their_traces(emitted):
    report, directory = emitted
    for record in report.records:
        assert Path(record.trace_path) == directory / growth_file_name(record.delta)


def test_report_lists_plot_paths(emitted):
    _, directory = emitted
    dictionary = json.loads((directory / 'report.json').read_text())
    assert set(dictionary['plot_paths']) == {'branch', 'growth', 'scaling'}


def test_tables_reload_and_plots_redraw(emitted, tmp_path):
    report, directory = emitted
    loaded = load_report_tables(RunReport.load(directory / 'report.json'), directory)
    assert set(loaded.traces) == set(report.traces)
    assert loaded.branch_table is not None
    for path in [directory / 'growth.svg', directory / 'branch.svg']:
        path.unlink()
    render_plots(loaded, directory)
    assert (directory / 'growth.svg').exists()
    assert (directory / 'branch.svg').exists()


def test_unwritable_path_names_file(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('')
    report = synthetic_report()
    with pytest.raises(OSError, match='blocker'):
        emit_outputs(report, blocker)
