import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from chkpi.internal.cli import EXIT_PASSED, EXIT_RUNTIME_ERROR, EXIT_VERDICT_FAILED, main
from chkpi.internal.report_outputs import emit_outputs
from tests.unit_tests.experiment.report_factory import synthetic_report


def test_lists_commands():
    result = CliRunner().invoke(main, ['--help'])
    assert result.exit_code == 0
    for command in ['soliton', 'spectrum', 'scan', 'rt-check', 'grenier', 'simulate', 'instability', 'scaling',
                    'report']:
        assert command in result.output


def test_soliton_writes_profile(tmp_path):
    result = CliRunner().invoke(main, ['soliton', '--set', 'grid.nx=512', '--set', f'out.dir="{tmp_path}"'])
    assert result.exit_code in (EXIT_PASSED, EXIT_VERDICT_FAILED)
    assert (tmp_path / 'soliton.csv').exists()


def test_soliton_reads_configuration_file(tmp_path):
    config_path = tmp_path / 'experiment.toml'
    config_path.write_text(f'grid.nx = 512\nout.dir = "{tmp_path / "from_file"}"\n')
    result = CliRunner().invoke(main, ['soliton', '--config', str(config_path)])
    assert result.exit_code in (EXIT_PASSED, EXIT_VERDICT_FAILED)
    assert (tmp_path / 'from_file' / 'soliton.csv').exists()


def test_invalid_parameters_are_runtime_errors():
    result = CliRunner().invoke(main, ['soliton', '--set', 'physics.c=1.0'])
    assert result.exit_code == EXIT_RUNTIME_ERROR


def test_unknown_key_is_runtime_error():
    result = CliRunner().invoke(main, ['spectrum', '--set', 'grid.speed=1.0'])
    assert result.exit_code == EXIT_RUNTIME_ERROR


def test_report_of_passing_run(tmp_path):
    emit_outputs(synthetic_report(), tmp_path)
    (tmp_path / 'growth.svg').unlink()
    result = CliRunner().invoke(main, ['--verbose', 'report', str(tmp_path)])
    assert result.exit_code == EXIT_PASSED
    assert (tmp_path / 'growth.svg').exists()


def test_report_of_failing_run(tmp_path):
    report = synthetic_report()
    report.records[0].distance_at_escape = 0.0
    emit_outputs(report, tmp_path)
    result = CliRunner().invoke(main, ['report', str(tmp_path)])
    assert result.exit_code == EXIT_VERDICT_FAILED


def test_report_without_report_file_is_runtime_error(tmp_path):
    result = CliRunner().invoke(main, ['report', str(tmp_path)])
    assert result.exit_code == EXIT_RUNTIME_ERROR


@pytest.mark.slow
def test_scan_writes_branch_and_eigenfunction(tmp_path):
    arguments = ['scan', '--oracle', '--set', 'grid.nx=512', '--set', 'spectrum.n_samples=13',
                 '--set', f'out.dir="{tmp_path}"']
    result = CliRunner().invoke(main, arguments)
    assert result.exit_code in (EXIT_PASSED, EXIT_VERDICT_FAILED)
    assert list(pd.read_csv(tmp_path / 'branch.csv').columns) == ['k', 're_sigma', 'im_sigma']
    eigenfunction = pd.read_csv(tmp_path / 'eigenfunction.csv')
    assert list(eigenfunction.columns) == ['x', 're_U', 'im_U']
    assert len(eigenfunction) == 512
    oracle = pd.read_csv(tmp_path / 'oracle.csv')
    assert len(oracle) == 3
    assert np.all(np.diff(oracle['k']) > 0)
