"""
The `chkpi` command line. Every command reads the TOML configuration given by `--config`, applies the `--set`
overrides and exits with 0 when its verdicts pass, 2 when one fails and 1 on a runtime error.
"""
from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import click
import numpy as np

from chkpi.internal.configuration import ExperimentConfiguration, load_configuration
from chkpi.internal.eigen_analysis import export_eigenfunction_csv, hc_spectrum
from chkpi.internal.errors import ChkpiError
from chkpi.internal.finite_difference_oracle import band_oracle_comparison
from chkpi.internal.hierarchy import RATE_TOLERANCE, build_hierarchy, export_hierarchy_csv
from chkpi.internal.instability_session import (
    GROWTH_TRACE_COLUMNS,
    RunReport,
    build_wave,
    prepare_context,
    run_instability,
    scaling_study,
    scan_configured_branch,
    select_configured_mode,
    simulate_delta,
    theta_sweep,
)
from chkpi.internal.logging import format_amplitude, set_up_default_logger
from chkpi.internal.report_outputs import (
    BRANCH_FILE_NAME,
    REPORT_FILE_NAME,
    emit_outputs,
    growth_file_name,
    load_report_tables,
    plot_branch,
    render_plots,
)
from chkpi.internal.simulation import save_snapshot
from chkpi.internal.solitary_wave import export_soliton_csv, properties_report
from chkpi.internal.stability_conditions import a_infinity_check, verify_rt_conditions

logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_RUNTIME_ERROR = 1
EXIT_VERDICT_FAILED = 2
ORACLE_TOLERANCE = 0.005
EIGENFUNCTION_FILE_NAME = 'eigenfunction.csv'
ORACLE_FILE_NAME = 'oracle.csv'
KERNEL_COSINE_THRESHOLD = 0.999
LIMITING_SAMPLE_COUNT = 5


def configuration_options(command: Callable) -> Callable:
    """Adds `--config` and `--set` and hands the command the loaded configuration."""

    @click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
                  default=None, help='TOML configuration file.')
    @click.option('--set', 'overrides', multiple=True, metavar='KEY=VALUE',
                  help='Override a configuration key, e.g., `--set physics.c=4`. Repeatable.')
    @functools.wraps(command)
    def wrapper(config_path: Path | None, overrides: tuple[str, ...], **kwargs):
        try:
            configuration = load_configuration(config_path, overrides)
        except (ValueError, ChkpiError) as error:
            logger.error(f'Invalid configuration: {error}')
            sys.exit(EXIT_RUNTIME_ERROR)
        return command(configuration, **kwargs)

    return wrapper


def exit_with_verdict(command: Callable[..., bool]) -> Callable:
    """Runs a command returning whether its verdicts passed and exits with the matching code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        set_up_default_logger()
        try:
            passed = command(*args, **kwargs)
        except Exception as error:  # noqa BLE001 : Any runtime error maps to the runtime error exit code.
            logger.exception(f'{type(error).__name__}: {error}')
            sys.exit(EXIT_RUNTIME_ERROR)
        if not passed:
            logger.warning('A verdict failed.')
        sys.exit(EXIT_PASSED if passed else EXIT_VERDICT_FAILED)

    return wrapper


def echo_json(dictionary: dict[str, Any]):
    click.echo(json.dumps(dictionary, indent=2, default=str))


@click.group()
@click.option('--verbose', is_flag=True, default=False, help='Log at the debug level.')
def main(verbose: bool):
    """Transverse instability experiments for the Camassa–Holm KP-I equation."""
    set_up_default_logger(verbose=verbose)


@main.command()
@configuration_options
@exit_with_verdict
def soliton(configuration: ExperimentConfiguration) -> bool:
    """Computes the solitary wave and checks its qualitative properties."""
    wave = build_wave(configuration)
    report = properties_report(wave)
    export_soliton_csv(wave, configuration.out.dir / 'soliton.csv')
    echo_json({**report.__dict__, 'passed': report.passed})
    return report.passed


@main.command()
@configuration_options
@exit_with_verdict
def spectrum(configuration: ExperimentConfiguration) -> bool:
    """Checks that H_c has one negative eigenvalue and a kernel spanned by φ′."""
    summary = hc_spectrum(build_wave(configuration))
    passed = (summary.negative_count == 1 and summary.kernel_count == 1
              and summary.kernel_cosine > KERNEL_COSINE_THRESHOLD)
    echo_json({key: value for key, value in summary.__dict__.items() if key != 'eigenvalues'} | {'passed': passed})
    return passed


@main.command()
@configuration_options
@click.option('--oracle/--no-oracle', default=False,
              help='Compare growth rates inside the band with the finite difference discretization.')
@exit_with_verdict
def scan(configuration: ExperimentConfiguration, oracle: bool) -> bool:
    """Scans the unstable branch σ(k) and writes it as CSV and SVG, with the eigenfunction at the most unstable k."""
    wave = build_wave(configuration)
    branch = scan_configured_branch(configuration, wave)
    output_directory = configuration.out.dir
    output_directory.mkdir(parents=True, exist_ok=True)
    branch_table = branch.to_data_frame()
    branch_table.to_csv(output_directory / BRANCH_FILE_NAME, index=False)
    plot_branch(branch_table, output_directory / 'branch.svg')
    summary: dict[str, Any] = {'band': branch.band, 'cutoff': branch.cutoff,
                               'most_unstable_wavenumber': branch.most_unstable_wavenumber,
                               'maximum_growth_rate': branch.maximum_growth_rate}
    passed = branch.band is not None and branch.is_stable_above_cutoff
    eigenfunction = branch.most_unstable_eigenfunction
    if eigenfunction is not None:
        export_eigenfunction_csv(wave, eigenfunction, output_directory / EIGENFUNCTION_FILE_NAME)
    if oracle and branch.band is not None:
        comparison = band_oracle_comparison(wave, branch.band)
        comparison.to_csv(output_directory / ORACLE_FILE_NAME, index=False)
        maximum_deviation = float(comparison['deviation'].max())
        summary |= {'oracle_wavenumbers': comparison['k'].tolist(),
                    'oracle_growth_rates': comparison['re_sigma_oracle'].tolist(),
                    'oracle_maximum_deviation': maximum_deviation}
        passed = passed and maximum_deviation <= ORACLE_TOLERANCE
    echo_json(summary | {'passed': passed})
    return passed


@main.command('rt-check')
@configuration_options
@exit_with_verdict
def rt_check(configuration: ExperimentConfiguration) -> bool:
    """Checks the four spectral conditions and the limiting quartic."""
    wave = build_wave(configuration)
    branch = scan_configured_branch(configuration, wave)
    report = verify_rt_conditions(wave, branch.wavenumbers)
    positive_wavenumbers = branch.wavenumbers[branch.wavenumbers > 0]
    sampled_wavenumbers = np.linspace(positive_wavenumbers[0], positive_wavenumbers[-1], LIMITING_SAMPLE_COUNT)
    sampled_growth_rates = np.linspace(0.1, 1.0, LIMITING_SAMPLE_COUNT) * max(branch.maximum_growth_rate, 0.1)
    limiting_verdicts = [a_infinity_check(wave.speed, wave.kappa, wavenumber, sampled_growth_rates)
                         for wavenumber in sampled_wavenumbers]
    limiting_passed = all(verdict.passed for verdict in limiting_verdicts)
    output_directory = configuration.out.dir
    output_directory.mkdir(parents=True, exist_ok=True)
    (output_directory / 'conditions.json').write_text(json.dumps(report.to_dict(), indent=2))
    echo_json({
        'conditions': report.to_dict(),
        'limiting_quartic': [{'k': verdict.wavenumber, 'minimum_real_part_distance':
                              min(verdict.minimum_real_part_distances), 'analytic_margin': verdict.analytic_margin}
                             for verdict in limiting_verdicts],
        'passed': report.passed and limiting_passed,
    })
    return report.passed and limiting_passed


@main.command()
@configuration_options
@click.option('--final-time', type=float, default=None,
              help='Integration horizon. Defaults to the escape time of the smallest δ.')
@exit_with_verdict
def grenier(configuration: ExperimentConfiguration, final_time: float | None) -> bool:
    """Integrates the approximate solution and checks that order k grows no faster than (k + 1)Re σ₀."""
    wave = build_wave(configuration)
    mode = select_configured_mode(configuration, scan_configured_branch(configuration, wave))
    if final_time is None:
        final_time = float(np.log(configuration.theta / min(configuration.run.delta_list)) / mode.real_growth_rate)
    result = build_hierarchy(mode, configuration.run.hierarchy_order, final_time,
                             time_step=configuration.run.time_step, sample_stride=configuration.run.sample_stride,
                             epsilon=configuration.physics.epsilon, sobolev_order=configuration.run.sobolev_s)
    export_hierarchy_csv(result, configuration.out.dir / 'hierarchy.csv')
    predicted_rates = mode.real_growth_rate * np.arange(1, result.order + 2)
    passed = not bool(np.any(result.growth_rates > predicted_rates * (1 + RATE_TOLERANCE)))
    echo_json({'growth_rates': result.growth_rates.tolist(), 'predicted_growth_rates': predicted_rates.tolist(),
               'bound_constants': result.bound_constants.tolist(), 'passed': passed})
    return passed


@main.command()
@configuration_options
@click.option('--delta', type=float, default=None, help='The amplitude δ. Defaults to the first configured δ.')
@exit_with_verdict
def simulate(configuration: ExperimentConfiguration, delta: float | None) -> bool:
    """Simulates one perturbed solitary wave up to its predicted escape time."""
    if delta is None:
        delta = configuration.run.delta_list[0]
    context = prepare_context(configuration)
    record, trace, final_state = simulate_delta(context, delta)
    output_directory = configuration.out.dir
    output_directory.mkdir(parents=True, exist_ok=True)
    trace[GROWTH_TRACE_COLUMNS].to_csv(output_directory / growth_file_name(delta), index=False)
    if configuration.out.snapshots:
        save_snapshot(final_state, output_directory / 'snapshots' / f'state_{format_amplitude(delta)}',
                      parameters={'delta': delta, 'theta': configuration.theta})
    echo_json(record.to_dict() | {'distance_chain_holds': record.distance_chain_holds})
    return record.measured_escape_time is not None and record.distance_chain_holds


@main.command()
@configuration_options
@exit_with_verdict
def instability(configuration: ExperimentConfiguration) -> bool:
    """Runs the full instability experiment over the configured amplitudes."""
    report = run_instability(configuration)
    emit_outputs(report, configuration.out.dir)
    echo_json({'verdicts': report.verdicts(), 'passed': report.passed})
    return report.passed


@main.command()
@configuration_options
@click.option('--theta-sweep', 'sweep', is_flag=True, default=False,
              help='Also repeat the fit for θ = 0.01, 0.05 and 0.1 times c − 2κ.')
@exit_with_verdict
def scaling(configuration: ExperimentConfiguration, sweep: bool) -> bool:
    """Fits the measured escape times against log(1/δ)."""
    table, report = scaling_study(configuration)
    emit_outputs(report, configuration.out.dir)
    summary: dict[str, Any] = {'slope': table.slope, 'predicted_slope': 1 / report.real_growth_rate,
                               'intercept': table.intercept, 'r_squared': table.r_squared}
    if sweep:
        theta_table = theta_sweep(configuration).to_data_frame()
        theta_table.to_csv(configuration.out.dir / 'theta_sweep.csv', index=False)
        summary['theta_sweep'] = theta_table.to_dict(orient='records')
    echo_json(summary | {'verdicts': report.verdicts(), 'passed': report.passed})
    return report.passed


@main.command()
@click.argument('report_directory', type=click.Path(exists=True, file_okay=False, path_type=Path))
@exit_with_verdict
def report(report_directory: Path) -> bool:
    """Redraws the plots of a written report and prints its verdicts."""
    run_report = load_report_tables(RunReport.load(report_directory / REPORT_FILE_NAME), report_directory)
    render_plots(run_report, report_directory)
    run_report.save(report_directory / REPORT_FILE_NAME)
    echo_json({'verdicts': run_report.verdicts(), 'plot_paths': run_report.plot_paths, 'passed': run_report.passed})
    return run_report.passed


if __name__ == '__main__':
    main()
