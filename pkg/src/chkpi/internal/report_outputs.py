"""
Files written for an instability report: CSV tables, SVG line plots and the JSON report.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from chkpi.internal.logging import format_amplitude

if TYPE_CHECKING:
    from chkpi.internal.instability_session import RunReport

logger = logging.getLogger(__name__)

REPORT_FILE_NAME = 'report.json'
BRANCH_FILE_NAME = 'branch.csv'
SCALING_FILE_NAME = 'scaling.csv'
HIERARCHY_FILE_NAME = 'hierarchy.csv'
GROWTH_CURVE_GID_PREFIX = 'growth-curve-'


def growth_file_name(delta: float) -> str:
    return f'growth_{format_amplitude(delta)}.csv'


def _write_csv(data_frame: pd.DataFrame, path: Path) -> Path:
    try:
        data_frame.to_csv(path, index=False)
    except OSError as error:
        error_message = f'Could not write {path}: {error}'
        raise OSError(error_message) from error
    return path


def _save_figure(figure: Figure, path: Path) -> Path:
    try:
        figure.savefig(path, format='svg')
    except OSError as error:
        error_message = f'Could not write {path}: {error}'
        raise OSError(error_message) from error
    return path


def plot_branch(branch_table: pd.DataFrame, path: Path) -> Path:
    """Plots Re σ(k) and Im σ(k)."""
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    axes.plot(branch_table['k'], branch_table['re_sigma'], marker='.', label='Re σ')
    axes.plot(branch_table['k'], branch_table['im_sigma'], linestyle=':', label='Im σ')
    axes.axhline(0, color='gray', linewidth=0.5)
    axes.set_xlabel('k')
    axes.set_ylabel('σ(k)')
    axes.legend()
    return _save_figure(figure, path)


def plot_growth_curves(traces: dict[float, pd.DataFrame], real_growth_rate: float, path: Path) -> Path:
    """Plots log ‖Πv‖ against t for every δ, each with a reference line of slope Re σ₀ through its first sample."""
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    for delta, trace in sorted(traces.items(), reverse=True):
        times = trace['t'].to_numpy()
        norms = trace['norm_pi_v'].to_numpy()
        line, = axes.semilogy(times, norms, label=f'δ = {format_amplitude(delta)}')
        line.set_gid(f'{GROWTH_CURVE_GID_PREFIX}{format_amplitude(delta)}')
        axes.semilogy(times, norms[0] * np.exp(real_growth_rate * (times - times[0])), linestyle='--',
                      color=line.get_color(), linewidth=0.8)
    axes.set_xlabel('t')
    axes.set_ylabel('‖Πv‖')
    axes.legend()
    return _save_figure(figure, path)


def plot_scaling(scaling_table: pd.DataFrame, slope: float, intercept: float, path: Path) -> Path:
    """Plots the measured escape times against log(1/δ) with the fitted line."""
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    log_inverse_deltas = np.log(1 / scaling_table['delta'].to_numpy())
    axes.plot(log_inverse_deltas, scaling_table['T_meas'], marker='o', linestyle='none', label='measured')
    axes.plot(log_inverse_deltas, scaling_table['T_delta_pred'], marker='x', linestyle='none', label='log(θ/δ)/Re σ₀')
    axes.plot(log_inverse_deltas, slope * log_inverse_deltas + intercept, label='fit')
    axes.set_xlabel('log(1/δ)')
    axes.set_ylabel('escape time')
    axes.legend()
    return _save_figure(figure, path)


def render_plots(report: RunReport, directory: Path) -> dict[str, str]:
    """Draws the plots the report has data for and records their paths in the report."""
    if report.branch_table is not None:
        report.plot_paths['branch'] = str(plot_branch(report.branch_table, directory / 'branch.svg'))
    if report.traces:
        report.plot_paths['growth'] = str(plot_growth_curves(report.traces, report.real_growth_rate,
                                                             directory / 'growth.svg'))
    if report.scaling is not None:
        report.plot_paths['scaling'] = str(plot_scaling(report.scaling.to_data_frame(), report.scaling.slope,
                                                        report.scaling.intercept, directory / 'scaling.svg'))
    return report.plot_paths


def emit_outputs(report: RunReport, directory: Path) -> Path:
    """
    Writes the branch, growth, scaling and hierarchy CSVs, the SVG plots and `report.json`.

    :param report: The completed report.
    :param directory: The output directory, created if missing.
    :return: The path of the JSON report.
    :raises OSError: If a file cannot be written, naming the file.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if report.branch_table is not None:
        _write_csv(report.branch_table, directory / BRANCH_FILE_NAME)
    for record in report.records:
        if record.delta in report.traces:
            trace_path = _write_csv(report.traces[record.delta], directory / growth_file_name(record.delta))
            record.trace_path = str(trace_path)
    if report.scaling is not None:
        _write_csv(report.scaling.to_data_frame(), directory / SCALING_FILE_NAME)
    if report.hierarchy_table is not None:
        _write_csv(report.hierarchy_table, directory / HIERARCHY_FILE_NAME)
    render_plots(report, directory)
    report_path = report.save(directory / REPORT_FILE_NAME)
    logger.info(f'Report written to {report_path}.')
    return report_path


def load_report_tables(report: RunReport, directory: Path) -> RunReport:
    """Reattaches the branch and growth tables written next to a saved report."""
    directory = Path(directory)
    branch_path = directory / BRANCH_FILE_NAME
    if branch_path.exists():
        report.branch_table = pd.read_csv(branch_path)
    for record in report.records:
        trace_path = Path(record.trace_path) if record.trace_path is not None else directory / growth_file_name(
            record.delta)
        if trace_path.exists():
            report.traces[record.delta] = pd.read_csv(trace_path)
    return report
