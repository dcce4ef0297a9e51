"""Synthetic instability reports with exactly exponential growth."""
import numpy as np
import pandas as pd

from chkpi.internal.configuration import ExperimentConfiguration
from chkpi.internal.instability_session import DeltaRecord, RunReport, ScalingTable
from chkpi.internal.stability_conditions import ConditionEntry, ConditionReport

GROWTH_RATE = 0.25
THETA = 0.05
PROJECTION_CONSTANT = 1.5


def passing_conditions() -> ConditionReport:
    def entry(name: str, margin: float) -> ConditionEntry:
        return ConditionEntry(name=name, margin=margin, threshold=0.0, k_samples=[0.0, 0.5, 1.0])

    return ConditionReport(cutoff=0.8, cond1=entry('cond1', 0.3), cond2=entry('cond2', 0.25),
                           cond3=entry('cond3', 1e-3), cond4=entry('cond4', 0.1))


def exponential_trace(delta: float, growth_rate: float = GROWTH_RATE) -> pd.DataFrame:
    escape_time = np.log(THETA / delta) / growth_rate
    times = np.linspace(0, escape_time, 41)
    norms = PROJECTION_CONSTANT * delta * np.exp(growth_rate * times)
    return pd.DataFrame({'t': times, 'norm_pi_v': norms, 'norm_w': 1e-3 * norms ** 2,
                         'H': np.full_like(times, 2.0), 'Q': np.full_like(times, 3.0)})


def exponential_record(delta: float, growth_rate: float = GROWTH_RATE) -> DeltaRecord:
    predicted = float(np.log(THETA / delta) / growth_rate)
    return DeltaRecord(
        delta=delta,
        predicted_escape_time=predicted,
        measured_escape_time=float(predicted - np.log(2) / growth_rate),
        distance_at_escape=0.044,
        shift_at_escape=0.01,
        growth_rate_fit=growth_rate,
        projected_approximation_norm=0.045,
        error_norm_at_escape=0.002,
        max_error_norm=0.002,
        hamiltonian_drift=1e-9,
        boundary_amplitude=1e-14,
    )


def synthetic_report(deltas: tuple[float, ...] = (1e-3, 1e-4, 1e-5)) -> RunReport:
    configuration = ExperimentConfiguration.new(run={'delta_list': list(deltas), 'theta': THETA})
    records = [exponential_record(delta) for delta in deltas]
    return RunReport(
        configuration=configuration.to_dict(),
        base_frequency=0.4,
        mode_index=1,
        growth_rate=[GROWTH_RATE, 0.0],
        largest_unstable_index=2,
        theta=THETA,
        projection_constant=PROJECTION_CONSTANT,
        conditions=passing_conditions(),
        records=records,
        scaling=ScalingTable.from_records(records) if len(records) >= 3 else None,
        branch_table=pd.DataFrame({'k': [0.0, 0.4, 0.8], 're_sigma': [0.0, GROWTH_RATE, 0.0],
                                   'im_sigma': [0.0, 0.0, 0.0]}),
        traces={delta: exponential_trace(delta) for delta in deltas},
        hierarchy_table=pd.DataFrame({'t': [0.0, 1.0], 'order_0': [1.0, 1.3], 'order_1': [0.0, 0.1]}),
    )
