"""
Session related public interface.
"""
from chkpi.internal.instability_session import (
    DeltaRecord,
    RunReport,
    ScalingTable,
    ThetaSweep,
    run_instability,
    scaling_study,
    theta_sweep,
)

__all__ = [
    'DeltaRecord',
    'run_instability',
    'RunReport',
    'scaling_study',
    'ScalingTable',
    'theta_sweep',
    'ThetaSweep',
]
