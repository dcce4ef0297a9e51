"""
Spectral stability analysis public interface.
"""
from chkpi.internal.eigen_analysis import EigenBranch, HcSpectrum, hc_spectrum, scan_branch, unstable_eigen
from chkpi.internal.finite_difference_oracle import band_oracle_comparison, finite_difference_growth_rate
from chkpi.internal.operator_matrix import (
    LinearizedOperators,
    OperatorMatrix,
    assemble_Hc,
    assemble_J,
    assemble_Lk,
    assemble_Ltilde,
    assemble_nk,
    instability_wavenumber_bound,
)
from chkpi.internal.stability_conditions import (
    AInfinityVerdict,
    ConditionEntry,
    ConditionReport,
    a_infinity_check,
    verify_rt_conditions,
)
from chkpi.internal.unstable_mode import UnstableMode, select_most_unstable

__all__ = [
    'a_infinity_check',
    'AInfinityVerdict',
    'assemble_Hc',
    'assemble_J',
    'assemble_Lk',
    'assemble_Ltilde',
    'assemble_nk',
    'band_oracle_comparison',
    'ConditionEntry',
    'ConditionReport',
    'EigenBranch',
    'finite_difference_growth_rate',
    'hc_spectrum',
    'HcSpectrum',
    'instability_wavenumber_bound',
    'LinearizedOperators',
    'OperatorMatrix',
    'scan_branch',
    'select_most_unstable',
    'unstable_eigen',
    'UnstableMode',
    'verify_rt_conditions',
]
