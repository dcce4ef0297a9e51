"""
Solitary wave related public interface.
"""
from chkpi.internal.solitary_wave import (
    PropertyReport,
    SolitaryWave,
    compute_soliton,
    default_half_length,
    export_soliton_csv,
    hamiltonian,
    impulse,
    properties_report,
    traveling_wave_residual,
)

__all__ = [
    'compute_soliton',
    'default_half_length',
    'export_soliton_csv',
    'hamiltonian',
    'impulse',
    'properties_report',
    'PropertyReport',
    'SolitaryWave',
    'traveling_wave_residual',
]
