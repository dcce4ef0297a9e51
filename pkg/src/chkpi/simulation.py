"""
Nonlinear simulation public interface.
"""
from chkpi.internal.simulation import (
    ErrorDiagnostics,
    FieldForm,
    InvariantTrace,
    InvariantValues,
    Simulator,
    SimState,
    export_invariant_trace_csv,
    load_snapshot,
    save_snapshot,
)

__all__ = [
    'ErrorDiagnostics',
    'export_invariant_trace_csv',
    'FieldForm',
    'InvariantTrace',
    'InvariantValues',
    'load_snapshot',
    'save_snapshot',
    'SimState',
    'Simulator',
]
