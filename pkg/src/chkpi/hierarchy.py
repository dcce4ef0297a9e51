"""
Approximate solution hierarchy public interface.
"""
from chkpi.internal.hierarchy import (
    HierarchyResult,
    approximation_residual,
    assemble_vap,
    build_hierarchy,
    export_hierarchy_csv,
)
from chkpi.internal.mode_stack import ModeStack

__all__ = [
    'approximation_residual',
    'assemble_vap',
    'build_hierarchy',
    'export_hierarchy_csv',
    'HierarchyResult',
    'ModeStack',
]
