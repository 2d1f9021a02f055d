"""Entanglement measures of small bipartite states under local noisy channels.

Submodules: ``core`` (dense linear algebra, states), ``channels`` (Kraus
channels, Choi test), ``measures`` (negativity, concurrence, E_f, g bound),
``scenarios`` (worked examples, solvers, certificates, searches), ``cli``.
"""

from .channels import (
    ChannelFamily,
    KrausChannel,
    apply_local,
    choi_matrix,
    is_entanglement_breaking,
    local_unitary,
    phase_damping,
    phase_damping_family,
    qutrit_dephase,
    qutrit_filter,
    replace_with_00,
)
from .core import (
    DensityMatrix,
    EigenResult,
    PureState,
    bell_basis,
    change_basis,
    hermitian_eigen,
    kron,
    local_bell_basis,
    partial_trace,
    partial_transpose,
)
from .measures import (
    MeasureReport,
    binary_entropy,
    concurrence,
    entanglement_of_formation,
    g_lower_bound,
    measure_report,
    negativity,
    ppt_separability,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelFamily",
    "DensityMatrix",
    "EigenResult",
    "KrausChannel",
    "MeasureReport",
    "PureState",
    "apply_local",
    "bell_basis",
    "binary_entropy",
    "change_basis",
    "choi_matrix",
    "concurrence",
    "entanglement_of_formation",
    "g_lower_bound",
    "hermitian_eigen",
    "is_entanglement_breaking",
    "kron",
    "local_bell_basis",
    "local_unitary",
    "measure_report",
    "negativity",
    "partial_trace",
    "partial_transpose",
    "phase_damping",
    "phase_damping_family",
    "ppt_separability",
    "qutrit_dephase",
    "qutrit_filter",
    "replace_with_00",
]
