"""Brute-force oracles and exact identity checks on small graphs."""

from .enumeration import EnumerationBudgetExceeded, exact_samples
from .identities import (
    CheckResult, corrupted_weights, current_weights, parity_constrained_sum,
    parity_constrained_sum_truncated, random_admissible_edges, reflection_margins,
    rho_by_definition, rho_exact, two_point_by_parity, verify_backbone_expansion, verify_concat,
    verify_reflection, verify_switching, verify_tfin,
)
from .oracle import (
    CorrelationTable, correlation_matrix, correlation_table, exact_correlation, log_partition,
    path_correlation,
)
from .transfer import TransferNotApplicable, TransferOracle

__all__ = [
    "CheckResult", "CorrelationTable", "EnumerationBudgetExceeded", "TransferNotApplicable",
    "TransferOracle", "correlation_matrix", "correlation_table", "corrupted_weights",
    "current_weights", "exact_correlation", "exact_samples", "log_partition",
    "parity_constrained_sum", "parity_constrained_sum_truncated", "path_correlation",
    "random_admissible_edges", "reflection_margins", "rho_by_definition", "rho_exact",
    "two_point_by_parity", "verify_backbone_expansion", "verify_concat", "verify_reflection",
    "verify_switching", "verify_tfin",
]
