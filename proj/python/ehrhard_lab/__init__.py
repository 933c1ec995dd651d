"""Python bindings for the ehrhard-lab C++ core."""

from ._core import (
    DegeneratePointError,
    DomainError,
    EvaluationError,
    ParameterError,
    PrecisionError,
    PreconditionError,
    RegimeError,
    Surface,
    __version__,
    argmax_x0,
    audit_measure,
    block_condition,
    catalog,
    check_pdi,
    classify_homogeneous,
    elliptic_params,
    find_counterexample,
    inequality_gap,
    lp_smoothed_lhs,
    max_surface,
    normal_cdf,
    normal_quantile,
    pdi_value,
    psi_closed_form,
    regime,
    solve_obstacle,
    sup_convolve,
    surface,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
