"""Phase-transition experiments for structured signal recovery."""

from ._unirec import (
    DomainError,
    FormatError,
    IoError,
    NumericalError,
    ParameterError,
    PhaseGrid,
    compare,
    contour,
    diagnose,
    eigh,
    generate_truth,
    grid_from_json,
    load_run,
    lowrank_delta_star,
    project_affine,
    project_psd,
    prox_trace_psd,
    q_function,
    q_inverse,
    run_cli,
    sample_mixing,
    sample_operator,
    sl_order,
    soft_threshold,
    solve,
    solve_oracle_l1,
    sparse_delta_star,
    sweep,
    width_l1_mc,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
