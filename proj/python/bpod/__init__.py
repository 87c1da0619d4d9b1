"""Snapshot-based balanced POD for the linearized channel-flow testbed."""

from bpod._core import (  # noqa: F401
    InvalidParameterError,
    NumericalErrorException,
    OsSquireModel,
    __version__,
    bpod,
    chebyshev_points,
    diff_matrix,
    exact_balanced_truncation,
    frequency_response,
    gaussian_actuator,
    impulse_error_2norm,
    pod,
    propagate,
    quadrature_weights,
    reduce_dense,
    run_pipeline,
    spectrum,
    stable_dt,
    subspace_trace,
    verify_workdir,
)
