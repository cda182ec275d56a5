"""Orthogonal extended-infomax ICA.

Blind source separation built around a multiplicative, learning-rate-free
update that keeps the unmixing matrix on the orthogonal group, plus the
classic natural-gradient extended infomax baseline, PCA whitening,
seeded synthetic benchmarks and Amari-distance evaluation.

Typical use::

    from ogica import fit_whitening, apply_whitening, run_ogextinf

    model = fit_whitening(data)            # rows = channels
    result = run_ogextinf(apply_whitening(model, data))
    sources = result.sources               # rows = estimated sources
"""

from .exceptions import (
    DegenerateComponentError,
    DegenerateDataError,
    DivergenceError,
    MatrixParseError,
    NumericalError,
    OgicaError,
    ParameterError,
    ReducedRankError,
    SingularUpdateError,
    UndefinedMetricError,
    ValidationError,
)
from .extinf import GradientConfig, extinf_step, run_extinf
from .matrixio import format_matrix, read_matrix, write_matrix
from .metrics import (
    BenchmarkReport,
    RunRecord,
    aggregate,
    amari_distance,
    composed_unmixing,
    percentile_nearest_rank,
)
from .ogextinf import (
    ConvergenceRecord,
    ICAResult,
    IterationConfig,
    UnmixingState,
    apply_unmixing,
    higher_order_cov,
    multiplicative_update,
    phi,
    random_orthogonal,
    run_ogextinf,
    select_sign_kurtosis,
    select_sign_stability,
    select_signs,
    symmetric_orthogonalize,
    update_step,
    weight_change,
)
from .preprocess import WhiteningModel, apply_whitening, center, fit_whitening
from .simulate import (
    ExperimentSpec,
    MixtureDataset,
    experiment_preset,
    make_dataset,
    random_mixing,
    sample_laplacian,
    sample_uniform2,
)

__version__ = "1.0.0"

__all__ = [
    "BenchmarkReport",
    "ConvergenceRecord",
    "DegenerateComponentError",
    "DegenerateDataError",
    "DivergenceError",
    "ExperimentSpec",
    "GradientConfig",
    "ICAResult",
    "IterationConfig",
    "MatrixParseError",
    "MixtureDataset",
    "NumericalError",
    "OgicaError",
    "ParameterError",
    "ReducedRankError",
    "RunRecord",
    "SingularUpdateError",
    "UndefinedMetricError",
    "UnmixingState",
    "ValidationError",
    "WhiteningModel",
    "aggregate",
    "amari_distance",
    "apply_unmixing",
    "apply_whitening",
    "center",
    "composed_unmixing",
    "experiment_preset",
    "extinf_step",
    "fit_whitening",
    "format_matrix",
    "higher_order_cov",
    "make_dataset",
    "multiplicative_update",
    "percentile_nearest_rank",
    "phi",
    "random_mixing",
    "random_orthogonal",
    "read_matrix",
    "run_extinf",
    "run_ogextinf",
    "sample_laplacian",
    "sample_uniform2",
    "select_sign_kurtosis",
    "select_sign_stability",
    "select_signs",
    "symmetric_orthogonalize",
    "update_step",
    "weight_change",
    "write_matrix",
]
