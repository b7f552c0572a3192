"""Subspace clustering and completion of partially observed data."""
from .exceptions import InfeasibleDualError, NumericalFailure, ParameterError
from .kernels import BACKEND
from .model import (CaseTag, GenerationMode, ObservationPattern, ObservedDataset,
                    SubspaceEnsemble, ensemble_from_bases, generate_ensemble,
                    sample_case1, sample_case2, sample_case3, zero_fill)
from .l1core import L1Solution, SolveStatus, brute_force_l1, solve_bp, solve_lasso
from .selfrep import (SSC_EWZF, SSC_LP, TSC, CoefficientMatrix,
                      affinity_from_coefficients, ssc_ewzf_coefficients,
                      ssc_lp_coefficients, tsc_affinity)
from .spectral import ClusterAssignment, spectral_cluster
from .complete import CompletionResult, SVTParams, complete_by_cluster, svt_complete
from .metrics import (EvaluationRecord, clustering_error, completion_error,
                      evaluate, subspace_error)
from .certify import CertificateEntry, CertificateReport, InradiusMethod, Verdict
from .bench import CertifyConfig, ExperimentConfig, run_certify, run_sweep

__version__ = "0.1.0"

__all__ = [
    "InfeasibleDualError",
    "NumericalFailure",
    "ParameterError",
    "BACKEND",
    "CaseTag",
    "GenerationMode",
    "ObservationPattern",
    "ObservedDataset",
    "SubspaceEnsemble",
    "ensemble_from_bases",
    "generate_ensemble",
    "sample_case1",
    "sample_case2",
    "sample_case3",
    "zero_fill",
    "L1Solution",
    "SolveStatus",
    "brute_force_l1",
    "solve_bp",
    "solve_lasso",
    "SSC_EWZF",
    "SSC_LP",
    "TSC",
    "CoefficientMatrix",
    "affinity_from_coefficients",
    "ssc_ewzf_coefficients",
    "ssc_lp_coefficients",
    "tsc_affinity",
    "ClusterAssignment",
    "spectral_cluster",
    "CompletionResult",
    "SVTParams",
    "complete_by_cluster",
    "svt_complete",
    "EvaluationRecord",
    "clustering_error",
    "completion_error",
    "evaluate",
    "subspace_error",
    "CertificateEntry",
    "CertificateReport",
    "InradiusMethod",
    "Verdict",
    "CertifyConfig",
    "ExperimentConfig",
    "run_certify",
    "run_sweep",
]
