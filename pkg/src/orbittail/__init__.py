"""Tail asymptotics for the orbit of a two-class priority retrial queue."""

from __future__ import annotations

from .errors import (
    AmbiguousProfile,
    BranchLoss,
    CaseMismatch,
    DivergentIntegral,
    DomainError,
    NoConvergence,
    OrbittailError,
    PrecisionExhausted,
    QuadratureFailure,
    UnstableDrift,
    UnsupportedKind,
)
from .implicit_map import (
    CASE1,
    CASE2,
    CASE3,
    TYPE2_DOMINANT,
    TYPE3_DOMINANT,
    ModelParams,
    SingularityProfile,
    build_profile,
    find_r_h,
    find_r_hstar,
    find_r_star,
    h_eval,
)
from .series_oracle import (
    CoefficientTable,
    RatioReport,
    coeffs_closed_noqueue,
    coeffs_contour,
    coeffs_contour_all,
    loglog_slope,
    ratio_report,
)
from .service_models import (
    Deterministic,
    Erlang,
    Exponential,
    GammaShape,
    HyperExponential,
    LstSingularData,
    Pareto,
    PowerLawCutoff,
    ServiceModel,
    classify_lst,
    endpoint_expansion,
    lst_eval,
    lst_increment,
    mean_service_time,
)
from .retrial_sim import (
    EmpiricalDist,
    SimConfig,
    sample_service,
    simulate,
)
from .tail_asymptotics import (
    AsymptoticLaw,
    F1Expansion,
    QExpansionData,
    f1_expand,
    f2_eval,
    p2_law,
    q_law,
    r_law,
    regime_D,
    special_nonretrial,
    type2_laws,
    type3_laws,
)

__version__ = "0.1.0"

__all__ = [
    "OrbittailError",
    "DomainError",
    "QuadratureFailure",
    "UnsupportedKind",
    "NoConvergence",
    "BranchLoss",
    "CaseMismatch",
    "DivergentIntegral",
    "AmbiguousProfile",
    "PrecisionExhausted",
    "UnstableDrift",
    "Exponential",
    "Erlang",
    "HyperExponential",
    "Deterministic",
    "GammaShape",
    "PowerLawCutoff",
    "Pareto",
    "ServiceModel",
    "LstSingularData",
    "mean_service_time",
    "lst_eval",
    "lst_increment",
    "classify_lst",
    "endpoint_expansion",
    "ModelParams",
    "SingularityProfile",
    "build_profile",
    "h_eval",
    "find_r_h",
    "find_r_star",
    "find_r_hstar",
    "CASE1",
    "CASE2",
    "CASE3",
    "TYPE2_DOMINANT",
    "TYPE3_DOMINANT",
    "F1Expansion",
    "QExpansionData",
    "AsymptoticLaw",
    "f1_expand",
    "f2_eval",
    "q_law",
    "r_law",
    "p2_law",
    "special_nonretrial",
    "regime_D",
    "type2_laws",
    "type3_laws",
    "CoefficientTable",
    "RatioReport",
    "coeffs_contour",
    "coeffs_contour_all",
    "coeffs_closed_noqueue",
    "ratio_report",
    "loglog_slope",
    "SimConfig",
    "EmpiricalDist",
    "simulate",
    "sample_service",
    "__version__",
]
