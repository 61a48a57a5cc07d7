"""Numerical checks for isometric immersions of lcK manifolds into Hopf manifolds.

Modules
-------
algebra      truncated power series in ``z`` and ``conj(z)``
calabi       diastasis, Calabi matrices, resolvability
geometry     metrics from potentials, lcK residuals, homothety characters
surfaces     catalog of explicit surfaces and the implicit Hopf potential
immersions   explicit maps into flat space and their certificates
cli          JSON-emitting command line driver
"""
__version__ = "0.1.0"

from .algebra import BiSeries, multi_indices, pure_part_removal, series_add, series_exp, series_mul, series_rpow
from .calabi import (
    CalabiMatrix,
    ResolvabilityReport,
    calabi_matrix,
    diastasis_from_potential,
    go_negative_witness,
    resolvability,
)
from .exceptions import (
    CalabiKitError,
    ContractError,
    DimensionError,
    DomainError,
    ParameterError,
    PreconditionError,
)
from .geometry import (
    CharacterRank,
    DeckMap,
    HermitianMetricField,
    PotentialField,
    character_rank,
    homothety_factor,
    lck_residual,
    metric_from_potential,
)
from .immersions import (
    DescentReport,
    ImmersionMap,
    norm_squared,
    pullback_metric,
    rigidity_gauge,
    scalar_descent,
    verify_immersion,
)
from .surfaces import GOParams, Surface, SurfaceSpec, build_surface, go_derivative_check, go_potential, parse_surface

__all__ = [
    "BiSeries", "multi_indices", "pure_part_removal", "series_add", "series_exp", "series_mul", "series_rpow",
    "CalabiMatrix", "ResolvabilityReport", "calabi_matrix", "diastasis_from_potential", "go_negative_witness",
    "resolvability", "CalabiKitError", "ContractError", "DimensionError", "DomainError", "ParameterError",
    "PreconditionError", "CharacterRank", "DeckMap", "HermitianMetricField", "PotentialField", "character_rank",
    "homothety_factor", "lck_residual", "metric_from_potential", "DescentReport", "ImmersionMap", "norm_squared",
    "pullback_metric", "rigidity_gauge", "scalar_descent", "verify_immersion", "GOParams", "Surface",
    "SurfaceSpec", "build_surface", "go_derivative_check", "go_potential", "parse_surface",
]
