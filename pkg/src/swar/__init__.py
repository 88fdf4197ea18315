"""Slice weighted average regression for sufficient dimension reduction."""

from .estimators import (
    DirectionBasis,
    EstimatorConfig,
    Selection,
    fit,
    ols_direction,
    select_h_k,
    sir,
    swar,
    swar_t,
    swar_w,
    swar_weights_within,
)
from .influence import (
    ContaminantPoint,
    InfluenceReport,
    PopulationSpec,
    asv_gamma1,
    eif_rho,
    gaussian_linear_population,
    population_if_gamma1,
    population_if_rho,
    sif_direction,
    sif_rho,
)
from .numerics import benasseni_distance, squared_canonical_correlations
from .slicing import Dataset, SliceScheme, assign_slices, slice_statistics

__version__ = "0.1.0"
