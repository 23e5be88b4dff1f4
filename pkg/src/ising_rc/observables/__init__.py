"""Estimators, error bars and fits over configuration streams."""

from .autocorr import autocorrelation, batch_means_error, integrated_autocorr_time
from .correlations import box_sites, bulk_pairs, chi_pair_sum, spins_of, susceptibility, two_point_table
from .field import (
    TEST_FUNCTIONS, bump, coordinate, covariance_estimate, cumulant_diagnostics,
    effective_sample_size, field_functional, field_scale, indicator, mgf_estimate, reweighted_mean,
    reweighted_variance, test_function,
    tilt_reweight, tilt_variance,
)
from .fit import ExponentialFit, PowerLawFit, fit_exponential, fit_power_law
from .records import EstimateRecord, SusceptibilityRecord

__all__ = [
    "TEST_FUNCTIONS", "EstimateRecord", "ExponentialFit", "PowerLawFit", "SusceptibilityRecord",
    "autocorrelation", "batch_means_error", "box_sites", "bulk_pairs", "bump", "chi_pair_sum", "coordinate",
    "covariance_estimate", "cumulant_diagnostics", "effective_sample_size", "field_functional",
    "field_scale", "fit_exponential", "fit_power_law", "indicator", "integrated_autocorr_time",
    "mgf_estimate", "reweighted_mean", "reweighted_variance", "spins_of", "susceptibility", "test_function", "tilt_reweight", "tilt_variance",
    "two_point_table",
]
