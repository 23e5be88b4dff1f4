"""Markov chain samplers for the Ising measure on lattice graphs."""

from .calibrate import BETA_C, binder_crossing, binder_cumulant, critical_beta, resolve_beta
from .chain import (
    SAMPLERS, ChainState, ModelParams, energy_terms, hybrid_sweep, metropolis_sweep,
    swendsen_wang_sweep, wolff_sweep, wolff_update,
)
from .ensemble import (
    SampleStream, Schedule, read_spool, replica_seeds, run_replicas, sample_ensemble, write_spool,
)
from .fk import FKSeries, measure_fk

__all__ = [
    "BETA_C", "SAMPLERS", "ChainState", "FKSeries", "ModelParams", "SampleStream", "Schedule",
    "binder_crossing", "binder_cumulant", "critical_beta", "energy_terms", "hybrid_sweep",
    "measure_fk", "metropolis_sweep", "read_spool", "replica_seeds", "resolve_beta", "run_replicas",
    "sample_ensemble", "swendsen_wang_sweep", "wolff_sweep", "wolff_update", "write_spool",
]
