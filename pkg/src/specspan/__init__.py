"""Spectral spanners of vector sets and composable core-sets built on them."""

from .vectorset import VectorSet
from .spanner import (SpannerParams, Spanner, CoverageCertificate,
                      build_d_spanner, build_k_spanner, volume_greedy,
                      verify_weak, verify_k_spanner, strong_certificate)
from .detmax import (Solution, FractionalSolution, DesignObjective,
                     brute_force_detmax, greedy_local_search,
                     fractional_detmax, nikolov_round, eval_design,
                     fractional_design)
from .coreset import (PartitionedInput, PipelineReport, PartitionScheme,
                      Solver, partition, run_pipeline, stream_pipeline)
from .hardgen import (HardInstance, sample_sphere, random_rotation,
                      gen_hard_instance, gen_pm1_lowerbound,
                      lowerbound_experiment)

__version__ = "0.1.0"

__all__ = [
    "VectorSet", "SpannerParams", "Spanner", "CoverageCertificate",
    "build_d_spanner", "build_k_spanner", "volume_greedy", "verify_weak",
    "verify_k_spanner", "strong_certificate", "Solution", "FractionalSolution",
    "DesignObjective", "brute_force_detmax", "greedy_local_search",
    "fractional_detmax", "nikolov_round", "eval_design", "fractional_design",
    "PartitionedInput", "PipelineReport", "PartitionScheme", "Solver",
    "partition", "run_pipeline", "stream_pipeline", "HardInstance",
    "sample_sphere", "random_rotation", "gen_hard_instance",
    "gen_pm1_lowerbound", "lowerbound_experiment",
]
