"""Streaming dynamic mode decomposition.

Fit a least-squares transition operator to snapshot pairs and keep it
current as new snapshots arrive: rank-1 online updates over a growing
(optionally exponentially weighted) history, rank-2 sliding-window
updates, batch and mini-batch reference solves, lifted-regression system
identification, and eigenvalue/frequency tracking on top of any of them.
"""

from .errors import (DataError, DmdError, InsufficientDataError,
                     ParameterError, ParseError, RankError, ShapeError)
from .kernel import CONDITION_LIMIT, EigDecomp, FlopCounter
from .snapshots import (SnapshotMatrices, SnapshotPair, StreamHeader,
                        pair_trajectory, read_stream, stack,
                        write_pairs_csv, write_snapshot_csv)
from .batch import BatchSolution, batch_dmd, mini_batch_dmd, weighted_batch_dmd
from .online import OnlineDMD, UpdateReport, half_life_to_rho
from .windowed import WindowedDMD
from .sysid import (Dictionary, SysIdModel, Term, identify_stream, lift,
                    read_sample_csv, write_sample_csv)
from .spectral import (Spectrum, TrackRecord, rank_dominant, read_track_csv,
                       spectrum_of)
from .harness import (BenchConfig, BenchResult, LtvConfig,
                      generate_sensor_states, integrate_ltv, loglog_slope,
                      ltv_omega, run_benchmark, run_ltv,
                      run_synthetic_sensors)

__version__ = "0.1.0"

__all__ = [
    "DmdError", "ParameterError", "ShapeError", "DataError", "ParseError",
    "InsufficientDataError", "RankError",
    "CONDITION_LIMIT", "FlopCounter", "EigDecomp",
    "SnapshotPair", "SnapshotMatrices", "StreamHeader", "pair_trajectory",
    "stack", "read_stream", "write_snapshot_csv", "write_pairs_csv",
    "BatchSolution", "batch_dmd", "weighted_batch_dmd", "mini_batch_dmd",
    "OnlineDMD", "UpdateReport", "half_life_to_rho",
    "WindowedDMD",
    "Term", "Dictionary", "SysIdModel", "lift", "identify_stream",
    "read_sample_csv", "write_sample_csv",
    "Spectrum", "spectrum_of", "rank_dominant", "TrackRecord",
    "read_track_csv",
    "BenchConfig", "BenchResult", "run_benchmark", "loglog_slope",
    "LtvConfig", "ltv_omega", "integrate_ltv", "run_ltv",
    "generate_sensor_states", "run_synthetic_sensors",
    "__version__",
]
