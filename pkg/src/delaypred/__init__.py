"""Predictor-based output feedback for linear systems whose input and
measurement paths carry independent time-varying delays.

The pieces fit together like this: `delays` describes and validates the
delay signals, `horizon` solves the implicit prediction-horizon
equation by several methods (including a learned operator in `fno`),
`plant` runs the closed loop, `margins` evaluates the stability
constants, and `bench`/`container` handle datasets and the portable
tensor format. `cli` exposes all of it as subcommands.
"""

from .bench import (BenchResult, bench_methods, bench_to_csv, gen_dataset,
                    split_indices)
from .container import read_container, write_container
from .delays import (DEFAULT_RANGES, DEMO_D1, DEMO_D2, AssumptionReport,
                     DelayPair, DelayParams, LinearDelay, ParamRanges,
                     TabulatedDelay, check_assumptions, phi, phi_slope,
                     sample_delay)
from .errors import (AssumptionViolation, ConfigError, ContainerFormatError,
                     DelayPredError, NumericError)
from .fno import (OperatorWeights, consistency_error, fno_forward,
                  load_weights, neural_psi, save_weights,
                  synth_constant_weights)
from .horizon import (HorizonSeries, LipschitzCheck, euler_error_bound,
                      euler_psi, lipschitz_check, oracle_psi, rk4_psi,
                      solve_psi0, windowed_psi)
from .margins import (MarginReport, NormEquivalenceResult, compute_margins,
                      norm_equivalence_check, random_norm_equivalence_trials,
                      solve_lyapunov)
from .plant import (HistoryBuffer, HistorySpec, InitialData, PlantSpec,
                    SimulationTrace, gamma_decay_fit, matrix_exponential,
                    predict_phat, reconstruct_zhat, simulate)
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport", "AssumptionViolation", "BenchResult", "ConfigError",
    "ContainerFormatError", "DEFAULT_RANGES", "DEMO_D1", "DEMO_D2",
    "DelayPair", "DelayParams", "DelayPredError", "HistoryBuffer",
    "HistorySpec", "HorizonSeries", "InitialData", "LinearDelay",
    "LipschitzCheck", "MarginReport", "NormEquivalenceResult", "NumericError",
    "OperatorWeights", "ParamRanges", "PlantSpec", "SimulationTrace",
    "SplitMix64", "TabulatedDelay", "bench_methods", "bench_to_csv", "check_assumptions",
    "compute_margins", "consistency_error", "euler_error_bound", "euler_psi",
    "fno_forward", "gamma_decay_fit", "gen_dataset", "lipschitz_check",
    "load_weights", "matrix_exponential", "neural_psi",
    "norm_equivalence_check", "oracle_psi", "phi", "phi_slope",
    "predict_phat", "random_norm_equivalence_trials", "read_container",
    "reconstruct_zhat", "rk4_psi", "sample_delay", "save_weights",
    "simulate", "solve_lyapunov", "solve_psi0", "split_indices",
    "synth_constant_weights", "windowed_psi", "write_container",
]
