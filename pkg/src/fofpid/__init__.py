"""Fractional-order fuzzy PID control: controllers, benchmark plants, performance indices and GA tuning."""

from .controllers import (
    FOPIDController,
    FopidParams,
    FuzzyFOPIDController,
    FuzzyFopidParams,
    FuzzyPIDController,
    PIDController,
    decode_parameter_vector,
    make_controller,
)
from .estimators import ControllerTuner
from .fracops import (
    DiscreteFilter,
    FractionalOperator,
    OustaloupFilter,
    discretize,
    frequency_response,
    gl_oracle,
    split_order,
    synthesize_oustaloup,
)
from .fuzzy import FuzzyEngine, build_standard_engine, infer_and_defuzzify
from .plants import DelayedLTI, NonlinearP1, plant_p1, plant_p2
from .simloop import (
    ObjectiveSpec,
    PerformanceReport,
    Scenario,
    SimulationTrace,
    compute_indices,
    evaluate_objective,
    evaluation_scenario,
    run_closed_loop,
    tuning_scenario,
)
from .tuner import GaConfig, GaResult, ga_minimize

__version__ = "0.1.0"
