"""scikit-learn style front end for GA controller tuning."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .controllers import decode_parameter_vector, default_bounds, default_init_bounds, make_controller
from .simloop import (
    ClosedLoopObjective,
    ObjectiveSpec,
    Scenario,
    compute_indices,
    evaluation_scenario,
    run_closed_loop,
    tuning_scenario,
)
from .plants import plant_from_dict
from .tuner import GaConfig, ga_minimize


class ControllerTuner(BaseEstimator):
    """Tune a controller of ``kind`` on ``plant`` by minimizing ``w1*index + w2*ISCO``.

    ``fit`` runs the genetic algorithm; afterwards ``best_params_``,
    ``best_score_``, ``controller_`` and ``result_`` are available.

    ``init_bounds`` is the box the initial population is drawn from and
    also scales the mutation noise. By default gains start in ``[0, 1]``
    and orders over their full range, while ``bounds`` (default
    ``[0, 100]`` for gains) limits where the search may go. Pass
    ``init_bounds="full"`` to seed uniformly over ``bounds``.

    Examples
    --------
    >>> tuner = ControllerTuner("pid", plant="p1", max_generations=5, random_state=1)
    >>> tuner.fit().best_score_ < 10000
    True
    """

    def __init__(self, kind="fuzzy_fopid", plant="p1", index="ITAE", w1=1.0, w2=1.0,
                 penalty=10000.0, horizon=None, sample_time=None, bounds=None,
                 init_bounds=None, population_size=20, elite_count=2, crossover_fraction=0.8,
                 max_generations=100, stall_tolerance=1e-6, stall_generations=50,
                 mutation_scale=0.1, mutation_shrink=1.0, random_state=0, n_jobs=1):
        self.kind = kind
        self.plant = plant
        self.index = index
        self.w1 = w1
        self.w2 = w2
        self.penalty = penalty
        self.horizon = horizon
        self.sample_time = sample_time
        self.bounds = bounds
        self.init_bounds = init_bounds
        self.population_size = population_size
        self.elite_count = elite_count
        self.crossover_fraction = crossover_fraction
        self.max_generations = max_generations
        self.stall_tolerance = stall_tolerance
        self.stall_generations = stall_generations
        self.mutation_scale = mutation_scale
        self.mutation_shrink = mutation_shrink
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _scenario(self, evaluation=False) -> Scenario:
        if isinstance(self.plant, str):
            make = evaluation_scenario if evaluation else tuning_scenario
            return make(self.plant, self.horizon, self.sample_time)
        if self.horizon is None or self.sample_time is None:
            raise ValueError("horizon and sample_time are required for a custom plant")
        sc = Scenario(horizon=self.horizon, sample_time=self.sample_time)
        if evaluation:
            sc.disturbance_time = sc.horizon / 2.0
        return sc

    def objective(self) -> ClosedLoopObjective:
        bounds = default_bounds(self.kind) if self.bounds is None else self.bounds
        spec = ObjectiveSpec(self.index, self.w1, self.w2, self.penalty)
        return ClosedLoopObjective(self.kind, self.plant, spec, self._scenario(), list(bounds))

    def _init_box(self, bounds):
        if isinstance(self.init_bounds, str):
            if self.init_bounds != "full":
                raise ValueError(f"init_bounds must be a list of intervals or 'full', got {self.init_bounds!r}")
            return None
        if self.init_bounds is not None:
            return list(self.init_bounds)
        # seed gains in the default box where it overlaps the search bounds
        box = []
        for (lo, hi), (a, b) in zip(bounds, default_init_bounds(self.kind)):
            a, b = max(a, lo), min(b, hi)
            box.append((a, b) if a < b else (lo, hi))
        return box

    def fit(self, X=None, y=None, callback=None):
        obj = self.objective()
        config = GaConfig(
            bounds=obj.bounds,
            init_bounds=self._init_box(obj.bounds),
            population_size=self.population_size,
            elite_count=self.elite_count,
            crossover_fraction=self.crossover_fraction,
            max_generations=self.max_generations,
            stall_tolerance=self.stall_tolerance,
            stall_generations=self.stall_generations,
            mutation_scale=self.mutation_scale,
            mutation_shrink=self.mutation_shrink,
            penalty=self.penalty,
            seed=self.random_state,
            n_jobs=self.n_jobs,
        )
        self.result_ = ga_minimize(obj, config, callback=callback)
        self.best_genes_ = np.asarray(self.result_.best_genes)
        self.best_score_ = float(self.result_.best_score)
        self.best_params_ = decode_parameter_vector(self.kind, self.best_genes_, obj.bounds)
        self.controller_ = make_controller(self.kind, self.best_params_, obj.scenario.sample_time)
        self.history_ = list(self.result_.best_history)
        return self

    def simulate(self, scenario: Scenario | None = None):
        """Closed-loop trace of the tuned controller (evaluation scenario by default)."""
        check_is_fitted(self, "controller_")
        scenario = self._scenario(evaluation=True) if scenario is None else scenario
        plant = plant_from_dict(self.plant, scenario.sample_time)
        controller = make_controller(self.kind, self.best_params_, scenario.sample_time)
        return run_closed_loop(controller, plant, scenario)

    def report(self, scenario: Scenario | None = None):
        scenario = self._scenario(evaluation=True) if scenario is None else scenario
        return compute_indices(self.simulate(scenario), step_window=scenario.disturbance_time)

    def score(self, X=None, y=None) -> float:
        """Negated best objective, so larger is better."""
        check_is_fitted(self, "best_score_")
        return -self.best_score_
