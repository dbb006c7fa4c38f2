"""Real-coded genetic algorithm with rank scaling, stochastic-uniform selection,
elitism, scattered crossover and shrinking Gaussian mutation."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


@dataclass
class GaConfig:
    bounds: Sequence[tuple[float, float]]
    population_size: int = 20
    elite_count: int = 2
    crossover_fraction: float = 0.8
    max_generations: int = 100
    stall_tolerance: float = 1e-6
    stall_generations: int = 50
    mutation_scale: float = 0.1
    mutation_shrink: float = 1.0
    penalty: float | None = 10000.0
    seed: int = 0
    n_jobs: int = 1
    init_bounds: Sequence[tuple[float, float]] | None = None

    def __post_init__(self):
        self.bounds = [(float(lo), float(hi)) for lo, hi in self.bounds]
        if not self.bounds:
            raise ValueError("bounds must not be empty")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"each bound needs lo < hi, got ({lo}, {hi})")
        if self.init_bounds is not None:
            if len(self.init_bounds) != len(self.bounds):
                raise ValueError("init_bounds needs one interval per gene")
            init = []
            for (lo, hi), (a, b) in zip(self.bounds, self.init_bounds):
                a, b = max(float(a), lo), min(float(b), hi)
                if not a < b:
                    raise ValueError(f"init interval ({a}, {b}) must overlap the bounds ({lo}, {hi})")
                init.append((a, b))
            self.init_bounds = init
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("need 0 <= elite_count < population_size")
        if not 0.0 <= self.crossover_fraction <= 1.0:
            raise ValueError("crossover_fraction must lie in [0, 1]")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValueError("generation limits must be positive")
        if self.mutation_scale < 0 or not 0 <= self.mutation_shrink <= 1:
            raise ValueError("mutation_scale >= 0 and mutation_shrink in [0, 1] required")

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def init_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Box sampled for the initial population; it also sets the mutation scale."""
        box = self.bounds if self.init_bounds is None else self.init_bounds
        return np.array([lo for lo, _ in box]), np.array([hi for _, hi in box])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bounds"] = [list(b) for b in self.bounds]
        if self.init_bounds is not None:
            d["init_bounds"] = [list(b) for b in self.init_bounds]
        return d


@dataclass
class Individual:
    genes: np.ndarray
    score: float = math.inf
    fitness: float = 0.0


@dataclass
class GaResult:
    best_genes: np.ndarray
    best_score: float
    best_history: list[float]
    mean_history: list[float]
    generations: int
    termination: str
    evaluations: int = 0
    population: list[Individual] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "best_genes": [float(v) for v in self.best_genes],
            "best_score": float(self.best_score),
            "generations": self.generations,
            "termination": self.termination,
            "evaluations": self.evaluations,
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def history_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "best_J", "mean_J"])
            for g, (b, m) in enumerate(zip(self.best_history, self.mean_history)):
                w.writerow([g, repr(b), repr(m)])


def rank_scale(scores, n_parents: int | None = None) -> np.ndarray:
    """Fitness proportional to ``1/sqrt(rank)`` (rank 1 = lowest score), summing to ``n_parents``."""
    scores = np.asarray(scores, dtype=float)
    n = scores.size
    n_parents = n if n_parents is None else n_parents
    order = np.argsort(scores, kind="stable")
    # tied scores share the mean of their raw rank weights
    raw = 1.0 / np.sqrt(np.arange(1, n + 1))
    fitness = np.empty(n)
    sorted_scores = scores[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        fitness[order[i : j + 1]] = raw[i : j + 1].mean()
        i = j + 1
    return fitness * (n_parents / fitness.sum())


def stochastic_uniform(fitness, n_select: int, rng: np.random.Generator) -> np.ndarray:
    """Equally spaced pointers over the cumulative fitness line, one random offset."""
    fitness = np.asarray(fitness, dtype=float)
    cum = np.cumsum(fitness)
    step = cum[-1] / n_select
    pointers = rng.uniform(0.0, step) + step * np.arange(n_select)
    return np.minimum(np.searchsorted(cum, pointers, side="right"), fitness.size - 1)


def scattered_crossover(parent_a, parent_b, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(len(parent_a)) < 0.5
    return np.where(mask, parent_a, parent_b)


def mutation_sigma(generation: int, config: GaConfig) -> float:
    """Fraction of each gene's range used as the Gaussian standard deviation."""
    frac = min(generation, config.max_generations) / config.max_generations
    return config.mutation_scale * (1.0 - config.mutation_shrink * frac)


def gaussian_mutate(parent, generation: int, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    lo, hi = config.lower, config.upper
    init_lo, init_hi = config.init_box
    sigma = mutation_sigma(generation, config) * (init_hi - init_lo)
    child = np.asarray(parent, dtype=float) + sigma * rng.standard_normal(lo.size)
    return np.clip(child, lo, hi)


def select_elites(scores, elite_count: int, penalty: float | None = None) -> np.ndarray:
    """Indices of the best ``elite_count`` scores.

    When at least one score is below ``penalty``, penalized individuals are
    excluded, so fewer than ``elite_count`` indices may be returned.
    """
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(scores, kind="stable")
    if penalty is not None and np.any(scores < penalty):
        order = order[scores[order] < penalty]
    return order[:elite_count]


def _evaluate(objective, genes_list, n_jobs):
    if n_jobs == 1:
        return [float(objective(g)) for g in genes_list]
    from joblib import Parallel, delayed

    return [float(v) for v in Parallel(n_jobs=n_jobs)(delayed(objective)(g) for g in genes_list)]


def ga_minimize(objective: Callable[[np.ndarray], float], config: GaConfig,
                callback: Callable[[int, float, float], None] | None = None) -> GaResult:
    """Minimize ``objective`` over the box ``config.bounds``."""
    rng = np.random.default_rng(config.seed)
    lo, hi = config.lower, config.upper
    pop_n = config.population_size
    n_children = pop_n - config.elite_count
    n_xover = int(round(config.crossover_fraction * n_children))
    n_mut = n_children - n_xover
    n_parents = 2 * n_xover + n_mut

    init_lo, init_hi = config.init_box
    genes = init_lo + (init_hi - init_lo) * rng.random((pop_n, lo.size))
    scores = np.array(_evaluate(objective, list(genes), config.n_jobs))
    evaluations = pop_n
    best_i = int(np.argmin(scores))
    best_genes, best_score = genes[best_i].copy(), float(scores[best_i])
    best_hist = [best_score]
    mean_hist = [float(scores.mean())]
    termination = "max_generations"
    generation = 0

    while generation < config.max_generations:
        generation += 1
        fitness = rank_scale(scores, n_parents)
        parents = stochastic_uniform(fitness, n_parents, rng)
        parents = parents[rng.permutation(n_parents)]

        elites = select_elites(scores, config.elite_count, config.penalty)
        order = np.argsort(scores, kind="stable")
        n_mut_g = n_mut + (config.elite_count - elites.size)

        children = [genes[i].copy() for i in elites]
        for c in range(n_xover):
            a, b = genes[parents[2 * c]], genes[parents[2 * c + 1]]
            children.append(scattered_crossover(a, b, rng))
        mut_parents = parents[2 * n_xover :]
        for c in range(n_mut_g):
            p = genes[mut_parents[c % mut_parents.size]] if mut_parents.size else genes[order[0]]
            children.append(gaussian_mutate(p, generation, config, rng))

        new_genes = np.array(children)
        new_scores = np.empty(pop_n)
        new_scores[: elites.size] = scores[elites]
        new_scores[elites.size :] = _evaluate(objective, list(new_genes[elites.size :]), config.n_jobs)
        evaluations += pop_n - elites.size
        genes, scores = new_genes, new_scores

        i = int(np.argmin(scores))
        if scores[i] < best_score:
            best_genes, best_score = genes[i].copy(), float(scores[i])
        best_hist.append(best_score)
        mean_hist.append(float(scores.mean()))
        if callback is not None:
            callback(generation, best_score, mean_hist[-1])
        window = config.stall_generations
        if generation >= window and best_hist[-1 - window] - best_hist[-1] < config.stall_tolerance:
            termination = "stall"
            break

    population = [Individual(g.copy(), float(s)) for g, s in zip(genes, scores)]
    for ind, f in zip(population, rank_scale(scores)):
        ind.fitness = float(f)
    return GaResult(
        best_genes=best_genes,
        best_score=best_score,
        best_history=best_hist,
        mean_history=mean_hist,
        generations=generation,
        termination=termination,
        evaluations=evaluations,
        population=population,
    )
