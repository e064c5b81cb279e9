"""Genetic search over ``(l_s, eta1, eta2, Q)`` minimizing training MAE.

Chromosomes are four genes in [0, 1], decoded linearly into the configured
parameter bounds, so one mutation amplitude means the same thing for every
parameter. ``l_pr`` is fixed by the task and never evolved.

Random draws come from a single ``numpy.random.Generator`` in a fixed order:
the initial population (``population_size x 4`` uniforms), then per
offspring: tournament A indices, tournament B indices, four crossover
weights, one mutation gate, four mutation steps. Nothing else consumes the
stream, so a seed fully determines a run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .errors import DataError, ParameterError
from .invariant import StringParams
from .predictor import forecast_segment, forecast_windows, history_windows, resolve_fallbacks

GENE_ORDER = ("l_s", "eta1", "eta2", "Q")

DEFAULT_BOUNDS = {
    "l_s": (2.0, 50.0),
    "eta1": (-0.96, 0.96),
    "eta2": (-0.96, 0.96),
    "Q": (0.01, 30.0),
}

IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 20
    tournament_size: int = 5
    elite_fraction: float = 0.01
    stop_no_progress: int = 50
    mutation_rate_initial: float = 0.5
    mutation_probability: float = 1.0
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    seed: int = 0
    max_generations: int | None = None
    min_train_forecasts: int = 5

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ParameterError("population_size must be at least 2")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ParameterError("tournament_size must be in [1, population_size]")
        if not 0 <= self.mutation_probability <= 1:
            raise ParameterError("mutation_probability must be in [0, 1]")
        if not 0 < self.mutation_rate_initial <= 1:
            raise ParameterError("mutation_rate_initial must be in (0, 1]")
        if self.stop_no_progress < 1:
            raise ParameterError("stop_no_progress must be positive")
        if self.min_train_forecasts < 1:
            raise ParameterError("min_train_forecasts must be positive")
        merged = dict(DEFAULT_BOUNDS)
        merged.update(self.bounds)
        for name, (lo, hi) in merged.items():
            if name not in DEFAULT_BOUNDS:
                raise ParameterError(f"unknown parameter bound {name!r}")
            if not lo <= hi:
                raise ParameterError(f"bound for {name} has min > max")
        if merged["Q"][0] <= 0:
            raise ParameterError("Q bounds must be positive")
        if merged["eta1"][0] <= -1 or merged["eta1"][1] >= 1 \
                or merged["eta2"][0] <= -1 or merged["eta2"][1] >= 1:
            raise ParameterError("eta bounds must lie inside (-1, 1)")
        object.__setattr__(self, "bounds", {k: (float(lo), float(hi)) for k, (lo, hi) in merged.items()})

    @property
    def n_elite(self) -> int:
        return max(1, int(math.floor(self.elite_fraction * self.population_size + 0.5)))

    def feasible_for(self, l_pr: int, n_train: int) -> "GAConfig":
        """Narrow the ``l_s`` bound to what ``l_pr`` and the training length allow.

        Every candidate keeps at least ``min_train_forecasts`` training
        forecasts; with fewer, a lucky fallback can score a spurious zero.
        """
        lo, hi = self.bounds["l_s"]
        hi = min(hi, n_train - l_pr - self.min_train_forecasts)
        lo = max(lo, l_pr + 1)
        if hi < lo:
            raise ParameterError(
                f"infeasible bounds: l_s must lie in [{lo:g}, {hi:g}] for horizon {l_pr} "
                f"and {n_train} training samples")
        return replace(self, bounds={**self.bounds, "l_s": (lo, hi)})


@dataclass
class Genotype:
    genes: np.ndarray
    params: StringParams | None = None
    fitness: float | None = None


def decode(genotype, config: GAConfig, l_pr: int) -> StringParams:
    genes = np.asarray(getattr(genotype, "genes", genotype), dtype=float)
    vals = {}
    for g, name in zip(genes, GENE_ORDER):
        lo, hi = config.bounds[name]
        vals[name] = lo + float(g) * (hi - lo)
    l_s = int(math.floor(vals["l_s"] + 0.5))
    l_s = max(l_s, l_pr + 1)
    return StringParams(l_s, l_pr, vals["eta1"], vals["eta2"], vals["Q"])


def training_forecasts(train, params: StringParams):
    """Forecasts for every admissible origin of a training segment."""
    v = np.asarray(getattr(train, "values", train), dtype=float)
    taus = np.arange(params.l_s, len(v) - params.l_pr)
    if taus.size == 0:
        raise DataError(
            f"training segment too short: {len(v)} samples for l_s={params.l_s}, "
            f"l_pr={params.l_pr}")
    raw = forecast_windows(history_windows(v, taus, params.l_s), params)
    run = resolve_fallbacks(raw, v[taus], taus, params.l_pr)
    return v[taus + params.l_pr], run


def evaluate_fitness(genotype, train, l_pr: int, config: GAConfig | None = None) -> float:
    """Training MAE of the decoded parameters (lower is better)."""
    if isinstance(genotype, StringParams):
        params = genotype
    elif isinstance(genotype, Genotype) and genotype.params is not None:
        params = genotype.params
    else:
        params = decode(genotype, config or GAConfig(), l_pr)
    actual, run = training_forecasts(train, params)
    return metrics.mae(actual, run.values)


def _tournament(fitness: np.ndarray, size: int, rng: np.random.Generator) -> int:
    idx = rng.choice(len(fitness), size=size, replace=False)
    return int(idx[np.argmin(fitness[idx])])


def select_parents(population, config: GAConfig, rng: np.random.Generator):
    """Winners of two independent tournaments (no repeats inside one)."""
    fitness = np.array([g.fitness for g in population], dtype=float)
    a = _tournament(fitness, config.tournament_size, rng)
    b = _tournament(fitness, config.tournament_size, rng)
    return population[a], population[b]


def crossover(parent_a: Genotype, parent_b: Genotype, rng=None, alpha=None) -> Genotype:
    """Per-gene random blend ``alpha * a + (1 - alpha) * b``."""
    a, b = parent_a.genes, parent_b.genes
    if alpha is None:
        alpha = rng.random(len(a))
    alpha = np.asarray(alpha, dtype=float)
    child = alpha * a + (1.0 - alpha) * b
    # rounding must not leave the parents' interval
    child = np.clip(child, np.minimum(a, b), np.maximum(a, b))
    return Genotype(child)


def mutate_and_repair(genotype: Genotype, mr: float, config: GAConfig, rng=None,
                      gate=None, beta=None) -> Genotype:
    """Add ``mr * beta`` (beta uniform in [-1, 1]) with the configured
    probability, then clamp every gene into [0, 1]."""
    n = len(genotype.genes)
    if gate is None:
        gate = rng.random()
    if beta is None:
        beta = rng.uniform(-1.0, 1.0, n)
    genes = np.array(genotype.genes, dtype=float)
    if gate < config.mutation_probability and mr != 0:
        genes = genes + mr * np.asarray(beta, dtype=float)
    return Genotype(np.clip(genes, 0.0, 1.0))


@dataclass
class EvolutionTrace:
    best_fitness: list = field(default_factory=list)
    mean_fitness: list = field(default_factory=list)
    eval_mae: list = field(default_factory=list)
    mutation_rate: list = field(default_factory=list)
    champions: list = field(default_factory=list)
    populations: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def generations(self) -> int:
        """Number of generations including the initial population."""
        return len(self.best_fitness)

    def summary(self) -> dict:
        return {
            "generations": self.generations,
            "best_fitness": [float(x) for x in self.best_fitness],
            "mean_fitness": [float(x) for x in self.mean_fitness],
            "eval_mae": [float(x) for x in self.eval_mae],
            "mutation_rate": [float(x) for x in self.mutation_rate],
        }


class _FitnessCache:
    def __init__(self, train, l_pr: int, config: GAConfig):
        self.train, self.l_pr, self.config = train, l_pr, config
        self._memo: dict = {}

    def __call__(self, g: Genotype) -> Genotype:
        g.params = decode(g, self.config, self.l_pr)
        key = tuple(g.params.as_dict().values())
        if key not in self._memo:
            self._memo[key] = evaluate_fitness(g.params, self.train, self.l_pr)
        g.fitness = self._memo[key]
        return g


def evaluation_mae(history, params: StringParams, eval_start: int) -> float:
    seg = forecast_segment(history, params, eval_start, len(history))
    if seg.targets.size == 0:
        return math.inf
    return metrics.mae(seg.actual, seg.forecast)


def evolve(train, eval, l_pr: int, config: GAConfig | None = None):
    """Run the GA and return ``(best_params, trace)``.

    ``eval`` must directly follow ``train`` in time; evaluation forecasts may
    use training samples as history. The returned parameters belong to the
    per-generation training champion with the lowest evaluation MAE.
    """
    config = config or GAConfig()
    t0 = time.perf_counter()
    train_v = np.asarray(getattr(train, "values", train), dtype=float)
    eval_v = np.asarray(getattr(eval, "values", eval), dtype=float)
    if eval_v.size == 0:
        raise DataError("evaluation segment is empty")
    config = config.feasible_for(l_pr, len(train_v))
    history = np.concatenate([train_v, eval_v])
    rng = np.random.default_rng(config.seed)
    fit = _FitnessCache(train_v, l_pr, config)
    eval_memo: dict = {}

    def champion_eval(g: Genotype) -> float:
        key = tuple(g.params.as_dict().values())
        if key not in eval_memo:
            eval_memo[key] = evaluation_mae(history, g.params, len(train_v))
        return eval_memo[key]

    trace = EvolutionTrace()
    mr = config.mutation_rate_initial
    decay = config.mutation_rate_initial / config.stop_no_progress

    def record(pop):
        fitness = np.array([g.fitness for g in pop])
        best = pop[int(np.argmin(fitness))]
        trace.best_fitness.append(float(best.fitness))
        trace.mean_fitness.append(float(np.mean(fitness)))
        trace.eval_mae.append(champion_eval(best))
        trace.mutation_rate.append(mr)
        trace.champions.append(best.params)
        trace.populations.append(np.array([g.genes for g in pop]))

    population = [fit(Genotype(genes)) for genes in rng.random((config.population_size, 4))]
    record(population)
    best_so_far = trace.best_fitness[-1]
    stall = 0

    while stall < config.stop_no_progress:
        if config.max_generations is not None and trace.generations >= config.max_generations:
            break
        offspring = []
        for _ in range(config.population_size):
            pa, pb = select_parents(population, config, rng)
            child = crossover(pa, pb, rng)
            child = mutate_and_repair(child, mr, config, rng)
            offspring.append(fit(child))

        # elites of the current generation replace the weakest offspring
        n_elite = config.n_elite
        elite_idx = np.argsort([g.fitness for g in population], kind="stable")[:n_elite]
        weak_idx = np.argsort([-g.fitness for g in offspring], kind="stable")[:n_elite]
        for e, w in zip(elite_idx, weak_idx):
            src = population[e]
            offspring[w] = Genotype(src.genes.copy(), src.params, src.fitness)
        population = offspring

        gen_best = min(g.fitness for g in population)
        if gen_best < best_so_far - IMPROVEMENT_TOL:
            best_so_far = gen_best
            stall = 0
        else:
            stall += 1
            mr -= decay
            if mr <= 1e-12:
                mr = config.mutation_rate_initial
        record(population)

    k = int(np.argmin(trace.eval_mae))
    trace.wall_time = time.perf_counter() - t0
    return trace.champions[k], trace
