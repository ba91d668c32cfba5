"""Elitist genetic search over the quantized configuration space."""
import contextvars
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.config import GAParams
from src.numeric import NumericError
from src.utils.helpers import write_jsonl
from src.utils.logger import get_logger

from .space import Config, FitnessRecord, SearchSpace, sample_config

logger = get_logger(__name__)

FitnessFn = Callable[[Config], float]


class EvolutionarySearch:
    """
    Genetic search: elites survive, the rest of each generation is bred by
    tournament selection, one-point crossover of the ratio vector and per-slot
    resampling mutation.

    Every evaluation is cached by configuration, so revisited points cost
    nothing and a deterministic fitness gives a deterministic trajectory.
    Uncached candidates of a generation may be scored concurrently.
    """

    def __init__(
        self,
        space: SearchSpace,
        fitness_fn: FitnessFn,
        params: Optional[GAParams] = None,
        seed: int = 0,
        workers: int = 1,
    ):
        self.space = space
        self.fitness_fn = fitness_fn
        self.params = params or GAParams()
        self.seed = seed
        self.workers = workers
        self.rng = np.random.default_rng(seed)
        self.records: List[FitnessRecord] = []
        self.generation_best: List[float] = []
        self._cache: Dict[Tuple[float, ...], float] = {}
        self._best: Optional[FitnessRecord] = None

    @property
    def best(self) -> Optional[FitnessRecord]:
        return self._best

    def _score(self, config: Config) -> float:
        try:
            value = float(self.fitness_fn(config))
        except NumericError as e:
            logger.warning(f"Fitness of {config.describe()} failed ({e}); assigning +inf")
            return math.inf
        if not math.isfinite(value):
            logger.warning(f"Fitness of {config.describe()} is {value}; assigning +inf")
            return math.inf
        return value

    def _evaluate(self, population: List[Config], generation: int) -> List[float]:
        pending: List[Config] = []
        for config in population:
            if config.key() not in self._cache and config.key() not in {c.key() for c in pending}:
                pending.append(config)

        if self.workers > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(contextvars.copy_context().run, self._score, c) for c in pending]
                scores = [f.result() for f in futures]
        else:
            scores = [self._score(c) for c in pending]

        for config, fitness in zip(pending, scores):
            self._cache[config.key()] = fitness
            record = FitnessRecord(config=config, fitness=fitness, seed=self.seed, generation=generation)
            self.records.append(record)
            if self._best is None or fitness < self._best.fitness:
                self._best = record
        return [self._cache[c.key()] for c in population]

    def _tournament(self, population: List[Config], fitness: List[float]) -> Config:
        size = min(self.params.tournament, len(population))
        contenders = self.rng.choice(len(population), size=size, replace=False)
        winner = min(contenders, key=lambda i: (fitness[i], i))
        return population[int(winner)]

    def _crossover(self, a: Config, b: Config) -> Config:
        n = self.space.n_slots
        if n > 1:
            point = int(self.rng.integers(1, n))
            ratios = a.ratios[:point] + b.ratios[point:]
        else:
            ratios = a.ratios
        alpha = a.alpha if self.rng.random() < 0.5 else b.alpha
        return Config(ratios=ratios, alpha=alpha)

    def _mutate(self, config: Config) -> Config:
        ratios = list(config.ratios)
        for i in range(len(ratios)):
            if self.rng.random() < self.params.mutation_rate:
                ratios[i] = self.space.ratio_choices[int(self.rng.integers(0, len(self.space.ratio_choices)))]
        alpha = config.alpha
        if self.rng.random() < self.params.mutation_rate:
            alpha = self.space.alpha_choices[int(self.rng.integers(0, len(self.space.alpha_choices)))]
        return Config(ratios=tuple(ratios), alpha=alpha)

    def run(self) -> FitnessRecord:
        population = [sample_config(self.space, self.rng) for _ in range(self.params.population)]
        fitness = self._evaluate(population, generation=0)
        self.generation_best.append(self._best.fitness)
        logger.info(f"Generation 0: best fitness {self._best.fitness:.4f} ({self._best.config.describe()})")

        for generation in range(1, self.params.generations + 1):
            order = sorted(range(len(population)), key=lambda i: (fitness[i], i))
            children = [population[i] for i in order[:self.params.elite]]
            while len(children) < self.params.population:
                parent_a = self._tournament(population, fitness)
                parent_b = self._tournament(population, fitness)
                children.append(self._mutate(self._crossover(parent_a, parent_b)))
            population = children
            fitness = self._evaluate(population, generation=generation)
            self.generation_best.append(self._best.fitness)
            logger.info(
                f"Generation {generation}: best fitness {self._best.fitness:.4f} "
                f"({self._best.config.describe()})"
            )
        return self._best

    def log_records(self) -> List[dict]:
        return [
            {
                "generation": r.generation,
                "config": {"ratios": list(r.config.ratios), "alpha": r.config.alpha},
                "fitness": r.fitness if math.isfinite(r.fitness) else None,
                "seed": r.seed,
            }
            for r in self.records
        ]

    def write_log(self, path: Path) -> Path:
        """One JSON line per evaluation."""
        return write_jsonl(path, self.log_records())


def evolve(
    space: SearchSpace,
    fitness_fn: FitnessFn,
    params: Optional[GAParams] = None,
    seed: int = 0,
    workers: int = 1,
) -> FitnessRecord:
    """Run an EvolutionarySearch and return the lowest-fitness record encountered."""
    return EvolutionarySearch(space, fitness_fn, params, seed=seed, workers=workers).run()
