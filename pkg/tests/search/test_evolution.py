import json
import math

import numpy as np

from src.config import GAParams
from src.numeric import NumericError
from src.search import Config, EvolutionarySearch, SearchSpace, evolve

SMALL = SearchSpace(ratio_choices=(0.1, 0.3, 0.5, 0.7), alpha_choices=(1.0, 2.0), n_slots=4)
TARGET = Config(ratios=(0.7, 0.1, 0.5, 0.3), alpha=2.0)
PARAMS = GAParams(population=16, generations=20, elite=2, tournament=3, mutation_rate=0.2)


def distance(config: Config) -> float:
    return sum(abs(a - b) for a, b in zip(config.ratios, TARGET.ratios)) + abs(config.alpha - TARGET.alpha)


def test_finds_planted_optimum():
    assert SMALL.size == 512
    found = sum(evolve(SMALL, distance, PARAMS, seed=seed).config == TARGET for seed in range(10))
    assert found >= 9


def test_constant_fitness_returns_a_member():
    best = evolve(SMALL, lambda c: 1.0, PARAMS, seed=3)
    assert best.fitness == 1.0
    assert SMALL.contains(best.config)


def test_best_so_far_never_increases():
    search = EvolutionarySearch(SMALL, distance, PARAMS, seed=4)
    search.run()
    assert len(search.generation_best) == PARAMS.generations + 1
    assert all(a >= b for a, b in zip(search.generation_best, search.generation_best[1:]))


def test_every_candidate_stays_in_the_space():
    search = EvolutionarySearch(SMALL, distance, PARAMS, seed=5)
    search.run()
    assert all(SMALL.contains(r.config) for r in search.records)


def test_same_seed_same_trajectory():
    a = EvolutionarySearch(SMALL, distance, PARAMS, seed=6)
    b = EvolutionarySearch(SMALL, distance, PARAMS, seed=6)
    assert a.run() == b.run()
    assert a.log_records() == b.log_records()


def test_evaluations_are_cached():
    calls = []

    def counting(config):
        calls.append(config.key())
        return distance(config)

    search = EvolutionarySearch(SMALL, counting, PARAMS, seed=7)
    search.run()
    assert len(calls) == len(set(calls)) == len(search.records)


def test_threaded_evaluation_matches_serial():
    serial = EvolutionarySearch(SMALL, distance, PARAMS, seed=8)
    threaded = EvolutionarySearch(SMALL, distance, PARAMS, seed=8, workers=4)
    assert serial.run() == threaded.run()
    assert serial.log_records() == threaded.log_records()


def test_failing_fitness_counts_as_infinite():
    def fragile(config):
        if config.alpha == 1.0:
            raise NumericError("exp overflow")
        if config.ratios[0] == 0.1:
            return float("nan")
        return distance(config)

    search = EvolutionarySearch(SMALL, fragile, PARAMS, seed=9)
    best = search.run()
    assert math.isfinite(best.fitness)
    assert best.config.alpha == 2.0 and best.config.ratios[0] != 0.1
    assert any(math.isinf(r.fitness) for r in search.records)


def test_zero_generations_scores_the_initial_population():
    search = EvolutionarySearch(SMALL, distance, GAParams(population=6, generations=0, elite=1, tournament=2), seed=1)
    best = search.run()
    assert len(search.generation_best) == 1
    assert best.fitness == min(r.fitness for r in search.records)


def test_write_log(tmp_path):
    search = EvolutionarySearch(SMALL, distance, PARAMS, seed=10)
    search.run()
    path = search.write_log(tmp_path / "search_log.jsonl")
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(lines) == len(search.records)
    assert set(lines[0]) == {"generation", "config", "fitness", "seed"}
    assert lines[0]["seed"] == 10
    assert len(lines[0]["config"]["ratios"]) == SMALL.n_slots
