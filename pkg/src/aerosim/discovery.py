"""Evolutionary tuning of the stern-conversion tactical parameters.

A genome is the :class:`SternConversionParams` vector in field order, each
gene bounded by :data:`GENE_BOUNDS`. Fitness is the mean over a fixed list of
seeded (randomized-start) episodes of either the S2 score (dense) or the
Shaw hold success rate (sparse).

The GA is generational: tournament selection, uniform crossover, per-gene
Gaussian mutation clamped to the bounds and elitism. The baseline genome is
always seeded into the initial population.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .agents import FsmSternAgent, SternConversionParams
from .config import FsmSternSpec, ScenarioConfig, SternParamsModel
from .engine import SimulationError, run_episode

log = logging.getLogger(__name__)

GENE_NAMES = SternConversionParams.names()

GENE_BOUNDS: dict[str, tuple[float, float]] = {
    "r_conversion": (2000.0, 8000.0),
    "d_offset": (250.0, 4000.0),
    "r_turn_in": (500.0, 4000.0),
    "r_station": (200.0, 1000.0),
    "v_match_tol": (5.0, 40.0),
    "capture_aa": (math.radians(10.0), math.radians(90.0)),
    "capture_ata": (math.radians(5.0), math.radians(45.0)),
}

Fitness = Literal["mean_s2", "shaw_success_rate"]


class NotEvolvableError(ValueError):
    """The scenario has no FSM stern-conversion agent to tune."""


@dataclass
class GaConfig:
    population_size: int = 32
    generations: int = 50
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_sigma_fraction: float = 0.1
    elitism_count: int = 1
    episodes_per_eval: int = 5
    eval_seeds: list[int] | None = None
    fitness: Fitness = "mean_s2"

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if self.generations < 0 or self.tournament_size < 1 or self.episodes_per_eval < 1:
            raise ValueError("generations >= 0, tournament_size >= 1, episodes_per_eval >= 1")
        if not 0.0 <= self.crossover_rate <= 1.0 or self.mutation_sigma_fraction < 0.0:
            raise ValueError("crossover_rate in [0, 1], mutation_sigma_fraction >= 0")
        if self.fitness not in ("mean_s2", "shaw_success_rate"):
            raise ValueError(f"unknown fitness {self.fitness!r}")
        if self.eval_seeds is not None and len(self.eval_seeds) < self.episodes_per_eval:
            raise ValueError("need at least episodes_per_eval eval_seeds")

    def seeds(self) -> list[int]:
        base = self.eval_seeds if self.eval_seeds is not None else range(self.episodes_per_eval)
        return [int(s) for s in list(base)[: self.episodes_per_eval]]


def _bounds() -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([GENE_BOUNDS[n][0] for n in GENE_NAMES])
    hi = np.array([GENE_BOUNDS[n][1] for n in GENE_NAMES])
    return lo, hi


def encode(params: SternConversionParams) -> np.ndarray:
    return np.array([getattr(params, n) for n in GENE_NAMES], dtype=float)


def decode(genome: Sequence[float]) -> SternConversionParams:
    """Genome to parameters; raises ``ValueError`` for out-of-bounds or inconsistent genes."""
    g = np.asarray(genome, dtype=float)
    lo, hi = _bounds()
    if g.shape != lo.shape or not np.all((g >= lo) & (g <= hi)):
        raise ValueError("genome outside bounds")
    return SternConversionParams(**{n: float(v) for n, v in zip(GENE_NAMES, g)})


def evolvable_entity(scenario: ScenarioConfig) -> str:
    """Id of the scored blue entity, which must fly the FSM stern agent."""
    pair = scenario.scoring_pair()
    if pair is None:
        raise NotEvolvableError("scenario has no scored pair")
    spec = scenario.entity(pair[0])
    if not isinstance(spec.agent, FsmSternSpec):
        raise NotEvolvableError(f"entity {pair[0]!r} uses agent {spec.agent.type!r}; only fsm_stern is evolvable")
    return pair[0]


def baseline_genome(scenario: ScenarioConfig) -> np.ndarray:
    spec = scenario.entity(evolvable_entity(scenario)).agent
    return encode(spec.params.to_params())


def evaluate_fitness(genome: Sequence[float], scenario: ScenarioConfig, ga: GaConfig) -> float:
    """Mean episode fitness of ``genome`` over the GA's evaluation seeds; 0 for invalid genomes."""
    try:
        params = decode(genome)
    except ValueError as e:
        log.debug("genome rejected: %s", e)
        return 0.0
    eid = evolvable_entity(scenario)
    spec = scenario.entity(eid).agent
    values = []
    for seed in ga.seeds():
        agent = FsmSternAgent(params, spec.settings.to_settings())
        try:
            res = run_episode(scenario, seed, agents={eid: agent}, record=False)
        except SimulationError as e:
            log.warning("evaluation failed (seed %d): %s", seed, e)
            return 0.0
        s = res.summary.score
        values.append(s.mean_s2 if ga.fitness == "mean_s2" else float(s.shaw_hold_success))
    return math.fsum(values) / len(values)


def _eval_job(args: tuple[tuple[float, ...], ScenarioConfig, GaConfig]) -> float:
    genome, scenario, ga = args
    return evaluate_fitness(genome, scenario, ga)


@dataclass
class GenerationStats:
    generation: int
    best: float
    mean: float


@dataclass
class EvolutionResult:
    best_genome: np.ndarray
    best_fitness: float
    history: list[GenerationStats]
    population: np.ndarray
    fitness: np.ndarray
    evaluations: int = 0
    entity_id: str = ""

    @property
    def best_params(self) -> SternConversionParams:
        return decode(self.best_genome)

    def history_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["generation", "best", "mean"])
        for h in self.history:
            w.writerow([h.generation, repr(h.best), repr(h.mean)])
        return buf.getvalue()

    def genome_fragment(self) -> dict:
        """Scenario fragment that installs the best parameters (see ``config.merge_fragment``)."""
        params = SternParamsModel.from_params(self.best_params).model_dump()
        return {"entities": [{"id": self.entity_id, "agent": {"type": "fsm_stern", "params": params}}]}


class _Evaluator:
    """Memoizing, order-preserving fitness evaluation of a batch of genomes."""

    def __init__(self, scenario: ScenarioConfig, ga: GaConfig, workers: int):
        self.scenario = scenario
        self.ga = ga
        self.workers = workers
        self.cache: dict[tuple[float, ...], float] = {}
        self.count = 0

    def __call__(self, pop: np.ndarray) -> np.ndarray:
        keys = [tuple(float(v) for v in g) for g in pop]
        todo = list(dict.fromkeys(k for k in keys if k not in self.cache))
        if todo:
            if self.workers > 1 and len(todo) > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    vals = list(pool.map(_eval_job, [(k, self.scenario, self.ga) for k in todo]))
            else:
                vals = [evaluate_fitness(k, self.scenario, self.ga) for k in todo]
            self.cache.update(zip(todo, vals))
            self.count += len(todo)
        return np.array([self.cache[k] for k in keys])


def _tournament(rng: np.random.Generator, fit: np.ndarray, size: int) -> int:
    picks = rng.integers(0, len(fit), size=size)
    # first pick wins ties
    return int(picks[int(np.argmax(fit[picks]))])


def evolve(
    scenario: ScenarioConfig,
    ga: GaConfig = GaConfig(),
    master_seed: int = 0,
    *,
    workers: int = 1,
    on_generation=None,
) -> EvolutionResult:
    """Generational GA over the blue agent's stern-conversion parameters.

    ``history[g]`` holds the best-so-far and population-mean fitness after
    generation ``g`` (0 is the initial population). ``on_generation`` is
    called with each :class:`GenerationStats` as it is produced.
    """
    eid = evolvable_entity(scenario)
    rng = np.random.default_rng(master_seed)
    lo, hi = _bounds()
    span = hi - lo
    n = ga.population_size

    baseline = baseline_genome(scenario)
    pop = np.empty((n, len(GENE_NAMES)))
    pop[0] = np.clip(baseline, lo, hi)
    pop[1:] = lo + rng.random((n - 1, len(GENE_NAMES))) * span

    evaluate = _Evaluator(scenario, ga, workers)
    fit = evaluate(pop)
    best_i = int(np.argmax(fit))
    best_genome, best_fit = pop[best_i].copy(), float(fit[best_i])
    history = [GenerationStats(0, best_fit, float(np.mean(fit)))]
    if on_generation:
        on_generation(history[-1])

    sigma = ga.mutation_sigma_fraction * span
    for gen in range(1, ga.generations + 1):
        order = np.argsort(-fit, kind="stable")
        children = [pop[i].copy() for i in order[: ga.elitism_count]]
        while len(children) < n:
            a = pop[_tournament(rng, fit, ga.tournament_size)]
            b = pop[_tournament(rng, fit, ga.tournament_size)]
            if rng.random() < ga.crossover_rate:
                child = np.where(rng.random(len(a)) < 0.5, a, b)
            else:
                child = a.copy()
            if ga.mutation_sigma_fraction > 0.0:
                child = np.clip(child + rng.normal(0.0, 1.0, len(child)) * sigma, lo, hi)
            children.append(child)
        pop = np.array(children)
        fit = evaluate(pop)
        i = int(np.argmax(fit))
        if fit[i] > best_fit:
            best_genome, best_fit = pop[i].copy(), float(fit[i])
        history.append(GenerationStats(gen, best_fit, float(np.mean(fit))))
        if on_generation:
            on_generation(history[-1])

    return EvolutionResult(best_genome, best_fit, history, pop, fit, evaluate.count, eid)
