"""NSGA-II engine: nondominated sorting, crowding, variation and the run loop.

The engine is dominance-based with an elitist merge of parents and offspring.
Exact decision-vector duplicates are removed before environmental selection
(clones carry no information and would distort crowding); the removed clones
are re-admitted only if the pool would otherwise underfill the population.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .mop import Individual, ProblemSpec, evaluate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 92
    p_c: float = 1.0
    p_m: float = 0.5
    eta_c: float = 20.0
    eta_m: float = 20.0
    max_evaluations: int = 10000
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p_c <= 1.0 and 0.0 <= self.p_m <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.population_size <= 0 or self.max_evaluations <= 0:
            raise ValueError("sizes must be positive")


@dataclass(frozen=True)
class RankedFronts:
    """Population partition into nondominated fronts with crowding values."""

    fronts: list[list[int]]
    rank: np.ndarray
    crowding: np.ndarray


@dataclass
class HistoryEntry:
    generation: int
    evaluations: int
    front_z: np.ndarray
    front_objectives: np.ndarray


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Pareto dominance for minimization: no worse everywhere, better somewhere."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return bool((a <= b).all() and (a < b).any())


def _dominance_matrix(objs: np.ndarray) -> np.ndarray:
    less_eq = (objs[:, None, :] <= objs[None, :, :]).all(axis=-1)
    strictly = (objs[:, None, :] < objs[None, :, :]).any(axis=-1)
    return less_eq & strictly


def fast_nondominated_sort(objectives) -> RankedFronts:
    """Partition objective vectors into Pareto fronts (Deb's bookkeeping scheme)."""
    objs = np.asarray(objectives, float)
    if objs.ndim != 2:
        raise ValueError("objectives must be a 2-D array")
    n = objs.shape[0]
    dom = _dominance_matrix(objs)
    n_dominators = dom.sum(axis=0).astype(np.int64)
    rank = np.full(n, -1, dtype=np.int64)
    crowding = np.zeros(n)
    fronts: list[list[int]] = []
    level = 0
    current = np.flatnonzero(n_dominators == 0)
    while current.size:
        rank[current] = level
        fronts.append(current.tolist())
        n_dominators[current] = -1
        n_dominators -= dom[current].sum(axis=0)
        current = np.flatnonzero(n_dominators == 0)
        level += 1
    for front in fronts:
        crowding[front] = crowding_distance(objs[front])
    return RankedFronts(fronts=fronts, rank=rank, crowding=crowding)


def crowding_distance(front_objectives) -> np.ndarray:
    """Crowding of each front member: boundary points infinite, interior ones
    the per-objective normalized cuboid sum; zero-range objectives are skipped."""
    objs = np.asarray(front_objectives, float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("front must be a nonempty 2-D array")
    n = objs.shape[0]
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for j in range(objs.shape[1]):
        order = np.argsort(objs[:, j], kind="stable")
        vals = objs[order, j]
        span = vals[-1] - vals[0]
        if span <= 0.0:
            continue
        dist[order[0]] = dist[order[-1]] = np.inf
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def sbx_crossover(p1, p2, p_c, eta_c, bounds, rng) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover; with probability ``1 - p_c`` returns copies."""
    lower, upper = bounds
    c1 = np.array(p1, dtype=float)
    c2 = np.array(p2, dtype=float)
    if rng.random() > p_c:
        return c1, c2
    exponent = 1.0 / (eta_c + 1.0)
    for w in range(c1.shape[0]):
        if rng.random() > 0.5:
            continue
        x1, x2 = c1[w], c2[w]
        if abs(x1 - x2) < 1e-14:
            continue
        u = rng.random()
        beta = (2.0 * u) ** exponent if u <= 0.5 else (0.5 / (1.0 - u)) ** exponent
        a = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
        b = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
        if rng.random() < 0.5:
            a, b = b, a
        c1[w], c2[w] = a, b
    return np.clip(c1, lower, upper), np.clip(c2, lower, upper)


def polynomial_mutation(z, p_m, eta_m, bounds, rng) -> np.ndarray:
    """Bounded polynomial mutation: ``p_m`` gates the individual, then each
    variable mutates with probability ``1/n``."""
    lower, upper = bounds
    out = np.array(z, dtype=float)
    if rng.random() > p_m:
        return out
    n = out.shape[0]
    exponent = 1.0 / (eta_m + 1.0)
    for w in range(n):
        if rng.random() > 1.0 / n:
            continue
        lo, hi = lower[w], upper[w]
        span = hi - lo
        if span <= 0.0:
            continue
        x = out[w]
        u = rng.random()
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - (x - lo) / span) ** (eta_m + 1.0)
            delta = val**exponent - 1.0
        else:
            val = 2.0 * (1.0 - u) + (2.0 * u - 1.0) * (1.0 - (hi - x) / span) ** (eta_m + 1.0)
            delta = 1.0 - val**exponent
        out[w] = min(max(x + delta * span, lo), hi)
    return out


def _tournament(pop: list[Individual], i: int, j: int, rng) -> int:
    a, b = pop[i], pop[j]
    if a.rank != b.rank:
        return i if a.rank < b.rank else j
    if a.crowding != b.crowding:
        return i if a.crowding > b.crowding else j
    return i if rng.random() < 0.5 else j


def environmental_selection(
    zs: np.ndarray, objs: np.ndarray, n_keep: int, dedupe: bool = True
) -> list[int]:
    """Indices of the survivors: fill front-by-front, truncate the last front
    by descending crowding (ties resolved by pool order)."""
    if dedupe:
        seen: dict[bytes, int] = {}
        pool: list[int] = []
        clones: list[int] = []
        for i in range(zs.shape[0]):
            key = zs[i].tobytes()
            if key in seen:
                clones.append(i)
            else:
                seen[key] = i
                pool.append(i)
        if len(pool) < n_keep:
            pool = sorted(pool + clones[: n_keep - len(pool)])
    else:
        pool = list(range(zs.shape[0]))
    if len(pool) < n_keep:
        raise ValueError(f"pool of {len(pool)} cannot fill {n_keep} slots")
    ranked = fast_nondominated_sort(objs[pool])
    chosen: list[int] = []
    for front in ranked.fronts:
        if len(chosen) + len(front) <= n_keep:
            chosen.extend(front)
        else:
            room = n_keep - len(chosen)
            crowd = ranked.crowding[front]
            order = sorted(range(len(front)), key=lambda t: (-crowd[t], t))
            chosen.extend(front[t] for t in order[:room])
            break
    return [pool[t] for t in chosen]


def rank_population(pop: list[Individual]) -> RankedFronts:
    """Recompute and store rank/crowding for an evaluated population."""
    ranked = fast_nondominated_sort(np.array([ind.objectives for ind in pop]))
    for i, ind in enumerate(pop):
        ind.rank = int(ranked.rank[i])
        ind.crowding = float(ranked.crowding[i])
    return ranked


def nsga2_generation(
    pop: list[Individual],
    problem: ProblemSpec,
    config: EvolutionConfig,
    rng: np.random.Generator,
    evaluator=None,
) -> tuple[list[Individual], RankedFronts]:
    """One elitist generation: tournament -> SBX -> mutation -> merge -> select."""
    evaluator = evaluator or (lambda z: evaluate(problem, z))
    n = len(pop)
    bounds = (problem.lower_bounds, problem.upper_bounds)
    offspring_z: list[np.ndarray] = []
    while len(offspring_z) < n:
        i1 = _tournament(pop, int(rng.integers(n)), int(rng.integers(n)), rng)
        i2 = _tournament(pop, int(rng.integers(n)), int(rng.integers(n)), rng)
        c1, c2 = sbx_crossover(pop[i1].z, pop[i2].z, config.p_c, config.eta_c, bounds, rng)
        offspring_z.append(polynomial_mutation(c1, config.p_m, config.eta_m, bounds, rng))
        if len(offspring_z) < n:
            offspring_z.append(polynomial_mutation(c2, config.p_m, config.eta_m, bounds, rng))
    merged_z = np.vstack([np.array([ind.z for ind in pop]), np.array(offspring_z)])
    merged_f = np.vstack(
        [
            np.array([ind.objectives for ind in pop]),
            np.array([evaluator(z) for z in offspring_z]),
        ]
    )
    survivors = environmental_selection(merged_z, merged_f, n, dedupe=True)
    next_pop = [Individual(z=merged_z[i].copy(), objectives=merged_f[i].copy()) for i in survivors]
    ranked = rank_population(next_pop)
    return next_pop, ranked


class _CountingEvaluator:
    """Evaluation callable that tracks the budget."""

    def __init__(self, problem: ProblemSpec):
        self.problem = problem
        self.count = 0

    def __call__(self, z: np.ndarray) -> np.ndarray:
        self.count += 1
        return evaluate(self.problem, z)


def run(
    problem: ProblemSpec,
    config: EvolutionConfig,
    molsp_config=None,
) -> tuple[list[Individual], list[HistoryEntry]]:
    """Full optimization run; returns the final population and the history.

    ``molsp_config`` (a :class:`evolqr.molsp.MolspConfig`) activates the local
    search hook after each generation.  Local-search evaluations count against
    ``max_evaluations``; a phase only starts while the budget is not yet
    exhausted, so the total evaluation count stays below
    ``max_evaluations + population_size``.
    """
    from . import molsp as molsp_mod

    rng = np.random.default_rng(config.seed)
    counter = _CountingEvaluator(problem)
    n = config.population_size
    z0 = rng.uniform(problem.lower_bounds, problem.upper_bounds, size=(n, problem.n_vars))
    pop = [Individual(z=z0[i].copy()) for i in range(n)]
    for ind in pop:
        ind.objectives = counter(ind.z)
    ranked = rank_population(pop)
    history = [_snapshot(0, counter.count, pop, ranked)]

    generation = 0
    while counter.count < config.max_evaluations:
        generation += 1
        pop, ranked = nsga2_generation(pop, problem, config, rng, counter)
        if (
            molsp_config is not None
            and molsp_config.enabled
            and counter.count < config.max_evaluations
            and molsp_mod.scheduled(molsp_config, counter.count, config)
        ):
            pop = molsp_mod.molsp_step(pop, ranked, problem, molsp_config, rng, counter)
            ranked = rank_population(pop)
        history.append(_snapshot(generation, counter.count, pop, ranked))
    return pop, history


def _snapshot(generation, evaluations, pop, ranked) -> HistoryEntry:
    front = ranked.fronts[0]
    return HistoryEntry(
        generation=generation,
        evaluations=evaluations,
        front_z=np.array([pop[i].z for i in front]),
        front_objectives=np.array([pop[i].objectives for i in front]),
    )
