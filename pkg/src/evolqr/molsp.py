"""Local search hook driven by the two best fronts.

After a host-MOEA generation, the members of the first two fronts become
local-search candidates.  The candidate whose objective vector spans the
largest box against a fixed user reference vector leads the search; the
difference vectors between the leader and the other candidates delimit the
search directions.  Mutants are produced in two stages (around the leader,
then along each direction), repaired into the box, evaluated, and merged back
through the host's rank/crowding selection, overwriting the candidate slots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .moea import RankedFronts, environmental_selection, rank_population
from .mop import Individual, ProblemSpec, evaluate

log = logging.getLogger(__name__)


class NoEligibleLeaderError(RuntimeError):
    """No candidate Pareto-dominates the reference vector."""


@dataclass(frozen=True)
class MolspConfig:
    """Hook settings: reference vector, activation and draw granularity.

    ``schedule`` is ``"every"`` (after each generation) or ``"tail"`` (only
    once the remaining budget drops below two populations' worth of
    evaluations).  ``per_component_draws=False`` reverts to one shared random
    pair per mutant instead of independent draws per component.
    """

    reference_point: np.ndarray
    enabled: bool = True
    per_component_draws: bool = True
    schedule: str = "every"

    def __post_init__(self):
        object.__setattr__(
            self, "reference_point", np.asarray(self.reference_point, float).reshape(-1)
        )
        if self.schedule not in ("every", "tail"):
            raise ValueError("schedule must be 'every' or 'tail'")


def scheduled(config: MolspConfig, evaluations: int, evo_config) -> bool:
    """Whether the hook should fire at the current budget position."""
    if config.schedule == "every":
        return True
    return evaluations >= evo_config.max_evaluations - 2 * evo_config.population_size


def gather_candidates(fronts: RankedFronts, pop: list[Individual]) -> list[int]:
    """Population indices of the first two fronts, order preserved."""
    if not fronts.fronts or not fronts.fronts[0]:
        raise ValueError("population has no ranked front")
    candidates = list(fronts.fronts[0])
    if len(fronts.fronts) > 1:
        candidates.extend(fronts.fronts[1])
    return candidates


def _leader_position(y_hat: np.ndarray, r: np.ndarray) -> int:
    """Position of the candidate with the largest dominated box against ``r``.

    Eligibility requires Pareto-dominating ``r``; the box score is the
    product of the per-objective gaps.  First index wins ties.
    """
    eligible = (y_hat <= r).all(axis=1) & (y_hat < r).any(axis=1)
    if not eligible.any():
        raise NoEligibleLeaderError(
            "no candidate dominates the reference vector; local search skipped"
        )
    scores = np.where(eligible, np.prod(np.maximum(r - y_hat, 0.0), axis=1), -np.inf)
    return int(np.argmax(scores))


def select_leader(
    y_hat: np.ndarray, z_hat: np.ndarray, r: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Split the candidate decision vectors into the leader and the rest."""
    pos = _leader_position(np.asarray(y_hat, float), np.asarray(r, float))
    z_hat = np.asarray(z_hat, float)
    return z_hat[pos].copy(), np.delete(z_hat, pos, axis=0)


def lambda_directions(d_hat: np.ndarray, z_rest: np.ndarray) -> np.ndarray:
    """Componentwise differences leader-minus-candidate; exact zeros become 1
    to preserve search initiative along flat components."""
    lam = np.asarray(d_hat, float) - np.asarray(z_rest, float).reshape(len(z_rest), -1)
    lam[lam == 0.0] = 1.0
    return lam


def local_mutants(
    d_hat: np.ndarray,
    z_rest: np.ndarray,
    lambdas: np.ndarray,
    bounds,
    rng: np.random.Generator,
    per_component_draws: bool = True,
) -> np.ndarray:
    """Two-stage mutants: one around the leader, one along each direction.

    Each component moves by ``base * kappa * (-1)**phi`` with ``kappa`` uniform
    in [0, 1] and ``phi`` in {1, 2}; the base is the leader component itself in
    stage one and the direction component in stage two.  Results are repaired
    into the box.
    """
    n = d_hat.shape[0]

    def draw() -> np.ndarray:
        if per_component_draws:
            kappa = rng.random(n)
            phi = rng.integers(1, 3, n)
        else:
            kappa = np.full(n, rng.random())
            phi = np.full(n, rng.integers(1, 3))
        return kappa * (-1.0) ** phi

    mutants = [repair_bounds(d_hat + d_hat * draw(), bounds, rng)]
    for h in range(len(z_rest)):
        mutants.append(repair_bounds(z_rest[h] + lambdas[h] * draw(), bounds, rng))
    return np.array(mutants)


def repair_bounds(x: np.ndarray, bounds, rng: np.random.Generator) -> np.ndarray:
    """Redraw out-of-box components: below-lower lands uniformly in the lowest
    quarter of the range, above-upper in the highest quarter."""
    lower, upper = bounds
    out = np.array(x, dtype=float)
    span = upper - lower
    for w in range(out.shape[0]):
        if out[w] < lower[w]:
            out[w] = lower[w] + 0.25 * span[w] * rng.random()
        elif out[w] > upper[w]:
            out[w] = lower[w] + 0.75 * span[w] + 0.25 * span[w] * rng.random()
    return out


def molsp_step(
    pop: list[Individual],
    fronts: RankedFronts,
    problem: ProblemSpec,
    config: MolspConfig,
    rng: np.random.Generator,
    evaluator=None,
) -> list[Individual]:
    """One local-search pass; returns the population with the candidate slots
    overwritten by the best of {leader, candidates, mutants}.

    A missing eligible leader makes the step a logged no-op.
    """
    evaluator = evaluator or (lambda z: evaluate(problem, z))
    slots = gather_candidates(fronts, pop)
    y_hat = np.array([pop[i].objectives for i in slots])
    z_hat = np.array([pop[i].z for i in slots])
    try:
        lead = _leader_position(y_hat, config.reference_point)
    except NoEligibleLeaderError as exc:
        log.info("%s", exc)
        return pop
    d_hat = z_hat[lead]
    d_obj = y_hat[lead]
    z_rest = np.delete(z_hat, lead, axis=0)
    y_rest = np.delete(y_hat, lead, axis=0)
    lambdas = lambda_directions(d_hat, z_rest) if len(z_rest) else np.empty((0, d_hat.shape[0]))
    bounds = (problem.lower_bounds, problem.upper_bounds)
    mutants = local_mutants(d_hat, z_rest, lambdas, bounds, rng, config.per_component_draws)
    mutant_objs = np.array([evaluator(m) for m in mutants])

    pool_z = np.vstack([d_hat[None, :], z_rest, mutants])
    pool_f = np.vstack([d_obj[None, :], y_rest, mutant_objs])
    keep = environmental_selection(pool_z, pool_f, len(slots), dedupe=False)
    next_pop = list(pop)
    for slot, pick in zip(slots, keep):
        next_pop[slot] = Individual(z=pool_z[pick].copy(), objectives=pool_f[pick].copy())
    rank_population(next_pop)
    return next_pop
