"""Multiobjective problems built around the robust regulator.

A decision vector packs the uncertainty rows and the penalty exponent as
``z = [e_f..., e_g..., (log10 mu)^2]``.  Evaluating ``z`` designs the robust
gain on the nominal model, then simulates the closed loop on plants perturbed
along the hypothesized uncertainty direction for each contraction value in
``delta_samples``; the objectives are the per-state cumulative squared
regulation errors averaged over those plants.

Two concrete problems are provided: a small generic regulation problem
(5 variables, 3 objectives) and the truck lateral-control problem
(7 variables, 4 objectives).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numkernel import SingularMatrixError
from .rlqr import (
    NotPositiveError,
    UncertaintySpec,
    check_rank_condition,
    regulation_cost,
    rlqr_gain_steady,
)
from .vehicle import StateSpaceModel, VehicleParams, build_continuous, default_truck, discretize_zoh

PENALTY_OBJECTIVE = 1e10

# Decision vectors selected by the winner-histogram protocol in long reference
# optimizations of each problem; used as built-in tuned designs.
GENERIC_SELECTED_Z = np.array([19.933888, 19.999998, 20.000000, 16.339275, 20.000000])
APPLIED_SELECTED_Z = np.array(
    [4.45032, 57.84300, 21.90069, 455.67736, 48.05012, 44.98551, 280.28421]
)


class OutOfBoundsError(ValueError):
    """Decision vector violates the problem's box constraints."""


@dataclass
class Individual:
    """One population member: decision vector plus evaluation bookkeeping."""

    z: np.ndarray
    objectives: np.ndarray | None = None
    rank: int | None = None
    crowding: float | None = None


@dataclass(frozen=True)
class ProblemSpec:
    """Problem definition: bounds, nominal plant, weights and simulation setup."""

    name: str
    n_vars: int
    n_objectives: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    nominal_model: StateSpaceModel
    h: np.ndarray
    q: np.ndarray
    r: np.ndarray
    x0: np.ndarray
    horizon: int
    delta_samples: tuple[float, ...]
    objective_states: tuple[int, ...]
    decoder: Callable[[np.ndarray], UncertaintySpec] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lower_bounds", np.asarray(self.lower_bounds, float))
        object.__setattr__(self, "upper_bounds", np.asarray(self.upper_bounds, float))
        object.__setattr__(self, "x0", np.asarray(self.x0, float).reshape(-1))
        if not (self.lower_bounds < self.upper_bounds).all():
            raise ValueError("each lower bound must be below its upper bound")
        if not self.delta_samples:
            raise ValueError("delta_samples must be nonempty")
        if any(abs(d) > 1.0 for d in self.delta_samples):
            raise ValueError("delta samples must lie in [-1, 1]")
        if len(self.objective_states) != self.n_objectives:
            raise ValueError("objective_states must name one state per objective")


def decode_generic(z: np.ndarray) -> UncertaintySpec:
    """Decode a 5-vector in [0, 200]^5: three state rows, one input entry, mu."""
    z = np.asarray(z, float).reshape(-1)
    if z.shape != (5,):
        raise OutOfBoundsError(f"expected 5 variables, got {z.shape}")
    if (z < 0).any() or (z > 200).any():
        raise OutOfBoundsError("decision vector outside [0, 200]^5")
    return UncertaintySpec(
        h=np.ones((3, 1)),
        e_f=z[:3].reshape(1, 3),
        e_g=z[3:4].reshape(1, 1),
        mu=float(10.0 ** np.sqrt(z[4])),
    )


def decode_applied(z: np.ndarray) -> UncertaintySpec:
    """Decode a 7-vector in (0, 500]^7: four state rows, two input entries, mu."""
    z = np.asarray(z, float).reshape(-1)
    if z.shape != (7,):
        raise OutOfBoundsError(f"expected 7 variables, got {z.shape}")
    if (z <= 0).any() or (z > 500).any():
        raise OutOfBoundsError("decision vector outside (0, 500]^7")
    return UncertaintySpec(
        h=np.ones((4, 1)),
        e_f=z[:4].reshape(1, 4),
        e_g=z[4:6].reshape(1, 2),
        mu=float(10.0 ** np.sqrt(z[6])),
    )


def generic_problem(
    horizon: int = 300,
    delta_samples: tuple[float, ...] = (-1.0, 0.0, 1.0),
    x0=(1.0, 1.0, 1.0),
) -> ProblemSpec:
    """Three-state regulation test problem with a scalar input."""
    model = StateSpaceModel(
        f=np.array([[0.9, 0.8, 0.7], [0.01, 0.1, 0.3], [0.0, 0.25, 0.1]]),
        g=np.array([[0.6], [0.1], [0.25]]),
        dt=1.0,
        state_labels=("x1", "x2", "x3"),
    )
    return ProblemSpec(
        name="generic",
        n_vars=5,
        n_objectives=3,
        lower_bounds=np.zeros(5),
        upper_bounds=np.full(5, 200.0),
        nominal_model=model,
        h=np.ones((3, 1)),
        q=np.eye(3),
        r=np.eye(1),
        x0=x0,
        horizon=horizon,
        delta_samples=tuple(delta_samples),
        objective_states=(0, 1, 2),
        decoder=decode_generic,
    )


def generic_nominal_uncertainty(mu: float = 1e9) -> UncertaintySpec:
    """Hand-specified baseline uncertainty for the generic problem."""
    return UncertaintySpec(
        h=np.ones((3, 1)),
        e_f=np.array([[0.1, 0.2, 0.2]]),
        e_g=np.array([[0.1]]),
        mu=mu,
    )


def applied_problem(
    params: VehicleParams | None = None,
    dt: float = 0.1,
    horizon: int = 600,
    delta_samples: tuple[float, ...] = (-1.0, 0.0, 1.0),
    x0=(0.0, 0.0, 1.0, 0.0),
) -> ProblemSpec:
    """Truck lateral-control problem on the tracking model (two inputs).

    Objectives, in order: lateral displacement, yaw rate, lateral velocity and
    heading error (cumulative squared, averaged over the contraction samples).
    """
    params = params or default_truck()
    model = discretize_zoh(build_continuous(params, curvature_input=True), dt)
    return ProblemSpec(
        name="applied",
        n_vars=7,
        n_objectives=4,
        lower_bounds=np.full(7, 1e-9),
        upper_bounds=np.full(7, 500.0),
        nominal_model=model,
        h=np.ones((4, 1)),
        q=np.eye(4),
        r=np.eye(2),
        x0=x0,
        horizon=horizon,
        delta_samples=tuple(delta_samples),
        objective_states=(2, 1, 0, 3),
        decoder=decode_applied,
    )


def sample_delta(rng: np.random.Generator) -> float:
    """One contraction draw, uniform in [-1, 1]."""
    return float(rng.uniform(-1.0, 1.0))


def perturbed_closed_loop(
    model: StateSpaceModel, unc: UncertaintySpec, k: np.ndarray, delta: float
) -> np.ndarray:
    """Closed-loop matrix of the plant perturbed by a scalar contraction."""
    df = delta * (unc.h @ unc.e_f)
    dg = delta * (unc.h @ unc.e_g)
    return (model.f + df) + (model.g + dg) @ k


def evaluate(problem: ProblemSpec, z: np.ndarray) -> np.ndarray:
    """Objective vector for one decision vector.

    Designs the robust gain for the decoded uncertainty, then averages the
    per-state cumulative squared errors over the perturbed plants.  Any
    failure (rank condition, gain non-convergence, singular step, divergence)
    yields the finite penalty vector instead of raising.
    """
    penalty = np.full(problem.n_objectives, PENALTY_OBJECTIVE)
    unc = problem.decoder(z)
    if not check_rank_condition(unc):
        return penalty
    try:
        gain = rlqr_gain_steady(problem.nominal_model, unc, problem.q, problem.r)
    except (SingularMatrixError, NotPositiveError):
        return penalty
    if not gain.converged:
        return penalty
    acc = np.zeros(problem.nominal_model.n_states)
    for delta in problem.delta_samples:
        m_cl = perturbed_closed_loop(problem.nominal_model, unc, gain.k, delta)
        sse = regulation_cost(m_cl, problem.x0, problem.horizon)
        if not np.isfinite(sse).all() or sse.max() > 1e24:
            return penalty
        acc += sse
    acc /= len(problem.delta_samples)
    return acc[list(problem.objective_states)]
