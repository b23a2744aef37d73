"""Linear single-track lateral model of a non-articulated truck.

State order is ``[y_dot, psi_dot, rho, theta]``: lateral velocity (m/s), yaw
rate (rad/s), lateral displacement from the path (m) and heading error (rad).
A continuous model is built from the physical parameters, discretized exactly
under a zero-order hold, and perturbed into payload variants.  The structured
uncertainty description used by the robust regulator is produced from the
span between the unloaded and overloaded discrete models.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numkernel import as_matrix, mat_exp

STATE_LABELS = ("y_dot", "psi_dot", "rho", "theta")


class InvalidParamsError(ValueError):
    """A vehicle parameter is outside its physical domain."""


@dataclass(frozen=True)
class VehicleParams:
    """Physical parameters of the single-track model.

    a, b: distances from front/rear axle to the center of gravity (m)
    l: wheelbase (m)
    v: forward speed (m/s)
    m: total mass (kg); payload: nominal payload mass (kg)
    j: yaw moment of inertia (kg m^2)
    c1, c2: front/rear cornering stiffness (N/rad)
    """

    a: float
    b: float
    l: float
    v: float
    m: float
    payload: float
    j: float
    c1: float
    c2: float

    def __post_init__(self):
        for name in ("a", "b", "l", "v", "m", "payload", "j", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise InvalidParamsError(f"{name} must be strictly positive")


def default_truck() -> VehicleParams:
    """Parameter set for a 16-tonne non-articulated truck at 60 km/h."""
    return VehicleParams(
        a=3.1870,
        b=1.6180,
        l=4.8050,
        v=16.6667,
        m=16030.0,
        payload=12550.0,
        j=2.1572e5,
        c1=1.0645e5,
        c2=5.4042e5,
    )


@dataclass(frozen=True)
class StateSpaceModel:
    """Linear state-space model ``x' = F x + G u`` (``dt == 0`` means continuous)."""

    f: np.ndarray
    g: np.ndarray
    dt: float
    state_labels: tuple[str, ...] = STATE_LABELS

    def __post_init__(self):
        object.__setattr__(self, "f", as_matrix(self.f, "f"))
        object.__setattr__(self, "g", as_matrix(self.g, "g"))
        if self.f.shape[0] != self.f.shape[1]:
            raise ValueError("f must be square")
        if self.g.shape[0] != self.f.shape[0]:
            raise ValueError("g row count must match f")
        if self.dt < 0:
            raise ValueError("dt must be >= 0")

    @property
    def n_states(self) -> int:
        return self.f.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.g.shape[1]

    @property
    def is_continuous(self) -> bool:
        return self.dt == 0.0


def build_continuous(p: VehicleParams, curvature_input: bool = False) -> StateSpaceModel:
    """Continuous lateral model with steering input, mass matrix already absorbed.

    With ``curvature_input=True`` a second input column is appended carrying
    the reference path-curvature feedforward into the heading-error kinematics
    (``theta_dot = psi_dot - v * kappa_ref``), giving a 4x2 input matrix.
    """
    a, b, v, m, j, c1, c2 = p.a, p.b, p.v, p.m, p.j, p.c1, p.c2
    f = np.array(
        [
            [(-c1 - c2) / (m * v), (b * c1 - a * c1 - m * v**2) / (m * v), 0.0, 0.0],
            [(b * c2 - a * c1) / (j * v), (-(a**2) * c1 - b**2 * c1) / (j * v), 0.0, 0.0],
            [1.0, 0.0, 0.0, v],
            [0.0, 1.0, 0.0, 0.0],
        ]
    )
    g = np.array([[c1 / m], [a * c1 / j], [0.0], [0.0]])
    if curvature_input:
        g = np.hstack([g, np.array([[0.0], [0.0], [0.0], [-v]])])
    return StateSpaceModel(f=f, g=g, dt=0.0)


def discretize_zoh(model: StateSpaceModel, dt: float) -> StateSpaceModel:
    """Exact zero-order-hold discretization via the augmented exponential.

    ``exp([[A, B], [0, 0]] dt)`` holds the discrete ``F`` in its top-left
    block and ``G`` in its top-right block.
    """
    if not model.is_continuous:
        raise ValueError("model is already discrete")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n, m = model.n_states, model.n_inputs
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = model.f
    aug[:n, n:] = model.g
    phi = mat_exp(aug * dt)
    return StateSpaceModel(f=phi[:n, :n], g=phi[:n, n:], dt=dt, state_labels=model.state_labels)


def payload_variant(
    p: VehicleParams, overload_fraction: float, scale_inertia: bool = True
) -> VehicleParams:
    """Parameters with the payload scaled by ``overload_fraction``.

    ``m' = m + overload_fraction * payload``; -1 means fully unloaded.  The yaw
    inertia scales with total mass by default (constant radius of gyration);
    pass ``scale_inertia=False`` to hold it fixed.
    """
    if overload_fraction < -1:
        raise InvalidParamsError("overload_fraction must be >= -1")
    if overload_fraction == 0:
        return p
    m_new = p.m + overload_fraction * p.payload
    if m_new <= 0:
        raise InvalidParamsError(f"resulting mass {m_new} kg is not positive")
    j_new = p.j * (m_new / p.m) if scale_inertia else p.j
    return replace(p, m=m_new, j=j_new)


def algebraic_uncertainty(
    p: VehicleParams,
    dt: float,
    overload_fraction: float = 1.0,
    mu: float = 8.0,
    scale_inertia: bool = True,
):
    """Structured uncertainty spanning unloaded to overloaded operation.

    Discretizes the tracking model (two inputs) at the unloaded mass
    ``m - payload`` and at ``m + overload_fraction * payload``, forms the
    matrix variations ``gamma_F = F_min - F_max`` and ``gamma_G = G_min -
    G_max``, and keeps their first row (the lateral-velocity row, the one most
    affected by mass changes).  The uncertainty rows are the signed first-row
    entries scaled by ``[1, 1, 1, 0.1]`` for the state part and ``[0.1, 0.1]``
    for the input part, with ``H = [1, 1, 1, 1]^T``.

    The default penalty was calibrated by sweeping the closed-loop spectral
    radius of the resulting steering controller over the 0..300% payload
    range; it maximizes the robust stability margin for the default truck.
    """
    from .rlqr import UncertaintySpec

    if dt <= 0:
        raise InvalidParamsError("dt must be positive")
    unloaded = payload_variant(p, -1.0, scale_inertia=scale_inertia)
    overloaded = payload_variant(p, overload_fraction, scale_inertia=scale_inertia)
    mdl_min = discretize_zoh(build_continuous(unloaded, curvature_input=True), dt)
    mdl_max = discretize_zoh(build_continuous(overloaded, curvature_input=True), dt)
    gamma_f = mdl_min.f - mdl_max.f
    gamma_g = mdl_min.g - mdl_max.g
    e_f = (np.array([1.0, 1.0, 1.0, 0.1]) * gamma_f[0, :]).reshape(1, -1)
    e_g = (np.array([0.1, 0.1]) * gamma_g[0, :]).reshape(1, -1)
    h = np.ones((4, 1))
    return UncertaintySpec(h=h, e_f=e_f, e_g=e_g, mu=mu)
