import dataclasses

import numpy as np
import pytest

from evolqr.rlqr import check_rank_condition
from evolqr.vehicle import (
    InvalidParamsError,
    StateSpaceModel,
    algebraic_uncertainty,
    build_continuous,
    default_truck,
    discretize_zoh,
    payload_variant,
)


class TestBuildContinuous:
    def test_structural_entries(self):
        model = build_continuous(default_truck())
        a = model.f
        assert a[2, 3] == pytest.approx(16.6667)
        assert a[2, 0] == 1.0
        assert a[3, 1] == 1.0

    def test_lateral_velocity_damping_hand_value(self):
        # -(c1+c2)/(m v) with the default truck numbers, by hand arithmetic
        a = build_continuous(default_truck()).f
        assert a[0, 0] == pytest.approx(-2.4212178649878506, abs=1e-10)

    def test_all_entries_match_formulas(self):
        p = default_truck()
        model = build_continuous(p)
        expected = np.zeros((4, 4))
        expected[0, 0] = (-p.c1 - p.c2) / (p.m * p.v)
        expected[0, 1] = (p.b * p.c1 - p.a * p.c1 - p.m * p.v**2) / (p.m * p.v)
        expected[1, 0] = (p.b * p.c2 - p.a * p.c1) / (p.j * p.v)
        expected[1, 1] = (-(p.a**2) * p.c1 - p.b**2 * p.c1) / (p.j * p.v)
        expected[2, 0] = 1.0
        expected[2, 3] = p.v
        expected[3, 1] = 1.0
        assert np.allclose(model.f, expected, rtol=1e-14)
        assert np.allclose(model.g.ravel(), [p.c1 / p.m, p.a * p.c1 / p.j, 0.0, 0.0])

    def test_stiffness_free_limit(self):
        # c1 = c2 -> 0: only the -m v^2 coupling survives and the input vanishes
        p = dataclasses.replace(default_truck(), c1=1e-9, c2=1e-9)
        model = build_continuous(p)
        assert model.f[0, 1] == pytest.approx(-p.v, rel=1e-9)
        assert np.abs(model.f[:2, :]).max() == pytest.approx(p.v, rel=1e-9)
        assert np.abs(model.g).max() < 1e-12

    def test_curvature_input_column(self):
        model = build_continuous(default_truck(), curvature_input=True)
        assert model.g.shape == (4, 2)
        assert np.allclose(model.g[:, 1], [0.0, 0.0, 0.0, -default_truck().v])

    def test_rejects_nonpositive_params(self):
        with pytest.raises(InvalidParamsError):
            dataclasses.replace(default_truck(), v=0.0)


class TestDiscretizeZoh:
    def test_integrator(self):
        model = StateSpaceModel(f=np.zeros((2, 2)), g=np.array([[1.0], [2.0]]), dt=0.0,
                                state_labels=("a", "b"))
        disc = discretize_zoh(model, 0.5)
        assert np.allclose(disc.f, np.eye(2))
        assert np.allclose(disc.g, model.g * 0.5)
        assert disc.dt == 0.5

    def test_scalar_closed_form(self):
        a, b, dt = -0.7, 2.0, 0.3
        model = StateSpaceModel(f=[[a]], g=[[b]], dt=0.0, state_labels=("x",))
        disc = discretize_zoh(model, dt)
        assert disc.f[0, 0] == pytest.approx(np.exp(a * dt), rel=1e-12)
        assert disc.g[0, 0] == pytest.approx(b * (np.exp(a * dt) - 1.0) / a, rel=1e-12)

    def test_matches_rk4_oracle(self):
        model = build_continuous(default_truck())
        disc = discretize_zoh(model, 0.1)
        # RK4 with 1e4 substeps on xdot = A x + B u, u constant
        a, b = model.f, model.g
        n_sub = 10_000
        h = 0.1 / n_sub
        x = np.eye(4 + 1)  # propagate [x; u] jointly: aug = [[A, B], [0, 0]]
        aug = np.zeros((5, 5))
        aug[:4, :4] = a
        aug[:4, 4:] = b

        def deriv(y):
            return aug @ y

        for _ in range(n_sub):
            k1 = deriv(x)
            k2 = deriv(x + 0.5 * h * k1)
            k3 = deriv(x + 0.5 * h * k2)
            k4 = deriv(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert np.abs(disc.f - x[:4, :4]).max() < 1e-6
        assert np.abs(disc.g - x[:4, 4:]).max() < 1e-6

    def test_small_step_first_order(self):
        model = build_continuous(default_truck())
        dt = 1e-6
        disc = discretize_zoh(model, dt)
        assert np.abs(disc.f - (np.eye(4) + model.f * dt)).max() < 1e-9

    def test_rejects_discrete_input(self):
        disc = discretize_zoh(build_continuous(default_truck()), 0.1)
        with pytest.raises(ValueError):
            discretize_zoh(disc, 0.1)


class TestPayloadVariant:
    def test_zero_fraction_identity(self):
        p = default_truck()
        assert payload_variant(p, 0.0) == p

    def test_full_overload_mass(self):
        p = payload_variant(default_truck(), 1.0)
        assert p.m == pytest.approx(16030.0 + 12550.0)

    def test_triple_overload_mass(self):
        assert payload_variant(default_truck(), 3.0).m == pytest.approx(53680.0)

    def test_inertia_scaling(self):
        base = default_truck()
        p = payload_variant(base, 1.0)
        assert p.j == pytest.approx(base.j * p.m / base.m)
        fixed = payload_variant(base, 1.0, scale_inertia=False)
        assert fixed.j == base.j

    def test_negative_mass_rejected(self):
        p = dataclasses.replace(default_truck(), m=5000.0, payload=12550.0)
        with pytest.raises(InvalidParamsError):
            payload_variant(p, -1.0)


class TestAlgebraicUncertainty:
    def test_zero_span_gives_zero_uncertainty(self):
        # overload fraction -1 makes both endpoint masses equal the unloaded one
        unc = algebraic_uncertainty(default_truck(), 0.1, overload_fraction=-1.0)
        assert np.abs(unc.e_f).max() == 0.0
        assert np.abs(unc.e_g).max() == 0.0

    def test_shapes_and_h(self):
        unc = algebraic_uncertainty(default_truck(), 0.1)
        assert unc.e_f.shape == (1, 4)
        assert unc.e_g.shape == (1, 2)
        assert np.allclose(unc.h, np.ones((4, 1)))

    def test_signs_follow_first_row_variation(self):
        p = default_truck()
        unc = algebraic_uncertainty(p, 0.1)
        lo = discretize_zoh(build_continuous(payload_variant(p, -1.0), curvature_input=True), 0.1)
        hi = discretize_zoh(build_continuous(payload_variant(p, 1.0), curvature_input=True), 0.1)
        gamma_f = (lo.f - hi.f)[0]
        gamma_g = (lo.g - hi.g)[0]
        assert np.array_equal(np.sign(unc.e_f.ravel()), np.sign(gamma_f))
        assert np.array_equal(np.sign(unc.e_g.ravel()), np.sign(gamma_g))

    def test_rank_condition_holds(self):
        unc = algebraic_uncertainty(default_truck(), 0.1)
        assert np.abs(unc.e_g).max() > 0
        assert check_rank_condition(unc)

    def test_first_row_dominates_variation(self):
        p = default_truck()
        for overload in (0.5, 1.0):
            lo = discretize_zoh(build_continuous(payload_variant(p, -1.0), curvature_input=True), 0.1)
            hi = discretize_zoh(
                build_continuous(payload_variant(p, overload), curvature_input=True), 0.1
            )
            gamma_f = np.abs(lo.f - hi.f)
            row_norms = gamma_f.max(axis=1)
            assert row_norms[0] == row_norms.max()
