import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oceanswr.core import (ConfigurationError, DomainError, GridSpec, PhysicalParams, State, VelocityField,
                           layout_for, mean_velocity, nondimensionalize, trapezoid_weights, vertical_modes)


def test_unit_scales_give_unit_numbers():
    p = nondimensionalize(1, 1, 1, 1, 1, 1)
    assert (p.epsilon, p.re, p.re_prime, p.fr) == (1, 1, 1, 1)


def test_experiment_regime_scales():
    p = nondimensionalize(U=1, L=1, H=1, f=1e3, nu=1, g=1)
    assert p.epsilon == pytest.approx(1e-3, rel=1e-15)
    assert p.re == 1 and p.fr == 1


def test_reynolds_arithmetic():
    p = nondimensionalize(U=2, L=5, H=0.5, f=1, nu=0.1, g=1)
    assert p.re == pytest.approx(100.0, rel=1e-14)
    assert p.re_prime == pytest.approx(1.0, rel=1e-14)
    assert p.fr == pytest.approx(2 / math.sqrt(0.5), rel=1e-14)


@pytest.mark.parametrize("bad", ["U", "L", "H", "f", "nu", "g"])
def test_nondimensionalize_rejects_nonpositive(bad):
    args = dict(U=1, L=1, H=1, f=1, nu=1, g=1)
    args[bad] = 0.0
    with pytest.raises(DomainError):
        nondimensionalize(**args)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 10), st.floats(0.5, 2), st.floats(0.5, 2))
def test_nondimensionalize_scale_consistent(U, L, H, f, nu, g, a_vel, b_len):
    # U -> aU, (L, H) -> b(L, H), f -> f a/b, nu -> nu a b, g -> g a^2/b keeps all four numbers
    a = nondimensionalize(U, L, H, f, nu, g)
    b = nondimensionalize(a_vel * U, b_len * L, b_len * H, f * a_vel / b_len, nu * a_vel * b_len,
                          g * a_vel**2 / b_len)
    for name in ("epsilon", "re", "re_prime", "fr"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12)


def test_physical_params_validation():
    with pytest.raises(DomainError):
        PhysicalParams(epsilon=0.0)
    with pytest.raises(DomainError):
        PhysicalParams(epsilon=1e-3, u0=-1.0)
    assert PhysicalParams(epsilon=1e-3, fr=math.inf).inv_fr2 == 0.0


def test_mean_velocity_constant():
    assert mean_velocity(np.full(11, 2.5), 0.1) == pytest.approx(2.5, rel=1e-15)


def test_mean_velocity_hand_trapezoid():
    assert mean_velocity([0.0, 1.0, 0.0], 0.5) == 0.5


def test_mean_velocity_length_mismatch():
    with pytest.raises(DomainError):
        mean_velocity(np.ones(5), 0.1)


def test_mean_of_first_mode_within_dz_squared():
    for nz in (4, 8, 16, 32):
        assert abs(mean_velocity(vertical_modes(nz, 1), 1.0 / nz)) <= (1.0 / nz) ** 2


def test_vertical_modes_values():
    assert np.array_equal(vertical_modes(10, 0), np.ones(11))
    assert vertical_modes(10, 1)[0] == pytest.approx(-math.sqrt(2), rel=1e-15)
    with pytest.raises(DomainError):
        vertical_modes(4, 5)


def test_mode_normalisation_second_order():
    errs = []
    for nz in (8, 16, 32):
        e = vertical_modes(nz, 1)
        errs.append(abs(trapezoid_weights(nz, 1 / nz) @ (e * e) - 1.0))
    assert errs[-1] < 1e-12 or errs[0] / errs[-1] > 10


def test_grid_validation():
    g = GridSpec.uniform(40, 10, 40, 1.3, 2.0)
    assert g.dx == 0.05 and g.final_time == pytest.approx(1.3)
    with pytest.raises(ConfigurationError):
        GridSpec.uniform(0, 10, 40, 1.3, 2.0)
    with pytest.raises(ConfigurationError):
        GridSpec.uniform(4, 10, 1, 1.3, 2.0).check_cfl(PhysicalParams(epsilon=1e-3))


def test_layout_shapes():
    g = GridSpec.uniform(5, 2, 4, 0.1, 1.0)
    mono, minus, plus = (layout_for(k, g) for k in ("mono", "minus", "plus"))
    assert (mono.ncols, mono.ncells) == (9, 10)
    assert (minus.ncols, minus.ncells) == (5, 5)
    assert (plus.ncols, plus.ncells) == (5, 5)
    assert minus.x_nodes[-1] == 0.0 and plus.x_nodes[0] == 0.0


def test_velocity_interleave_roundtrip(rng):
    u, v = rng.standard_normal((3, 4)), rng.standard_normal((3, 4))
    vf = VelocityField(u, v)
    x = vf.interleaved()
    assert x[0] == u[0, 0] and x[1] == v[0, 0] and x[2] == u[0, 1]
    back = VelocityField.from_interleaved(x, (3, 4))
    assert np.array_equal(back.u, u) and np.array_equal(back.v, v)


def test_state_zeros():
    s = State.zeros(3, 5, 6)
    assert s.step_index == 0 and s.velocity.u.shape == (3, 5) and s.surface.zeta.shape == (6,)
