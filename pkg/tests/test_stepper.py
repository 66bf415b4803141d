"""Time stepping: exactness on the stiff linear flow, order, CFL, blow-up.

The strongest oracle: with zero velocity, zero coupling and a divergence-free
stress (built from second derivatives of one potential), every nonlinear term
vanishes identically, so the integrator must reproduce the exact stress
semigroup no matter how large the step is.
"""

import numpy as np
import pytest

from oldroyd2d import (
    BlowUpError,
    FlowState,
    Grid,
    ScalarField,
    StepperConfig,
    StressField,
    VectorField,
    advance_through_times,
    advance_to,
    derivative,
    forward_transform,
    inverse_transform,
    lp_norm,
    ModelParams,
    semigroup_apply,
    small_family,
    zero_stress,
    zero_velocity,
)
from oldroyd2d.stepper import IntegratingFactor, cfl_dt, pack_state, step, unpack_state

from conftest import random_band_limited


def airy_stress(grid, seed):
    """Divergence-free symmetric stress (d22 phi, -d12 phi, d11 phi)."""
    phi = forward_transform(random_band_limited(grid, seed=seed, max_mode=4))
    t11 = inverse_transform(derivative(phi, axis=2, order=2)).samples
    t22 = inverse_transform(derivative(phi, axis=1, order=2)).samples
    d1 = derivative(phi, axis=1)
    t12 = -inverse_transform(derivative(d1, axis=2)).samples
    return StressField.from_arrays(grid, t11, t12, t22)


def rest_state(grid, tau):
    return FlowState(u=zero_velocity(grid), tau=tau, time=0.0)


# ---------------------------------------------------------------------------
# configuration


def test_config_rejects_bad_controls():
    with pytest.raises(ValueError, match="dt > 0"):
        StepperConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError, match="t_end >= 0"):
        StepperConfig(dt=0.1, t_end=-1.0)
    with pytest.raises(ValueError, match="cfl"):
        StepperConfig(dt=0.1, t_end=1.0, cfl=1.5)
    with pytest.raises(ValueError, match="sample_every"):
        StepperConfig(dt=0.1, t_end=1.0, sample_every=0)


# ---------------------------------------------------------------------------
# exactness on the stiff linear flow


def test_rest_state_with_closed_stress_follows_the_exact_semigroup(grid64):
    tau0 = airy_stress(grid64, seed=1)
    state = rest_state(grid64, tau0)
    out = advance_to(state, ModelParams(), StepperConfig(dt=0.35, t_end=0.7))
    assert out.time == pytest.approx(0.7)
    for got, comp in zip((out.tau.t11, out.tau.t12, out.tau.t22), tau0.arrays):
        want = semigroup_apply(ScalarField(grid64, comp), 0.7)
        scale = max(np.abs(comp).max(), 1.0)
        np.testing.assert_allclose(got.samples, want.samples, atol=1e-12 * scale)
    # the velocity never moves: the stress exerts no force.  (The threshold
    # allows for rounding dust in div tau amplified by k^3 on the fine grid;
    # any genuine forcing would show up at the size of dt * ||div tau||.)
    assert max(np.abs(a).max() for a in out.u.arrays) < 1e-9


def test_semigroup_apply_matches_the_single_mode_closed_form(grid64):
    x, _ = grid64.mesh
    f = ScalarField(grid64, np.cos(3 * x))
    out = semigroup_apply(f, 0.4, eta=0.5, mu2=2.0)
    np.testing.assert_allclose(
        out.samples, np.exp(-0.4 * (2.0 + 0.5 * 9.0)) * f.samples, atol=1e-13
    )
    with pytest.raises(ValueError, match="nonnegative"):
        semigroup_apply(f, -0.1)


def test_integrating_factor_halves_compose_to_the_full_factor(grid32):
    fac = IntegratingFactor(grid32, ModelParams(nu=0.3), dt=0.2)
    rng = np.random.default_rng(5)
    y = rng.normal(size=(5, grid32.n, grid32.half_width)) + 1j * rng.normal(
        size=(5, grid32.n, grid32.half_width)
    )
    np.testing.assert_allclose(
        fac.scale_half(fac.scale_half(y)), fac.scale_full(y), rtol=1e-13
    )


# ---------------------------------------------------------------------------
# convergence order


def test_self_convergence_is_fourth_order():
    g = Grid(32, 2.0 * np.pi)
    state = small_family(g, eps0=0.5, seed=3)
    params = ModelParams(a=0.2)
    # the dt ladder sits below the pre-asymptotic knee of the error curve
    outs = {}
    for dt in (0.025, 0.0125, 0.00625):
        cfg = StepperConfig(dt=dt, t_end=0.5, cfl=1.0)
        outs[dt] = advance_to(state, params, cfg)

    def dist(a, b):
        return np.sqrt(
            sum(
                lp_norm(ScalarField(g, x.samples - y.samples), 2) ** 2
                for x, y in zip(
                    (a.u.u1, a.u.u2, a.tau.t11, a.tau.t12, a.tau.t22),
                    (b.u.u1, b.u.u2, b.tau.t11, b.tau.t12, b.tau.t22),
                )
            )
        )

    e1 = dist(outs[0.025], outs[0.0125])
    e2 = dist(outs[0.0125], outs[0.00625])
    order = np.log2(e1 / e2)
    assert order > 3.5


# ---------------------------------------------------------------------------
# step control


def test_single_step_obeys_the_advective_cap(grid32):
    u = VectorField.from_arrays(
        grid32, np.full((32, 32), 2.0), np.zeros((32, 32))
    )
    state = FlowState(u=u, tau=zero_stress(grid32), time=0.0)
    cfg = StepperConfig(dt=1.0, t_end=10.0, cfl=0.5)
    assert cfl_dt(state, cfg) == pytest.approx(0.5 * grid32.dx / 2.0)
    out = step(state, ModelParams(), cfg)
    assert out.time == pytest.approx(0.5 * grid32.dx / 2.0)


def test_nominal_step_wins_when_the_flow_is_slow(grid32):
    state = small_family(grid32, eps0=1e-3, seed=4)
    out = step(state, ModelParams(), StepperConfig(dt=0.01, t_end=1.0))
    assert out.time == pytest.approx(0.01)


def test_final_step_lands_exactly_on_the_end_time(grid32):
    state = small_family(grid32, eps0=1e-3, seed=4)
    out = advance_to(state, ModelParams(), StepperConfig(dt=0.4, t_end=1.0))
    assert out.time == 1.0


# ---------------------------------------------------------------------------
# observers


def test_observer_cadence_and_no_duplicate_final_sample(grid32):
    state = rest_state(grid32, airy_stress(grid32, seed=6))
    seen = []
    cfg = StepperConfig(dt=0.25, t_end=1.0, sample_every=2)
    stats = {}
    advance_to(state, ModelParams(), cfg, observer=lambda s: seen.append(s.time), stats=stats)
    assert seen == [0.0, 0.5, 1.0]
    assert stats["steps"] == 4


def test_listed_sample_times_are_landed_on_exactly(grid32):
    state = rest_state(grid32, airy_stress(grid32, seed=7))
    seen = []
    cfg = StepperConfig(dt=0.3, t_end=2.0)
    stats = {}
    out = advance_through_times(
        state,
        ModelParams(),
        cfg,
        sample_times=[0.0, 0.45, 1.0],
        observer=lambda s: seen.append(s.time),
        stats=stats,
    )
    assert seen == [0.0, 0.45, 1.0]
    assert out.time == 1.0
    assert stats["steps"] >= 4


def test_decreasing_sample_times_are_rejected(grid32):
    state = rest_state(grid32, airy_stress(grid32, seed=8))
    with pytest.raises(ValueError, match="nondecreasing"):
        advance_through_times(
            state, ModelParams(), StepperConfig(dt=0.1, t_end=1.0), sample_times=[0.5, 0.2]
        )


def test_backwards_integration_is_rejected(grid32):
    state = FlowState(u=zero_velocity(grid32), tau=zero_stress(grid32), time=2.0)
    with pytest.raises(ValueError, match="backwards"):
        advance_to(state, ModelParams(), StepperConfig(dt=0.1, t_end=1.0))


def test_observer_failures_carry_the_sample_time(grid32):
    state = rest_state(grid32, airy_stress(grid32, seed=9))

    def boom(s):
        raise KeyError("missing channel")

    with pytest.raises(RuntimeError, match="observer failed at t=0") as err:
        advance_to(state, ModelParams(), StepperConfig(dt=0.1, t_end=0.3), observer=boom)
    assert isinstance(err.value.__cause__, KeyError)


# ---------------------------------------------------------------------------
# blow-up


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # overflow is the point
def test_non_finite_states_raise_a_reportable_blow_up(grid32):
    tau = airy_stress(grid32, seed=10)
    huge = StressField.from_arrays(grid32, *(1e150 * c for c in tau.arrays))
    state = FlowState(u=zero_velocity(grid32), tau=huge, time=0.0)
    # break the force-free structure so the feedback actually explodes
    state.tau.t11.samples[:] += 1e150
    stats = {}
    with pytest.raises(BlowUpError) as err:
        advance_to(state, ModelParams(mu1=1.0), StepperConfig(dt=0.5, t_end=5.0), stats=stats)
    assert err.value.step_index == stats["steps"]
    assert err.value.time > 0.0
    assert "non-finite state" in str(err.value)


# ---------------------------------------------------------------------------
# determinism and packing


def test_two_identical_runs_agree_bitwise(grid32):
    state = small_family(grid32, eps0=0.01, seed=11)
    cfg = StepperConfig(dt=0.05, t_end=0.5)
    a = advance_to(state, ModelParams(a=0.1), cfg)
    b = advance_to(state, ModelParams(a=0.1), cfg)
    for x, y in zip(
        (a.u.u1, a.u.u2, a.tau.t11, a.tau.t12, a.tau.t22),
        (b.u.u1, b.u.u2, b.tau.t11, b.tau.t12, b.tau.t22),
    ):
        np.testing.assert_array_equal(x.samples, y.samples)


def test_pack_unpack_round_trip_projects_and_preserves(grid32):
    # divergence-free velocity + stress, band-limited well inside the mask:
    # packing has nothing to project away or truncate, so the round trip is
    # an identity up to transform rounding
    psi = forward_transform(random_band_limited(grid32, seed=12, max_mode=4))
    u = VectorField.from_arrays(
        grid32,
        inverse_transform(derivative(psi, axis=2)).samples,
        -inverse_transform(derivative(psi, axis=1)).samples,
    )
    state = FlowState(u=u, tau=airy_stress(grid32, seed=21), time=0.0)
    cfg = StepperConfig(dt=0.05, t_end=1.0)
    y = pack_state(state, cfg)
    assert y.shape == (5, grid32.n, grid32.half_width)
    back = unpack_state(grid32, y, 0.25)
    assert back.time == 0.25
    np.testing.assert_allclose(back.u.u1.samples, state.u.u1.samples, atol=1e-13)
    np.testing.assert_allclose(back.tau.t12.samples, state.tau.t12.samples, atol=1e-13)


def test_stepping_without_the_mask_still_runs(grid32):
    state = small_family(grid32, eps0=0.01, seed=13)
    cfg = StepperConfig(dt=0.05, t_end=0.2, dealias=False)
    out = advance_to(state, ModelParams(), cfg)
    assert np.isfinite(out.tau.t11.samples).all()
