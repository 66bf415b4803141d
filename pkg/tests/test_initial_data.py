"""Initial-data constructors: closed forms, budget contracts, scaling laws.

The two normalized families carry exact contracts — the localized family's
measured budget equals 4*eps0 by construction, and the dilation family's
velocity norm is eps0/2 independently of the dilation parameter — so the
tests recompute those numbers from scratch (hand block loops, continuum
normalization constants) rather than trusting the constructors' own
bookkeeping.
"""

import numpy as np
import pytest

from oldroyd2d import (
    Grid,
    ScalarField,
    divergence,
    forward_transform,
    lp_norm,
)
from oldroyd2d.bands import BesovSpec, besov_norm, build_partition, dyadic_block
from oldroyd2d.initial_data import (
    DATA_KINDS,
    InitialDataSpec,
    build_initial_state,
    from_stream_function,
    random_stream,
    remark_large,
    scaled_family,
    small_family,
    taylor_green,
    zero_stress,
    zero_velocity,
)
from oldroyd2d.model import stress_l2_norm, vorticity
from oldroyd2d.spectral import SpectralScalar, inverse_transform


def div_sup(u):
    return float(np.abs(divergence(u).samples).max())


# ---------------------------------------------------------------------------
# stream-function velocities


def test_stream_function_gives_the_perpendicular_gradient(grid32):
    x, y = grid32.mesh
    psi = ScalarField(grid32, np.sin(x + 2 * y))
    u = from_stream_function(psi)
    np.testing.assert_allclose(u.u1.samples, 2 * np.cos(x + 2 * y), atol=1e-12)
    np.testing.assert_allclose(u.u2.samples, -np.cos(x + 2 * y), atol=1e-12)
    assert div_sup(u) < 1e-12


def test_taylor_green_closed_form(grid64):
    x, y = grid64.mesh
    u = taylor_green(grid64, amplitude=0.3)
    np.testing.assert_allclose(u.u1.samples, -0.3 * np.cos(x) * np.sin(y), atol=1e-12)
    np.testing.assert_allclose(u.u2.samples, 0.3 * np.sin(x) * np.cos(y), atol=1e-12)
    assert np.hypot(*u.arrays).max() == pytest.approx(0.3, rel=1e-12)


def test_zero_fields_are_zero(grid32):
    assert all(np.all(a == 0.0) for a in zero_velocity(grid32).arrays)
    assert all(np.all(a == 0.0) for a in zero_stress(grid32).arrays)


def test_random_stream_is_normalized_deterministic_and_divergence_free(grid64):
    u = random_stream(grid64, seed=9, amplitude=0.7)
    again = random_stream(grid64, seed=9, amplitude=0.7)
    other = random_stream(grid64, seed=10, amplitude=0.7)
    np.testing.assert_array_equal(u.u1.samples, again.u1.samples)
    assert not np.array_equal(u.u1.samples, other.u1.samples)
    assert np.hypot(*u.arrays).max() == pytest.approx(0.7, rel=1e-12)
    assert div_sup(u) < 1e-12


def test_random_stream_respects_the_mode_cap(grid64):
    u = random_stream(grid64, seed=3, max_mode=2)
    coeffs = forward_transform(u.u1).coeffs
    scale = 2.0 * np.pi / grid64.length
    m1 = np.rint(grid64.k1 / scale).astype(int)
    m2 = np.rint(grid64.k2 / scale).astype(int)
    outside = (np.abs(m1) > 2) | (np.abs(m2) > 2)
    assert np.abs(coeffs[outside]).max() < 1e-15
    with pytest.raises(ValueError, match="max_mode"):
        random_stream(grid64, seed=3, max_mode=0)


# ---------------------------------------------------------------------------
# localized budget-normalized family


def test_small_family_budget_recomputed_by_hand_equals_four_eps0(grid64):
    eps0 = 0.02
    st = small_family(grid64, eps0=eps0, seed=7, tau_scale=0.8)
    part = build_partition(grid64)
    pair = np.sqrt(
        lp_norm(st.u.u1, 2) ** 2
        + lp_norm(st.u.u2, 2) ** 2
        + stress_l2_norm(st.tau) ** 2
    )
    w = forward_transform(vorticity(st.u))
    b0_w = sum(
        lp_norm(dyadic_block(w, j, part), np.inf) for j in range(-1, part.j_max + 1)
    )
    specs = [forward_transform(f) for f in (st.tau.t11, st.tau.t12, st.tau.t22)]
    b0_tau = 0.0
    for j in range(-1, part.j_max + 1):
        mult = part.block_multiplier(j)
        sq = np.zeros((grid64.n, grid64.n))
        for weight, s in zip((1.0, 2.0, 1.0), specs):
            sq += weight * inverse_transform(SpectralScalar(grid64, s.coeffs * mult)).samples ** 2
        b0_tau += float(np.sqrt(sq).max())
    assert pair + b0_w + b0_tau == pytest.approx(4.0 * eps0, rel=1e-12)
    assert div_sup(st.u) < 1e-12
    assert st.time == 0.0


def test_small_family_is_one_homogeneous_in_the_budget(grid64):
    lo = small_family(grid64, eps0=0.01, seed=7)
    hi = small_family(grid64, eps0=0.02, seed=7)
    np.testing.assert_array_equal(hi.u.u1.samples, 2.0 * lo.u.u1.samples)
    np.testing.assert_array_equal(hi.tau.t12.samples, 2.0 * lo.tau.t12.samples)


def test_small_family_seed_and_tau_scale_controls(grid64):
    a = small_family(grid64, eps0=0.01, seed=1)
    b = small_family(grid64, eps0=0.01, seed=2)
    assert not np.array_equal(a.u.u1.samples, b.u.u1.samples)
    bare = small_family(grid64, eps0=0.01, seed=1, tau_scale=0.0)
    assert all(np.all(c == 0.0) for c in bare.tau.arrays)
    # with the stress gone the whole budget sits on the velocity
    assert np.abs(bare.u.u1.samples).max() > np.abs(a.u.u1.samples).max()


def test_small_family_validation(grid32):
    with pytest.raises(ValueError, match="eps0"):
        small_family(grid32, eps0=0.0)
    with pytest.raises(ValueError, match="tau_scale"):
        small_family(grid32, eps0=0.01, tau_scale=1.5)
    with pytest.raises(ValueError, match="tau_scale"):
        small_family(grid32, eps0=0.01, tau_scale=-0.1)


# ---------------------------------------------------------------------------
# dilation family


@pytest.fixture(scope="module")
def wide_grid():
    return Grid(128, 32.0)


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_scaled_family_velocity_norm_is_half_eps0_for_every_a(wide_grid, a):
    eps0 = 0.04
    st = scaled_family(wide_grid, a, eps0)
    norm = np.sqrt(lp_norm(st.u.u1, 2) ** 2 + lp_norm(st.u.u2, 2) ** 2)
    assert norm == pytest.approx(eps0 / 2.0, rel=1e-6)
    assert div_sup(st.u) < 1e-12 * max(1.0, np.abs(st.u.u1.samples).max())


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_scaled_family_stress_norm_follows_the_a_squared_law(wide_grid, a):
    eps0 = 0.04
    st = scaled_family(wide_grid, a, eps0)
    # t11 = t22 = scalar profile with continuum L2 norm (eps0/2) a^2; t12 = 0
    np.testing.assert_array_equal(st.tau.t11.samples, st.tau.t22.samples)
    assert np.all(st.tau.t12.samples == 0.0)
    want = np.sqrt(2.0) * (eps0 / 2.0) * a * a
    assert stress_l2_norm(st.tau) == pytest.approx(want, rel=1e-6)


def test_scaled_family_sup_stress_scales_like_a_cubed(wide_grid):
    hi = scaled_family(wide_grid, 1.0, eps0=0.04)
    lo = scaled_family(wide_grid, 0.5, eps0=0.04)
    ratio = np.abs(hi.tau.t11.samples).max() / np.abs(lo.tau.t11.samples).max()
    assert ratio == pytest.approx(8.0, rel=1e-9)


def test_scaled_family_validation(wide_grid, grid32):
    with pytest.raises(ValueError, match="0 < a <= 1"):
        scaled_family(wide_grid, 0.0, eps0=0.01)
    with pytest.raises(ValueError, match="0 < a <= 1"):
        scaled_family(wide_grid, 1.5, eps0=0.01)
    with pytest.raises(ValueError, match="eps0"):
        scaled_family(wide_grid, 1.0, eps0=0.0)
    with pytest.raises(ValueError, match="does not fit"):
        scaled_family(grid32, 1.0, eps0=0.01)  # length 2*pi < 8


# ---------------------------------------------------------------------------
# high-frequency stress bump


def test_remark_large_has_the_advertised_ten_mode_support(grid64):
    tau = remark_large(grid64, 3)
    coeffs = forward_transform(tau.t11).coeffs
    hits = np.argwhere(np.abs(coeffs) > 1e-15)
    assert len(hits) == 10
    center = 8
    expected = set()
    for d1, d2 in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
        expected.add(((center + d1) % 64, (center + d2) % 64))
        expected.add(((-center - d1) % 64, (-center - d2) % 64))
    assert {tuple(h) for h in hits} == expected
    np.testing.assert_allclose(
        np.abs(coeffs[tuple(np.array(sorted(expected)).T)]), 0.5 / 3.0, rtol=1e-12
    )


@pytest.mark.parametrize("n_freq", [2, 3, 4])
def test_remark_large_sup_and_l2_closed_forms(grid64, n_freq):
    tau = remark_large(grid64, n_freq)
    f = tau.t11
    # five unit-weight cosines, all peaking at the origin
    assert f.samples[0, 0] == pytest.approx(5.0 / n_freq, rel=1e-12)
    assert np.abs(f.samples).max() == pytest.approx(5.0 / n_freq, rel=1e-12)
    assert lp_norm(f, 2) == pytest.approx(np.pi * np.sqrt(10.0) / n_freq, rel=1e-12)
    for a, b in ((tau.t11, tau.t12), (tau.t12, tau.t22)):
        np.testing.assert_array_equal(a.samples, b.samples)


def test_remark_large_besov_norm_grows_along_the_family(grid64):
    part = build_partition(grid64)
    spec = BesovSpec(1.0, 2, 1)
    norms = {n: besov_norm(remark_large(grid64, n).t11, spec, part) for n in (2, 3, 4)}
    # single-annulus support: one dyadic step raises the norm by 2 while the
    # amplitude 1/N lowers it by N/(N+1)
    assert norms[4] / norms[3] == pytest.approx(1.5, rel=1e-12)
    assert norms[3] / norms[2] == pytest.approx(4.0 / 3.0, rel=1e-3)
    assert norms[4] > norms[3] > norms[2]


def test_remark_large_rejects_modes_beyond_the_dealiased_band(grid64):
    remark_large(grid64, 4)  # 2^4 + 1 = 17 <= 21 survives
    with pytest.raises(ValueError, match="largest admissible N is 4"):
        remark_large(grid64, 5)
    with pytest.raises(ValueError, match="n_freq"):
        remark_large(grid64, 0)
    with pytest.raises(ValueError, match="p="):
        remark_large(grid64, 3, p=3)


# ---------------------------------------------------------------------------
# declarative specs


def test_spec_validation():
    assert set(DATA_KINDS) == {"stream", "small_family", "remark_large", "scaled_family"}
    with pytest.raises(ValueError, match="unknown data kind"):
        InitialDataSpec(kind="vortex")
    with pytest.raises(ValueError, match="eps0"):
        InitialDataSpec(kind="stream", eps0=-1.0)
    with pytest.raises(ValueError, match="n_freq"):
        InitialDataSpec(kind="stream", n_freq=0)
    with pytest.raises(ValueError, match="scaled_family requires a > 0"):
        InitialDataSpec(kind="scaled_family")


def test_build_initial_state_dispatches_to_each_family(grid64):
    tg = build_initial_state(grid64, InitialDataSpec(kind="stream", amplitude=0.5))
    np.testing.assert_array_equal(tg.u.u1.samples, taylor_green(grid64, 0.5).u1.samples)
    assert all(np.all(c == 0.0) for c in tg.tau.arrays)

    rnd = build_initial_state(
        grid64, InitialDataSpec(kind="stream", amplitude=0.5, seed=4, n_freq=2)
    )
    np.testing.assert_array_equal(
        rnd.u.u1.samples, random_stream(grid64, 4, 0.5, max_mode=2).u1.samples
    )

    fam = build_initial_state(
        grid64, InitialDataSpec(kind="small_family", eps0=0.02, seed=3, tau_scale=0.5)
    )
    np.testing.assert_array_equal(
        fam.tau.t11.samples,
        small_family(grid64, 0.02, seed=3, tau_scale=0.5).tau.t11.samples,
    )

    # InitialDataSpec always forwards its amplitude field; the 1/N default
    # only applies to direct calls that leave amplitude unset
    bump = build_initial_state(grid64, InitialDataSpec(kind="remark_large", n_freq=3))
    assert all(np.all(c == 0.0) for c in bump.u.arrays)
    np.testing.assert_array_equal(
        bump.tau.t22.samples, remark_large(grid64, 3, amplitude=1.0).t22.samples
    )

    wide = Grid(64, 32.0)
    dil = build_initial_state(wide, InitialDataSpec(kind="scaled_family", a=0.5, eps0=0.04))
    np.testing.assert_array_equal(
        dil.u.u2.samples, scaled_family(wide, 0.5, 0.04).u.u2.samples
    )
