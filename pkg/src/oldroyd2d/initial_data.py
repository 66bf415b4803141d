"""Initial-data constructors for the experiment families.

Every constructor returns spectrally divergence-free velocity and a symmetric
stress, so states can be handed to the stepper without adjustment.  The two
normalized families (`small_family`, `scaled_family`) measure themselves with
the same norms the diagnostics use, which keeps their budget contracts exact
rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import BesovSpec, aggregate_block_norms, besov_norm, build_partition, joint_block_lp_norms
from .model import FlowState, StressField, stress_l2_norm, vorticity
from .spectral import (
    Grid,
    ScalarField,
    SpectralScalar,
    VectorField,
    derivative,
    forward_transform,
    inverse_transform,
    lp_norm,
)

DATA_KINDS = ("stream", "small_family", "remark_large", "scaled_family")


def from_stream_function(psi: ScalarField) -> VectorField:
    """Velocity u = (d2 psi, -d1 psi); exactly divergence-free spectrally."""
    spec = forward_transform(psi)
    d1 = derivative(spec, axis=1)
    d2 = derivative(spec, axis=2)
    u1 = inverse_transform(d2)
    u2 = inverse_transform(SpectralScalar(spec.grid, -d1.coeffs))
    return VectorField(psi.grid, u1, u2)


def zero_velocity(grid: Grid) -> VectorField:
    z = np.zeros((grid.n, grid.n))
    return VectorField.from_arrays(grid, z, z.copy())


def zero_stress(grid: Grid) -> StressField:
    z = np.zeros((grid.n, grid.n))
    return StressField.from_arrays(grid, z, z.copy(), z.copy())


def taylor_green(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """Steady vortex from psi = amplitude * cos(2 pi x/L) cos(2 pi y/L)."""
    k0 = 2.0 * np.pi / grid.length
    x, y = grid.mesh
    psi = ScalarField(grid, amplitude * np.cos(k0 * x) * np.cos(k0 * y))
    return from_stream_function(psi)


def random_stream(grid: Grid, seed: int, amplitude: float = 1.0, max_mode: int = 3) -> VectorField:
    """Random smooth divergence-free field with sup |u| = amplitude.

    The stream function is a trigonometric polynomial over modes with
    max(|m1|, |m2|) <= max_mode, weights ~ 1/(1+|m|^2) and phases drawn from
    `seed`, so the field is well inside the dealiased band on any sane grid.
    """
    if max_mode < 1:
        raise ValueError(f"max_mode must be >= 1, got {max_mode}")
    rng = np.random.default_rng(seed)
    k0 = 2.0 * np.pi / grid.length
    x, y = grid.mesh
    psi = np.zeros((grid.n, grid.n))
    for m1 in range(0, max_mode + 1):
        for m2 in range(-max_mode, max_mode + 1):
            if m1 == 0 and m2 <= 0:
                continue  # one representative per +-m pair; no mean mode
            weight = rng.normal() / (1.0 + m1 * m1 + m2 * m2)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            psi += weight * np.cos(k0 * (m1 * x + m2 * y) + phase)
    u = from_stream_function(ScalarField(grid, psi))
    u1, u2 = u.arrays
    sup = float(np.hypot(u1, u2).max())
    if sup == 0.0:
        raise ValueError("random stream template degenerated to zero")
    return VectorField.from_arrays(grid, u1 * (amplitude / sup), u2 * (amplitude / sup))


def _periodized_gaussian(grid: Grid, sigma: float) -> np.ndarray:
    """exp(-r^2 / 2 sigma^2) about the box center, summed over 3x3 images."""
    x, y = grid.mesh
    c = grid.length / 2.0
    out = np.zeros((grid.n, grid.n))
    for mx in (-1.0, 0.0, 1.0):
        for my in (-1.0, 0.0, 1.0):
            dx = x - c + mx * grid.length
            dy = y - c + my * grid.length
            out += np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    return out


#: carrier modes for the small-family stream function.  |m| ~ 5 keeps the
#: velocity energy at wavenumbers where the elastic feedback damps it at a
#: rate within a factor two of its large-k plateau, for every coupling
#: strength the experiments use.
_SMALL_FAMILY_CARRIERS = ((5, 0), (4, 3), (3, -4), (0, 5))
_SMALL_FAMILY_STRESS_MODES = ((1, 0), (0, 1), (1, 1), (2, -1))


def small_family(grid: Grid, eps0: float, seed: int = 0, tau_scale: float = 1.0) -> FlowState:
    """Smooth localized (u0, tau0) with measured budget exactly 4*eps0.

    The budget is ||(u0, tau0)||_L2 + ||w0||_B0inf1 + ||tau0||_B0inf1, measured
    with the same partition the diagnostics use.  Both fields are Gaussian
    envelopes (width L/8) times seeded trigonometric carriers.  Every term in
    the budget is 1-homogeneous in the joint amplitude, so a single exact
    rescale lands the sum on 4*eps0; no iteration is needed.

    ``tau_scale`` shrinks the stress relative to the velocity *before* the
    joint rescale: the polynomial-decay experiment wants a stress budget
    proportional to the coupling coefficient while the total stays at 4*eps0.

    The stress mix includes a mean component so the late-time relaxation is
    visible as a clean exponential at the box scale.
    """
    if eps0 <= 0:
        raise ValueError(f"budget eps0 must be positive, got {eps0}")
    if not 0.0 <= tau_scale <= 1.0:
        raise ValueError(f"tau_scale must lie in [0, 1], got {tau_scale}")
    rng = np.random.default_rng(seed)
    env = _periodized_gaussian(grid, grid.length / 8.0)
    k0 = 2.0 * np.pi / grid.length
    x, y = grid.mesh
    c = grid.length / 2.0

    psi = np.zeros((grid.n, grid.n))
    for m1, m2 in _SMALL_FAMILY_CARRIERS:
        weight = rng.uniform(0.5, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        psi += weight * np.cos(k0 * (m1 * (x - c) + m2 * (y - c)) + phase)
    u = from_stream_function(ScalarField(grid, env * psi))

    def low_mix():
        out = np.ones((grid.n, grid.n))
        for m1, m2 in _SMALL_FAMILY_STRESS_MODES:
            weight = 0.6 * rng.uniform(-1.0, 1.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            out += weight * np.cos(k0 * (m1 * (x - c) + m2 * (y - c)) + phase)
        return out

    t11 = tau_scale * env * low_mix()
    t22 = tau_scale * env * low_mix()
    t12 = 0.5 * tau_scale * env * low_mix()
    tau = StressField.from_arrays(grid, t11, t12, t22)

    part = build_partition(grid)
    b0 = BesovSpec(0.0, np.inf, 1)
    u1, u2 = u.arrays
    pair_l2 = float(
        np.sqrt(
            lp_norm(u.u1, 2) ** 2 + lp_norm(u.u2, 2) ** 2 + stress_l2_norm(tau) ** 2
        )
    )
    j_values = np.arange(-1, part.j_max + 1)
    b0_w = besov_norm(vorticity(u), b0, part)
    b0_tau = aggregate_block_norms(
        joint_block_lp_norms((tau.t11, tau.t12, tau.t22), (1.0, 2.0, 1.0), part, np.inf),
        b0,
        j_values,
    )
    total = pair_l2 + b0_w + b0_tau
    if total == 0.0:
        raise ValueError("small-family template degenerated to zero")
    scale = 4.0 * eps0 / total
    u = VectorField.from_arrays(grid, u1 * scale, u2 * scale)
    tau = StressField.from_arrays(grid, t11 * scale, t12 * scale, t22 * scale)
    return FlowState(u=u, tau=tau, time=0.0)


#: default oscillation wavenumber of the dilation-family profile, in profile
#: units: the physical carrier sits at carrier * a, where the slow elastic
#: damping ~ (a/2) k^2/(1+k^2) is within a factor two of its plateau, so the
#: velocity half-life tracks the 1/a^2 time scale.
SCALED_FAMILY_CARRIER = 4.0


def scaled_family(grid: Grid, a: float, eps0: float, carrier: float = SCALED_FAMILY_CARRIER) -> FlowState:
    """Dilation family u0 = (eps0 a/2) phi(a(x-c)), tau0 = (eps0 a^3/2) s(a(x-c)) I.

    The profile phi is the perpendicular gradient of g(y) = exp(-|y|^2/2)
    cos(q y1), divided by the closed-form norm ||grad g||_{L2(R^2)} =
    sqrt(pi (1 + q^2 + exp(-q^2)) / 2), so ||phi||_{L2(R^2)} = 1 exactly and
    ||u0||_{L2} = eps0/2 for every a: the amplitude and argument scalings
    cancel in two dimensions.  The velocity is produced by the grid's own
    perpendicular gradient of the sampled stream function, keeping it
    divergence-free to machine precision; the profile's spectrum decays like
    exp(-k^2/2a^2), far below rounding at the dealiased band edge, so the
    sampled field matches the continuum one to machine precision as well.

    The scalar stress profile s uses the same envelope and carrier with its
    own closed-form normalization and is embedded isotropically
    (t11 = t22 = s, t12 = 0).
    """
    if not 0.0 < a <= 1.0:
        raise ValueError(f"dilation parameter must satisfy 0 < a <= 1, got {a}")
    if eps0 <= 0:
        raise ValueError(f"budget eps0 must be positive, got {eps0}")
    if a * grid.length < 8.0:
        raise ValueError(
            f"profile of width 1/a does not fit in the box: need length >= {8.0 / a:g}, "
            f"got {grid.length:g}"
        )
    q = float(carrier)
    c_u = np.sqrt(np.pi * (1.0 + q * q + np.exp(-q * q)) / 2.0)
    c_s = np.sqrt(np.pi * (1.0 + np.exp(-q * q)) / 2.0)
    x, y = grid.mesh
    c = grid.length / 2.0

    def profile(scale):
        """Periodized e^(-|y|^2/2) cos(q y1) with y = scale*(x - c)."""
        out = np.zeros((grid.n, grid.n))
        for mx in (-1.0, 0.0, 1.0):
            for my in (-1.0, 0.0, 1.0):
                y1 = scale * (x - c + mx * grid.length)
                y2 = scale * (y - c + my * grid.length)
                out += np.exp(-(y1 * y1 + y2 * y2) / 2.0) * np.cos(q * y1)
        return out

    g = profile(a)
    # stream function (eps0 / 2 c_u) g(a(x-c)): its perpendicular gradient is
    # (eps0 a / 2) phi(a(x-c)) -- the dilation factor appears by itself
    psi = ScalarField(grid, (eps0 / (2.0 * c_u)) * g)
    u = from_stream_function(psi)
    s = (eps0 * a**3 / 2.0) * (g / c_s)
    tau = StressField.from_arrays(grid, s, np.zeros_like(s), s.copy())
    return FlowState(u=u, tau=tau, time=0.0)


def remark_large(grid: Grid, n_freq: int, p=2, amplitude: float | None = None) -> StressField:
    """High-frequency stress bump of amplitude 1/N at lattice modes 2^N (1,1).

    The Fourier support is the intersection of the integer lattice with the
    closed unit-radius ball around +-2^N (1,1): the center plus its four axis
    neighbours, all at full weight, mirrored for a real field.  That support
    sits inside a single dyadic annulus, so each Besov norm of the family is
    an exact power of two times an N-independent profile norm: sup, L2 and
    block norms are all independent of N apart from the 1/N amplitude.

    All three tensor components carry the same scalar profile (the field is
    symmetric by construction).  ``p`` records the integrability exponent the
    family is calibrated against; the bump itself does not depend on it.
    """
    if n_freq < 1:
        raise ValueError(f"n_freq must be >= 1, got {n_freq}")
    if p not in (1, 2, np.inf):
        raise ValueError(f"only p in {{1, 2, inf}} is supported, got p={p}")
    # the data must survive the dealiased band or the first step erases it
    cut = grid.n // 3
    n_max = int(np.floor(np.log2(cut - 1))) if cut > 2 else 0
    if 2**n_freq + 1 > cut:
        raise ValueError(
            f"bump at 2^N (1,1) does not survive the dealiased band on n={grid.n}: "
            f"largest admissible N is {n_max}"
        )
    amp = 1.0 / n_freq if amplitude is None else float(amplitude)
    center = 2**n_freq
    coeffs = np.zeros((grid.n, grid.n), dtype=complex)
    for d1, d2 in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
        i1 = (center + d1) % grid.n
        i2 = (center + d2) % grid.n
        coeffs[i1, i2] += 0.5 * amp
        coeffs[(-center - d1) % grid.n, (-center - d2) % grid.n] += 0.5 * amp
    field = inverse_transform(SpectralScalar(grid, coeffs))
    samples = field.samples
    return StressField.from_arrays(grid, samples, samples.copy(), samples.copy())


@dataclass(frozen=True)
class InitialDataSpec:
    """Declarative recipe for an initial state, readable from experiment configs.

    kind "stream": divergence-free velocity only (zero stress).  With
    seed == 0 this is the steady cos*cos vortex at ``amplitude``; a nonzero
    seed draws a random stream polynomial with modes up to ``n_freq``.
    kind "small_family": budget-normalized localized data
    (uses eps0, seed, tau_scale).
    kind "remark_large": high-frequency stress bump, zero velocity
    (uses n_freq, amplitude).
    kind "scaled_family": dilation family (uses a, eps0).
    """

    kind: str
    amplitude: float = 1.0
    n_freq: int = 3
    a: float = 0.0
    eps0: float = 0.01
    seed: int = 0
    tau_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}; expected one of {DATA_KINDS}")
        if self.eps0 <= 0:
            raise ValueError(f"eps0 must be positive, got {self.eps0}")
        if self.n_freq < 1:
            raise ValueError(f"n_freq must be >= 1, got {self.n_freq}")
        if self.kind == "scaled_family" and self.a <= 0:
            raise ValueError("scaled_family requires a > 0")


def build_initial_state(grid: Grid, spec: InitialDataSpec) -> FlowState:
    """Materialize an InitialDataSpec on a grid."""
    if spec.kind == "stream":
        if spec.seed == 0:
            u = taylor_green(grid, spec.amplitude)
        else:
            u = random_stream(grid, spec.seed, spec.amplitude, max_mode=spec.n_freq)
        return FlowState(u=u, tau=zero_stress(grid), time=0.0)
    if spec.kind == "small_family":
        return small_family(grid, spec.eps0, seed=spec.seed, tau_scale=spec.tau_scale)
    if spec.kind == "remark_large":
        tau = remark_large(grid, spec.n_freq, amplitude=spec.amplitude)
        return FlowState(u=zero_velocity(grid), tau=tau, time=0.0)
    return scaled_family(grid, spec.a, spec.eps0)
