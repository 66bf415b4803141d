"""Incompressible Oldroyd-B dynamics on the torus: fields and right-hand sides.

The state couples a divergence-free velocity ``u`` with a symmetric extra
stress ``tau`` (components t11, t12, t22):

    du/dt + (u . grad) u + grad p = mu1 * div tau + nu * Lap u,   div u = 0,
    dtau/dt + (u . grad) tau + Q(grad u, tau) = a * D(u) + eta * Lap tau - mu2 * tau,

with ``D`` the symmetric and ``Omega`` the antisymmetric part of the velocity
gradient and ``Q(grad u, tau) = tau Omega - Omega tau + b (D tau + tau D)``.
This module provides the pointwise tensor algebra, the dealiased nonlinear
right-hand sides (the stiff linear stress part ``eta Lap - mu2`` is left to
the integrator's exponential factor), and the discrete energy-exchange
identity used as a consistency monitor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .spectral import (
    Grid,
    ScalarField,
    SpectralScalar,
    VectorField,
    derivative,
    forward_transform,
    inverse_transform,
)


@dataclass(frozen=True)
class ModelParams:
    """Physical coefficients. Defaults give the inviscid, unit-relaxation model.

    Args:
        a: coupling of the velocity gradient into the stress, >= 0.
        b: slip parameter in the quadratic stress term, in [-1, 1].
        nu: kinematic viscosity, >= 0 (default 0: inviscid velocity).
        eta: stress diffusivity, > 0.
        mu1: stress feedback coefficient in the velocity equation.
        mu2: stress relaxation rate, > 0.
    """

    a: float = 0.0
    b: float = 0.0
    nu: float = 0.0
    eta: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"coupling must satisfy a >= 0, got a={self.a}")
        if not -1.0 <= self.b <= 1.0:
            raise ValueError(f"slip parameter must satisfy b in [-1, 1], got b={self.b}")
        if self.nu < 0:
            raise ValueError(f"viscosity must satisfy nu >= 0, got nu={self.nu}")
        if not self.eta > 0:
            raise ValueError(f"stress diffusivity must satisfy eta > 0, got eta={self.eta}")
        if not self.mu2 > 0:
            raise ValueError(f"relaxation rate must satisfy mu2 > 0, got mu2={self.mu2}")


@dataclass(eq=False)
class StressField:
    """Symmetric 2x2 tensor field stored by its three distinct components."""

    grid: Grid
    t11: ScalarField
    t12: ScalarField
    t22: ScalarField

    @classmethod
    def from_arrays(cls, grid: Grid, t11, t12, t22) -> "StressField":
        return cls(grid, ScalarField(grid, t11), ScalarField(grid, t12), ScalarField(grid, t22))

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.t11.samples, self.t12.samples, self.t22.samples


@dataclass(eq=False)
class FlowState:
    """Velocity / stress pair at one instant."""

    u: VectorField
    tau: StressField
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u.grid


# ---------------------------------------------------------------------------
# velocity-gradient derived fields


def _gradient_arrays(u: VectorField) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(d1 u1, d2 u1, d1 u2, d2 u2) as sample arrays."""
    g = u.grid
    out = []
    for comp in (u.u1, u.u2):
        c = forward_transform(comp)
        out.append(inverse_transform(derivative(c, axis=1)).samples)
        out.append(inverse_transform(derivative(c, axis=2)).samples)
    return tuple(out)


def deformation(u: VectorField) -> StressField:
    """Symmetric part of the velocity gradient, D(u) = (grad u + grad u^T) / 2."""
    d11, d12a, d21a, d22 = _gradient_arrays(u)
    return StressField.from_arrays(u.grid, d11, 0.5 * (d12a + d21a), d22)


def rotation(u: VectorField) -> ScalarField:
    """Antisymmetric part of the velocity gradient: omega_12 = (d2 u1 - d1 u2) / 2."""
    _, d2u1, d1u2, _ = _gradient_arrays(u)
    return ScalarField(u.grid, 0.5 * (d2u1 - d1u2))


def vorticity(u: VectorField) -> ScalarField:
    """Scalar curl w = d1 u2 - d2 u1 (equal to -2 * omega_12)."""
    _, d2u1, d1u2, _ = _gradient_arrays(u)
    return ScalarField(u.grid, d1u2 - d2u1)


def _q_arrays(omega, d11, d12, d22, t11, t12, t22, b):
    """Pointwise Q = tau Omega - Omega tau + b (D tau + tau D) for 2x2 tensors."""
    q11 = -2.0 * omega * t12 + 2.0 * b * (d11 * t11 + d12 * t12)
    q12 = omega * (t11 - t22) + b * (d12 * (t11 + t22) + t12 * (d11 + d22))
    q22 = 2.0 * omega * t12 + 2.0 * b * (d12 * t12 + d22 * t22)
    return q11, q12, q22


def q_bilinear(u: VectorField, tau: StressField, b: float) -> StressField:
    """Quadratic stress term Q(grad u, tau); symmetric whenever tau is."""
    d11, d2u1, d1u2, d22 = _gradient_arrays(u)
    d12 = 0.5 * (d2u1 + d1u2)
    omega = 0.5 * (d2u1 - d1u2)
    t11, t12, t22 = tau.arrays
    return StressField.from_arrays(u.grid, *_q_arrays(omega, d11, d12, d22, t11, t12, t22, b))


def stress_divergence(tau: StressField) -> VectorField:
    """Row-wise divergence (d1 t11 + d2 t12, d1 t12 + d2 t22)."""
    g = tau.grid
    c11 = forward_transform(tau.t11).coeffs
    c12 = forward_transform(tau.t12).coeffs
    c22 = forward_transform(tau.t22).coeffs
    r1 = 1j * g.k1 * c11 + 1j * g.k2 * c12
    r2 = 1j * g.k1 * c12 + 1j * g.k2 * c22
    return VectorField(
        g,
        inverse_transform(SpectralScalar(g, r1)),
        inverse_transform(SpectralScalar(g, r2)),
    )


# ---------------------------------------------------------------------------
# shared nonlinear kernel on coefficient arrays


def nonlinear_terms(
    grid: Grid,
    params: ModelParams,
    cu1: np.ndarray,
    cu2: np.ndarray,
    ct11: np.ndarray,
    ct12: np.ndarray,
    ct22: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Dealiased nonlinear right-hand sides on half-spectrum coefficients.

    The five inputs and outputs are ``(n, n//2 + 1)`` arrays in the
    real-transform layout (``rfft2(samples) / n**2``).  Returns the
    Leray-projected velocity tendency (advection plus stress feedback,
    without the viscous term) and the stress tendency (advection, quadratic
    term and coupling, without the stiff ``eta Lap - mu2`` part).  The
    inputs are assumed band-limited; all pointwise products are formed in
    physical space and masked with the 2/3 rule on the way back.
    """
    n = grid.n
    nn = n * n
    k1, k2 = grid.k1, grid.k2_half
    mask = grid.dealias_mask_half

    def to_phys(c):
        return _fft.irfft2(c * nn, s=(n, n))

    u1 = to_phys(cu1)
    u2 = to_phys(cu2)
    d1u1 = to_phys(1j * k1 * cu1)
    d2u1 = to_phys(1j * k2 * cu1)
    d1u2 = to_phys(1j * k1 * cu2)
    d2u2 = to_phys(1j * k2 * cu2)
    t11 = to_phys(ct11)
    t12 = to_phys(ct12)
    t22 = to_phys(ct22)

    def product_coeffs(samples):
        return _fft.rfft2(samples) / nn * mask

    adv_u1 = product_coeffs(u1 * d1u1 + u2 * d2u1)
    adv_u2 = product_coeffs(u1 * d1u2 + u2 * d2u2)

    adv_t = [
        product_coeffs(u1 * to_phys(1j * k1 * ct) + u2 * to_phys(1j * k2 * ct))
        for ct in (ct11, ct12, ct22)
    ]

    omega = 0.5 * (d2u1 - d1u2)
    d12 = 0.5 * (d2u1 + d1u2)
    q11, q12, q22 = _q_arrays(omega, d1u1, d12, d2u2, t11, t12, t22, params.b)
    cq = [product_coeffs(q) for q in (q11, q12, q22)]

    # linear terms stay in coefficient space: stress feedback on u and the
    # symmetric-gradient coupling a * D(u) on tau
    div1 = 1j * k1 * ct11 + 1j * k2 * ct12
    div2 = 1j * k1 * ct12 + 1j * k2 * ct22
    nu1 = -adv_u1 + params.mu1 * div1
    nu2 = -adv_u2 + params.mu1 * div2

    ksq = grid.k_squared_half.copy()
    ksq[0, 0] = 1.0
    kdot = (k1 * nu1 + k2 * nu2) / ksq
    kdot[0, 0] = 0.0
    nu1 = nu1 - k1 * kdot
    nu2 = nu2 - k2 * kdot

    cd11 = 1j * k1 * cu1
    cd12 = 0.5j * (k2 * cu1 + k1 * cu2)
    cd22 = 1j * k2 * cu2
    nt11 = -adv_t[0] - cq[0] + params.a * cd11
    nt12 = -adv_t[1] - cq[1] + params.a * cd12
    nt22 = -adv_t[2] - cq[2] + params.a * cd22
    return nu1, nu2, nt11, nt12, nt22


def _state_half_coeffs(state: FlowState) -> tuple[np.ndarray, ...]:
    nn = state.grid.n * state.grid.n
    fields = (state.u.u1, state.u.u2, state.tau.t11, state.tau.t12, state.tau.t22)
    return tuple(_fft.rfft2(f.samples) / nn for f in fields)


def velocity_rhs(state: FlowState, params: ModelParams) -> VectorField:
    """Full velocity tendency: Leray-projected advection, stress feedback and
    viscosity."""
    g = state.grid
    nn = g.n * g.n
    cu1, cu2, ct11, ct12, ct22 = _state_half_coeffs(state)
    nu1, nu2, *_ = nonlinear_terms(g, params, cu1, cu2, ct11, ct12, ct22)
    if params.nu > 0:
        nu1 = nu1 - params.nu * g.k_squared_half * cu1
        nu2 = nu2 - params.nu * g.k_squared_half * cu2
    return VectorField.from_arrays(
        g,
        _fft.irfft2(nu1 * nn, s=(g.n, g.n)),
        _fft.irfft2(nu2 * nn, s=(g.n, g.n)),
    )


def stress_rhs_nonlinear(state: FlowState, params: ModelParams) -> StressField:
    """Stress tendency without the stiff linear part: advection, quadratic
    term and velocity-gradient coupling."""
    g = state.grid
    nn = g.n * g.n
    cu1, cu2, ct11, ct12, ct22 = _state_half_coeffs(state)
    _, _, nt11, nt12, nt22 = nonlinear_terms(g, params, cu1, cu2, ct11, ct12, ct22)
    return StressField.from_arrays(
        g,
        _fft.irfft2(nt11 * nn, s=(g.n, g.n)),
        _fft.irfft2(nt12 * nn, s=(g.n, g.n)),
        _fft.irfft2(nt22 * nn, s=(g.n, g.n)),
    )


# ---------------------------------------------------------------------------
# norms and monitors


def stress_l2_norm(tau: StressField) -> float:
    """Frobenius L2 norm; the off-diagonal component counts twice."""
    t11, t12, t22 = tau.arrays
    dx2 = tau.grid.dx**2
    return float(np.sqrt(np.sum(t11 * t11 + 2.0 * t12 * t12 + t22 * t22) * dx2))


def stress_linf_norm(tau: StressField) -> float:
    """Sup over the grid of the pointwise Frobenius magnitude."""
    t11, t12, t22 = tau.arrays
    return float(np.sqrt(t11 * t11 + 2.0 * t12 * t12 + t22 * t22).max())


def pair_h1_norm(state: FlowState) -> float:
    """H1 norm of the joint (u, tau) state, evaluated spectrally."""
    g = state.grid
    weight = 1.0 + g.k_squared
    total = 0.0
    for f, mult in (
        (state.u.u1, 1.0),
        (state.u.u2, 1.0),
        (state.tau.t11, 1.0),
        (state.tau.t12, 2.0),
        (state.tau.t22, 1.0),
    ):
        c = forward_transform(f).coeffs
        total += mult * float(np.sum(weight * np.abs(c) ** 2))
    return float(g.length * np.sqrt(total))


def energy_identity_residual(state: FlowState) -> float:
    """Discrete check of integral(div tau . u) + integral(D(u) : tau) = 0.

    Both integrals are evaluated with the grid quadrature; spectral
    integration by parts makes them cancel to rounding, so the relative
    residual should sit at machine precision for any state.
    """
    g = state.grid
    dx2 = g.dx**2
    div = stress_divergence(state.tau)
    u1, u2 = state.u.arrays
    term1 = np.sum(div.u1.samples * u1 + div.u2.samples * u2) * dx2
    t11, t12, t22 = state.tau.arrays
    g11, g21, g12, g22 = _gradient_arrays(state.u)
    d11, d12, d22 = g11, 0.5 * (g21 + g12), g22
    term2 = np.sum(d11 * t11 + 2.0 * d12 * t12 + d22 * t22) * dx2
    grad_scale = float(
        np.sqrt(np.sum(g11 * g11 + g21 * g21 + g12 * g12 + g22 * g22) * dx2)
    )
    scale = stress_l2_norm(state.tau) * grad_scale + np.finfo(float).eps
    return float(abs(term1 + term2) / scale)
