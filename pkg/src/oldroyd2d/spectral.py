"""Periodic pseudo-spectral building blocks on the square torus [0, L]^2.

Fields are sampled on a uniform n x n grid and represented either by their
point values (``ScalarField``) or by their discrete Fourier coefficients
(``SpectralScalar``).  Coefficients are normalised so that ``coeffs[0, 0]``
is the mean of the field; with this convention Parseval reads

    ||f||_L2^2 = L^2 * sum_k |c_k|^2.

Derivatives act as multiplication by ``(i k)^order`` with physical
wavenumbers ``k in (2*pi/L) * Z^2``, and products of fields are kept
alias-free with the standard 2/3-rule mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _fft


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L]^2.

    Args:
        n: points per dimension (even, >= 16).
        length: box side L > 0.
    """

    n: int
    length: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 16, got n={self.n}")
        if not self.length > 0:
            raise ValueError(f"box length must be positive, got length={self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def nyquist(self) -> float:
        """Largest resolved axis wavenumber (n/2) * (2*pi/L)."""
        return (self.n // 2) * (2.0 * np.pi / self.length)

    @cached_property
    def x(self) -> np.ndarray:
        """1-D sample coordinates, shape (n,)."""
        return self.length * np.arange(self.n) / self.n

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Sample coordinates as (X, Y) arrays of shape (n, n), 'ij' indexed."""
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    @cached_property
    def k1(self) -> np.ndarray:
        """Wavenumbers along the first axis, shape (n, 1)."""
        k = 2.0 * np.pi / self.length * _fft.fftfreq(self.n, d=1.0 / self.n)
        return k[:, None]

    @cached_property
    def k2(self) -> np.ndarray:
        """Wavenumbers along the second axis, shape (1, n)."""
        return self.k1.reshape(1, self.n)

    @cached_property
    def k_squared(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True for modes with max(|k1|,|k2|) <= (2/3) k_nyq."""
        cut = (2.0 / 3.0) * self.nyquist
        return (np.abs(self.k1) <= cut) & (np.abs(self.k2) <= cut)

    # -- half-spectrum layout used with real-input transforms (rfft2) --------
    # Real fields are fully determined by the columns 0 .. n/2 of their
    # coefficient array; the stepping kernel works in that layout to halve
    # both the transform and the elementwise cost.

    @property
    def half_width(self) -> int:
        """Columns stored by real-input transforms: n // 2 + 1."""
        return self.n // 2 + 1

    @cached_property
    def k2_half(self) -> np.ndarray:
        """Second-axis wavenumbers in the half-spectrum layout, shape (1, n//2+1)."""
        k = 2.0 * np.pi / self.length * _fft.rfftfreq(self.n, d=1.0 / self.n)
        return k[None, :]

    @cached_property
    def k_squared_half(self) -> np.ndarray:
        return self.k1**2 + self.k2_half**2

    @cached_property
    def dealias_mask_half(self) -> np.ndarray:
        cut = (2.0 / 3.0) * self.nyquist
        return (np.abs(self.k1) <= cut) & (np.abs(self.k2_half) <= cut)


@dataclass(eq=False)
class ScalarField:
    """Real scalar samples on a grid, shape (n, n)."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"samples shape {self.samples.shape} does not match grid n={self.grid.n}"
            )


@dataclass(eq=False)
class SpectralScalar:
    """Fourier coefficients of a real scalar, shape (n, n), mean at [0, 0]."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} does not match grid n={self.grid.n}"
            )


@dataclass(eq=False)
class VectorField:
    """Velocity-style vector field with components (u1, u2)."""

    grid: Grid
    u1: ScalarField
    u2: ScalarField

    @classmethod
    def from_arrays(cls, grid: Grid, u1: np.ndarray, u2: np.ndarray) -> "VectorField":
        return cls(grid, ScalarField(grid, u1), ScalarField(grid, u2))

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.u1.samples, self.u2.samples


def _require_finite(values: np.ndarray, label: str) -> None:
    finite = np.isfinite(values)
    if not finite.all():
        idx = tuple(int(i) for i in np.argwhere(~finite)[0])
        raise ValueError(f"{label} contains a non-finite entry at index {idx}")


def forward_transform(field: ScalarField) -> SpectralScalar:
    """DFT of a scalar field, normalised so coeffs[0, 0] is the mean.

    Raises:
        ValueError: if the samples contain NaN/Inf (names the offending index).
    """
    _require_finite(field.samples, "samples")
    n = field.grid.n
    return SpectralScalar(field.grid, _fft.fft2(field.samples) / (n * n))


def inverse_transform(spec: SpectralScalar) -> ScalarField:
    """Inverse DFT back to point samples (real part; input should be Hermitian)."""
    n = spec.grid.n
    return ScalarField(spec.grid, _fft.ifft2(spec.coeffs * (n * n)).real)


def hermitian_defect(spec: SpectralScalar) -> float:
    """Max |c(-k) - conj(c(k))|, normalised by max |c|; 0 for real fields."""
    c = spec.coeffs
    scale = np.abs(c).max()
    if scale == 0.0:
        return 0.0
    mirrored = np.conj(c[np.ix_(-np.arange(c.shape[0]) % c.shape[0],
                                -np.arange(c.shape[1]) % c.shape[1])])
    return float(np.abs(c - mirrored).max() / scale)


def derivative(spec: SpectralScalar, axis: int, order: int = 1) -> SpectralScalar:
    """Spectral partial derivative (i k_axis)^order.

    Args:
        spec: coefficients to differentiate.
        axis: 1 for the first coordinate, 2 for the second.
        order: derivative order, 0..4 (order 0 is the identity).
    """
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    if not 0 <= order <= 4:
        raise ValueError(f"derivative order must be in 0..4, got {order}")
    k = spec.grid.k1 if axis == 1 else spec.grid.k2
    return SpectralScalar(spec.grid, spec.coeffs * (1j * k) ** order)


def dealias(spec: SpectralScalar) -> SpectralScalar:
    """Zero all modes with max(|k1|, |k2|) above two thirds of Nyquist."""
    return SpectralScalar(spec.grid, spec.coeffs * spec.grid.dealias_mask)


def leray_project(u: VectorField) -> VectorField:
    """Project a vector field onto its divergence-free part.

    In Fourier space u_hat <- u_hat - k (k . u_hat) / |k|^2; the zero mode is
    left untouched.  Applying the projection twice gives the same field.
    """
    grid = u.grid
    c1 = forward_transform(u.u1).coeffs
    c2 = forward_transform(u.u2).coeffs
    ksq = grid.k_squared.copy()
    ksq[0, 0] = 1.0  # zero mode excluded from the projection
    kdotu = (grid.k1 * c1 + grid.k2 * c2) / ksq
    kdotu[0, 0] = 0.0
    c1 = c1 - grid.k1 * kdotu
    c2 = c2 - grid.k2 * kdotu
    return VectorField(
        grid,
        inverse_transform(SpectralScalar(grid, c1)),
        inverse_transform(SpectralScalar(grid, c2)),
    )


def divergence(u: VectorField) -> ScalarField:
    """Spectral divergence d1 u1 + d2 u2."""
    c1 = derivative(forward_transform(u.u1), axis=1)
    c2 = derivative(forward_transform(u.u2), axis=2)
    return inverse_transform(SpectralScalar(u.grid, c1.coeffs + c2.coeffs))


def lp_norm(field: ScalarField, p) -> float:
    """Lebesgue norm over the torus for p in {1, 2, inf}.

    L1 and L2 use the equal-weight quadrature (dx^2 per cell); Linf is the
    max over samples.
    """
    f = field.samples
    dx2 = field.grid.dx**2
    if p == 1:
        return float(np.sum(np.abs(f)) * dx2)
    if p == 2:
        return float(np.sqrt(np.sum(f * f) * dx2))
    if p == np.inf or p == "inf":
        return float(np.abs(f).max())
    raise ValueError(f"only p in {{1, 2, inf}} is supported, got p={p}")


def l2_norm_spectral(spec: SpectralScalar) -> float:
    """L2 norm evaluated on coefficients (Parseval)."""
    L = spec.grid.length
    return float(L * np.sqrt(np.sum(np.abs(spec.coeffs) ** 2)))


def inverse_laplacian(spec: SpectralScalar) -> SpectralScalar:
    """Solve -Laplace(phi) = f spectrally for a zero-mean right-hand side.

    Raises:
        ValueError: if the mean coefficient is not (numerically) zero; the
            message reports the offending mean value.
    """
    c = spec.coeffs
    scale = max(1.0, float(np.abs(c).max()))
    mean = c[0, 0]
    if abs(mean) > 1e-12 * scale:
        raise ValueError(
            f"inverse Laplacian requires a zero-mean field, got mean coefficient {mean}"
        )
    ksq = spec.grid.k_squared.copy()
    ksq[0, 0] = 1.0
    out = c / ksq
    out[0, 0] = 0.0
    return SpectralScalar(spec.grid, out)
