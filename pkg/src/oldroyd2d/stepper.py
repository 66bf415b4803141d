"""Integrating-factor RK4 time stepping for the velocity / stress system.

The stiff linear stress part ``eta * Lap - mu2`` (and the viscous term when
``nu > 0``) is applied exactly through exponential multipliers, so only the
advection, quadratic stress algebra and the mutual coupling are integrated
explicitly.  On the linear stress flow (velocity pinned at zero) a step
reproduces the exact semigroup to rounding; on smooth nonlinear states the
scheme self-converges at fourth order.

Steps are capped by an advective CFL limit, the final step is shortened to
land exactly on the requested end time, and a non-finite state after a step
raises :class:`BlowUpError` carrying the step index and a trace of recent
sup-norms, so a blow-up is a reportable outcome rather than a crash.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .model import FlowState, ModelParams, StressField, nonlinear_terms
from .spectral import Grid, ScalarField, VectorField, forward_transform

#: floor for the measured speed in the CFL formula, keeps dt finite at rest
SPEED_FLOOR = 1e-6


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping controls.

    Args:
        dt: nominal step size (upper bound; the CFL cap may shorten it).
        t_end: target time for :func:`advance_to`.
        cfl: advective Courant number in (0, 1].
        sample_every: observer cadence in steps for :func:`advance_to`.
        dealias: apply the 2/3-rule mask to the state after every step.
    """

    dt: float
    t_end: float
    cfl: float = 0.5
    sample_every: int = 1
    dealias: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"step size must satisfy dt > 0, got dt={self.dt}")
        if self.t_end < 0:
            raise ValueError(f"end time must satisfy t_end >= 0, got t_end={self.t_end}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"courant number must satisfy 0 < cfl <= 1, got cfl={self.cfl}")
        if self.sample_every < 1:
            raise ValueError(
                f"sample cadence must satisfy sample_every >= 1, got {self.sample_every}"
            )


class BlowUpError(RuntimeError):
    """Raised when the state leaves the finite range during integration."""

    def __init__(self, step_index: int, time: float, trace):
        self.step_index = step_index
        self.time = time
        self.trace = list(trace)
        super().__init__(
            f"non-finite state after step {step_index} at t={time:.6g}; "
            f"recent sup-norm trace {self.trace}"
        )


def semigroup_apply(f: ScalarField, t: float, eta: float = 1.0, mu2: float = 1.0) -> ScalarField:
    """Exact stress semigroup e^(t (eta Lap - mu2)) on one scalar component."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got t={t}")
    g = f.grid
    c = forward_transform(f).coeffs * np.exp(-t * (mu2 + eta * g.k_squared))
    n = g.n
    return ScalarField(g, _fft.ifft2(c * (n * n)).real)


class IntegratingFactor:
    """Cached exponential multipliers for the half and full RK substeps."""

    def __init__(self, grid: Grid, params: ModelParams, dt: float):
        self.grid = grid
        self.params = params
        self.dt = dt
        decay_u = params.nu * grid.k_squared_half
        decay_tau = params.mu2 + params.eta * grid.k_squared_half
        self.half_u = np.exp(-0.5 * dt * decay_u)
        self.full_u = np.exp(-dt * decay_u)
        self.half_tau = np.exp(-0.5 * dt * decay_tau)
        self.full_tau = np.exp(-dt * decay_tau)

    def scale_half(self, y: np.ndarray) -> np.ndarray:
        out = y.copy()
        out[:2] *= self.half_u
        out[2:] *= self.half_tau
        return out

    def scale_full(self, y: np.ndarray) -> np.ndarray:
        out = y.copy()
        out[:2] *= self.full_u
        out[2:] *= self.full_tau
        return out


class _Kernel:
    """Coefficient-space stepping engine shared by all driver loops."""

    def __init__(self, grid: Grid, params: ModelParams, cfg: StepperConfig):
        self.grid = grid
        self.params = params
        self.cfg = cfg
        self._factor: IntegratingFactor | None = None
        self.trace: deque = deque(maxlen=8)

    def factor(self, dt: float) -> IntegratingFactor:
        if self._factor is None or self._factor.dt != dt:
            self._factor = IntegratingFactor(self.grid, self.params, dt)
        return self._factor

    def rhs(self, y: np.ndarray) -> np.ndarray:
        return np.stack(nonlinear_terms(self.grid, self.params, *y))

    def sup_speed(self, y: np.ndarray) -> float:
        g = self.grid
        nn = g.n * g.n
        u1 = _fft.irfft2(y[0] * nn, s=(g.n, g.n))
        u2 = _fft.irfft2(y[1] * nn, s=(g.n, g.n))
        return float(np.hypot(u1, u2).max())

    def step(self, y: np.ndarray, dt: float, step_index: int, time_after: float) -> np.ndarray:
        fac = self.factor(dt)
        n1 = self.rhs(y)
        y2 = fac.scale_half(y + 0.5 * dt * n1)
        n2 = self.rhs(y2)
        y3 = fac.scale_half(y)
        y3 += 0.5 * dt * n2
        n3 = self.rhs(y3)
        y4 = fac.scale_full(y)
        y4 += dt * fac.scale_half(n3)
        n4 = self.rhs(y4)
        out = fac.scale_full(y + (dt / 6.0) * n1)
        out += (dt / 3.0) * fac.scale_half(n2 + n3)
        out += (dt / 6.0) * n4
        if self.cfg.dealias:
            out *= self.grid.dealias_mask_half
        out[:2] = _leray_rows(self.grid, out[0], out[1])
        if not np.isfinite(out).all():
            raise BlowUpError(step_index, time_after, self.trace)
        return out


def _leray_rows(grid: Grid, c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    ksq = grid.k_squared_half.copy()
    ksq[0, 0] = 1.0
    kdot = (grid.k1 * c1 + grid.k2_half * c2) / ksq
    kdot[0, 0] = 0.0
    return np.stack((c1 - grid.k1 * kdot, c2 - grid.k2_half * kdot))


def pack_state(state: FlowState, cfg: StepperConfig) -> np.ndarray:
    """Forward-transform a state into the (5, n, n//2+1) half-spectrum stack."""
    grid = state.grid
    nn = grid.n * grid.n
    fields = (state.u.u1, state.u.u2, state.tau.t11, state.tau.t12, state.tau.t22)
    y = np.stack([_fft.rfft2(f.samples) / nn for f in fields])
    if cfg.dealias:
        y *= grid.dealias_mask_half
    y[:2] = _leray_rows(grid, y[0], y[1])
    return y


def unpack_state(grid: Grid, y: np.ndarray, time: float) -> FlowState:
    nn = grid.n * grid.n
    samples = [_fft.irfft2(c * nn, s=(grid.n, grid.n)) for c in y]
    u = VectorField.from_arrays(grid, samples[0], samples[1])
    tau = StressField.from_arrays(grid, samples[2], samples[3], samples[4])
    return FlowState(u=u, tau=tau, time=time)


def cfl_dt(state: FlowState, cfg: StepperConfig) -> float:
    """Advective step limit cfl * dx / max(sup |u|, floor)."""
    u1, u2 = state.u.arrays
    speed = float(np.hypot(u1, u2).max())
    return cfg.cfl * state.grid.dx / max(speed, SPEED_FLOOR)


def step(state: FlowState, params: ModelParams, cfg: StepperConfig) -> FlowState:
    """One integrating-factor RK4 step of size min(cfg.dt, CFL limit)."""
    kernel = _Kernel(state.grid, params, cfg)
    y = pack_state(state, cfg)
    u1, u2 = state.u.arrays
    speed = float(np.hypot(u1, u2).max())
    dt = min(cfg.dt, cfg.cfl * state.grid.dx / max(speed, SPEED_FLOOR))
    kernel.trace.append((state.time, round(speed, 12)))
    y = kernel.step(y, dt, step_index=0, time_after=state.time + dt)
    return unpack_state(state.grid, y, state.time + dt)


def _invoke(observer, state: FlowState) -> None:
    if observer is None:
        return
    try:
        observer(state)
    except BlowUpError:
        raise
    except Exception as exc:  # surface which sample failed, then re-raise
        raise RuntimeError(f"observer failed at t={state.time:.6g}") from exc


def advance_to(
    state: FlowState,
    params: ModelParams,
    cfg: StepperConfig,
    observer=None,
    stats: dict | None = None,
) -> FlowState:
    """March the state to cfg.t_end, observing on the configured cadence.

    The observer (if given) is invoked on the initial state, every
    ``sample_every`` accepted steps, and on the exact final time; the last
    step is shortened so the end time is hit exactly.  A blow-up during a
    step propagates as :class:`BlowUpError`.  When ``stats`` is passed, the
    accepted step count is written into it under ``"steps"``.
    """
    grid = state.grid
    kernel = _Kernel(grid, params, cfg)
    y = pack_state(state, cfg)
    t = state.time
    if cfg.t_end < t:
        raise ValueError(f"cannot integrate backwards: t_end={cfg.t_end} < time={t}")
    _invoke(observer, unpack_state(grid, y, t))
    steps = 0
    last_observed = t
    try:
        while t < cfg.t_end:
            speed = kernel.sup_speed(y)
            limit = cfg.cfl * grid.dx / max(speed, SPEED_FLOOR)
            remaining = cfg.t_end - t
            dt = min(cfg.dt, limit, remaining)
            landing = dt >= remaining
            t_next = cfg.t_end if landing else t + dt
            kernel.trace.append((t, round(speed, 12)))
            y = kernel.step(y, remaining if landing else dt, steps, t_next)
            t = t_next
            steps += 1
            if steps % cfg.sample_every == 0 or t >= cfg.t_end:
                if t != last_observed:
                    _invoke(observer, unpack_state(grid, y, t))
                    last_observed = t
    finally:
        if stats is not None:
            stats["steps"] = steps
    return unpack_state(grid, y, t)


def advance_through_times(
    state: FlowState,
    params: ModelParams,
    cfg: StepperConfig,
    sample_times,
    observer=None,
    stats: dict | None = None,
) -> FlowState:
    """March the state through an explicit list of sample times.

    Every entry of ``sample_times`` is landed on exactly and observed, so two
    runs driven by the same list produce snapshots at identical times even
    when their interior step sizes differ.  The list must be increasing and
    start at or after the state's current time.
    """
    grid = state.grid
    kernel = _Kernel(grid, params, cfg)
    y = pack_state(state, cfg)
    t = state.time
    steps = 0
    previous = t
    try:
        for target in sample_times:
            target = float(target)
            if target < previous:
                raise ValueError(
                    f"sample times must be nondecreasing, got {target} after {previous}"
                )
            previous = target
            while t < target:
                speed = kernel.sup_speed(y)
                limit = cfg.cfl * grid.dx / max(speed, SPEED_FLOOR)
                remaining = target - t
                dt = min(cfg.dt, limit, remaining)
                landing = dt >= remaining
                kernel.trace.append((t, round(speed, 12)))
                y = kernel.step(
                    y, remaining if landing else dt, steps, target if landing else t + dt
                )
                t = target if landing else t + dt
                steps += 1
            _invoke(observer, unpack_state(grid, y, target))
    finally:
        if stats is not None:
            stats["steps"] = steps
    return unpack_state(grid, y, t)
