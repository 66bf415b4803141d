"""Norm time series, bound monitors, and rate estimation.

The series schema is fixed: one row per sample, one column per channel, in the
order of :data:`CHANNELS`.  A blow-up is recorded as a final row carrying the
literal token ``blowup`` in every channel; the series is frozen afterwards.
All fits are pure functions over the recorded arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bands import BesovSpec, DyadicPartition, aggregate_block_norms, joint_block_lp_norms
from .model import (
    FlowState,
    energy_identity_residual,
    pair_h1_norm,
    stress_l2_norm,
    stress_linf_norm,
    vorticity,
)
from .spectral import lp_norm

#: series channels in serialization order (after the leading time column)
CHANNELS = (
    "l2_u",
    "l2_tau",
    "linf_tau",
    "h1_utau",
    "b0inf1_tau",
    "b0inf1_w",
    "linf_w",
    "int_b2inf1_tau",
    "energy_residual",
)

BLOWUP_TOKEN = "blowup"


class TimeSeries:
    """Append-only record of the monitored norms along a run."""

    def __init__(self):
        self._times: list[float] = []
        self._channels: dict[str, list[float]] = {name: [] for name in CHANNELS}
        self.blowup_time: float | None = None
        # running-integral state for the left-endpoint quadrature
        self._last_b2: float = 0.0

    def __len__(self) -> int:
        return len(self._times)

    @property
    def frozen(self) -> bool:
        return self.blowup_time is not None

    @property
    def times(self) -> np.ndarray:
        return np.array(self._times)

    def channel(self, name: str) -> np.ndarray:
        if name not in self._channels:
            raise KeyError(f"unknown channel {name!r}; expected one of {CHANNELS}")
        return np.array(self._channels[name])

    def append(self, t: float, values: dict) -> None:
        if self.frozen:
            raise RuntimeError("series is frozen after a recorded blow-up")
        if self._times and t <= self._times[-1]:
            raise ValueError(
                f"sample times must be strictly increasing: got t={t} after {self._times[-1]}"
            )
        missing = set(CHANNELS) - set(values)
        if missing:
            raise ValueError(f"missing channels: {sorted(missing)}")
        self._times.append(float(t))
        for name in CHANNELS:
            self._channels[name].append(float(values[name]))

    def mark_blowup(self, t: float) -> None:
        if self.frozen:
            raise RuntimeError("series is frozen after a recorded blow-up")
        self.blowup_time = float(t)

    def to_csv(self, path) -> None:
        lines = ["t," + ",".join(CHANNELS)]
        for i, t in enumerate(self._times):
            row = [repr(t)] + [repr(self._channels[name][i]) for name in CHANNELS]
            lines.append(",".join(row))
        if self.frozen:
            lines.append(
                ",".join([repr(self.blowup_time)] + [BLOWUP_TOKEN] * len(CHANNELS))
            )
        with open(path, "w") as handle:
            handle.write("\n".join(lines) + "\n")

    @classmethod
    def read_csv(cls, path) -> "TimeSeries":
        with open(path) as handle:
            lines = [line.strip() for line in handle if line.strip()]
        header = "t," + ",".join(CHANNELS)
        if not lines or lines[0] != header:
            raise ValueError(f"unexpected series header in {path}")
        series = cls()
        for line in lines[1:]:
            cells = line.split(",")
            if cells[1] == BLOWUP_TOKEN:
                series.mark_blowup(float(cells[0]))
                break
            series.append(
                float(cells[0]),
                {name: float(cells[1 + i]) for i, name in enumerate(CHANNELS)},
            )
        return series


def kinetic_energy(state: FlowState) -> float:
    """||u||_L2^2."""
    return lp_norm(state.u.u1, 2) ** 2 + lp_norm(state.u.u2, 2) ** 2


def enstrophy(state: FlowState) -> float:
    """||curl u||_L2^2."""
    return lp_norm(vorticity(state.u), 2) ** 2


def record(state: FlowState, part: DyadicPartition, series: TimeSeries) -> TimeSeries:
    """Append every channel for the given state.

    The two stress Besov channels share one pass of block sup-norms; the
    running integral of the second-order norm uses left-endpoint quadrature,
    so the channel at the first sample is zero.
    """
    if state.grid is not part.grid and (
        state.grid.n != part.grid.n or state.grid.length != part.grid.length
    ):
        raise ValueError("state grid does not match the partition grid")
    j_values = np.arange(-1, part.j_max + 1)
    tau = state.tau
    if any(np.any(comp.samples) for comp in (tau.t11, tau.t12, tau.t22)):
        tau_blocks = joint_block_lp_norms(
            (tau.t11, tau.t12, tau.t22), (1.0, 2.0, 1.0), part, np.inf
        )
    else:
        tau_blocks = np.zeros(part.j_max + 2)
    b0_tau = aggregate_block_norms(tau_blocks, BesovSpec(0.0, np.inf, 1), j_values)
    b2_tau = aggregate_block_norms(tau_blocks, BesovSpec(2.0, np.inf, 1), j_values)
    w = vorticity(state.u)
    if np.any(w.samples):
        w_blocks = joint_block_lp_norms((w,), (1.0,), part, np.inf)
    else:
        w_blocks = np.zeros(part.j_max + 2)
    b0_w = aggregate_block_norms(w_blocks, BesovSpec(0.0, np.inf, 1), j_values)

    if len(series) == 0:
        integral = 0.0
    else:
        integral = series.channel("int_b2inf1_tau")[-1] + series._last_b2 * (
            state.time - series.times[-1]
        )
    series.append(
        state.time,
        {
            "l2_u": np.sqrt(kinetic_energy(state)),
            "l2_tau": stress_l2_norm(tau),
            "linf_tau": stress_linf_norm(tau),
            "h1_utau": pair_h1_norm(state),
            "b0inf1_tau": b0_tau,
            "b0inf1_w": b0_w,
            "linf_w": lp_norm(w, np.inf),
            "int_b2inf1_tau": integral,
            "energy_residual": energy_identity_residual(state),
        },
    )
    series._last_b2 = b2_tau
    return series


@dataclass(frozen=True)
class RateFit:
    """Fitted decay template over a window of a series channel."""

    template: str
    rate: float
    scale: float
    window: tuple[float, float]
    residual: float
    verdict: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "template": self.template,
            "rate": self.rate,
            "scale": self.scale,
            "window": list(self.window),
            "residual": self.residual,
            "verdict": self.verdict,
        }


def _window_values(series: TimeSeries, channel: str, window, positive=True):
    times = series.times
    values = series.channel(channel)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    t0, t1 = window
    if t0 > t1 or t0 < times[0] - 1e-9 or t1 > times[-1] + 1e-9:
        raise ValueError(f"window {window} is not contained in the series times")
    mask = (times >= t0 - 1e-12) & (times <= t1 + 1e-12)
    if mask.sum() < 2:
        raise ValueError(f"window {window} contains fewer than two samples")
    times, values = times[mask], values[mask]
    if positive and np.any(values <= 0):
        bad = int(np.argmax(values <= 0))
        raise ValueError(
            f"channel {channel!r} must be positive on the window; "
            f"first nonpositive value at t={times[bad]:g}"
        )
    return times, values, (float(times[0]), float(times[-1]))


def fit_exponential(series: TimeSeries, channel: str, window=None) -> RateFit:
    """Least-squares line on (t, log value); rate is minus the slope."""
    times, values, window = _window_values(series, channel, window)
    design = np.column_stack([times, np.ones_like(times)])
    (slope, intercept), *_ = np.linalg.lstsq(design, np.log(values), rcond=None)
    predicted = design @ (slope, intercept)
    residual = float(np.sqrt(np.mean((np.log(values) - predicted) ** 2)))
    return RateFit(
        template="exponential",
        rate=float(-slope),
        scale=float(np.exp(intercept)),
        window=window,
        residual=residual,
    )


def fit_power_envelope(
    series: TimeSeries,
    channel: str,
    a: float,
    window=None,
    envelope_ratio: float = 1.2,
) -> RateFit:
    """One-sided check of value(t) <= C [a(1+t)]^(-1/2).

    M(t) = value(t) * [a(1+t)]^(1/2) is flat when the bound is saturated;
    scale is sup M(t)/M(t0) and the verdict is "held" iff that ratio stays
    within ``envelope_ratio``.  The reported rate is the log-log slope of
    value against (1+t), for comparison with the -1/2 template.
    """
    if a <= 0:
        raise ValueError(f"envelope requires a > 0, got {a}")
    times, values, window = _window_values(series, channel, window)
    envelope = values * np.sqrt(a * (1.0 + times))
    scale = float(envelope.max() / envelope[0])
    design = np.column_stack([np.log(1.0 + times), np.ones_like(times)])
    coeffs, *_ = np.linalg.lstsq(design, np.log(values), rcond=None)
    slope = coeffs[0]
    predicted = design @ coeffs
    residual = float(np.sqrt(np.mean((np.log(values) - predicted) ** 2)))
    return RateFit(
        template="power_law",
        rate=float(slope),
        scale=scale,
        window=window,
        residual=residual,
        verdict="held" if scale <= envelope_ratio else "violated",
    )


def double_exponential_consistency(
    series: TimeSeries, channel: str, window=None, rate_bound: float = 5.0
) -> RateFit:
    """One-sided growth monitor: is the channel below C exp(exp(c t))?

    Reports the smallest c such that value(t) <= v0 * exp(exp(c (t-t0)) - 1)
    on the window; verdict "consistent" iff c <= rate_bound.  Decaying or
    bounded channels report c = 0.  No two-parameter fit is attempted.
    """
    times, values, window = _window_values(series, channel, window)
    v0 = values[0]
    rate = 0.0
    for t, v in zip(times[1:], values[1:]):
        excess = np.log(v / v0)
        if excess > 0:
            rate = max(rate, float(np.log1p(excess) / (t - times[0])))
    return RateFit(
        template="double_exponential_bound",
        rate=rate,
        scale=float(v0),
        window=window,
        residual=0.0,
        verdict="consistent" if rate <= rate_bound else "inconsistent",
    )


@dataclass
class SnapshotSeries:
    """Full-resolution state snapshots at sample times (for run-pair metrics)."""

    times: list = field(default_factory=list)
    u_fields: list = field(default_factory=list)
    tau_fields: list = field(default_factory=list)

    def add(self, state: FlowState) -> None:
        self.times.append(float(state.time))
        u1, u2 = state.u.arrays
        self.u_fields.append(np.stack([u1, u2]).copy())
        t11, t12, t22 = state.tau.arrays
        self.tau_fields.append(np.stack([t11, t12, t22]).copy())


def _check_aligned(a: SnapshotSeries, b: SnapshotSeries) -> None:
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, atol=1e-12):
        raise ValueError("snapshot series do not share sampling times")


def gap(a: SnapshotSeries, b: SnapshotSeries, grid) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise-in-time L2 distance of the velocity fields of two runs."""
    _check_aligned(a, b)
    values = []
    for ua, ub in zip(a.u_fields, b.u_fields):
        diff = ua - ub
        values.append(float(np.sqrt((diff * diff).sum())) * grid.dx)
    return np.array(a.times), np.array(values)


def sup_state_distance(a: SnapshotSeries, b: SnapshotSeries, grid) -> float:
    """sup_t ||u_a - u_b||_L2 + sup_t ||tau_a - tau_b||_L2 (off-diagonal doubled)."""
    _check_aligned(a, b)
    du = 0.0
    dtau = 0.0
    for ua, ub in zip(a.u_fields, b.u_fields):
        diff = ua - ub
        du = max(du, float(np.sqrt((diff * diff).sum())) * grid.dx)
    for ta, tb in zip(a.tau_fields, b.tau_fields):
        diff = ta - tb
        sq = (diff[0] ** 2 + 2.0 * diff[1] ** 2 + diff[2] ** 2).sum()
        dtau = max(dtau, float(np.sqrt(sq)) * grid.dx)
    return du + dtau


@dataclass(frozen=True)
class BootstrapMonitor:
    """Per-sample smallness flags for the two continuation quantities."""

    delta: float
    times: np.ndarray
    u_ok: np.ndarray
    tau_ok: np.ndarray
    blown_up: bool

    @property
    def closed(self) -> bool:
        return (not self.blown_up) and bool(self.u_ok.all()) and bool(self.tau_ok.all())


def bootstrap_check(series: TimeSeries, delta: float) -> BootstrapMonitor:
    """Flags: ||u||_L2 <= delta, and running sup of the stress block norm plus
    the running second-order integral <= delta, at every recorded time."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    times = series.times
    l2_u = series.channel("l2_u")
    b0 = series.channel("b0inf1_tau")
    running_sup = np.maximum.accumulate(b0) if len(b0) else b0
    combined = running_sup + series.channel("int_b2inf1_tau")
    return BootstrapMonitor(
        delta=delta,
        times=times,
        u_ok=l2_u <= delta,
        tau_ok=combined <= delta,
        blown_up=series.frozen,
    )
