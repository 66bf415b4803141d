"""Named experiments over the solver: configuration, runs, verdicts, reports.

Each scenario is a reproducible recipe: a grid, model parameters, an
initial-data spec, stepper controls and thresholds, all serializable as one
JSON document.  A run produces a :class:`RunReport` whose verdicts each cite
the emitted artifact (series CSV or table) they were computed from, so every
number in a report can be recomputed offline.  Paired scenarios drive both
runs through one shared sampling schedule, which makes their snapshot times
match exactly.
"""

from __future__ import annotations

import dataclasses
import json
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bands import (
    bernstein_check,
    block_semigroup_check,
    build_partition,
    dyadic_block,
    paraproduct_split,
    partition_sum,
)
from .diagnostics import (
    SnapshotSeries,
    TimeSeries,
    bootstrap_check,
    double_exponential_consistency,
    enstrophy,
    fit_exponential,
    fit_power_envelope,
    gap,
    kinetic_energy,
    record,
    sup_state_distance,
)
from .initial_data import InitialDataSpec, build_initial_state, taylor_green, zero_stress
from .model import FlowState, ModelParams, stress_l2_norm
from .spectral import Grid, ScalarField, forward_transform
from .stepper import BlowUpError, StepperConfig, advance_through_times, advance_to

SCENARIOS = (
    "euler_regression",
    "lp_selftest",
    "decay_a0",
    "decay_positive_a",
    "instability_gap",
    "local_convergence",
)

#: data family each scenario expects (lp_selftest only uses the seed)
_EXPECTED_KIND = {
    "euler_regression": "stream",
    "decay_a0": "small_family",
    "decay_positive_a": "small_family",
    "instability_gap": "scaled_family",
    "local_convergence": "small_family",
}

#: relative drift allowed for the quadratic invariants of the stress-free run
EULER_DRIFT_TOL = 1e-8
#: relative wander allowed for the steady-vortex run
TG_STEADY_TOL = 1e-6
#: lower bound every fitted stress decay rate must clear
MIN_STRESS_RATE = 1.0 / 72.0
#: prefactor slack for the pointwise stress decay bound
POINTWISE_SLACK = 1.05
#: pointwise stress decay exponent checked along the uncoupled-decay run
POINTWISE_RATE = 0.75


@dataclass(frozen=True)
class Thresholds:
    """Linked smallness/verdict constants shared by the decay scenarios.

    delta defaults to 40*eps0: only the ordering eps0 << delta << 1 carries
    meaning, the individual values are conventional.
    """

    eps0: float = 0.01
    delta: float = 0.4
    gap_fraction: float = 0.25
    envelope_ratio: float = 1.2

    def __post_init__(self):
        for name in ("eps0", "delta", "gap_fraction", "envelope_ratio"):
            if getattr(self, name) <= 0:
                raise ValueError(f"threshold {name} must be positive, got {getattr(self, name)}")


def _from_mapping(cls, section: dict, name: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {name!r} section: {sorted(unknown)}")
    return cls(**section)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one experiment run."""

    scenario: str
    grid: Grid
    params: ModelParams
    data: InitialDataSpec
    stepper: StepperConfig
    thresholds: Thresholds = field(default_factory=Thresholds)
    out_dir: str | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}"
            )
        expected = _EXPECTED_KIND.get(self.scenario)
        if expected is not None and self.data.kind != expected:
            raise ValueError(
                f"scenario {self.scenario} requires data kind {expected!r}, "
                f"got {self.data.kind!r}"
            )
        if self.scenario == "decay_a0" and self.params.a != 0.0:
            raise ValueError("decay_a0 requires params.a == 0")
        if self.scenario in ("decay_positive_a", "instability_gap", "local_convergence"):
            if self.params.a <= 0:
                raise ValueError(f"{self.scenario} requires params.a > 0")
        if self.scenario == "instability_gap":
            if self.params.a * self.grid.length < 8.0:
                raise ValueError(
                    "instability_gap requires length >= 8/a so the dilated data fits"
                )

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        allowed = {"scenario", "grid", "params", "data", "stepper", "thresholds", "out_dir"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown top-level config keys: {sorted(unknown)}")
        for key in ("scenario", "grid", "data", "stepper"):
            if key not in doc:
                raise ValueError(f"config is missing required key {key!r}")
        return cls(
            scenario=doc["scenario"],
            grid=_from_mapping(Grid, doc["grid"], "grid"),
            params=_from_mapping(ModelParams, doc.get("params", {}), "params"),
            data=_from_mapping(InitialDataSpec, doc["data"], "data"),
            stepper=_from_mapping(StepperConfig, doc["stepper"], "stepper"),
            thresholds=_from_mapping(Thresholds, doc.get("thresholds", {}), "thresholds"),
            out_dir=doc.get("out_dir"),
        )

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "grid": {"n": self.grid.n, "length": self.grid.length},
            "params": dataclasses.asdict(self.params),
            "data": dataclasses.asdict(self.data),
            "stepper": dataclasses.asdict(self.stepper),
            "thresholds": dataclasses.asdict(self.thresholds),
            "out_dir": self.out_dir,
        }


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply dotted-path `key=value` overrides to a config document in place.

    Values parse as JSON when possible and fall back to bare strings, so
    `stepper.dt=0.01` and `data.kind=small_family` both work.
    """
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValueError(f"override must look like path=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"override path {key!r} descends through a non-section")
        node[parts[-1]] = value
    return doc


def default_config(scenario: str) -> dict:
    """Ready-to-run configuration document for a named scenario."""
    two_pi = 2.0 * np.pi
    base_params = {"a": 0.0, "b": 0.0, "nu": 0.0, "eta": 1.0, "mu1": 1.0, "mu2": 1.0}
    if scenario == "euler_regression":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": two_pi},
            "params": dict(base_params),
            "data": {"kind": "stream", "amplitude": 0.1, "n_freq": 3, "seed": 7},
            "stepper": {"dt": 0.02, "t_end": 10.0, "cfl": 0.5, "sample_every": 10},
        }
    if scenario == "lp_selftest":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": two_pi},
            "params": dict(base_params),
            "data": {"kind": "stream", "seed": 3},
            "stepper": {"dt": 0.1, "t_end": 0.0},
        }
    if scenario == "decay_a0":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": two_pi},
            "params": dict(base_params),
            "data": {"kind": "small_family", "eps0": 0.01, "seed": 1},
            "stepper": {"dt": 0.05, "t_end": 30.0, "sample_every": 2},
            "thresholds": {"eps0": 0.01, "delta": 0.4},
        }
    if scenario == "decay_positive_a":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": two_pi},
            "params": dict(base_params, a=0.25),
            "data": {
                "kind": "small_family",
                "eps0": 0.01,
                "seed": 1,
                "tau_scale": 0.25,
            },
            "stepper": {"dt": 0.05, "t_end": 40.0, "sample_every": 4},
            "thresholds": {"eps0": 0.01, "delta": 0.4, "envelope_ratio": 1.2},
        }
    if scenario == "instability_gap":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": 32.0},
            "params": dict(base_params, a=0.25),
            "data": {"kind": "scaled_family", "a": 0.25, "eps0": 0.01},
            "stepper": {"dt": 0.1, "t_end": 32.0},
            "thresholds": {"eps0": 0.01, "gap_fraction": 0.25},
        }
    if scenario == "local_convergence":
        return {
            "scenario": scenario,
            "grid": {"n": 256, "length": two_pi},
            "params": dict(base_params, a=0.2),
            "data": {"kind": "small_family", "eps0": 0.25, "seed": 2},
            "stepper": {"dt": 0.02, "t_end": 1.0},
        }
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


@dataclass
class Verdict:
    """One checked claim: what was measured, against what, from which file."""

    name: str
    passed: bool
    measured: dict
    source: str
    window: list | None = None

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "source": self.source,
            "window": self.window,
        }


@dataclass
class RunReport:
    scenario: str
    config: dict
    verdicts: list
    series_files: dict
    info: dict
    wall_seconds: float
    step_count: int
    blowups: list

    @property
    def passed(self) -> bool:
        return not self.blowups and all(v.passed for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        if self.blowups:
            return 2
        return 0 if self.passed else 1

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "exit_code": self.exit_code,
            "blowups": self.blowups,
            "verdicts": [v.to_json_dict() for v in self.verdicts],
            "series_files": self.series_files,
            "info": self.info,
            "wall_seconds": self.wall_seconds,
            "step_count": self.step_count,
            "config": self.config,
        }


class _RunOutput:
    """Collects emitted artifacts; writes them only when out_dir is set."""

    def __init__(self, cfg: ScenarioConfig):
        self.dir = Path(cfg.out_dir) if cfg.out_dir else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def series(self, key: str, filename: str, series: TimeSeries) -> str:
        self.files[key] = filename
        if self.dir is not None:
            series.to_csv(self.dir / filename)
        return filename

    def table(self, key: str, filename: str, header, rows) -> str:
        self.files[key] = filename
        if self.dir is not None:
            lines = [",".join(header)]
            lines += [",".join(repr(float(cell)) for cell in row) for row in rows]
            (self.dir / filename).write_text("\n".join(lines) + "\n")
        return filename

    def report(self, report: RunReport) -> None:
        if self.dir is not None:
            (self.dir / "report.json").write_text(
                json.dumps(report.to_json_dict(), indent=2) + "\n"
            )


def _advance_recorded(state, params, stepper, part, series, snaps=None, sample_times=None):
    """Drive one run, recording the series (and optional snapshots).

    Returns (final_state_or_None, steps, blowup_dict_or_None).
    """

    def observer(s):
        record(s, part, series)
        if snaps is not None:
            snaps.add(s)

    stats = {}
    try:
        if sample_times is None:
            final = advance_to(state, params, stepper, observer, stats)
        else:
            final = advance_through_times(state, params, stepper, sample_times, observer, stats)
        return final, stats.get("steps", 0), None
    except BlowUpError as exc:
        series.mark_blowup(exc.time)
        return None, stats.get("steps", 0), {
            "time": exc.time,
            "step_index": exc.step_index,
            "trace": [[t, s] for t, s in exc.trace],
        }


def run_euler_regression(cfg: ScenarioConfig) -> RunReport:
    """Stress-free control: quadratic invariants drift below 1e-8 and the
    steady cos*cos vortex stays put to 1e-6.

    Two sub-runs on the configured grid and integrator: the configured random
    divergence-free stream datum over [0, t_end], and the steady vortex at
    amplitude 0.5 over [0, min(5, t_end)].
    """
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    blowups = []
    steps_total = 0

    state = build_initial_state(grid, cfg.data)
    series = TimeSeries()
    invariants = []

    def observe(s):
        record(s, part, series)
        invariants.append((s.time, kinetic_energy(s), enstrophy(s)))

    stats = {}
    try:
        advance_to(state, cfg.params, cfg.stepper, observe, stats)
    except BlowUpError as exc:
        series.mark_blowup(exc.time)
        blowups.append({"run": "random_stream", "time": exc.time, "step_index": exc.step_index})
    steps_total += stats.get("steps", 0)

    tg_cfg = replace(cfg.stepper, t_end=min(5.0, cfg.stepper.t_end))
    tg_state = FlowState(u=taylor_green(grid, 0.5), tau=zero_stress(grid), time=0.0)
    u0 = np.stack(tg_state.u.arrays)
    u0_scale = float(np.sqrt((u0 * u0).sum()))
    tg_series = TimeSeries()
    drift_rows = []

    def observe_tg(s):
        record(s, part, tg_series)
        du = np.stack(s.u.arrays) - u0
        drift_rows.append((s.time, float(np.sqrt((du * du).sum())) / u0_scale))

    stats = {}
    try:
        advance_to(tg_state, cfg.params, tg_cfg, observe_tg, stats)
    except BlowUpError as exc:
        tg_series.mark_blowup(exc.time)
        blowups.append({"run": "steady_vortex", "time": exc.time, "step_index": exc.step_index})
    steps_total += stats.get("steps", 0)

    out.series("random_stream", "series.csv", series)
    out.series("steady_vortex", "tg_series.csv", tg_series)
    out.table("invariants", "invariants.csv", ("t", "energy", "enstrophy"), invariants)
    out.table("tg_drift", "tg_drift.csv", ("t", "rel_drift"), drift_rows)

    energies = np.array([row[1] for row in invariants])
    enstrophies = np.array([row[2] for row in invariants])
    drift_e = float(np.abs(energies - energies[0]).max() / energies[0]) if len(energies) else np.inf
    drift_z = float(np.abs(enstrophies - enstrophies[0]).max() / enstrophies[0]) if len(enstrophies) else np.inf
    tg_drift = float(max((r for _, r in drift_rows), default=np.inf))
    horizon = [0.0, cfg.stepper.t_end]
    verdicts = [
        Verdict(
            "energy_drift",
            not blowups and drift_e < EULER_DRIFT_TOL,
            {"relative_drift": drift_e, "tolerance": EULER_DRIFT_TOL},
            "invariants.csv",
            horizon,
        ),
        Verdict(
            "enstrophy_drift",
            not blowups and drift_z < EULER_DRIFT_TOL,
            {"relative_drift": drift_z, "tolerance": EULER_DRIFT_TOL},
            "invariants.csv",
            horizon,
        ),
        Verdict(
            "steady_vortex",
            not blowups and tg_drift < TG_STEADY_TOL,
            {"relative_drift": tg_drift, "tolerance": TG_STEADY_TOL},
            "tg_drift.csv",
            [0.0, tg_cfg.t_end],
        ),
    ]
    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info={},
        wall_seconds=_time.perf_counter() - start,
        step_count=steps_total,
        blowups=blowups,
    )
    out.report(report)
    return report


def run_lp_selftest(cfg: ScenarioConfig) -> RunReport:
    """Property sweep of the frequency-band toolkit on randomized fields."""
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    rng = np.random.default_rng(cfg.data.seed)

    def random_field():
        return ScalarField(grid, rng.standard_normal((grid.n, grid.n)))

    dev_partition = float(np.abs(partition_sum(part) - 1.0).max())

    dev_reconstruction = 0.0
    for _ in range(3):
        f = random_field()
        coeffs = forward_transform(f)
        total = np.zeros((grid.n, grid.n))
        for j in range(-1, part.j_max + 1):
            total += dyadic_block(coeffs, j, part).samples
        dev_reconstruction = max(
            dev_reconstruction,
            float(np.abs(total - f.samples).max() / np.abs(f.samples).max()),
        )

    dev_paraproduct = 0.0
    for _ in range(3):
        u, v = random_field(), random_field()
        tu, tv, r = paraproduct_split(u, v, part)
        product = u.samples * v.samples
        dev = np.abs(tu.samples + tv.samples + r.samples - product).max()
        dev_paraproduct = max(dev_paraproduct, float(dev / np.abs(product).max()))

    ratios = []
    checked = 0
    while checked < 100:
        f = random_field()
        j = int(rng.integers(0, part.j_max + 1))
        rep = bernstein_check(f, j, part)
        if rep.vacuous:
            continue
        ratios.extend([rep.r1_l2, rep.r2_l2, rep.r1_linf, rep.r2_linf])
        checked += 1
    ratios = np.array(ratios)
    bernstein_ok = bool((ratios >= 1.0 / 8.0).all() and (ratios <= 8.0).all())

    worst_semigroup = 0.0
    f = random_field()
    for j in range(0, part.j_max + 1):
        for t in (0.1, 0.5, 1.0):
            rep = block_semigroup_check(f, j, t, part)
            if not rep.vacuous:
                worst_semigroup = max(worst_semigroup, rep.ratio)

    source = "report.json#verdicts"
    verdicts = [
        Verdict("partition_of_unity", dev_partition <= 1e-12,
                {"max_deviation": dev_partition, "tolerance": 1e-12}, source),
        Verdict("reconstruction", dev_reconstruction <= 1e-10,
                {"max_relative_deviation": dev_reconstruction, "tolerance": 1e-10}, source),
        Verdict("paraproduct_identity", dev_paraproduct <= 1e-9,
                {"max_relative_deviation": dev_paraproduct, "tolerance": 1e-9}, source),
        Verdict("bernstein_ratios", bernstein_ok,
                {"checked_blocks": checked, "min_ratio": float(ratios.min()),
                 "max_ratio": float(ratios.max()), "band": [1.0 / 8.0, 8.0]}, source),
        Verdict("semigroup_block_bound", worst_semigroup <= 1.0 + 1e-10,
                {"worst_ratio": worst_semigroup, "tolerance": 1.0 + 1e-10}, source),
    ]
    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info={"j_max": part.j_max},
        wall_seconds=_time.perf_counter() - start,
        step_count=0,
        blowups=[],
    )
    out.report(report)
    return report


def run_decay_a0(cfg: ScenarioConfig) -> RunReport:
    """Uncoupled-stress decay: no blow-up, exponential stress decay with a
    guaranteed-rate floor, a pointwise decay bound, bounded velocity, and a
    closed smallness continuation."""
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    delta = cfg.thresholds.delta

    state = build_initial_state(grid, cfg.data)
    tau0_l2 = stress_l2_norm(state.tau)
    series = TimeSeries()
    _, steps, blowup = _advance_recorded(state, cfg.params, cfg.stepper, part, series)
    blowups = [dict(blowup, run="main")] if blowup else []
    out.series("main", "series.csv", series)

    t_end = cfg.stepper.t_end
    fit_window = (min(2.0, 0.5 * t_end), float(series.times[-1]) if len(series) else t_end)
    verdicts = [
        Verdict("no_blowup", blowup is None,
                {"blowup": blowups or None}, "series.csv", [0.0, t_end]),
    ]
    info = {}
    if len(series) >= 2 and blowup is None:
        fit_l2 = fit_exponential(series, "l2_tau", fit_window)
        fit_linf = fit_exponential(series, "linf_tau", fit_window)
        times = series.times
        l2_tau = series.channel("l2_tau")
        bound = POINTWISE_SLACK * np.exp(-POINTWISE_RATE * times) * tau0_l2
        pointwise_ok = bool((l2_tau <= bound).all())
        l2_u = series.channel("l2_u")
        monitor = bootstrap_check(series, delta)
        verdicts += [
            Verdict("stress_l2_rate", fit_l2.rate >= MIN_STRESS_RATE,
                    {"rate": fit_l2.rate, "floor": MIN_STRESS_RATE,
                     "residual": fit_l2.residual}, "series.csv", list(fit_window)),
            Verdict("stress_linf_rate", fit_linf.rate >= MIN_STRESS_RATE,
                    {"rate": fit_linf.rate, "floor": MIN_STRESS_RATE,
                     "residual": fit_linf.residual}, "series.csv", list(fit_window)),
            Verdict("stress_pointwise_bound", pointwise_ok,
                    {"max_ratio_to_bound": float((l2_tau / bound).max()),
                     "slack": POINTWISE_SLACK, "rate": POINTWISE_RATE},
                    "series.csv", [0.0, t_end]),
            Verdict("velocity_below_delta", bool((l2_u <= delta).all()),
                    {"max_l2_u": float(l2_u.max()), "delta": delta},
                    "series.csv", [0.0, t_end]),
            Verdict("bootstrap_closed", monitor.closed,
                    {"delta": delta,
                     "max_combined_stress": float((np.maximum.accumulate(
                         series.channel("b0inf1_tau"))
                         + series.channel("int_b2inf1_tau")).max())},
                    "series.csv", [0.0, t_end]),
        ]
        info["growth_monitor"] = double_exponential_consistency(
            series, "b0inf1_w"
        ).to_json_dict()
    else:
        verdicts += [
            Verdict(name, False, {"reason": "run did not complete"}, "series.csv")
            for name in ("stress_l2_rate", "stress_linf_rate",
                         "stress_pointwise_bound", "velocity_below_delta",
                         "bootstrap_closed")
        ]

    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info=info,
        wall_seconds=_time.perf_counter() - start,
        step_count=steps,
        blowups=blowups,
    )
    out.report(report)
    return report


def run_decay_positive_a(cfg: ScenarioConfig) -> RunReport:
    """Coupled decay: the H1 pair norm obeys the square-root-in-time envelope
    while the uncoupled control from the same data violates it."""
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    a = cfg.params.a
    ratio = cfg.thresholds.envelope_ratio

    state0 = build_initial_state(grid, cfg.data)
    series_main = TimeSeries()
    series_ctrl = TimeSeries()
    _, steps_main, blow_main = _advance_recorded(state0, cfg.params, cfg.stepper, part, series_main)
    _, steps_ctrl, blow_ctrl = _advance_recorded(
        state0, replace(cfg.params, a=0.0), cfg.stepper, part, series_ctrl
    )
    blowups = []
    if blow_main:
        blowups.append(dict(blow_main, run="main"))
    if blow_ctrl:
        blowups.append(dict(blow_ctrl, run="control"))
    out.series("main", "series.csv", series_main)
    out.series("control", "control_series.csv", series_ctrl)

    t_end = cfg.stepper.t_end
    window = (1.0, t_end)
    verdicts = [
        Verdict("no_blowup", not blowups, {"blowups": blowups or None},
                "series.csv", [0.0, t_end]),
    ]
    info = {}
    if not blowups:
        env_main = fit_power_envelope(series_main, "h1_utau", a, window, ratio)
        env_ctrl = fit_power_envelope(series_ctrl, "h1_utau", a, window, ratio)
        times = series_main.times
        l2_u = series_main.channel("l2_u")
        at_one = float(l2_u[int(np.argmin(np.abs(times - 1.0)))])
        at_end = float(l2_u[-1])
        verdicts += [
            Verdict("envelope_held", env_main.verdict == "held",
                    {"sup_ratio": env_main.scale, "allowed": ratio,
                     "loglog_slope": env_main.rate}, "series.csv", list(window)),
            Verdict("control_envelope_violated", env_ctrl.verdict == "violated",
                    {"sup_ratio": env_ctrl.scale, "allowed": ratio,
                     "loglog_slope": env_ctrl.rate}, "control_series.csv", list(window)),
            Verdict("velocity_decays", at_end < at_one,
                    {"l2_u_at_1": at_one, "l2_u_at_end": at_end},
                    "series.csv", list(window)),
        ]
        info["envelope_main"] = env_main.to_json_dict()
        info["envelope_control"] = env_ctrl.to_json_dict()
    else:
        verdicts += [
            Verdict(name, False, {"reason": "run did not complete"}, "series.csv")
            for name in ("envelope_held", "control_envelope_violated", "velocity_decays")
        ]

    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info=info,
        wall_seconds=_time.perf_counter() - start,
        step_count=steps_main + steps_ctrl,
        blowups=blowups,
    )
    out.report(report)
    return report


def run_instability_gap(cfg: ScenarioConfig) -> RunReport:
    """Coupled-vs-uncoupled divergence from identical dilated data.

    Both systems integrate through one shared schedule; after the crossing
    time 1/a^2 the velocity gap must exceed the configured fraction of the
    initial velocity norm, while the uncoupled run retains at least half of
    it and the coupled run has lost at least half by the end.
    """
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    a = cfg.params.a
    crossing = 1.0 / (a * a)
    t_end = cfg.stepper.t_end
    sample_times = np.unique(np.append(np.arange(0.0, t_end, 1.0), t_end))

    state0 = build_initial_state(grid, cfg.data)
    u0_l2 = float(np.sqrt(kinetic_energy(state0)))
    series_main, snaps_main = TimeSeries(), SnapshotSeries()
    series_ctrl, snaps_ctrl = TimeSeries(), SnapshotSeries()
    _, steps_main, blow_main = _advance_recorded(
        state0, cfg.params, cfg.stepper, part, series_main, snaps_main, sample_times
    )
    _, steps_ctrl, blow_ctrl = _advance_recorded(
        state0, replace(cfg.params, a=0.0), cfg.stepper, part, series_ctrl, snaps_ctrl, sample_times
    )
    blowups = []
    if blow_main:
        blowups.append(dict(blow_main, run="main"))
    if blow_ctrl:
        blowups.append(dict(blow_ctrl, run="control"))
    out.series("main", "series.csv", series_main)
    out.series("control", "control_series.csv", series_ctrl)

    verdicts = [
        Verdict("no_blowup", not blowups, {"blowups": blowups or None},
                "series.csv", [0.0, t_end]),
    ]
    info = {"crossing_time": crossing, "initial_l2_u": u0_l2}
    if not blowups:
        times_g, gap_values = gap(snaps_ctrl, snaps_main, grid)
        out.table("gap", "gap.csv", ("t", "l2_gap"), list(zip(times_g, gap_values)))
        late = gap_values[times_g >= crossing - 1e-9]
        ctrl_l2 = series_ctrl.channel("l2_u")
        main_l2 = series_main.channel("l2_u")
        threshold = cfg.thresholds.gap_fraction * u0_l2
        verdicts += [
            Verdict("control_keeps_energy",
                    bool((ctrl_l2 >= 0.5 * u0_l2).all()),
                    {"min_l2_u": float(ctrl_l2.min()), "floor": 0.5 * u0_l2},
                    "control_series.csv", [0.0, t_end]),
            Verdict("gap_beyond_crossing",
                    late.size > 0 and bool((late >= threshold).all()),
                    {"min_late_gap": float(late.min()) if late.size else None,
                     "threshold": threshold,
                     "gap_fraction": cfg.thresholds.gap_fraction},
                    "gap.csv", [crossing, t_end]),
            Verdict("coupled_run_decayed",
                    bool(main_l2[-1] < 0.5 * u0_l2),
                    {"final_l2_u": float(main_l2[-1]), "ceiling": 0.5 * u0_l2},
                    "series.csv", [0.0, t_end]),
        ]
    else:
        verdicts += [
            Verdict(name, False, {"reason": "run did not complete"}, "series.csv")
            for name in ("control_keeps_energy", "gap_beyond_crossing", "coupled_run_decayed")
        ]

    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info=info,
        wall_seconds=_time.perf_counter() - start,
        step_count=steps_main + steps_ctrl,
        blowups=blowups,
    )
    out.report(report)
    return report


def run_local_convergence(cfg: ScenarioConfig) -> RunReport:
    """Short-horizon continuity in the coupling: the distance to the
    uncoupled run shrinks linearly along the halving ladder."""
    start = _time.perf_counter()
    grid, part = cfg.grid, build_partition(cfg.grid)
    out = _RunOutput(cfg)
    horizon = cfg.stepper.t_end
    ladder = [cfg.params.a / 2**i for i in range(4)]
    sample_times = np.unique(np.append(np.arange(0.0, horizon, 0.1), horizon))

    state0 = build_initial_state(grid, cfg.data)
    blowups = []
    steps_total = 0

    def one_run(a_value, key, filename):
        nonlocal steps_total
        series, snaps = TimeSeries(), SnapshotSeries()
        _, steps, blow = _advance_recorded(
            state0, replace(cfg.params, a=a_value), cfg.stepper, part,
            series, snaps, sample_times,
        )
        steps_total += steps
        if blow:
            blowups.append(dict(blow, run=key))
        out.series(key, filename, series)
        return snaps

    snaps_base = one_run(0.0, "baseline", "series_base.csv")
    distances = []
    for i, a_value in enumerate(ladder):
        snaps = one_run(a_value, f"rung_{i}", f"series_rung{i}.csv")
        if not blowups:
            distances.append(sup_state_distance(snaps_base, snaps, grid))

    verdicts = []
    info = {"ladder": ladder}
    if not blowups and len(distances) == len(ladder):
        out.table("ladder", "ladder.csv", ("a", "distance"), list(zip(ladder, distances)))
        decreasing = all(d1 > d2 for d1, d2 in zip(distances, distances[1:]))
        ratios = [d1 / d2 for d1, d2 in zip(distances, distances[1:])]
        verdicts += [
            Verdict("distance_decreases", decreasing,
                    {"distances": distances}, "ladder.csv", [0.0, horizon]),
            Verdict("halving_ratios_linear",
                    all(1.6 <= r <= 2.4 for r in ratios),
                    {"ratios": ratios, "band": [1.6, 2.4]},
                    "ladder.csv", [0.0, horizon]),
        ]
        info["distances"] = distances
    else:
        verdicts += [
            Verdict(name, False, {"reason": "run did not complete"}, "ladder.csv")
            for name in ("distance_decreases", "halving_ratios_linear")
        ]

    report = RunReport(
        scenario=cfg.scenario,
        config=cfg.to_dict(),
        verdicts=verdicts,
        series_files=out.files,
        info=info,
        wall_seconds=_time.perf_counter() - start,
        step_count=steps_total,
        blowups=blowups,
    )
    out.report(report)
    return report


_RUNNERS = {
    "euler_regression": run_euler_regression,
    "lp_selftest": run_lp_selftest,
    "decay_a0": run_decay_a0,
    "decay_positive_a": run_decay_positive_a,
    "instability_gap": run_instability_gap,
    "local_convergence": run_local_convergence,
}


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    """Dispatch a validated config to its scenario runner."""
    return _RUNNERS[cfg.scenario](cfg)
