"""Shared fixtures and field builders for the test suite."""

import numpy as np
import pytest

from oldroyd2d import Grid, ScalarField


@pytest.fixture
def grid32():
    return Grid(32, 2.0 * np.pi)


@pytest.fixture
def grid64():
    return Grid(64, 2.0 * np.pi)


def trig_field(grid, modes, amplitudes=None, phases=None):
    """Real trigonometric polynomial sum_i A_i cos(k0 (m1 x + m2 y) + p_i)."""
    k0 = 2.0 * np.pi / grid.length
    x, y = grid.mesh
    out = np.zeros((grid.n, grid.n))
    for i, (m1, m2) in enumerate(modes):
        amp = 1.0 if amplitudes is None else amplitudes[i]
        phase = 0.0 if phases is None else phases[i]
        out += amp * np.cos(k0 * (m1 * x + m2 * y) + phase)
    return ScalarField(grid, out)


def random_band_limited(grid, seed, max_mode=5, mean=0.0):
    """Seeded random trig polynomial with modes up to max_mode per axis."""
    rng = np.random.default_rng(seed)
    k0 = 2.0 * np.pi / grid.length
    x, y = grid.mesh
    out = np.full((grid.n, grid.n), mean)
    for m1 in range(0, max_mode + 1):
        for m2 in range(-max_mode, max_mode + 1):
            if m1 == 0 and m2 <= 0:
                continue
            out += rng.normal() * np.cos(k0 * (m1 * x + m2 * y) + rng.uniform(0, 2 * np.pi))
    return ScalarField(grid, out)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion at the end of a run."""
    results = {}
    for outcome, flag in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            name = nodeid.rsplit("::", 1)[-1].removeprefix("test_criterion_")
            number, _, label = name.partition("_")
            # a setup error outranks an earlier phase's pass for the same test
            if results.get(number, (None, "PASS"))[1] != "FAIL":
                results[number] = (label.replace("_", " "), flag)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        label, flag = results[number]
        terminalreporter.write_line(f"criterion {number} ({label}): {flag}")
