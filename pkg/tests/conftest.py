"""Shared test factories and the acceptance-summary terminal hook."""

import numpy as np
import pytest

import supmin as sm


def random_grid(rng, max_elements=12, a=0.0, b=1.0):
    m = int(rng.integers(3, max_elements + 1))
    interior = np.sort(rng.uniform(a, b, size=m - 1))
    nodes = np.concatenate([[a], interior, [b]])
    while np.any(np.diff(nodes) <= 1e-6):
        interior = np.sort(rng.uniform(a, b, size=m - 1))
        nodes = np.concatenate([[a], interior, [b]])
    return sm.Grid(nodes)


def random_path(rng, grid=None, dim=None, scale=1.0):
    grid = grid if grid is not None else random_grid(rng)
    dim = dim if dim is not None else int(rng.integers(1, 4))
    return sm.Path(grid, rng.normal(scale=scale, size=(grid.nodes.size, dim)))


def random_builtin_model(rng, dim):
    """One of the three built-in families with random moderate parameters."""
    kind = rng.integers(0, 3)
    if kind == 0:
        s = float(rng.uniform(0.5, 4.0))
        return sm.PowerNormModel(s, rng.normal(size=dim))
    if kind == 1:
        n_obs = int(rng.integers(1, 3))
        K = rng.normal(scale=0.5, size=(n_obs, dim))
        A = rng.normal(scale=0.3, size=(dim, dim))
        xs = np.linspace(-0.5, 1.5, 5)
        k = sm.SampledSignal(xs, rng.normal(scale=0.5, size=(5, n_obs)))
        c = sm.SampledSignal(xs, rng.normal(scale=0.5, size=(5, dim)))
        return sm.DataAssimilationModel(K, k, A, c)
    name = ("identity", "shift", "power")[int(rng.integers(0, 3))]
    profile = sm.radial_profile(name, beta=float(rng.uniform(0.0, 2.0)),
                                gamma=float(rng.uniform(0.5, 2.5)))
    A = rng.normal(scale=0.3, size=(dim, dim))
    xs = np.linspace(-0.5, 1.5, 5)
    c = sm.SampledSignal(xs, rng.normal(scale=0.5, size=(5, dim)))
    return sm.RadialModel(profile, A, c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::" in nodeid:
                rows.append((nodeid.split("::")[-1], verdict))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(rows):
            terminalreporter.write_line(f"{verdict}  {name}")
