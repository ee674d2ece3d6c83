import numpy as np
import pytest

from vpbgk.config import load_config

ACCEPTANCE_LINES: list[str] = []


def small_config(*sets, N=4000, m=16, **kw):
    """Cheap scenario for unit tests; ``sets`` are --set style overrides."""
    base = [f"N={N}", f"mesh.m_x={m}", f"mesh.m_y={m}"]
    cfg, _ = load_config(None, base + list(sets))
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
