import numpy as np
import pytest

from e2eslice import SlicingEnv, generate_scenario, preset


@pytest.fixture(scope="session")
def desk_env():
    cfg = preset("desk", seed=1)
    env = SlicingEnv(generate_scenario(cfg, 1), 1)
    env.reset(1)
    return env


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report():
    """Record the verdict of one acceptance criterion; returns the verdict."""

    def _report(number: int, ok: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        if n not in _CRITERIA:
            terminalreporter.write_line(f"criterion {n:2d}: not run")
            continue
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
