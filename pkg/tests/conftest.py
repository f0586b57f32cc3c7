import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ries_opt.core import ScenarioFlags, load_config  # noqa: E402
from ries_opt.dispatch import dispatch  # noqa: E402


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def scenario_solutions(cfg):
    return {k: dispatch(cfg, ScenarioFlags.from_scenario(k)) for k in (1, 2, 3, 4)}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
