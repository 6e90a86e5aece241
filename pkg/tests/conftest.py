from __future__ import annotations

from pathlib import Path

import pytest

from nrlocsim.config import load_config

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

_criteria: dict[int, tuple[str, str, str]] = {}


@pytest.fixture(scope="session")
def loc_cfg():
    return load_config(CONFIGS / "localization.yaml")


@pytest.fixture(scope="session")
def sweep_cfg():
    return load_config(CONFIGS / "beam_sweep.yaml")


@pytest.fixture(scope="session")
def bfangle_cfg():
    return load_config(CONFIGS / "bf_angle.yaml")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    props = dict(report.user_properties)
    outcome, title, measured = report.outcome, props.get("title", ""), props.get("measured", "")
    if crit in _criteria:
        # parametrized criteria: any failing case fails the criterion
        prev = _criteria[crit]
        outcome = outcome if prev[0] == "passed" else prev[0]
        measured = "; ".join(m for m in (prev[2], measured) if m)
    _criteria[crit] = (outcome, title, measured)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcome, title, measured = _criteria[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {n:2d} {status}: {title}"
        if measured:
            line += f" ({measured})"
        terminalreporter.write_line(line)
