"""Shared fixtures: one small rendered sequence reused across CLI tests."""

import pytest

from infotrack.synth import Scenario, generate

# One line per acceptance criterion, echoed after the run summary so the
# verdicts stay visible even when pytest captures test stdout.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_sequence(tmp_path_factory):
    """A 20-frame linear scenario on disk: (directory, ground-truth path)."""
    out = tmp_path_factory.mktemp("seq")
    scenario = Scenario(kind="linear", frame_count=20, width=160, height=120,
                        target_w=24, target_h=24, seed=1)
    _, gt_path = generate(scenario, str(out))
    return str(out), gt_path
