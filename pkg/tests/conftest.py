from __future__ import annotations

import pytest

from filippov1d.corpus import CORPUS

_LINES = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def fields():
    """Corpus fields built once per session (verdicts and zero sets are cached)."""
    return {name: entry.build() for name, entry in CORPUS.items()}


@pytest.fixture
def criterion(request):
    """report(n, checks): assert every (name, ok) check and record a PASS/FAIL line."""
    lines = request.config.stash.setdefault(_LINES, [])

    def report(n: int, checks: list[tuple[str, bool]]):
        failed = [name for name, ok in checks if not ok]
        line = f"criterion {n}: {'PASS' if not failed else 'FAIL'} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += " failed: " + "; ".join(failed)
        lines.append(line)
        print(line)
        assert not failed, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
