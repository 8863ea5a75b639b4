import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ffdin.netcore import GameRecord, LayeredSequence, Outcome, Role  # noqa: E402

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "outcomes": []})
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        if call.excinfo is None:
            entry["outcomes"].append("passed")
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            entry["outcomes"].append("skipped")
        else:
            entry["outcomes"].append("failed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outs = entry["outcomes"]
        if "failed" in outs:
            status = "FAIL"
        elif outs and all(o == "skipped" for o in outs):
            status = "SKIP"
        elif outs:
            status = "PASS"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {entry['title']}")


def make_game(look, speak=None, listen=None, roles=None, outcome=Outcome.DW, game_id="g"):
    look = np.asarray(look, dtype=float)
    T, n, _ = look.shape
    speak = np.zeros_like(look) if speak is None else np.asarray(speak, dtype=float)
    listen = np.zeros_like(look) if listen is None else np.asarray(listen, dtype=float)
    if roles is None:
        roles = [Role.DECEIVER] + [Role.NON_DECEIVER] * (n - 1)
    return GameRecord(game_id, tuple(roles), outcome, LayeredSequence(look, speak, listen))


def one_hot_look(targets, n):
    """Look-at stack from a ``(T, n)`` list of targets (-1 = nobody)."""
    targets = np.asarray(targets)
    look = np.zeros((targets.shape[0], n, n))
    for t in range(targets.shape[0]):
        for u in range(n):
            if targets[t, u] >= 0:
                look[t, u, targets[t, u]] = 1.0
    return look
