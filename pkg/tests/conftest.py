import time
from contextlib import contextmanager

import numpy as np
import pytest

from dprl import Dataset, FeatureBounds

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        line = f"[{'PASS' if passed else 'FAIL'}] {number}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Context manager that times one acceptance criterion and records the outcome.

    The body may put a short summary in ``note["msg"]``. A failed assertion
    or an exceeded runtime limit marks the criterion as failed.
    """

    @contextmanager
    def check(number, title, limit_s):
        note = {"msg": ""}
        t0 = time.perf_counter()
        try:
            yield note
        except BaseException as exc:
            elapsed = time.perf_counter() - t0
            first = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            msg = note["msg"] or first
            _ACCEPTANCE.append((number, title, False, f"{msg} ({elapsed:.2f}s)"))
            raise
        elapsed = time.perf_counter() - t0
        ok = elapsed < limit_s
        detail = f"{note['msg']} ({elapsed:.2f}s, limit {limit_s:g}s)".strip()
        _ACCEPTANCE.append((number, title, ok, detail))
        assert ok, f"runtime {elapsed:.2f}s exceeds {limit_s:g}s"

    return check


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_data(rng):
    X = rng.uniform(size=(40, 3))
    Y = np.column_stack([X @ [0.5, -0.2, 0.3] + 0.1 * rng.standard_normal(40),
                         rng.uniform(size=40)])
    return Dataset(X, Y, FeatureBounds(0, 1))
