import os
import time

import pytest

from axongrowth import build_config, run_simulation

# acceptance lines collected by test_acceptance.py, printed at the end of the session
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (passed, detail)
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {detail}")


@pytest.fixture(scope="session")
def default_cfg():
    return build_config({})


class _RunCache:
    """Lazily computed full-horizon runs, shared by every test in the session."""

    def __init__(self):
        self._runs = {}
        self.wall = {}

    def get(self, key, raw, mode, **kw):
        if key not in self._runs:
            t0 = time.perf_counter()
            self._runs[key] = run_simulation(build_config(raw), mode, **kw)
            self.wall[key] = time.perf_counter() - t0
        return self._runs[key]


@pytest.fixture(scope="session")
def runs():
    return _RunCache()


@pytest.fixture(scope="session")
def full_run(runs):
    def get(mode):
        # V is only evaluated at recorded rows, so the diagnostic column is cheap
        return runs.get(("full", mode), {}, mode, lyapunov=True)

    return get


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # compile once up front so timing assertions measure the integration, not numba
    if os.environ.get("AXONGROWTH_SKIP_WARMUP"):
        return
    cfg = build_config({"solver": {"t_final_s": 0.01}})
    for mode in ("continuous", "cetc", "petc"):
        run_simulation(cfg, mode)
