import numpy as np
import pytest
from hypothesis import settings

from colloidrl.engine import available_backends

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, one line per criterion, repeated in the terminal summary
N_CRITERIA = 13
VERDICTS = {}


@pytest.fixture
def verdict():
    def record(n, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title}" + (f" [{detail}]" if detail else "")
        VERDICTS.setdefault(n, []).append((bool(ok), line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n not in VERDICTS:
            terminalreporter.write_line(f"FAIL criterion {n:2d}: no verdict recorded (not run or errored)")
            continue
        results = VERDICTS[n]
        ok = all(r for r, _ in results)
        head = results[0][1].split(":", 1)[1].split(" [")[0].strip()
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {head}")
