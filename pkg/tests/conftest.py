import re
import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def pytest_runtest_logreport(report):
    # one printed pass/fail line per acceptance criterion; this hook runs
    # outside pytest's capture, the tests record their summaries
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.passed:
        mod = next((v for k, v in sys.modules.items()
                    if k.endswith("test_acceptance")), None)
        text = getattr(mod, "SUMMARIES", {}).get(num, "")
        line = f"ACCEPTANCE {num:2d}: PASS — {text}"
    else:
        line = f"ACCEPTANCE {num:2d}: FAIL — see {report.nodeid}"
    sys.stderr.write(f"\n{line}\n")
    sys.stderr.flush()
