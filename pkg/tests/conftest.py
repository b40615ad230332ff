import functools

import numpy as np
import pytest

from harmval import family
from harmval.planar import PlanarHarmonicField, solve
from harmval.poly import ComplexUnivariate


def random_field(seed, n_max=6, q_scale=3.0):
    """Gaussian instance with 2 <= n <= n_max and 0 <= m < n."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(0, n))
    p = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    q = q_scale * (rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1))
    return PlanarHarmonicField(ComplexUnivariate(p), ComplexUnivariate(q))


@functools.lru_cache(maxsize=None)
def family_report(n, eps, certify=True):
    inst = family.build(n, complex(1.0, eps))
    return inst, solve(inst.field, certify=certify)


@pytest.fixture(scope="session")
def family8():
    return family_report(8, 0.04)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in rep.nodeid or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and outcome == "passed":
                continue
            props = dict(rep.user_properties)
            if "criterion" not in props:
                continue
            rows.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL", props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, detail in sorted(rows):
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {detail}")
