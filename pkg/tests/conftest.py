from __future__ import annotations

from collections import defaultdict

import pytest

CRITERIA = {
    1: "product charpoly, hermitised ordering",
    2: "product charpoly, mixed ordering",
    3: "kernel cross-moments",
    4: "Hermite single matrix",
    5: "single non-Hermitian matrix",
    6: "minor-product expectations",
    7: "Cauchy-Binet residual",
    8: "refined zero locations",
    9: "uniform asymptotics decay slope",
    10: "local scaling near a ring",
    11: "Gaussian Lyapunov exponents",
    12: "zeros vs exponents interval",
    13: "digamma",
    14: "complex-zero figure data",
    15: "determinism across worker counts",
}

_outcomes: dict[int, list[str]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[int(marker.args[0])].append("passed" if rep.passed else rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        got = _outcomes.get(n)
        if not got:
            continue
        ok = sum(o == "passed" for o in got)
        status = "PASS" if ok == len(got) else "FAIL"
        tr.write_line(f"criterion {n:2d}: {status}  ({ok}/{len(got)} checks)  {CRITERIA[n]}")
