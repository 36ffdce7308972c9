import pytest

from martingale_forecast import SeedSpec, simulate_y_paths

# (y0, sigma, tau) shared by the heavy Monte Carlo checks
REF_Y0, REF_SIGMA, REF_TAU = 0.6, 1.0, 1.0 / 12.0
REF_DT = 1e-4
REF_PATHS = 1_000_000

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def ref_ensemble():
    """10^6 Euler paths at the reference point, dt = 1e-4."""
    return simulate_y_paths(REF_Y0, REF_SIGMA, REF_TAU, REF_DT, REF_PATHS, SeedSpec(20161108))


@pytest.fixture(scope="session")
def acceptance_log():
    def record(cid, passed, detail=""):
        _ACCEPTANCE.append((cid, bool(passed), detail))
        print(f"{cid}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0][1:].split(".")[0])):
        terminalreporter.write_line(f"{cid:>4} {'PASS' if ok else 'FAIL'}  {detail}")
