import pytest

from w3authkit.flexrequest import Policy, load_targets
from w3authkit.vulnsim import SimServer, VulnProfile, fixture_table2, table1_profiles, target_document


def extra_profiles():
    base = dict(domain="strict.test", name="Strict", include_address=True)
    return [
        VulnProfile("strict", **base),
        VulnProfile("no-sig", sig_check=False, **base),
        VulnProfile("no-addr", addr_check=False, **base),
        VulnProfile("contains", body_check="contains", **base),
        VulnProfile("ignore-message", message_check=False, **base),
    ]


@pytest.fixture(scope="session")
def fleet():
    profiles = fixture_table2() + table1_profiles() + extra_profiles()
    with SimServer(profiles) as sim:
        targets = {t.label: t for t in load_targets(target_document(profiles, sim.root_url))}
        yield sim, targets


@pytest.fixture(scope="session")
def targets(fleet):
    return fleet[1]


@pytest.fixture(scope="session")
def sim(fleet):
    return fleet[0]


@pytest.fixture
def policy():
    return Policy(timeout=5)


# -- acceptance summary: one line per criterion, printed after the run

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed:
        _ACCEPTANCE[n] = ("FAIL", title, detail)
    elif rep.when == "call":
        _ACCEPTANCE[n] = ("PASS", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[n]
        line = f"criterion {n}: {status}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
