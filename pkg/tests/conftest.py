from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hybridkex.dual_sig import dual_keygen  # noqa: E402
from hybridkex.qkd import KeyManagementEntity, KmeConfig, KmeHttpServer  # noqa: E402

LINK_SEED = bytes(range(32))


@pytest.fixture(scope="session")
def alice():
    return dual_keygen(random.Random(0xA11CE))


@pytest.fixture(scope="session")
def bob():
    return dual_keygen(random.Random(0xB0B))


@pytest.fixture(scope="session")
def mallory():
    return dual_keygen(random.Random(0xBAD))


def kme_config(**kw) -> KmeConfig:
    base = dict(link_seed=LINK_SEED, epoch=0, key_count=64, key_size_bits=256)
    base.update(kw)
    return KmeConfig(**base)


@pytest.fixture
def kme_factory():
    servers = []

    def make(**kw):
        srv = KmeHttpServer(KeyManagementEntity(kme_config(**kw))).start()
        servers.append(srv)
        return srv

    yield make
    for s in servers:
        s.stop()


@pytest.fixture
def kme(kme_factory):
    return kme_factory()


# -- acceptance reporting ------------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _ACCEPTANCE[number] = (verdict, title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        verdict, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
