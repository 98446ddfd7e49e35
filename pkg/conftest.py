import pytest

from rrindep import settings


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo acceptance checks, run with RRINDEP_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if settings.run_slow_checks():
        return
    skip_slow = pytest.mark.skip(reason="set RRINDEP_RUN_SLOW=1 to run Monte-Carlo checks")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
