import pytest

_LINES = pytest.StashKey[list]()
_REPORT = pytest.StashKey[object]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if call.when == "call":
        item.stash[_REPORT] = rep
    return rep


@pytest.fixture
def criterion(request):
    """Record ``(number, ok, detail)`` for the end-of-run summary, then assert ``ok``."""
    seen = {}

    def verdict(number, ok, detail=""):
        seen["n"] = number
        status = "PASS" if ok else "FAIL"
        request.config.stash[_LINES].append(f"criterion {number}: {status}  {detail}".rstrip())
        assert ok, f"criterion {number}: {detail}"

    def skipped(number, reason):
        seen["n"] = number
        request.config.stash[_LINES].append(f"criterion {number}: SKIP  {reason}")
        pytest.skip(reason)

    verdict.skip = skipped
    yield verdict
    rep = request.node.stash.get(_REPORT, None)
    if "n" not in seen and rep is not None and rep.failed:
        request.config.stash[_LINES].append(f"{request.node.name}: FAIL  (error before verdict)")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=_order):
            terminalreporter.write_line(line)


def _order(line):
    parts = line.split()
    try:
        return (int(parts[1].rstrip(":")), line)
    except (IndexError, ValueError):
        return (99, line)
