import pytest

from weilcone.models import REFERENCE_MODELS, from_spec


@pytest.fixture(scope="session")
def model():
    cache = {}

    def get(spec):
        if spec not in cache:
            cache[spec] = from_spec(spec)
        return cache[spec]

    return get


@pytest.fixture(params=REFERENCE_MODELS)
def any_model(request):
    return from_spec(request.param)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    from contextlib import contextmanager

    @contextmanager
    def record(number, title):
        try:
            yield
        except BaseException as exc:
            line = f"criterion {number}: FAIL  {title}  ({type(exc).__name__}: {exc})"
            ACCEPTANCE_LINES.append(line)
            print(line)
            raise
        line = f"criterion {number}: PASS  {title}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
