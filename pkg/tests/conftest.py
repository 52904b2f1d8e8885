import pytest

from hamgeom import acceptance

_RESULTS: dict[int, list] = {}


@pytest.fixture(scope="session")
def acceptance_results():
    """Run every criterion once per seed and share the results across tests."""

    def get(seed: int = 0):
        if seed not in _RESULTS:
            _RESULTS[seed] = acceptance.run_all(seed, echo=print)
        return _RESULTS[seed]

    return get


def pytest_terminal_summary(terminalreporter):
    for seed, results in sorted(_RESULTS.items()):
        terminalreporter.section(f"acceptance criteria (seed {seed})")
        for res in results:
            terminalreporter.write_line(res.line())
