import random

import pytest

from cachesieve import SieveError, validate_params

ACCEPTANCE_LINES: list[str] = []


def random_params(rng: random.Random, l_range=(4, 16), n_range=(1, 8), f_extra=10, v_max=None):
    """A valid test-mode instance; f spans from tiny to ~2**(l+f_extra) so circles get populated."""
    while True:
        l = rng.randint(*l_range)
        n = rng.randint(*n_range)
        f = rng.randint(1, 1 << (l + rng.randint(0, f_extra)))
        try:
            params = validate_params(l, f, n, test_mode=True)
        except SieveError:
            continue
        if v_max is not None and params.v > v_max:
            continue
        return params


@pytest.fixture
def rng():
    return random.Random(20111108)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
