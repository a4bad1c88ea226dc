import cmath
import functools

import pytest

from equilib import oracle, params
from equilib.params import ProblemSpec

# (n, d) pairs with d < n and with n < d < 2n
LOWER_PAIRS = [(2, 1), (3, 2), (9, 7), (5, 3), (4, 1)]
UPPER_PAIRS = [(2, 3), (3, 5), (5, 8), (9, 11), (4, 7)]
RATIOS = [0.2, 0.5, 0.8, 1.3, 2.0]
AREAS = [1.0, 0.5, 2.0]


def t_cr(n, d, T=1.0):
    return params.critical_threshold(ProblemSpec(n, d, T))


def spec_at(n, d, ratio, T=1.0, phase=0.0):
    return ProblemSpec(n, d, T, ratio * t_cr(n, d, T) * cmath.exp(1j * phase))


def spec_grid():
    """50 non-critical specs: both regimes, both d < n and n < d < 2n, varied T and phase."""
    out = []
    for i, (n, d) in enumerate(LOWER_PAIRS + UPPER_PAIRS):
        for j, ratio in enumerate(RATIOS):
            T = AREAS[(i + j) % len(AREAS)]
            out.append(spec_at(n, d, ratio, T, phase=0.7 * (i + 2 * j)))
    return out


SPEC_GRID = spec_grid()
PRE_GRID = [s for s in SPEC_GRID if s.abs_t < t_cr(s.n, s.d, s.T)]
POST_GRID = [s for s in SPEC_GRID if s.abs_t > t_cr(s.n, s.d, s.T)]


def spec_id(spec):
    return f"n{spec.n}d{spec.d}T{spec.T:g}t{spec.abs_t:.3g}"


@functools.lru_cache(maxsize=None)
def gas_run(n, d, T, t, N, seed):
    return oracle.minimize_gas(ProblemSpec(n, d, T, t), N, seed=seed)


@pytest.fixture
def gas():
    return gas_run


# acceptance lines are echoed again in the terminal summary so they survive output capture
ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
