"""Independent brute-force oracles shared by the test modules.

Nothing here calls into the package's enumeration or sampling code.
"""

import numpy as np
import pytest


def brute_matchings(n):
    """All perfect matchings of range(n) as partner lists, by plain recursion."""

    def rec(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for k, partner in enumerate(rest):
            for sub in rec(rest[:k] + rest[k + 1:]):
                yield [(first, partner)] + sub

    out = []
    for pairs in rec(list(range(n))):
        p = [0] * n
        for a, b in pairs:
            p[a], p[b] = b, a
        out.append(p)
    return out


def brute_u(m, p):
    return sum(float(m[i][p[i]]) for i in range(len(p)))


def brute_moments(m):
    """Mean and population variance of U over every matching."""
    n = len(m)
    us = np.array([brute_u(m, p) for p in brute_matchings(n)])
    return us.mean(), us.var()


def random_symmetric_int(rng, n, low=-5, high=6):
    a = rng.integers(low, high, size=(n, n)).astype(float)
    a = np.triu(a, 1)
    return a + a.T


def random_asymmetric_zero_diag(rng, n):
    g = rng.normal(size=(n, n))
    np.fill_diagonal(g, 0.0)
    return g


def double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@pytest.fixture
def example4():
    """n = 4 with e_12 = e_21 = 1 (1-based) and everything else 0."""
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    return a


@pytest.fixture
def rng():
    return np.random.default_rng(20031101)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
