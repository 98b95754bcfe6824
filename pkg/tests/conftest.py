"""Independent oracles used across the suite.

These are written from the defining formulas with plain Python loops (or
mpmath) and deliberately share no code with the package beyond Couplings.
"""

import math

import numpy as np
import pytest


def grid_points(L):
    half = (L - 1) // 2
    return [
        (2 * math.pi * nx / L, 2 * math.pi * ny / L)
        for nx in range(-half, half + 1)
        for ny in range(-half, half + 1)
    ]


def eps_delta(c, qx, qy):
    eps = c.jx * math.cos(qx) + c.jy * math.cos(qy) + c.jz
    delta = c.jx * math.sin(qx) + c.jy * math.sin(qy)
    return eps, delta


def brute_theta(c, qx, qy):
    eps, delta = eps_delta(c, qx, qy)
    return 0.5 * math.atan2(delta, eps)


def brute_fidelity(c1, c2, L):
    prod = 1.0
    for qx, qy in grid_points(L):
        prod *= abs(math.cos(brute_theta(c1, qx, qy) - brute_theta(c2, qx, qy)))
    return prod


def brute_gradient(c, qx, qy):
    """d(2 theta)/dJ_a with the sgn(Delta) factor, one momentum at a time."""
    eps, delta = eps_delta(c, qx, qy)
    e2 = eps * eps + delta * delta
    sgn = 1.0 if delta >= 0 else -1.0
    return [
        sgn * (c.jz * math.sin(qx) + c.jy * math.sin(qx - qy)) / e2,
        -sgn * (c.jx * math.sin(qx - qy) - c.jz * math.sin(qy)) / e2,
        -sgn * (c.jx * math.sin(qx) + c.jy * math.sin(qy)) / e2,
    ]


def brute_metric(c, L):
    g = [[0.0] * 3 for _ in range(3)]
    for qx, qy in grid_points(L):
        d = brute_gradient(c, qx, qy)
        for a in range(3):
            for b in range(3):
                g[a][b] += 0.25 * d[a] * d[b]
    return np.array(g)


def brute_closed_form(kind, lam, L):
    """The closed-form line sums, term by term over the full grid."""
    total = 0.0
    if kind == "jx-eq-jy":
        jx = jy = (1 - lam) / 2
        jz, pref = lam, 1 / 16
    else:
        jx, jy, jz, pref = lam, 2 / 3 - lam, 1 / 3, 1 / 36
    for qx, qy in grid_points(L):
        eps = jx * math.cos(qx) + jy * math.cos(qy) + jz
        delta = jx * math.sin(qx) + jy * math.sin(qy)
        e2 = eps * eps + delta * delta
        if kind == "jx-eq-jy":
            num = math.sin(qx) + math.sin(qy)
        else:
            num = (math.sin(qx) - math.sin(qy)) + 2 * math.sin(qx - qy)
        total += (num / e2) ** 2
    return pref * total


def brute_bond(c, L):
    s = 0.0
    for qx, qy in grid_points(L):
        eps, delta = eps_delta(c, qx, qy)
        s += eps / math.hypot(eps, delta)
    return s / (2 * L * L)


def grid_has_zero_mode(c, L, tol=1e-10):
    return any(math.hypot(*eps_delta(c, qx, qy)) < tol for qx, qy in grid_points(L))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# one line per acceptance criterion, collected by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
