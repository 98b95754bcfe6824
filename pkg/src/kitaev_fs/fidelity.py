"""Ground-state fidelity, Riemann metric and fidelity susceptibility.

The ground state is a product over momenta of two-level states rotated by the
half-angle theta_q, so the overlap of two ground states is
``F = prod_q |cos(theta_q - theta'_q)|`` and the metric is
``g_ab = sum_q d(theta_q)/dJ_a d(theta_q)/dJ_b``.  The closed forms on the two
special lines are evaluated on a symmetry-reduced set of momenta with exact
power-of-two multiplicities, which lets long sweeps at L ~ 10^3 stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneracyError, InvalidArgumentError, OracleError
from .model import (
    Couplings,
    EvolutionLine,
    LineKind,
    check_size,
    dispersion,
    grid_theta,
    momentum_grid,
    require_gapped,
    zero_mode_mask,
)
from .summation import csum


def log_fidelity(c1: Couplings, c2: Couplings, L) -> float:
    """``ln F = sum_q ln|cos(theta_q - theta'_q)|``; ``-inf`` for orthogonal states."""
    grid = momentum_grid(L)
    dtheta = grid_theta(c1, grid) - grid_theta(c2, grid)
    # |cos| is pi-periodic; fold into [-pi/2, pi/2] first
    dtheta = dtheta - np.pi * np.round(dtheta / np.pi)
    small = np.abs(dtheta) < np.pi / 4
    with np.errstate(divide="ignore"):
        terms = np.where(
            small,
            0.5 * np.log1p(-np.sin(dtheta) ** 2),
            np.log(np.abs(np.cos(dtheta))),
        )
    if np.isneginf(terms).any():
        return -math.inf
    return csum(terms)


def fidelity(c1: Couplings, c2: Couplings, L) -> float:
    """Ground-state overlap ``|<psi(c1)|psi(c2)>|`` in [0, 1].

    Accumulated in log space.  Returns exactly 0.0 when the states are
    orthogonal or the product underflows; check ``log_fidelity`` to tell the
    two apart.
    """
    return math.exp(log_fidelity(c1, c2, L))


def _sign(delta, zero_delta_sign):
    return np.where(delta > 0, 1.0, np.where(delta < 0, -1.0, zero_delta_sign))


def _gradient_arrays(c: Couplings, qx, qy, zero_delta_sign=1.0):
    eps, delta = dispersion(c, qx, qy)
    e2 = eps * eps + delta * delta
    sgn = _sign(delta, zero_delta_sign)
    sxy = np.sin(qx - qy)
    dx = (c.jz * np.sin(qx) + c.jy * sxy) / e2 * sgn
    dy = -(c.jx * sxy - c.jz * np.sin(qy)) / e2 * sgn
    dz = -(c.jx * np.sin(qx) + c.jy * np.sin(qy)) / e2 * sgn
    return np.stack([dx, dy, dz]), np.sqrt(e2)


def theta_gradient(c: Couplings, q, zero_delta_sign=1.0) -> np.ndarray:
    """``d(2 theta_q)/dJ_a`` for a = x, y, z at one momentum.

    Carries the factor ``sgn(delta_q)`` (taken as ``zero_delta_sign`` when
    delta_q = 0); every quantity built from it squares the sign away.
    """
    qx, qy = q
    grads, energy = _gradient_arrays(
        c, np.asarray(qx, float), np.asarray(qy, float), zero_delta_sign
    )
    if zero_mode_mask(c, energy):
        raise DegeneracyError(f"zero mode at q={tuple(q)} for {c}", where=(c, tuple(q)))
    return grads.reshape(3)


@dataclass(frozen=True)
class MetricTensor:
    g: np.ndarray

    def contract(self, n) -> float:
        n = np.asarray(n, dtype=float)
        return float(n @ self.g @ n)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.g)

    def __getitem__(self, idx):
        return self.g[idx]


def metric_tensor(c: Couplings, L, zero_delta_sign=1.0) -> MetricTensor:
    """``g_ab = (1/4) sum_q d(2theta)/dJ_a d(2theta)/dJ_b`` over the grid."""
    grid = momentum_grid(L)
    grads, energy = _gradient_arrays(c, grid.qx, grid.qy, zero_delta_sign)
    require_gapped(c, grid, energy)
    g = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            g[a, b] = g[b, a] = 0.25 * csum(grads[a] * grads[b])
    return MetricTensor(g)


def chi_f(c: Couplings, n, L) -> float:
    """Fidelity susceptibility along direction ``n``: ``sum_ab g_ab n^a n^b``.

    The contraction is taken per momentum before the sum,
    ``(1/4) sum_q (n . d(2theta_q)/dJ)^2``, which is the same bilinear form
    but avoids cancellation between large metric entries.
    """
    n = np.asarray(n, dtype=float).reshape(3)
    grid = momentum_grid(L)
    grads, energy = _gradient_arrays(c, grid.qx, grid.qy)
    require_gapped(c, grid, energy)
    return 0.25 * csum((n @ grads) ** 2)


@lru_cache(maxsize=32)
def _reduced_momenta(L, swap_symmetric):
    """Orbit representatives of the grid under q -> -q (and qx <-> qy).

    Returns ``(qx, qy, weight)``; weights are orbit sizes 1, 2 or 4, so
    ``sum(weight * f(rep))`` is the full-grid sum of any f that is invariant
    under the group, with the products exact in floating point.
    """
    grid = momentum_grid(L)
    half = (L - 1) // 2
    nx, ny = grid.n[:, 0], grid.n[:, 1]

    def key(a, b):
        return (a + half) * L + (b + half)

    images = [key(nx, ny), key(-nx, -ny)]
    if swap_symmetric:
        images += [key(ny, nx), key(-ny, -nx)]
    canonical = np.min(np.stack(images), axis=0)
    reps, weight = np.unique(canonical, return_counts=True)
    rx = reps // L - half
    ry = reps % L - half
    qx = 2 * np.pi * rx / L
    qy = 2 * np.pi * ry / L
    weight = weight.astype(float)
    for arr in (qx, qy, weight):
        arr.setflags(write=False)
    return qx, qy, weight


class LineKernel:
    """Closed-form susceptibility and gap along one special line for one L.

    The lambda-independent trigonometric factors are computed once, so a sweep
    costs one vector pass per sample.
    """

    def __init__(self, line: EvolutionLine, L):
        if line.kind is LineKind.SEGMENT:
            raise InvalidArgumentError("closed forms exist only for jx-eq-jy and jz-third")
        self.line = line
        self.L = check_size(L)
        swap = line.kind is LineKind.JX_EQ_JY
        self.qx, self.qy, self.weight = _reduced_momenta(self.L, swap)
        if swap:
            self.numerator = np.sin(self.qx) + np.sin(self.qy)
            self.prefactor = 1.0 / 16.0
        else:
            self.numerator = (np.sin(self.qx) - np.sin(self.qy)) + 2.0 * np.sin(
                self.qx - self.qy
            )
            self.prefactor = 1.0 / 36.0

    def energy_squared(self, c: Couplings):
        eps, delta = dispersion(c, self.qx, self.qy)
        return eps * eps + delta * delta

    def evaluate(self, lam):
        """``(chi_F, gap)`` at lambda; raises DegeneracyError on a grid zero mode."""
        c = self.line.point(lam)
        e2 = self.energy_squared(c)
        gap = 2.0 * math.sqrt(float(e2.min()))
        if zero_mode_mask(c, np.sqrt(e2)).any():
            raise DegeneracyError(
                f"zero mode on the L={self.L} grid at lambda={lam!r}", where=(c, None)
            )
        chi = self.prefactor * csum(self.weight * (self.numerator / e2) ** 2)
        return chi, gap


def chi_line_closed_form(line, lam, L) -> float:
    """Closed-form chi_F on the jx = jy line or the jz = 1/3 line."""
    if isinstance(line, (str, LineKind)):
        line = EvolutionLine(LineKind(line))
    return LineKernel(line, L).evaluate(lam)[0]


def chi_finite_difference(line: EvolutionLine, lam, dlam, L) -> float:
    """Oracle ``-2 ln F / dlam^2`` averaged over forward and backward steps."""
    if not dlam > 0:
        raise InvalidArgumentError(f"dlam must be positive, got {dlam!r}")
    c0 = line.point(lam)
    values = []
    for step in (dlam, -dlam):
        lf = log_fidelity(c0, line.point(lam + step), L)
        if not math.isfinite(lf):
            raise OracleError(f"fidelity underflow between lambda={lam} and {lam + step}")
        values.append(-2.0 * lf / (dlam * dlam))
    return 0.5 * (values[0] + values[1])

