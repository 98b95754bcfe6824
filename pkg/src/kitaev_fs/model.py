"""Vortex-free Kitaev honeycomb model in momentum space.

Couplings, the L x L momentum grid, the single-particle dispersion
``E_q = |eps_q + i delta_q|``, ground-state energy, excitation gaps, the two
special evolution lines on the plane ``jx + jy + jz = 1`` and the A/B phase
classification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegeneracyError, InvalidArgumentError
from .summation import csum

PLANE_TOL = 1e-12
# E_q below this fraction of (jx + jy + jz) counts as an exact zero mode.
ZERO_MODE_TOL = 1e-12


@dataclass(frozen=True)
class Couplings:
    jx: float
    jy: float
    jz: float

    def __post_init__(self):
        for name in ("jx", "jy", "jz"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def on_plane(cls, jx, jy, jz, tol=PLANE_TOL):
        c = cls(jx, jy, jz)
        if not c.is_on_plane(tol):
            raise InvalidArgumentError(
                f"couplings ({jx}, {jy}, {jz}) are off the plane jx+jy+jz=1 "
                f"(sum={c.total!r})"
            )
        return c

    @classmethod
    def parse(cls, text, plane=True):
        """Parse ``"jx,jy,jz"``."""
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 3:
            raise InvalidArgumentError(f"expected 'jx,jy,jz', got {text!r}")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise InvalidArgumentError(f"non-numeric coupling in {text!r}") from exc
        return cls.on_plane(*values) if plane else cls(*values)

    @property
    def total(self):
        return self.jx + self.jy + self.jz

    def is_on_plane(self, tol=PLANE_TOL):
        return abs(self.total - 1.0) <= tol

    def as_array(self):
        return np.array([self.jx, self.jy, self.jz])

    def swapped_xy(self):
        return Couplings(self.jy, self.jx, self.jz)

    def __str__(self):
        return f"({self.jx:.17g}, {self.jy:.17g}, {self.jz:.17g})"


def check_size(L):
    """Validate the linear size; returns it as an int."""
    if isinstance(L, bool) or int(L) != L:
        raise InvalidArgumentError(f"L must be an integer, got {L!r}")
    L = int(L)
    if L < 1:
        raise InvalidArgumentError(f"L must be positive, got {L}")
    if L % 2 == 0:
        raise InvalidArgumentError(f"L must be odd, got {L}")
    return L


@dataclass(frozen=True)
class MomentumGrid:
    """Momenta ``2 pi n / L`` with ``n = -(L-1)/2 .. (L-1)/2`` in both directions.

    ``qx`` and ``qy`` are flat arrays in row-major order over ``(n_x, n_y)``.
    """

    L: int
    n: np.ndarray = field(repr=False)
    qx: np.ndarray = field(repr=False)
    qy: np.ndarray = field(repr=False)

    @property
    def size(self):
        return self.L * self.L

    @property
    def n_sites(self):
        return 2 * self.L * self.L

    @property
    def momenta(self):
        return list(zip(self.qx.tolist(), self.qy.tolist()))

    def __len__(self):
        return self.size


def momentum_grid(L) -> MomentumGrid:
    L = check_size(L)
    half = (L - 1) // 2
    n = np.arange(-half, half + 1)
    nx, ny = np.meshgrid(n, n, indexing="ij")
    nx, ny = nx.ravel(), ny.ravel()
    return MomentumGrid(
        L=L,
        n=np.stack([nx, ny], axis=1),
        qx=2 * np.pi * nx / L,
        qy=2 * np.pi * ny / L,
    )


class SpectralPoint(NamedTuple):
    eps: float
    delta: float
    energy: float
    theta: float
    degenerate: bool


def dispersion(c: Couplings, qx, qy):
    """Vectorized ``(eps, delta)`` at momenta ``(qx, qy)``."""
    eps = c.jx * np.cos(qx) + c.jy * np.cos(qy) + c.jz
    delta = c.jx * np.sin(qx) + c.jy * np.sin(qy)
    return eps, delta


def zero_mode_mask(c: Couplings, energy):
    return np.asarray(energy) <= ZERO_MODE_TOL * max(c.total, 1e-300)


def spectral(c: Couplings, q) -> SpectralPoint:
    """Dispersion, quasiparticle energy and Bogoliubov half-angle at one momentum.

    ``theta`` is half of ``atan2(delta, eps)``, so it lies in (-pi/2, pi/2].
    At a zero mode theta is undefined; it is set to 0 and ``degenerate`` is True.
    """
    qx, qy = q
    eps, delta = dispersion(c, qx, qy)
    eps, delta = float(eps), float(delta)
    energy = math.hypot(eps, delta)
    degenerate = bool(zero_mode_mask(c, energy))
    theta = 0.0 if degenerate else 0.5 * math.atan2(delta, eps)
    return SpectralPoint(eps, delta, energy, theta, degenerate)


def grid_spectrum(c: Couplings, grid: MomentumGrid):
    """``(eps, delta, energy)`` arrays over a whole grid."""
    eps, delta = dispersion(c, grid.qx, grid.qy)
    return eps, delta, np.hypot(eps, delta)


def grid_theta(c: Couplings, grid: MomentumGrid):
    """Half-angles over a grid; raises :class:`DegeneracyError` at zero modes."""
    eps, delta, energy = grid_spectrum(c, grid)
    require_gapped(c, grid, energy)
    return 0.5 * np.arctan2(delta, eps)


def require_gapped(c, grid, energy):
    bad = zero_mode_mask(c, energy)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        q = (float(grid.qx[i]), float(grid.qy[i]))
        raise DegeneracyError(
            f"zero mode E_q=0 at q={q} for couplings {c} on L={grid.L}",
            where=(c, q),
        )


def ground_energy(c: Couplings, L) -> float:
    """``E0 = -sum_q E_q``."""
    _, _, energy = grid_spectrum(c, momentum_grid(L))
    return -csum(energy)


def lowest_excitations(c: Couplings, L, k) -> np.ndarray:
    """The ``k`` smallest single-mode excitation energies ``2 E_q``, ascending."""
    grid = momentum_grid(L)
    if not 1 <= k <= grid.size:
        raise InvalidArgumentError(f"k must be in [1, {grid.size}], got {k}")
    _, _, energy = grid_spectrum(c, grid)
    smallest = np.partition(energy, k - 1)[:k]
    return 2.0 * np.sort(smallest)


def gap(c: Couplings, L) -> float:
    _, _, energy = grid_spectrum(c, momentum_grid(L))
    return 2.0 * float(energy.min())


class LineKind(enum.Enum):
    JX_EQ_JY = "jx-eq-jy"
    JZ_THIRD = "jz-third"
    SEGMENT = "segment"


@dataclass(frozen=True)
class EvolutionLine:
    """A path ``J(lambda)`` on the coupling plane.

    ``JX_EQ_JY``: lambda = jz in (0, 1), jx = jy = (1 - jz) / 2.
    ``JZ_THIRD``: lambda = jx in (0, 2/3), jy = 2/3 - jx, jz = 1/3.
    ``SEGMENT``: affine interpolation start -> end for lambda in [0, 1].
    """

    kind: LineKind
    start: Couplings | None = None
    end: Couplings | None = None

    def __post_init__(self):
        if self.kind is LineKind.SEGMENT:
            if self.start is None or self.end is None:
                raise InvalidArgumentError("a segment needs start and end couplings")

    @classmethod
    def jx_eq_jy(cls):
        return cls(LineKind.JX_EQ_JY)

    @classmethod
    def jz_third(cls):
        return cls(LineKind.JZ_THIRD)

    @classmethod
    def segment(cls, start, end):
        return cls(LineKind.SEGMENT, start, end)

    @classmethod
    def from_name(cls, name):
        try:
            kind = LineKind(name)
        except ValueError:
            raise InvalidArgumentError(
                f"unknown line {name!r}; expected 'jx-eq-jy' or 'jz-third'"
            ) from None
        if kind is LineKind.SEGMENT:
            raise InvalidArgumentError("segments need explicit endpoints")
        return cls(kind)

    @property
    def domain(self):
        """``(lo, hi, closed)`` range of the line parameter."""
        if self.kind is LineKind.JX_EQ_JY:
            return 0.0, 1.0, False
        if self.kind is LineKind.JZ_THIRD:
            return 0.0, 2.0 / 3.0, False
        return 0.0, 1.0, True

    def contains(self, lam):
        lo, hi, closed = self.domain
        return lo <= lam <= hi if closed else lo < lam < hi

    def point(self, lam) -> Couplings:
        lam = float(lam)
        if not self.contains(lam):
            lo, hi, closed = self.domain
            brackets = "[]" if closed else "()"
            raise InvalidArgumentError(
                f"lambda={lam!r} outside {self.kind.value} range "
                f"{brackets[0]}{lo:g}, {hi:g}{brackets[1]}"
            )
        if self.kind is LineKind.JX_EQ_JY:
            half = (1.0 - lam) / 2.0
            return Couplings(half, half, lam)
        if self.kind is LineKind.JZ_THIRD:
            return Couplings(lam, 2.0 / 3.0 - lam, 1.0 / 3.0)
        a, b = self.start.as_array(), self.end.as_array()
        return Couplings(*((1.0 - lam) * a + lam * b))

    def tangent(self):
        if self.kind is LineKind.JX_EQ_JY:
            return np.array([-0.5, -0.5, 1.0])
        if self.kind is LineKind.JZ_THIRD:
            return np.array([1.0, -1.0, 0.0])
        return self.end.as_array() - self.start.as_array()


def line_point(line: EvolutionLine, lam) -> Couplings:
    return line.point(lam)


def line_tangent(line: EvolutionLine) -> np.ndarray:
    return line.tangent()


class Phase(enum.Enum):
    A = "A"
    B = "B"
    BOUNDARY = "Boundary"


def phase_of(c: Couplings, tol=PLANE_TOL) -> Phase:
    """Gapped A phase if some coupling exceeds 1/2, gapless B phase if all are below."""
    if not c.is_on_plane():
        raise InvalidArgumentError(f"phase_of needs on-plane couplings, got {c}")
    largest = max(c.jx, c.jy, c.jz)
    if abs(largest - 0.5) <= tol:
        return Phase.BOUNDARY
    return Phase.A if largest > 0.5 else Phase.B
