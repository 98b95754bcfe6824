"""Bond-bond (z-bond energy) correlations in the vortex-free ground state.

For two z-bonds at cells r1 and r2 = r1 - d the four-point function is the
double momentum sum

    (1/N^2) sum_{q != q'} {cos[(q - q').d] - 1} (D_q D_q' - e_q e_q') / (E_q E_q')

with N = 2 L^2 and the single-bond value is ``(1/N) sum_q e_q / E_q``.
Expanding the cosine splits the connected part into squared Fourier sums,
``C(d) = (|S_D(d)|^2 - |S_e(d)|^2) / N^2`` with ``S_X(d) = sum_q e^{iq.d} X_q/E_q``,
which is what the fast path evaluates for every d with one pair of 2-D FFTs.

Displacements ``d = (d1, d2)`` are integer cell offsets conjugate to the
momenta, so the phase is ``q.d = q_x d1 + q_y d2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, InvalidArgumentError
from .model import Couplings, Phase, check_size, grid_spectrum, momentum_grid, phase_of, require_gapped
from .summation import csum

# Cut used for distance profiles: d = r * DIAGONAL, phase (q_x - q_y) r.
DIAGONAL = (1, -1)
CUT_CONVENTION = "diagonal d=(r,-r) in q-conjugate cell coordinates; phase (qx-qy)*r"


def _ratios(c: Couplings, L):
    grid = momentum_grid(L)
    eps, delta, energy = grid_spectrum(c, grid)
    require_gapped(c, grid, energy)
    return grid, eps / energy, delta / energy


def bond_expectation(c: Couplings, L) -> float:
    """``<s^z s^z>`` on one z-bond, ``(1/N) sum_q e_q/E_q`` with N = 2 L^2.

    This keeps the 1/N normalization of the momentum sum; the
    Hellmann-Feynman value ``-dE0/dJz / L^2`` per z-bond is twice as large.
    """
    grid, y, _ = _ratios(c, L)
    return csum(y) / grid.n_sites


def _check_displacement(d, L):
    d1, d2 = (int(v) for v in d)
    if d1 % L == 0 and d2 % L == 0:
        raise InvalidArgumentError(f"displacement {tuple(d)} is zero modulo L={L}")
    return d1, d2


class _DoubleSum:
    """The q-pair weights of the explicit double sum, built once per (c, L)."""

    def __init__(self, c: Couplings, L):
        self.L = check_size(L)
        grid, y, x = _ratios(c, self.L)
        self.grid = grid
        self.weights = np.outer(x, x) - np.outer(y, y)
        self.bond = csum(y) / grid.n_sites

    def four_point(self, d):
        d1, d2 = _check_displacement(d, self.L)
        phase = self.grid.qx * d1 + self.grid.qy * d2
        kernel = np.cos(phase[:, None] - phase[None, :]) - 1.0
        np.fill_diagonal(kernel, 0.0)
        return csum(kernel * self.weights) / self.grid.n_sites**2


def four_point_naive(c: Couplings, L, d) -> float:
    """Four-spin expectation from the explicit O(L^4) double sum over q != q'."""
    return _DoubleSum(c, L).four_point(d)


def connected_correlation(c: Couplings, L, d) -> float:
    return four_point_naive(c, L, d) - bond_expectation(c, L) ** 2


def connected_correlation_many(c: Couplings, L, displacements) -> np.ndarray:
    """Naive C(d) for several displacements, sharing the O(L^4) weights."""
    ds = _DoubleSum(c, L)
    return np.array([ds.four_point(d) - ds.bond**2 for d in displacements])


@dataclass(frozen=True)
class CorrelationProfile:
    """C(d) for every cell displacement on an L x L torus.

    ``values[d1 % L, d2 % L]`` holds C(d); the origin is NaN (the formula
    needs r1 != r2).
    """

    L: int
    couplings: Couplings
    values: np.ndarray = field(repr=False)
    convention: str = CUT_CONVENTION

    def at(self, d):
        d1, d2 = _check_displacement(d, self.L)
        return float(self.values[d1 % self.L, d2 % self.L])

    def cut(self, r_max=None):
        """``(r, C)`` along the diagonal cut for r = 1 .. r_max (default (L-1)/2)."""
        if r_max is None:
            r_max = (self.L - 1) // 2
        r = np.arange(1, int(r_max) + 1)
        a, b = DIAGONAL
        return r, self.values[(a * r) % self.L, (b * r) % self.L].copy()

    def centered(self):
        """Values on displacements -(L-1)/2 .. (L-1)/2, origin in the middle."""
        return np.fft.fftshift(self.values)


def fourier_sums(c: Couplings, L):
    """``S_e(d), S_D(d)`` for every d, indexed ``[d1 % L, d2 % L]``."""
    L = check_size(L)
    grid, y, x = _ratios(c, L)
    # grid is row-major over n = -(L-1)/2 .. (L-1)/2; ifftshift moves n to n mod L
    y = np.fft.ifftshift(y.reshape(L, L))
    x = np.fft.ifftshift(x.reshape(L, L))
    scale = L * L
    return np.fft.ifft2(y) * scale, np.fft.ifft2(x) * scale


def correlation_profile_fast(c: Couplings, L) -> CorrelationProfile:
    L = check_size(L)
    s_eps, s_delta = fourier_sums(c, L)
    n_sites = 2 * L * L
    values = (np.abs(s_delta) ** 2 - np.abs(s_eps) ** 2) / n_sites**2
    values[0, 0] = np.nan
    return CorrelationProfile(L=L, couplings=c, values=values)


def correlation_length_theory(jz) -> float:
    """``xi`` from ``1/xi = 2 asinh(sqrt(2 jz - 1) / (1 - jz))`` on the jx = jy line.

    This is the decay length of the single-fermion sums S(d) along the
    diagonal cut; C ~ |S|^2 decays with 1/xi_C = 2/xi.
    """
    jz = float(jz)
    if not 0.5 < jz < 1.0:
        raise DomainError(f"correlation length formula needs 1/2 < jz < 1, got {jz}")
    return 1.0 / (2.0 * math.asinh(math.sqrt(2.0 * jz - 1.0) / (1.0 - jz)))


@dataclass(frozen=True)
class DecayFit:
    kind: str  # "exponential" or "power"
    value: float  # xi for exponential fits, the exponent for power laws
    stderr: float
    window: tuple
    r_used: np.ndarray = field(repr=False)
    residual: float = 0.0  # RMS residual of ln|C|
    prefactor_power: float = 0.0
    prefactor_stderr: float = 0.0

    @property
    def xi(self):
        if self.kind != "exponential":
            raise AttributeError("xi is only defined for exponential fits")
        return self.value

    @property
    def inverse_length(self):
        return 1.0 / self.xi

    @property
    def exponent(self):
        if self.kind != "power":
            raise AttributeError("exponent is only defined for power-law fits")
        return self.value

    @property
    def n_points(self):
        return len(self.r_used)


def usable_points(r, values, window, dip_factor=2.0, floor=0.0):
    """Mask of points fit to ``ln|C|``.

    Drops points outside the window, zeros, values at or below ``floor``,
    points next to a sign change, and isolated dips where |C| is more than
    ``dip_factor`` times smaller than both neighbours (a zero crossing that
    falls between lattice points).  Neighbours are taken from the full
    arrays, not just the window.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    if not lo <= hi:
        raise InvalidArgumentError(f"empty fit window {window}")
    a = np.abs(v)
    mask = (r >= lo) & (r <= hi) & np.isfinite(v) & (a > floor)
    sign = np.sign(v)
    flip = np.zeros(len(v), dtype=bool)
    flip[:-1] |= sign[:-1] != sign[1:]
    flip[1:] |= sign[:-1] != sign[1:]
    mask &= ~flip
    if dip_factor is not None and len(v) >= 3:
        dip = np.zeros(len(v), dtype=bool)
        dip[1:-1] = (a[1:-1] * dip_factor < a[:-2]) & (a[1:-1] * dip_factor < a[2:])
        mask &= ~dip
    return mask


def _lstsq(design, y):
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(y) - design.shape[1]
    rms = math.sqrt(float(np.mean(resid**2)))
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        err = np.sqrt(np.diag(cov))
    else:
        err = np.full(design.shape[1], np.nan)
    return coef, err, rms


def _check_phase(couplings, wanted):
    if couplings is None:
        return
    phase = phase_of(couplings)
    if phase is not wanted:
        kind = "exponential" if wanted is Phase.A else "power-law"
        raise FitError(f"{kind} fits are only accepted in phase {wanted.value}; {couplings} is {phase.value}")


def fit_exponential(
    r, values, window=(3, 12), prefactor_power=0.0, dip_factor=2.0, floor=1e-30, couplings=None
) -> DecayFit:
    """Fit ``ln|C| = a - r/xi - p ln r`` over the window.

    ``prefactor_power=0`` is a plain log-linear fit; a number fixes p; None
    fits p as a free parameter, which removes the algebraic prefactor bias
    that short windows otherwise put into xi.  ``floor`` drops values at the
    FFT round-off level.
    """
    _check_phase(couplings, Phase.A)
    mask = usable_points(r, values, window, dip_factor, floor)
    n_min = 4 if prefactor_power is None else 3
    if mask.sum() < n_min:
        raise FitError(f"only {int(mask.sum())} usable points in window {window}, need {n_min}")
    x = np.asarray(r, dtype=float)[mask]
    y = np.log(np.abs(np.asarray(values, dtype=float)[mask]))
    if prefactor_power is None:
        design = np.column_stack([np.ones_like(x), -x, -np.log(x)])
        coef, err, rms = _lstsq(design, y)
        p, p_err = float(coef[2]), float(err[2])
    else:
        y = y + prefactor_power * np.log(x)
        design = np.column_stack([np.ones_like(x), -x])
        coef, err, rms = _lstsq(design, y)
        p, p_err = float(prefactor_power), 0.0
    inv, inv_err = float(coef[1]), float(err[1])
    if inv <= 0:
        raise FitError(f"fitted decay rate {inv} is not positive; data do not decay")
    return DecayFit(
        kind="exponential",
        value=1.0 / inv,
        stderr=inv_err / inv**2,
        window=tuple(window),
        r_used=x.astype(int),
        residual=rms,
        prefactor_power=p,
        prefactor_stderr=p_err,
    )


def fit_power_law(r, values, window=(6, 14), dip_factor=2.0, floor=0.0, couplings=None) -> DecayFit:
    """Fit ``ln|C| = a - k ln r``; returns k as the exponent."""
    _check_phase(couplings, Phase.B)
    mask = usable_points(r, values, window, dip_factor, floor)
    if mask.sum() < 3:
        raise FitError(f"only {int(mask.sum())} usable points in window {window}, need 3")
    x = np.asarray(r, dtype=float)[mask]
    y = np.log(np.abs(np.asarray(values, dtype=float)[mask]))
    design = np.column_stack([np.ones_like(x), -np.log(x)])
    coef, err, rms = _lstsq(design, y)
    return DecayFit(
        kind="power",
        value=float(coef[1]),
        stderr=float(err[1]),
        window=tuple(window),
        r_used=x.astype(int),
        residual=rms,
    )


def long_range_witness(c: Couplings, L) -> float:
    """|C| at the farthest point of the diagonal cut, r = (L-1)/2."""
    profile = correlation_profile_fast(c, L)
    r, values = profile.cut()
    return abs(float(values[-1]))
