"""Susceptibility sweeps, peak detection and finite-size scaling.

The peak of chi_F/N at J_z^max grows as L^mu, and near the peak the curves of
different sizes collapse onto ``(chi_max - chi)/chi = f[L^nu (lambda - lambda_max)]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CollapseError, DegeneracyError, DomainError, InvalidArgumentError
from .fidelity import LineKernel, chi_f
from .model import EvolutionLine, LineKind, check_size, gap


@dataclass
class SweepRecord:
    line: EvolutionLine
    L: int
    lam: np.ndarray
    chi: np.ndarray
    gap: np.ndarray
    skipped: list = field(default_factory=list)  # (lambda, reason)

    @property
    def n_sites(self):
        return 2 * self.L * self.L

    @property
    def chi_per_site(self):
        return self.chi / self.n_sites

    def __len__(self):
        return len(self.lam)

    def restrict(self, window):
        lo, hi = window
        m = (self.lam >= lo) & (self.lam <= hi)
        return SweepRecord(self.line, self.L, self.lam[m], self.chi[m], self.gap[m], list(self.skipped))


def _segment_sample(line, L, lam):
    c = line.point(lam)
    return chi_f(c, line.tangent(), L), gap(c, L)


def sweep(line: EvolutionLine, lam_lo, lam_hi, steps, L, workers=1) -> SweepRecord:
    """chi_F and gap on a uniform lambda grid.

    Samples with a zero mode on the grid are dropped and listed in
    ``skipped``.  ``workers`` only changes how samples are distributed over
    threads; each sample is computed identically, so results are bitwise
    independent of it.
    """
    L = check_size(L)
    steps = int(steps)
    if steps < 2:
        raise InvalidArgumentError(f"steps must be >= 2, got {steps}")
    if not lam_lo < lam_hi:
        raise InvalidArgumentError(f"empty lambda window [{lam_lo}, {lam_hi}]")
    for lam in (lam_lo, lam_hi):
        if not line.contains(lam):
            raise InvalidArgumentError(f"lambda={lam} is outside the {line.kind.value} range")
    grid = np.linspace(lam_lo, lam_hi, steps)

    if line.kind is LineKind.SEGMENT:
        def evaluate(lam):
            return _segment_sample(line, L, lam)
    else:
        evaluate = LineKernel(line, L).evaluate

    def safe(lam):
        try:
            return evaluate(lam)
        except DegeneracyError as exc:
            return exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            results = list(pool.map(safe, grid))
    else:
        results = [safe(lam) for lam in grid]

    lam_ok, chi, gaps, skipped = [], [], [], []
    for lam, res in zip(grid, results):
        if isinstance(res, Exception):
            skipped.append((float(lam), str(res)))
            continue
        lam_ok.append(lam)
        chi.append(res[0])
        gaps.append(res[1])
    return SweepRecord(line, L, np.array(lam_ok), np.array(chi), np.array(gaps), skipped)


@dataclass
class PeakSet:
    peaks: np.ndarray  # rows of (lambda, chi) at strict local maxima
    lam_max: float
    chi_max: float
    window: tuple
    interior: bool  # global max had neighbours on both sides and was refined

    @property
    def count(self):
        return len(self.peaks)


def strict_local_maxima(y):
    y = np.asarray(y)
    if len(y) < 3:
        return np.array([], dtype=int)
    return np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1


def strict_local_minima(y):
    return strict_local_maxima(-np.asarray(y))


def parabolic_vertex(x, y, i):
    """Vertex of the parabola through samples i-1, i, i+1 of a uniform grid."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    h = x[i + 1] - x[i]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0:
        return x[i], y1
    shift = 0.5 * (y0 - y2) / denom
    return x[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift


def find_peaks(record: SweepRecord, window=None) -> PeakSet:
    if window is not None:
        record = record.restrict(window)
    else:
        window = (float(record.lam[0]), float(record.lam[-1])) if len(record) else (math.nan, math.nan)
    if len(record) == 0:
        raise InvalidArgumentError(f"no sweep samples inside window {window}")
    lam, chi = record.lam, record.chi
    idx = strict_local_maxima(chi)
    peaks = np.column_stack([lam[idx], chi[idx]]) if len(idx) else np.empty((0, 2))
    top = int(np.argmax(chi))
    interior = 0 < top < len(chi) - 1
    if interior:
        lam_max, chi_max = parabolic_vertex(lam, chi, top)
    else:
        lam_max, chi_max = lam[top], chi[top]
    return PeakSet(peaks, float(lam_max), float(chi_max), tuple(window), interior)


def peak_gap_pairing(record: SweepRecord, window=None, tolerance_steps=1):
    """Fraction of chi_F peaks lying within ``tolerance_steps`` samples of a gap minimum.

    Returns ``(fraction, peak_lambdas, minimum_lambdas)``.
    """
    if window is not None:
        record = record.restrict(window)
    peaks = strict_local_maxima(record.chi)
    minima = strict_local_minima(record.gap)
    if len(peaks) == 0:
        raise InvalidArgumentError("no chi_F peaks in the window")
    if len(minima) == 0:
        return 0.0, record.lam[peaks], record.lam[minima]
    paired = sum(int(np.min(np.abs(minima - p)) <= tolerance_steps) for p in peaks)
    return paired / len(peaks), record.lam[peaks], record.lam[minima]


def fit_mu(sizes, peak_chis):
    """Slope of ln(chi_max / N) against ln L, with N = 2 L^2.

    Returns ``(mu, stderr)``.
    """
    sizes = np.asarray(sizes, dtype=float)
    chis = np.asarray(peak_chis, dtype=float)
    if len(sizes) != len(chis):
        raise InvalidArgumentError("sizes and peak_chis differ in length")
    if len(sizes) < 3:
        raise InvalidArgumentError(f"need at least 3 sizes, got {len(sizes)}")
    if np.any(sizes <= 0) or np.any(chis <= 0):
        raise DomainError("sizes and peak susceptibilities must be positive")
    x = np.log(sizes)
    y = np.log(chis / (2.0 * sizes**2))
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = len(x) - 2
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


@dataclass
class CollapseResult:
    nu: float
    nu_stderr: float
    mu: float
    mu_stderr: float
    alpha: float
    alpha_stderr: float
    residual: float
    lam_max: dict  # L -> refined peak position
    chi_max: dict  # L -> refined peak height
    curves: dict = field(repr=False)  # L -> (x, y) at the fitted nu
    scan: np.ndarray = field(repr=False, default=None)  # rows of (nu, residual)


def rescale(record: SweepRecord, lam_max, chi_max, nu):
    x = record.L**nu * (record.lam - lam_max)
    y = (chi_max - record.chi) / record.chi
    return x, y


class _Collapse:
    def __init__(self, records, x_max):
        self.records = records
        self.x_max = x_max
        self.peaks = {}
        for rec in records:
            ps = find_peaks(rec)
            if not ps.interior:
                raise CollapseError(f"L={rec.L}: global maximum at the edge of the sweep window")
            self.peaks[rec.L] = (ps.lam_max, ps.chi_max)

    def curves(self, nu, windowed=True):
        out = {}
        for rec in self.records:
            x, y = rescale(rec, *self.peaks[rec.L], nu)
            if windowed:
                m = np.abs(x) <= self.x_max
                x, y = x[m], y[m]
            out[rec.L] = (x, y)
        return out

    def residual(self, nu):
        """Squared deviation of each size from the pooled other sizes, relative to sum y^2.

        The normalization matters: the window |x| <= x_max narrows as nu
        grows, every windowed y shrinks toward 0, and the plain mean squared
        deviation then falls off to a spurious minimum at the top of any
        nu range.
        """
        curves = self.curves(nu)
        total, norm = 0.0, 0.0
        for L, (x, y) in curves.items():
            px = np.concatenate([c[0] for k, c in curves.items() if k != L])
            py = np.concatenate([c[1] for k, c in curves.items() if k != L])
            if len(px) < 2:
                continue
            order = np.argsort(px, kind="stable")
            px, py = px[order], py[order]
            m = (x >= px[0]) & (x <= px[-1])
            total += float(np.sum((y[m] - np.interp(x[m], px, py)) ** 2))
            norm += float(np.sum(y[m] ** 2))
        return total / norm if norm > 0 else math.inf


def _golden_section(f, a, b, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _fit_nu(problem, nu_range, scan_points, tol):
    lo, hi = nu_range
    grid = np.linspace(lo, hi, scan_points)
    values = np.array([problem.residual(v) for v in grid])
    scan = np.column_stack([grid, values])
    best = int(np.argmin(values))
    if best in (0, len(grid) - 1):
        raise CollapseError(
            f"collapse residual has no interior minimum in nu range {nu_range}", residual_curve=scan
        )
    nu = _golden_section(problem.residual, grid[best - 1], grid[best + 1], tol)
    res = problem.residual(nu)
    if not (res < values[0] and res < values[-1]):
        raise CollapseError("golden-section refinement left the interior minimum", residual_curve=scan)
    return nu, res, scan


def collapse(records, nu_range=(0.6, 1.6), x_max=1.0, scan_points=51, tol=1e-6) -> CollapseResult:
    """Fit nu by collapsing the near-peak curves of all sizes; mu and alpha follow.

    The residual is the summed squared y-deviation of every windowed point
    (|x| <= x_max) from the piecewise-linear interpolant of the other sizes
    pooled together, divided by the summed y^2 of the same points.  A coarse scan over ``nu_range`` brackets the minimum,
    then golden-section search refines it.  The nu uncertainty is a
    leave-one-size-out jackknife (needs at least 4 sizes).
    """
    records = sorted(records, key=lambda r: r.L)
    if len({r.L for r in records}) < 3:
        raise InvalidArgumentError("collapse needs at least 3 distinct sizes")
    problem = _Collapse(records, x_max)
    nu, res, scan = _fit_nu(problem, nu_range, scan_points, tol)

    nu_err = math.nan
    if len(records) >= 4:
        estimates = []
        try:
            for skip in range(len(records)):
                sub = _Collapse([r for i, r in enumerate(records) if i != skip], x_max)
                estimates.append(_fit_nu(sub, nu_range, scan_points, tol)[0])
        except CollapseError:
            estimates = []
        if estimates:
            n = len(estimates)
            mean = sum(estimates) / n
            nu_err = math.sqrt((n - 1) / n * sum((e - mean) ** 2 for e in estimates))

    sizes = [r.L for r in records]
    chis = [problem.peaks[L][1] for L in sizes]
    mu, mu_err = fit_mu(sizes, chis)
    alpha = mu / nu
    alpha_err = abs(alpha) * math.sqrt((mu_err / mu) ** 2 + (nu_err / nu) ** 2) if mu else math.nan
    return CollapseResult(
        nu=nu,
        nu_stderr=nu_err,
        mu=mu,
        mu_stderr=mu_err,
        alpha=alpha,
        alpha_stderr=alpha_err,
        residual=res,
        lam_max={L: problem.peaks[L][0] for L in sizes},
        chi_max={L: problem.peaks[L][1] for L in sizes},
        curves=problem.curves(nu, windowed=False),
        scan=scan,
    )


def collapse_residual(records, nu, x_max=1.0):
    """Residual of the collapse objective at a given nu (diagnostics and tests)."""
    return _Collapse(sorted(records, key=lambda r: r.L), x_max).residual(nu)
