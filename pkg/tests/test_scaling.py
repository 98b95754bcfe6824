import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitaev_fs import (
    CollapseError,
    Couplings,
    DomainError,
    EvolutionLine,
    InvalidArgumentError,
    SweepRecord,
    chi_f,
    chi_line_closed_form,
    collapse,
    find_peaks,
    fit_mu,
    gap,
    sweep,
)
from kitaev_fs.scaling import collapse_residual, parabolic_vertex, peak_gap_pairing, rescale, strict_local_maxima

JXY = EvolutionLine.jx_eq_jy()


def record(lam, chi, L=11, gaps=None):
    lam = np.asarray(lam, float)
    chi = np.asarray(chi, float)
    return SweepRecord(JXY, L, lam, chi, np.ones_like(lam) if gaps is None else gaps)


# ---- sweeps


def test_sweep_matches_pointwise():
    rec = sweep(JXY, 0.9, 0.99, 10, 51)
    assert len(rec) == 10 and not rec.skipped
    for lam, chi, g in zip(rec.lam, rec.chi, rec.gap):
        assert chi == chi_line_closed_form(JXY, lam, 51)
        assert g == pytest.approx(gap(JXY.point(lam), 51), rel=1e-14)
    assert np.all(np.diff(rec.lam) > 0) and np.all(rec.chi >= 0)


def test_sweep_intensive_a_phase():
    a = sweep(JXY, 0.9, 0.99, 10, 51).chi_per_site
    b = sweep(JXY, 0.9, 0.99, 10, 101).chi_per_site
    np.testing.assert_allclose(a, b, rtol=1e-3)


def test_sweep_skips_zero_modes():
    line = EvolutionLine.jz_third()
    rec = sweep(line, 0.2, 1 / 3 + (1 / 3 - 0.2), 3, 9)
    assert len(rec) == 2
    assert len(rec.skipped) == 1 and abs(rec.skipped[0][0] - 1 / 3) < 1e-12


def test_sweep_segment():
    seg = EvolutionLine.segment(Couplings(0.1, 0.2, 0.7), Couplings(0.3, 0.1, 0.6))
    rec = sweep(seg, 0.0, 1.0, 5, 11)
    for lam, chi in zip(rec.lam, rec.chi):
        assert chi == chi_f(seg.point(lam), seg.tangent(), 11)


def test_sweep_threads_identical():
    a = sweep(JXY, 0.3, 0.6, 200, 41, workers=1)
    b = sweep(JXY, 0.3, 0.6, 200, 41, workers=4)
    np.testing.assert_array_equal(a.chi, b.chi)
    np.testing.assert_array_equal(a.gap, b.gap)


@pytest.mark.parametrize("args", [(0.5, 0.4, 10, 11), (0.2, 0.8, 1, 11), (0.0, 0.5, 10, 11), (0.2, 0.8, 10, 10)])
def test_sweep_validation(args):
    with pytest.raises(InvalidArgumentError):
        sweep(JXY, *args)


def test_peak_count_grows():
    counts = []
    for L in (51, 101, 151):
        rec = sweep(JXY, 0.3, 0.45, 2000, L)
        counts.append(find_peaks(rec).count)
    assert counts == sorted(counts) and counts[0] > 0
    ratios = np.array(counts) / np.array([51, 101, 151])
    assert (ratios.max() - ratios.min()) / ratios.max() < 0.3


def test_peak_count_101_vs_303():
    a = find_peaks(sweep(JXY, 0.3, 0.45, 2000, 101)).count
    b = find_peaks(sweep(JXY, 0.3, 0.45, 2000, 303)).count
    assert b > a


# ---- peaks


def test_monotone_no_peaks():
    ps = find_peaks(record(np.linspace(0, 1, 50), np.linspace(1, 2, 50)))
    assert ps.count == 0 and not ps.interior


def test_gaussian_peak():
    lam = np.linspace(0, 1, 201)
    ps = find_peaks(record(lam, np.exp(-((lam - 0.4321) ** 2) / 0.01)))
    assert ps.count == 1 and ps.interior
    assert abs(ps.lam_max - 0.4321) < 1e-3


def test_parabola_exact():
    x = np.array([0.0, 0.1, 0.2])
    y = -((x - 0.13) ** 2) + 5
    xv, yv = parabolic_vertex(x, y, 1)
    assert xv == pytest.approx(0.13, abs=1e-12) and yv == pytest.approx(5, abs=1e-12)


@given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=60))
def test_strict_maxima_property(y):
    y = np.array(y)
    for i in strict_local_maxima(y):
        assert y[i] > y[i - 1] and y[i] > y[i + 1]


def test_find_peaks_empty_window():
    rec = record(np.linspace(0, 1, 10), np.ones(10))
    with pytest.raises(InvalidArgumentError):
        find_peaks(rec, (2.0, 3.0))


def test_peak_gap_pairing_synthetic():
    lam = np.linspace(0, 1, 101)
    chi = np.cos(20 * lam)
    gaps = 2 + np.roll(-np.cos(20 * lam), 1)  # minima shifted by one step
    frac, peaks, minima = peak_gap_pairing(record(lam, chi, gaps=gaps))
    assert frac == 1.0 and len(peaks) == 3
    gaps = 2 + np.roll(-np.cos(20 * lam), 3)
    assert peak_gap_pairing(record(lam, chi, gaps=gaps))[0] == 0.0


def test_peak_gap_pairing_b_phase():
    rec = sweep(JXY, 0.02, 0.40, 381, 51)
    frac, peaks, _ = peak_gap_pairing(rec)
    assert len(peaks) >= 5 and frac >= 0.9


# ---- mu


def test_fit_mu_exact():
    sizes = np.array([11, 21, 41, 81])
    chis = 2 * sizes**2 * sizes**0.5
    mu, err = fit_mu(sizes, chis)
    assert abs(mu - 0.5) <= 1e-12 and err <= 1e-12


@settings(max_examples=30)
@given(st.floats(0.01, 100), st.permutations([0, 1, 2, 3]))
def test_fit_mu_invariances(scale, perm):
    sizes = np.array([101, 201, 301, 401])
    chis = np.array([3.0, 7.1, 11.5, 16.0]) * 1e4
    mu, _ = fit_mu(sizes, chis)
    mu2, _ = fit_mu(sizes[list(perm)], (scale * chis)[list(perm)])
    assert abs(mu - mu2) <= 1e-10


def test_fit_mu_errors():
    with pytest.raises(InvalidArgumentError):
        fit_mu([1, 2], [1, 2])
    with pytest.raises(DomainError):
        fit_mu([1, 2, 3], [1, -2, 3])


# ---- collapse


def synthetic_records(nu, mu=0.5, sizes=(101, 201, 401, 801), width=0.05):
    """chi = chi_max / (1 + f(x)) with f(x) = x^2 and x = L^nu (lam - lam_L)."""
    recs = []
    for i, L in enumerate(sizes):
        center = 0.5 - 0.3 / L
        lam = np.linspace(center - width, center + width, 801) + 1e-4 * i
        chi_max = 2 * L * L * L**mu
        x = L**nu * (lam - center)
        recs.append(record(lam, chi_max / (1 + x * x), L=L))
    return recs


def test_collapse_recovers_planted():
    res = collapse(synthetic_records(0.9), nu_range=(0.7, 1.1), x_max=3.0)
    assert abs(res.nu - 0.9) <= 0.01
    assert abs(res.mu - 0.5) <= 1e-3
    assert res.alpha == res.mu / res.nu
    ends = [collapse_residual(synthetic_records(0.9), v, 3.0) for v in (0.7, 1.1)]
    assert res.residual < min(ends)
    for v in (res.nu - 0.1, res.nu + 0.1):
        assert res.residual <= collapse_residual(synthetic_records(0.9), v, 3.0)


def test_collapse_peak_maps_to_origin():
    recs = synthetic_records(1.0)
    res = collapse(recs, nu_range=(0.8, 1.2), x_max=3.0)
    for rec in recs:
        lam_max, chi_max = res.lam_max[rec.L], res.chi_max[rec.L]
        peak = SweepRecord(JXY, rec.L, np.array([lam_max]), np.array([chi_max]), np.ones(1))
        x, y = rescale(peak, lam_max, chi_max, res.nu)
        assert (x[0], y[0]) == (0.0, 0.0)
        # the sampled curve passes next to the origin as well
        xs, ys = res.curves[rec.L]
        assert np.min(np.abs(xs)) < rec.L**res.nu * 1.3e-4
        assert np.min(ys) < 2e-3


def test_collapse_needs_three_sizes():
    with pytest.raises(InvalidArgumentError):
        collapse(synthetic_records(0.9, sizes=(101, 201)))


def test_collapse_no_interior_minimum():
    with pytest.raises(CollapseError) as info:
        collapse(synthetic_records(0.9), nu_range=(1.0, 1.3), x_max=3.0)
    assert info.value.residual_curve.shape[1] == 2


def test_collapse_edge_peak():
    recs = synthetic_records(0.9)
    recs[0] = recs[0].restrict((0.0, recs[0].lam[300]))
    with pytest.raises(CollapseError, match="edge"):
        collapse(recs, nu_range=(0.7, 1.1))


def test_collapse_real_small():
    recs = [sweep(JXY, 0.46, 0.54, 800, L) for L in (61, 81, 101, 121)]
    res = collapse(recs)
    assert 0.7 < res.nu < 1.3
    assert math.isfinite(res.nu_stderr)
    assert res.residual < min(res.scan[0, 1], res.scan[-1, 1])
