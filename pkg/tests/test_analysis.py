import json
import math

import numpy as np
import pytest

from syncpulse.analysis import (
    SWEEP_COLUMNS,
    asymptotic_peak,
    golden_section_max,
    interaction_mode_report,
    optimize_interval,
    sweep,
)
from syncpulse.errors import DomainError, FlatBracketError
from syncpulse.spectral import SpectralDensity, total_weight

GRID = 0.5 + 0.05 * np.arange(151)


@pytest.fixture(scope="module")
def gauss_sweep():
    return sweep(SpectralDensity.gaussian(), GRID)


def test_golden_section_quadratic():
    x, fx = golden_section_max(lambda x: -(x - 1.234) ** 2, 0.0, 3.0, xtol=1e-6)
    assert x == pytest.approx(1.234, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-11)


def test_golden_section_stays_in_bracket():
    x, _ = golden_section_max(lambda x: x, 0.0, 1.0, xtol=1e-4)
    assert 0.0 <= x <= 1.0 and x > 0.999


def test_decoupling_limit(gaussian):
    s = asymptotic_peak(gaussian, 0.01)
    assert s.limit == pytest.approx(1.0, abs=1e-3)


def test_peak_series_invariants(gaussian):
    s = asymptotic_peak(gaussian, 1.0)
    assert s.converged
    assert np.all((s.peak_values > 0) & (s.peak_values <= 1))
    # the frozen value: P(1) from the converged tail
    assert s.limit == pytest.approx(0.159978, abs=1e-4)
    tail = s.peak_values[-9:]
    assert np.all(np.abs(np.diff(tail[0::2])) <= 1e-4)


def test_peak_series_reproducible_across_n_max(gaussian):
    a = asymptotic_peak(gaussian, 1.0, n_max=200)
    b = asymptotic_peak(gaussian, 1.0, n_max=400)
    assert abs(a.limit - b.limit) <= 1e-4
    assert a.n_used == b.n_used


def test_unconverged_series_reports_last_value(gaussian):
    s = asymptotic_peak(gaussian, 2 * math.pi, n_max=50)
    assert not s.converged
    assert s.limit == s.peak_values[-1]
    assert s.n_used == 50


def test_peak_series_direct_route_matches_kernel(gaussian):
    a = asymptotic_peak(gaussian, 1.0, n_max=30, method="kernel")
    b = asymptotic_peak(gaussian, 1.0, n_max=30, method="direct")
    assert b.peak_values == pytest.approx(a.peak_values[: b.n_used], rel=1e-7)


def test_peak_series_validation(gaussian):
    with pytest.raises(DomainError):
        asymptotic_peak(gaussian, 0.0)
    with pytest.raises(DomainError):
        asymptotic_peak(gaussian, 1.0, n_max=3)


def test_sweep_locates_single_resonance(gauss_sweep):
    assert len(gauss_sweep.maxima) == 1
    m = gauss_sweep.maxima[0]
    assert abs(m.tau_s - 2 * math.pi) <= 0.3
    assert m.prominence > 1e-4


def test_sweep_csv(gauss_sweep):
    lines = gauss_sweep.to_csv().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == GRID.size + 1
    assert lines[1].split(",")[2] in ("true", "false")


def test_sweep_grid_validation(gaussian):
    with pytest.raises(DomainError):
        sweep(gaussian, [1.0, 0.5])
    with pytest.raises(DomainError):
        sweep(gaussian, [])


def test_semi_elliptic_beats_gaussian_near_resonance(gauss_sweep):
    semi = sweep(SpectralDensity.semi_elliptic(), GRID)
    assert len(semi.maxima_near(2 * math.pi, 0.3)) == 1
    near = np.abs(GRID - 2 * math.pi) <= 0.3
    assert np.all(semi.P[near] >= gauss_sweep.P[near])


def test_lorentzian_has_no_resonance():
    res = sweep(SpectralDensity.lorentzian(), GRID)
    assert res.maxima_near(2 * math.pi, 1.0) == []


def test_optimize_gaussian(gaussian):
    res = optimize_interval(gaussian, (5.0, 7.5))
    assert 5.0 <= res.tau_s <= 7.5
    assert res.P >= max(res.endpoint_P)
    assert abs(res.tau_s - 2 * math.pi) <= 0.3
    tau, p = res
    assert (tau, p) == (res.tau_s, res.P)


@pytest.mark.xfail(strict=True, reason="the refined maximum sits near 6.21; the shift is physical")
def test_optimize_gaussian_within_five_hundredths(gaussian):
    res = optimize_interval(gaussian, (5.0, 7.5))
    assert abs(res.tau_s - 2 * math.pi) <= 0.05


def test_optimize_lorentzian_flat(lorentzian):
    with pytest.raises(FlatBracketError):
        optimize_interval(lorentzian, (5.0, 7.5))


def test_optimize_rejects_bad_bracket(gaussian):
    with pytest.raises(DomainError):
        optimize_interval(gaussian, (7.5, 5.0))


def test_report_gaussian(gaussian):
    rep = interaction_mode_report(gaussian)
    assert rep.g == pytest.approx(math.sqrt(3 * (1 + 0.15**2 / 2)), rel=1e-10)
    assert rep.g**2 == pytest.approx(total_weight(gaussian, tol=1e-10).weight_2, rel=1e-14)
    assert rep.verdict == "non-markovian-like"
    assert rep.correlation_fit.gaussian_residual >= 0 and rep.correlation_fit.exponential_residual >= 0
    assert rep.center_mode == 1.0
    assert rep.center_mean == pytest.approx((1 + 1.5 * 0.15**2) / (1 + 0.15**2 / 2), rel=1e-9)
    d = json.loads(rep.to_json())
    assert d["verdict"] == "non-markovian-like"
    assert {"g", "center_mode", "center_mean", "width", "correlation_fit"} <= set(d)


def test_report_verdicts(semi_elliptic, lorentzian):
    assert interaction_mode_report(semi_elliptic).verdict == "non-markovian-like"
    rep = interaction_mode_report(lorentzian)
    assert rep.verdict == "markovian-like"
    assert rep.truncated_at is not None


def test_report_narrow_limit():
    rep = interaction_mode_report(SpectralDensity.gaussian(gamma_p=1e-4))
    assert rep.g == pytest.approx(math.sqrt(3.0), rel=1e-6)


def test_report_tabulated_diagnostic_only():
    # centred at 0.1 the oscillation period exceeds the fit window, so no envelope peaks exist
    e = np.linspace(0.05, 0.15, 201)
    h = np.exp(-((e - 0.1) / 0.01) ** 2)
    rep = interaction_mode_report(SpectralDensity.tabulated(e, h))
    assert rep.g > 0
    assert rep.correlation_fit is None and rep.verdict is None
    assert "envelope" in rep.diagnostic


def test_report_tabulated_with_envelope():
    e = np.linspace(0.4, 1.6, 601)
    h = 3 / (math.sqrt(math.pi) * 0.15) * np.exp(-((e - 1) / 0.15) ** 2)
    rep = interaction_mode_report(SpectralDensity.tabulated(e, h))
    assert rep.verdict == "non-markovian-like"
    assert rep.g == pytest.approx(math.sqrt(3 * (1 + 0.15**2 / 2)), rel=1e-4)
