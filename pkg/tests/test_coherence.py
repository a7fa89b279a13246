import math

import numpy as np
import pytest

from syncpulse.coherence import (
    TRACE_COLUMNS,
    QuadratureConfig,
    decoherence_exponent,
    intensity,
    trace,
)
from syncpulse.errors import DomainError, PreconditionError
from syncpulse.sequence import PulseTrain
from syncpulse.spectral import SpectralDensity, half_line_mass

# Frozen from an independent mpmath evaluation (25 digits): direct
# quadrature of h |Delta|^2 for the compact/light-tailed families, and for
# the Lorentzian the pair expansion with K = full-line closed form minus an
# mp.quadosc integral over the negative axis.
REFERENCE = [
    ("gaussian", 0, 1.0, 2 * math.pi, 1.194825441840272),
    ("gaussian", 1, 2 * math.pi, 4 * math.pi, 1.247516411464838),
    ("gaussian", 3, 1.0, 3.5, 0.7681702754157206),
    ("gaussian", 5, 2 * math.pi, 10 * math.pi, 0.8945555364279718),
    ("semi_elliptic", 0, 1.0, 2 * math.pi, 1.328102031543736),
    ("semi_elliptic", 2, 2.0, 4.7, 27.84610953287824),
    ("lorentzian", 0, 1.0, 2 * math.pi, 3.38898930165217),
    ("lorentzian", 2, 1.5, 3.2, 10.7869440188233),
    ("lorentzian", 5, 2 * math.pi, 10 * math.pi, 22.77605050331449),
]


@pytest.mark.parametrize("method", ["kernel", "direct"])
@pytest.mark.parametrize("fam,n,tau,t,expected", REFERENCE)
def test_exponent_matches_reference(fam, n, tau, t, expected, method):
    sd = getattr(SpectralDensity, fam)()
    g = decoherence_exponent(sd, PulseTrain(n, tau), t, method=method)
    assert g.converged
    assert g.value == pytest.approx(expected, rel=2e-9)


def test_free_decay_closed_form(gaussian):
    # N=0: Gamma = 2 (K(0) - K(t))
    g = decoherence_exponent(gaussian, PulseTrain(0, 1.0), 60.0).value
    assert g == pytest.approx(2 * half_line_mass(gaussian) - 2 * 3 * math.exp(-0.15**2 * 900) * math.cos(60), rel=1e-12)


def test_routes_agree_random(family):
    rng = np.random.default_rng(7)
    for _ in range(15):
        n = int(rng.integers(0, 9))
        tau = float(rng.uniform(0.2, 7.0))
        t = n * tau + float(rng.uniform(0, tau))
        a = decoherence_exponent(family, PulseTrain(n, tau), t, method="kernel")
        b = decoherence_exponent(family, PulseTrain(n, tau), t, method="direct")
        assert a.value == pytest.approx(b.value, rel=1e-6, abs=1e-12)


def test_intensity_bounds(family):
    for t in (0.0, 0.5, 3.0, 20.0):
        v = intensity(family, PulseTrain(0, 1.0), t)
        assert 0.0 < v.value <= 1.0
        assert v.error >= 0


def test_intensity_at_zero_is_one(gaussian):
    assert intensity(gaussian, PulseTrain(0, 1.0), 0.0).value == 1.0


def test_precondition(gaussian):
    with pytest.raises(PreconditionError):
        decoherence_exponent(gaussian, PulseTrain(3, 1.0), 2.0)


def test_unknown_method(gaussian):
    with pytest.raises(DomainError):
        decoherence_exponent(gaussian, PulseTrain(0, 1.0), 1.0, method="magic")


def test_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureConfig(tail_mass=1.5)


def test_parity_at_even_and_odd_peaks_agree_at_tau_one(gaussian):
    from syncpulse.analysis import asymptotic_peak
    s = asymptotic_peak(gaussian, 1.0)
    assert s.converged
    assert s.parity_gap <= 2e-4


@pytest.mark.xfail(strict=True, reason="at tau=2pi the Gaussian peak series drifts; parities do not settle by n=200")
def test_parity_at_even_and_odd_peaks_agree_at_tau_two_pi(gaussian):
    from syncpulse.analysis import asymptotic_peak
    s = asymptotic_peak(gaussian, 2 * math.pi)
    assert s.converged and s.parity_gap <= 2e-4


def test_trace_counts_pulses(gaussian):
    grid = np.linspace(0, 10, 101)
    tr = trace(gaussian, 2.0, None, grid)
    assert tr.pulses_applied.tolist() == [int(math.floor(t / 2.0 + 1e-9)) for t in grid]
    assert tr.all_converged
    capped = trace(gaussian, 2.0, 2, grid)
    assert capped.pulses_applied.max() == 2


def test_trace_free_decay_equivalence(gaussian):
    grid = np.linspace(0, 8, 9)
    a = trace(gaussian, None, None, grid)
    b = trace(gaussian, 1.0, 0, grid)
    assert np.array_equal(a.intensity, b.intensity)
    assert a.pulses_applied.max() == 0


def test_trace_matches_pointwise(gaussian):
    grid = np.array([0.0, 1.0, 2 * math.pi, 4 * math.pi + 0.1])
    tr = trace(gaussian, 2 * math.pi, None, grid)
    for t, i, n in zip(tr.times, tr.intensity, tr.pulses_applied):
        assert i == pytest.approx(intensity(gaussian, PulseTrain(int(n), 2 * math.pi), t).value, rel=1e-13)


def test_trace_recovers_at_pulse_times(gaussian):
    # coherence is recovered at t = 2 pi n relative to the neighbouring minima
    grid = np.arange(0, 30.0001, 0.01)
    tr = trace(gaussian, 2 * math.pi, None, grid)
    at = tr.intensity[np.argmin(np.abs(grid - 4 * math.pi))]
    mid = tr.intensity[np.argmin(np.abs(grid - 3 * math.pi))]
    assert at > 10 * mid


def test_trace_csv(gaussian):
    tr = trace(gaussian, 1.0, None, np.array([0.0, 0.5, 1.0]))
    text = tr.to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 4
    assert lines[3].split(",")[3] == "1"


@pytest.mark.parametrize("grid", [np.array([]), np.array([1.0, 0.5]), np.array([-1.0, 0.0]), np.array([0, np.nan])])
def test_trace_grid_validation(gaussian, grid):
    with pytest.raises(DomainError):
        trace(gaussian, 1.0, None, grid)


def test_trace_flags_instead_of_raising(gaussian):
    cfg = QuadratureConfig(max_subdivisions=1, rel_tol=1e-14)
    tr = trace(gaussian, 1.0, None, np.array([0.5, 5.0]), cfg, method="direct")
    assert not tr.all_converged
    assert len(tr) == 2


def test_tabulated_uses_direct_route():
    e = np.linspace(0.4, 1.6, 601)
    h = 3 / (math.sqrt(math.pi) * 0.15) * np.exp(-((e - 1) / 0.15) ** 2)
    sd = SpectralDensity.tabulated(e, h)
    ref = decoherence_exponent(SpectralDensity.gaussian(), PulseTrain(2, 1.5), 4.0).value
    got = decoherence_exponent(sd, PulseTrain(2, 1.5), 4.0)
    assert got.value == pytest.approx(ref, rel=2e-3)
