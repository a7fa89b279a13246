"""Asymptotic peak values, interval sweeps and interaction-mode diagnostics.

The asymptotic peak value ``P(tau_s)`` is the large-``n`` limit of the
intensity sampled right after the ``n``-th pulse, ``I(n tau_s)`` with ``n``
pulses. Even and odd ``n`` are tracked separately because the two
subsequences may settle on different values.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .coherence import QuadratureConfig, TrainKernel, _direct_exponent, _resolve
from .errors import DomainError, EnvelopeError, FlatBracketError
from .sequence import PulseTrain
from .spectral import Family, KernelFunction, SpectralDensity, moment, total_weight

__all__ = [
    "PeakSeries",
    "SweepMaximum",
    "SweepResult",
    "OptimizeResult",
    "CorrelationFit",
    "InteractionModeReport",
    "asymptotic_peak",
    "sweep",
    "optimize_interval",
    "interaction_mode_report",
    "golden_section_max",
    "SWEEP_COLUMNS",
]

SWEEP_COLUMNS = ("tau_s_scaled", "P", "converged", "n_used")
CONV_WINDOW = 4
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


# -- asymptotic peak -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PeakSeries:
    """``I(n tau_s)`` for ``n = 1..n_used`` plus the limit estimate.

    ``limit`` averages the converged tails of both parities; ``parity_gap``
    is the difference between the two tail means and is never folded into
    the error silently.
    """

    tau_s: float
    peak_values: np.ndarray
    converged: bool
    limit: float
    n_used: int
    parity_gap: float
    even_limit: float
    odd_limit: float
    conv_tol: float

    @property
    def parity_consistent(self) -> bool:
        return self.parity_gap <= 2 * self.conv_tol

    def to_dict(self):
        d = asdict(self)
        d["peak_values"] = self.peak_values.tolist()
        return d


def _settled(x, tol, window):
    """True when the last ``window`` successive differences of ``x`` are within ``tol``."""
    if x.size < window + 1:
        return False
    return bool(np.all(np.abs(np.diff(x[-(window + 1):])) <= tol))


def _first_convergence(values, tol, window):
    """Smallest ``n`` (1-based count) at which both parities have settled, else ``None``."""
    for n in range(2 * (window + 1), values.size + 1):
        head = values[:n]
        if _settled(head[0::2], tol, window) and _settled(head[1::2], tol, window):
            return n
    return None


def _series(tau, values, conv_tol, window, n):
    head = values[:n] if n is not None else values
    converged = n is not None
    odd = head[0::2][-window:]  # n = 1, 3, 5, ...
    even = head[1::2][-window:]
    odd_lim = float(np.mean(odd))
    even_lim = float(np.mean(even)) if even.size else odd_lim
    limit = 0.5 * (odd_lim + even_lim) if converged else float(head[-1])
    return PeakSeries(float(tau), head.copy(), converged, limit, int(head.size),
                      abs(even_lim - odd_lim), even_lim, odd_lim, conv_tol)


def asymptotic_peak(sd: SpectralDensity, tau_s: float, conv_tol: float = 1e-4, n_max: int = 200,
                    cfg: QuadratureConfig | None = None, method: str = "auto",
                    window: int = CONV_WINDOW, train_kernel: TrainKernel | None = None) -> PeakSeries:
    """Peak series ``I(n tau_s)`` up to convergence or ``n_max``.

    Convergence needs ``window`` consecutive differences within ``conv_tol``
    on the odd and on the even subsequence. Unconverged series report the
    last value as the limit with ``converged=False``.
    """
    tau_s = float(tau_s)
    if not (math.isfinite(tau_s) and tau_s > 0):
        raise DomainError("tau_s must be finite and > 0")
    if int(n_max) != n_max or n_max < 4:
        raise DomainError("n_max must be an integer >= 4")
    if not conv_tol > 0:
        raise DomainError("conv_tol must be > 0")
    n_max = int(n_max)
    cfg = cfg or QuadratureConfig()
    if _resolve(method, sd) == "kernel" or train_kernel is not None:
        tk = train_kernel or TrainKernel(sd, tau_s, cfg)
        values = np.exp(-tk.peak_exponents(n_max)[1:])
        return _series(tau_s, values, conv_tol, window, _first_convergence(values, conv_tol, window))

    # direct route: evaluate incrementally and stop at convergence
    values = np.empty(0)
    n_conv = None
    for n in range(1, n_max + 1):
        g = _direct_exponent(sd, PulseTrain(n, tau_s), n * tau_s, cfg)
        values = np.append(values, math.exp(-g.value))
        if n >= 2 * (window + 1) and _settled(values[0::2], conv_tol, window) \
                and _settled(values[1::2], conv_tol, window):
            n_conv = n
            break
    return _series(tau_s, values, conv_tol, window, n_conv)


# -- golden section ------------------------------------------------------------

def golden_section_max(f, a: float, b: float, xtol: float = 1e-3, max_iter: int = 200):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))`` with ``x`` in the bracket."""
    if not a < b:
        raise DomainError("bracket must satisfy a < b")
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


class _PeakFunction:
    """Memoised ``tau -> P(tau)`` sharing one kernel evaluator per density."""

    def __init__(self, sd, conv_tol, n_max, cfg, method):
        self.sd, self.conv_tol, self.n_max, self.method = sd, conv_tol, n_max, method
        self.cfg = cfg or QuadratureConfig()
        self.kernel = KernelFunction(sd, tol=min(self.cfg.rel_tol, 1e-10), tail_mass=self.cfg.tail_mass)
        self.cache: dict[float, PeakSeries] = {}

    def series(self, tau) -> PeakSeries:
        tau = float(tau)
        if tau not in self.cache:
            tk = None
            if _resolve(self.method, self.sd) == "kernel":
                tk = TrainKernel(self.sd, tau, self.cfg, kernel=self.kernel)
            self.cache[tau] = asymptotic_peak(self.sd, tau, self.conv_tol, self.n_max, self.cfg,
                                              self.method, train_kernel=tk)
        return self.cache[tau]

    def __call__(self, tau) -> float:
        return self.series(tau).limit


# -- sweep ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepMaximum:
    tau_s: float
    P: float
    prominence: float
    grid_index: int
    converged: bool


@dataclass(frozen=True, eq=False)
class SweepResult:
    tau_grid: np.ndarray
    P: np.ndarray
    series: tuple
    maxima: tuple
    conv_tol: float
    meta: dict = field(default_factory=dict)

    @property
    def converged(self) -> np.ndarray:
        return np.array([s.converged for s in self.series], dtype=bool)

    @property
    def n_used(self) -> np.ndarray:
        return np.array([s.n_used for s in self.series], dtype=int)

    def maxima_near(self, tau: float, radius: float):
        return [m for m in self.maxima if abs(m.tau_s - tau) <= radius]

    def rows(self):
        for t, s in zip(self.tau_grid, self.series):
            yield (repr(float(t)), repr(float(s.limit)), "true" if s.converged else "false", str(s.n_used))

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        w.writerows(self.rows())

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def sweep(sd: SpectralDensity, tau_grid, conv_tol: float = 1e-4, n_max: int = 200,
          cfg: QuadratureConfig | None = None, method: str = "auto", refine: bool = True) -> SweepResult:
    """``P`` over ``tau_grid`` with located and refined local maxima.

    Maxima are strict interior peaks whose prominence exceeds ``conv_tol``;
    each is refined by golden-section search inside its bracketing cell.
    Points are evaluated in grid order so results are reproducible.
    """
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("tau grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise DomainError("tau grid must be finite and > 0")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("tau grid must be strictly increasing")
    pf = _PeakFunction(sd, conv_tol, n_max, cfg, method)
    series = tuple(pf.series(t) for t in grid)
    P = np.array([s.limit for s in series])
    idx, props = find_peaks(P, prominence=conv_tol)
    maxima = []
    for i, prom in zip(idx, props["prominences"]):
        if refine:
            x, fx = golden_section_max(pf, grid[i - 1], grid[i + 1], xtol=1e-3)
            if fx < P[i]:
                x, fx = grid[i], P[i]
        else:
            x, fx = grid[i], P[i]
        maxima.append(SweepMaximum(float(x), float(fx), float(prom), int(i), pf.series(x).converged))
    meta = {"spectrum": sd.describe(), "conv_tol": conv_tol, "n_max": n_max}
    return SweepResult(grid, P, series, tuple(maxima), conv_tol, meta)


# -- optimisation --------------------------------------------------------------

@dataclass(frozen=True)
class OptimizeResult:
    tau_s: float
    P: float
    converged: bool
    n_used: int
    bracket: tuple
    endpoint_P: tuple

    def __iter__(self):
        return iter((self.tau_s, self.P))

    def to_dict(self):
        return asdict(self)


def optimize_interval(sd: SpectralDensity, bracket, conv_tol: float = 1e-4, cfg: QuadratureConfig | None = None,
                      n_max: int = 200, method: str = "auto", n_coarse: int = 26) -> OptimizeResult:
    """Maximise ``P(tau_s)`` inside ``bracket`` to an interval tolerance of 1e-3.

    A coarse grid locates the best interior point; it must beat both
    endpoints by more than ``conv_tol`` or :class:`FlatBracketError` is
    raised. Golden-section search then refines inside the neighbouring cells.
    """
    a, b = (float(v) for v in bracket)
    if not (math.isfinite(a) and math.isfinite(b) and 0 < a < b):
        raise DomainError("bracket must satisfy 0 < a < b")
    if n_coarse < 3:
        raise DomainError("n_coarse must be >= 3")
    pf = _PeakFunction(sd, conv_tol, n_max, cfg, method)
    grid = np.linspace(a, b, n_coarse)
    P = np.array([pf(t) for t in grid])
    i = int(np.argmax(P))
    ends = (float(P[0]), float(P[-1]))
    if i in (0, n_coarse - 1) or P[i] - max(ends) <= conv_tol:
        raise FlatBracketError(
            f"no interior maximum of P in [{a}, {b}] with prominence above {conv_tol:g}")
    x, fx = golden_section_max(pf, grid[i - 1], grid[i + 1], xtol=1e-3)
    if fx < P[i]:
        x, fx = grid[i], P[i]
    s = pf.series(x)
    return OptimizeResult(float(x), float(fx), s.converged, s.n_used, (a, b), ends)


# -- interaction mode ----------------------------------------------------------

@dataclass(frozen=True)
class CorrelationFit:
    exponential_residual: float
    gaussian_residual: float
    verdict: str
    n_peaks: int
    exponential_rate: float
    gaussian_rate: float


@dataclass(frozen=True)
class InteractionModeReport:
    g: float
    center_mode: float
    center_mean: float
    width: float
    correlation_fit: CorrelationFit | None
    weight_2: float
    truncated_at: float | None
    diagnostic: str | None = None
    spectrum: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str | None:
        return self.correlation_fit.verdict if self.correlation_fit else None

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _envelope(kernel, omega, x_range=(1.0, 20.0), points_per_period=200):
    lo, hi = x_range
    period = 2 * math.pi / omega
    dx = period / points_per_period
    # pad one period each side so peaks at the range ends are detected
    x = np.arange(lo - period, hi + period + dx, dx)
    c = kernel(x) / kernel(np.zeros(1))[0]
    a = np.abs(c)
    idx, _ = find_peaks(a)
    idx = idx[(x[idx] >= lo) & (x[idx] <= hi)]
    if idx.size < 3 or np.any(a[idx] <= 0):
        raise EnvelopeError(f"only {idx.size} usable envelope peaks on [{lo}, {hi}]")
    return x[idx], a[idx]


def _fit_envelope(x, env) -> CorrelationFit:
    y = np.log(env)
    ones = np.ones_like(x)
    lin, res_lin, *_ = np.linalg.lstsq(np.column_stack([ones, -x]), y, rcond=None)
    quad, res_quad, *_ = np.linalg.lstsq(np.column_stack([ones, -x * x]), y, rcond=None)
    r_lin = float(np.sum((y - lin[0] + lin[1] * x) ** 2))
    r_quad = float(np.sum((y - quad[0] + quad[1] * x * x) ** 2))
    verdict = "markovian-like" if r_lin < r_quad else "non-markovian-like"
    return CorrelationFit(r_lin, r_quad, verdict, int(x.size), float(lin[1]), float(quad[1]))


def interaction_mode_report(sd: SpectralDensity, cfg: QuadratureConfig | None = None) -> InteractionModeReport:
    """Coupling ``g``, centre, width and a Markovianity verdict from the correlation envelope.

    ``g**2`` is ``weight_2`` from :func:`total_weight` (truncated for power-law
    tails, see ``truncated_at``). The verdict compares least-squares fits of
    ``ln|C|`` peaks on ``x in [1, 20]`` to ``a - b x`` (exponential memory) and
    ``a - b x**2`` (Gaussian memory).
    """
    cfg = cfg or QuadratureConfig()
    tol = min(cfg.rel_tol, 1e-10)
    m = total_weight(sd, tol=tol)
    g = math.sqrt(m.weight_2)
    w3 = moment(sd, 3, tol=tol).value
    center_mean = w3 / m.weight_2
    fit = None
    diagnostic = None
    try:
        kernel = KernelFunction(sd, tol=tol, tail_mass=cfg.tail_mass)
        ppp = 200 if kernel.closed_form else 40
        x, env = _envelope(kernel, sd.omega_p, points_per_period=ppp)
        fit = _fit_envelope(x, env)
    except (EnvelopeError, ArithmeticError) as exc:
        if sd.family is not Family.TABULATED:
            raise
        diagnostic = f"correlation envelope unavailable: {exc}"
    return InteractionModeReport(g, float(sd.omega_p), float(center_mean), float(sd.gamma_p), fit,
                                 float(m.weight_2), m.truncated_at, diagnostic, sd.describe())
