"""Decoherence exponent and coherence intensity under a pi-pulse train.

``I(t) = exp(-Gamma(t))`` with ``Gamma(t) = int_0^inf h(e) |Delta(e, t)|^2 de``.
Two independent routes evaluate ``Gamma``:

kernel
    expand ``|Delta|^2`` into cosine pairs and sum the half-line
    correlation kernel, ``Gamma = sum c_m c_n K(s_m - s_n)``. For a uniform
    train the pulse-pulse block is Toeplitz and is summed in linear time.
direct
    adaptive Gauss-Kronrod on ``h(e) |Delta(e, t)|^2`` over the support,
    with the far tails of heavy-tailed densities added pair by pair using
    Fourier quadrature rules.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels, quadrature
from .errors import DomainError, PreconditionError
from .sequence import PulseTrain, pair_expansion, pulses_applied
from .spectral import (
    Family,
    KernelFunction,
    SpectralDensity,
    _mass_outside,
    _raw,
    fourier_integral,
    support_bounds,
)

__all__ = [
    "QuadratureConfig",
    "Exponent",
    "CoherenceTrace",
    "decoherence_exponent",
    "intensity",
    "trace",
    "default_method",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = ("t_scaled", "intensity", "exponent", "n_pulses", "err")
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 50_000
    tail_mass: float = 1e-10
    # body cut for power-law tails; the remainder is integrated by Fourier rules
    heavy_tail_mass: float = 1e-3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if not self.abs_tol >= 0:
            raise DomainError("abs_tol must be >= 0")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be >= 1")
        for name in ("tail_mass", "heavy_tail_mass"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise DomainError(f"{name} must lie in (0, 1)")


class Exponent(NamedTuple):
    value: float
    error: float
    converged: bool = True


def default_method(sd: SpectralDensity) -> str:
    return "direct" if sd.family is Family.TABULATED else "kernel"


def _resolve(method, sd):
    method = method or "auto"
    if method == "auto":
        return default_method(sd)
    if method not in ("kernel", "direct"):
        raise DomainError(f"unknown method {method!r}")
    return method


# -- kernel route --------------------------------------------------------------

class TrainKernel:
    """Kernel-route evaluator for one density and one pulse interval.

    Caches ``K(d * tau)`` and the Toeplitz block ``A_N`` for all ``N`` up to
    the largest pulse count requested so far.
    """

    def __init__(self, sd: SpectralDensity, tau_s: float, cfg: QuadratureConfig | None = None,
                 kernel: KernelFunction | None = None):
        cfg = cfg or QuadratureConfig()
        self.tau = float(tau_s)
        self.K = kernel or KernelFunction(sd, tol=min(cfg.rel_tol, 1e-10), tail_mass=cfg.tail_mass)
        self._n = -1
        self.kgrid = np.empty(0)
        self.toeplitz = np.empty(0)
        self.peaks = np.empty(0)

    def ensure(self, n: int):
        if n <= self._n:
            return
        n_new = max(n, 2 * self._n + 1, 16)
        self.kgrid = self.K(self.tau * np.arange(n_new + 1))
        self.toeplitz, self.peaks = kernels.train_sums(self.kgrid)
        self._n = n_new

    def exponent(self, n_pulses: int, t: float) -> Exponent:
        self.ensure(n_pulses)
        k0 = self.kgrid[0]
        j = np.arange(n_pulses + 1)
        u = np.where(j % 2 == 0, 2.0, -2.0)
        u[0] = 1.0
        c0 = 1.0 if n_pulses % 2 else -1.0
        cross = float(u @ self.K(t - j * self.tau))
        value = self.toeplitz[n_pulses] + 2 * c0 * cross + k0
        weight = (2.0 * n_pulses + 2.0) ** 2
        err = weight * (self.K.error + 4 * _EPS * abs(k0) * (n_pulses + 1))
        return Exponent(max(value, 0.0), err, True)

    def peak_exponents(self, n_max: int) -> np.ndarray:
        """``Gamma`` at ``t = n tau`` with ``n`` pulses, for ``n = 0..n_max``."""
        self.ensure(n_max)
        return np.maximum(self.peaks[: n_max + 1], 0.0)


# -- direct route --------------------------------------------------------------

def _direct_exponent(sd: SpectralDensity, train: PulseTrain, t: float, cfg: QuadratureConfig) -> Exponent:
    expansion = pair_expansion(train, t)
    compact = sd.family in (Family.SEMI_ELLIPTIC, Family.TABULATED)
    cut = max(cfg.tail_mass, cfg.heavy_tail_mass) if sd.heavy_tailed else cfg.tail_mass
    lo, hi = support_bounds(sd, cut)
    extra = [sd.omega_p]
    if sd.family is Family.TABULATED:
        extra.extend(sd.table_e.tolist())
    bp = quadrature.oscillation_breakpoints(lo, hi, expansion.max_offset_difference, extra)
    res = quadrature.integrate(lambda e: _raw(sd, e) * expansion.power(e), bp,
                               rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                               max_subdivisions=cfg.max_subdivisions)
    value, err = res.value, res.error
    if not compact:
        c, s = expansion.coefficients, expansion.offsets
        tail_bound = float(np.abs(c).sum()) ** 2 * _mass_outside(sd, lo, hi)
        if sd.heavy_tailed or tail_bound > max(cfg.abs_tol, cfg.rel_tol * abs(value)) * 1e-2:
            tv, te = _pairwise_tails(sd, c, s, lo, hi)
            value += tv
            err += te
        else:
            err += tail_bound
    return Exponent(max(value, 0.0), err, res.converged)


def _pairwise_tails(sd, c, s, lo, hi):
    """``sum c_m c_n int_{tails} h(e) cos(e (s_m - s_n)) de``, one Fourier integral per distinct lag."""
    weights: dict[float, float] = {}
    diff = np.abs(np.subtract.outer(s, s))
    cc = np.multiply.outer(c, c)
    scale = max(1.0, float(diff.max()))
    for d, w in zip(diff.ravel(), cc.ravel()):
        key = round(float(d) / scale, 12) * scale
        weights[key] = weights.get(key, 0.0) + float(w)
    total = 0.0
    err = 0.0
    for d, w in weights.items():
        if w == 0.0:
            continue
        for a, b in ((0.0, lo), (hi, math.inf)):
            v, e = fourier_integral(sd, d, a, b)
            total += w * v
            err += abs(w) * e
    return total, err


# -- public surface ------------------------------------------------------------

def decoherence_exponent(sd: SpectralDensity, train: PulseTrain, t: float,
                         cfg: QuadratureConfig | None = None, method: str = "auto") -> Exponent:
    """``Gamma(t)`` after the last pulse of ``train`` with an error estimate.

    Non-convergence of the direct route is reported through
    ``Exponent.converged`` rather than raised.
    """
    cfg = cfg or QuadratureConfig()
    t = train.check_time(t)
    method = _resolve(method, sd)
    if method == "kernel":
        return TrainKernel(sd, train.tau_s, cfg).exponent(train.n_pulses, t)
    return _direct_exponent(sd, train, t, cfg)


def intensity(sd: SpectralDensity, train: PulseTrain, t: float,
              cfg: QuadratureConfig | None = None, method: str = "auto") -> Exponent:
    """``I = exp(-Gamma)`` with the error propagated as ``I * dGamma``."""
    g = decoherence_exponent(sd, train, t, cfg, method)
    value = math.exp(-g.value)
    return Exponent(value, value * g.error, g.converged)


@dataclass(frozen=True, eq=False)
class CoherenceTrace:
    times: np.ndarray
    intensity: np.ndarray
    exponent: np.ndarray
    pulses_applied: np.ndarray
    error: np.ndarray
    converged: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def rows(self):
        for t, i, g, n, e in zip(self.times, self.intensity, self.exponent, self.pulses_applied, self.error):
            yield (repr(float(t)), repr(float(i)), repr(float(g)), str(int(n)), repr(float(e)))

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(self.rows())

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def trace(sd: SpectralDensity, tau_s: float | None, max_pulses: int | None, t_grid,
          cfg: QuadratureConfig | None = None, method: str = "auto") -> CoherenceTrace:
    """Intensity on ``t_grid`` with ``N(t) = min(floor(t / tau_s), max_pulses)`` pulses.

    ``max_pulses = 0`` (or ``tau_s = None``) is free decay. A point exactly
    at a pulse time uses the count just after that pulse. Per-point
    failures are flagged, not raised.
    """
    cfg = cfg or QuadratureConfig()
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("t_grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise DomainError("t_grid must be finite and >= 0")
    if np.any(np.diff(times) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    free = tau_s is None or max_pulses == 0
    tau = 1.0 if free else float(tau_s)
    if not free and not (math.isfinite(tau) and tau > 0):
        raise DomainError("tau_s must be finite and > 0")
    method = _resolve(method, sd)
    counts = np.array([0 if free else pulses_applied(t, tau, max_pulses) for t in times], dtype=int)

    n = times.size
    gam = np.empty(n)
    err = np.empty(n)
    ok = np.ones(n, dtype=bool)
    tk = TrainKernel(sd, tau, cfg) if method == "kernel" else None
    if tk is not None:
        tk.ensure(int(counts.max()))
    for i, (t, N) in enumerate(zip(times, counts)):
        train = PulseTrain(int(N), tau)
        try:
            tt = train.check_time(t)
            g = tk.exponent(int(N), tt) if tk is not None else _direct_exponent(sd, train, tt, cfg)
        except (PreconditionError, ArithmeticError, ValueError):
            g = Exponent(math.nan, math.inf, False)
        gam[i], err[i], ok[i] = g
    inten = np.exp(-gam)
    meta = {"spectrum": sd.describe(), "tau_s": None if free else tau,
            "max_pulses": max_pulses, "method": method}
    return CoherenceTrace(times, inten, gam, counts, inten * err, ok, method, meta)
