"""Pi-pulse trains and the displacement amplitudes they imprint on the reservoir.

A train is a pi/2 pulse at ``t = 0`` followed by ``N`` instantaneous pi
pulses at ``j * tau_s`` (``j = 1..N``). After the last pulse the two
reservoir branches are coherent states with amplitudes ``alpha`` and
``beta`` per unit coupling; their difference

.. math::

    \\Delta(e, t) = -(-1)^N + e^{-iet} + 2\\sum_{j=1}^N (-1)^j e^{-ie(t - j\\tau_s)}

controls the coherence through ``Gamma = int h(e) |Delta|^2 de``.
Global phases of the propagators have unit modulus and are not tracked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, PreconditionError

__all__ = [
    "PulseTrain",
    "ModulationExpansion",
    "displacement_amplitudes",
    "modulation_delta",
    "pair_expansion",
    "pulses_applied",
]

# relative slack when comparing t with N*tau_s, so t = n*tau computed in
# floating point still counts as "after the n-th pulse"
TIME_SLACK = 1e-12


@dataclass(frozen=True)
class PulseTrain:
    n_pulses: int
    tau_s: float

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 0:
            raise DomainError(f"n_pulses must be a non-negative integer, got {self.n_pulses!r}")
        tau = float(self.tau_s)
        if not (math.isfinite(tau) and tau > 0):
            raise DomainError(f"tau_s must be finite and > 0, got {self.tau_s!r}")
        object.__setattr__(self, "n_pulses", int(self.n_pulses))
        object.__setattr__(self, "tau_s", tau)

    @property
    def pulse_times(self) -> np.ndarray:
        return self.tau_s * np.arange(1, self.n_pulses + 1)

    @property
    def last_pulse(self) -> float:
        return self.n_pulses * self.tau_s

    def check_time(self, t: float) -> float:
        t = float(t)
        if not math.isfinite(t):
            raise DomainError("t must be finite")
        if t < self.last_pulse - TIME_SLACK * max(1.0, self.last_pulse):
            raise PreconditionError(
                f"t={t} precedes the last pulse at {self.last_pulse} (N={self.n_pulses})")
        return max(t, self.last_pulse)


def pulses_applied(t: float, tau_s: float, max_pulses: int | None = None) -> int:
    """Pulses applied up to and including time ``t`` (pulse at ``t`` counts)."""
    n = math.floor(t / tau_s * (1 + TIME_SLACK) + TIME_SLACK)
    n = max(n, 0)
    if max_pulses is not None:
        n = min(n, max_pulses)
    return n


def _sign(j):
    return 1.0 - 2.0 * (j % 2)


def displacement_amplitudes(train: PulseTrain, e, t: float):
    """Branch amplitudes ``(alpha, beta)`` per unit coupling ``h_k``.

    Even ``N``: ``alpha = -1 + sum_{j=0}^N (-1)^j u_j`` and
    ``beta = sum_{j=1}^N (-1)^(j-1) u_j`` with ``u_j = exp(-i e (t - j tau))``.
    Odd ``N``: ``alpha`` loses the ``-1`` and every ``beta`` term carries one.
    """
    t = train.check_time(t)
    e = np.asarray(e, dtype=float)
    j = np.arange(train.n_pulses + 1)
    u = np.exp(-1j * np.multiply.outer(e, t - j * train.tau_s))
    sgn = np.where(j % 2 == 0, 1.0, -1.0)
    alpha = u @ sgn
    beta = u[..., 1:] @ (-sgn[1:])
    if train.n_pulses % 2 == 0:
        alpha = alpha - 1.0
    else:
        beta = beta - (-sgn[1:]).sum()
    return alpha, beta


def modulation_delta(train: PulseTrain, e, t: float):
    """``Delta = (alpha - beta) / h_k`` in the consolidated single-sum form."""
    t = train.check_time(t)
    e = np.asarray(e, dtype=float)
    j = np.arange(1, train.n_pulses + 1)
    u = np.exp(-1j * np.multiply.outer(e, t - j * train.tau_s))
    return -_sign(train.n_pulses) + np.exp(-1j * e * t) + 2 * (u @ np.where(j % 2 == 0, 1.0, -1.0))


@dataclass(frozen=True)
class ModulationExpansion:
    """``Delta(e, t) = sum_m c_m exp(-i e s_m)`` as parallel coefficient/offset arrays."""

    coefficients: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        s = np.array(self.offsets, dtype=float)
        if c.shape != s.shape or c.ndim != 1:
            raise DomainError("coefficients and offsets must be equal-length 1-d arrays")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "offsets", s)

    @property
    def terms(self):
        return list(zip(self.coefficients.tolist(), self.offsets.tolist()))

    def __len__(self):
        return self.coefficients.size

    def delta(self, e):
        e = np.asarray(e, dtype=float)
        return np.exp(-1j * np.multiply.outer(e, self.offsets)) @ self.coefficients

    def power(self, e, backend=None):
        """``|Delta(e)|**2`` through the selected kernel backend."""
        return kernels.modulation_power(e, self.coefficients, self.offsets, backend=backend)

    def pair_sum(self, kernel) -> float:
        """``sum_{m,n} c_m c_n K(s_m - s_n)`` for a vectorised even kernel ``K``.

        Quadratic in the number of terms; the coherence module uses the
        linear-time structured form for long trains.
        """
        c, s = self.coefficients, self.offsets
        diff = np.abs(np.subtract.outer(s, s))
        return float(c @ kernel(diff) @ c)

    @property
    def max_offset_difference(self) -> float:
        return float(self.offsets.max() - self.offsets.min()) if len(self) else 0.0


def pair_expansion(train: PulseTrain, t: float) -> ModulationExpansion:
    """Terms ``(-(-1)^N, 0), (1, t), (2(-1)^j, t - j tau_s)`` for ``j = 1..N``."""
    t = train.check_time(t)
    j = np.arange(1, train.n_pulses + 1)
    coeffs = np.concatenate([[-_sign(train.n_pulses), 1.0], 2.0 * np.where(j % 2 == 0, 1.0, -1.0)])
    offsets = np.concatenate([[0.0, t], t - j * train.tau_s])
    return ModulationExpansion(coeffs, offsets)
