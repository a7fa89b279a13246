"""Pure numpy versions of the hot loops.

Signatures mirror ``_ckernels``: outputs are written into caller-owned
arrays so both backends are interchangeable.
"""
import numpy as np

_CHUNK = 4096


def modulation_power(e, coeffs, offsets, out):
    """``out[i] = |sum_m c_m exp(-i e_i s_m)|**2``."""
    e = np.asarray(e, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    s = np.asarray(offsets, dtype=float)
    for lo in range(0, e.size, _CHUNK):
        phase = np.multiply.outer(e[lo:lo + _CHUNK], s)
        re = np.cos(phase) @ c
        im = np.sin(phase) @ c
        out[lo:lo + _CHUNK] = re * re + im * im
    return out


def train_sums(kgrid, a_out, peak_out):
    """Toeplitz part and peak exponents of a uniform pulse train.

    ``kgrid[d] = K(d*tau)`` for ``d = 0..n``. On return ``a_out[N]`` holds
    the pulse-pulse part of the exponent for ``N`` pulses and
    ``peak_out[n]`` the full exponent at ``t = n*tau`` with ``n`` pulses.
    """
    k = np.asarray(kgrid, dtype=float)
    n = k.size - 1
    d = np.arange(n + 1, dtype=float)
    q = np.where(np.arange(n + 1) % 2 == 0, k, -k)
    q[0] = 0.0
    s0 = np.cumsum(q)
    s1 = np.cumsum(d * q)
    k0 = k[0]
    a_out[:] = k0 * (1 + 4 * d) + (4 + 8 * d) * s0 - 8 * s1
    q[0] = k0
    prev = np.concatenate([[0.0], s0[:-1]])
    peak_out[:] = a_out - 2 * q - 4 * (k0 + prev) + k0
    peak_out[0] = 0.0
    return a_out, peak_out


def evolve_branches(eps, h, durations, pulse_after, d_a, d_b, a_excited):
    """Step the two reservoir branches through a pulse schedule in place.

    During a free segment of length ``tau`` the branch tied to the excited
    level maps ``d -> exp(-i eps tau) (d + h) - h`` and the other
    ``d -> exp(-i eps tau) d``. A pulse swaps the association. Returns the
    final association of branch A.
    """
    eps = np.asarray(eps, dtype=float)
    h = np.asarray(h, dtype=float)
    for tau, flip in zip(durations, pulse_after):
        ph = np.exp(-1j * eps * tau)
        if a_excited:
            d_a[:] = ph * (d_a + h) - h
            d_b[:] = ph * d_b
        else:
            d_a[:] = ph * d_a
            d_b[:] = ph * (d_b + h) - h
        if flip:
            a_excited = not a_excited
    return a_excited
