# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""
from libc.math cimport cos, sin


def modulation_power(const double[::1] e, const double[::1] coeffs,
                     const double[::1] offsets, double[::1] out):
    cdef Py_ssize_t i, m, ne = e.shape[0], nm = coeffs.shape[0]
    cdef double re, im, ph, ei
    with nogil:
        for i in range(ne):
            ei = e[i]
            re = 0.0
            im = 0.0
            for m in range(nm):
                ph = ei * offsets[m]
                re = re + coeffs[m] * cos(ph)
                im = im + coeffs[m] * sin(ph)
            out[i] = re * re + im * im
    return out.base if out.base is not None else out


def train_sums(const double[::1] kgrid, double[::1] a_out, double[::1] peak_out):
    cdef Py_ssize_t d, n = kgrid.shape[0] - 1
    cdef double k0 = kgrid[0], q, s0 = 0.0, s1 = 0.0, prev = 0.0
    with nogil:
        a_out[0] = k0
        peak_out[0] = 0.0
        for d in range(1, n + 1):
            q = kgrid[d] if d % 2 == 0 else -kgrid[d]
            prev = s0
            s0 = s0 + q
            s1 = s1 + d * q
            a_out[d] = k0 * (1 + 4 * d) + (4 + 8 * d) * s0 - 8 * s1
            peak_out[d] = a_out[d] - 2 * q - 4 * (k0 + prev) + k0
    return a_out.base, peak_out.base


def evolve_branches(const double[::1] eps, const double[::1] h,
                    const double[::1] durations, const unsigned char[::1] pulse_after,
                    double complex[::1] d_a, double complex[::1] d_b, bint a_excited):
    cdef Py_ssize_t k, j, nk = eps.shape[0], nseg = durations.shape[0]
    cdef double complex ph
    cdef double arg
    with nogil:
        for j in range(nseg):
            for k in range(nk):
                arg = eps[k] * durations[j]
                ph = cos(arg) - 1j * sin(arg)
                if a_excited:
                    d_a[k] = ph * (d_a[k] + h[k]) - h[k]
                    d_b[k] = ph * d_b[k]
                else:
                    d_a[k] = ph * d_a[k]
                    d_b[k] = ph * (d_b[k] + h[k]) - h[k]
            if pulse_after[j]:
                a_excited = not a_excited
    return a_excited
