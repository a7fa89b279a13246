"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise
the numpy versions in ``_pykernels`` are used. Set
``SYNCPULSE_KERNELS=python`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def _select():
    forced = os.environ.get("SYNCPULSE_KERNELS", "").strip().lower()
    if forced:
        if forced not in _BACKENDS:
            raise ImportError(f"SYNCPULSE_KERNELS={forced!r} but available backends are {sorted(_BACKENDS)}")
        return forced
    return "cython" if "cython" in _BACKENDS else "python"


BACKEND = _select()


def available_backends():
    return sorted(_BACKENDS)


def _impl(backend):
    return _BACKENDS[backend or BACKEND]


def modulation_power(e, coeffs, offsets, backend=None):
    e = np.ascontiguousarray(e, dtype=float)
    out = np.empty_like(e)
    _impl(backend).modulation_power(
        e.ravel(), np.ascontiguousarray(coeffs, dtype=float),
        np.ascontiguousarray(offsets, dtype=float), out.ravel(),
    )
    return out


def train_sums(kgrid, backend=None):
    k = np.ascontiguousarray(kgrid, dtype=float)
    a = np.empty_like(k)
    peaks = np.empty_like(k)
    _impl(backend).train_sums(k, a, peaks)
    return a, peaks


def evolve_branches(eps, h, durations, pulse_after, d_a, d_b, a_excited, backend=None):
    """Evolve ``d_a``/``d_b`` (complex, modified in place); returns the final association."""
    return bool(_impl(backend).evolve_branches(
        np.ascontiguousarray(eps, dtype=float), np.ascontiguousarray(h, dtype=float),
        np.ascontiguousarray(durations, dtype=float),
        np.ascontiguousarray(pulse_after, dtype=np.uint8), d_a, d_b, bool(a_excited),
    ))
