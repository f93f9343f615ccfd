"""Pointwise and reduction kernels used inside the FFT loops.

Two interchangeable backends: numba ``@njit`` loops (default) and plain numpy.
Set ``DBEC_BACKEND=numpy`` in the environment before import to force the
numpy path; it is also used automatically when numba cannot be imported.

Every kernel takes C-contiguous arrays and works on their flat view, so the
numba versions only need to be compiled for 1-D signatures.
"""

import os

import numpy as np

_requested = os.environ.get("DBEC_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"DBEC_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    if _requested == "numpy":
        raise ImportError
    from numba import njit
except ImportError:
    BACKEND = "numpy"
else:
    BACKEND = "numba"


# ---------------------------------------------------------------- numpy path


def _abs2_np(z):
    return z.real * z.real + z.imag * z.imag


def _weighted_abs2_sum_np(z, w):
    return float(np.sum(w * _abs2_np(z)))


def _weighted_abs2_sum2_np(z, w0, w1):
    a = _abs2_np(z)
    return float(np.sum(w0 * a)), float(np.sum(w1 * a))


def _weighted_sum_np(x, w):
    return float(np.sum(w * x))


def _nonlinear_phase_np(psi, v_static, lam1, phi, lam2, dt):
    arg = _abs2_np(psi) * lam1
    if v_static is not None:
        arg += v_static
    if phi is not None:
        arg += lam2 * phi
    psi *= np.exp(-1j * dt * arg)
    return psi


def _masked_fraction_np(z, w, mask):
    a = w * _abs2_np(z)
    total = float(np.sum(a))
    if total == 0.0:
        return 0.0
    return float(np.sum(a[mask])) / total


# ---------------------------------------------------------------- numba path

if BACKEND == "numba":

    @njit(cache=True)
    def _abs2_nb(z, out):
        for i in range(z.size):
            zr = z[i].real
            zi = z[i].imag
            out[i] = zr * zr + zi * zi
        return out

    @njit(cache=True)
    def _weighted_abs2_sum_nb(z, w):
        s = 0.0
        for i in range(z.size):
            zr = z[i].real
            zi = z[i].imag
            s += w[i] * (zr * zr + zi * zi)
        return s

    @njit(cache=True)
    def _weighted_abs2_sum2_nb(z, w0, w1):
        s0 = 0.0
        s1 = 0.0
        for i in range(z.size):
            zr = z[i].real
            zi = z[i].imag
            a = zr * zr + zi * zi
            s0 += w0[i] * a
            s1 += w1[i] * a
        return s0, s1

    @njit(cache=True)
    def _weighted_sum_nb(x, w):
        s = 0.0
        for i in range(x.size):
            s += w[i] * x[i]
        return s

    @njit(cache=True)
    def _phase_local_nb(psi, lam1, dt):
        for i in range(psi.size):
            p = psi[i]
            th = -dt * lam1 * (p.real * p.real + p.imag * p.imag)
            psi[i] = p * complex(np.cos(th), np.sin(th))

    @njit(cache=True)
    def _phase_full_nb(psi, v_static, lam1, phi, lam2, dt):
        for i in range(psi.size):
            p = psi[i]
            th = -dt * (v_static[i] + lam1 * (p.real * p.real + p.imag * p.imag) + lam2 * phi[i])
            psi[i] = p * complex(np.cos(th), np.sin(th))

    @njit(cache=True)
    def _masked_fraction_nb(z, w, mask):
        tot = 0.0
        sub = 0.0
        for i in range(z.size):
            zr = z[i].real
            zi = z[i].imag
            a = w[i] * (zr * zr + zi * zi)
            tot += a
            if mask[i]:
                sub += a
        if tot == 0.0:
            return 0.0
        return sub / tot


# ---------------------------------------------------------------- public API


def _flat(a):
    return a.reshape(-1)


def abs2(z):
    """|z|^2 as a new float64 array of the same shape."""
    if BACKEND == "numpy" or not np.iscomplexobj(z):
        return _abs2_np(z) if np.iscomplexobj(z) else z * z
    z = np.ascontiguousarray(z)
    out = np.empty(z.shape, dtype=np.float64)
    _abs2_nb(_flat(z), _flat(out))
    return out


def weighted_abs2_sum(z, w):
    """sum(w * |z|^2)."""
    if BACKEND == "numpy":
        return _weighted_abs2_sum_np(z, w)
    return float(_weighted_abs2_sum_nb(_flat(np.ascontiguousarray(z, dtype=np.complex128)),
                                       _flat(np.ascontiguousarray(w, dtype=np.float64))))


def weighted_abs2_sum2(z, w0, w1):
    """(sum(w0 |z|^2), sum(w1 |z|^2)) from one pass over z."""
    if BACKEND == "numpy":
        return _weighted_abs2_sum2_np(z, w0, w1)
    s0, s1 = _weighted_abs2_sum2_nb(_flat(np.ascontiguousarray(z, dtype=np.complex128)),
                                    _flat(np.ascontiguousarray(w0, dtype=np.float64)),
                                    _flat(np.ascontiguousarray(w1, dtype=np.float64)))
    return float(s0), float(s1)


def weighted_sum(x, w):
    """sum(w * x) for real arrays."""
    if BACKEND == "numpy":
        return _weighted_sum_np(x, w)
    return float(_weighted_sum_nb(_flat(np.ascontiguousarray(x, dtype=np.float64)),
                                  _flat(np.ascontiguousarray(w, dtype=np.float64))))


def nonlinear_phase(psi, v_static, lam1, phi, lam2, dt):
    """In place: psi *= exp(-i dt (v_static + lam1 |psi|^2 + lam2 phi)).

    ``v_static`` and ``phi`` may be None. ``psi`` must be C-contiguous complex128.
    """
    if BACKEND == "numpy":
        return _nonlinear_phase_np(psi, v_static, lam1, phi, lam2, dt)
    flat = _flat(psi)
    if v_static is None and phi is None:
        _phase_local_nb(flat, float(lam1), float(dt))
        return psi
    if v_static is None:
        v_static = np.zeros(psi.shape)
    if phi is None:
        phi = np.zeros(psi.shape)
        lam2 = 0.0
    _phase_full_nb(flat, _flat(np.ascontiguousarray(v_static, dtype=np.float64)), float(lam1),
                   _flat(np.ascontiguousarray(phi, dtype=np.float64)), float(lam2), float(dt))
    return psi


def masked_fraction(z, w, mask):
    """sum over mask of w |z|^2 divided by the full sum (0 when the sum is 0)."""
    if BACKEND == "numpy":
        return _masked_fraction_np(z, w, mask)
    return float(_masked_fraction_nb(_flat(np.ascontiguousarray(z, dtype=np.complex128)),
                                     _flat(np.ascontiguousarray(w, dtype=np.float64)),
                                     _flat(np.ascontiguousarray(mask, dtype=np.bool_))))
