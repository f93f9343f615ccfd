"""Periodic 3D grid, FFT transforms and the dipolar Fourier multiplier.

Conventions
-----------
Axis ``i`` covers ``[-L_i, L_i)`` with ``n_i`` points, ``x_j = -L_i + j*h_i`` and
``h_i = 2 L_i / n_i``. Arrays are indexed ``[i1, i2, i3]`` (numpy C order);
snapshot files store the same data x-fastest (see :mod:`dbec.io`).

The forward transform is the raw, unnormalised DFT and the inverse carries
the ``1/(n1 n2 n3)`` factor. The continuum transform ``F(u)(xi) = int u e^{-ix.xi}``
is approximated (up to a unit-modulus phase) by ``dV * fft(u)``, with
wavenumbers ``xi_i[k] = pi k / L_i`` in signed FFT order. Discrete Plancherel
then reads::

    sum |u|^2 dV = (2 pi)^-3 * sum |dV fft(u)|^2 * dxi  =  dV / N * sum |fft(u)|^2

with ``dxi = prod(pi / L_i)`` and ``N = n1 n2 n3``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from . import _kernels
from .errors import InvalidGrid, NonFiniteField

FOUR_PI_3 = 4.0 * np.pi / 3.0

_workers = 1


def set_threads(n):
    """Number of threads used by the FFT backend (results are reproducible across counts)."""
    global _workers
    n = int(n)
    if n < 1:
        raise ValueError("threads must be >= 1")
    _workers = n


def get_threads():
    return _workers


def fftn(a):
    return sfft.fftn(a, workers=_workers)


def ifftn(a):
    return sfft.ifftn(a, workers=_workers)


def rfftn(a):
    return sfft.rfftn(a, workers=_workers)


def irfftn(a, shape):
    return sfft.irfftn(a, s=shape, workers=_workers)


def _triple(v, name, cast):
    if np.ndim(v) == 0:
        v = (v, v, v)
    v = tuple(cast(x) for x in v)
    if len(v) != 3:
        raise InvalidGrid(f"{name} needs 3 entries, got {len(v)}")
    return v


def _khat(k1, k2, k3):
    kk = k1 * k1 + k2 * k2 + k3 * k3
    num = 2.0 * k3 * k3 - k1 * k1 - k2 * k2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(kk == 0.0, 0.0, FOUR_PI_3 * num / kk)
    return np.clip(out, -FOUR_PI_3, 2.0 * FOUR_PI_3)


@dataclass(frozen=True)
class GridSpec:
    """Immutable periodic box. Derived tables are built lazily and cached."""

    n: tuple
    L: tuple

    def __post_init__(self):
        n = _triple(self.n, "n", int)
        L = _triple(self.L, "L", float)
        for ni in n:
            if ni < 8 or ni % 2:
                raise InvalidGrid(f"points per axis must be even and >= 8, got {n}")
            if ni & (ni - 1):
                raise InvalidGrid(f"points per axis must be powers of two, got {n}")
        for Li in L:
            if not (Li > 0.0 and np.isfinite(Li)):
                raise InvalidGrid(f"half-box lengths must be positive, got {L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)

    # -- geometry

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return self.n[0] * self.n[1] * self.n[2]

    @cached_property
    def spacing(self):
        return tuple(2.0 * L / n for n, L in zip(self.n, self.L))

    @cached_property
    def dV(self):
        h = self.spacing
        return h[0] * h[1] * h[2]

    @cached_property
    def dxi(self):
        return float(np.prod([np.pi / L for L in self.L]))

    @cached_property
    def axes(self):
        """1-D coordinate arrays per axis."""
        return tuple(-L + h * np.arange(n) for n, L, h in zip(self.n, self.L, self.spacing))

    @cached_property
    def wavenumbers(self):
        """1-D wavenumber tables ``pi k / L`` in signed FFT order."""
        return tuple(2.0 * np.pi * sfft.fftfreq(n, d=h) for n, h in zip(self.n, self.spacing))

    def mesh(self):
        """Broadcastable (sparse) coordinate arrays X1, X2, X3."""
        x1, x2, x3 = self.axes
        return x1[:, None, None], x2[None, :, None], x3[None, None, :]

    @cached_property
    def r2(self):
        X1, X2, X3 = self.mesh()
        return X1 * X1 + X2 * X2 + X3 * X3

    @cached_property
    def x_sq(self):
        """Per-axis squared coordinates, broadcastable."""
        return tuple(X * X for X in self.mesh())

    # -- spectral tables (full complex spectrum)

    def _kmesh(self, half=False):
        k1, k2, k3 = self.wavenumbers
        if half:
            k3 = 2.0 * np.pi * sfft.rfftfreq(self.n[2], d=self.spacing[2])
        return k1[:, None, None], k2[None, :, None], k3[None, None, :]

    @cached_property
    def k2(self):
        K1, K2, K3 = self._kmesh()
        return np.ascontiguousarray(np.broadcast_to(K1 * K1 + K2 * K2 + K3 * K3, self.n))

    @cached_property
    def khat(self):
        K1, K2, K3 = np.broadcast_arrays(*self._kmesh())
        return _khat(K1, K2, K3)

    # -- spectral tables on the rfft half spectrum (last axis halved)

    @cached_property
    def half_shape(self):
        return (self.n[0], self.n[1], self.n[2] // 2 + 1)

    @cached_property
    def hermitian_weight(self):
        """Multiplicity of each rfft coefficient in the full spectrum."""
        m = np.full(self.half_shape, 2.0)
        m[:, :, 0] = 1.0
        m[:, :, -1] = 1.0
        return m

    @cached_property
    def k2_half(self):
        K1, K2, K3 = self._kmesh(half=True)
        return np.ascontiguousarray(np.broadcast_to(K1 * K1 + K2 * K2 + K3 * K3, self.half_shape))

    @cached_property
    def khat_half(self):
        K1, K2, K3 = np.broadcast_arrays(*self._kmesh(half=True))
        return _khat(K1, K2, K3)

    @cached_property
    def k2_half_weighted(self):
        return self.hermitian_weight * self.k2_half

    @cached_property
    def khat_half_weighted(self):
        return self.hermitian_weight * self.khat_half

    @cached_property
    def tail_mask(self):
        """Full-spectrum mask of the top third of resolved wavenumbers on any axis."""
        parts = []
        for k, n, L in zip(self.wavenumbers, self.n, self.L):
            kmax = np.pi * n / (2.0 * L)
            parts.append(np.abs(k) > (2.0 / 3.0) * kmax)
        m1, m2, m3 = parts
        return np.ascontiguousarray(m1[:, None, None] | m2[None, :, None] | m3[None, None, :])

    # -- derived grids

    def scaled(self, s):
        """Grid with every half-length divided by ``s`` (scalar or per-axis)."""
        s = _triple(s, "scale", float)
        return GridSpec(self.n, tuple(L / si for L, si in zip(self.L, s)))


def make_grid(n, L):
    """Build a :class:`GridSpec`; ``n`` and ``L`` are scalars or 3-sequences."""
    return GridSpec(n, L)


@dataclass
class WaveField:
    """Complex field sampled on a grid (``space`` is 'physical' or 'spectral')."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    space: str = "physical"

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.n:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteField("field contains NaN or Inf")
        if self.space not in ("physical", "spectral"):
            raise ValueError(f"unknown space {self.space!r}")
        self.values = v

    def copy(self):
        return WaveField(self.grid, self.values.copy(), self.space)

    def density(self):
        return _kernels.abs2(self.values)

    def mass(self):
        if self.space == "spectral":
            return _kernels.weighted_abs2_sum(self.values, np.ones(self.grid.n)) * self.grid.dV / self.grid.size
        return float(np.sum(self.density())) * self.grid.dV

    def norm(self):
        return np.sqrt(self.mass())

    def with_values(self, values, grid=None):
        return WaveField(self.grid if grid is None else grid, values, self.space)

    @classmethod
    def from_function(cls, grid, f):
        X1, X2, X3 = grid.mesh()
        return cls(grid, np.broadcast_to(f(X1, X2, X3), grid.n))


def transform(u, direction):
    """Forward (unnormalised) or inverse DFT of a field; see module docstring."""
    if direction == "forward":
        if u.space != "physical":
            raise ValueError("forward transform expects a physical-space field")
        return WaveField(u.grid, fftn(u.values), "spectral")
    if direction == "inverse":
        if u.space != "spectral":
            raise ValueError("inverse transform expects a spectral field")
        return WaveField(u.grid, ifftn(u.values), "physical")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dipolar_multiplier(grid):
    """K-hat on the full grid spectrum, with K-hat(0) := 0."""
    return grid.khat.copy()


def khat_at(xi):
    """Closed-form multiplier at arbitrary wavevectors (last axis = 3 components)."""
    xi = np.asarray(xi, dtype=float)
    out = _khat(xi[..., 0], xi[..., 1], xi[..., 2])
    return float(out) if out.ndim == 0 else out


def gaussian(grid, widths=1.0, mass=1.0, center=(0.0, 0.0, 0.0)):
    """Gaussian ``exp(-sum (x_i-c_i)^2 / (2 w_i^2))`` scaled to the exact discrete mass."""
    w = _triple(widths, "widths", float)
    X = grid.mesh()
    arg = sum((Xi - ci) ** 2 / (2.0 * wi * wi) for Xi, ci, wi in zip(X, center, w))
    v = np.exp(-arg)
    v *= np.sqrt(mass / (np.sum(v * v) * grid.dV))
    return WaveField(grid, v)


def iso_gaussian(grid):
    """The unit-mass continuum Gaussian ``pi^{-3/4} exp(-|x|^2/2)`` sampled without renormalising."""
    return WaveField(grid, np.pi ** -0.75 * np.exp(-0.5 * grid.r2))
