"""Energy functionals, scaling maps and parameter algebra.

All functionals act on :class:`~dbec.grid.WaveField` in physical space::

    mass = sum |u|^2 dV
    A    = int |grad u|^2                      (spectral gradient)
    B    = (2 pi)^-3 int (l1 + l2 K^(xi)) |F(|u|^2)|^2 dxi
    D    = int |x|^2 |u|^2
    E    = A/2 + B/2,        E_a = E + a^2 D / 2
    Q    = A + 3B/2,         Q_a = A - a^2 D + 3B/2

Rescalings come in two flavours selected by ``mode``:

``"resample"``
    Dilate the field on its own grid with trigonometric interpolation and
    renormalise the mass. Accuracy is spectral for well resolved fields;
    a :class:`~dbec.errors.ResolutionLoss` warning is issued otherwise.
``"regrid"``
    Keep the samples, multiply by the amplitude factor and shrink the box.
    The discrete A, B, D and mass then obey the continuum scaling laws to
    round-off, whatever the resolution.
"""

import enum
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .errors import InvalidPhysical, InvalidScale, NonFiniteField, NotDefocusable, ResolutionLoss
from .grid import FOUR_PI_3, WaveField, fftn, irfftn, rfftn

# spectral / boundary mass fraction above which a resampled field is flagged
RESOLUTION_TOL = 1e-8


@dataclass(frozen=True)
class PhysParams:
    lambda1: float
    lambda2: float
    trap: float = 0.0
    mass_target: float = 1.0

    def __post_init__(self):
        if not self.mass_target > 0:
            raise ValueError("mass_target must be > 0")
        if not self.trap >= 0:
            raise ValueError("trap must be >= 0")

    @property
    def regime(self):
        return classify_regime(self.lambda1, self.lambda2)

    def with_(self, **kw):
        d = asdict(self)
        d.update(kw)
        return PhysParams(**d)


class RegimeTag(str, enum.Enum):
    UNSTABLE = "Unstable"
    STABLE = "Stable"
    BORDER = "Border"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    margin: float

    @property
    def unstable(self):
        return self.tag is RegimeTag.UNSTABLE


def regime_margin(lambda1, lambda2):
    if lambda2 >= 0:
        return lambda1 - FOUR_PI_3 * lambda2
    return lambda1 + 2.0 * FOUR_PI_3 * lambda2


def classify_regime(lambda1, lambda2, tol=0.0):
    """Unstable iff the margin is negative; Border when ``tol > 0`` and ``|margin| <= tol``."""
    m = regime_margin(lambda1, lambda2)
    if tol > 0 and abs(m) <= tol:
        tag = RegimeTag.BORDER
    elif m < 0:
        tag = RegimeTag.UNSTABLE
    else:
        tag = RegimeTag.STABLE
    return Regime(tag, m)


@dataclass(frozen=True)
class EnergyBreakdown:
    mass: float
    A: float
    B: float
    D: float
    E: float
    E_a: float
    Q: float
    Q_a: float
    J: float | None
    sigma_sq: float

    KEYS = ("mass", "A", "B", "D", "E", "E_a", "Q", "Q_a", "J", "sigma_sq")

    def to_dict(self):
        return {k: getattr(self, k) for k in self.KEYS}


# ---------------------------------------------------------------- raw pieces


def _check(u):
    if u.space != "physical":
        raise ValueError("functionals expect a physical-space field")


def kinetic(u):
    """A(u) via the spectral gradient."""
    g = u.grid
    return _kernels.weighted_abs2_sum(fftn(u.values), g.k2) * g.dV / g.size


def interaction_parts(rho, grid):
    """Return (contact sum, dipolar sum, rfft of rho) so that B = l1*s0 + l2*s1."""
    rho_hat = rfftn(rho)
    s0, s1 = _kernels.weighted_abs2_sum2(rho_hat, grid.hermitian_weight, grid.khat_half_weighted)
    f = grid.dV / grid.size
    return s0 * f, s1 * f, rho_hat


def interaction(u, lambda1, lambda2):
    s0, s1, _ = interaction_parts(u.density(), u.grid)
    return lambda1 * s0 + lambda2 * s1


def dipolar_potential(rho_hat, grid):
    """Phi = K * rho evaluated spectrally from the rfft of rho."""
    return irfftn(grid.khat_half * rho_hat, grid.n)


def mean_field(rho, grid, lambda1, lambda2, rho_hat=None):
    """W = l1 rho + l2 (K * rho); dE/d(conj u) nonlinear part is W u."""
    W = lambda1 * rho
    if lambda2 != 0.0:
        if rho_hat is None:
            rho_hat = rfftn(rho)
        W = W + lambda2 * dipolar_potential(rho_hat, grid)
    return W


def trap_moment(u):
    return _kernels.weighted_sum(u.density(), u.grid.r2) * u.grid.dV


def axis_moments(u):
    """(<x1^2>, <x2^2>, <x3^2>) weighted by |u|^2 and normalised by the mass."""
    rho = u.density()
    m = float(np.sum(rho))
    return tuple(float(np.sum(rho * xs)) / m for xs in u.grid.x_sq)


def breakdown(u, p):
    _check(u)
    g = u.grid
    rho = u.density()
    mass = float(np.sum(rho)) * g.dV
    A = kinetic(u)
    s0, s1, _ = interaction_parts(rho, g)
    B = p.lambda1 * s0 + p.lambda2 * s1
    D = _kernels.weighted_sum(rho, g.r2) * g.dV
    vals = (mass, A, B, D)
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteField("non-finite functional value")
    a2 = p.trap * p.trap
    E = 0.5 * A + 0.5 * B
    J = A ** 1.5 * math.sqrt(mass) / (-B) if B < 0 else None
    return EnergyBreakdown(
        mass=mass, A=A, B=B, D=D,
        E=E, E_a=E + 0.5 * a2 * D,
        Q=A + 1.5 * B, Q_a=A - a2 * D + 1.5 * B,
        J=J, sigma_sq=mass + A + D,
    )


# ---------------------------------------------------------------- rescaling


def _interp_matrix(x, L, h, y):
    """Trigonometric interpolation weights from grid samples at ``x`` to points ``y``.

    Rows for points outside [-L, L) are zero (the field is treated as vanishing
    outside its box).
    """
    n = x.size
    d = y[:, None] - x[None, :]
    k = np.pi * np.arange(1, n // 2) / L
    M = 1.0 + 2.0 * np.cos(d[..., None] * k).sum(axis=-1) + np.cos(d * (np.pi * n / (2.0 * L)))
    M /= n
    # exact hits avoid the O(eps * n) noise of the cosine sum
    j = np.rint((y + L) / h).astype(int)
    hit = np.abs(y - (-L + j * h)) <= 1e-12 * L
    for r in np.nonzero(hit)[0]:
        M[r] = 0.0
        M[r, j[r] % n] = 1.0
    M[(y < -L) | (y >= L)] = 0.0
    return M


def _lost_fraction(u, s):
    """Mass fraction the dilation pushes past Nyquist (s>1) or out of the box (s<1)."""
    g = u.grid
    rho = u.density()
    total = float(np.sum(rho))
    out = 0.0
    if any(si > 1.0 for si in s):
        spec = _kernels.abs2(fftn(u.values))
        mask = np.zeros(g.n, dtype=bool)
        for ax, (k, n, L, si) in enumerate(zip(g.wavenumbers, g.n, g.L, s)):
            kn = np.pi * n / (2.0 * L)
            sel = np.abs(k) * si > kn
            shape = [1, 1, 1]
            shape[ax] = n
            mask = mask | sel.reshape(shape)
        out += float(np.sum(spec[mask])) / float(np.sum(spec))
    if any(si < 1.0 for si in s):
        mask = np.zeros(g.n, dtype=bool)
        for ax, (x, L, si) in enumerate(zip(g.axes, g.L, s)):
            shape = [1, 1, 1]
            shape[ax] = x.size
            mask = mask | (np.abs(x) > L * si).reshape(shape)
        out += float(np.sum(rho[mask])) / total
    return out


def _dilate(u, s, amp, mass_factor, mode):
    """Return amp * u(s1 x1, s2 x2, s3 x3) with mass = mass_factor * mass(u)."""
    _check(u)
    if mode == "regrid":
        return WaveField(u.grid.scaled(s), u.values * amp)
    if mode != "resample":
        raise ValueError(f"mode must be 'resample' or 'regrid', got {mode!r}")
    if all(si == 1.0 for si in s):
        v = u.values * amp
    else:
        lost = _lost_fraction(u, s)
        if lost > RESOLUTION_TOL:
            warnings.warn(
                f"rescale by {s} moves a fraction {lost:.2e} of the field out of the resolved band",
                ResolutionLoss, stacklevel=3,
            )
        g = u.grid
        v = u.values
        for ax, (x, L, h, si) in enumerate(zip(g.axes, g.L, g.spacing, s)):
            if si == 1.0:
                continue
            M = _interp_matrix(x, L, h, si * x)
            v = np.moveaxis(np.tensordot(M, v, axes=([1], [ax])), 0, ax)
        v = v * amp
    out = WaveField(u.grid, v)
    target = mass_factor * u.mass()
    m = out.mass()
    if m > 0:
        out.values *= math.sqrt(target / m)
    return out


def _positive(t, name="t"):
    if not (t > 0 and math.isfinite(t)):
        raise InvalidScale(f"{name} must be > 0, got {t}")


def isotropic_rescale(u, t, mode="resample"):
    """u^t(x) = t^{3/2} u(t x). Mass preserved; A -> t^2 A, B -> t^3 B, D -> D / t^2."""
    _positive(t)
    return _dilate(u, (t, t, t), t ** 1.5, 1.0, mode)


def dilation_map(u, s, mode="resample"):
    """H(u, s)(x) = e^{3s/2} u(e^s x): the isotropic rescale with t = e^s."""
    return isotropic_rescale(u, math.exp(s), mode)


def mass_rescale(u, theta, mode="resample"):
    """u_theta(x) = theta^{-1/2} u(x / theta). Mass x theta^2, A unchanged, B x theta."""
    _positive(theta, "theta")
    s = 1.0 / theta
    return _dilate(u, (s, s, s), theta ** -0.5, theta * theta, mode)


def anisotropic_rescale(u, t, variant, mode="resample"):
    """Mass-preserving anisotropic dilations along which E -> -inf in the unstable regime.

    ``pancake``: t^{5/4} u(t x1, t x2, t^{1/2} x3)   (used when lambda2 > 0)
    ``cigar``:   t^{5/4} u(t^{3/4} x1, t^{3/4} x2, t x3)   (used when lambda2 < 0)
    """
    _positive(t)
    if variant == "pancake":
        s = (t, t, math.sqrt(t))
    elif variant == "cigar":
        s = (t ** 0.75, t ** 0.75, t)
    else:
        raise ValueError(f"variant must be 'pancake' or 'cigar', got {variant!r}")
    return _dilate(u, s, t ** 1.25, 1.0, mode)


# ---------------------------------------------------------------- scalar maps


def t_star(u, p):
    """Unique t > 0 with Q(u^t) = 0, i.e. -2A / (3B)."""
    b = breakdown(u, p)
    if not b.B < 0:
        raise NotDefocusable(f"B(u) = {b.B:.6g} >= 0: Q(u^t) > 0 for every t")
    return -2.0 * b.A / (3.0 * b.B)


def peak_level(u, p):
    """max_t E(u^t) = (2/27) A^3 / B^2."""
    b = breakdown(u, p)
    if not b.B < 0:
        raise NotDefocusable(f"B(u) = {b.B:.6g} >= 0: E(u^t) is unbounded above")
    return 2.0 / 27.0 * b.A ** 3 / b.B ** 2


def weinstein(u, p):
    """J(u) = A^{3/2} mass^{1/2} / (-B); invariant under both rescalings."""
    b = breakdown(u, p)
    if not b.B < 0:
        raise NotDefocusable(f"B(u) = {b.B:.6g} >= 0: quotient undefined")
    return b.J


def weinstein_level(E, c):
    """Value of J at any field with Q = 0, in terms of its energy and mass."""
    return 0.25 * 6.0 ** 1.5 * math.sqrt(c) * math.sqrt(E)


def heisenberg_residual(u, omega):
    """A + omega^2 D - 3 omega mass (>= 0 for every field)."""
    if not omega > 0:
        raise ValueError("omega must be > 0")
    _check(u)
    return kinetic(u) + omega * omega * trap_moment(u) - 3.0 * omega * u.mass()


# ---------------------------------------------------------------- units


@dataclass(frozen=True)
class PhysicalInput:
    """Physical constants in one coherent unit system (e.g. SI)."""

    h: float
    m: float
    a_s: float
    N: float
    mu0: float
    mu_dip: float


def nondimensionalize(phys):
    """(lambda1, lambda2) for the rescaled equation with x -> sqrt(m/h) x."""
    if not (phys.h > 0 and phys.m > 0 and phys.N > 0):
        raise InvalidPhysical("h, m and N must be positive")
    gamma = math.sqrt(phys.m / phys.h)
    lambda1 = 4.0 * math.pi * phys.a_s * phys.N * gamma
    lambda2 = phys.m * phys.N * phys.mu0 * phys.mu_dip ** 2 * gamma / (4.0 * math.pi * phys.h ** 2)
    return lambda1, lambda2
