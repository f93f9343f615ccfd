"""Free (mountain-pass) and trapped (local-minimizer) ground states.

Free case
    The least-energy level on S(c) equals ``inf max_t E(u^t)`` and
    ``max_t E(u^t) = (2/27) A^3 / B^2``. This reduced level is invariant under
    isotropic dilation, so it is minimised on the computational box at a
    comfortably resolved scale. The minimiser is then mapped onto V(c)
    (Q = 0) by the exact grid rescaling ``u -> u^{t*}``: the returned field
    lives on the box shrunk by ``t*``.

Trapped case
    E_a is minimised directly on S(c) from a trap-matched Gaussian, with
    every accepted iterate kept inside the kinetic basin ``A < 2k``.

Both use the same preconditioned nonlinear conjugate gradient on the mass
sphere (preconditioner ``1/(sigma + |xi|^2/2)``, Polak-Ribiere+, parabolic
line search along the normalised chord).
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import (
    BasinEscape,
    MaxIterations,
    NoDescentDirection,
    NotUnstableRegime,
    ResolutionLoss,
)
from .functionals import (
    axis_moments,
    breakdown,
    classify_regime,
    isotropic_rescale,
    mean_field,
    trap_moment,
)
from .grid import WaveField, fftn, gaussian, ifftn, irfftn, rfftn

log = logging.getLogger(__name__)

FREE_TOL = 1e-8
TRAPPED_TOL = 1e-7
MAX_ITERS = 50_000
Q_TOL = 1e-6


@dataclass
class SolverOptions:
    tol: float | None = None
    max_iters: int = MAX_ITERS
    k: float | None = None
    init: object = None
    complex_field: bool = False
    pin_kinetic: float | None = None
    log_every: int = 0


@dataclass
class SolverReport:
    converged: bool
    iterations: int
    residual: float
    level: float
    gamma_lower: float
    gamma_upper: float
    mu: float
    q_residual: float
    k_used: float | None
    anisotropy: float
    diagnostics: dict = field(default_factory=dict)

    KEYS = ("converged", "iterations", "residual", "level", "gamma_lower", "gamma_upper",
            "mu", "q_residual", "k_used", "anisotropy")

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.KEYS}
        d["diagnostics"] = dict(self.diagnostics)
        return d


# ---------------------------------------------------------------- sphere CG


class _Problem:
    """Objective on the discrete mass sphere, real or complex fields.

    ``kind='reduced'``: f = (2/27) A^3 / B^2, gradient direction G u with
    G = -Lap/2 + t* W.  ``kind='trapped'``: f = E_a, G = -Lap/2 + a^2 |x|^2/2 + W.
    """

    def __init__(self, grid, p, kind, real):
        self.g = grid
        self.p = p
        self.kind = kind
        self.real = real
        self.a2 = p.trap ** 2
        self.f = grid.dV / grid.size
        if real:
            self.fwd, self.k2w, self.k2 = rfftn, grid.k2_half_weighted, grid.k2_half
        else:
            self.fwd, self.k2w, self.k2 = fftn, grid.k2, grid.k2

    def inv(self, a):
        return irfftn(a, self.g.n) if self.real else ifftn(a)

    def inner(self, x, y):
        if self.real:
            return float(np.vdot(x, y)) * self.g.dV
        return float(np.vdot(x, y).real) * self.g.dV

    def norm2(self, x):
        return self.inner(x, x)

    def parts(self, u):
        uh = self.fwd(u)
        A = _kernels.weighted_abs2_sum(uh, self.k2w) * self.f
        rho = _kernels.abs2(u) if not self.real else u * u
        rho_hat = rfftn(rho)
        s0, s1 = _kernels.weighted_abs2_sum2(rho_hat, self.g.hermitian_weight, self.g.khat_half_weighted)
        B = (self.p.lambda1 * s0 + self.p.lambda2 * s1) * self.f
        D = _kernels.weighted_sum(rho, self.g.r2) * self.g.dV if self.a2 else 0.0
        return A, B, D, uh, rho, rho_hat

    def value(self, A, B, D):
        if self.kind == "reduced":
            return 2.0 / 27.0 * A ** 3 / B ** 2 if B < 0 else math.inf
        return 0.5 * A + 0.5 * B + 0.5 * self.a2 * D

    def evaluate(self, u):
        A, B, D, uh, rho, rho_hat = self.parts(u)
        return self.value(A, B, D), (A, B, D, uh, rho, rho_hat)

    def gradient(self, u, cache):
        """Return (G u, <u, G u>/c, linear energy per unit mass)."""
        A, B, D, uh, rho, rho_hat = cache
        W = mean_field(rho, self.g, self.p.lambda1, self.p.lambda2, rho_hat)
        Gu = 0.5 * self.inv(self.k2 * uh)
        if self.kind == "reduced":
            Gu += (-2.0 * A / (3.0 * B)) * W * u
            lin = 0.5 * A
        else:
            Gu += (0.5 * self.a2 * self.g.r2 + W) * u
            lin = 0.5 * A + 0.5 * self.a2 * D
        c = self.norm2(u)
        lam = self.inner(u, Gu) / c
        return Gu, lam, lin / c

    def precondition(self, x, sigma):
        return self.inv(self.fwd(x) / (sigma + 0.5 * self.k2))


def _solve_small(G, r):
    try:
        return np.linalg.solve(G, r)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(G, r, rcond=None)[0]


class _Manifold:
    """Mass sphere, optionally intersected with the kinetic level set {A = A0}."""

    def __init__(self, prob, c, A0=None):
        self.prob = prob
        self.c = c
        self.A0 = A0

    def normals(self, u, uh):
        if self.A0 is None:
            return [u]
        return [u, self.prob.inv(self.prob.k2 * uh)]

    def tangent(self, x, normals):
        """L2-orthogonal projection of x onto the tangent space."""
        pr = self.prob
        G = np.array([[pr.inner(a, b) for b in normals] for a in normals])
        r = np.array([pr.inner(a, x) for a in normals])
        coef = _solve_small(G, r)
        for ci, n in zip(coef, normals):
            x = x - ci * n
        return x, coef

    def precondition(self, x, normals, sigma):
        pr = self.prob
        px = pr.precondition(x, sigma)
        pn = [pr.precondition(n, sigma) for n in normals]
        G = np.array([[pr.inner(a, b) for b in pn] for a in normals])
        r = np.array([pr.inner(a, px) for a in normals])
        coef = _solve_small(G, r)
        for ci, q in zip(coef, pn):
            px = px - ci * q
        return px

    def retract(self, v):
        pr = self.prob
        if self.A0 is None:
            return v * math.sqrt(self.c / pr.norm2(v))
        vh = pr.fwd(v)
        w = _kernels.abs2(vh) * (pr.g.hermitian_weight if pr.real else 1.0)
        k2 = pr.k2
        target = self.A0 / self.c
        tau = 0.0
        for _ in range(50):
            e = np.exp(-2.0 * tau * k2) * w
            m0 = float(np.sum(e))
            m1 = float(np.sum(e * k2))
            m2 = float(np.sum(e * k2 * k2))
            ratio = m1 / m0
            var = m2 / m0 - ratio * ratio
            step = math.log(ratio / target) / (2.0 * var / ratio)
            tau += step
            if abs(step) * ratio < 1e-15:
                break
        out = pr.inv(vh * np.exp(-tau * k2))
        return out * math.sqrt(self.c / pr.norm2(out))


class _State:
    __slots__ = ("u", "f", "cache", "lam", "scale", "normals", "grad", "coef", "kappa", "Gu")


def _state(prob, man, u):
    st = _State()
    st.u = u
    st.f, st.cache = prob.evaluate(u)
    if not math.isfinite(st.f):
        return st
    Gu, st.lam, st.scale = prob.gradient(u, st.cache)
    st.Gu = Gu
    st.normals = man.normals(u, st.cache[3])
    st.grad, st.coef = man.tangent(Gu, st.normals)
    A, B = st.cache[0], st.cache[1]
    # df = kappa * <G u, du>
    st.kappa = 8.0 * A * A / (9.0 * B * B) if prob.kind == "reduced" else 2.0
    return st


def _sphere_cg(prob, u, c, tol, max_iters, guard=None, log_every=0, A0=None):
    """Minimise prob on the constraint manifold. Returns (u, info dict).

    Preconditioned Polak-Ribiere+ conjugate gradient; the step length comes
    from a secant on the directional derivative, which stays informative
    after the objective itself has reached round-off.
    ``guard(A, u, it)`` is called on every accepted iterate and may raise.
    """
    man = _Manifold(prob, c, A0)
    st = _state(prob, man, man.retract(u))
    if not math.isfinite(st.f):
        raise NoDescentDirection("initial field has B >= 0")
    alpha = 1.0
    p_dir = g_prev = pg_prev = None
    it = 0
    stalls = 0
    while True:
        residual = math.sqrt(prob.norm2(st.grad) / c) / st.scale
        if log_every and it % log_every == 0:
            log.info("iter %d f=%.15g residual=%.3e alpha=%.3g", it, st.f, residual, alpha)
        if residual <= tol or it >= max_iters or stalls >= 5:
            break
        sigma = max(abs(st.lam), st.scale / 3.0)
        pg = man.precondition(st.grad, st.normals, sigma)
        d = -pg
        if p_dir is not None:
            beta = max(0.0, prob.inner(st.grad - g_prev, pg) / prob.inner(g_prev, pg_prev))
            d = man.tangent(d + beta * p_dir, st.normals)[0]
            if prob.inner(st.grad, d) >= 0:
                d = -pg
        s0 = st.kappa * prob.inner(st.grad, d)
        noise = 1e-12 * abs(st.f)
        new = None
        a = alpha
        for _ in range(40):
            trial = _state(prob, man, man.retract(st.u + a * d))
            if not math.isfinite(trial.f) or trial.f > st.f + noise:
                a *= 0.25
                continue
            s1 = trial.kappa * prob.inner(trial.grad, d)
            new = trial
            if s1 > 0.5 * abs(s0) or s1 < -0.5 * abs(s0):
                # far from the 1-D minimiser: one secant refinement
                a_sec = a * s0 / (s0 - s1) if s0 != s1 else a
                a_sec = min(max(a_sec, 0.1 * a), 10.0 * a)
                trial2 = _state(prob, man, man.retract(st.u + a_sec * d))
                if math.isfinite(trial2.f) and trial2.f <= min(trial.f, st.f) + noise:
                    new, a = trial2, a_sec
            break
        if new is None:
            stalls += 1
            p_dir = None
            alpha = 1.0
            continue
        stalls = 0
        alpha = a
        if guard is not None:
            guard(new.cache[0], new.u, it + 1)
        g_prev, pg_prev, p_dir = st.grad, pg, d
        st = new
        it += 1
    tilt = 2.0 * float(st.coef[1]) if A0 is not None else 0.0
    full = st.Gu - st.lam * st.u
    full_residual = math.sqrt(prob.norm2(full) / c) / st.scale
    return st.u, dict(converged=residual <= tol, iterations=it, residual=residual, value=st.f,
                      lam=st.lam, cache=st.cache, tilt=tilt, full_residual=full_residual)


class _Found(Exception):
    pass


def _scale_search(prob, v0, A_init, c, tol, opts):
    """Find the pinning level A0 at which the pinned minimiser is a free critical point.

    On a periodic grid the reduced level is not exactly dilation invariant:
    it decreases towards the box-filling constant at large scales and towards
    grid-scale spikes at small scales. The kinetic multiplier ('tilt') of the
    pinned problem is positive in the first regime and negative in the
    second; its zero gives a field that solves the full Euler-Lagrange
    equation. Warm starts move between levels by exact interpolation.
    """
    inner_tol = 0.25 * tol
    best = {"info": None, "v": v0, "logA": math.log(A_init)}
    total = [0]
    seen = {}

    def run(logA):
        if logA in seen:
            return seen[logA]
        v_start = best["v"]
        if best["info"] is not None:
            w = WaveField(prob.g, v_start)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionLoss)
                w = isotropic_rescale(w, math.exp(0.5 * (logA - best["logA"])), mode="resample")
            v_start = w.values.real.copy() if prob.real else w.values
        v, info = _sphere_cg(prob, v_start, c, inner_tol, opts.max_iters - total[0],
                             log_every=opts.log_every, A0=math.exp(logA))
        total[0] += info["iterations"]
        info["A0"] = math.exp(logA)
        log.info("pinned A0=%.10g tilt=%.3e full residual=%.3e", info["A0"], info["tilt"],
                 info["full_residual"])
        if best["info"] is None or info["full_residual"] < best["info"]["full_residual"]:
            best.update(info=info, v=v, logA=logA)
        if info["full_residual"] <= tol and info["residual"] <= inner_tol:
            raise _Found
        if total[0] >= opts.max_iters:
            raise _Found
        seen[logA] = info["tilt"]
        return info["tilt"]

    try:
        x0 = math.log(A_init)
        t0 = run(x0)
        step = math.log(2.0) if t0 > 0 else -math.log(2.0)
        x1 = x0
        for _ in range(16):
            x1 = x1 + step
            t1 = run(x1)
            if (t1 > 0) != (t0 > 0):
                break
            x0, t0 = x1, t1
        else:
            raise _Found
        brentq(run, min(x0, x1), max(x0, x1), xtol=1e-13, rtol=1e-15, maxiter=100)
    except _Found:
        pass
    info = best["info"]
    info["iterations"] = total[0]
    info["converged"] = info["full_residual"] <= tol
    return best["v"], info


# ---------------------------------------------------------------- helpers


def lagrange_multiplier(u, p):
    """mu from <u, E-L equation>: mu * c = -(A/2 + a^2 D/2 + B)."""
    b = breakdown(u, p)
    return -(0.5 * b.A + 0.5 * p.trap ** 2 * b.D + b.B) / b.mass


def pohozaev_mu_values(b, a):
    """mu*c predicted by combining Q_a = 0 with the multiplier identity.

    Returns (derived, printed): the elimination of B gives A/6 - 7/6 a^2 D;
    the printed variant A/6 - 5/6 a^2 D is kept for comparison.
    """
    a2 = a * a
    return (b.A / 6.0 - 7.0 / 6.0 * a2 * b.D) / b.mass, (b.A / 6.0 - 5.0 / 6.0 * a2 * b.D) / b.mass


def anisotropy(u):
    m1, m2, m3 = axis_moments(u)
    return m3 / m1


def default_free_init(grid, p, kinetic=None, aspect=None):
    """Gaussian at the scale that balances tail decay against resolution.

    A profile with exponential tail length l needs ``L/l`` large and
    ``l/h`` large; ``l^2 = 2 h L / pi^2`` equalises both error sources.
    Elongated along x3 (``aspect``, default 2) when lambda2 > 0, flattened
    when lambda2 < 0. ``kinetic`` overrides the scale so that A matches it
    (continuum value).
    """
    h = max(grid.spacing)
    ell = math.sqrt(2.0 * h * min(grid.L)) / math.pi
    w = ell / math.sqrt(2.0)
    if aspect is None:
        aspect = 2.0 if p.lambda2 > 0 else (0.5 if p.lambda2 < 0 else 1.0)
    shape = (1.0, 1.0, aspect)
    if kinetic is not None:
        w = math.sqrt(0.5 * p.mass_target * sum(1.0 / s ** 2 for s in shape) / kinetic)
    else:
        # keep A fixed while changing the aspect ratio
        w *= math.sqrt(sum(1.0 / s ** 2 for s in shape) / 3.0)
    widths = tuple(w * s for s in shape)
    return gaussian(grid, widths, p.mass_target)


def _defocusing_init(grid, p, kinetic):
    """Default Gaussian, made more anisotropic until B < 0 (at most aspect 16)."""
    u = default_free_init(grid, p, kinetic)
    if p.lambda2 == 0.0 or breakdown(u, p).B < 0:
        return u
    for k in range(2, 5):
        aspect = 2.0 ** k if p.lambda2 > 0 else 2.0 ** -k
        v = default_free_init(grid, p, kinetic, aspect)
        if breakdown(v, p).B < 0:
            return v
    return u


def trap_gaussian(grid, p):
    """Harmonic ground state of frequency a with mass c (exact mass on the grid)."""
    return gaussian(grid, 1.0 / math.sqrt(p.trap), p.mass_target)


def _initial_field(grid, p, init, builder):
    if init is None or (isinstance(init, str) and init in ("gaussian", "default", "preset")):
        u0 = builder(grid, p)
    elif isinstance(init, str) and init == "trap":
        u0 = trap_gaussian(grid, p)
    elif isinstance(init, WaveField):
        if init.grid != grid:
            raise ValueError("initial field lives on a different grid")
        u0 = init.copy()
    else:
        raise ValueError(f"unknown init {init!r}")
    m = u0.mass()
    u0.values *= math.sqrt(p.mass_target / m)
    return u0


def _finalise_real(v):
    """Fix the global sign so the field is non-negative where it is not round-off."""
    if np.sum(v) < 0:
        v = -v
    vmax = float(np.max(np.abs(v)))
    if np.min(v) < 0 and np.min(v) > -1e-6 * vmax:
        v = np.abs(v)
    return v


# ---------------------------------------------------------------- free case


def solve_free_ground_state(grid, p, init=None, opts=None):
    """Mountain-pass ground state of E on S(c) (trap ignored, must be 0).

    Returns ``(u, report)`` with ``u`` on ``grid.scaled(t*)``.
    """
    opts = opts or SolverOptions()
    if init is None:
        init = opts.init
    if p.trap != 0:
        raise ValueError("free ground state requires trap = 0")
    reg = classify_regime(p.lambda1, p.lambda2)
    if not reg.unstable:
        raise NotUnstableRegime(f"(lambda1, lambda2) = ({p.lambda1}, {p.lambda2}) is {reg.tag.value}"
                                f" (margin {reg.margin:.6g}); B >= 0 on every field")
    tol = FREE_TOL if opts.tol is None else opts.tol
    c = p.mass_target
    u0 = _initial_field(grid, p, init, lambda g, q: _defocusing_init(g, q, opts.pin_kinetic))
    real = not opts.complex_field
    if real and np.any(u0.values.imag != 0):
        real = False
    prob = _Problem(grid, p, "reduced", real)
    v0 = u0.values.real.copy() if real else u0.values.copy()
    b0 = breakdown(u0, p)
    if not b0.B < 0:
        raise NoDescentDirection(f"initial field has B = {b0.B:.6g} >= 0")
    if opts.pin_kinetic is not None:
        v, info = _sphere_cg(prob, v0, c, tol, opts.max_iters, log_every=opts.log_every,
                             A0=float(opts.pin_kinetic))
        info["converged"] = info["residual"] <= tol
    else:
        v, info = _scale_search(prob, v0, b0.A, c, tol, opts)
    if real:
        v = _finalise_real(v)
    u_solve = WaveField(grid, v)
    b_s = breakdown(u_solve, p)
    ts = -2.0 * b_s.A / (3.0 * b_s.B)
    u = isotropic_rescale(u_solve, ts, mode="regrid")
    b = breakdown(u, p)
    mu = lagrange_multiplier(u, p)
    report = SolverReport(
        converged=info["converged"],
        iterations=info["iterations"],
        residual=info["residual"] if opts.pin_kinetic is not None else info["full_residual"],
        level=b.E,
        gamma_lower=b.E,
        gamma_upper=b.E,
        mu=mu,
        q_residual=abs(b.Q) / b.A,
        k_used=None,
        anisotropy=anisotropy(u),
        diagnostics={
            "t_star": ts,
            "tilt": info["tilt"],
            "pinned_kinetic": info.get("A0"),
            "reduced_level": 2.0 / 27.0 * b_s.A ** 3 / b_s.B ** 2,
            "solve_box": list(grid.L),
            "box": list(u.grid.L),
            "mu_poho": b.A / (6.0 * b.mass),
            "mass": b.mass,
            "A": b.A,
            "J": b.J,
        },
    )
    if not info["converged"]:
        raise MaxIterations(f"free solver stopped after {info['iterations']} iterations "
                            f"(residual {report.residual:.3e} > {tol:.1e})", u, report)
    return u, report


def project_to_V(u, p, mode="regrid"):
    """u^{t*}: the point of V(c) on the dilation orbit of u."""
    from .functionals import t_star

    return isotropic_rescale(u, t_star(u, p), mode=mode)


# ---------------------------------------------------------------- trapped case


def solve_trapped_minimizer(grid, p, init=None, opts=None):
    """Topological local minimiser of E_a on S(c) inside {A < 2k}."""
    opts = opts or SolverOptions()
    if init is None:
        init = opts.init
    if not p.trap > 0:
        raise ValueError("trapped solver requires trap > 0")
    tol = TRAPPED_TOL if opts.tol is None else opts.tol
    c = p.mass_target
    k = opts.k
    if k is None:
        k = 4.0 * 1.5 * p.trap * c   # 4 A(trap-matched Gaussian)
    u0 = _initial_field(grid, p, init, trap_gaussian)
    b0 = breakdown(u0, p)
    if b0.A >= k:
        raise ValueError(f"initial field has A = {b0.A:.6g} outside A_k (k = {k:.6g})")
    real = not opts.complex_field and not np.any(u0.values.imag != 0)
    prob = _Problem(grid, p, "trapped", real)

    def guard(A, v, it):
        if A >= 2.0 * k:
            w = WaveField(grid, v)
            raise BasinEscape(f"iterate {it} reached A = {A:.6g} >= 2k = {2 * k:.6g}", w,
                              {"iterations": it, "A": A, "k_used": k})

    v = u0.values.real.copy() if real else u0.values.copy()
    # the Q_a check is part of the stopping rule: tighten until it holds
    inner, used = tol, 0
    for _ in range(4):
        v, info = _sphere_cg(prob, v, c, inner, opts.max_iters - used, guard=guard,
                             log_every=opts.log_every)
        used += info["iterations"]
        b = breakdown(WaveField(grid, v), p)
        if not info["converged"] or abs(b.Q_a) <= Q_TOL * b.A:
            break
        inner *= 0.1
    info["iterations"] = used
    if real:
        v = _finalise_real(v)
    u = WaveField(grid, v)
    b = breakdown(u, p)
    if b.A >= 2.0 * k:
        raise BasinEscape(f"converged field has A = {b.A:.6g} >= 2k", u, {"k_used": k})
    mu = lagrange_multiplier(u, p)
    mu_derived, mu_printed = pohozaev_mu_values(b, p.trap)
    q_ok = abs(b.Q_a) <= Q_TOL * b.A
    if info["converged"] and not q_ok:
        warnings.warn(f"gradient converged but |Q_a|/A = {abs(b.Q_a) / b.A:.3g} > {Q_TOL:g}: "
                      "box-size floor, enlarge the box", ResolutionLoss, stacklevel=2)
    report = SolverReport(
        converged=info["converged"] and q_ok,
        iterations=info["iterations"],
        residual=info["residual"],
        level=b.E_a,
        gamma_lower=math.nan,
        gamma_upper=math.nan,
        mu=mu,
        q_residual=abs(b.Q_a) / b.A,
        k_used=k,
        anisotropy=anisotropy(u),
        diagnostics={
            "mu_pohozaev_7_6": mu_derived,
            "mu_pohozaev_5_6": mu_printed,
            "A": b.A,
            "B": b.B,
            "D": b.D,
            "mass": b.mass,
            "sigma_norm": math.sqrt(b.sigma_sq),
        },
    )
    if not info["converged"] and info["residual"] > tol:
        raise MaxIterations(f"trapped solver stopped after {info['iterations']} iterations "
                            f"(residual {info['residual']:.3e} > {tol:.1e})", u, report)
    return u, report


# ---------------------------------------------------------------- gamma_a bracket


def scaling_curve(b, a):
    """Coefficients of E_a(u^t) = t^2 A/2 + t^3 B/2 + a^2 D / (2 t^2)."""
    return lambda t: 0.5 * t * t * b.A + 0.5 * t ** 3 * b.B + 0.5 * a * a * b.D / (t * t)


def estimate_gamma_a(p, u_c, grid=None):
    """Two-sided bracket for the trapped mountain-pass level gamma_a(c).

    Lower: gamma(c) = E(u_c). Upper: the pass height of t -> E_a(u_c^t), i.e.
    its local maximum beyond the trap well. Along this dilation path the
    curve is exactly ``t^2 A/2 + t^3 B/2 + a^2 D/(2 t^2)``; its critical
    points are the positive roots of ``1.5 B t^5 + A t^4 - a^2 D``.
    Returns a dict with the bracket, the pass location and the gap bound.
    """
    b = breakdown(u_c, p.with_(trap=0.0))
    a = p.trap
    lower = b.E
    if a == 0:
        return {"gamma_lower": lower, "gamma_upper": lower, "t_max": 1.0, "t_min": 0.0,
                "bound": lower}
    f = scaling_curve(b, a)
    roots = np.roots([1.5 * b.B, b.A, 0.0, 0.0, 0.0, -a * a * b.D])
    pos = sorted(r.real for r in roots if abs(r.imag) <= 1e-9 * abs(r) and r.real > 0)
    if len(pos) < 2:
        raise NoDescentDirection(f"t -> E_a(u_c^t) has no pass for a = {a}: trap too strong")
    t_min, t_max = pos[0], pos[-1]
    # dense sampling confirms the located pass
    ts = np.geomspace(t_min, 4.0 * t_max, 4001)
    sampled = float(np.max(f(ts)))
    upper = max(float(f(t_max)), sampled)
    return {
        "gamma_lower": lower,
        "gamma_upper": upper,
        "t_max": t_max,
        "t_min": t_min,
        "bound": lower + a * a * b.D / (2.0 * t_max ** 2),
    }
