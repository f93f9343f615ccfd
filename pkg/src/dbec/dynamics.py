"""Time-dependent equation: Strang splitting, monitors, blow-up and scattering diagnostics.

One step of size dt is ``K(dt/2) N(dt) K(dt/2)`` where ``K`` is the exact free
propagator ``exp(-i dt |xi|^2 / 2)`` and ``N`` the exact pointwise phase
``exp(-i dt (a^2|x|^2/2 + lambda1 |psi|^2 + lambda2 Phi))``. ``N`` leaves
``|psi|`` unchanged, so Phi is evaluated once per step. Adjacent half
kinetic steps are fused between sample points.
"""

import enum
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InsufficientSamples, NonFiniteField
from .functionals import breakdown, dipolar_potential
from .grid import WaveField, fftn, ifftn, rfftn

log = logging.getLogger(__name__)

COLUMNS = ("t", "mass", "E", "A", "B", "D", "Q", "variance", "virial_residual", "max_density",
           "tail_fraction")

BLOWUP_KINETIC_FACTOR = 1e4
BLOWUP_TAIL_FRACTION = 0.1
BOUNDARY_DENSITY_RATIO = 1e-6
CERTIFICATE_GUARD = 1e-8


class Verdict(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP = "BlowUpSuspected"
    RESOLUTION_LOST = "ResolutionLost"


class Certificate(str, enum.Enum):
    CERTIFIED = "Certified"
    NOT_CERTIFIED = "NotCertified"


@dataclass
class TrajectoryRecord:
    """Sampled monitors of one run.

    ``E`` and ``Q`` hold E_a and Q_a when the trap is on. ``verdict`` is
    BlowUpSuspected if the detector fired (the run halts there), otherwise
    ResolutionLost if boundary density ever exceeded the threshold,
    otherwise Completed.
    """

    columns: dict
    verdict: Verdict
    dt: float
    T: float
    params: object
    grid: object
    final: WaveField = field(repr=False, default=None)
    snapshots: list = field(repr=False, default_factory=list)
    halted_at: float | None = None
    resolution_lost_at: float | None = None
    steps: int = 0

    def __len__(self):
        return len(self.columns["t"])

    def column(self, name):
        return np.asarray(self.columns[name])

    def rows(self):
        return [tuple(self.columns[k][i] for k in COLUMNS) for i in range(len(self))]

    @property
    def completed(self):
        return self.verdict != Verdict.BLOWUP


class Propagator:
    """Pre-computed multipliers for a fixed (grid, params, dt)."""

    def __init__(self, grid, p, dt):
        self.grid = grid
        self.p = p
        self.dt = dt
        self.full = np.exp(-0.5j * dt * grid.k2)
        self.half = np.exp(-0.25j * dt * grid.k2)
        self.v_static = 0.5 * p.trap ** 2 * grid.r2 if p.trap else None

    def nonlinear(self, psi):
        p = self.p
        phi = None
        if p.lambda2 != 0.0:
            rho = _kernels.abs2(psi)
            phi = dipolar_potential(rfftn(rho), self.grid)
        _kernels.nonlinear_phase(psi, self.v_static, p.lambda1, phi, p.lambda2, self.dt)
        return psi

    def advance(self, psi, steps):
        """``steps`` Strang steps from a synchronised physical-space field."""
        h = fftn(psi)
        h *= self.half
        for j in range(steps):
            psi = ifftn(h)
            self.nonlinear(psi)
            h = fftn(psi)
            h *= self.full if j < steps - 1 else self.half
        return ifftn(h), h

    def free(self, psi, t):
        """Exact linear free evolution U(t) (kinetic only)."""
        return ifftn(fftn(psi) * np.exp(-0.5j * t * self.grid.k2))


def _boundary_max(rho):
    return max(float(rho[0].max()), float(rho[-1].max()), float(rho[:, 0].max()),
               float(rho[:, -1].max()), float(rho[:, :, 0].max()), float(rho[:, :, -1].max()))


def _monitor(u, h, p):
    b = breakdown(u, p)
    rho = u.density()
    g = u.grid
    tail = _kernels.masked_fraction(h, g.k2, g.tail_mask)
    peak = float(rho.max())
    trapped = p.trap != 0
    row = {
        "mass": b.mass,
        "E": b.E_a if trapped else b.E,
        "A": b.A,
        "B": b.B,
        "D": b.D,
        "Q": b.Q_a if trapped else b.Q,
        "variance": b.D,
        "max_density": peak,
        "tail_fraction": tail,
    }
    return row, _boundary_max(rho) > BOUNDARY_DENSITY_RATIO * peak


def evolve(u0, p, dt, T, sample_every=1, snapshot_every=None, snapshots_dir=None,
           keep_snapshots=False, observer=None):
    """Integrate from ``u0`` to time ``T`` with fixed step ``dt``.

    Monitors are sampled every ``sample_every`` steps (and at t=0). Snapshots
    are taken every ``snapshot_every`` steps: kept in memory when
    ``keep_snapshots`` and/or written to ``snapshots_dir``. ``observer(t, u)``
    is called at every sample.
    """
    if not (dt > 0 and T > 0):
        raise ValueError("dt and T must be positive")
    sample_every = int(sample_every)
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if not np.all(np.isfinite(u0.values)):
        raise NonFiniteField("initial field contains NaN or Inf")
    n_steps = max(1, int(round(T / dt)))
    grid = u0.grid
    prop = Propagator(grid, p, dt)
    cols = {k: [] for k in COLUMNS}
    psi = u0.values.copy()
    h = fftn(psi)
    snaps = []
    if snapshot_every is None and (keep_snapshots or snapshots_dir):
        snapshot_every = sample_every
    if snapshots_dir:
        os.makedirs(snapshots_dir, exist_ok=True)

    def record(step, psi, h):
        u = WaveField(grid, psi)
        row, lost = _monitor(u, h, p)
        cols["t"].append(step * dt)
        for k, v in row.items():
            cols[k].append(v)
        cols["virial_residual"].append(math.nan)
        if observer is not None:
            observer(step * dt, u)
        if snapshot_every and step % snapshot_every == 0:
            if keep_snapshots:
                snaps.append((step * dt, u))
            if snapshots_dir:
                from .io import write_snapshot

                write_snapshot(os.path.join(snapshots_dir, f"snap_{step:08d}.bin"), u)
        return row, lost

    row0, lost = record(0, psi, h)
    A0 = row0["A"]
    resolution_at = 0.0 if lost else None
    verdict = Verdict.COMPLETED
    halted = None
    step = 0
    while step < n_steps:
        m = min(sample_every, n_steps - step)
        psi, h = prop.advance(psi, m)
        step += m
        if not np.all(np.isfinite(psi)):
            raise NonFiniteField(f"field became non-finite at t = {step * dt:.6g}")
        row, lost = record(step, psi, h)
        if lost and resolution_at is None:
            resolution_at = step * dt
            log.info("boundary density above threshold at t=%.6g", step * dt)
        if row["A"] > BLOWUP_KINETIC_FACTOR * A0 or row["tail_fraction"] > BLOWUP_TAIL_FRACTION:
            verdict = Verdict.BLOWUP
            halted = step * dt
            log.info("blow-up suspected at t=%.6g (A=%.6g, tail=%.3g)", halted, row["A"],
                     row["tail_fraction"])
            break
    if verdict is Verdict.COMPLETED and resolution_at is not None:
        verdict = Verdict.RESOLUTION_LOST
    rec = TrajectoryRecord(cols, verdict, dt, T, p, grid, WaveField(grid, psi), snaps, halted,
                           resolution_at, step)
    if p.trap == 0:
        _fill_virial(rec)
    return rec


def _virial_series(t, V, Q):
    dt = np.diff(t)
    if len(t) < 3:
        raise InsufficientSamples(f"virial check needs >= 3 samples, got {len(t)}")
    if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
        raise InsufficientSamples("virial check needs uniformly spaced samples")
    d2 = (V[2:] - 2.0 * V[1:-1] + V[:-2]) / dt[0] ** 2
    return np.abs(d2 - 2.0 * Q[1:-1]) / (1.0 + np.abs(Q[1:-1])), d2


def _fill_virial(rec):
    t = rec.column("t")
    if len(t) < 3:
        return
    # a final partial block breaks uniform spacing; fill the uniform prefix only
    m = len(t)
    if abs((t[-1] - t[-2]) - (t[1] - t[0])) > 1e-9 * (t[1] - t[0]):
        m -= 1
    if m < 3:
        return
    res, _ = _virial_series(t[:m], rec.column("variance")[:m], rec.column("Q")[:m])
    rec.columns["virial_residual"][1:m - 1] = list(res)


def virial_check(traj):
    """max over interior samples of |V'' - 2Q| / (1 + |Q|), V'' by central differences."""
    res, _ = _virial_series(traj.column("t"), traj.column("variance"), traj.column("Q"))
    return float(np.max(res))


def variance_second_derivative(traj):
    return _virial_series(traj.column("t"), traj.column("variance"), traj.column("Q"))[1]


def globality_certificate(u0, p, gamma_c):
    """Certified iff Q(u0) > 0 and E(u0) < gamma(c), both with a relative guard band."""
    b = breakdown(u0, p.with_(trap=0.0))
    ok = b.Q > CERTIFICATE_GUARD * b.A and b.E < gamma_c - CERTIFICATE_GUARD * abs(gamma_c)
    return Certificate.CERTIFIED if ok else Certificate.NOT_CERTIFIED


@dataclass
class ScatteringResult:
    times: np.ndarray
    defects: np.ndarray          # ||phi_i - phi_{i+1}||, phi_i = U(-t_i) psi(t_i)
    to_final: np.ndarray         # ||phi_i - phi_last||
    psi_plus: WaveField
    tail_defect: float

    @property
    def decreasing(self):
        d = self.defects
        return bool(np.all(np.diff(d) <= 1e-12 + 1e-9 * d[:-1]))


def scattering_diagnostic(snapshots, p):
    """Cauchy defects of the back-propagated states U(-t) psi(t)."""
    if p.trap != 0:
        raise ValueError("scattering diagnostic requires trap = 0")
    if len(snapshots) < 2:
        raise InsufficientSamples(f"need >= 2 snapshots, got {len(snapshots)}")
    grid = snapshots[0][1].grid
    times = np.array([t for t, _ in snapshots])
    back = []
    for t, u in snapshots:
        back.append(ifftn(fftn(u.values) * np.exp(0.5j * t * grid.k2)))
    dV = grid.dV

    def dist(x, y):
        return math.sqrt(float(np.sum(_kernels.abs2(x - y))) * dV)

    defects = np.array([dist(back[i], back[i + 1]) for i in range(len(back) - 1)])
    to_final = np.array([dist(b, back[-1]) for b in back])
    return ScatteringResult(times, defects, to_final, WaveField(grid, back[-1]),
                            float(defects[-1]))
