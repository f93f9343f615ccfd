"""Acceptance gate: one test and one summary line per criterion.

Each test records ``criterion NN PASS|FAIL <title>: <measured values>`` and
then asserts. Lines are printed in the pytest terminal summary.
"""

import contextlib
import math
import time
import warnings

import numpy as np
import pytest

from dbec.config import parse_config
from dbec.dynamics import Verdict, evolve, virial_check
from dbec.experiments import (
    run_border_study,
    run_instability,
    run_small_mass_study,
    run_trapped_stability,
    trapped_grid,
)
from dbec.functionals import (
    FOUR_PI_3,
    PhysParams,
    breakdown,
    isotropic_rescale,
    mass_rescale,
    weinstein_level,
)
from dbec.grid import WaveField, dipolar_multiplier, iso_gaussian, make_grid
from dbec.ground_state import (
    estimate_gamma_a,
    solve_free_ground_state,
    solve_trapped_minimizer,
)

from conftest import ACCEPTANCE, random_field

pytestmark = pytest.mark.acceptance


class _Rec:
    ok = False
    detail = ""


@contextlib.contextmanager
def criterion(n, title):
    rec = _Rec()
    t0 = time.perf_counter()
    try:
        yield rec
    except Exception as e:
        rec.ok = False
        rec.detail = f"{type(e).__name__}: {e}"
        raise
    finally:
        dt = time.perf_counter() - t0
        ACCEPTANCE[n] = (f"criterion {n:02d} {'PASS' if rec.ok else 'FAIL'} {title}: "
                         f"{rec.detail} [{dt:.1f} s]")
    assert rec.ok, ACCEPTANCE[n]


@pytest.fixture(scope="module")
def dipolar03():
    grid = make_grid(64, 8.0)
    return solve_free_ground_state(grid, PhysParams(-1.0, 0.3))


def test_01_spectral_B_oracle():
    with criterion(1, "Gaussian B oracle") as r:
        t0 = time.perf_counter()
        g = iso_gaussian(make_grid(64, 8.0))
        B = breakdown(g, PhysParams(-1.0, 0.7)).B
        elapsed = time.perf_counter() - t0
        exact = -(2 * math.pi) ** -1.5
        rel = abs(B / exact - 1)
        r.ok = rel <= 5e-6 and elapsed < 1.0
        r.detail = f"B = {B:.10f}, rel err {rel:.2e} (<= 5e-6), runtime {elapsed:.2f} s (< 1 s)"


def test_02_identity_suite():
    with criterion(2, "identity suite on 1000 random fields") as r:
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        grid = make_grid(16, 4.0)
        worst = worst_a = 0.0
        for _ in range(1000):
            l1, l2 = rng.uniform(-3, 3, 2)
            a = rng.uniform(0, 2)
            u = WaveField(grid, random_field(grid, rng, smooth=rng.uniform(0.2, 1.0)))
            b = breakdown(u, PhysParams(l1, l2, trap=a))
            worst = max(worst, abs(b.E - b.Q / 3 - b.A / 6) / (b.A / 6))
            rhs = b.A / 6 + 5 / 6 * a * a * b.D
            worst_a = max(worst_a, abs(b.E_a - b.Q_a / 3 - rhs) / rhs)
        bounds_ok = True
        for n, L in (((16, 16, 16), (4, 4, 4)), ((8, 16, 32), (1, 3, 7)), ((64,) * 3, (8,) * 3)):
            K = dipolar_multiplier(make_grid(n, L))
            bounds_ok &= bool(K.min() >= -FOUR_PI_3 and K.max() <= 2 * FOUR_PI_3)
        elapsed = time.perf_counter() - t0
        r.ok = worst <= 1e-10 and worst_a <= 1e-10 and bounds_ok and elapsed < 30
        r.detail = (f"free {worst:.1e}, trapped {worst_a:.1e} (<= 1e-10), K-hat bounds "
                    f"{'hold' if bounds_ok else 'violated'}, runtime {elapsed:.1f} s (< 30 s)")


def test_03_scaling_laws():
    with criterion(3, "scaling exponents and J invariance") as r:
        rng = np.random.default_rng(3)
        grid = make_grid(32, 6.0)
        p = PhysParams(-1.0, 0.6)
        worst = worst_j = 0.0
        for _ in range(8):
            u = WaveField(grid, random_field(grid, rng, smooth=0.6))
            b = breakdown(u, p)
            for t in np.linspace(0.5, 2.0, 7):
                bt = breakdown(isotropic_rescale(u, t, mode="regrid"), p)
                expo = [math.log(bt.A / b.A) / math.log(t), math.log(bt.B / b.B) / math.log(t),
                        math.log(bt.D / b.D) / math.log(t)] if t != 1 else [2, 3, -2]
                worst = max(worst, max(abs(e - x) / abs(x) for e, x in zip(expo, (2, 3, -2))))
                worst_j = max(worst_j, abs(bt.J / b.J - 1))
            for theta in (0.5, 2.0):
                bm = breakdown(mass_rescale(u, theta, mode="regrid"), p)
                worst_j = max(worst_j, abs(bm.J / b.J - 1))
        r.ok = worst <= 1e-6 and worst_j <= 1e-5
        r.detail = (f"max exponent rel err {worst:.1e} (<= 1e-6), J drift {worst_j:.1e} "
                    f"(<= 1e-5), grid-dilation rescaling")


def test_04_free_ground_state():
    with criterion(4, "cubic free ground state 64^3, L=8") as r:
        t0 = time.perf_counter()
        p = PhysParams(-1.0, 0.0)
        u, rep = solve_free_ground_state(make_grid(64, 8.0), p)
        elapsed = time.perf_counter() - t0
        b = breakdown(u, p)
        q = abs(b.Q) / b.A
        mu_ref = b.A / (6 * b.mass)
        w = abs(b.J / weinstein_level(b.E, b.mass) - 1)
        r.ok = (rep.converged and q <= 1e-6 and rep.mu > 0 and abs(rep.mu / mu_ref - 1) <= 1e-6
                and w <= 1e-4 and elapsed < 300)
        r.detail = (f"|Q|/A {q:.1e}, mu {rep.mu:.8g} vs A/6c {mu_ref:.8g}, Weinstein rel err "
                    f"{w:.1e}, level {rep.level:.8g}, runtime {elapsed:.1f} s (< 300 s)")


def test_05_mass_law():
    with criterion(5, "c gamma(c) constant over c in {0.5, 1, 2}") as r:
        t0 = time.perf_counter()
        grid = make_grid(64, 8.0)
        vals = {}
        for c in (0.5, 1.0, 2.0):
            _, rep = solve_free_ground_state(grid, PhysParams(-1.0, 0.3, mass_target=c))
            vals[c] = c * rep.level
        elapsed = time.perf_counter() - t0
        spread = (max(vals.values()) - min(vals.values())) / vals[1.0]
        r.ok = spread <= 2e-3 and elapsed < 900
        r.detail = (", ".join(f"c={c:g}: {v:.8g}" for c, v in vals.items())
                    + f"; spread {spread:.1e} (<= 2e-3), runtime {elapsed:.1f} s (< 900 s)")


def test_06_dipolar_anisotropy(dipolar03):
    with criterion(6, "dipolar ground state elongates along x3") as r:
        _, rep = dipolar03
        r.ok = rep.converged and rep.anisotropy > 1.05
        r.detail = f"<x3^2>/<x1^2> = {rep.anisotropy:.6g} (> 1.05) at lambda = (-1, 0.3)"


def test_07_dynamics_order_unitarity():
    with criterion(7, "split-step unitarity and second order") as r:
        grid = make_grid(32, 8.0)
        from dbec.grid import gaussian

        u = gaussian(grid, (1.0, 1.2, 0.9))
        p = PhysParams(-1.0, 0.3, trap=0.5)
        tr = evolve(u, p, 1e-3, 10.0, sample_every=500)
        m = tr.column("mass")
        drift = float(np.max(np.abs(m / m[0] - 1)))
        errs = []
        for dt in (0.02, 0.01):
            t2 = evolve(u, p, dt, 2.0, sample_every=int(round(0.25 / dt)))
            E = t2.column("E")
            errs.append(float(np.max(np.abs(E - E[0]))))
        ratio = errs[0] / errs[1]
        r.ok = tr.steps == 10_000 and drift <= 1e-10 and ratio >= 3.5
        r.detail = (f"mass drift {drift:.1e} over {tr.steps} steps (<= 1e-10), energy drift "
                    f"ratio {ratio:.3f} on halving dt (>= 3.5)")


def test_08_virial():
    with criterion(8, "virial identity and stationary ground state") as r:
        grid = make_grid(32, 8.0)
        free = PhysParams(0.0, 0.0)
        tr = evolve(iso_gaussian(grid), free, 1e-3, 2.0, sample_every=10)
        t = tr.column("t")
        vrel = float(np.max(np.abs(tr.column("variance") / (1.5 * (1 + t * t)) - 1)))
        vres = virial_check(tr)
        # stationary run, time and Q measured on the solver's L=8 profile frame
        p = PhysParams(-1.0, 0.0)
        u, rep = solve_free_ground_state(grid, p)
        s2 = rep.diagnostics["t_star"] ** 2
        st = evolve(u, p, 1e-3 / s2, 5.0 / s2, sample_every=50)
        qabs = float(np.max(np.abs(st.column("Q")))) / s2
        qrel = float(np.max(np.abs(st.column("Q"))) / st.column("A")[0])
        r.ok = vrel <= 1e-4 and vres <= 2e-3 and qabs <= 1e-4 and st.completed
        r.detail = (f"V(t) rel err {vrel:.1e} (<= 1e-4), virial residual {vres:.1e} (<= 2e-3), "
                    f"stationary max |Q| {qabs:.1e} (<= 1e-4, |Q|/A(0) {qrel:.1e}) for t <= 5")


def test_09_instability_dichotomy():
    with criterion(9, "blow-up above, global existence below the ground state") as r:
        t0 = time.perf_counter()
        cfg = parse_config(overrides={"lambda1": "-1", "lambda2": "0", "stretches": "1.05",
                                      "certified_stretch": "0.95"})
        rep = run_instability(cfg)
        elapsed = time.perf_counter() - t0
        up, down = rep.outcomes["runs"]["1.05"], rep.outcomes["runs"]["0.95"]
        r.ok = (up["verdict"] == Verdict.BLOWUP.value and up["max_Q"] < 0
                and down["certificate"] == "Certified" and down["verdict"] != Verdict.BLOWUP.value
                and down["max_A_ratio"] <= 3.0 and elapsed < 600)
        r.detail = (f"s=1.05 {up['verdict']} at t={up['halted_at']:.3g}, max Q {up['max_Q']:.4g} "
                    f"(< 0); s=0.95 {down['certificate']}, {down['verdict']}, max A/A0 "
                    f"{down['max_A_ratio']:.4g} (<= 3); runtime {elapsed:.0f} s (< 600 s)")


def test_10_trapped_controls(dipolar03):
    with criterion(10, "trapped minimiser controls") as r:
        ph = PhysParams(0.0, 0.0, trap=1.0)
        _, h = solve_trapped_minimizer(make_grid(32, 8.0), ph)
        a = 0.1
        pa = PhysParams(-1.0, 0.3, trap=a)
        _, t = solve_trapped_minimizer(trapped_grid(parse_config(), a), pa)
        gamma = dipolar03[1].level
        r.ok = (h.converged and abs(h.level - 1.5) <= 1e-6 and abs(h.mu + 1.5) <= 1e-6
                and t.converged and t.q_residual <= 1e-6 and t.level < gamma and t.mu < 0)
        r.detail = (f"harmonic E_a {h.level:.10g}, mu {h.mu:.10g}; (-1, 0.3) a=0.1: Q_a res "
                    f"{t.q_residual:.1e}, E_a {t.level:.6g} < gamma {gamma:.6g}, mu {t.mu:.6g}")


def test_11_gap_scaling(dipolar03):
    with criterion(11, "gamma_a bracket width is O(a^2)") as r:
        u_c, _ = dipolar03
        p = PhysParams(-1.0, 0.3)
        w = {}
        for a in (0.1, 0.2):
            br = estimate_gamma_a(p.with_(trap=a), u_c)
            w[a] = br["gamma_upper"] - br["gamma_lower"]
        ratio = w[0.1] / w[0.2]
        r.ok = abs(ratio - 0.25) <= 0.1
        r.detail = f"width(0.1)/width(0.2) = {ratio:.6f} (0.25 +- 0.1)"


def test_12_orbital_stability():
    with criterion(12, "orbital stability of the trapped minimiser") as r:
        t0 = time.perf_counter()
        cfg = parse_config(overrides={"lambda1": "-1", "lambda2": "0.3", "trap": "0.2",
                                      "perturbations": "0.01"})
        rep = run_trapped_stability(cfg)
        elapsed = time.perf_counter() - t0
        row = rep.table[0]
        ratio = row[3]
        r.ok = ratio <= 10.0 and elapsed < 900
        r.detail = (f"a=0.2, 1% perturbation: sup orbit distance / ||du||_Sigma = {ratio:.4g} "
                    f"(<= 10) up to T=20/a; runtime {elapsed:.0f} s (< 900 s)")


def test_13_border_trend():
    with criterion(13, "gamma increases toward the cone boundary") as r:
        cfg = parse_config(overrides={"lambda2": "0.5", "margins": "-1,-0.5,-0.25"})
        rep = run_border_study(cfg)
        g = [row["gamma"] for row in rep.outcomes["rows"]]
        r.ok = all(b > a for a, b in zip(g, g[1:]))
        r.detail = "gamma at margins -1, -0.5, -0.25: " + ", ".join(f"{x:.6g}" for x in g)


def test_14_small_mass_trend():
    with criterion(14, "trapped minimiser vanishes as c -> 0") as r:
        cfg = parse_config(overrides={"lambda1": "-1", "lambda2": "0.3"})
        rep = run_small_mass_study(cfg)
        s = [row["sigma_norm"] for row in rep.outcomes["rows"]]
        dev = rep.outcomes["harmonic_linearity_deviation"]
        r.ok = all(b < a for a, b in zip(s, s[1:])) and dev <= 1e-6
        r.detail = ("||u||_Sigma at c = 1, 0.5, 0.25, 0.1: " + ", ".join(f"{x:.5g}" for x in s)
                    + f"; harmonic linearity deviation {dev:.1e} (<= 1e-6)")
