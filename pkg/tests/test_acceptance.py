"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line through the ``verdict``
fixture; pytest lists them in an "acceptance criteria" section of the
terminal summary.  Run directly with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from younglab import generators as gen
from younglab.besov import build_lp_family
from younglab.config import SuiteConfig
from younglab.grid import Grid, GridFunction
from younglab.maxreg import SpaceTimeField, duhamel_solve, fd_residual
from younglab.operators import TimeGrid
from younglab.spaces import Lebesgue, Lorentz, Morrey
from younglab.suites import refinement_deltas, run_suite

YOUNG_SPECS = (Lebesgue(1.0), Lebesgue(1.5), Lebesgue(2.0), Lebesgue(4.0), Lorentz(2.0, 1.0),
               Morrey(2.0, 1.0))
FAMILIES = (Lebesgue(2.0), Lorentz(2.0, 1.0), Morrey(2.0, 1.0))


def rows(rep, anchor):
    return [c for c in rep.cases if c.anchor == anchor]


def test_young_constant(verdict):
    cfg = SuiteConfig("young", N=512, spaces=YOUNG_SPECS, count=100)
    start = time.perf_counter()
    rep = run_suite(cfg)
    elapsed = time.perf_counter() - start
    young = rows(rep, "young")
    worst = max(c.ratio for c in young)
    ok = (len(young) == 600 and all(c.passed for c in young) and worst <= 1 + 1e-6
          and elapsed <= 60.0)
    verdict(1, ok, f"{len(young)} pairs, sup ratio {worst:.12f}, {elapsed:.1f} s")


def test_converse_recovery(verdict):
    # L = 8 so that the thinnest mollifier (width 1/32) spans two cells at N = 1024
    cfg = SuiteConfig("converse-young", N=1024, L=8.0, spaces=FAMILIES)
    rep = run_suite(cfg)
    finals, monotone = [], True
    for spec in FAMILIES:
        cs = [c for c in rows(rep, "converse-young") if c.params["space"] == repr(spec)]
        devs = [abs(c.ratio - 1) for c in cs]
        monotone &= [c.params["k"] for c in cs] == [2, 4, 8, 16, 32]
        monotone &= all(b <= a for a, b in zip(devs, devs[1:]))
        finals.append(devs[-1])
    ok = monotone and max(finals) <= 1e-2 and rep.passed
    verdict(2, ok, f"final |ratio - 1| per family {[f'{d:.2e}' for d in finals]}, "
                   f"monotone {monotone}")


def test_exponential_kernel_bound(verdict):
    rep = run_suite(SuiteConfig("maximal", count=1000))
    exp_rows = rows(rep, "exp-kernel-bound")
    bad = sum(not c.passed for c in exp_rows)
    worst = max(c.ratio for c in exp_rows)
    ok = len(exp_rows) == 1000 and bad == 0 and worst <= 1.3679
    verdict(3, ok, f"{len(exp_rows)} cases, {bad} violations, sup lhs/Mf {worst:.6f}")


def test_lp_family_legality(verdict):
    fam = build_lp_family(Grid(1, 1024, 32.0), -4, 4)
    checks = fam.check()
    verdict(4, all(checks.values()), f"checks {checks}")


def test_besov_embedding(verdict):
    rep = run_suite(SuiteConfig("besov", spaces=FAMILIES, count=100))
    emb = rows(rep, "besov-embedding")
    bad = sum(not c.passed for c in emb)
    ok = len(emb) == 3 * 100 * 3 and bad == 0
    verdict(5, ok, f"{len(emb)} comparisons, {bad} violations")


def test_kernel_decay(verdict):
    cfg = SuiteConfig("kernel-decay")
    coarse, fine = run_suite(cfg), run_suite(cfg.refined())
    deltas = refinement_deltas(coarse, fine)
    sup_c = coarse.checked_sup
    sup_f = fine.checked_sup
    sim = rows(coarse, "kernel-self-similarity")
    sim_dev = coarse.notes["self_similarity_max_deviation"]
    ok = (max(deltas.values()) <= 0.05 and len(sim) > 0 and all(c.passed for c in sim)
          and sim_dev <= 0.05 and coarse.passed and fine.passed)
    verdict(6, ok, f"sup C {sup_c:.4f} (N={cfg.N}) vs {sup_f:.4f} (N={2 * cfg.N}), "
                   f"refinement delta {max(deltas.values()):.2e}; "
                   f"{len(sim)} interior self-similar pairs, max deviation {sim_dev:.3f}")


def test_linear_term_scaling(verdict):
    rep = run_suite(SuiteConfig("linear-term", spaces=(Lebesgue(2.0), Morrey(2.0, 1.0))))
    slopes = rep.notes["slopes"]
    ok = len(slopes) == 6 and all(abs(s) <= 0.05 for s in slopes.values()) and rep.passed
    worst = max(abs(s) for s in slopes.values())
    verdict(7, ok, f"{len(slopes)} (space, tau) fits, max |slope| {worst:.4f}")


def test_duhamel_term(verdict):
    cfg = SuiteConfig("duhamel-term", spaces=(Lebesgue(2.0), Morrey(2.0, 1.0)), count=2)
    coarse, fine = run_suite(cfg), run_suite(cfg.refined())
    deltas = refinement_deltas(coarse, fine)
    groups = {k for k in deltas if "rho=" in k}
    finite = all(math.isfinite(c.ratio) for rep in (coarse, fine) for c in rows(rep, "duhamel-term"))
    stable = max(deltas.values()) <= 0.05
    # 1000 cases of the duality and Fubini lemmas on a small grid
    small = SuiteConfig("duhamel-term", N=256, L=16.0, cells=128, j_min=-3, j_max=3, count=1000)
    lemmas = run_suite(small)
    dual, fub = rows(lemmas, "duality-exp"), rows(lemmas, "rho1-fubini")
    bad = sum(not c.passed for c in dual + fub)
    ok = (finite and stable and len(groups) == 2 * 9 and len(dual) == 1000 and len(fub) == 1000
          and bad == 0 and coarse.passed and fine.passed)
    verdict(8, ok, f"{len(groups)} (space, rho, sigma) groups, max refinement delta "
                   f"{max(deltas.values()):.2e}; {len(dual)} duality and {len(fub)} Fubini cases, "
                   f"{bad} violations")


def test_lorentz_diagonal(verdict):
    cfg = SuiteConfig("maxreg", N=256, L=16.0, cells=128, j_min=-3, j_max=3, count=20)
    rep = run_suite(cfg)
    diag = rows(rep, "lorentz-diagonal")
    draws = {c.params["draw"] for c in diag}
    worst = max(abs(c.lhs - c.rhs) / abs(c.rhs) for c in diag)
    ok = len(draws) == 20 and worst <= 1e-10 and all(c.passed for c in diag)
    verdict(9, ok, f"{len(draws)} cases x {len(diag) // len(draws)} rho, max relative gap {worst:.2e}")


def test_solver_ground_truth(verdict):
    grid = Grid(1, 1024, 32.0)
    tg = TimeGrid.geometric()
    m = 40
    lam = (m * grid.freq_spacing) ** 2
    shape = GridFunction(grid, np.cos(m * grid.freq_spacing * grid.coords[0]))
    # f = 0: u(t) = e^{-lam t} u0
    u, _, _ = duhamel_solve(shape, SpaceTimeField.zeros(grid, tg), at="end")
    free = np.max(np.abs(u.frames - np.multiply.outer(np.exp(-lam * tg.times), shape.samples)))
    # time-constant forcing c: u(t) = e^{-lam t} a + c (1 - e^{-lam t}) / lam
    a, c = 0.6, 2.0
    f = SpaceTimeField.from_profile(grid, tg, [lambda t: np.full_like(t, c)], [shape])
    u, _, _ = duhamel_solve(shape * a, f, at="end")
    amp = np.exp(-lam * tg.times) * a - c * np.expm1(-lam * tg.times) / lam
    forced = np.max(np.abs(u.frames - np.multiply.outer(amp, shape.samples)))
    # finite-difference residual on smooth single-band data, 512 cells
    residuals = {}
    for j in (-3, -2, -1, 0):
        band = gen.single_band(grid, j)
        fj = SpaceTimeField.from_profile(grid, tg, [gen.time_pulse(1.0, 0.5)], [band])
        residuals[j] = fd_residual(band, fj)[1]
    ok = free <= 1e-10 and forced <= 1e-10 and max(residuals.values()) <= 1e-3 and len(tg) == 512
    verdict(10, ok, f"closed-form errors {free:.1e} (f = 0), {forced:.1e} (constant f); "
                    f"max relative FD residual {max(residuals.values()):.2e} over bands "
                    f"{sorted(residuals)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
