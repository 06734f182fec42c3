"""Named inequality sweeps driven by a :class:`SuiteConfig`.

Every suite is deterministic given the config: each draws from its own seeded
stream and runs its cases in a fixed order.  A case that hits a module
precondition becomes an error row and the sweep continues.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

from . import generators as gen
from .besov import BesovParams, aggregate, block_norms, build_lp_family, lift_check
from .config import SUITES, SuiteConfig
from .maxreg import (SpaceTimeField, duality_exp_check, fs_vector_check, fubini_majorant,
                     fubini_tails, kernel_decay_ratio, kernel_resolved, linear_term_check,
                     maxreg_ratio, maxreg_ratio_lebesgue, regularity_blocks, rho1_fubini_check)
from .operators import (EXP_KERNEL_CONSTANT, TimeGrid, converse_young_check,
                        exp_kernel_bound_check, hl_maximal_grid, hl_maximal_halfline, translate,
                        young_ratio)
from .report import ExperimentReport
from .spaces import axiom_suite
from .grid import GridFunction

INF = math.inf

# suite -> (ceiling anchor, default ceiling)
CEILINGS = {
    "axioms": ("bli", None),
    "young": ("young", 1.0 + 1e-6),
    "converse-young": (None, None),
    "maximal": ("exp-kernel-bound", 1.3679),
    "kernel-decay": ("kernel-decay", None),
    "besov": ("besov-embedding", None),
    "linear-term": ("linear-term", None),
    "duhamel-term": ("duhamel-term", None),
    "maxreg": ("maxreg", None),
}

SLOPE_TOL = 0.05
SELF_SIMILARITY_TOL = 0.05


def _rng(cfg: SuiteConfig, name: str, *extra: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, zlib.crc32(name.encode()), *extra])


def _timegrid(cfg: SuiteConfig) -> TimeGrid:
    return TimeGrid.geometric(cfg.T, cfg.cells, cfg.first)


def _family(cfg: SuiteConfig):
    return build_lp_family(cfg.grid, cfg.j_min, cfg.j_max)


def _guard(rep: ExperimentReport, params: dict, anchor: str, fn):
    """Run ``fn()``; on a precondition failure record an error row instead."""
    try:
        return fn()
    except (ValueError, ZeroDivisionError, FloatingPointError) as e:
        rep.add(params, math.nan, math.nan, anchor, passed=False, ratio=math.nan,
                error=f"{type(e).__name__}: {e}")
        return None


def _idx(x: float) -> str:
    return "inf" if x == INF else f"{x:g}"


# --------------------------------------------------------------------------


def run_axioms(cfg: SuiteConfig) -> ExperimentReport:
    grid = cfg.grid
    lo, hi = cfg.data_band
    rep = ExperimentReport("axioms")
    for k, spec in enumerate(cfg.spaces):
        def draw(rng):
            return gen.band_limited_field(grid, rng, lo, hi, cfg.slope)
        rep.extend(axiom_suite(spec, draw, cfg.count, seed=cfg.seed * 1000 + k), tag=False)
    return rep


def run_young(cfg: SuiteConfig) -> ExperimentReport:
    grid = cfg.grid
    lo, hi = cfg.data_band
    rep = ExperimentReport("young")
    for k, spec in enumerate(cfg.spaces):
        rng = _rng(cfg, "young", k)
        for i in range(cfg.count):
            f = gen.band_limited_field(grid, rng, lo, hi, cfg.slope)
            g = gen.nonnegative_field(grid, rng, lo, hi, cfg.slope)
            if i % 2:
                g = g * gen.smooth_bump(grid, rng.uniform(-cfg.L / 2, cfg.L / 2, grid.dim),
                                        rng.uniform(0.5, 4.0))
            params = {"space": repr(spec), "draw": i}
            r = _guard(rep, params, "young", lambda: young_ratio(f, g, spec))
            if r is not None:
                rep.add(params, r, 1.0, "young", passed=r <= 1.0 + 1e-6, ratio=r)
    return rep


def run_converse_young(cfg: SuiteConfig) -> ExperimentReport:
    grid = cfg.grid
    rep = ExperimentReport("converse-young")
    ks = [k for k in (2, 4, 8, 16, 32) if 1.0 / k >= grid.spacing]
    f = gen.smooth_bump(grid, 0.0, 1.0)
    rng = _rng(cfg, "converse-young")
    z = np.round(rng.uniform(-cfg.L / 4, cfg.L / 4, grid.dim) / grid.spacing) * grid.spacing
    for spec in cfg.spaces:
        sub = _guard(rep, {"space": repr(spec)}, "converse-young",
                     lambda: converse_young_check(f, z, spec, ks))
        if sub is not None:
            rep.extend(sub, tag=False)
    return rep


def run_maximal(cfg: SuiteConfig) -> ExperimentReport:
    tg = _timegrid(cfg)
    rep = ExperimentReport("maximal")
    rng = _rng(cfg, "maximal")
    for i in range(cfg.count):
        a = 10.0 ** rng.uniform(-2, 3)
        f = gen.random_step(tg, rng)
        t = float(tg.times[rng.integers(len(tg))])
        m = hl_maximal_halfline(f)
        lhs, rhs = exp_kernel_bound_check(a, f, t, m)
        mf = rhs / EXP_KERNEL_CONSTANT
        rep.add({"a": a, "t": t, "draw": i}, lhs, rhs, "exp-kernel-bound",
                passed=lhs <= rhs * (1 + 1e-12), ratio=lhs / mf if mf > 0 else 0.0)
    # vector-valued maximal inequality
    for rho, sigma in ((2.0, 2.0), (3.0, 1.5), (2.0, INF)):
        for i in range(max(1, cfg.count // 50)):
            fs = [gen.random_step(tg, rng) for _ in range(8)]
            lhs, rhs = fs_vector_check(fs, rho, sigma)
            r = (lhs / rhs) ** (1.0 / rho)
            rep.add({"rho": rho, "sigma": _idx(sigma), "draw": i,
                     "group": f"rho={_idx(rho)},sigma={_idx(sigma)}"},
                    lhs, rhs, "fefferman-stein", passed=math.isfinite(r), ratio=r)
    # the grid maximal function dominates |f| pointwise
    grid = cfg.grid
    lo, hi = cfg.data_band
    for i in range(max(1, cfg.count // 100)):
        f = gen.band_limited_field(grid, rng, lo, hi, cfg.slope)
        mf = hl_maximal_grid(f).samples
        af = np.abs(f.samples)
        r = float(np.max(af / mf))
        rep.add({"draw": i}, float(af.max()), float(mf.max()), "maximal-dominates",
                passed=bool(np.all(af <= mf * (1 + 1e-12))), ratio=r)
    return rep


def kernel_decay_times() -> np.ndarray:
    """``16 * 2^{-k}`` for ``k = 0..11``, covering ``[0.01, 16]``; closed under ``t -> t/4`` up to the ends."""
    return 16.0 * 2.0 ** -np.arange(12)


def run_kernel_decay(cfg: SuiteConfig) -> ExperimentReport:
    fam = _family(cfg)
    grid = cfg.grid
    rep = ExperimentReport("kernel-decay")
    js = range(max(-3, cfg.j_min), min(3, cfg.j_max) + 1)
    ts = kernel_decay_times()
    table = {}
    for j in js:
        for k, t in enumerate(ts):
            r = kernel_decay_ratio(fam, j, float(t))
            bound = math.exp(-(4.0**j) * t)
            table[(j, k)] = r
            rep.add({"j": j, "t": float(t)}, r * bound, bound, "kernel-decay",
                    passed=math.isfinite(r), ratio=r)
    worst, pairs = 0.0, 0
    for (j, k), r in table.items():
        nxt = table.get((j + 1, k + 2))
        if nxt is None or not (kernel_resolved(grid, j, ts[k]) and kernel_resolved(grid, j + 1, ts[k + 2])):
            continue
        pairs += 1
        dev = abs(nxt / r - 1.0)
        worst = max(worst, dev)
        rep.add({"j": j, "t": float(ts[k])}, nxt, r, "kernel-self-similarity",
                passed=dev <= SELF_SIMILARITY_TOL, ratio=nxt / r)
    rep.checks["self-similarity-pairs"] = pairs > 0
    rep.notes["self_similarity_max_deviation"] = worst
    rep.notes["self_similarity_pairs"] = pairs
    return rep


def run_besov(cfg: SuiteConfig) -> ExperimentReport:
    fam = _family(cfg)
    grid = cfg.grid
    lo, hi = cfg.data_band
    rep = ExperimentReport("besov")
    pairs = ((1.0, 2.0), (2.0, INF), (1.0, INF))
    for k, spec in enumerate(cfg.spaces):
        rng = _rng(cfg, "besov", k)
        for i in range(cfg.count):
            f = gen.band_limited_field(grid, rng, lo, hi, cfg.slope)
            s = float(rng.uniform(-1, 2))
            b = block_norms(f, fam, spec)
            for r1, r2 in pairs:
                n1 = float(aggregate(b, fam.js, s, r1))
                n2 = float(aggregate(b, fam.js, s, r2))
                rep.add({"space": repr(spec), "draw": i, "s": s, "r1": _idx(r1), "r2": _idx(r2)},
                        n2, n1, "besov-embedding", passed=n2 <= n1 * (1 + 1e-10))
            # lift (-Delta)^alpha: B^s -> B^{s - 2 alpha}, ratio recorded per alpha
            for alpha in (-0.5, 0.5, 1.0):
                params = {"space": repr(spec), "draw": i, "alpha": alpha, "group": f"alpha={alpha:g}"}
                out = _guard(rep, params, "lift",
                             lambda: lift_check(f, alpha, BesovParams(s, 2.0, spec), fam))
                if out is not None:
                    rep.add(params, out[0], out[1], "lift", passed=math.isfinite(out[0] / out[1]))
    return rep


def linear_term_bands(cfg: SuiteConfig) -> list[int]:
    grid = cfg.grid
    return [j for j in range(max(-3, cfg.j_min), min(3, cfg.j_max) + 1)
            if 2.0 ** (j + 2) < grid.nyquist]


def run_linear_term(cfg: SuiteConfig) -> ExperimentReport:
    fam = _family(cfg)
    tg = _timegrid(cfg)
    grid = cfg.grid
    rep = ExperimentReport("linear-term")
    bands = linear_term_bands(cfg)
    slopes = {}
    for spec in cfg.spaces:
        blocks = {j: regularity_blocks(gen.single_band(grid, j), SpaceTimeField.zeros(grid, tg),
                                       spec, fam) for j in bands}
        for tau in (1.0, 2.0, INF):
            group = f"space={spec!r},tau={_idx(tau)}"
            ratios = []
            for j in bands:
                lhs, rhs = linear_term_check(None, tau, spec, fam, blocks=blocks[j])
                ratios.append(lhs / rhs)
                rep.add({"space": repr(spec), "tau": _idx(tau), "j0": j, "group": group},
                        lhs, rhs, "linear-term", passed=math.isfinite(lhs / rhs))
            slope = float(np.polyfit(bands, np.log(ratios), 1)[0]) if len(bands) > 1 else 0.0
            slopes[group] = slope
            rep.checks[f"slope[{group}]"] = abs(slope) <= SLOPE_TOL
    rep.notes["slopes"] = slopes
    return rep


SIGMAS = (1.0, 2.0, INF)


def run_duhamel_term(cfg: SuiteConfig) -> ExperimentReport:
    """Duhamel part only (``u0 = 0``), with the duality and Fubini lemmas."""
    fam = _family(cfg)
    tg = _timegrid(cfg)
    grid = cfg.grid
    lo, hi = cfg.data_band
    rep = ExperimentReport("duhamel-term")
    summed, closed = fubini_tails(tg, fam.js)
    rep.checks["fubini-tail-bound"] = bool(np.all(closed <= 1.0) and np.all(summed <= 1.0 + 1e-12))
    rep.checks["fubini-tail-closed-form"] = bool(np.max(np.abs(summed - closed)) <= 1e-12)
    zero = GridFunction(grid, np.zeros(grid.shape))
    for k, spec in enumerate(cfg.spaces):
        rng = _rng(cfg, "duhamel-term", k)
        for i in range(cfg.count):
            f = gen.random_forcing(grid, tg, rng, lo, hi)
            base = {"space": repr(spec), "draw": i}
            b = _guard(rep, base, "duhamel-term", lambda: regularity_blocks(zero, f, spec, fam))
            if b is not None:
                for rho in (1.0, 2.0, 4.0):
                    for sigma in SIGMAS:
                        r = maxreg_ratio(zero, f, rho, rho, sigma, spec, fam, blocks=b)
                        rep.add(base | {"rho": rho, "sigma": _idx(sigma),
                                        "group": f"space={spec!r},rho={rho:g},sigma={_idx(sigma)}"},
                                r.lhs, r.rhs, "duhamel-term", passed=math.isfinite(r.ratio))
                # the Fubini step: sum_j int int 4^j e^{-4^j (t-s)} b_j(s) ds dt <= sum_j int b_j
                lhs, rhs = rho1_fubini_check(f, spec, fam, blocks=b)
                major = fubini_majorant(b.f, tg, fam.js)
                rep.add(base | {"group": f"space={spec!r}", "majorant": major}, lhs, rhs, "rho1-fubini",
                        passed=math.isfinite(lhs / rhs) and major <= rhs * (1 + 1e-12))
            # scalar duality lemma on a random step function
            j = int(rng.integers(cfg.j_min, cfg.j_max + 1))
            g = gen.random_step(tg, rng)
            s = float(tg.times[rng.integers(len(tg))])
            lhs, rhs = duality_exp_check(j, g, s)
            rep.add(base | {"j": j, "s": s}, lhs, rhs, "duality-exp",
                    passed=lhs <= rhs * (1 + 1e-10))
    return rep


def run_maxreg(cfg: SuiteConfig) -> ExperimentReport:
    fam = _family(cfg)
    tg = _timegrid(cfg)
    grid = cfg.grid
    lo, hi = cfg.data_band
    rep = ExperimentReport("maxreg")
    lorentz = {2.0: (1.0, INF), 4.0: (1.0, 2.0, INF)}
    for k, spec in enumerate(cfg.spaces):
        rng = _rng(cfg, "maxreg", k)
        for i in range(cfg.count):
            u0 = gen.band_limited_field(grid, rng, lo, hi, cfg.slope)
            f = gen.random_forcing(grid, tg, rng, lo, hi)
            shift = rng.uniform(-cfg.L, cfg.L, grid.dim)
            base = {"space": repr(spec), "draw": i}
            b = _guard(rep, base, "maxreg", lambda: regularity_blocks(u0, f, spec, fam))
            if b is None:
                continue
            for rho in (1.0, 2.0, 4.0, INF):
                ws = (rho,) + lorentz.get(rho, ())
                for w in ws:
                    for sigma in SIGMAS:
                        r = maxreg_ratio(u0, f, rho, w, sigma, spec, fam, blocks=b)
                        grp = f"space={spec!r},rho={_idx(rho)},w={_idx(w)},sigma={_idx(sigma)}"
                        rep.add(base | {"rho": _idx(rho), "w": _idx(w), "sigma": _idx(sigma), "group": grp},
                                r.lhs, r.rhs, "maxreg", passed=math.isfinite(r.ratio))
                a = maxreg_ratio(u0, f, rho, rho, 2.0, spec, fam, blocks=b).ratio
                d = maxreg_ratio_lebesgue(u0, f, rho, 2.0, spec, fam, blocks=b).ratio
                rep.add(base | {"rho": _idx(rho)}, a, d, "lorentz-diagonal",
                        passed=abs(a - d) <= 1e-10 * abs(d))
            # spatial translation invariance
            u0s = translate(u0, shift)
            fs = SpaceTimeField(grid, tg, np.roll(f.frames, u0s.meta["shift_cells"],
                                                  axis=grid.axes))
            bs = regularity_blocks(u0s, fs, spec, fam)
            r0 = maxreg_ratio(u0, f, 2.0, 2.0, 2.0, spec, fam, blocks=b).ratio
            r1 = maxreg_ratio(u0s, fs, 2.0, 2.0, 2.0, spec, fam, blocks=bs).ratio
            rep.add(base | {"shift": [float(x) for x in shift]}, r1, r0, "translation-invariance",
                    passed=abs(r1 - r0) <= 1e-8 * abs(r0))
    return rep


RUNNERS = {
    "axioms": run_axioms,
    "young": run_young,
    "converse-young": run_converse_young,
    "maximal": run_maximal,
    "kernel-decay": run_kernel_decay,
    "besov": run_besov,
    "linear-term": run_linear_term,
    "duhamel-term": run_duhamel_term,
    "maxreg": run_maxreg,
}


def run_suite(cfg: SuiteConfig, name: str | None = None) -> ExperimentReport:
    """Run one named suite (``cfg.suite`` by default) and apply its ceiling."""
    name = name or cfg.suite
    rep = RUNNERS[name](cfg)
    anchor, default = CEILINGS[name]
    rep.ceiling = cfg.ceilings.get(name, default)
    rep.ceiling_anchor = anchor
    return rep


def run(cfg: SuiteConfig) -> list[ExperimentReport]:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    return [run_suite(cfg, n) for n in names]


def refinement_deltas(coarse: ExperimentReport, fine: ExperimentReport) -> dict[str, float]:
    """Relative change of each grouped supremum of the suite's primary anchor."""
    anchor = CEILINGS[coarse.suite][0]
    a, b = coarse.sup_by_group(anchor), fine.sup_by_group(anchor)
    out = {}
    for key in sorted(set(a) & set(b)):
        out[key] = abs(b[key] - a[key]) / abs(a[key]) if a[key] else abs(b[key])
    return out
