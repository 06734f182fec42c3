"""Littlewood-Paley cutoffs and homogeneous Besov norms over a space X.

The radial cutoff ``phi`` is 0 on ``[0, 1.5]``, rises by a C^1 smoothstep
on ``[1.5, 2]``, equals 1 on ``[2, 4]``, falls on ``[4, 8]`` and vanishes
beyond, so ``chi_{B(4)-B(2)} <= phi <= chi_{B(8)-B(1)}``.  The companion
``Phi`` is 0 on ``[0, 1]``, rises on ``[1, 1.5]`` and is 1 afterwards; it
vanishes on ``B(1)`` and equals 1 on ``supp phi`` exactly, with a rise
smooth enough for the multiplier kernels to stay integrable uniformly.

The quotient by polynomials is realised by the finite dyadic range: only
bands ``j_min <= j <= j_max`` enter any norm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import FREQUENCY, Grid, GridFunction, forward_array, inverse_array
from .operators import fourier_multiplier
from .spaces import SpaceSpec, norm_array

PHI_RISE = (1.5, 2.0)
PHI_FALL = (4.0, 8.0)
BIG_PHI_RISE = (1.0, 1.5)


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def phi_profile(rho):
    rho = np.asarray(rho, dtype=float)
    rise = smoothstep((rho - PHI_RISE[0]) / (PHI_RISE[1] - PHI_RISE[0]))
    fall = smoothstep((PHI_FALL[1] - rho) / (PHI_FALL[1] - PHI_FALL[0]))
    return np.where(rho < PHI_FALL[0], rise, fall)


def big_phi_profile(rho):
    rho = np.asarray(rho, dtype=float)
    return smoothstep((rho - BIG_PHI_RISE[0]) / (BIG_PHI_RISE[1] - BIG_PHI_RISE[0]))


def representable_range(grid: Grid) -> tuple[int, int]:
    """Bands whose plateau ``[2^{j+1}, 2^{j+2}]`` holds a resolved frequency."""
    dxi, kmax = grid.freq_spacing, grid.n // 2

    def ok(j):
        lo, hi = math.ceil(2.0 ** (j + 1) / dxi), math.floor(2.0 ** (j + 2) / dxi)
        return lo <= hi and lo <= kmax

    j_lo = math.floor(math.log2(dxi)) - 3
    while not ok(j_lo):
        j_lo += 1
    j_hi = j_lo
    while ok(j_hi + 1):
        j_hi += 1
    return j_lo, j_hi


@dataclass(frozen=True, eq=False)
class LPFamily:
    grid: Grid
    j_min: int
    j_max: int
    phi: np.ndarray  # (nj, *grid.shape), FFT order
    Phi: np.ndarray

    @property
    def js(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    def index(self, j: int) -> int:
        if not self.j_min <= j <= self.j_max:
            raise ValueError(f"band {j} outside [{self.j_min}, {self.j_max}]")
        return j - self.j_min

    def phi_j(self, j: int) -> GridFunction:
        return GridFunction(self.grid, self.phi[self.index(j)], FREQUENCY)

    def Phi_j(self, j: int) -> GridFunction:
        return GridFunction(self.grid, self.Phi[self.index(j)], FREQUENCY)

    @property
    def covered_annulus(self) -> tuple[float, float]:
        return 2.0 ** (self.j_min + 1), min(2.0 ** (self.j_max + 2), self.grid.nyquist)

    def check(self) -> dict[str, bool]:
        """Pointwise legality of every sampled cutoff."""
        rho = self.grid.freq_radius
        sandwich = dominance = True
        for k, j in enumerate(self.js):
            rs = rho * 2.0 ** (-int(j))
            ph, Ph = self.phi[k], self.Phi[k]
            plateau = (rs >= 2) & (rs < 4)
            outside = (rs < 1) | (rs >= 8)
            sandwich &= bool(np.all(ph[plateau] == 1) and np.all(ph[outside] == 0)
                             and np.all((ph >= 0) & (ph <= 1)))
            dominance &= bool(np.all(Ph[rs < 1] == 0) and np.all(Ph[ph > 0] == 1)
                              and np.array_equal(Ph * ph, ph))
        band = (rho >= 2.0 ** (self.j_min + 1)) & (rho <= 2.0 ** (self.j_max + 2))
        total = self.phi.sum(axis=0)[band]
        covering = bool(np.all((total >= 1) & (total <= 3)))
        return {"sandwich": sandwich, "dominance": dominance, "covering": covering}


def build_lp_family(grid: Grid, j_min: int, j_max: int) -> LPFamily:
    if j_min >= j_max:
        raise ValueError("need j_min < j_max")
    lo, hi = representable_range(grid)
    if j_min < lo or j_max > hi:
        raise ValueError(
            f"bands [{j_min}, {j_max}] not representable on {grid}; achievable range is "
            f"[{lo}, {hi}] (frequency spacing {grid.freq_spacing:.4g}, Nyquist {grid.nyquist:.4g})")
    js = np.arange(j_min, j_max + 1)
    rho = grid.freq_radius
    phi = np.stack([phi_profile(rho * 2.0 ** (-int(j))) for j in js])
    Phi = np.stack([big_phi_profile(rho * 2.0 ** (-int(j))) for j in js])
    phi.setflags(write=False)
    Phi.setflags(write=False)
    fam = LPFamily(grid, j_min, j_max, phi, Phi)
    bad = [k for k, ok in fam.check().items() if not ok]
    if bad:
        raise ValueError(f"constructed family violates: {', '.join(bad)}")
    return fam


@dataclass(frozen=True)
class BesovParams:
    s: float
    r: float
    spec: SpaceSpec

    def __post_init__(self):
        if not self.r >= 1:
            raise ValueError(f"summability index must be >= 1, got {self.r}")


def lp_block(f: GridFunction, family: LPFamily, j: int) -> GridFunction:
    return fourier_multiplier(family.phi_j(j), f)


def block_norms_spectra(spectra: np.ndarray, family: LPFamily, spec: SpaceSpec,
                        max_elems: int = 1 << 22) -> np.ndarray:
    """``||phi_j(D) F||_X`` for a batch of spectra ``(..., *shape)`` -> ``(..., nj)``."""
    grid = family.grid
    lead = spectra.shape[: spectra.ndim - grid.dim]
    flat = spectra.reshape((-1,) + grid.shape)
    nj = len(family.js)
    per = nj * grid.n**grid.dim
    chunk = max(1, max_elems // per)
    out = np.empty((flat.shape[0], nj))
    for s in range(0, flat.shape[0], chunk):
        blocks = inverse_array(family.phi[None] * flat[s:s + chunk, None], grid)
        out[s:s + chunk] = norm_array(blocks, grid, spec)
    return out.reshape(lead + (nj,))


def block_norms(f: GridFunction, family: LPFamily, spec: SpaceSpec) -> np.ndarray:
    if f.grid != family.grid:
        raise ValueError("grid mismatch between function and family")
    return block_norms_spectra(forward_array(f.samples, f.grid), family, spec)


def aggregate(bnorms: np.ndarray, js: np.ndarray, s: float, r: float) -> np.ndarray:
    """``l^r`` sum over the last axis of ``2^{js} b_j``."""
    v = bnorms * 2.0 ** (s * np.asarray(js, dtype=float))
    if r == math.inf:
        return np.max(v, axis=-1)
    return np.sum(v**r, axis=-1) ** (1.0 / r)


def outside_fraction(f: GridFunction, family: LPFamily) -> float:
    """Share of the L^2 mass of ``f`` outside the covered annulus."""
    F = forward_array(f.samples, f.grid)
    lo, hi = 2.0 ** (family.j_min + 1), 2.0 ** (family.j_max + 2)
    rho = f.grid.freq_radius
    out = (rho < lo) | (rho > hi)
    tot = np.sum(np.abs(F) ** 2)
    return float(np.sqrt(np.sum(np.abs(F[out]) ** 2) / tot)) if tot > 0 else 0.0


def besov_norm(f: GridFunction, params: BesovParams, family: LPFamily) -> float:
    frac = outside_fraction(f, family)
    if frac > 1e-8:
        warnings.warn(f"{frac:.2e} of the L2 mass lies outside the covered annulus", stacklevel=2)
    b = block_norms(f, family, params.spec)
    return float(aggregate(b, family.js, params.s, params.r))


def lift(f: GridFunction, alpha: float) -> GridFunction:
    """``(-Delta)^alpha f`` via ``|xi|^{2 alpha}`` (zero at the origin)."""
    rho2 = f.grid.freq_norm_sq
    with np.errstate(divide="ignore"):
        m = np.where(rho2 > 0, rho2 ** alpha, 0.0)
    return fourier_multiplier(GridFunction(f.grid, m, FREQUENCY), f)


def lift_check(f: GridFunction, alpha: float, params: BesovParams,
               family: LPFamily) -> tuple[float, float]:
    """``(||(-Delta)^alpha f||_{B^{s-2alpha}_{X,r}}, ||f||_{B^s_{X,r}})``."""
    if not -2 <= alpha <= 2:
        raise ValueError("alpha must lie in [-2, 2]")
    frac = outside_fraction(f, family)
    if frac > 1e-8:
        raise ValueError(f"input not band-limited to the covered annulus ({frac:.2e} outside)")
    lifted = BesovParams(params.s - 2 * alpha, params.r, params.spec)
    return besov_norm(lift(f, alpha), lifted, family), besov_norm(f, params, family)
