"""Seeded random inputs for the sweeps.

Band-limited fields draw their Fourier coefficients on the integer wavenumber
lattice in a fixed order that does not depend on ``N``, so refining a grid
(same ``L``, larger ``N``) resamples the same continuum function.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import FREQUENCY, Grid, GridFunction, fft_inverse, sample
from .maxreg import SpaceTimeField
from .operators import HalfLineFunction, TimeGrid


def annulus_wavenumbers(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """Integer wavenumbers ``k`` with ``lo <= |k| dxi <= hi`` in a half space.

    One representative of each ``{k, -k}`` pair, lexicographic order, shape
    ``(m, dim)``.
    """
    dxi = grid.freq_spacing
    K = int(math.floor(hi / dxi))
    if K >= grid.n // 2:
        raise ValueError(f"band up to {hi} exceeds the Nyquist frequency {grid.nyquist:g}")
    rng1 = np.arange(-K, K + 1)
    ks = np.stack(np.meshgrid(*([rng1] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim)
    r = np.linalg.norm(ks, axis=1) * dxi
    first_nz = np.array([next((v for v in k if v != 0), 0) for k in ks])
    keep = (r >= lo) & (r <= hi) & (first_nz > 0)
    return ks[keep]


def band_limited_field(grid: Grid, rng: np.random.Generator, lo: float, hi: float,
                       slope: float = 0.0, normalize: bool = True) -> GridFunction:
    """Real Gaussian field with spectrum on ``lo <= |xi| <= hi``.

    Coefficients are independent complex normals times ``|xi|^slope``; the
    result is scaled to unit L2 norm when ``normalize`` is set.
    """
    ks = annulus_wavenumbers(grid, lo, hi)
    if len(ks) == 0:
        raise ValueError(f"no lattice frequencies in [{lo}, {hi}]")
    z = rng.standard_normal((len(ks), 2))
    amp = (np.linalg.norm(ks, axis=1) * grid.freq_spacing) ** slope
    c = (z[:, 0] + 1j * z[:, 1]) * amp
    F = np.zeros(grid.shape, dtype=complex)
    pos = tuple((ks % grid.n).T)
    neg = tuple((-ks % grid.n).T)
    F[pos] = c
    F[neg] = np.conj(c)
    f = fft_inverse(GridFunction(grid, F, FREQUENCY)).real
    if normalize:
        f = f * (1.0 / f.l2_norm())
    return f


def nonnegative_field(grid: Grid, rng: np.random.Generator, lo: float, hi: float,
                      slope: float = 0.0) -> GridFunction:
    return abs(band_limited_field(grid, rng, lo, hi, slope))


def smooth_bump(grid: Grid, center=0.0, radius: float = 1.0) -> GridFunction:
    """``exp(1 - 1/(1 - |x - c|^2/r^2))`` inside the ball, 0 outside."""
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))

    def fn(*xs):
        r2 = sum((x - ci) ** 2 for x, ci in zip(xs, c)) / radius**2
        inside = r2 < 1
        safe = np.where(inside, r2, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)

    return sample(fn, grid)


def band_profile(u):
    """Smooth bump on ``(2, 4)``, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    v = u - 3.0
    inside = np.abs(v) < 1
    safe = np.where(inside, v, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)


def single_band(grid: Grid, j0: int) -> GridFunction:
    """Real radial function with spectrum ``band_profile(2^{-j0} |xi|)``."""
    F = band_profile(grid.freq_radius * 2.0 ** (-j0))
    return fft_inverse(GridFunction(grid, F.astype(complex), FREQUENCY)).real


def time_pulse(center: float, width: float = 0.5):
    """Log-normal shaped bump in time, ``exp(-log(t/center)^2 / (2 width^2))``."""
    def prof(t):
        return np.exp(-np.log(np.asarray(t) / center) ** 2 / (2 * width**2))
    return prof


def random_forcing(grid: Grid, timegrid: TimeGrid, rng: np.random.Generator, lo: float,
                   hi: float, components: int = 2, centers=(0.05, 4.0)) -> SpaceTimeField:
    """Sum of time pulses times band-limited fields, sampled at cell midpoints."""
    shapes, profiles = [], []
    for _ in range(components):
        shapes.append(band_limited_field(grid, rng, lo, hi))
        c = math.exp(rng.uniform(math.log(centers[0]), math.log(centers[1])))
        profiles.append(time_pulse(c, rng.uniform(0.3, 1.0)))
    return SpaceTimeField.from_profile(grid, timegrid, profiles, shapes)


def random_step(timegrid: TimeGrid, rng: np.random.Generator) -> HalfLineFunction:
    """Non-negative step function of one of three shapes (noise, blocks, spikes)."""
    n = len(timegrid)
    kind = rng.integers(3)
    if kind == 0:
        v = np.abs(rng.standard_normal(n))
    elif kind == 1:
        v = np.zeros(n)
        for _ in range(rng.integers(1, 5)):
            a = rng.integers(n)
            b = min(n, a + rng.integers(1, max(2, n // 4)))
            v[a:b] += rng.exponential()
    else:
        v = np.zeros(n)
        idx = rng.choice(n, size=rng.integers(1, 6), replace=False)
        v[idx] = rng.exponential(size=len(idx)) + 0.1
    if not v.any():
        v[rng.integers(n)] = 1.0
    return HalfLineFunction(timegrid, v)
