"""Translations, convolution, maximal operators, Fourier multipliers, heat flow.

Also the two directions of the Young-inequality experiment: the ratio
``||f*g||_X / (||f||_X ||g||_1)`` and the box-mollifier reconstruction of a
translate, ``f * g_k -> f(. - z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage

from .grid import FREQUENCY, SPACE, Grid, GridFunction, fft_forward, fft_inverse
from .report import ExperimentReport
from .spaces import SpaceSpec, ball_family, ball_sums, x_norm

EXP_KERNEL_CONSTANT = 1.0 + math.exp(-1.0)


# --------------------------------------------------------------------------
# translation and convolution


def translate(f: GridFunction, z) -> GridFunction:
    """``f(. - z)`` on the torus.

    ``z`` is rounded to the nearest lattice vector; the shift in cells and the
    rounding residual are kept in ``meta``.
    """
    grid = f.grid
    z = np.broadcast_to(np.asarray(z, dtype=float), (grid.dim,))
    cells = np.rint(z / grid.spacing).astype(int)
    residual = z - cells * grid.spacing
    out = np.roll(f.samples, tuple(int(c) for c in cells), axis=grid.axes)
    meta = {"shift_cells": tuple(int(c) for c in cells),
            "rounding": tuple(float(r) for r in residual)}
    return GridFunction(grid, out, f.domain, meta)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """``(f*g)(x) = int f(x - y) g(y) dy`` on the torus via the convolution theorem."""
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    grid = f.grid
    prod = (2.0 * math.pi) ** (grid.dim / 2) * fft_forward(f).samples * fft_forward(g).samples
    out = fft_inverse(GridFunction(grid, prod, FREQUENCY)).samples
    if not (np.iscomplexobj(f.samples) or np.iscomplexobj(g.samples)):
        out = out.real
    return GridFunction(grid, out)


def direct_convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Brute-force ``sum_j f(x - y_j) g(y_j) h^dim``; O(N^2) in 1D, for checking."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    grid = f.grid
    out = np.zeros(grid.shape, dtype=np.result_type(f.samples, g.samples))
    origin = grid.n // 2
    for idx in np.ndindex(*grid.shape):
        gv = g.samples[idx]
        if gv == 0:
            continue
        # y_j sits (idx - origin) cells from the origin
        shift = tuple(int(i - origin) for i in idx)
        out = out + gv * np.roll(f.samples, shift, axis=grid.axes)
    return GridFunction(grid, out * grid.cell_volume)


def l1_norm(g: GridFunction) -> float:
    return float(np.sum(np.abs(g.samples)) * g.grid.cell_volume)


def young_ratio(f: GridFunction, g: GridFunction, spec: SpaceSpec) -> float:
    nf = x_norm(f, spec)
    ng = l1_norm(g)
    if nf == 0 or ng == 0:
        raise ZeroDivisionError("young_ratio needs ||f||_X > 0 and ||g||_1 > 0")
    return x_norm(convolve(f, g), spec) / (nf * ng)


def delta(grid: Grid) -> GridFunction:
    """Unit-mass single-cell spike at the origin (discrete identity for convolve)."""
    out = np.zeros(grid.shape)
    out[grid.origin_index()] = 1.0 / grid.cell_volume
    return GridFunction(grid, out)


def make_box_mollifier(k: int, z, grid: Grid) -> GridFunction:
    """``k^n chi_{[0,1)^n}(k(. - z))`` sampled and renormalised to unit mass."""
    if k <= 0:
        raise ValueError("k must be a positive integer")
    width = 1.0 / k
    if width < grid.spacing * (1 - 1e-12):
        raise ValueError(
            f"box of width 1/{k} is thinner than one cell (h = {grid.spacing:g}); "
            f"use N >= {int(2 ** math.ceil(math.log2(2 * grid.half_width * k)))}")
    cells = int(math.ceil(width / grid.spacing - 1e-9))
    z = np.broadcast_to(np.asarray(z, dtype=float), (grid.dim,))
    start = np.rint(z / grid.spacing).astype(int) + grid.n // 2
    out = np.zeros(grid.shape)
    idx = tuple(np.arange(s, s + cells) % grid.n for s in start)
    out[np.ix_(*idx)] = 1.0
    out /= out.sum() * grid.cell_volume
    return GridFunction(grid, out, meta={"cells": cells})


def converse_young_check(f: GridFunction, z, spec: SpaceSpec, ks,
                         tol: float = 1e-2) -> ExperimentReport:
    """Recover ``||f(. - z)||_X`` from the averages ``f * g_k``.

    One row per ``k`` with ``lhs = ||f(. - z)||_X``, ``rhs = ||f * g_k||_X``
    and ``ratio = lhs / rhs``.  Row ``k`` passes when ``|ratio - 1|`` has not
    grown since the previous ``k``; the last row must also be within ``tol``.
    ``distance`` records ``||f * g_k - f(. - z)||_X``.
    """
    ks = list(ks)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("ks must be increasing")
    rep = ExperimentReport("converse-young")
    target = translate(f, z)
    nt = x_norm(target, spec)
    prev = math.inf
    for i, k in enumerate(ks):
        avg = convolve(f, make_box_mollifier(k, z, f.grid))
        na = x_norm(avg, spec)
        ratio = nt / na
        dev = abs(ratio - 1.0)
        ok = dev <= prev + 1e-12
        if i == len(ks) - 1:
            ok = ok and dev <= tol
        dist = x_norm(avg - target, spec)
        rep.add({"space": repr(spec), "k": k, "distance": dist}, nt, na, "converse-young",
                passed=ok, ratio=ratio)
        prev = dev
    return rep


# --------------------------------------------------------------------------
# half-line functions and the one-dimensional maximal operator


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Cells ``(t_{i-1}, t_i]`` with ``t_0 = 0`` and ``t_n = T``."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid needs at least one cell")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be positive and strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def geometric(cls, T: float = 64.0, cells: int = 512, first: float = 1e-5) -> "TimeGrid":
        if cells < 1:
            raise ValueError("time grid needs at least one cell")
        if cells == 1:
            return cls(np.array([T]))
        if not 0 < first < T:
            raise ValueError("need 0 < first < T")
        t = first * (T / first) ** (np.arange(cells) / (cells - 1))
        t[-1] = T
        return cls(t)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.concatenate([[0.0], self.times])

    @cached_property
    def weights(self) -> np.ndarray:
        return np.diff(self.edges)

    @cached_property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __len__(self):
        return len(self.times)

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[i], t, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(f"{t} is not a grid time")
        return i

    def refined(self) -> "TimeGrid":
        """Twice as many cells between the same first time and ``T``."""
        n = len(self)
        return TimeGrid.geometric(self.T, 2 * n, float(self.times[0])) if n > 1 else self


@dataclass(frozen=True, eq=False)
class HalfLineFunction:
    """Non-negative step function on ``(0, T]``, zero beyond ``T``.

    ``values[i]`` is the value on the cell ``(t_{i-1}, t_i]``.
    """

    timegrid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.timegrid.times.shape:
            raise ValueError("one value per cell expected")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.timegrid.times

    @property
    def weights(self) -> np.ndarray:
        return self.timegrid.weights


def maximal_at_edges(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Exact Hardy-Littlewood maximal function of a step function at the cell edges.

    For a step function the average over ``(a, b)`` is monotone in each
    endpoint while it stays inside one cell, so the supremum over
    ``a < t < b`` is attained (as a limit) with ``a`` and ``b`` on cell edges
    and ``a <= t <= b``.  All ``(a, b)`` edge pairs are enumerated:
    ``out[i] = max_{a <= i <= b, a < b} avg(edges[a], edges[b])``.
    """
    C = np.concatenate([[0.0], np.cumsum(values * np.diff(edges))])
    n1 = len(edges)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = (C[None, :] - C[:, None]) / (edges[None, :] - edges[:, None])
    A[np.tril_indices(n1)] = -np.inf
    # suffix max over b >= i, then prefix max over a <= i
    R = np.maximum.accumulate(A[:, ::-1], axis=1)[:, ::-1]
    R = np.maximum.accumulate(R, axis=0)
    return np.diagonal(R).copy()


def hl_maximal_halfline(f: HalfLineFunction) -> HalfLineFunction:
    """``Mf`` at every grid time ``t_i`` (brute force over all edge intervals)."""
    m = maximal_at_edges(f.values, f.timegrid.edges)
    return HalfLineFunction(f.timegrid, m[1:])


def exp_kernel_integral(a: float, f: HalfLineFunction, i: int) -> float:
    """``int_0^{t_i} a e^{-a(t_i - s)} f(s) ds``, exact for the step function."""
    e = f.timegrid.edges[: i + 2]
    t = e[-1]
    w = np.exp(-a * (t - e[1:])) - np.exp(-a * (t - e[:-1]))
    return float(np.sum(f.values[: i + 1] * w))


def exp_kernel_bound_check(a: float, f: HalfLineFunction, t: float,
                           maximal: HalfLineFunction | None = None) -> tuple[float, float]:
    """``(int_0^t a e^{-a(t-s)} f ds, (1 + 1/e) Mf(t))`` at a grid time ``t``."""
    if a <= 0:
        raise ValueError("a must be positive")
    i = f.timegrid.index_of(t)
    m = maximal if maximal is not None else hl_maximal_halfline(f)
    return exp_kernel_integral(a, f, i), EXP_KERNEL_CONSTANT * float(m.values[i])


# --------------------------------------------------------------------------
# maximal operator on the grid


def hl_maximal_grid(f: GridFunction, stride: int = 1) -> GridFunction:
    """Sup of ``|f|``-averages over the family balls that contain each node.

    Uses the Morrey ball family: for every radius the ball averages at all
    centres are max-filtered over the ball footprint (a centre ``c`` reaches
    ``x`` iff ``|x - c| < r``).
    """
    grid = f.grid
    fam = ball_family(grid, stride)
    sums = ball_sums(np.abs(f.samples), fam)
    best = np.zeros(grid.shape)
    for i, s in enumerate(sums):
        avg = s / fam.measure(i)
        if stride > 1:
            mask = np.zeros(grid.shape, dtype=bool)
            mask[(slice(None, None, stride),) * grid.dim] = True
            avg = np.where(mask, avg, 0.0)
        if grid.dim == 1:
            filt = ndimage.maximum_filter1d(avg, size=2 * fam.radii[i] - 1, mode="wrap")
        else:
            filt = ndimage.maximum_filter(avg, footprint=fam.footprints[i], mode="wrap")
        best = np.maximum(best, filt)
    return GridFunction(grid, best)


# --------------------------------------------------------------------------
# Fourier multipliers


def symbol(grid: Grid, fn) -> GridFunction:
    """Sample ``fn(|xi|)`` on the frequency grid."""
    return GridFunction(grid, fn(grid.freq_radius), FREQUENCY)


def fourier_multiplier(sym: GridFunction, f: GridFunction) -> GridFunction:
    """``psi(D) f = F^{-1}[psi F f]``."""
    if sym.domain != FREQUENCY:
        raise ValueError("symbol must live on the frequency grid")
    if sym.grid != f.grid:
        raise ValueError(f"grid mismatch: symbol on {sym.grid}, function on {f.grid}")
    return fft_inverse(GridFunction(f.grid, sym.samples * fft_forward(f).samples, FREQUENCY))


def heat_semigroup(f: GridFunction, t: float) -> GridFunction:
    if t < 0:
        raise ValueError("heat semigroup needs t >= 0")
    if t == 0:
        return GridFunction(f.grid, f.samples, SPACE)
    return fourier_multiplier(GridFunction(f.grid, np.exp(-t * f.grid.freq_norm_sq), FREQUENCY), f)
