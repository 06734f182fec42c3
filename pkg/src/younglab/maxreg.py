"""Heat-equation Duhamel solver and the maximal-regularity experiments.

The forcing ``f`` is piecewise constant in time on the cells of a
:class:`TimeGrid`; per Fourier mode with ``lam = |xi|^2`` the solution of
``u' = -lam u + f`` is then advanced exactly across a cell of width ``w``:

    u(t + w) = exp(-lam w) u(t) + w * phi1(lam w) * f,   phi1(z) = (1 - e^{-z}) / z.

Time norms are midpoint-rule step functions: every field is evaluated at the
cell midpoints and weighted by the cell widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import LPFamily, aggregate, block_norms, block_norms_spectra
from .grid import Grid, GridFunction, forward_array, inverse_array
from .operators import HalfLineFunction, TimeGrid, hl_maximal_halfline
from .spaces import SpaceSpec, lorentz_step_norm

INF = math.inf


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """One frame per time cell.  ``at`` says where the frames are sampled:
    ``"mid"`` (cell midpoints, also the value of a piecewise-constant forcing)
    or ``"end"`` (the grid times ``t_i``)."""

    grid: Grid
    timegrid: TimeGrid
    frames: np.ndarray
    at: str = "mid"

    def __post_init__(self):
        arr = np.asarray(self.frames)
        if arr.shape != (len(self.timegrid),) + self.grid.shape:
            raise ValueError(f"frames shape {arr.shape} does not match "
                             f"{len(self.timegrid)} cells x {self.grid.shape}")
        if self.at not in ("mid", "end"):
            raise ValueError("at must be 'mid' or 'end'")
        object.__setattr__(self, "frames", arr)

    @property
    def sample_times(self) -> np.ndarray:
        return self.timegrid.midpoints if self.at == "mid" else self.timegrid.times

    def frame(self, i: int) -> GridFunction:
        return GridFunction(self.grid, self.frames[i])

    @classmethod
    def zeros(cls, grid: Grid, timegrid: TimeGrid) -> "SpaceTimeField":
        return cls(grid, timegrid, np.zeros((len(timegrid),) + grid.shape))

    @classmethod
    def from_profile(cls, grid: Grid, timegrid: TimeGrid, profiles, shapes) -> "SpaceTimeField":
        """``f(t, x) = sum_b profiles[b](t) * shapes[b](x)`` sampled at cell midpoints."""
        tm = timegrid.midpoints
        frames = np.zeros((len(timegrid),) + grid.shape, dtype=np.result_type(*[s.samples for s in shapes]))
        for prof, shp in zip(profiles, shapes):
            frames = frames + np.multiply.outer(prof(tm), shp.samples)
        return cls(grid, timegrid, frames)


def _phi1(z):
    z = np.asarray(z, dtype=float)
    small = z < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z / 2, -np.expm1(-zs) / zs)


def _check_pair(u0: GridFunction, f: SpaceTimeField):
    if u0.grid != f.grid:
        raise ValueError("u0 and f live on different grids")
    if len(f.timegrid) == 0:
        raise ValueError("empty time grid")


def duhamel_spectra(U0: np.ndarray, F: np.ndarray, timegrid: TimeGrid, lam: np.ndarray):
    """Exact per-mode integration; returns spectra at cell ends and midpoints."""
    w = timegrid.weights
    ends = np.empty(F.shape, dtype=complex)
    mids = np.empty(F.shape, dtype=complex)
    u = np.asarray(U0, dtype=complex)
    for i, wi in enumerate(w):
        half = 0.5 * wi
        mids[i] = np.exp(-lam * half) * u + half * _phi1(lam * half) * F[i]
        u = np.exp(-lam * wi) * u + wi * _phi1(lam * wi) * F[i]
        ends[i] = u
    return ends, mids


def duhamel_solve(u0: GridFunction, f: SpaceTimeField, at: str = "mid"):
    """Solve ``u_t - Delta u = f``, ``u(0) = u0`` for piecewise-constant ``f``.

    Returns ``(u, dt_u, lap_u)`` sampled at the cell midpoints (``at="mid"``)
    or at the grid times (``at="end"``, where ``dt_u`` is the left limit).
    ``dt_u = lap_u + f`` holds exactly in the spectral representation.
    """
    _check_pair(u0, f)
    grid, tg = u0.grid, f.timegrid
    lam = grid.freq_norm_sq
    F = forward_array(f.frames, grid)
    ends, mids = duhamel_spectra(forward_array(u0.samples, grid), F, tg, lam)
    U = mids if at == "mid" else ends
    L = -lam * U
    D = L + F
    out = [SpaceTimeField(grid, tg, inverse_array(a, grid), at) for a in (U, D, L)]
    return tuple(out)


def fd_residual(u0: GridFunction, f: SpaceTimeField) -> tuple[float, float]:
    """Finite-difference check of the solver.

    Returns ``(max_k r_k, max_k r_k / max_k ||f_k||_2)`` with
    ``r_k = ||(u(t_k) - u(t_{k-1})) / w_k - (Delta u + f)(midpoint_k)||_2``.
    """
    _check_pair(u0, f)
    grid, tg = u0.grid, f.timegrid
    lam = grid.freq_norm_sq
    U0 = forward_array(u0.samples, grid)
    F = forward_array(f.frames, grid)
    ends, mids = duhamel_spectra(U0, F, tg, lam)
    prev = np.concatenate([U0[None], ends[:-1]])
    w = tg.weights.reshape((-1,) + (1,) * grid.dim)
    diff = (ends - prev) / w - (-lam * mids + F)
    dxi = grid.freq_spacing**grid.dim
    res = np.sqrt(dxi * np.sum(np.abs(diff) ** 2, axis=grid.axes))
    fnorm = np.sqrt(dxi * np.sum(np.abs(F) ** 2, axis=grid.axes)).max()
    r = float(res.max())
    return r, (r / fnorm if fnorm > 0 else math.inf)


# --------------------------------------------------------------------------
# time norms


def time_lorentz_norm(values, weights, rho: float, w: float) -> float:
    """``L^{rho,w}`` norm of a step series via its decreasing rearrangement."""
    if not 1 <= w <= INF:
        raise ValueError(f"w must lie in [1, inf], got {w}")
    if not (1 < rho < INF or (w == rho and 1 <= rho <= INF)):
        raise ValueError(f"invalid Lorentz indices rho={rho}, w={w}")
    return float(lorentz_step_norm(values, weights, rho, w))


def time_lebesgue_norm(values, weights, rho: float) -> float:
    """Plain weighted ``L^rho`` quadrature (no rearrangement)."""
    v = np.abs(np.asarray(values, dtype=float))
    if rho == INF:
        return float(v.max())
    return float(np.sum(np.asarray(weights) * v**rho) ** (1.0 / rho))


# --------------------------------------------------------------------------
# maximal regularity ratios


@dataclass
class RegularityBlocks:
    """Block norms ``||phi_j(D) .||_X`` of every field, shape ``(cells, nj)``."""

    js: np.ndarray
    weights: np.ndarray
    dt_u: np.ndarray
    lap_u: np.ndarray
    f: np.ndarray
    u0: np.ndarray
    residual: float
    spec: SpaceSpec


def regularity_blocks(u0: GridFunction, f: SpaceTimeField, spec: SpaceSpec,
                      family: LPFamily) -> RegularityBlocks:
    _check_pair(u0, f)
    grid, tg = u0.grid, f.timegrid
    lam = grid.freq_norm_sq
    U0 = forward_array(u0.samples, grid)
    F = forward_array(f.frames, grid)
    _, mids = duhamel_spectra(U0, F, tg, lam)
    L = -lam * mids
    D = L + F
    spectral = float(np.max(np.abs(D - L - F))) if D.size else 0.0
    return RegularityBlocks(
        js=family.js, weights=tg.weights,
        dt_u=block_norms_spectra(D, family, spec),
        lap_u=block_norms_spectra(L, family, spec),
        f=block_norms_spectra(F, family, spec),
        u0=block_norms(u0, family, spec),
        residual=spectral, spec=spec)


@dataclass
class RegularityReport:
    rho: float
    w: float
    sigma: float
    spec: SpaceSpec
    s: float
    dt_norm: float
    lap_norm: float
    u0_norm: float
    f_norm: float
    ratio: float
    residual: float
    notes: dict = field(default_factory=dict)

    @property
    def lhs(self) -> float:
        return self.dt_norm + self.lap_norm

    @property
    def rhs(self) -> float:
        return self.u0_norm + self.f_norm


def initial_smoothness(rho: float) -> float:
    return 2.0 if rho == INF else 2.0 - 2.0 / rho


def _ratio(b: RegularityBlocks, rho, w, sigma, time_norm) -> RegularityReport:
    s = initial_smoothness(rho)
    series = {k: aggregate(getattr(b, k), b.js, 0.0, sigma) for k in ("dt_u", "lap_u", "f")}
    dt = time_norm(series["dt_u"])
    lap = time_norm(series["lap_u"])
    fn = time_norm(series["f"])
    un = float(aggregate(b.u0, b.js, s, w))
    rhs = un + fn
    if rhs == 0:
        raise ZeroDivisionError("zero data: both u0 and f vanish in the chosen norms")
    return RegularityReport(rho, w, sigma, b.spec, s, dt, lap, un, fn, (dt + lap) / rhs, b.residual)


def maxreg_ratio(u0: GridFunction, f: SpaceTimeField, rho: float, w: float, sigma: float,
                 spec: SpaceSpec, family: LPFamily,
                 blocks: RegularityBlocks | None = None) -> RegularityReport:
    """``(||u_t|| + ||Delta u||) / (||u0||_{B^{2-2/rho}_{X,w}} + ||f||)`` in ``L^{rho,w}(B^0_{X,sigma})``.

    ``w = rho`` is the plain ``L^rho`` case.  Pass precomputed ``blocks`` to
    sweep indices without re-solving.
    """
    b = blocks if blocks is not None else regularity_blocks(u0, f, spec, family)
    return _ratio(b, rho, w, sigma, lambda v: time_lorentz_norm(v, b.weights, rho, w))


def maxreg_ratio_lebesgue(u0: GridFunction, f: SpaceTimeField, rho: float, sigma: float,
                          spec: SpaceSpec, family: LPFamily,
                          blocks: RegularityBlocks | None = None) -> RegularityReport:
    """The ``L^rho``-in-time ratio by direct quadrature (no rearrangement)."""
    b = blocks if blocks is not None else regularity_blocks(u0, f, spec, family)
    return _ratio(b, rho, rho, sigma, lambda v: time_lebesgue_norm(v, b.weights, rho))


def linear_term_check(u0: GridFunction, tau: float, spec: SpaceSpec, family: LPFamily,
                      timegrid: TimeGrid | None = None,
                      blocks: RegularityBlocks | None = None) -> tuple[float, float]:
    """``(||Delta e^{t Delta} u0||_{L^tau(B^0_{X,1})}, ||u0||_{B^{2-2/tau}_{X,tau}})``.

    For ``tau = inf`` the right side is ``||u0||_{B^2_{X,1}}`` and the left a
    maximum over the sampled times.
    """
    if not 1 <= tau <= INF:
        raise ValueError("tau must lie in [1, inf]")
    if blocks is None:
        tg = timegrid if timegrid is not None else TimeGrid.geometric()
        blocks = regularity_blocks(u0, SpaceTimeField.zeros(u0.grid, tg), spec, family)
    series = aggregate(blocks.lap_u, blocks.js, 0.0, 1.0)
    lhs = time_lebesgue_norm(series, blocks.weights, tau)
    r = 1.0 if tau == INF else tau
    rhs = float(aggregate(blocks.u0, blocks.js, initial_smoothness(tau), r))
    return lhs, rhs


# --------------------------------------------------------------------------
# kernel decay and the scalar lemmas


def kernel_decay_ratio(family: LPFamily, j: int, t: float) -> float:
    """``||F^{-1}[Phi_j e^{-t|xi|^2}]||_1 / e^{-4^j t}``, computed without underflow."""
    if t <= 0:
        raise ValueError("t must be positive")
    grid = family.grid
    Ph = family.Phi[family.index(j)]
    expo = np.where(Ph > 0, -t * (grid.freq_norm_sq - 4.0**j), -np.inf)
    kern = inverse_array(Ph * np.exp(expo), grid)
    return float(np.sum(np.abs(kern)) * grid.cell_volume)


def kernel_decay_check(family: LPFamily, j: int, t: float) -> tuple[float, float]:
    """``(measured L^1 norm, e^{-4^j t})``; both may underflow for large ``4^j t``."""
    bound = math.exp(-(4.0**j) * t)
    return kernel_decay_ratio(family, j, t) * bound, bound


def exp_tail_integral(lam: float, g: HalfLineFunction, i: int) -> float:
    """``int_{t_i}^T lam e^{-lam (t - t_i)} g(t) dt``, exact for the step ``g``."""
    e = g.timegrid.edges
    s = e[i + 1]
    a, b = e[i + 1:-1], e[i + 2:]
    w = np.exp(-lam * (a - s)) - np.exp(-lam * (b - s))
    return float(np.sum(g.values[i + 1:] * w))


def duality_exp_check(j: int, g: HalfLineFunction, s: float,
                      maximal: HalfLineFunction | None = None) -> tuple[float, float]:
    """``(int_s^inf 4^j e^{-4^j(t-s)} g(t) dt, Mg(s))`` at a grid time ``s``."""
    i = g.timegrid.index_of(s)
    m = maximal if maximal is not None else hl_maximal_halfline(g)
    return exp_tail_integral(4.0**j, g, i), float(m.values[i])


def fs_vector_check(fs, rho: float, sigma: float) -> tuple[float, float]:
    """Both sides of the vector-valued maximal inequality (as integrals, no root)."""
    if not 1 < rho < INF:
        raise ValueError("rho must lie in (1, inf)")
    if not 1 < sigma <= INF:
        raise ValueError("sigma must lie in (1, inf]")
    fs = list(fs)
    tg = fs[0].timegrid
    if any(f.timegrid is not tg and not np.array_equal(f.times, tg.times) for f in fs):
        raise ValueError("all functions must share one time grid")
    vals = np.stack([f.values for f in fs])
    maxs = np.stack([hl_maximal_halfline(f).values for f in fs])

    def integral(a):
        inner = a.max(axis=0) if sigma == INF else np.sum(a**sigma, axis=0) ** (1.0 / sigma)
        return float(np.sum(tg.weights * inner**rho))

    return integral(maxs), integral(vals)


def rho1_fubini_check(f: SpaceTimeField, spec: SpaceSpec, family: LPFamily,
                      blocks: RegularityBlocks | None = None) -> tuple[float, float]:
    """``(||Delta int_0^t e^{(t-s)Delta} f ds||_{L^1(B^0_{X,1})}, ||f||_{L^1(B^0_{X,1})})``."""
    if blocks is None:
        blocks = regularity_blocks(GridFunction(f.grid, np.zeros(f.grid.shape)), f, spec, family)
    lhs = float(np.sum(blocks.weights * blocks.lap_u.sum(axis=1)))
    rhs = float(np.sum(blocks.weights * blocks.f.sum(axis=1)))
    return lhs, rhs


def fubini_tails(timegrid: TimeGrid, js) -> tuple[np.ndarray, np.ndarray]:
    """Tail integrals ``int_s^T 4^j e^{-4^j(t-s)} dt`` for every band and cell edge ``s``.

    Returns ``(summed, closed)``: cell-by-cell sums and ``1 - e^{-4^j (T - s)}``.
    """
    e = timegrid.edges
    T = e[-1]
    summed, closed = [], []
    for j in js:
        lam = 4.0 ** float(j)
        s = e[:-1, None]
        a, b = e[None, :-1], e[None, 1:]
        cell = np.where(a >= s, np.exp(-lam * np.clip(a - s, 0, None)) - np.exp(-lam * np.clip(b - s, 0, None)), 0.0)
        summed.append(cell.sum(axis=1))
        closed.append(-np.expm1(-lam * (T - e[:-1])))
    return np.array(summed), np.array(closed)


def fubini_majorant(fblocks: np.ndarray, timegrid: TimeGrid, js) -> float:
    """``sum_j int_0^T int_0^t 4^j e^{-4^j(t-s)} b_j(s) ds dt`` for step ``b_j``."""
    e = timegrid.edges
    T = e[-1]
    total = 0.0
    for k, j in enumerate(js):
        lam = 4.0 ** float(j)
        inner = timegrid.weights - (np.exp(-lam * (T - e[1:])) - np.exp(-lam * (T - e[:-1]))) / lam
        total += float(np.sum(fblocks[:, k] * inner))
    return total


def kernel_resolved(grid: Grid, j: int, t: float) -> bool:
    """Whether the grid resolves ``Phi_j e^{-t|xi|^2}`` well enough for scaling studies.

    Requires at least four frequency samples across the rise of ``Phi_j``,
    at least 2.5 across the decay width ``1 / (2^{j+1} t)`` at its lower
    edge, and a spatial scale ``sqrt(t)`` of at least one cell.
    """
    dxi = grid.freq_spacing
    rise = 0.5 * 2.0**j / dxi
    edge = 1.0 / (2.0 ** (j + 1) * t * dxi)
    return rise >= 4 and edge >= 2.5 and math.sqrt(t) >= grid.spacing
