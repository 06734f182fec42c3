"""Norms of the concrete function spaces: Lebesgue, Lorentz and Morrey.

Every norm works on batched arrays (grid axes last) through
:func:`norm_array`; :func:`x_norm` is the single-function entry point.

The Morrey supremum runs over a finite family of discrete balls
``B(c, r) = {x : |x - c| < r}`` with ``r = 2**k * h`` for
``0 <= k <= log2(N/4)``.  By default every node is a centre, which keeps the
family closed under grid shifts (the norm is then exactly shift invariant);
``stride > 1`` coarsens the centres.  Ball measures are cell counts times
``h**dim``, so indicators of discrete balls have exact norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Grid, GridFunction
from .report import ExperimentReport

INF = math.inf


@dataclass(frozen=True)
class Lebesgue:
    p: float

    def __post_init__(self):
        if not 1 <= self.p <= INF:
            raise ValueError(f"Lebesgue exponent must lie in [1, inf], got {self.p}")


@dataclass(frozen=True)
class Lorentz:
    """``L^{p,q}``.  A norm (not just a quasi-norm) when ``q <= p``."""

    p: float
    q: float

    def __post_init__(self):
        if not 1 < self.p < INF:
            raise ValueError(f"Lorentz p must lie in (1, inf), got {self.p}")
        if not 1 <= self.q <= INF:
            raise ValueError(f"Lorentz q must lie in [1, inf], got {self.q}")


@dataclass(frozen=True)
class Morrey:
    """``M^p_q`` with ``1 <= q <= p < inf``: sup over balls of ``|B|^(1/p-1/q) ||f||_{L^q(B)}``."""

    p: float
    q: float

    def __post_init__(self):
        if not (1 <= self.q <= self.p < INF):
            raise ValueError(f"Morrey needs 1 <= q <= p < inf, got p={self.p}, q={self.q}")


SpaceSpec = Lebesgue | Lorentz | Morrey

_KINDS = {"lebesgue": Lebesgue, "lorentz": Lorentz, "morrey": Morrey}


def space_from_dict(d: dict) -> SpaceSpec:
    """Build a spec from ``{"kind": "lorentz", "p": 2, "q": 1}``-style dicts."""
    kind = str(d.get("kind", "")).lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown space kind {d.get('kind')!r}; expected one of {sorted(_KINDS)}")
    args = {k: float(v) for k, v in d.items() if k != "kind"}
    return _KINDS[kind](**args)


def space_to_dict(spec: SpaceSpec) -> dict:
    kind = {Lebesgue: "lebesgue", Lorentz: "lorentz", Morrey: "morrey"}[type(spec)]
    return {"kind": kind, **{k: v for k, v in vars(spec).items()}}


def dual_exponent(p: float) -> float:
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


# --------------------------------------------------------------------------
# ball family


@dataclass(frozen=True, eq=False)
class BallFamily:
    grid: Grid
    radii: tuple[int, ...]  # in cells
    stride: int
    counts: tuple[int, ...]
    kernels_hat: tuple[np.ndarray, ...]  # rfftn of the ball indicators
    footprints: tuple[np.ndarray, ...]

    def measure(self, i: int) -> float:
        return self.counts[i] * self.grid.cell_volume

    def radius(self, i: int) -> float:
        return self.radii[i] * self.grid.spacing


def _footprint(r: int, dim: int) -> np.ndarray:
    m = np.arange(-(r - 1), r)
    if dim == 1:
        return np.ones(len(m), dtype=bool)
    a, b = np.meshgrid(m, m, indexing="ij")
    return a * a + b * b < r * r


@lru_cache(maxsize=32)
def ball_family(grid: Grid, stride: int = 1) -> BallFamily:
    kmax = int(round(math.log2(grid.n // 4))) if grid.n >= 4 else 0
    radii = tuple(2**k for k in range(kmax + 1))
    kernels, counts, fps = [], [], []
    for r in radii:
        fp = _footprint(r, grid.dim)
        kern = np.zeros(grid.shape)
        offs = np.argwhere(fp) - (r - 1)
        kern[tuple((offs % grid.n).T)] = 1.0
        kernels.append(np.fft.rfftn(kern))
        counts.append(int(fp.sum()))
        fps.append(fp)
    return BallFamily(grid, radii, stride, tuple(counts), tuple(kernels), tuple(fps))


def ball_sums(values: np.ndarray, family: BallFamily) -> list[np.ndarray]:
    """Integrals ``h^dim * sum`` of ``values`` over every ball of the family, one array per radius.

    Output arrays are indexed by ball centre (all nodes; apply the stride
    afterwards).  ``values`` must be non-negative; batched leading axes are
    kept.
    """
    grid = family.grid
    vhat = np.fft.rfftn(values, axes=grid.axes)
    out = []
    for kh in family.kernels_hat:
        s = np.fft.irfftn(vhat * kh, s=grid.shape, axes=grid.axes)
        out.append(grid.cell_volume * np.clip(s, 0.0, None))
    return out


def _strided(a: np.ndarray, grid: Grid, stride: int) -> np.ndarray:
    if stride == 1:
        return a
    idx = (Ellipsis,) + (slice(None, None, stride),) * grid.dim
    return a[idx]


# --------------------------------------------------------------------------
# norms


def lorentz_step_norm(values, weights, p: float, q: float, axis: int = -1):
    """Lorentz functional of a step function, evaluated exactly per step.

    The decreasing rearrangement takes the value ``v_i`` on
    ``[T_{i-1}, T_i)`` with ``T_i`` the running sum of the sorted weights, so

        ||f||_{p,q}^q = (p/q) * sum_i v_i^q (T_i^{q/p} - T_{i-1}^{q/p}),

    and for ``q = inf`` the supremum ``max_i v_i T_i^{1/p}``.  ``p = q``
    gives the plain ``L^p`` norm; ``p = q = inf`` gives the maximum.
    """
    v = np.moveaxis(np.abs(np.asarray(values, dtype=float)), axis, -1)
    w = np.asarray(weights, dtype=float)
    w = np.broadcast_to(np.moveaxis(w, axis, -1) if w.ndim else w, v.shape)
    order = np.argsort(-v, axis=-1, kind="stable")
    v = np.take_along_axis(v, order, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    if p == INF:
        if q != INF:
            raise ValueError("p = inf requires q = inf")
        return v[..., 0] if v.shape[-1] else np.zeros(v.shape[:-1])
    T = np.cumsum(w, axis=-1)
    if q == INF:
        return np.max(v * T ** (1.0 / p), axis=-1)
    Tq = T ** (q / p)
    dT = np.diff(Tq, axis=-1, prepend=0.0)
    return ((p / q) * np.sum(v**q * dT, axis=-1)) ** (1.0 / q)


def _lebesgue(a: np.ndarray, grid: Grid, p: float) -> np.ndarray:
    axes = grid.axes
    if p == INF:
        return np.max(a, axis=axes)
    if p == 1:
        return grid.cell_volume * np.sum(a, axis=axes)
    return (grid.cell_volume * np.sum(a**p, axis=axes)) ** (1.0 / p)


def _morrey(a: np.ndarray, grid: Grid, spec: Morrey, stride: int) -> np.ndarray:
    fam = ball_family(grid, stride)
    sums = ball_sums(a**spec.q, fam)
    best = None
    for i, s in enumerate(sums):
        scale = fam.measure(i) ** (1.0 / spec.p - 1.0 / spec.q)
        val = scale * np.max(_strided(s, grid, stride) ** (1.0 / spec.q), axis=grid.axes)
        best = val if best is None else np.maximum(best, val)
    return best


def norm_array(values: np.ndarray, grid: Grid, spec: SpaceSpec, stride: int = 1) -> np.ndarray:
    """``||.||_X`` of every grid function in a batch (grid axes last)."""
    a = np.abs(values)
    if isinstance(spec, Lebesgue):
        return _lebesgue(a, grid, spec.p)
    if isinstance(spec, Lorentz):
        flat = a.reshape(a.shape[: a.ndim - grid.dim] + (-1,))
        return lorentz_step_norm(flat, grid.cell_volume, spec.p, spec.q)
    if isinstance(spec, Morrey):
        return _morrey(a, grid, spec, stride)
    raise TypeError(f"not a space spec: {spec!r}")


def x_norm(f: GridFunction, spec: SpaceSpec, stride: int = 1) -> float:
    return float(norm_array(f.samples, f.grid, spec, stride))


# --------------------------------------------------------------------------
# rearrangement and pairing


@dataclass(frozen=True)
class Rearrangement:
    values: np.ndarray
    weights: np.ndarray

    def lebesgue_norm(self, p: float) -> float:
        return float(lorentz_step_norm(self.values, self.weights, p, p))

    def lorentz_norm(self, p: float, q: float) -> float:
        return float(lorentz_step_norm(self.values, self.weights, p, q))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def decreasing_rearrangement(f: GridFunction) -> Rearrangement:
    v = np.sort(np.abs(f.samples).ravel())[::-1]
    return Rearrangement(v, np.full(v.shape, f.grid.cell_volume))


def holder_pair_check(f: GridFunction, g: GridFunction, p: float) -> tuple[float, float]:
    """``(integral |f g|, ||f||_p ||g||_p')``."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    lhs = float(np.sum(np.abs(f.samples * g.samples)) * f.grid.cell_volume)
    rhs = x_norm(f, Lebesgue(p)) * x_norm(g, Lebesgue(dual_exponent(p)))
    return lhs, rhs


# --------------------------------------------------------------------------
# axioms


def ball_indicator(grid: Grid, radius: float, center=None) -> GridFunction:
    center = np.zeros(grid.dim) if center is None else np.atleast_1d(center)
    d2 = sum((x - c) ** 2 for x, c in zip(grid.coords, center))
    return GridFunction(grid, (d2 < radius**2).astype(float))


def axiom_suite(spec: SpaceSpec, family, count: int = 20, seed: int = 0,
                ball_radius: float = 1.0, fatou_levels: int = 40) -> ExperimentReport:
    """Check lattice, Fatou, ball-indicator and local-integrability properties.

    ``family(rng)`` must return a finite :class:`GridFunction`.  For each draw
    ``f`` the report gets four rows:

    * lattice: ``g = u * f`` with ``u`` uniform in ``[0, 1]``, so ``|g| <= |f|``;
      passes when ``||g|| <= ||f|| (1 + 1e-12)``;
    * fatou: truncations ``min(|f|, k)`` for ``k`` increasing to ``max|f|``;
      passes when the norms are non-decreasing and the last one is within
      ``1e-8`` of ``||f||``;
    * bsi: the norm of the indicator of ``B(0, ball_radius)`` is finite;
    * bli: ``ratio = int_B |f| / ||f||``; the sup over draws is the measured
      local-integrability constant.
    """
    rng = np.random.default_rng(seed)
    rep = ExperimentReport("axioms")
    label = repr(spec)
    ball = bsi = None
    for i in range(count):
        f = family(rng)
        if ball is None:
            ball = ball_indicator(f.grid, ball_radius)
            bsi = x_norm(ball, spec)
        nf = x_norm(f, spec)
        params = {"space": label, "draw": i}

        u = rng.uniform(0.0, 1.0, f.grid.shape)
        ng = x_norm(f * u, spec)
        rep.add(params, ng, nf, "lattice", passed=ng <= nf * (1 + 1e-12))

        top = float(np.max(np.abs(f.samples)))
        levels = top * (1.0 - 2.0 ** -np.arange(1, fatou_levels + 1))
        trunc = np.minimum(np.abs(f.samples)[None], levels.reshape((-1,) + (1,) * f.grid.dim))
        norms = norm_array(trunc, f.grid, spec)
        monotone = bool(np.all(np.diff(norms) >= -1e-12 * nf))
        close = abs(norms[-1] - nf) <= 1e-8 * nf
        rep.add(params, float(norms[-1]), nf, "fatou", passed=monotone and close)

        rep.add(params, bsi, bsi, "bsi", passed=math.isfinite(bsi) and bsi > 0, ratio=1.0)

        local = float(np.sum(np.abs(f.samples) * ball.samples) * f.grid.cell_volume)
        rep.add(params, local, nf, "bli", passed=math.isfinite(local / nf))
    rep.notes["bli_constant"] = rep.sup_by_anchor().get("bli", math.nan)
    rep.notes["ball_radius"] = ball_radius
    return rep
