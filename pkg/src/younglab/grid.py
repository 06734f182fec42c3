"""Uniform periodic grids on [-L, L)^n and a unitary Fourier calculus on them.

Grid points are the nodes ``x_i = -L + i*h`` (``h = 2L/N``); each node is the
midpoint of the cell ``[x_i - h/2, x_i + h/2)``, so the quadrature is the
midpoint rule with equal weights ``h**dim``.  The node set contains the origin
and is closed under addition modulo ``2L``, which makes translations and
convolutions exact on the torus.

The Fourier transform uses the symmetric convention

    F f(xi) = (2 pi)^(-n/2) * integral f(x) exp(-i x.xi) dx,

discretised on the dual grid ``xi_k = k * pi / L``.  Spectra are stored in
numpy FFT order (``k = 0, 1, ..., N/2 - 1, -N/2, ..., -1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

SPACE = "space"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per axis over ``[-L, L)^dim``."""

    dim: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two, got {self.n}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def axes(self) -> tuple[int, ...]:
        """Trailing array axes that carry the grid (for batched arrays)."""
        return tuple(range(-self.dim, 0))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def measure(self) -> float:
        return (2.0 * self.half_width) ** self.dim

    @property
    def freq_spacing(self) -> float:
        return math.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return math.pi * self.n / (2.0 * self.half_width)

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers ``k`` along one axis, FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def freq_axis(self) -> np.ndarray:
        return self.wavenumbers * self.freq_spacing

    @cached_property
    def freqs(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.freq_axis] * self.dim), indexing="ij"))

    @cached_property
    def freq_norm_sq(self) -> np.ndarray:
        return sum(xi**2 for xi in self.freqs)

    @cached_property
    def freq_radius(self) -> np.ndarray:
        return np.sqrt(self.freq_norm_sq)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i L xi_k) = (-1)^k exactly; accounts for the first node sitting at -L
        sign = np.where(self.wavenumbers % 2 == 0, 1.0, -1.0)
        out = sign
        for _ in range(self.dim - 1):
            out = np.multiply.outer(out, sign)
        return out

    def origin_index(self) -> tuple[int, ...]:
        return (self.n // 2,) * self.dim

    def refined(self, factor: int = 2) -> "Grid":
        """Same box, ``factor`` times as many points per axis."""
        return Grid(self.dim, self.n * factor, self.half_width)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on a :class:`Grid` (or of its spectrum).

    ``samples`` has shape ``grid.shape``.  ``domain`` is ``"space"`` for
    point values at the nodes and ``"frequency"`` for values on the dual grid.
    ``meta`` carries bookkeeping such as the rounding applied by a shift.
    """

    grid: Grid
    samples: np.ndarray
    domain: str = SPACE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(self.samples, copy=True)
        if arr.shape != self.grid.shape:
            raise ValueError(f"samples shape {arr.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite sample at index {tuple(int(b) for b in bad)}")
        if self.domain not in (SPACE, FREQUENCY):
            raise ValueError(f"unknown domain {self.domain!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def _check_compatible(self, other: "GridFunction"):
        if self.grid != other.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")
        if self.domain != other.domain:
            raise ValueError(f"domain mismatch: {self.domain} vs {other.domain}")

    def _wrap(self, arr) -> "GridFunction":
        return GridFunction(self.grid, arr, self.domain)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_compatible(other)
            return self._wrap(self.samples + other.samples)
        return self._wrap(self.samples + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_compatible(other)
            return self._wrap(self.samples - other.samples)
        return self._wrap(self.samples - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_compatible(other)
            return self._wrap(self.samples * other.samples)
        return self._wrap(self.samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.samples)

    def __abs__(self):
        return self._wrap(np.abs(self.samples))

    @property
    def real(self) -> "GridFunction":
        return self._wrap(self.samples.real)

    def l2_norm(self) -> float:
        """Plain L^2 norm (quadrature weight matches the domain)."""
        w = self.grid.cell_volume if self.domain == SPACE else self.grid.freq_spacing**self.grid.dim
        return float(np.sqrt(w * np.sum(np.abs(self.samples) ** 2)))


def sample(fn, grid: Grid) -> GridFunction:
    """Evaluate ``fn`` at every node.

    ``fn`` receives one coordinate array per axis (``fn(x)`` in 1D,
    ``fn(x, y)`` in 2D) and may return an array or a scalar.
    """
    values = np.broadcast_to(np.asarray(fn(*grid.coords)), grid.shape)
    finite = np.isfinite(values)
    if not np.all(finite):
        idx = tuple(int(i) for i in np.argwhere(~finite)[0])
        point = tuple(float(c[idx]) for c in grid.coords)
        raise ValueError(f"function is not finite at x = {point}")
    return GridFunction(grid, values)


def integrate(f: GridFunction):
    """Midpoint quadrature ``h**dim * sum(samples)``; complex input stays complex."""
    total = f.samples.sum() * f.grid.cell_volume
    return complex(total) if np.iscomplexobj(total) else float(total)


def forward_array(samples: np.ndarray, grid: Grid) -> np.ndarray:
    """Unitary transform of (possibly batched) node samples; grid axes last."""
    scale = (grid.spacing / math.sqrt(2.0 * math.pi)) ** grid.dim
    return scale * grid._phase * np.fft.fftn(samples, axes=grid.axes)


def inverse_array(spectrum: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse of :func:`forward_array`."""
    scale = (grid.freq_spacing * grid.n / math.sqrt(2.0 * math.pi)) ** grid.dim
    return scale * np.fft.ifftn(grid._phase * spectrum, axes=grid.axes)


def fft_forward(f: GridFunction) -> GridFunction:
    if f.domain != SPACE:
        raise ValueError("fft_forward expects a function in the space domain")
    return GridFunction(f.grid, forward_array(f.samples, f.grid), FREQUENCY)


def fft_inverse(F: GridFunction, grid: Grid | None = None) -> GridFunction:
    if F.domain != FREQUENCY:
        raise ValueError("fft_inverse expects a spectrum")
    if grid is not None and grid != F.grid:
        raise ValueError(f"grid mismatch: spectrum on {F.grid}, requested {grid}")
    return GridFunction(F.grid, inverse_array(F.samples, F.grid), SPACE)
