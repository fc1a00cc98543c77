"""Uniform periodic grids, real fields and the spectral transform pair.

The whole line (or plane) is replaced by a torus of period ``length`` per
axis.  Sample ``i`` along an axis sits at ``x = i * dx`` and the discrete
Fourier coefficients are normalised as

    coefficient(k) = n**-dim * sum(samples * exp(-2j*pi*k.x/L)),

so a constant field ``c`` has ``coefficient(0) == c``.  Physical angular
frequencies are ``xi = 2*pi*k/L``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "SpectralField",
    "SpaceTimeField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "derivative",
    "laplacian",
    "dealias",
    "write_snapshot",
    "read_snapshot",
]

SNAPSHOT_MAGIC = b"DBW1"
_HEADER = struct.Struct("<4sBBHId")


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` samples per axis on ``[0, length)``."""

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.n) != self.n or not _is_power_of_two(int(self.n)) or self.n < 16:
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Sample coordinates per axis, broadcast to ``shape`` (ij indexing)."""
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    @property
    def x(self) -> np.ndarray:
        return self.coords[0]

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumbers ``k`` per axis, broadcast to ``shape``."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        return tuple(2 * np.pi * k / self.length for k in self.wavenumbers)

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(x * x for x in self.xi)

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi2)

    @cached_property
    def xi_diff(self) -> tuple[np.ndarray, ...]:
        """Derivative multipliers ``xi`` with the Nyquist index of each axis zeroed."""
        out = []
        for axis, (x, k) in enumerate(zip(self.xi, self.wavenumbers)):
            x = x.copy()
            x[k == -self.n // 2] = 0.0
            out.append(x)
        return tuple(out)

    @property
    def nyquist(self) -> float:
        return np.pi * self.n / self.length

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))

    def field(self, func) -> "ScalarField":
        """Sample ``func(*coords)`` on the grid."""
        values = np.broadcast_to(np.asarray(func(*self.coords), dtype=float), self.shape)
        return ScalarField(self, np.array(values))


def make_grid(dim: int, n: int, length: float) -> Grid:
    return Grid(dim, n, length)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples on a grid (row-major for ``dim == 2``)."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {s.size}")
        s = s.reshape(self.grid.shape)
        if not np.all(np.isfinite(s)):
            raise ValueError("field contains NaN or Inf")
        object.__setattr__(self, "samples", s)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self.grid, other.grid)
        return ScalarField(self.grid, self.samples - other.samples)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.samples * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.samples)

    def mean(self) -> float:
        return float(self.samples.mean())

    def integral(self) -> float:
        # periodic trapezoid rule
        return float(self.samples.sum() * self.grid.cell_volume)

    def max_abs(self) -> float:
        return float(np.abs(self.samples).max())


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).reshape(self.grid.shape)
        object.__setattr__(self, "coefficients", c)

    def coefficient(self, *k: int) -> complex:
        return complex(self.coefficients[tuple(int(kk) % self.grid.n for kk in k)])

    def hermitian_defect(self) -> float:
        c = self.coefficients
        axes = tuple(range(c.ndim))
        mirrored = np.roll(np.flip(c, axis=axes), 1, axis=axes)
        return float(np.abs(mirrored - np.conj(c)).max())


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def to_spectral(f: ScalarField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.samples) / f.grid.size)


def to_physical(g: SpectralField, tol: float = 1e-12) -> ScalarField:
    """Inverse of :func:`to_spectral`; rejects coefficients of a non-real field."""
    scale = max(float(np.abs(g.coefficients).max()), np.finfo(float).tiny)
    if g.hermitian_defect() > tol * scale:
        raise ValueError("coefficients are not Hermitian-symmetric; not a real field")
    return ScalarField(g.grid, np.fft.ifftn(g.coefficients * g.grid.size).real)


def derivative(f: ScalarField, axis: int) -> ScalarField:
    """Spectral partial derivative along ``axis`` (Nyquist mode dropped)."""
    if not 0 <= axis < f.grid.dim:
        raise ValueError(f"axis {axis} out of range for dim={f.grid.dim}")
    fh = np.fft.fftn(f.samples)
    return ScalarField(f.grid, np.fft.ifftn(1j * f.grid.xi_diff[axis] * fh).real)


def laplacian(f: ScalarField) -> ScalarField:
    fh = np.fft.fftn(f.samples)
    return ScalarField(f.grid, np.fft.ifftn(-f.grid.xi2 * fh).real)


def dealias(f: ScalarField) -> ScalarField:
    """Zero every mode with ``|k| > n/3`` on some axis (2/3 rule)."""
    fh = np.fft.fftn(f.samples)
    mask = np.ones(f.grid.shape, dtype=bool)
    for k in f.grid.wavenumbers:
        mask &= np.abs(k) <= f.grid.n // 3
    return ScalarField(f.grid, np.fft.ifftn(fh * mask).real)


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Frames of a field on a uniform time grid starting at ``t = 0``.

    ``values[k]`` holds the samples at ``times[k]``.
    """

    grid: Grid
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float)
        if times.size == 0:
            raise ValueError("empty time grid")
        if times[0] != 0.0:
            raise ValueError("times must start at 0")
        values = values.reshape((times.size,) + self.grid.shape)
        if times.size > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-12 * steps[0] * max(1, times.size):
                raise ValueError("time step must be uniform")
        if not np.all(np.isfinite(values)):
            raise ValueError("space-time field contains NaN or Inf")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_frames(cls, times, frames: list[ScalarField]) -> "SpaceTimeField":
        grid = frames[0].grid
        for f in frames:
            _same_grid(grid, f.grid)
        return cls(grid, times, np.stack([f.samples for f in frames]))

    @classmethod
    def constant(cls, f: ScalarField, times) -> "SpaceTimeField":
        times = np.asarray(times, dtype=float)
        return cls(f.grid, times, np.broadcast_to(f.samples, (times.size,) + f.grid.shape))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size

    def frame(self, k: int) -> ScalarField:
        return ScalarField(self.grid, self.values[k])

    @property
    def frames(self) -> list[ScalarField]:
        return [self.frame(k) for k in range(len(self))]

    def with_values(self, values: np.ndarray) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.times, values)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _check_compatible(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "SpaceTimeField":
        return self.with_values(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SpaceTimeField":
        return self.with_values(-self.values)


def _check_compatible(a: SpaceTimeField, b: SpaceTimeField) -> None:
    _same_grid(a.grid, b.grid)
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=1e-12, atol=0):
        raise ValueError("space-time fields live on different time grids")


def write_snapshot(path, f: ScalarField) -> None:
    """Write ``f`` in the little-endian DBW1 binary layout."""
    g = f.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, g.dim, 0, 0, g.n, g.length)
    Path(path).write_bytes(header + f.samples.astype("<f8").tobytes(order="C"))


def read_snapshot(path) -> ScalarField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated DBW1 header")
    magic, dim, r0, r1, n, length = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if r0 != 0 or r1 != 0:
        raise ValueError(f"{path}: reserved header bytes must be zero")
    grid = Grid(dim, n, length)
    expected = _HEADER.size + 8 * grid.size
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    samples = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    return ScalarField(grid, samples.reshape(grid.shape))
