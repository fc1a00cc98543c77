"""Homogeneous Littlewood-Paley blocks, Sobolev and Chemin-Lerner norms.

The dyadic multiplier is ``psi(r) = chi(r/2) - chi(r)`` where ``chi`` is a
radial C-infinity cutoff equal to 1 on ``r <= 3/4`` and 0 on ``r >= 4/3``.
Block ``j`` keeps frequencies ``3/4 * 2**j <= |xi| <= 8/3 * 2**j``.  The
bank spans every shell that touches a nonzero grid frequency, so the
blocks telescope to the identity on the mean-free part of any field.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, SpaceTimeField

__all__ = [
    "cutoff",
    "psi",
    "DyadicFilterBank",
    "BesovProfile",
    "build_filter_bank",
    "dyadic_block",
    "block_norms",
    "sobolev_norm",
    "sobolev_norm_inhomogeneous",
    "block_profile",
    "chemin_lerner_norm",
    "lp_time_norm",
    "norm_equivalence",
    "product_ratio",
    "product_estimate_probe",
    "minkowski_check",
    "random_bandlimited",
]

_LOW, _HIGH = 0.75, 4.0 / 3.0


def _edge(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def cutoff(r):
    """Smooth radial cutoff: 1 for ``r <= 3/4``, 0 for ``r >= 4/3``."""
    y = (np.asarray(r, dtype=float) - _LOW) / (_HIGH - _LOW)
    a, b = _edge(1.0 - y), _edge(y)
    return a / (a + b)


def psi(r):
    """Annular dyadic multiplier supported in ``[3/4, 8/3]``."""
    r = np.abs(np.asarray(r, dtype=float))
    return cutoff(r / 2.0) - cutoff(r)


@dataclass(frozen=True, eq=False)
class DyadicFilterBank:
    grid: Grid
    j_min: int
    j_max: int
    psi_hat: np.ndarray  # shape (n_shells,) + grid.shape

    @property
    def js(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    def __len__(self) -> int:
        return self.j_max - self.j_min + 1

    def multiplier(self, j: int) -> np.ndarray:
        if not self.j_min <= j <= self.j_max:
            raise ValueError(f"dyadic index {j} outside [{self.j_min}, {self.j_max}]")
        return self.psi_hat[j - self.j_min]

    def partition_residual(self) -> float:
        """Max deviation of ``sum_j psi_j`` from 1 over nonzero grid frequencies."""
        total = self.psi_hat.sum(axis=0)
        nonzero = self.grid.xi2 > 0
        return float(np.abs(total[nonzero] - 1.0).max())


def build_filter_bank(grid: Grid) -> DyadicFilterBank:
    xi_min = 2 * np.pi / grid.length
    xi_max = float(grid.xi_abs.max())
    # j_min: 2**-j * xi_min >= 4/3 so lower shells vanish at the lowest mode;
    # j_max: 2**-(j+1) * xi_max <= 3/4 so the bank covers the highest mode.
    j_min = int(np.floor(np.log2(0.75 * xi_min)))
    j_max = int(np.ceil(np.log2(xi_max / 0.75))) - 1
    if j_max - j_min + 1 < 3:
        raise ValueError("grid too small to host three dyadic shells")
    r = grid.xi_abs
    psi_hat = np.stack([psi(r * 2.0**-j) for j in range(j_min, j_max + 1)])
    return DyadicFilterBank(grid, j_min, j_max, psi_hat)


@dataclass
class BesovProfile:
    """Weighted block norms ``2**(j*s) * ||Delta_j f||`` and their l2 aggregate."""

    s: float
    js: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.js = np.asarray(self.js, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(self.values < 0):
            raise ValueError("block norms must be nonnegative")

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("j,weighted_block_norm\n")
        for j, v in zip(self.js, self.values):
            buf.write(f"{j},{v:.17g}\n")
        buf.write(f"TOTAL,{self.norm:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, s: float = float("nan")) -> "BesovProfile":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if lines[0] != "j,weighted_block_norm":
            raise ValueError("not a BesovProfile CSV")
        js, values, total = [], [], None
        for ln in lines[1:]:
            key, val = ln.split(",")
            if key == "TOTAL":
                total = float(val)
            else:
                js.append(int(key))
                values.append(float(val))
        prof = cls(s, np.array(js), np.array(values))
        if total is not None and not np.isclose(total, prof.norm, rtol=1e-12, atol=0):
            raise ValueError("TOTAL row does not match the block norms")
        return prof


def dyadic_block(f: ScalarField, bank: DyadicFilterBank, j: int) -> ScalarField:
    fh = np.fft.fftn(f.samples)
    return ScalarField(f.grid, np.fft.ifftn(bank.multiplier(j) * fh).real)


def _spectral_energy(fh: np.ndarray, grid: Grid) -> np.ndarray:
    # |f^|^2 * L^dim with unnormalised FFT input; axes beyond the grid's are batch
    return np.abs(fh) ** 2 * (grid.length**grid.dim / grid.size**2)


def block_norms(samples: np.ndarray, bank: DyadicFilterBank) -> np.ndarray:
    """Unweighted L2 block norms for one frame or a stack of frames.

    Returns shape ``(n_shells,)`` for a single frame and ``(nt, n_shells)``
    for a stack (leading time axis).
    """
    grid = bank.grid
    axes = tuple(range(-grid.dim, 0))
    energy = _spectral_energy(np.fft.fftn(samples, axes=axes), grid)
    w = bank.psi_hat**2
    flat_e = energy.reshape(energy.shape[: energy.ndim - grid.dim] + (-1,))
    flat_w = w.reshape(w.shape[0], -1)
    return np.sqrt(flat_e @ flat_w.T)


def _homogeneous_norm(fh: np.ndarray, grid: Grid, s: float) -> float:
    xi2 = grid.xi2
    nz = xi2 > 0
    energy = _spectral_energy(fh, grid)
    return float(np.sqrt(np.sum(xi2[nz] ** s * energy[nz])))


def sobolev_norm(f: ScalarField, s: float) -> float:
    """Homogeneous ``H^s`` norm by the direct multiplier ``|xi|**s`` (mean excluded)."""
    if s <= -f.grid.dim / 2:
        raise ValueError(
            f"s={s} <= -dim/2: the homogeneous norm is not defined on the whole space "
            "and is rejected here"
        )
    return _homogeneous_norm(np.fft.fftn(f.samples), f.grid, s)


def sobolev_norm_inhomogeneous(f: ScalarField, s: float) -> float:
    """Plain ``H^s`` norm with weight ``(1 + |xi|^2)**(s/2)``, mean included."""
    energy = _spectral_energy(np.fft.fftn(f.samples), f.grid)
    return float(np.sqrt(np.sum((1.0 + f.grid.xi2) ** s * energy)))


def block_profile(f: ScalarField, s: float, bank: DyadicFilterBank) -> BesovProfile:
    return BesovProfile(s, bank.js, 2.0 ** (bank.js * s) * block_norms(f.samples, bank))


def lp_time_norm(a: np.ndarray, times: np.ndarray, p: float) -> np.ndarray:
    """L^p norm in time (axis 0) of nonnegative samples, trapezoid for finite p."""
    if p == np.inf:
        return a.max(axis=0)
    if p not in (1, 2):
        raise ValueError(f"unsupported time exponent p={p}; use 1, 2 or inf")
    if len(times) == 1:
        return np.zeros(a.shape[1:])
    return np.trapezoid(a**p, times, axis=0) ** (1.0 / p)


def chemin_lerner_norm(u: SpaceTimeField, p: float, s: float,
                       bank: DyadicFilterBank) -> BesovProfile:
    """Profile of ``||(2**(j s) ||Delta_j u||_{L^p_T L^2})_j||_{l^2}``."""
    if p not in (1, 2, np.inf):
        raise ValueError(f"unsupported time exponent p={p}; use 1, 2 or inf")
    per_time = block_norms(u.values, bank)
    return BesovProfile(s, bank.js, 2.0 ** (bank.js * s) * lp_time_norm(per_time, u.times, p))


def norm_equivalence(bank: DyadicFilterBank, s: float, samples: int = 4096) -> tuple[float, float]:
    """Constants ``c, C`` with ``c*|f|_direct <= |f|_blocks <= C*|f|_direct``.

    The per-frequency ratio is ``sum_j (2**j/|xi|)**(2s) psi_j(xi)**2``,
    which is invariant under ``xi -> 2 xi``; it is evaluated on a dense
    octave and on the grid frequencies themselves.
    """
    r = np.concatenate([2.0 ** np.linspace(0.0, 1.0, samples, endpoint=False),
                        bank.grid.xi_abs[bank.grid.xi2 > 0].ravel()])
    j = np.arange(int(np.floor(np.log2(r.min()))) - 3, int(np.ceil(np.log2(r.max()))) + 3)
    scaled = r[None, :] * 2.0 ** -j[:, None]
    ratio = np.sum(scaled ** (-2.0 * s) * psi(scaled) ** 2, axis=0)
    return float(np.sqrt(ratio.min())), float(np.sqrt(ratio.max()))


def product_ratio(f: ScalarField, g: ScalarField, s: float) -> float:
    """``||f g||_{H^(2s - dim/2)} / (||f||_{H^s} ||g||_{H^s})``, homogeneous norms."""
    grid = f.grid
    num = _homogeneous_norm(np.fft.fftn(f.samples * g.samples), grid, 2 * s - grid.dim / 2)
    den = _homogeneous_norm(np.fft.fftn(f.samples), grid, s) * \
        _homogeneous_norm(np.fft.fftn(g.samples), grid, s)
    if den == 0:
        raise ValueError("product ratio undefined for a field with zero norm")
    return num / den


def random_bandlimited(grid: Grid, rng: np.random.Generator, kmax: int | None = None,
                       kmin: int = 1, stride: int = 1) -> ScalarField:
    """Random real field with Fourier support in ``kmin <= max|k_axis|``, ``|k_axis| <= kmax``.

    ``stride > 1`` further restricts the support to wavevectors whose
    components are all multiples of ``stride``.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if kmax is None:
        kmax = grid.n // 4 - 1
    ks = grid.wavenumbers
    mask = np.ones(grid.shape, dtype=bool)
    for k in ks:
        mask &= np.abs(k) <= kmax
    mask &= np.max(np.abs(np.stack(ks)), axis=0) >= kmin
    for k in ks:
        mask &= k % stride == 0
    coef = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) * mask
    samples = np.fft.ifftn(coef).real
    return ScalarField(grid, samples / np.abs(samples).max())


def product_estimate_probe(bank: DyadicFilterBank, s: float, trials: int, seed: int) -> float:
    """Largest observed product ratio over random band-limited pairs.

    Inputs are limited to ``|k| < n/4`` so that the pointwise product is
    alias free.
    """
    dim = bank.grid.dim
    if not -dim / 2 < s < dim / 2:
        raise ValueError(f"s={s} outside the admissible range (-{dim / 2}, {dim / 2})")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(trials):
        f = random_bandlimited(bank.grid, rng)
        g = random_bandlimited(bank.grid, rng)
        best = max(best, product_ratio(f, g, s))
    return best


def minkowski_check(u: SpaceTimeField, s: float, bank: DyadicFilterBank) -> tuple[float, float]:
    """Return ``(||u||_{L~1_T H^s}, ||u||_{L1_T H^s})`` with block-form space norms.

    The first never exceeds the second (Minkowski with nonnegative
    trapezoid weights).
    """
    weighted = 2.0 ** (bank.js * s) * block_norms(u.values, bank)
    tilde = float(np.sqrt(np.sum(lp_time_norm(weighted, u.times, 1) ** 2)))
    plain = float(lp_time_norm(np.sqrt(np.sum(weighted**2, axis=1)), u.times, 1))
    return tilde, plain
