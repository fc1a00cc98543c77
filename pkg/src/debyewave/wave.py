"""Solution map ``S(u, V0, V1)`` of ``V_tt - Laplacian V = u``.

Each Fourier mode is advanced exactly:

    V(t) = cos(w t) V0 + sin(w t)/w V1 + int_0^t sin(w (t - tau))/w u(tau) dtau,

with ``w = |xi|``.  Between frames the source is linear in time, which makes
the step exact for piecewise-linear sources; the ``w = 0`` mode uses the
analytic limits (``t`` for the velocity term, ``t^2/2`` for a constant
source).  Note the kernel ``sin(w s)/w`` carries the 1/2 of the classical
d'Alembert cone integral.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np

from .grid import Grid, ScalarField, SpaceTimeField, _same_grid
from .littlewood_paley import DyadicFilterBank, _spectral_energy, lp_time_norm

__all__ = [
    "WaveState",
    "WaveWeights",
    "wave_weights",
    "wave_energy",
    "propagate",
    "wave_solve",
    "wave_gradient",
    "characteristic_gradient",
    "spectral_shift",
    "support_width",
    "wraps",
    "pde_residual",
    "strichartz_energy_probe",
    "WrapWarning",
]

_SERIES_CUT = 0.2
_NTERMS = 12


class WrapWarning(UserWarning):
    """Data support plus light cone exceeds the period of the box."""


@dataclass(frozen=True, eq=False)
class WaveState:
    V: ScalarField
    Vt: ScalarField
    t: float = 0.0

    def __post_init__(self):
        _same_grid(self.V.grid, self.Vt.grid)

    @property
    def grid(self) -> Grid:
        return self.V.grid

    def energy(self) -> float:
        return wave_energy(self)


def _series(x2, coeffs):
    out = np.zeros_like(x2)
    for c in reversed(coeffs):
        out = out * x2 + c
    return out


# Taylor coefficients in x^2 of the step kernels divided by h or h^2 (x = w h):
#   (1 - cos x)/x^2, (sin x - x cos x)/x^3, sin x / x, (cos x + x sin x - 1)/x^2
_A0 = [(-1) ** (m + 1) / factorial(2 * m) for m in range(1, _NTERMS + 1)]
_A1 = [(-1) ** (m + 1) * 2 * m / factorial(2 * m + 1) for m in range(1, _NTERMS + 1)]
_B0 = [(-1) ** m / factorial(2 * m + 1) for m in range(_NTERMS)]
_B1 = [(-1) ** (m + 1) * (2 * m - 1) / factorial(2 * m) for m in range(1, _NTERMS + 1)]


@dataclass(frozen=True)
class WaveWeights:
    """Per-frequency coefficients of one exact step of size ``h``.

    ``V' = c V + sw W + a_start f_k + a_end f_{k+1}`` and
    ``W' = -w2s V + c W + b_start f_k + b_end f_{k+1}``.
    """

    c: np.ndarray
    sw: np.ndarray
    w2s: np.ndarray
    a_start: np.ndarray
    a_end: np.ndarray
    b_start: np.ndarray
    b_end: np.ndarray

    def step(self, Vh, Wh, f0, f1):
        V = self.c * Vh + self.sw * Wh + self.a_start * f0 + self.a_end * f1
        W = -self.w2s * Vh + self.c * Wh + self.b_start * f0 + self.b_end * f1
        return V, W


def wave_weights(omega: np.ndarray, h: float) -> WaveWeights:
    x = omega * h
    small = x < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    x2 = x * x
    s, c = np.sin(x), np.cos(x)
    a0 = h * h * np.where(small, _series(x2, _A0), (1 - np.cos(xs)) / xs**2)
    a1 = h * h * np.where(small, _series(x2, _A1), (np.sin(xs) - xs * np.cos(xs)) / xs**3)
    b0 = h * np.where(small, _series(x2, _B0), np.sin(xs) / xs)
    b1 = h * np.where(small, _series(x2, _B1), (np.cos(xs) + xs * np.sin(xs) - 1) / xs**2)
    # weight of f at the step start is the sigma-weighted moment (a1, b1);
    # the end value takes the remainder
    return WaveWeights(c=c, sw=b0, w2s=omega * s, a_start=a1, a_end=a0 - a1,
                       b_start=b1, b_end=b0 - b1)


def wave_energy(state: WaveState) -> float:
    """``(1/2) int (V_t^2 + |grad V|^2) dx`` evaluated spectrally."""
    g = state.grid
    Vh, Wh = np.fft.fftn(state.V.samples), np.fft.fftn(state.Vt.samples)
    return 0.5 * float(np.sum(_spectral_energy(Wh, g) + g.xi2 * _spectral_energy(Vh, g)))


def propagate(state: WaveState, h: float, source_start: ScalarField | None = None,
              source_end: ScalarField | None = None) -> WaveState:
    """Advance one step of size ``h`` with a linear-in-time source."""
    g = state.grid
    zero = np.zeros(g.shape)
    f0 = np.fft.fftn(zero if source_start is None else source_start.samples)
    f1 = np.fft.fftn(zero if source_end is None else source_end.samples)
    V, W = wave_weights(g.xi_abs, h).step(np.fft.fftn(state.V.samples),
                                           np.fft.fftn(state.Vt.samples), f0, f1)
    return WaveState(ScalarField(g, np.fft.ifftn(V).real), ScalarField(g, np.fft.ifftn(W).real),
                     state.t + h)


def _solve_spectral(u: SpaceTimeField, V0: ScalarField, V1: ScalarField):
    for f in (V0, V1):
        _same_grid(u.grid, f.grid)
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    fh = np.fft.fftn(u.values, axes=axes)
    Vh = np.empty_like(fh)
    Wh = np.empty_like(fh)
    Vh[0], Wh[0] = np.fft.fftn(V0.samples), np.fft.fftn(V1.samples)
    if len(u) > 1:
        weights = wave_weights(g.xi_abs, u.dt)
        for k in range(len(u) - 1):
            Vh[k + 1], Wh[k + 1] = weights.step(Vh[k], Wh[k], fh[k], fh[k + 1])
    return Vh, Wh


def support_width(f: ScalarField, rel_tol: float = 1e-10) -> float:
    """Length of the shortest periodic arc outside which ``|f| <= rel_tol * max|f|``."""
    if f.grid.dim != 1:
        raise ValueError("support width is only tracked in 1D")
    peak = f.max_abs()
    if peak == 0:
        return 0.0
    active = np.abs(f.samples) > rel_tol * peak
    if active.all():
        return f.grid.length
    # longest run of inactive samples on the circle
    idx = np.flatnonzero(active)
    gaps = np.diff(np.concatenate([idx, idx[:1] + f.grid.n])) - 1
    return (f.grid.n - gaps.max()) * f.grid.dx


def wraps(width: float, t: float, length: float) -> bool:
    return width + 2.0 * t >= length


def _check_wrap(u: SpaceTimeField, V0: ScalarField, V1: ScalarField) -> bool:
    if u.grid.dim != 1:
        return False
    width = max(support_width(V0), support_width(V1), support_width(u.frame(0)))
    wrapped = wraps(width, u.T, u.grid.length)
    if wrapped:
        warnings.warn(f"support {width:.3g} + 2T exceeds the period {u.grid.length:.3g}",
                      WrapWarning, stacklevel=3)
    return wrapped


def wave_solve(u: SpaceTimeField, V0: ScalarField, V1: ScalarField,
               return_velocity: bool = False):
    """Frames of ``S(u, V0, V1)`` at the times of ``u`` (and of ``S_t`` if asked)."""
    _check_wrap(u, V0, V1)
    Vh, Wh = _solve_spectral(u, V0, V1)
    axes = tuple(range(1, u.grid.dim + 1))
    S = u.with_values(np.fft.ifftn(Vh, axes=axes).real)
    if return_velocity:
        return S, u.with_values(np.fft.ifftn(Wh, axes=axes).real)
    return S


def wave_gradient(u: SpaceTimeField, V0: ScalarField, V1: ScalarField) -> tuple[SpaceTimeField, ...]:
    """Per-axis frames of ``grad S(u, V0, V1)``."""
    _check_wrap(u, V0, V1)
    return tuple(u.with_values(v) for v in _gradient_values(u, V0, V1))


def _gradient_values(u: SpaceTimeField, V0: ScalarField, V1: ScalarField) -> list:
    Vh, _ = _solve_spectral(u, V0, V1)
    axes = tuple(range(1, u.grid.dim + 1))
    return [np.fft.ifftn(1j * xi * Vh, axes=axes).real for xi in u.grid.xi_diff]


def spectral_shift(samples: np.ndarray, grid: Grid, shift: float) -> np.ndarray:
    """``f(x + shift)`` for a 1D periodic band-limited ``f``."""
    fh = np.fft.fft(samples)
    k = grid.wavenumbers[0]
    phase = np.exp(1j * grid.xi[0] * shift)
    # the Nyquist mode cannot be shifted as a real signal; use its cosine part
    phase[k == -grid.n // 2] = np.cos(grid.nyquist * shift)
    return np.fft.ifft(fh * phase).real


def characteristic_gradient(u: SpaceTimeField, V0: ScalarField, V1: ScalarField) -> SpaceTimeField:
    """1D ``S_x`` from the characteristic form, evaluated by spectral shifts.

    ``S_x(t, x) = 1/2 int_0^t [u(tau, x + t - tau) - u(tau, x - t + tau)] dtau
                  + 1/2 [V0'(x + t) + V0'(x - t) + V1(x + t) - V1(x - t)]``

    The time integral uses the trapezoid rule on the frames of ``u``.
    """
    g = u.grid
    if g.dim != 1:
        raise ValueError("the characteristic form is one-dimensional")
    dV0 = np.fft.ifft(1j * g.xi_diff[0] * np.fft.fft(V0.samples)).real
    out = np.empty_like(u.values)
    for m, t in enumerate(u.times):
        acc = 0.5 * (spectral_shift(dV0, g, t) + spectral_shift(dV0, g, -t)
                     + spectral_shift(V1.samples, g, t) - spectral_shift(V1.samples, g, -t))
        if m > 0:
            w = np.full(m + 1, u.dt)
            w[0] = w[-1] = 0.5 * u.dt
            for k in range(m + 1):
                lag = t - u.times[k]
                acc += 0.5 * w[k] * (spectral_shift(u.values[k], g, lag)
                                     - spectral_shift(u.values[k], g, -lag))
        out[m] = acc
    return u.with_values(out)


def pde_residual(S: SpaceTimeField, u: SpaceTimeField) -> float:
    """Max norm of ``(S_{k+1} - 2 S_k + S_{k-1})/dt^2 - Laplacian S_k - u_k``."""
    if len(S) < 3:
        raise ValueError("need at least three frames")
    g = S.grid
    axes = tuple(range(1, g.dim + 1))
    lap = np.fft.ifftn(-g.xi2 * np.fft.fftn(S.values[1:-1], axes=axes), axes=axes).real
    d2 = (S.values[2:] - 2 * S.values[1:-1] + S.values[:-2]) / S.dt**2
    return float(np.abs(d2 - lap - u.values[1:-1]).max())


def strichartz_energy_probe(u: SpaceTimeField, V0: ScalarField, V1: ScalarField,
                            s: float, bank: DyadicFilterBank) -> float:
    """Ratio of ``||grad S||_{L~inf_T(H^s)}`` to ``||grad V0|| + ||V1|| + ||u||_{L~1_T(H^s)}``.

    All norms are block (Littlewood-Paley) norms on ``bank``.
    """
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    weights = 2.0 ** (bank.js * s)
    w2 = (bank.psi_hat**2).reshape(len(bank), -1)
    grad2 = sum(x * x for x in g.xi_diff)

    def blocks(energy):
        flat = energy.reshape(energy.shape[: energy.ndim - g.dim] + (-1,))
        return np.sqrt(flat @ w2.T)

    V0h, V1h = np.fft.fftn(V0.samples), np.fft.fftn(V1.samples)
    data = (np.linalg.norm(weights * blocks(grad2 * _spectral_energy(V0h, g)))
            + np.linalg.norm(weights * blocks(_spectral_energy(V1h, g))))
    source = np.linalg.norm(weights * lp_time_norm(
        blocks(_spectral_energy(np.fft.fftn(u.values, axes=axes), g)), u.times, 1))
    rhs = data + source
    if rhs == 0:
        raise ValueError("degenerate probe: all inputs vanish")
    Vh, _ = _solve_spectral(u, V0, V1)
    lhs = np.linalg.norm(weights * lp_time_norm(blocks(grad2 * _spectral_energy(Vh, g)),
                                                u.times, np.inf))
    return float(lhs / rhs)
