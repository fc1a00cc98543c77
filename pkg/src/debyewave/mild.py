"""Mild-solution fixed point ``x = gamma + L(x) + B(x, x)``.

With ``gamma = exp(t D) u0`` the operators are

    B(u, w) = int_0^t exp((t - tau) D) div(u grad S(w, 0, 0))(tau) dtau,
    L(u)    = int_0^t exp((t - tau) D) div(u grad S(0, V0, V1))(tau) dtau.

Norms: ``L^2_T(H^1)`` in 1D and the Chemin-Lerner norm ``L~^1_T(H^s)``
with ``s = dim/2 - 1`` in 2D.  Operator norms are estimated from below by
random probing, so every verdict built on them is empirical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import Grid, ScalarField, SpaceTimeField, _same_grid
from .heat import duhamel
from .littlewood_paley import (DyadicFilterBank, _homogeneous_norm, build_filter_bank,
                               chemin_lerner_norm, random_bandlimited,
                               sobolev_norm_inhomogeneous)
from .simulation import SolverConfig
from .wave import _gradient_values

__all__ = [
    "IterationConfig",
    "ContractionReport",
    "ConvergenceError",
    "BallEscapeError",
    "fixed_point",
    "solution_norm",
    "bilinear_B",
    "linear_L",
    "mild_map",
    "estimate_constants",
    "picard_solve",
]

REPORT_KEYS = ("norm_L", "norm_B", "C0", "C1", "C2", "alpha", "data_norm", "guaranteed",
               "eta_used")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residuals: list):
        super().__init__(message)
        self.residuals = residuals


class BallEscapeError(RuntimeError):
    """An iterate left the ball of radius ``2*alpha`` although the data are admissible."""


@dataclass(frozen=True)
class IterationConfig:
    max_iters: int = 50
    rel_tol: float = 1e-10
    # ("L2H1",) or ("CL", p, s); None picks the space matching the grid dimension
    norm_spec: tuple | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def resolved_norm(self, grid: Grid) -> tuple:
        if self.norm_spec is not None:
            return tuple(self.norm_spec)
        return ("L2H1",) if grid.dim == 1 else ("CL", 1, grid.dim / 2 - 1)


@dataclass
class ContractionReport:
    norm_L: float
    norm_B: float
    C0: float
    C1: float
    C2: float
    alpha: float
    data_norm: float
    guaranteed: bool
    eta_used: float
    data_norms: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)

    def __post_init__(self):
        for k in ("norm_L", "norm_B", "C0", "C1", "C2", "alpha", "data_norm", "eta_used"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be nonnegative")

    def to_text(self) -> str:
        lines = []
        for k in REPORT_KEYS:
            v = getattr(self, k)
            lines.append(f"{k}={str(v).lower() if isinstance(v, bool) else format(v, '.17g')}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ContractionReport":
        values = {}
        for line in text.splitlines():
            if line.strip():
                k, v = line.split("=", 1)
                values[k.strip()] = v.strip()
        missing = set(REPORT_KEYS) - set(values)
        if missing:
            raise ValueError(f"report lacks keys {sorted(missing)}")
        kw = {k: float(values[k]) for k in REPORT_KEYS if k != "guaranteed"}
        kw["guaranteed"] = values["guaranteed"] == "true"
        return cls(**kw)


def _alpha(norm_L: float, norm_B: float) -> float:
    if norm_L >= 1:
        return 0.0
    if norm_B == 0:
        return np.inf
    return (1 - norm_L) ** 2 / (4 * norm_B)


def fixed_point(gamma, linear, bilinear, norm, config: IterationConfig,
                radius: float | None = None, x0=None):
    """Successive substitution for ``x = gamma + linear(x) + bilinear(x, x)``.

    Works on any objects supporting ``+``/``-`` and a norm callable.  Stops
    when ``|x_{k+1} - x_k| <= rel_tol |x_{k+1}|`` and returns ``(x, residuals)``.
    If ``radius`` is given every iterate must stay in the closed ball.
    """
    x = gamma if x0 is None else x0
    residuals = []
    for _ in range(config.max_iters):
        x_new = gamma + linear(x) + bilinear(x, x)
        size = norm(x_new)
        if radius is not None and size > radius * (1 + 1e-12):
            raise BallEscapeError(f"iterate norm {size:.6g} exceeds radius {radius:.6g}")
        change = norm(x_new - x)
        residuals.append(change / size if size > 0 else change)
        x = x_new
        if residuals[-1] <= config.rel_tol:
            return x, residuals
    raise ConvergenceError(
        f"no convergence in {config.max_iters} iterations (last residual {residuals[-1]:.3g})",
        residuals)


@lru_cache(maxsize=8)
def _bank(grid: Grid) -> DyadicFilterBank:
    return build_filter_bank(grid)


def solution_norm(u: SpaceTimeField, norm_spec: tuple) -> float:
    if norm_spec[0] == "L2H1":
        g = u.grid
        axes = tuple(range(1, g.dim + 1))
        uh = np.fft.fftn(u.values, axes=axes)
        h1sq = ((1 + g.xi2) * np.abs(uh) ** 2).sum(axis=axes) * (g.length**g.dim / g.size**2)
        if len(u) == 1:
            return 0.0
        return float(np.sqrt(np.trapezoid(h1sq, u.times)))
    if norm_spec[0] == "CL":
        _, p, s = norm_spec
        return chemin_lerner_norm(u, p, s, _bank(u.grid)).norm
    raise ValueError(f"unknown norm {norm_spec!r}")


def _drift_div(u: SpaceTimeField, grads: list, beta: float) -> np.ndarray:
    """Frames of ``div(beta u grad_S)`` (spectral divergence)."""
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    out = 0.0
    for xi, gr in zip(g.xi_diff, grads):
        out = out + 1j * xi * np.fft.fftn(beta * u.values * gr, axes=axes)
    return np.fft.ifftn(out, axes=axes).real


def _check(u: SpaceTimeField, config: SolverConfig) -> None:
    _same_grid(u.grid, config.grid)


def bilinear_B(u: SpaceTimeField, w: SpaceTimeField, config: SolverConfig) -> SpaceTimeField:
    _check(u, config)
    _check(w, config)
    if u.times.shape != w.times.shape:
        raise ValueError("u and w live on different time grids")
    alpha, beta = config.species[0]
    zero = config.grid.zeros()
    grads = _gradient_values(w * alpha, zero, zero)
    return duhamel(zero, u.with_values(_drift_div(u, grads, beta)))


def linear_L(u: SpaceTimeField, V0: ScalarField, V1: ScalarField,
             config: SolverConfig) -> SpaceTimeField:
    _check(u, config)
    _, beta = config.species[0]
    zero = config.grid.zeros()
    grads = _gradient_values(u * 0.0, V0, V1)
    return duhamel(zero, u.with_values(_drift_div(u, grads, beta)))


def mild_map(x: SpaceTimeField, u0: ScalarField, V0: ScalarField, V1: ScalarField,
             config: SolverConfig) -> SpaceTimeField:
    """``exp(t D) u0 + int exp((t - tau) D) div(beta x grad S(alpha x, V0, V1))``."""
    alpha, beta = config.species[0]
    grads = _gradient_values(x * alpha, V0, V1)
    return duhamel(u0, x.with_values(_drift_div(x, grads, beta)))


def _heat_frames(u0: ScalarField, config: SolverConfig) -> SpaceTimeField:
    zero = SpaceTimeField(config.grid, config.times, np.zeros((config.n_steps + 1,) + config.grid.shape))
    return duhamel(u0, zero)


def _u0_norms(u0: ScalarField) -> dict:
    """Candidate norms of the initial density used by the smallness conditions."""
    g = u0.grid
    if g.dim == 1:
        return {"L2": sobolev_norm_inhomogeneous(u0, 0.0)}
    s = g.dim / 2 - 1
    fh = np.fft.fftn(u0.samples)
    return {f"H{s - 2:g}": _homogeneous_norm(fh, g, s - 2), f"H{s:g}": _homogeneous_norm(fh, g, s)}


def _u0_data_norm(u0: ScalarField) -> float:
    norms = _u0_norms(u0)
    return norms["L2"] if u0.grid.dim == 1 else next(iter(norms.values()))


def _potential_norm(V0: ScalarField, V1: ScalarField) -> float:
    """``|V0'|_{H1} + |V1|_{H1}`` in 1D, ``|grad V0|_{H^s} + |V1|_{H^s}`` otherwise."""
    g = V0.grid
    e0 = np.abs(np.fft.fftn(V0.samples)) ** 2 * (g.length**g.dim / g.size**2)
    e1 = np.abs(np.fft.fftn(V1.samples)) ** 2 * (g.length**g.dim / g.size**2)
    if g.dim == 1:
        w = 1 + g.xi2
        return float(np.sqrt(np.sum(w * g.xi2 * e0)) + np.sqrt(np.sum(w * e1)))
    s = g.dim / 2 - 1
    nz = g.xi2 > 0
    w = g.xi2[nz] ** s
    return float(np.sqrt(np.sum(w * g.xi2[nz] * e0[nz])) + np.sqrt(np.sum(w * e1[nz])))


def _probe_field(g, rng, lattice: int = 1) -> ScalarField:
    return random_bandlimited(g, rng, kmin=max(1, g.n // 8), kmax=g.n // 4 - 1, stride=lattice)


def _probe(config: SolverConfig, rng: np.random.Generator, n_terms: int = 3,
           lattice: int = 1) -> SpaceTimeField:
    """Band-limited space-time probe built from short pulses in time.

    Pulse width and placement are fixed fractions of ``min(T, 1/2)`` so that
    probes at different horizons ``T >= 1/2`` coincide.  ``lattice > 1``
    keeps only wavevectors on the coarse sub-lattice ``lattice * Z^dim``,
    which removes products landing on low nonzero frequencies.
    """
    g = config.grid
    t = config.times
    tau = min(config.T, 0.5)
    values = np.zeros((t.size,) + g.shape)
    for _ in range(n_terms):
        f = _probe_field(g, rng, lattice)
        c = rng.uniform(0.0, 0.6 * tau)
        pulse = np.exp(-0.5 * ((t - c) / (0.1 * tau)) ** 2) * rng.choice([-1.0, 1.0])
        values += pulse.reshape((-1,) + (1,) * g.dim) * f.samples
    return SpaceTimeField(g, t, values)


def estimate_constants(config: SolverConfig, trials: int = 16, seed: int = 0,
                       V0: ScalarField | None = None, V1: ScalarField | None = None,
                       u0: ScalarField | None = None, iteration: IterationConfig | None = None,
                       scale: float = 1.0, lattice: int = 1) -> ContractionReport:
    """Empirical constants of the bilinear, linear and heat estimates.

    ``C0 = max |B(u, w)| / (|u| |w|)``, ``C1 = max |L(u)| / (|u| (|grad V0| + |V1|))``
    and ``C2 = max |exp(t D) u0|_E / |u0|`` over random probes multiplied by
    ``scale``.  With zero potential data ``C1`` and ``norm_L`` are 0.
    ``lattice`` selects the probe family, see :func:`_probe`.
    """
    if trials < 8:
        raise ValueError("estimate_constants needs trials >= 8")
    iteration = iteration or IterationConfig()
    spec = iteration.resolved_norm(config.grid)
    g = config.grid
    zero = g.zeros()
    V0 = zero if V0 is None else V0
    V1 = zero if V1 is None else V1
    vnorm = _potential_norm(V0, V1)
    rng = np.random.default_rng(seed)

    def norm(x):
        return solution_norm(x, spec)

    C0 = C1 = C2 = norm_L = 0.0
    accepted = attempts = 0
    while accepted < trials:
        attempts += 1
        if attempts > 10 * trials:
            raise RuntimeError("too many degenerate probes")
        u = _probe(config, rng, lattice=lattice) * scale
        w = _probe(config, rng, lattice=lattice) * scale
        f0 = _probe_field(g, rng, lattice) * scale
        nu, nw, nf = norm(u), norm(w), _u0_data_norm(f0)
        if min(nu, nw, nf) == 0:
            continue
        accepted += 1
        C0 = max(C0, norm(bilinear_B(u, w, config)) / (nu * nw))
        C2 = max(C2, norm(_heat_frames(f0, config)) / nf)
        if vnorm > 0:
            ratio = norm(linear_L(u, V0, V1, config)) / nu
            norm_L = max(norm_L, ratio)
            C1 = max(C1, ratio / vnorm)

    alpha = _alpha(norm_L, C0)
    data_norms = {}
    data_norm = 0.0
    u0_norm = 0.0
    if u0 is not None:
        data_norm = norm(_heat_frames(u0, config))
        data_norms = _u0_norms(u0)
        u0_norm = _u0_data_norm(u0)
    guaranteed = bool(norm_L < 1 and data_norm <= alpha)
    return ContractionReport(norm_L=norm_L, norm_B=C0, C0=C0, C1=C1, C2=C2, alpha=alpha,
                             data_norm=data_norm, guaranteed=guaranteed,
                             eta_used=u0_norm + vnorm, data_norms=data_norms)


def picard_solve(u0: ScalarField, V0: ScalarField, V1: ScalarField, config: SolverConfig,
                 iteration: IterationConfig | None = None,
                 report: ContractionReport | None = None, x0: SpaceTimeField | None = None,
                 trials: int = 16, seed: int = 0):
    """Fixed point of the mild formulation by Picard iteration from ``x0 = gamma``.

    Returns ``(solution, report)``; ``report.residuals`` holds the relative
    change per iteration.  When the report guarantees convergence, leaving the
    ball of radius ``2*alpha`` raises :class:`BallEscapeError`.
    """
    if config.m != 1:
        raise ValueError("picard_solve handles a single species")
    for f in (u0, V0, V1):
        _same_grid(config.grid, f.grid)
    iteration = iteration or IterationConfig()
    spec = iteration.resolved_norm(config.grid)
    if report is None:
        report = estimate_constants(config, trials, seed, V0, V1, u0, iteration)
    gamma = _heat_frames(u0, config)
    radius = 2 * report.alpha if report.guaranteed else None

    def norm(x):
        return solution_norm(x, spec)

    x, residuals = fixed_point(gamma, lambda x: linear_L(x, V0, V1, config),
                               lambda x, y: bilinear_B(x, y, config), norm, iteration,
                               radius=radius, x0=x0)
    report.residuals = residuals
    return x, report
