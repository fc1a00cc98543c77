"""Flat ``key=value`` run configuration and initial-data generators.

A configuration looks like::

    # grid and time
    dim=1
    n=256
    length=64
    T=1
    dt=0.001
    species.1.alpha=1
    species.1.beta=1
    species.1.u0.kind=gaussian
    species.1.u0.amplitude=0.5
    species.1.u0.width=2
    V0.kind=gaussian
    V0.amplitude=0.1
    output.stride=100

A species block ``J`` is declared by ``species.J.alpha``; blocks must be
numbered ``1..m``.  Missing ``V0`` / ``V1`` blocks mean zero data.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grid import Grid, ScalarField, _is_power_of_two, make_grid, read_snapshot
from .simulation import SolverConfig

__all__ = [
    "ConfigError",
    "InitialDataSpec",
    "OutputOptions",
    "ParsedConfig",
    "parse_config",
    "load_config",
    "canonical_text",
    "config_hash",
    "build_field",
    "build_initial_data",
    "default_out_dir",
]

KINDS = ("zero", "gaussian", "dgaussian", "mode", "file")


class ConfigError(ValueError):
    """All problems found in a configuration, each tagged with its line number."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = list(errors)
        super().__init__("\n".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.errors))


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = "zero"
    amplitude: float = 1.0
    center: tuple | None = None
    width: float | None = None
    wavenumber: tuple | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if self.kind in ("gaussian", "dgaussian") and not (self.width or 0) > 0:
            raise ValueError(f"{self.kind} needs width > 0")
        if self.kind == "mode" and self.wavenumber is None:
            raise ValueError("mode needs a wavenumber")
        if self.kind == "file" and not self.path:
            raise ValueError("file needs a path")


@dataclass(frozen=True)
class OutputOptions:
    directory: str = field(default_factory=lambda: default_out_dir())
    stride: int = 100
    snapshots: bool = True


class ParsedConfig(NamedTuple):
    solver: SolverConfig
    initial: tuple  # u0 per species, then V0, V1
    output: OutputOptions
    seed: int = 0

    @property
    def u0(self) -> tuple:
        return self.initial[:-2]

    @property
    def V0(self) -> InitialDataSpec:
        return self.initial[-2]

    @property
    def V1(self) -> InitialDataSpec:
        return self.initial[-1]


def default_out_dir() -> str:
    return os.environ.get("DEBYE_OUT_DIR", "out")


def _as_int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError
    return int(f)


def _as_bool(v: str) -> bool:
    low = v.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError


def _as_tuple(v: str, conv) -> tuple:
    return tuple(conv(p) for p in v.replace(",", " ").split())


_TOP = {
    "dim": _as_int, "n": _as_int, "length": float, "T": float, "dt": float,
    "wrap_policy": str, "dealias": _as_bool, "seed": _as_int,
    "output.dir": str, "output.stride": _as_int, "output.snapshots": _as_bool,
}
_DATA = {
    "kind": str, "amplitude": float, "width": float, "path": str,
    "center": lambda v: _as_tuple(v, float), "wavenumber": lambda v: _as_tuple(v, _as_int),
}
_SPECIES = {"alpha": float, "beta": float}
_TYPE_NAMES = {_as_int: "an integer", float: "a number", _as_bool: "a boolean", str: "a string"}


def _converter(key: str):
    """Value converter for ``key``, or ``None`` for an unknown key."""
    if key in _TOP:
        return _TOP[key]
    parts = key.split(".")
    if parts[0] in ("V0", "V1") and len(parts) == 2:
        return _DATA.get(parts[1])
    if parts[0] == "species" and len(parts) >= 3 and parts[1].isdigit():
        if len(parts) == 3:
            return _SPECIES.get(parts[2])
        if len(parts) == 4 and parts[2] == "u0":
            return _DATA.get(parts[3])
    return None


def _read_pairs(text: str):
    values, lines, errors = {}, {}, []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append((ln, f"expected key=value, got {line!r}"))
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        conv = _converter(key)
        if conv is None:
            errors.append((ln, f"unknown key {key!r}"))
            continue
        if key in values:
            errors.append((ln, f"duplicate key {key!r} (first set on line {lines[key]})"))
            continue
        try:
            values[key] = conv(value)
        except ValueError:
            errors.append((ln, f"{key} must be {_TYPE_NAMES.get(conv, 'a list')}, got {value!r}"))
            continue
        lines[key] = ln
    return values, lines, errors


def _data_spec(values, lines, prefix, dim, errors) -> InitialDataSpec:
    keys = {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}
    if not keys:
        return InitialDataSpec()
    where = lines.get(prefix + "kind", min(lines[prefix + k] for k in keys))
    kind = keys.get("kind")
    if kind is None:
        errors.append((where, f"{prefix}kind is required"))
        return InitialDataSpec()
    for name in ("center", "wavenumber"):
        if name in keys and len(keys[name]) != dim:
            errors.append((lines[prefix + name], f"{prefix}{name} needs {dim} components"))
            return InitialDataSpec()
    try:
        return InitialDataSpec(**keys)
    except ValueError as exc:
        errors.append((where, f"{prefix[:-1]}: {exc}"))
        return InitialDataSpec()


def parse_config(text: str) -> ParsedConfig:
    """Parse and validate a configuration; raises :class:`ConfigError` with every problem."""
    values, lines, errors = _read_pairs(text)

    def check(key, ok, msg):
        if key in values and not ok(values[key]):
            errors.append((lines[key], msg))

    for key in ("dim", "n", "length", "T", "dt"):
        if key not in values:
            errors.append((0, f"missing required key {key!r}"))
    check("dim", lambda v: v in (1, 2), "dim must be 1 or 2")
    check("n", lambda v: _is_power_of_two(v) and v >= 16, "n must be a power of two >= 16")
    check("length", lambda v: v > 0, "length must be positive")
    check("T", lambda v: v > 0, "T must be positive")
    check("dt", lambda v: v > 0, "dt must be positive")
    check("wrap_policy", lambda v: v in ("warn", "error"), "wrap_policy must be warn or error")
    check("output.stride", lambda v: v >= 1, "output.stride must be >= 1")
    if values.get("T", 0) > 0 and values.get("dt", 0) > 0:
        ratio = values["T"] / values["dt"]
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            errors.append((lines["dt"], f"T/dt = {ratio} is not an integer"))

    declared = sorted(int(k.split(".")[1]) for k in values
                      if k.startswith("species.") and k.endswith(".alpha") and k.count(".") == 2)
    for key in values:
        if key.startswith("species.") and int(key.split(".")[1]) not in declared:
            errors.append((lines[key], f"orphan key {key!r}: species block "
                                       f"{key.split('.')[1]} has no alpha"))
    if not declared:
        errors.append((0, "at least one species block (species.1.alpha) is required"))
    elif declared != list(range(1, len(declared) + 1)):
        errors.append((lines[f"species.{declared[-1]}.alpha"],
                       f"species blocks must be numbered 1..m, got {declared}"))

    dim = values.get("dim", 1) if values.get("dim") in (1, 2) else 1
    species = tuple((values[f"species.{j}.alpha"], values.get(f"species.{j}.beta", 1.0))
                    for j in declared)
    u0 = tuple(_data_spec(values, lines, f"species.{j}.u0.", dim, errors) for j in declared)
    V0 = _data_spec(values, lines, "V0.", dim, errors)
    V1 = _data_spec(values, lines, "V1.", dim, errors)
    if errors:
        raise ConfigError(sorted(errors))

    grid = make_grid(values["dim"], values["n"], values["length"])
    solver = SolverConfig(grid, values["T"], values["dt"], species,
                          wrap_policy=values.get("wrap_policy", "warn"),
                          dealias=values.get("dealias", False))
    output = OutputOptions(directory=values.get("output.dir", default_out_dir()),
                           stride=values.get("output.stride", 100),
                           snapshots=values.get("output.snapshots", True))
    return ParsedConfig(solver, (*u0, V0, V1), output, values.get("seed", 0))


def load_config(path) -> ParsedConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def _spec_items(prefix: str, spec: InitialDataSpec):
    if spec.kind == "zero":
        return [(prefix + "kind", "zero")]
    out = [(prefix + "kind", spec.kind), (prefix + "amplitude", spec.amplitude)]
    for name in ("center", "width", "wavenumber", "path"):
        v = getattr(spec, name)
        if v is not None:
            out.append((prefix + name, v))
    return out


def canonical_text(cfg: ParsedConfig) -> str:
    """Sorted ``key=value`` lines of every field that affects the computed solution.

    Output options are excluded; defaults are written out so that omitting a
    key and setting it to its default hash identically.
    """
    s = cfg.solver
    items = [("dim", s.grid.dim), ("n", s.grid.n), ("length", float(s.grid.length)),
             ("T", float(s.T)), ("dt", float(s.dt)), ("wrap_policy", s.wrap_policy),
             ("dealias", bool(s.dealias)), ("seed", int(cfg.seed))]
    for j, ((a, b), spec) in enumerate(zip(s.species, cfg.u0), start=1):
        items += [(f"species.{j}.alpha", a), (f"species.{j}.beta", b)]
        items += _spec_items(f"species.{j}.u0.", spec)
    items += _spec_items("V0.", cfg.V0) + _spec_items("V1.", cfg.V1)
    return "".join(f"{k}={_fmt(v)}\n" for k, v in sorted(items))


def config_hash(cfg: ParsedConfig) -> str:
    """16 hex digits (64 bits) of the SHA-256 of :func:`canonical_text`."""
    return hashlib.sha256(canonical_text(cfg).encode()).hexdigest()[:16]


def build_field(spec: InitialDataSpec, grid: Grid) -> ScalarField:
    """Sample an initial-data description on ``grid``.

    Gaussians are ``A exp(-r^2 / (2 w^2))`` with ``r`` the periodic distance to
    the centre (default: the box centre).  ``dgaussian`` is
    ``-A (x_1 - c_1)/w exp(-r^2 / (2 w^2))``.  ``mode`` is ``A cos(2 pi k.x / L)``.
    """
    if spec.kind == "zero":
        return grid.zeros()
    if spec.kind == "file":
        f = read_snapshot(spec.path)
        if f.grid != grid:
            raise ValueError(f"snapshot {spec.path} has grid {f.grid}, run grid is {grid}")
        return ScalarField(grid, spec.amplitude * f.samples)
    coords = grid.coords
    L = grid.length
    if spec.kind == "mode":
        phase = sum(2 * np.pi * k * x / L for k, x in zip(spec.wavenumber, coords))
        return ScalarField(grid, spec.amplitude * np.cos(phase))
    center = spec.center or (L / 2,) * grid.dim
    d = [(x - c + L / 2) % L - L / 2 for x, c in zip(coords, center)]
    bump = np.exp(-sum(di**2 for di in d) / (2 * spec.width**2))
    if spec.kind == "gaussian":
        return ScalarField(grid, spec.amplitude * bump)
    return ScalarField(grid, -spec.amplitude * d[0] / spec.width * bump)


def build_initial_data(cfg: ParsedConfig):
    """Return ``(u0 list, V0, V1)`` sampled on the run grid."""
    g = cfg.solver.grid
    return [build_field(s, g) for s in cfg.u0], build_field(cfg.V0, g), build_field(cfg.V1, g)
