"""Pseudo-spectral simulation of a transport-diffusion system driven by a wave potential.

The density obeys ``d_t u - Laplacian u = div(u grad S)`` on a periodic box,
where the potential solves ``S_tt - Laplacian S = u``.  Modules:

* :mod:`~debyewave.grid` - periodic grids, fields, FFT helpers and snapshots;
* :mod:`~debyewave.littlewood_paley` - dyadic blocks, Sobolev and Chemin-Lerner norms;
* :mod:`~debyewave.heat` - heat semigroup and exponential Duhamel steps;
* :mod:`~debyewave.wave` - exact per-frequency wave propagation;
* :mod:`~debyewave.mild` - mild formulation and Picard iteration;
* :mod:`~debyewave.simulation` - time stepper and invariant monitors;
* :mod:`~debyewave.config`, :mod:`~debyewave.output`, :mod:`~debyewave.cli` - files and CLI.
"""

__version__ = "0.1.0"

from .grid import (Grid, ScalarField, SpaceTimeField, SpectralField, make_grid,  # noqa: E402
                   read_snapshot, to_physical, to_spectral, write_snapshot)
from .littlewood_paley import (BesovProfile, DyadicFilterBank, build_filter_bank,  # noqa: E402
                               chemin_lerner_norm, sobolev_norm)
from .heat import duhamel, heat_propagate, smoothing_probe  # noqa: E402
from .wave import WaveState, propagate, wave_gradient, wave_solve  # noqa: E402
from .simulation import (RunResult, SimulationError, SolverConfig, energy_audit,  # noqa: E402
                         gronwall_audit, run, step)
from .mild import (ContractionReport, IterationConfig, bilinear_B, estimate_constants,  # noqa: E402
                   linear_L, picard_solve)

__all__ = [
    "Grid", "ScalarField", "SpaceTimeField", "SpectralField", "make_grid", "read_snapshot",
    "to_physical", "to_spectral", "write_snapshot",
    "BesovProfile", "DyadicFilterBank", "build_filter_bank", "chemin_lerner_norm", "sobolev_norm",
    "duhamel", "heat_propagate", "smoothing_probe",
    "WaveState", "propagate", "wave_gradient", "wave_solve",
    "RunResult", "SimulationError", "SolverConfig", "energy_audit", "gronwall_audit", "run", "step",
    "ContractionReport", "IterationConfig", "bilinear_B", "estimate_constants", "linear_L",
    "picard_solve",
]
