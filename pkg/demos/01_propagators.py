"""
Heat and wave propagators on the periodic grid
==============================================

Both linear pieces of the model are exact Fourier multipliers, so a single
step of any size reproduces the closed-form solution.
"""

import warnings

import numpy as np

from debyewave import SpaceTimeField, heat_propagate, make_grid, wave_solve

# a 1D torus of length 64 sampled at 512 points; x_i = i * dx
g = make_grid(1, 512, 64.0)
x = g.x

# heat: a single Fourier mode just decays like exp(-xi^2 t)
xi = 2 * np.pi * 5 / 64.0
mode = g.field(lambda x: np.cos(xi * x))
for t in (0.1, 1.0, 3.0):
    err = np.abs(heat_propagate(mode, t).samples - np.exp(-xi**2 * t) * mode.samples).max()
    print(f"heat  t={t:4.1f}  decay factor {np.exp(-xi**2 * t):.4f}  error {err:.1e}")

# wave: a bump at rest splits into two half-height copies moving left and right
bump = g.field(lambda x: np.exp(-((x - 32) ** 2) / 8))
times = np.linspace(0, 10, 11)
S = wave_solve(SpaceTimeField.constant(g.zeros(), times), bump, g.zeros())
for k in (0, 5, 10):
    frame = S.frame(k).samples
    peaks = x[frame > 0.99 * frame.max()]
    print(f"wave  t={times[k]:4.1f}  peak height {frame.max():.3f}  at x = {peaks.min():.2f}..{peaks.max():.2f}")

# a constant source grows like t^2/2
one = SpaceTimeField.constant(g.field(lambda x: 1.0 + 0 * x), np.linspace(0, 1.5, 4))
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    S = wave_solve(one, g.zeros(), g.zeros())
print("constant source:", np.round(S.values[:, 0], 6), "vs t^2/2:", 0.5 * one.times**2)
