"""
Dyadic blocks and Besov-type norms
==================================

Split a field into Littlewood-Paley annuli, check that the blocks add back up
and compare the block-based norm with the plain Sobolev norm.
"""

import numpy as np

from debyewave import build_filter_bank, make_grid, sobolev_norm
from debyewave.littlewood_paley import block_profile, dyadic_block, norm_equivalence

g = make_grid(2, 64, 16.0)
bank = build_filter_bank(g)
f = g.field(lambda x, y: np.exp(-((x - 8) ** 2 + (y - 8) ** 2) / 2) - 2 * np.pi / 16.0**2)

# the blocks form a partition of unity away from the zero mode
total = sum(dyadic_block(f, bank, j).samples for j in bank.js)
mean = f.samples.mean()
print("reassembly error:", np.abs(total + mean - f.samples).max())

prof = block_profile(f, 0.5, bank)
print(prof.to_csv())

# the block norm and the Sobolev norm agree up to the bank's equivalence constants
lo, hi = norm_equivalence(bank, 0.5)
print(f"block norm {prof.norm:.4f}, H^0.5 norm {sobolev_norm(f, 0.5):.4f}, "
      f"ratio {prof.norm / sobolev_norm(f, 0.5):.3f} within [{lo:.3f}, {hi:.3f}]")
