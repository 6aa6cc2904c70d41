"""Stabilize the chain of Lie derivatives of x*y along a rotation field."""

import numpy as np

from noetherian.bernstein import Disc
from noetherian.ideal_chain import DerivationField, bernstein_from_ode, derived_linear_ode, stabilize

xi = DerivationField(["y", "-x"], ["x", "y"])
chain = stabilize(xi, "x*y")
print("stabilized at k =", chain.k)
for i, d in enumerate(chain.derivatives[: chain.k + 1]):
    print(f"  L^{i} P = {d}")

solution = lambda t: np.stack([np.sin(t), np.cos(t)], -1)
ode = derived_linear_ode(chain, solution)
print("residual on |t| = 0.7:", ode.residual(0.7 * np.exp(2j * np.pi * np.arange(8) / 8)))
rep = bernstein_from_ode(ode, Disc(0j, 1.0))
print(f"index {rep['index']:.4f} <= bound {rep['bound']:.4f}: {rep['holds']}")
