"""Intersection, image and reciprocal image on a small partition."""

import numpy as np

from measurecalc import (
    CellMapping,
    GridMeasure,
    check_compatibility,
    condition,
    intersect,
    make_space,
    measure_set,
    pullback,
    pushforward,
)

# Two cells of unit volume; densities are per unit volume.
s = make_space(["left", "right"], [1.0, 1.0])
f1 = GridMeasure(s, [0.5, 0.5], "probability")
f2 = GridMeasure(s, [0.8, 0.2], "probability")

# The product (0.4, 0.1) renormalised by n = 0.5.
print("f1 ∩ f2 =", intersect(f1, f2).density)

# Conditioning is intersection with a measure-set.
x = make_space(["a", "b", "c", "d"], [1.0, 1.0, 1.0, 1.0])
nu = GridMeasure(x, [0.1, 0.2, 0.3, 0.4], "probability")
A = x.cells(["b", "d"])
print("nu[. | {b, d}] =", condition(nu, A).density)
print("nu ∩ mu_A      =", intersect(nu, measure_set(x, A)).density)

# A three-to-two cell map.  Image: masses add up over preimages.
y = make_space(["p", "q"], [1.0, 1.0])
phi = CellMapping.from_labels(x, y, ["p", "p", "q", "q"])
print("phi[nu] =", pushforward(nu, phi).density)

# Reciprocal image: compose the density with phi, then renormalise.
tau = GridMeasure(y, [2.0, 0.0])
print("phi^-1[tau] =", pullback(tau, phi).density)

# Pushing the intersection forward equals intersecting the pushforward.
rep = check_compatibility(nu, GridMeasure(y, [0.3, 0.7]), phi)
print("lhs =", rep.lhs.density, " rhs =", rep.rhs.density, " gap =", rep.max_abs_gap)
assert np.allclose(rep.lhs.density, rep.rhs.density)
