"""Prior, observation and forward map; exact and sampled posteriors."""

import numpy as np

from measurecalc import (
    CellMapping,
    GridMeasure,
    InferenceProblem,
    SamplerConfig,
    histogram,
    make_space,
    solve_exact,
    solve_sampled,
    tv_distance,
)

# Three model cells map onto two data cells.
X = make_space(["x0", "x1", "x2"], [1.0, 1.0, 1.0])
Y = make_space(["a", "b"], [1.0, 1.0])
phi = CellMapping.from_labels(X, Y, ["a", "a", "b"])

prior = GridMeasure(X, [0.2, 0.3, 0.5], "probability")
observed = GridMeasure(Y, [1.0, 2.0])  # likelihood L = (1, 1, 2)
problem = InferenceProblem(prior, observed, phi)

exact = solve_exact(problem)
print("exact posterior  ", exact.model_posterior.density)  # (2, 3, 10) / 15
print("evidence         ", exact.evidence)
print("data posterior   ", exact.data_posterior.density)

# Rejection sampling: keep each prior draw with probability k L(x).
sampled = solve_sampled(problem, SamplerConfig(seed=1, n_samples=200_000))
h = histogram(sampled.model_posterior, X)
print("sampled posterior", np.round(h.density, 4))
print("TV to exact      ", tv_distance(h, exact.model_posterior))
print(f"evidence estimate {sampled.evidence:.4f} +/- {sampled.evidence_sigma:.4f}")
