"""Intersection, image and reciprocal image of measures on finite partitions.

Measures are densities over a space's volume measure.  The exact algebra
(:mod:`measurecalc.measure`, :mod:`measurecalc.mapping`) is complemented by
Monte Carlo samplers (:mod:`measurecalc.sampling`) and an inverse-problem
workflow (:mod:`measurecalc.inference`).
"""

from .errors import *  # noqa: F401,F403
from .space import (
    CellSet,
    CoordinateDomain,
    Space,
    interval_space,
    log_interval_space,
    make_space,
    set_volume,
)
from .measure import (
    GridMeasure,
    NormalizationMode,
    condition,
    intersect,
    intersection_constant,
    measure_of,
    measure_set,
    measure_set_overlap_constant,
    normalize,
    support,
    total_mass,
    uniform,
)
from .expr import Expr, eval_expr, parse_expr
from .mapping import (
    CellMapping,
    CompatibilityReport,
    ExprMapping,
    TestFunction,
    change_of_variables_sides,
    check_compatibility,
    image,
    integrate_against,
    preimage,
    pullback,
    pushforward,
)
from .sampling import (
    ParticleMeasure,
    ProductLognormal,
    SamplerConfig,
    bin_particles,
    coincidence_intersect,
    histogram,
    particle_probability,
    rejection_posterior,
    sample_grid,
    sample_source,
    stream_generator,
    transport,
    tv_distance,
)
from .inference import (
    InferenceProblem,
    Posterior,
    SetInference,
    data_probability,
    likelihood,
    posterior_probability,
    set_inference_demo,
    solve_exact,
    solve_sampled,
)
from .sphere import SphereTiling, VonMisesFisher, tile_integrals
from .problem import ProblemFile, load_problem, parse_problem

__version__ = "0.1.0"
