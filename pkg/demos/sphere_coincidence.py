"""Two densities on the sphere, intersected by coincidence sampling."""

from measurecalc import SamplerConfig, SphereTiling, VonMisesFisher
from measurecalc.demos import run_sphere_demo

f1 = {"kind": "vmf", "lat": 25.0, "lon": 17.0, "kappa": 4.0}
f2 = {"kind": "vmf", "lat": -25.0, "lon": 37.0, "kappa": 4.0}

for t in ("8x8", "8x16", "16x16"):
    print(t, "tile area", SphereTiling.parse(t).tile_area)

rep = run_sphere_demo(("8x8", "8x16", "16x16"), f1, f2, SamplerConfig(seed=1, n_samples=1_000_000))
for r in rep.resolutions:
    print(
        f"{r.tiling:>6}: TV to f1 f2 = {r.tv_to_product:.4f}, "
        f"TV to the tiled intersection = {r.tv_to_grid_intersection:.4f}, "
        f"acceptance {r.acceptance_rate:.4f}"
    )

# The normalised product of two vMF densities is again vMF.
prod = VonMisesFisher.at(25, 17, 4).product(VonMisesFisher.at(-25, 37, 4))
print(prod)
