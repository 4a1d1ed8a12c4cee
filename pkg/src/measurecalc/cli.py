"""Command-line front end.

Subcommands::

    measurecalc run PROBLEM.json [--out DIR]
    measurecalc verify-compat --cells N --trials M --seed S [--out DIR]
    measurecalc demo resistance|sphere|sets [--n N] [--seed S] [--streams K] [--out DIR] ...

Summary lines (``key=value``) go to standard output; CSV files are written
under ``--out`` when given.  Exit status is 0 on success, 1 on a domain
error and 2 on a usage, parse or file error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .csvio import compat_csv, measure_csv, particles_csv, summary_lines, write_text
from .demos import (
    DEFAULT_SPHERE_DENSITIES,
    DEFAULT_SPHERE_TILINGS,
    run_resistance_demo,
    run_sets_demo,
    run_sphere_demo,
)
from .errors import MeasureError, ProblemError
from .inference import InferenceProblem, set_inference_demo, solve_exact, solve_sampled
from .mapping import check_compatibility, pullback, pushforward
from .measure import NormalizationMode, condition, intersect, intersection_constant, total_mass
from .problem import ProblemFile, load_problem
from .sampling import SamplerConfig, coincidence_intersect, histogram, tv_distance
from .verify import verify_compat_suite

__all__ = ["TaskOutput", "execute", "build_parser", "main"]


@dataclass
class TaskOutput:
    """CSV files by name and ordered summary pairs."""

    files: dict = field(default_factory=dict)
    summary: list = field(default_factory=list)

    def add(self, **items):
        self.summary.extend(items.items())


def _intersect(args, cfg):
    a, b = args["a"], args["b"]
    out = TaskOutput()
    if args.get("method") == "coincidence":
        cloud = coincidence_intersect(a, b, cfg)
        exact = intersect(a, b)
        hist = histogram(cloud, a.space)
        out.files["intersect_particles.csv"] = particles_csv(cloud)
        out.files["intersect_histogram.csv"] = measure_csv(hist)
        out.files["intersect.csv"] = measure_csv(exact)
        out.add(
            tv=tv_distance(hist, exact),
            acceptance_rate=cloud.info["acceptance_rate"],
            attempts=cloud.info["attempts"],
        )
        return out
    mode = args.get("mode", NormalizationMode.RENORMALIZE)
    n = intersection_constant(a, b)
    res = intersect(a, b, mode)
    out.files["intersect.csv"] = measure_csv(res)
    out.add(n=n, total_mass=total_mass(res))
    return out


def _infer(args, cfg):
    problem = InferenceProblem(args["prior"], args["observed"], args["mapping"])
    out = TaskOutput()
    if args.get("method", "exact") == "exact":
        post = solve_exact(problem)
        out.files["model_posterior.csv"] = measure_csv(post.model_posterior)
        out.files["data_posterior.csv"] = measure_csv(post.data_posterior)
        out.add(**post.summary())
        return out
    post = solve_sampled(problem, cfg)
    out.files["model_particles.csv"] = particles_csv(post.model_posterior)
    out.files["model_posterior.csv"] = measure_csv(histogram(post.model_posterior, problem.model_space))
    out.files["data_posterior.csv"] = measure_csv(histogram(post.data_posterior, problem.data_space))
    out.add(
        evidence=post.evidence,
        evidence_sigma=post.evidence_sigma,
        acceptance_rate=post.acceptance_rate,
        k=post.k,
    )
    return out


def _resistance(args, cfg, particles=False):
    keys = {"V0": "v0", "I0": "i0", "sigma_V": "sigma_v", "sigma_I": "sigma_i", "grid_cells": "grid_cells"}
    rep = run_resistance_demo(cfg=cfg, **{keys[k]: v for k, v in args.items() if k in keys})
    out = TaskOutput()
    out.files["resistance_histogram.csv"] = measure_csv(rep.histogram)
    out.files["resistance_lognormal.csv"] = measure_csv(rep.expected)
    if particles:
        out.files["resistance_particles.csv"] = particles_csv(rep.samples)
    out.add(**rep.summary())
    return out


def _sphere(args, cfg):
    rep = run_sphere_demo(
        args.get("tilings", DEFAULT_SPHERE_TILINGS),
        args.get("f1", DEFAULT_SPHERE_DENSITIES[0]),
        args.get("f2", DEFAULT_SPHERE_DENSITIES[1]),
        cfg,
    )
    out = TaskOutput()
    for r in rep.resolutions:
        out.files[f"sphere_{r.tiling}_histogram.csv"] = measure_csv(r.histogram)
        out.files[f"sphere_{r.tiling}_product.csv"] = measure_csv(r.product)
        out.summary.append((f"tv_to_product[{r.tiling}]", r.tv_to_product))
        out.summary.append((f"tv_to_grid_intersection[{r.tiling}]", r.tv_to_grid_intersection))
        out.summary.append((f"acceptance_rate[{r.tiling}]", r.acceptance_rate))
    return out


def _sets(result):
    out = TaskOutput()
    out.add(
        x_post=" ".join(result.x_post.labels),
        y_post=" ".join(result.y_post.labels),
    )
    return out


def execute(pf: ProblemFile) -> TaskOutput:
    """Run the task of a parsed problem file."""
    task = pf.task
    args, cfg = task.args, task.sampler
    t = task.type
    if t == "intersect":
        return _intersect(args, cfg)
    if t == "pushforward":
        res = pushforward(args["measure"], args["mapping"])
        out = TaskOutput({"pushforward.csv": measure_csv(res)})
        out.add(total_mass=total_mass(res))
        return out
    if t == "pullback":
        res = pullback(args["measure"], args["mapping"], args.get("mode", NormalizationMode.RENORMALIZE))
        out = TaskOutput({"pullback.csv": measure_csv(res)})
        out.add(total_mass=total_mass(res))
        return out
    if t == "condition":
        res = condition(args["measure"], args["set"])
        out = TaskOutput({"condition.csv": measure_csv(res)})
        out.add(total_mass=total_mass(res))
        return out
    if t == "verify-compat":
        rep = check_compatibility(
            args["pi"], args["tau"], args["mapping"], args.get("mode", NormalizationMode.RENORMALIZE)
        )
        out = TaskOutput({"compat.csv": compat_csv(rep)})
        out.add(max_abs_gap=rep.max_abs_gap, max_measure_gap=rep.max_measure_gap, degenerate=rep.degenerate)
        return out
    if t == "infer":
        return _infer(args, cfg)
    if t == "resistance-demo":
        return _resistance(args, cfg)
    if t == "sphere-demo":
        return _sphere(args, cfg)
    if t == "sets-demo":
        return _sets(set_inference_demo(args["x_prior"], args["y_obs"], args["mapping"]))
    raise ValueError(f"unknown task {t!r}")


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors name the offending flag and exit 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: usage error: {message}\n")


def _add_sampler_flags(p, n_default):
    p.add_argument("--n", type=int, default=n_default, help="samples or acceptances")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--workers", type=int, default=1, help="threads; does not change results")


def _sphere_spec(text: str) -> dict:
    kind, _, rest = text.partition(":")
    vals = [float(v) for v in rest.split(",")] if rest else []
    if kind == "uniform" and not vals:
        return {"kind": "uniform"}
    if kind in ("vmf", "cap") and len(vals) == 3:
        key = "kappa" if kind == "vmf" else "radius"
        return {"kind": kind, "lat": vals[0], "lon": vals[1], key: vals[2]}
    raise argparse.ArgumentTypeError(
        f"expected 'uniform', 'vmf:LAT,LON,KAPPA' or 'cap:LAT,LON,RADIUS', got {text!r}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="measurecalc", description="Measure calculus on finite partitions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a JSON problem file")
    run.add_argument("problem", help="path to the problem file")
    run.add_argument("--out", type=Path, help="directory for CSV outputs")

    vc = sub.add_parser("verify-compat", help="randomized compatibility-theorem suite")
    vc.add_argument("--cells", type=int, default=12)
    vc.add_argument("--trials", type=int, default=1000)
    vc.add_argument("--seed", type=int, default=0)
    vc.add_argument("--mode", choices=[m.value for m in NormalizationMode], default="renormalize")
    vc.add_argument("--out", type=Path)

    demo = sub.add_parser("demo", help="built-in worked examples")
    demos = demo.add_subparsers(dest="demo", required=True, parser_class=_Parser)

    res = demos.add_parser("resistance", help="lognormal V and I propagated to R = V / I")
    _add_sampler_flags(res, 1_000_000)
    res.add_argument("--V0", type=float, default=10.0)
    res.add_argument("--I0", type=float, default=2.0)
    res.add_argument("--sigma-V", dest="sigma_V", type=float, default=0.3)
    res.add_argument("--sigma-I", dest="sigma_I", type=float, default=0.4)
    res.add_argument("--grid-cells", dest="grid_cells", type=int, default=48)
    res.add_argument("--particles", action="store_true", help="also write the R sample cloud")
    res.add_argument("--out", type=Path)

    sph = demos.add_parser("sphere", help="coincidence sampling of two densities on the sphere")
    _add_sampler_flags(sph, 1_000_000)
    sph.add_argument("--tilings", default=",".join(DEFAULT_SPHERE_TILINGS), help="e.g. 8x8,8x16,16x16")
    sph.add_argument("--f1", type=_sphere_spec, default=DEFAULT_SPHERE_DENSITIES[0])
    sph.add_argument("--f2", type=_sphere_spec, default=DEFAULT_SPHERE_DENSITIES[1])
    sph.add_argument("--out", type=Path)

    sets = demos.add_parser("sets", help="random set-level inference instance")
    sets.add_argument("--nx", type=int, default=8)
    sets.add_argument("--ny", type=int, default=5)
    sets.add_argument("--seed", type=int, default=1)
    sets.add_argument("--out", type=Path)
    return parser


def _cfg(ns) -> SamplerConfig:
    return SamplerConfig(seed=ns.seed, streams=ns.streams, n_samples=ns.n, workers=ns.workers)


def _dispatch(ns) -> TaskOutput:
    if ns.command == "run":
        return execute(load_problem(ns.problem))
    if ns.command == "verify-compat":
        r = verify_compat_suite(ns.cells, ns.trials, ns.seed, ns.mode)
        return TaskOutput(summary=list(r.summary().items()))
    if ns.demo == "resistance":
        args = {k: getattr(ns, k) for k in ("V0", "I0", "sigma_V", "sigma_I", "grid_cells")}
        return _resistance(args, _cfg(ns), particles=ns.particles)
    if ns.demo == "sphere":
        tilings = [t.strip() for t in ns.tilings.split(",") if t.strip()]
        return _sphere({"tilings": tilings, "f1": ns.f1, "f2": ns.f2}, _cfg(ns))
    rep = run_sets_demo(ns.nx, ns.ny, ns.seed)
    out = TaskOutput()
    out.add(**rep.summary())
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        out = _dispatch(ns)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ProblemError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except MeasureError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = summary_lines(out.summary)
    sys.stdout.write(text)
    if getattr(ns, "out", None) is not None:
        for name, body in out.files.items():
            write_text(ns.out / name, body)
        write_text(ns.out / "summary.txt", text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
