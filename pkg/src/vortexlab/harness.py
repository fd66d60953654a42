"""Experiment runner: reduced-dynamics runs, field-vs-reduced validation,
background convergence studies, and the four built-in dipole presets.

Experiment files are flat key-value text with sections:

    [experiment]
    name = v3-dipole
    dynamics = schrodinger        # schrodinger | gradient_flow | mixed
    domain = plane                # plane | disk:RADIUS
    potential = double_gaussian   # zero|gaussian|step|double_gaussian|lattice
                                  # poly_bump:amp,radius | scaled:factor,kind
    T = 0.05
    rtol = 1e-9
    atol = 1e-11

    [vortices]                    # one "x y d" line per vortex
    -0.01 1.0 +1
    0.01 1.0 -1

    [pde]                         # optional; presence enables field runs
    eps = 0.1, 0.05, 0.025
    resolution = 1024             # cells per side at the smallest eps
    xmin = -3.4
    xmax = 1.0
    ymin = -2.2
    ymax = 2.2
    samples = 8                   # detection snapshots over [0, T]

Outputs per run: trajectory.csv, summary.json, and for each eps a
distances_epsX.csv plus detections_epsX.csv. Reruns are byte-identical except
for the wall-clock entry in the summary.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import hamiltonian_drift, integrate, save_trajectory_csv
from .errors import BadParams, VortexLabError
from .geometry import Domain, VortexConfig
from .gp import GPStepper, build_initial_data, stability_limit
from .grid import Grid2D, load_complex_field
from .core_profile import radial_core_profile
from .potentials import (
    builtin_potential, polynomial_bump_potential, scaled_potential,
)
from .thomasfermi import solve_thomas_fermi, tf_convergence_report, uniform_profile
from .fields import ComplexField
from .tracking import detect_vortices, save_detection_csv, trajectory_compare


@dataclass
class PDESection:
    eps_list: tuple
    resolution: int = 256
    bounds: tuple = (-3.4, 1.0, -2.2, 2.2)
    samples: int = 8
    solver_rtol: float = 1e-10
    workers: int = 1
    boundary_images: int = 1  # wall-image phase layers in the initial data


@dataclass
class ExperimentSpec:
    name: str
    dynamics: str = "schrodinger"
    domain: Domain = field(default_factory=Domain.plane)
    potential_name: str = "zero"
    config: VortexConfig | None = None
    t_final: float = 1.0
    rtol: float = 1e-9
    atol: float = 1e-11
    pde: PDESection | None = None

    def potential(self):
        return make_potential(self.potential_name)


def make_potential(name):
    name = name.strip()
    if ":" in name:
        kind, args = name.split(":", 1)
        parts = [float(p) for p in args.split(",") if p.strip()]
        if kind == "poly_bump":
            return polynomial_bump_potential(*parts)
        if kind == "scaled":
            return scaled_potential(make_potential(args.split(",", 1)[1]), parts[0])
        if kind == "disk":
            raise BadParams("disk is a domain, not a potential")
        if kind == "lattice":
            return builtin_potential("lattice", extent=int(parts[0]))
        raise BadParams(f"unknown potential form {name!r}")
    return builtin_potential(name)


def _parse_domain(text):
    text = text.strip()
    if text == "plane":
        return Domain.plane()
    if text.startswith("disk:"):
        return Domain.disk(float(text.split(":", 1)[1]))
    raise BadParams(f"unknown domain {text!r} (expected plane or disk:R)")


def parse_spec(path):
    """Read an experiment file into an ExperimentSpec."""
    sections = {}
    current = None
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip().lower()
                sections[current] = []
                continue
            if current is None:
                raise BadParams(f"{path}: content before the first section")
            sections[current].append(line)

    def kv(section):
        out = {}
        for line in sections.get(section, []):
            if "=" not in line:
                raise BadParams(f"{path}: expected key = value, got {line!r}")
            key, val = line.split("=", 1)
            out[key.strip().lower()] = val.strip()
        return out

    exp = kv("experiment")
    if "name" not in exp:
        raise BadParams(f"{path}: experiment section needs a name")
    vortex_lines = sections.get("vortices", [])
    config = None
    if vortex_lines:
        pts, deg = [], []
        for line in vortex_lines:
            parts = line.split()
            if len(parts) != 3:
                raise BadParams(f"{path}: malformed vortex line {line!r}")
            pts.append((float(parts[0]), float(parts[1])))
            deg.append(int(parts[2]))
        config = VortexConfig(np.array(pts), np.array(deg))

    pde = None
    if "pde" in sections:
        p = kv("pde")
        eps_list = tuple(float(v) for v in p.get("eps", "").split(",") if v.strip())
        pde = PDESection(
            eps_list=eps_list,
            resolution=int(p.get("resolution", 256)),
            bounds=(float(p.get("xmin", -3.4)), float(p.get("xmax", 1.0)),
                    float(p.get("ymin", -2.2)), float(p.get("ymax", 2.2))),
            samples=int(p.get("samples", 8)),
            solver_rtol=float(p.get("solver_rtol", 1e-10)),
            workers=int(p.get("workers", 1)),
            boundary_images=int(p.get("boundary_images", 1)),
        )

    return ExperimentSpec(
        name=exp["name"],
        dynamics=exp.get("dynamics", "schrodinger"),
        domain=_parse_domain(exp.get("domain", "plane")),
        potential_name=exp.get("potential", "zero"),
        config=config,
        t_final=float(exp.get("t", exp.get("t_final", 1.0))),
        rtol=float(exp.get("rtol", 1e-9)),
        atol=float(exp.get("atol", 1e-11)),
        pde=pde,
    )


def write_spec(spec, path):
    """Serialize an ExperimentSpec back to the text format."""
    lines = ["[experiment]",
             f"name = {spec.name}",
             f"dynamics = {spec.dynamics}",
             f"domain = {'plane' if spec.domain.kind == 'plane' else f'disk:{spec.domain.radius}'}",
             f"potential = {spec.potential_name}",
             f"T = {spec.t_final!r}",
             f"rtol = {spec.rtol!r}",
             f"atol = {spec.atol!r}",
             "",
             "[vortices]"]
    for (x, y), d in zip(spec.config.positions, spec.config.degrees):
        lines.append(f"{float(x)!r} {float(y)!r} {int(d):+d}")
    if spec.pde is not None:
        xmin, xmax, ymin, ymax = spec.pde.bounds
        lines += ["", "[pde]",
                  "eps = " + ", ".join(repr(e) for e in spec.pde.eps_list),
                  f"resolution = {spec.pde.resolution}",
                  f"xmin = {xmin!r}", f"xmax = {xmax!r}",
                  f"ymin = {ymin!r}", f"ymax = {ymax!r}",
                  f"samples = {spec.pde.samples}"]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# figure presets: dipole scattering off the four backgrounds
# ---------------------------------------------------------------------------

def figure_presets():
    """The four dipole runs over the builtin backgrounds.

    Initial positions follow the published configurations; horizons are
    chosen so the pair traverses the background feature (the free dipole
    moves at 2/separation, about 141 here).
    """
    def spec(name, potential, a1, a2, t_final):
        return ExperimentSpec(
            name=name, dynamics="schrodinger", domain=Domain.plane(),
            potential_name=potential,
            config=VortexConfig(np.array([a1, a2]), np.array([1, -1])),
            t_final=t_final, rtol=1e-11, atol=1e-13)

    return {
        "v1-dipole": spec("v1-dipole", "gaussian",
                          (-5.0, 2.0), (-4.99, 1.99), 0.10),
        "v2-dipole": spec("v2-dipole", "step",
                          (-5.0, -2.0), (-4.99, -1.99), 0.12),
        "v3-dipole": spec("v3-dipole", "double_gaussian",
                          (-0.01, 1.0), (0.01, 1.0), 0.05),
        "v4-dipole": spec("v4-dipole", "lattice",
                          (-5.0, -1.99), (-4.99, -2.0), 0.09),
    }


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _grid_for(pde, eps):
    """Resolution scales inversely with eps so h/eps stays fixed."""
    eps_min = min(pde.eps_list)
    n = int(round(pde.resolution * eps_min / eps))
    n = max(32, n)
    xmin, xmax, ymin, ymax = pde.bounds
    return Grid2D.from_bounds(xmin, xmax, ymin, ymax, n, n)


def _pde_job(spec, eps, traj_times, out_dir, quiet):
    """One field run at a single eps: build, evolve, track, compare."""
    pde = spec.pde
    grid = _grid_for(pde, eps)
    q0 = spec.potential()
    if spec.potential_name == "zero":
        eta = uniform_profile(grid, eps)
    else:
        eta = solve_thomas_fermi(q0.on_grid(grid), eps, grid)
    profile = radial_core_profile()
    f = build_initial_data(spec.config, eps, profile, eta,
                           boundary_images=pde.boundary_images)
    dt_raw = stability_limit(eps, spec.dynamics if spec.dynamics != "mixed"
                             else "schrodinger")
    n_steps = max(1, int(math.ceil(spec.t_final / dt_raw)))
    dt = spec.t_final / n_steps
    kind = "gradient_flow" if spec.dynamics == "gradient_flow" else "schrodinger"
    stepper = GPStepper(eta, eps, dt, kind, solver_rtol=pde.solver_rtol)
    sample_every = max(1, n_steps // max(1, pde.samples))
    fields = [f]
    for k in range(1, n_steps + 1):
        f = stepper.step(f)
        if k % sample_every == 0 or k == n_steps:
            fields.append(f)
    times = [g.t for g in fields]
    ode = integrate(spec.config, spec.domain, q0, kind, times[-1],
                    rtol=spec.rtol, atol=spec.atol, t_eval=times)
    comp = trajectory_compare(fields, eta, ode, grid.domain())
    tag = repr(eps).replace(".", "p")
    with open(os.path.join(out_dir, f"distances_eps{tag}.csv"), "w") as fh:
        fh.write("t,flat_norm_distance,count_match\n")
        for t, d, ok in zip(comp.times, comp.distances, comp.count_matches):
            fh.write(f"{float(t)!r},{float(d)!r},{int(ok)}\n")
    det = detect_vortices(fields[-1])
    save_detection_csv(det, os.path.join(out_dir, f"detections_eps{tag}.csv"),
                       t=times[-1])
    if not quiet:
        print(f"  eps={eps}: grid {grid.nx}^2, {n_steps} steps, "
              f"max flat-norm {comp.max_distance:.4f}")
    return eps, comp


def run(spec, out_dir, quiet=False):
    """Execute a spec: reduced dynamics always, field runs when eps are given."""
    os.makedirs(out_dir, exist_ok=True)
    t_start = time.time()
    q0 = spec.potential()
    traj = integrate(spec.config, spec.domain, q0, spec.dynamics, spec.t_final,
                     rtol=spec.rtol, atol=spec.atol)
    save_trajectory_csv(traj, os.path.join(out_dir, "trajectory.csv"))
    summary = {
        "name": spec.name,
        "dynamics": spec.dynamics,
        "termination": traj.termination,
        "t_col": traj.t_col,
        "h0_drift": hamiltonian_drift(traj),
        "r_alpha_min": float(np.nanmin(traj.r_alpha)),
        "flat_norm_max": {},
    }
    if not quiet:
        print(f"[{spec.name}] ODE: {traj.termination}, "
              f"H0 drift {summary['h0_drift']:.3e}")
    comparisons = {}
    if spec.pde is not None and spec.pde.eps_list:
        jobs = list(spec.pde.eps_list)
        traj_times = None
        if spec.pde.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.pde.workers) as pool:
                futures = [pool.submit(_pde_job, spec, eps, traj_times, out_dir, quiet)
                           for eps in jobs]
                for fut in futures:
                    eps, comp = fut.result()
                    comparisons[eps] = comp
        else:
            for eps in jobs:
                eps, comp = _pde_job(spec, eps, traj_times, out_dir, quiet)
                comparisons[eps] = comp
        summary["flat_norm_max"] = {repr(e): comparisons[e].max_distance
                                    for e in jobs}
    summary["wall_clock_s"] = time.time() - t_start
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary, comparisons


def validate_theorem(spec, out_dir, quiet=False, slack=0.10):
    """Field-vs-reduced convergence: max flat-norm distance per eps.

    PASS requires the column to decrease with eps, tolerating at most one
    adjacent pair that increases by no more than ``slack`` relative.
    """
    if spec.pde is None or len(spec.pde.eps_list) < 3:
        raise BadParams("validation needs at least three eps values")
    eps_list = list(spec.pde.eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise BadParams("eps list must be strictly decreasing")
    summary, comparisons = run(spec, out_dir, quiet=quiet)
    column = [comparisons[e].max_distance for e in eps_list]
    violations = sum(1 for a, b in zip(column, column[1:]) if b > a)
    soft = sum(1 for a, b in zip(column, column[1:]) if a < b <= (1 + slack) * a)
    verdict = "PASS" if violations == 0 or (violations == 1 and soft == 1) else "FAIL"
    with open(os.path.join(out_dir, "validation.csv"), "w") as fh:
        fh.write("eps,max_flat_norm_distance\n")
        for e, d in zip(eps_list, column):
            fh.write(f"{e!r},{d!r}\n")
        fh.write(f"# verdict: {verdict}\n")
    if not quiet:
        for e, d in zip(eps_list, column):
            print(f"  eps={e}: max distance {d:.5f}")
        print(f"[{spec.name}] verdict: {verdict}")
    return verdict, list(zip(eps_list, column))


def tf_study(spec, out_dir, quiet=False):
    """Background-solver convergence study on the spec's potential."""
    if spec.pde is None or len(spec.pde.eps_list) < 3:
        raise BadParams("tf study needs at least three eps values")
    os.makedirs(out_dir, exist_ok=True)
    grid = _grid_for(spec.pde, min(spec.pde.eps_list))
    rows = tf_convergence_report(spec.pde.eps_list, spec.potential(), grid)
    with open(os.path.join(out_dir, "tf_convergence.csv"), "w") as fh:
        fh.write("eps,sup_error,h1_error,order,exact\n")
        for r in rows:
            fh.write(f"{r.eps!r},{r.sup_error!r},{r.h1_error!r},"
                     f"{r.order!r},{int(r.exact)}\n")
    if not quiet:
        for r in rows:
            order = "exact" if r.exact else f"{r.order:.3f}"
            print(f"  eps={r.eps}: sup {r.sup_error:.3e}  order {order}")
    return rows


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--quiet", action="store_true")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Point-vortex dynamics and field solvers on inhomogeneous backgrounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment spec")
    p_run.add_argument("--spec", required=True)
    p_run.add_argument("--eps", default=None, help="override eps list, comma separated")
    p_run.add_argument("--resolution", type=int, default=None)
    _add_common(p_run)

    p_val = sub.add_parser("validate", help="field-vs-reduced convergence table")
    p_val.add_argument("--spec", required=True)
    p_val.add_argument("--eps", default=None)
    p_val.add_argument("--resolution", type=int, default=None)
    _add_common(p_val)

    p_tf = sub.add_parser("tf-study", help="background solver convergence study")
    p_tf.add_argument("--spec", required=True)
    p_tf.add_argument("--eps", default=None)
    p_tf.add_argument("--resolution", type=int, default=None)
    _add_common(p_tf)

    p_det = sub.add_parser("detect", help="extract vortices from a field file")
    p_det.add_argument("--field", required=True, help="VLCPLX1 binary field")
    _add_common(p_det)

    p_fig = sub.add_parser("figures", help="run the four dipole presets (ODE only)")
    p_fig.add_argument("--preset", default=None,
                       help="run a single preset by name")
    _add_common(p_fig)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except VortexLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _apply_overrides(spec, args):
    if getattr(args, "eps", None):
        eps_list = tuple(float(v) for v in args.eps.split(","))
        if spec.pde is None:
            spec.pde = PDESection(eps_list=eps_list)
        else:
            spec.pde.eps_list = eps_list
    if getattr(args, "resolution", None):
        if spec.pde is None:
            raise BadParams("--resolution needs a [pde] section or --eps")
        spec.pde.resolution = args.resolution
    return spec


def _dispatch(args):
    if args.command == "run":
        spec = _apply_overrides(parse_spec(args.spec), args)
        run(spec, args.out, quiet=args.quiet)
        return 0
    if args.command == "validate":
        spec = _apply_overrides(parse_spec(args.spec), args)
        verdict, _ = validate_theorem(spec, args.out, quiet=args.quiet)
        return 0 if verdict == "PASS" else 2
    if args.command == "tf-study":
        spec = _apply_overrides(parse_spec(args.spec), args)
        tf_study(spec, args.out, quiet=args.quiet)
        return 0
    if args.command == "detect":
        grid, w = load_complex_field(args.field)
        det = detect_vortices(ComplexField(grid, w))
        os.makedirs(args.out, exist_ok=True)
        out = os.path.join(args.out, "detections.csv")
        save_detection_csv(det, out)
        if not args.quiet:
            print(f"{det.measure.n_atoms} vortices -> {out}")
        return 0
    if args.command == "figures":
        presets = figure_presets()
        names = [args.preset] if args.preset else sorted(presets)
        for name in names:
            if name not in presets:
                raise BadParams(f"unknown preset {name!r}; have {sorted(presets)}")
            run(presets[name], os.path.join(args.out, name), quiet=args.quiet)
        return 0
    raise BadParams(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
