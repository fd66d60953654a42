import json
import math
import os

import numpy as np
import pytest

from vortexlab.errors import BadParams
from vortexlab.geometry import Domain, VortexConfig
from vortexlab.grid import Grid2D, save_complex_field
from vortexlab.harness import (
    ExperimentSpec, PDESection, figure_presets, main, make_potential,
    parse_spec, run, tf_study, validate_theorem, write_spec,
)

SPEC_TEXT = """\
# demo experiment
[experiment]
name = demo
dynamics = schrodinger
domain = plane
potential = gaussian
T = 0.5

[vortices]
0.6 0.4 +1
"""


def test_parse_spec_roundtrip(tmp_path):
    path = tmp_path / "demo.cfg"
    path.write_text(SPEC_TEXT)
    spec = parse_spec(path)
    assert spec.name == "demo"
    assert spec.dynamics == "schrodinger"
    assert spec.potential_name == "gaussian"
    assert spec.t_final == 0.5
    assert spec.config.n == 1
    assert spec.pde is None
    out = tmp_path / "echo.cfg"
    write_spec(spec, out)
    spec2 = parse_spec(out)
    assert spec2.name == spec.name
    np.testing.assert_array_equal(spec2.config.positions, spec.config.positions)


def test_parse_spec_with_pde(tmp_path):
    path = tmp_path / "p.cfg"
    path.write_text(SPEC_TEXT + "\n[pde]\neps = 0.2, 0.1\nresolution = 64\n"
                    "xmin = -1\nxmax = 1\nymin = -1\nymax = 1\n")
    spec = parse_spec(path)
    assert spec.pde.eps_list == (0.2, 0.1)
    assert spec.pde.resolution == 64


def test_bad_specs(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("name = demo\n")
    with pytest.raises(BadParams):
        parse_spec(p)
    p.write_text("[experiment]\nnodots\n")
    with pytest.raises(BadParams):
        parse_spec(p)


def test_make_potential_forms():
    assert make_potential("zero").kind == "zero"
    assert make_potential("poly_bump:0.5,1.2").kind == "poly_bump"
    assert make_potential("lattice:3").params == (3,)
    with pytest.raises(BadParams):
        make_potential("warp:1")


def test_ode_only_run_and_determinism(tmp_path):
    spec = ExperimentSpec(
        name="single", potential_name="gaussian",
        config=VortexConfig([[0.6, 0.4]], [1]), t_final=0.5)
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    s1, _ = run(spec, out1, quiet=True)
    s2, _ = run(spec, out2, quiet=True)
    assert s1["termination"] == "reached_T"
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()
    summary = json.loads((out1 / "summary.json").read_text())
    assert summary["h0_drift"] <= 1e-7
    assert "wall_clock_s" in summary


def test_run_with_small_pde(tmp_path):
    spec = ExperimentSpec(
        name="tiny-dipole", potential_name="zero",
        config=VortexConfig([[0.0, 0.25], [0.0, -0.25]], [1, -1]),
        t_final=0.02,
        pde=PDESection(eps_list=(0.2,), resolution=96,
                       bounds=(-1.4, 1.0, -1.2, 1.2), samples=2))
    summary, comparisons = run(spec, tmp_path / "out", quiet=True)
    assert 0.2 in comparisons
    assert comparisons[0.2].max_distance < 0.5
    assert (tmp_path / "out" / "distances_eps0p2.csv").exists()
    assert (tmp_path / "out" / "detections_eps0p2.csv").exists()


def test_validate_requires_three_eps(tmp_path):
    spec = ExperimentSpec(
        name="x", config=VortexConfig([[0.0, 0.25], [0.0, -0.25]], [1, -1]),
        t_final=0.01, pde=PDESection(eps_list=(0.2,)))
    with pytest.raises(BadParams):
        validate_theorem(spec, tmp_path / "v", quiet=True)
    spec.pde.eps_list = (0.1, 0.2, 0.3)
    with pytest.raises(BadParams):
        validate_theorem(spec, tmp_path / "v", quiet=True)


def test_tf_study(tmp_path):
    spec = ExperimentSpec(
        name="tf", potential_name="poly_bump:0.5,0.9",
        config=VortexConfig([[0.0, 0.0]], [1]),
        pde=PDESection(eps_list=(0.4, 0.2, 0.1), resolution=128,
                       bounds=(-1.5, 1.5, -1.5, 1.5)))
    rows = tf_study(spec, tmp_path / "tf", quiet=True)
    sups = [r.sup_error for r in rows]
    assert sups[0] > sups[1] > sups[2]
    assert (tmp_path / "tf" / "tf_convergence.csv").exists()


def test_figure_presets_definitions():
    presets = figure_presets()
    assert set(presets) == {"v1-dipole", "v2-dipole", "v3-dipole", "v4-dipole"}
    v3 = presets["v3-dipole"]
    np.testing.assert_allclose(v3.config.positions, [[-0.01, 1.0], [0.01, 1.0]])
    np.testing.assert_array_equal(v3.config.degrees, [1, -1])


def test_cli_figures_and_detect(tmp_path):
    rc = main(["figures", "--preset", "v3-dipole", "--out", str(tmp_path / "figs"),
               "--quiet"])
    assert rc == 0
    assert (tmp_path / "figs" / "v3-dipole" / "trajectory.csv").exists()

    # detect subcommand on a stored field
    from vortexlab.core_profile import radial_core_profile
    from vortexlab.gp import build_initial_data
    from vortexlab.thomasfermi import uniform_profile
    grid = Grid2D.from_bounds(-1, 1, -1, 1, 96, 96)
    eta = uniform_profile(grid, 0.1)
    f = build_initial_data(VortexConfig([[0.2, -0.1]], [1]), 0.1,
                           radial_core_profile(), eta)
    field_path = tmp_path / "field.vlc"
    save_complex_field(field_path, grid, f.w)
    rc = main(["detect", "--field", str(field_path), "--out", str(tmp_path / "det"),
               "--quiet"])
    assert rc == 0
    lines = (tmp_path / "det" / "detections.csv").read_text().strip().split("\n")
    assert len(lines) == 2  # header + one vortex

    # errors exit with code 1
    rc = main(["detect", "--field", str(tmp_path / "missing.vlc"), "--quiet",
               "--out", str(tmp_path)])
    assert rc == 1


def test_cli_run_with_spec_file(tmp_path):
    path = tmp_path / "demo.cfg"
    path.write_text(SPEC_TEXT)
    rc = main(["run", "--spec", str(path), "--out", str(tmp_path / "runout"),
               "--quiet"])
    assert rc == 0
    assert (tmp_path / "runout" / "summary.json").exists()
