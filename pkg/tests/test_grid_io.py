import json
import math

import numpy as np
import pytest

from vortexlab.energy import interaction_hamiltonian
from vortexlab.errors import BadParams
from vortexlab.geometry import Domain, VortexConfig
from vortexlab.grid import (
    Grid2D, export_scalar_csv, load_scalar_field, save_scalar_field,
)
from vortexlab.potentials import builtin_potential
from vortexlab.thomasfermi import solve_thomas_fermi


def test_grid_geometry_cell_centered():
    g = Grid2D.from_bounds(0.0, 1.0, 0.0, 2.0, 10, 20)
    assert g.hx == pytest.approx(0.1)
    assert g.xs()[0] == pytest.approx(0.05)
    assert g.xs()[-1] == pytest.approx(0.95)
    assert g.integrate(np.ones(g.shape)) == pytest.approx(2.0)
    dom = g.domain()
    assert dom.bounds == pytest.approx((0.0, 1.0, 0.0, 2.0))


def test_scalar_field_roundtrip(tmp_path):
    g = Grid2D.from_bounds(-1, 1, -1, 1, 32, 24)
    rng = np.random.default_rng(1)
    field = rng.standard_normal(g.shape)
    path = tmp_path / "field.vlg"
    save_scalar_field(path, g, field)
    # magic bytes as documented
    assert path.read_bytes()[:7] == b"VLGRID1"
    g2, back = load_scalar_field(path)
    assert g2 == g
    np.testing.assert_array_equal(back, field)


def test_scalar_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.vlg"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(BadParams):
        load_scalar_field(path)


def test_scalar_csv_export(tmp_path):
    g = Grid2D.from_bounds(0, 1, 0, 1, 4, 4)
    export_scalar_csv(tmp_path / "f.csv", g, np.arange(16.0).reshape(4, 4))
    lines = (tmp_path / "f.csv").read_text().strip().split("\n")
    assert lines[0] == "x,y,value"
    assert len(lines) == 17


def test_grid_profile_max_principle_flag():
    g = Grid2D.from_bounds(-1.5, 1.5, -1.5, 1.5, 81, 81)
    from vortexlab.potentials import polynomial_bump_potential
    prof = solve_thomas_fermi(polynomial_bump_potential(0.4, 1.0).on_grid(g), 0.15, g)
    assert prof.max_principle_ok


def test_energy_breakdown_json_roundtrip():
    cfg = VortexConfig([[0.0, 0.5], [0.0, -0.5]], [1, -1])
    br = interaction_hamiltonian(cfg, Domain.plane(), builtin_potential("step"),
                                 eps=0.1, gamma0=1.2)
    blob = json.dumps(br.as_dict())
    back = json.loads(blob)
    assert back["h0"] == pytest.approx(br.w + br.background)
    assert back["h_eps"] - back["h0"] == pytest.approx(
        2 * (math.pi * abs(math.log(0.1)) + 1.2))
