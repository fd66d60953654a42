"""Every spec file shipped in specs/ parses and smoke-runs quickly."""
import pathlib
import time

import pytest

from vortexlab.harness import parse_spec, run, tf_study

SPEC_DIR = pathlib.Path(__file__).parent.parent / "specs"
SPEC_FILES = sorted(SPEC_DIR.glob("*.cfg"))


def test_spec_files_exist():
    names = {p.stem for p in SPEC_FILES}
    assert {"v1-dipole", "v2-dipole", "v3-dipole", "v4-dipole",
            "dipole-validation", "tf-study"} <= names


@pytest.mark.parametrize("path", SPEC_FILES, ids=lambda p: p.stem)
def test_spec_smoke_run(path, tmp_path):
    spec = parse_spec(path)
    t0 = time.time()
    if spec.name == "tf-study":
        # reduced resolution: largest eps only needs a 128-cell grid
        spec.pde.eps_list = (0.4, 0.2, 0.1)
        spec.pde.resolution = 128
        tf_study(spec, tmp_path, quiet=True)
    else:
        spec.pde = None  # reduced-dynamics smoke pass
        summary, _ = run(spec, tmp_path, quiet=True)
        assert summary["termination"] in ("reached_T", "collision")
    assert time.time() - t0 < 60
