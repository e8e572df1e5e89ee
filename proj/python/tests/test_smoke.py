import json
import math

import numpy as np
import pytest

import steadylab as sl


@pytest.fixture(scope="module")
def setup():
    lat = sl.Lattice(16)
    params = sl.PhysicalParams(nu=0.05, rho0=3.0, m_energy=1.0)
    f = sl.forcing(lat, 3.0, 5.0, 0.3, 7)
    return lat, params, f


def test_forcing_has_requested_x_norm(setup):
    _, _, f = setup
    assert f.norm("X") == pytest.approx(0.3, rel=1e-12)
    assert f.divergence_ratio() < 1e-12


def test_coefficients_round_trip(setup):
    lat, _, f = setup
    c = f.coefficients()
    assert c.shape == (3, 16, 16, 16)
    g = sl.Field.from_coefficients(lat, c)
    assert (f - g).norm() == 0.0


def test_physical_round_trip(setup):
    lat, _, f = setup
    p = f.physical()
    assert p.shape == (3, 16, 16, 16)
    assert np.isrealobj(p)
    g = sl.Field.from_physical(lat, p)
    assert (f - g).norm() <= 1e-13 * f.norm()


def test_l2_norm_matches_grid_sum(setup):
    lat, _, f = setup
    p = f.physical()
    grid = math.sqrt(np.sum(p * p) * lat.period**3 / 16**3)
    assert f.norm("L2") == pytest.approx(grid, rel=1e-12)


def test_heat_evolve_decays(setup):
    _, params, f = setup
    a = f.norm()
    b = sl.heat_evolve(f, params.nu, 0.1).norm()
    # every mode sits at |xi| >= 3
    assert b <= a * math.exp(-4 * math.pi**2 * params.nu * 9 * 0.1) * (1 + 1e-12)


def test_build_steady_is_a_fixed_point(setup):
    _, params, f = setup
    u, trace = sl.build_steady(f, params, tol_outer=1e-11, tol_inner=1e-13)
    assert trace["converged"]
    assert trace["bound_violations"] == 0
    assert trace["budget_violations"] == 0
    assert u.norm("H1dot") <= trace["gradient_bound"]
    assert sl.steady_residual(u, f, params.nu) < 1e-8


def test_decay_envelope_on_difference_run(setup):
    _, params, f = setup
    u, _ = sl.build_steady(f, params)
    tr = sl.evolve_difference(u, f, params, dt=5e-3, horizon=1.0, stride=4)
    assert len(tr["times"]) == len(tr["l2"])
    assert np.all(np.diff(tr["cumulative_enstrophy"]) >= 0)
    rep = sl.check_decay_envelope(tr["times"], tr["l2"])
    assert rep["holds"]


def test_checkpoint_round_trip(setup, tmp_path):
    _, _, f = setup
    path = tmp_path / "f.ssns"
    sl.save_checkpoint(f, str(path))
    g = sl.load_checkpoint(str(path))
    assert (f - g).norm() == 0.0


def test_bad_inputs_raise():
    with pytest.raises(sl.PreconditionError):
        sl.Lattice(7)
    with pytest.raises(sl.Error):
        sl.PhysicalParams(nu=-1.0)
    with pytest.raises(sl.ConfigError, match="did you mean 'physics.nu'"):
        sl.run_command("build-steady", "viscocity = 0.1\n", "/tmp/never")


def test_run_command_writes_manifest(tmp_path):
    man = sl.run_command("build-steady", "lattice.n = 16\n", str(tmp_path))
    assert man["command"] == "build-steady"
    assert man["passed"]
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["digest"] == man["digest"]
    assert "physics.nu" in sl.config_keys()
