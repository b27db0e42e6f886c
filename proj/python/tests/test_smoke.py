import math

import numpy as np
import pytest

import nnpde

TINY = """
name = tiny
problem = linear
dimension = 2
topology = 2,8,8,1
theta = pi/6
lambda = 0.3333333333333333
interior_target = 27
test_count = 300

[phase]
order = 4
delta0 = 2e-4
interval = 10, 5, reset

[phase]
order = 2
delta0 = 2e-5
interval = 5, 0
"""


def test_slot_counts():
    assert [nnpde.slot_count(5, s) for s in (4, 3, 2)] == [99, 77, 55]


def test_presets():
    names = nnpde.preset_names()
    assert "2d-linear" in names and "5d-linear-cubic" in names
    assert "interval = 160, 15, reset" in nnpde.preset("2d-nonlinear")
    with pytest.raises(nnpde.ConfigError):
        nnpde.preset("9d-linear")


def test_analytic_solution_and_source():
    x = np.array([[0.5], [0.5]])
    assert nnpde.analytic_solution(x)[0] == pytest.approx(0.49065200574982031911, rel=1e-14)
    assert nnpde.source(np.zeros((2, 1)))[0] == pytest.approx(20 / 17)
    u = nnpde.analytic_solution(x)[0]
    assert nnpde.source(x, kind="nonlinear")[0] - nnpde.source(x)[0] == pytest.approx(u * u)


def test_grid_counts():
    coords, surface = nnpde.grid(2, math.pi / 6, 1 / 3, seed=1, interior_target=27)
    assert coords.shape == (2, 40)
    assert sum(surface) == 13
    assert np.allclose(np.linalg.norm(coords[:, :13], axis=0), 1.0)


def test_gradient_check():
    for order in (2, 3, 4):
        assert nnpde.gradient_check(order=order)["max_rel_error"] <= 1e-5


def test_solve_and_validate(tmp_path):
    seen = []
    r = nnpde.solve(config=TINY, out=str(tmp_path), on_epoch=lambda e, p, c: seen.append(c))
    assert r["grid_points"] == 40 and r["epochs"] == 15 and len(seen) == 15
    assert all(math.isfinite(c) for c in seen)
    again = nnpde.validate(str(tmp_path / "weights.txt"), config=TINY)
    assert again["eps_max"] == r["eps_max"] and again["eps_median"] == r["eps_median"]
    v = nnpde.network_values(str(tmp_path / "weights.txt"), np.zeros((2, 3)))
    assert v.shape == (3,) and np.all(v == v[0])


def test_fd_and_cost_model():
    rows = nnpde.fd_convergence([1 / 16, 1 / 32])
    assert 3.4 <= rows[0]["max_error"] / rows[1]["max_error"] <= 4.6
    c = nnpde.cost_model()
    assert c["h"] == pytest.approx(0.008)
    assert c["seconds_5d"] == pytest.approx(3000, rel=0.05)
    with pytest.raises(ValueError):
        nnpde.cost_model(delta=0.0)
