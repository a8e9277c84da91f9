import numpy as np
import pytest

from cccbvp.bvp import solve
from cccbvp.examples import get_example
from cccbvp.harness import (
    PROFILE_COLUMNS,
    ExperimentConfig,
    emit_profile,
    mesh_statistics,
    run_convergence,
    sample_points,
    sup_error,
)


def test_config_text_and_aliases(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# Example 2\nexample = 2\np = 100  # tension\nmethod = colloc, quasi\n"
                    "algorithms = deboor,green\nsubintervals_start = 10\ndoublings = 2\n")
    cfg = ExperimentConfig.load(path)
    assert cfg.p == 100.0 and cfg.methods == ["colloc", "quasi"] and cfg.algorithms == ["deboor", "green"]
    assert cfg.schedule == [10, 20, 40]


@pytest.mark.parametrize("pairs,exc", [
    (["example=9"], KeyError),
    (["p=0", "example=2"], ValueError),
    (["method=galerkin"], ValueError),
    (["algorithm=shooting"], ValueError),
    (["doublings=-1"], ValueError),
    (["nonsense=1"], ValueError),
    (["novalue"], ValueError),
])
def test_config_errors(pairs, exc):
    with pytest.raises(exc):
        ExperimentConfig.from_pairs(pairs)


def test_default_schedule_length():
    assert len(ExperimentConfig().schedule) == 14
    assert ExperimentConfig().schedule[-1] == 20 * 2 ** 13


def test_single_row_has_no_order():
    cfg = ExperimentConfig(example="1a", subintervals_start=20, doublings=0)
    rep = run_convergence(cfg)
    assert len(rep.rows) == 1 and rep.rows[0].n == 20 + 5 - 1
    line = rep.to_csv().splitlines()[1].split(",")
    assert line[rep.header().index("order_quasi_green")] == ""


def test_row_count_and_orders():
    cfg = ExperimentConfig(example="2", p=10.0, subintervals_start=20, doublings=3,
                           methods=["quasi"], algorithms=["deboor", "green"])
    rep = run_convergence(cfg)
    assert rep.n_values() == [23, 43, 83, 163]
    for a in ("deboor", "green"):
        o = rep.orders("quasi", a)
        assert len(o) == 3 and np.all((o > 1.9) & (o < 2.2))
    assert not any(r.unstable[("quasi", "deboor")] for r in rep.rows)


def test_csv_deterministic(tmp_path):
    cfg = ExperimentConfig(example="1a", subintervals_start=10, doublings=1, methods=["colloc", "quasi"])
    a = run_convergence(cfg).to_csv()
    b = run_convergence(cfg).to_csv(tmp_path / "out.csv")
    assert a == b == (tmp_path / "out.csv").read_text()
    assert "kappa_colloc" in a.splitlines()[0]


def test_mesh_statistics():
    ex = get_example("1a")
    st = mesh_statistics(ex.mv, np.linspace(0, 1, 5))
    assert st["h1"] == 0.25 and st["h2"] == pytest.approx(1.0)  # 2 sqrt(0.25)
    assert list(st) == ["h1", "h2", "h3", "h4", "h5"]


def test_sample_points_layer():
    mesh = np.linspace(0, 1, 11)
    x = sample_points(mesh, 20, scale=1e-4)
    assert 2.5e-5 in x and 1 - 8e-4 in x
    assert np.all(np.diff(x) > 0) and x[0] == 0 and x[-1] == 1
    assert np.all(np.isin(mesh, x))


def test_profile(tmp_path):
    ex = get_example("1a")
    h = solve(ex.problem, ex.mv, 20)
    text = emit_profile(h, ex.exact, tmp_path / "prof.csv")
    lines = text.splitlines()
    assert tuple(lines[0].split(",")) == PROFILE_COLUMNS
    data = np.loadtxt(tmp_path / "prof.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 3], np.abs(data[:, 1] - data[:, 2]))
    assert data[:, 3].max() <= sup_error(h, ex.exact)
    assert emit_profile(h, ex.exact) == text


def test_study_invariants_example_1a():
    rep = run_convergence(ExperimentConfig(example="1a", doublings=8, methods=["colloc", "quasi"]))
    assert rep.n_values() == [5 + s - 1 for s in rep.config.schedule]
    q, c = rep.errors("quasi", "green"), rep.errors("colloc", "green")
    assert np.all(np.diff(q) < 0) and np.all(np.diff(c) < 0)
    o = rep.orders("quasi", "green")[:7]
    assert np.all((o >= 1.95) & (o <= 2.05))
    assert np.all(c[:7] / c[1:8] >= 8)


def test_study_invariants_example_2():
    rep = run_convergence(ExperimentConfig(example="2", p=10.0, doublings=8, algorithms=["deboor", "green"]))
    for a in ("deboor", "green"):
        e = rep.errors("quasi", a)
        assert np.all(np.diff(e) < 0)
        o = rep.orders("quasi", a)[:7]
        assert np.all((o >= 1.95) & (o <= 2.05))
