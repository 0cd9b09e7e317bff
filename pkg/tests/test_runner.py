import json
import math

import numpy as np
import pytest

from pwmaxwell.mesh import Box
from pwmaxwell.runner import (
    SolutionRecord,
    emit_csv,
    load_solution,
    parse_config,
    run_experiment,
    save_solution,
    verify_config,
)

from helpers import UNIT_BOX

DOMAIN = {"min": [-0.5, -0.5, -0.5], "max": [0.5, 0.5, 0.5]}


def _config(**over):
    doc = {
        "domain": DOMAIN,
        "subdivisions": [1],
        "omega": "4pi",
        "epsilon": [1.0, 1.0],
        "q_list": [1],
        "variants": ["new"],
        "exact": {"kind": "plane_wave", "entry": 0},
    }
    doc.update(over)
    return doc


def test_parse_config_defaults_and_omega_forms():
    cfg = parse_config(_config())
    assert abs(cfg.omega - 4 * math.pi) <= 1e-12
    assert cfg.epsilon_spec == ("constant", 1 + 1j)
    assert cfg.metric == "l2"
    assert cfg.variants == ("new",)
    assert cfg.solver.method == "direct"
    assert parse_config(_config(omega=7)).omega == 7.0
    assert abs(parse_config(_config(omega="0.5pi")).omega - 0.5 * math.pi) <= 1e-15
    # JSON text and dict input are interchangeable
    assert parse_config(json.dumps(_config())).omega == cfg.omega


def test_parse_config_layered_epsilon():
    regions = {"regions": [
        {"box": {"min": [-0.5, -0.5, 0.0], "max": [0.5, 0.5, 0.5]}, "value": [1, 1]},
        {"box": {"min": [-0.5, -0.5, -0.5], "max": [0.5, 0.5, 0.0]}, "value": [2, 2]},
    ]}
    cfg = parse_config(_config(
        subdivisions=[2], epsilon=regions,
        exact={"kind": "dipole", "epsilon": [1, 1]}))
    assert cfg.epsilon_spec[0] == "regions"
    assert cfg.exact.dipole.epsilon == 1 + 1j


@pytest.mark.parametrize("mutation,match", [
    ({"omega": "about 4pi"}, "omega"),
    ({"omega": -3}, "positive"),
    ({"q_list": []}, "q_list"),
    ({"q_list": [0]}, "q"),
    ({"subdivisions": []}, "subdivisions"),
    ({"variants": ["fancy"]}, "variants"),
    ({"exact": {"kind": "warp"}}, "unknown exact kind"),
    ({"exact": {"kind": "custom_g", "name": "nope"}}, "custom_g"),
    ({"exact": {"kind": "reference_file"}}, "path"),
    ({"metric": "h1"}, "metric"),
    ({"quadrature_override": 0}, "quadrature_override"),
    ({"solver": "direct"}, "solver"),
    ({"epsilon": {"regions": []}}, "empty"),
    ({"mu": 2.0, "exact": {"kind": "dipole"}}, "mu = 1"),
])
def test_parse_config_rejects(mutation, match):
    with pytest.raises(ValueError, match=match):
        parse_config(_config(**mutation))


def test_parse_config_missing_field():
    doc = _config()
    del doc["epsilon"]
    with pytest.raises(ValueError, match="epsilon"):
        parse_config(doc)


def test_dipole_inside_domain_rejected():
    with pytest.raises(ValueError, match="inside the domain"):
        parse_config(_config(exact={"kind": "dipole", "location": [0.0, 0.0, 0.0]}))


def test_layered_dipole_needs_ambient_epsilon():
    regions = {"regions": [
        {"box": {"min": [-0.5, -0.5, -0.5], "max": [0.5, 0.5, 0.5]}, "value": [2, 2]},
    ]}
    with pytest.raises(ValueError, match="ambient"):
        parse_config(_config(epsilon=regions, exact={"kind": "dipole"}))
    with pytest.raises(ValueError, match="constant"):
        parse_config(_config(epsilon=regions, exact={"kind": "trig"}))


def test_save_solution_placeholders_required():
    doc = _config(subdivisions=[1, 2], save_solution="sol.npz")
    with pytest.raises(ValueError, match="placeholders"):
        parse_config(doc)


def test_solution_roundtrip(tmp_path):
    rng = np.random.default_rng(70)
    X = rng.standard_normal(64) + 1j * rng.standard_normal(64)  # n=2, q=1
    rec = SolutionRecord(domain=UNIT_BOX, n=2, q=1, omega=4 * math.pi, mu=1.0,
                         epsilon_spec=("constant", 1 + 1j), X=X)
    path = tmp_path / "sol.npz"
    save_solution(path, rec)
    back = load_solution(path)
    assert np.array_equal(back.X, X)
    assert back.n == 2 and back.q == 1
    assert back.epsilon_spec == ("constant", 1 + 1j)
    # compatible expectation passes, a different omega is refused
    load_solution(path, expect={"omega": 4 * math.pi, "domain": UNIT_BOX})
    with pytest.raises(ValueError, match="omega"):
        load_solution(path, expect={"omega": 8 * math.pi})
    with pytest.raises(ValueError, match="epsilon_spec"):
        load_solution(path, expect={"epsilon_spec": ("constant", 2 + 2j)})
    with pytest.raises(FileNotFoundError):
        load_solution(tmp_path / "missing.npz")


def test_solution_shape_consistency(tmp_path):
    bad = SolutionRecord(domain=UNIT_BOX, n=2, q=1, omega=4 * math.pi, mu=1.0,
                         epsilon_spec=("constant", 1 + 1j),
                         X=np.zeros(10, dtype=complex))
    path = tmp_path / "bad.npz"
    save_solution(path, bad)
    with pytest.raises(ValueError, match="inconsistent"):
        load_solution(path)


def _strip_timing(csv_text):
    out = []
    for i, line in enumerate(csv_text.strip().split("\n")):
        cells = line.split(",")
        if i > 0:
            cells[9] = cells[10] = "0"
        out.append(",".join(cells))
    return "\n".join(out)


def test_manufactured_sweep_and_csv_determinism(tmp_path):
    cfg = parse_config(_config(subdivisions=[1, 2], variants=["new", "old"]))
    rows = run_experiment(cfg)
    assert [(r.variant, r.q, r.n_elements) for r in rows] == [
        ("new", 1, 1), ("new", 1, 8), ("old", 1, 1), ("old", 1, 8)]
    for r in rows:
        assert r.status == "ok"
        assert r.error <= 1e-8  # the exact field lies in the basis span
        assert r.dofs == 2 * r.p * r.n_elements
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    emit_csv(rows, p1)
    emit_csv(run_experiment(cfg), p2)
    assert p1.read_text().startswith(
        "variant,omega,q,p,h,n_elements,dofs,rel_l2_error,residual,"
        "assembly_seconds,solve_seconds,regularization_used,status")
    assert _strip_timing(p1.read_text()) == _strip_timing(p2.read_text())


def test_threads_preserve_sweep_order():
    cfg = parse_config(_config(subdivisions=[1, 2], variants=["new", "old"]))
    seq = run_experiment(cfg, threads=1)
    par = run_experiment(cfg, threads=3)
    assert [(r.variant, r.n_elements) for r in par] == [(r.variant, r.n_elements) for r in seq]
    assert all(a.error == b.error for a, b in zip(seq, par))


def test_failed_triple_is_recorded_not_raised():
    # n=2 cannot reach 1e-14 in one iteration; n=1 can (its single diagonal
    # block is the whole matrix, so the preconditioner solve is exact)
    cfg = parse_config(_config(
        subdivisions=[2, 1],
        solver={"method": "pcg", "pcg_tol": 1e-14, "pcg_max_iter": 1}))
    rows = run_experiment(cfg)
    assert len(rows) == 2
    assert rows[0].status.startswith("failed:")
    assert math.isnan(rows[0].error)
    assert rows[1].status == "ok"


def test_custom_g_has_no_error_metric(tmp_path):
    cfg = parse_config(_config(exact={"kind": "custom_g", "name": "linear_xyz"}))
    rows = run_experiment(cfg)
    assert rows[0].status == "ok"
    assert math.isnan(rows[0].error)
    out = tmp_path / "g.csv"
    emit_csv(rows, out)
    assert "nan" in out.read_text()


def test_trig_experiment_produces_finite_error():
    cfg = parse_config(_config(subdivisions=[2], q_list=[2], exact={"kind": "trig"}))
    rows = run_experiment(cfg)
    assert rows[0].status == "ok"
    assert 0.0 < rows[0].error < 1.0


def test_vertex_metric_column_and_value(tmp_path):
    cfg = parse_config(_config(metric="vertex"))
    rows = run_experiment(cfg)
    assert rows[0].error <= 1e-8
    out = tmp_path / "v.csv"
    emit_csv(rows, out, metric="vertex")
    assert "vertex_error" in out.read_text().split("\n")[0]


def test_reference_file_self_convergence(tmp_path):
    sol = tmp_path / "ref_{variant}_{q}_{n}.npz"
    fine = parse_config(_config(
        subdivisions=[2], q_list=[2],
        exact={"kind": "dipole"},
        save_solution=str(sol)))
    fine_rows = run_experiment(fine)
    assert fine_rows[0].status == "ok"
    stored = tmp_path / "ref_new_2_2.npz"
    assert stored.exists()

    coarse = parse_config(_config(
        subdivisions=[1], q_list=[2],
        exact={"kind": "reference_file", "path": str(stored)}))
    rows = run_experiment(coarse)
    assert rows[0].status == "ok"
    assert 0.0 < rows[0].error < 1.0

    # errors against a stored solution of the same triple vanish
    same = parse_config(_config(
        subdivisions=[2], q_list=[2],
        exact={"kind": "dipole"},
        error_reference=str(stored)))
    same_rows = run_experiment(same)
    assert same_rows[0].error <= 1e-12


def test_reference_file_metadata_guard(tmp_path):
    sol = tmp_path / "ref.npz"
    fine = parse_config(_config(
        subdivisions=[1], exact={"kind": "dipole"}, save_solution=str(sol)))
    run_experiment(fine)
    other = parse_config(_config(
        subdivisions=[1], omega="8pi",
        exact={"kind": "reference_file", "path": str(sol)}))
    with pytest.raises(ValueError, match="omega"):
        run_experiment(other)


def test_verify_config_passes():
    cfg = parse_config(_config(subdivisions=[2], q_list=[1]))
    checks = verify_config(cfg)
    assert len(checks) >= 5
    for name, ok, detail in checks:
        assert ok, f"{name}: {detail}"


def test_emit_csv_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "empty.csv")


def test_box_parse_errors():
    with pytest.raises(ValueError, match="box"):
        parse_config(_config(domain={"min": [0, 0, 0]}))
    with pytest.raises(ValueError, match="region"):
        parse_config(_config(epsilon={"regions": [{"value": [1, 1]}]}))
