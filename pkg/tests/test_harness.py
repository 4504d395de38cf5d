import json
import math
from pathlib import Path

import pytest

from torsionlab.harness import (
    ConfigError,
    load_config,
    main,
    parse_config_text,
    validate_config,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


RADIAL_IDENTITIES = """
experiment = "identities"
seed = 0
domain.outer_radius = 1.0
domain.holes = [[0.0, 0.0, 0.2, -0.24]]
field.kind = "radial"
quadrature.n_theta = 256
quadrature.n_r = 48
tolerances.identity_rel = 1e-8
"""

SWEEP_EPS = """
experiment = "cauchy-stability"
seed = 3
domain.outer_radius = 1.0
domain.holes = [[0.4, 0.0, 0.1, 0.0]]
field.kind = "overdetermined"
sweep.axis = "eps"
sweep.values = [0.01, 0.02]
quadrature.n_theta = 192
quadrature.n_r = 32
tolerances.growth_samples = 2000
"""

SWEEP_RADIAL = """
experiment = "cauchy-stability"
seed = 1
field.kind = "radial"
sweep.axis = "hole_radius"
sweep.values = [0.05, 0.1, 0.2]
quadrature.n_theta = 192
quadrature.n_r = 32
tolerances.growth_samples = 2000
"""

SHAPEFLOW = """
experiment = "shapeflow"
domain.outer_radius = 1.0
domain.modes = [[3, 0.05]]
"""


# ---------------------------------------------------------------------------
# Config parsing and validation
# ---------------------------------------------------------------------------


def test_parse_key_tree():
    tree = parse_config_text("a.b = 1\na.c = [1, 2]\nd = \"x\"  # comment\n")
    assert tree == {"a": {"b": 1, "c": [1, 2]}, "d": "x"}


def test_parse_rejects_bad_json():
    with pytest.raises(ConfigError):
        parse_config_text("a = not json")


def test_validate_rejects_unknown_experiment():
    with pytest.raises(ConfigError, match="experiment"):
        validate_config({"experiment": "nope"})


def test_validate_rejects_unsorted_sweep():
    tree = parse_config_text(SWEEP_EPS.replace("[0.01, 0.02]", "[0.02, 0.01]"))
    with pytest.raises(ConfigError, match="sweep.values"):
        validate_config(tree)


def test_validate_names_field_path():
    tree = parse_config_text("experiment = \"identities\"\nquadrature.n_theta = 63\n")
    with pytest.raises(ConfigError, match="quadrature.n_theta"):
        validate_config(tree)


def test_missing_config_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.cfg")


def test_shipped_configs_validate():
    configs = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))
    assert len(configs) >= 6
    for cfg in configs:
        assert main(["validate", str(cfg)]) == 0, cfg.name


def test_cauchy_literal_sweep_reports_continuation_failure(tmp_path, capsys):
    # the pure-continuation family cannot satisfy the overdetermined condition
    # on a non-circular curve; the sweep surfaces that as a numeric failure
    # (exit 1) carrying the measured residual, never silently passes
    text = """
experiment = "cauchy-stability"
domain.outer_radius = 1.0
domain.holes = [[0.4, 0.0, 0.1, 0.0]]
field.kind = "cauchy-literal"
cauchy.k = 3
sweep.axis = "eps"
sweep.values = [0.02]
"""
    cfg = write(tmp_path, "literal.cfg", text)
    rc = main(["sweep", cfg, "--out", str(tmp_path / "out")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "continuation failed" in err
    assert "max residual" in err


def test_invalid_poincare_triple_is_config_error(tmp_path, capsys):
    text = """
experiment = "poincare"
domain.outer_radius = 1.0
poincare.triples = [[4, 2, 0.0]]
"""
    cfg = write(tmp_path, "poinc_bad.cfg", text)
    rc = main(["run", cfg, "--out", str(tmp_path / "out")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "poincare.triples[0]" in err
    assert "p(1-alpha) < N" in err  # the violated condition is named


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_radial_identities(tmp_path, capsys):
    cfg = write(tmp_path, "radial.cfg", RADIAL_IDENTITIES)
    rc = main(["run", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    for entry in report["results"]["identities"]:
        assert entry["rel_residual"] <= 1e-8
    assert (tmp_path / "out" / "tables" / "identities.csv").exists()
    assert (tmp_path / "out" / "schema.json").exists()
    assert report["environment"]["kernel_backend"] in ("numba", "numpy")


def test_run_rejects_invalid_domain(tmp_path, capsys):
    bad = RADIAL_IDENTITIES.replace("[[0.0, 0.0, 0.2, -0.24]]", "[[0.9, 0.0, 0.3, -0.1]]")
    cfg = write(tmp_path, "bad.cfg", bad)
    rc = main(["run", cfg, "--out", str(tmp_path / "out")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "not strictly inside" in err


def test_run_shapeflow_trajectory_monotone(tmp_path):
    cfg = write(tmp_path, "flow.cfg", SHAPEFLOW)
    rc = main(["run", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    lines = (tmp_path / "out" / "tables" / "trajectory.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    std_col = header.index("u_nu_std")
    stds = [float(row.split(",")[std_col]) for row in lines[1:]]
    assert all(b <= a + 1e-12 for a, b in zip(stds, stds[1:]))
    # the radius gap column tracks the shape rounding out
    gap_col = header.index("rho_gap")
    gaps = [float(row.split(",")[gap_col]) for row in lines[1:]]
    assert gaps[-1] < gaps[0]


def test_run_report_serializes_field_model(tmp_path):
    cfg = write(tmp_path, "radial.cfg", RADIAL_IDENTITIES)
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    model = report["results"]["field_model"]
    assert set(model) >= {"anchor", "sources", "coefficients", "ring_constants"}
    from torsionlab.solver import FieldModel, evaluate_u, radial_annulus_model

    clone = FieldModel.from_dict(model)
    oracle = radial_annulus_model(1.0, 0.2, -0.24)
    pts = [(0.5, 0.0), (0.0, -0.7), (0.3, 0.3)]
    for pt in pts:
        assert abs(evaluate_u(clone, pt) - evaluate_u(oracle, pt)) <= 1e-12


def test_validate_command(tmp_path):
    cfg = write(tmp_path, "radial.cfg", RADIAL_IDENTITIES)
    assert main(["validate", cfg]) == 0


def test_run_numeric_failure_exits_one(tmp_path, capsys):
    # an unreachable tolerance on a generic solve: assertions fail -> exit 1
    text = """
experiment = "identities"
domain.outer_radius = 1.0
domain.modes = [[3, 0.1]]
domain.holes = [[0.3, 0.1, 0.15, -0.05]]
field.kind = "dirichlet"
quadrature.n_theta = 128
quadrature.n_r = 24
tolerances.identity_rel = 1e-30
"""
    cfg = write(tmp_path, "strict.cfg", text)
    rc = main(["run", cfg, "--out", str(tmp_path / "out")])
    assert rc == 1
    captured = capsys.readouterr()
    assert "first failure" in captured.err
    assert "rel_residual" in captured.err  # the witness names the measured value


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_radial_family_zero_lhs(tmp_path):
    cfg = write(tmp_path, "radial_sweep.cfg", SWEEP_RADIAL)
    rc = main(["sweep", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    lines = (tmp_path / "out" / "tables" / "instances.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    for row in lines[1:]:
        vals = dict(zip(header, row.split(",")))
        assert float(vals["pseudo_distance"]) <= 1e-10
        assert float(vals["asymmetry"]) <= 1e-6
        assert float(vals["rho_gap"]) <= 1e-8


def test_sweep_eps_family_constants(tmp_path):
    cfg = write(tmp_path, "sweep.cfg", SWEEP_EPS)
    rc = main(["sweep", cfg, "--out", str(tmp_path / "out")])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    fitted = report["results"]["fitted_constants"]
    assert fitted and all(math.isfinite(v) for v in fitted.values())
    summary = (tmp_path / "out" / "tables" / "summary.csv").read_text()
    assert "fitted" in summary and "slope" in summary


def test_sweep_requires_axis_and_values(tmp_path, capsys):
    cfg = write(tmp_path, "noaxis.cfg", SWEEP_EPS.replace('sweep.axis = "eps"\n', ""))
    assert main(["sweep", cfg, "--out", str(tmp_path / "o1")]) == 2
    cfg2 = write(tmp_path, "empty.cfg", SWEEP_EPS.replace("[0.01, 0.02]", "[]"))
    assert main(["sweep", cfg2, "--out", str(tmp_path / "o2")]) == 2


def test_sweep_determinism_byte_identical(tmp_path):
    cfg = write(tmp_path, "sweep.cfg", SWEEP_EPS)
    assert main(["sweep", cfg, "--out", str(tmp_path / "a"), "--seed", "5"]) == 0
    assert main(["sweep", cfg, "--out", str(tmp_path / "b"), "--seed", "5"]) == 0
    for name in ("instances.csv", "summary.csv"):
        a = (tmp_path / "a" / "tables" / name).read_bytes()
        b = (tmp_path / "b" / "tables" / name).read_bytes()
        assert a == b


def test_sweep_worker_pool_preserves_determinism(tmp_path):
    # results funnel through one ordered writer, so thread count cannot
    # change the bytes
    cfg = write(tmp_path, "sweep.cfg", SWEEP_EPS)
    assert main(["sweep", cfg, "--out", str(tmp_path / "t1"), "--threads", "1"]) == 0
    assert main(["sweep", cfg, "--out", str(tmp_path / "t3"), "--threads", "3"]) == 0
    a = (tmp_path / "t1" / "tables" / "instances.csv").read_bytes()
    b = (tmp_path / "t3" / "tables" / "instances.csv").read_bytes()
    assert a == b


def test_schema_documents_every_column(tmp_path):
    cfg = write(tmp_path, "sweep.cfg", SWEEP_EPS)
    assert main(["sweep", cfg, "--out", str(tmp_path / "out")]) == 0
    schema = json.loads((tmp_path / "out" / "schema.json").read_text())
    for rel, columns in schema.items():
        csv_path = tmp_path / "out" / rel
        header = csv_path.read_text().splitlines()[0].split(",")
        assert set(header) == set(columns)
        assert all(isinstance(desc, str) and desc for desc in columns.values())


def test_report_numbers_are_finite(tmp_path):
    cfg = write(tmp_path, "sweep.cfg", SWEEP_EPS)
    assert main(["sweep", cfg, "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())

    def walk(node):
        if isinstance(node, dict):
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)
        elif isinstance(node, float):
            assert math.isfinite(node)

    walk(report["results"])
