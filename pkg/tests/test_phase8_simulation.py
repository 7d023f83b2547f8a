"""
tests/test_phase8_simulation.py
===============================
Phase 8: Configuration, registries, output files, the self-test suite and
the command line. Every command runs on a coarse mesh into a temporary
directory.
"""

import json
import os
import sys
import tempfile
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np

from core.config import (apply_overrides, config_hash, load_config, parse_complex,
                         parse_config_text, validate)
from core.exceptions import ConfigError
from core.models import ExperimentConfig, SweepRecord, SweepResult
from geometry.curves import make_circle
from geometry.mesh import make_mesh
from main import main
from simulation import export
from simulation.scenarios import (CASES, SCENES, build_scene_mesh, get_case, material_case,
                                  resolve_config, scene_config)
from simulation.selftest import run_selftest, selftest_report


def _raises(exc_type, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc_type as exc:
        return exc
    return None


def test_case_registry():
    """Registered cases resolve; unknown names list the alternatives."""
    assert set(CASES) == {"positive", "plasmonic", "reverse-plasmonic"}
    assert get_case("plasmonic") is CASES["plasmonic"]
    exc = _raises(ValueError, get_case, "metamaterial")
    assert exc is not None and "Available" in str(exc)
    print("  PASS: material case registry")


def test_scene_config():
    """Scenes fill shape, panels and k₋ on top of a base config."""
    config = scene_config("positive")
    assert config.shape == "teardrop" and config.panels == 50
    assert config.k_minus == SCENES["positive"]["k_minus"]
    assert scene_config("plasmonic").homotopy is True
    assert _raises(ValueError, scene_config, "vacuum") is not None
    print("  PASS: field scenes")


def test_resolve_config():
    """Homotopy defaults on for real negative ε̂ only; explicit values win."""
    plasmonic = resolve_config(ExperimentConfig(case="plasmonic"))
    positive = resolve_config(ExperimentConfig(case="positive"))
    assert plasmonic.homotopy is True and positive.homotopy is False
    assert plasmonic.k_hat == CASES["plasmonic"].k_hat
    assert resolve_config(ExperimentConfig(case="plasmonic", homotopy=False)).homotopy is False
    print("  PASS: config resolution")


def test_material_case():
    """Custom k̂, ε̂ pairs are labelled custom unless they match the named case."""
    custom = material_case(ExperimentConfig(case=None, k_hat=1.5, eps_hat=2.25))
    assert custom.name == "custom" and custom.k_hat == 1.5 and custom.sweep_variable == "k_minus"
    exc = _raises(ConfigError, material_case, ExperimentConfig(k_hat=1.5))
    assert exc is not None and exc.field == "eps_hat"
    exc = _raises(ConfigError, material_case, ExperimentConfig(eps_hat=2.0))
    assert exc is not None and exc.field == "k_hat"
    exc = _raises(ConfigError, material_case, ExperimentConfig(case="glass"))
    assert exc is not None and exc.field == "case"

    relabelled = resolve_config(ExperimentConfig(k_hat=2.0, eps_hat=3.0))
    assert relabelled.case == "custom" and relabelled.k_hat == 2.0 and relabelled.eps_hat == 3.0
    assert resolve_config(relabelled).case == "custom"
    matching = material_case(ExperimentConfig(case="positive", k_hat=1.5, eps_hat=2.25))
    assert matching is CASES["positive"]
    labelled = material_case(ExperimentConfig(case="gold", k_hat=0.5j, eps_hat=-4.0))
    assert labelled.name == "gold"

    print("  PASS: material case selection")


def test_parse_config_text():
    """Comments, aliases and complex literals; errors carry line and field."""
    config = parse_config_text(
        "# disk run\n"
        "shape = circle\n"
        "\n"
        "panels = 12   # coarse\n"
        "k-minus = 5+0.1i\n"
        "direction = south-west\n"
        "homotopy = none\n"
    )
    assert config.shape == "circle" and config.panels == 12
    assert config.k_minus == 5 + 0.1j
    assert abs(config.direction - np.pi / 4) < 1e-15 and config.homotopy is None

    exc = _raises(ConfigError, parse_config_text, "panels = 12\ncolour = red\n")
    assert exc is not None and exc.line == 2 and exc.field == "colour"
    exc = _raises(ConfigError, parse_config_text, "panels = twelve\n")
    assert exc is not None and exc.line == 1 and exc.field == "panels"
    exc = _raises(ConfigError, parse_config_text, "shape circle\n")
    assert exc is not None and exc.line == 1
    exc = _raises(ConfigError, parse_config_text, "solver = lsqr\n")
    assert exc is not None and exc.field == "solver"
    assert parse_complex("2 - 3i") == 2 - 3j
    print("  PASS: config file parsing")


def test_overrides_and_validation():
    """Overrides apply in order; range checks name the field."""
    config = apply_overrides(ExperimentConfig(), ["panels=8", "panels=10", "muller=yes"])
    assert config.panels == 10 and config.muller is True
    assert _raises(ConfigError, apply_overrides, config, ["panels"]) is not None

    for key, value in (("panels", "3"), ("kmin", "30"), ("homotopy_ratio", "1.5"),
                       ("gmres_tol", "1e-20"), ("workers", "0")):
        exc = _raises(ConfigError, validate, apply_overrides(ExperimentConfig(), [f"{key}={value}"]))
        assert exc is not None, f"{key}={value} accepted"
    exc = _raises(ConfigError, load_config, None, ["samples=0"])
    assert exc is not None and exc.field == "samples"
    print("  PASS: overrides and validation")


def test_load_config_file():
    """File first, then overrides; a missing file is a ConfigError."""
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "run.cfg")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("shape = starfish\npanels = 20\n")
        config = load_config(path, ["panels=24"])
        assert config.shape == "starfish" and config.panels == 24
        assert _raises(ConfigError, load_config, os.path.join(tmp, "missing.cfg")) is not None
    print("  PASS: config file loading")


def test_config_hash():
    """Hash is stable and changes with any field."""
    a = ExperimentConfig()
    assert config_hash(a) == config_hash(ExperimentConfig())
    assert config_hash(a) != config_hash(apply_overrides(a, ["panels=33"]))
    assert config_hash(a) != config_hash(apply_overrides(a, ["k_minus=5+1e-9i"]))
    assert len(config_hash(a)) == 64
    print("  PASS: config hash")


def test_build_scene_mesh():
    """Grading is applied to cornered shapes only; unknown shapes name the field."""
    teardrop = build_scene_mesh(ExperimentConfig(shape="teardrop", panels=8, refine=3))
    circle = build_scene_mesh(ExperimentConfig(shape="circle", panels=8, refine=3))
    assert teardrop.n_panels == 14 and circle.n_panels == 8
    assert build_scene_mesh(ExperimentConfig(panels=8), panels=12).n_panels == 12
    exc = _raises(ConfigError, build_scene_mesh, ExperimentConfig(shape="ellipse"))
    assert exc is not None and exc.field == "shape"
    print("  PASS: scene meshes")


def test_to_jsonable():
    """Complex and numpy values become plain JSON types."""
    value = export.to_jsonable({"z": 1 + 2j, "a": np.array([1.0, 2.0]), "n": np.int64(3),
                                "b": np.bool_(True), 4: (np.complex128(0.5j),)})
    assert value == {"z": [1.0, 2.0], "a": [1.0, 2.0], "n": 3, "b": True, "4": [[0.0, 0.5]]}
    json.dumps(value)
    print("  PASS: JSON conversion")


def test_sweep_csv_round_trip():
    """Sweep rows and the provenance header survive a write and read."""
    config = ExperimentConfig()
    mesh = make_mesh(make_circle(1.0), 4)
    result = SweepResult(case="positive", k_hat=1.5, eps_hat=2.25, records=[
        SweepRecord(k_minus=0.5 + 0j, cond_2=3.25, sigma_min=0.125, gmres_iters=7),
        SweepRecord(k_minus=1.0 + 0j, cond_2=1e6, sigma_min=1e-6, flag=True),
    ])
    record = export.provenance(config, mesh, command="sweep")
    with tempfile.TemporaryDirectory() as tmp:
        path = export.write_sweep_csv(os.path.join(tmp, "out", "sweep.csv"), result, record)
        header_record, header, rows = export.read_csv(path)
    assert header == export.SWEEP_HEADER.split(",")
    assert header_record["config_hash"] == config_hash(config)
    assert header_record["mesh"]["panels"] == 4 and header_record["command"] == "sweep"
    assert float(rows[0][2]) == 3.25 and rows[0][4] == "7" and rows[0][5] == "0"
    assert rows[1][4] == "" and rows[1][5] == "1"
    print("  PASS: sweep CSV")


def test_matrix_file():
    """Binary matrix layout reads back; a foreign file is refused."""
    matrix = np.arange(6, dtype=complex).reshape(2, 3) * (1 - 2j)
    with tempfile.TemporaryDirectory() as tmp:
        path = export.write_matrix(os.path.join(tmp, "A.bin"), matrix, {"tag": "test"})
        loaded, record = export.read_matrix(path)
        assert np.array_equal(loaded, matrix) and record == {"tag": "test"}
        bogus = os.path.join(tmp, "bogus.bin")
        with open(bogus, "wb") as handle:
            handle.write(b"NOTAMATRIX" + bytes(40))
        exc = _raises(ValueError, export.read_matrix, bogus)
        assert exc is not None and "not a matrix file" in str(exc)
    print("  PASS: matrix file")


def test_selftest_subset():
    """Quick checks pass; the injected E_k fault is caught."""
    results = run_selftest(only=["clifford", "figure-eight", "well-posedness-table",
                                 "parameter-identity"])
    assert [r.name for r in results] == ["clifford", "figure-eight", "well-posedness-table",
                                         "parameter-identity"]
    assert all(r.passed for r in results), [r.detail for r in results if not r.passed]

    faulty = run_selftest(fault="ek-row2", only=["ek-involution"])
    assert not faulty[0].passed, faulty[0].detail
    report = selftest_report(faulty, fault="ek-row2")
    assert report["passed"] is False and report["fault"] == "ek-row2"

    assert _raises(ValueError, run_selftest, fault="flip-everything") is not None
    assert _raises(ValueError, run_selftest, only=["speed"]) is not None
    print("  PASS: self-test suite")


def test_selftest_scene_checks_pass():
    """Without a fault the involution and disk-scene checks pass."""
    results = run_selftest(only=["ek-involution", "disk-scene"])
    assert [r.name for r in results] == ["ek-involution", "disk-scene"]
    assert all(r.passed for r in results), [r.detail for r in results if not r.passed]
    report = selftest_report(results)
    assert report["passed"] is True and report["fault"] is None
    print("  PASS: self-test scene checks")



def test_cli_params():
    """params prints both dimensions; missing input is a usage error."""
    assert main(["params", "--case", "plasmonic"]) == 0
    assert main(["params", "--k-hat", "1.5", "--eps-hat", "2.25"]) == 0
    try:
        main(["params", "--k-hat", "1.5"])
    except SystemExit as exc:
        assert exc.code == 2
    else:
        raise AssertionError("Expected SystemExit(2)")
    assert main(["params", "--k-hat", "-1", "--eps-hat", "2"]) == 2
    print("  PASS: params command")


def test_cli_selftest_report():
    """selftest --only writes a passing JSON report."""
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "selftest.json")
        assert main(["selftest", "--only", "clifford", "--report", path]) == 0
        with open(path, encoding="utf-8") as handle:
            report = json.load(handle)
    assert report["passed"] is True and report["checks"][0]["name"] == "clifford"
    print("  PASS: selftest command")


def test_cli_sweep():
    """A coarse sweep writes one CSV row per sample."""
    with tempfile.TemporaryDirectory() as tmp:
        code = main(["sweep", "--shape", "circle", "--panels", "4", "--kmax", "2",
                     "--samples", "3", "--output-dir", tmp])
        assert code == 0
        record, _, rows = export.read_csv(os.path.join(tmp, "sweep_circle_positive.csv"))
    assert len(rows) == 3 and record["sweep_variable"] == "k_minus"
    assert np.allclose([float(row[0]) for row in rows], [2.0 / 3.0, 4.0 / 3.0, 2.0], rtol=1e-15)
    print("  PASS: sweep command")


def test_cli_scatter():
    """A coarse disk scatter writes density, traces, grid and report."""
    with tempfile.TemporaryDirectory() as tmp:
        code = main(["scatter", "--shape", "circle", "--panels", "8", "--k-minus", "2",
                     "--nx", "9", "--ny", "9", "--output-dir", tmp])
        assert code == 0
        stem = os.path.join(tmp, "scatter_circle_positive")
        for suffix in ("_density.csv", "_traces.csv", "_grid.json", "_grid.bin", "_report.json"):
            assert os.path.exists(stem + suffix), f"missing {suffix}"
        meta, U, region = export.read_grid(stem + "_grid")
        with open(stem + "_report.json", encoding="utf-8") as handle:
            report = json.load(handle)
    assert U.shape == (9, 9) and region.shape == (9, 9) and meta["nx"] == 9
    assert report["status"] == "converged" and report["gmres_iterations"] is None
    assert report["error"]["reference"] == "oracle"
    assert report["provenance"]["command"] == "scatter"
    print("  PASS: scatter command")


def test_cli_errors():
    """Configuration and geometry problems exit with code 2."""
    with tempfile.TemporaryDirectory() as tmp:
        assert main(["corner", "--shape", "circle", "--output-dir", tmp]) == 2
        assert main(["sweep", "--set", "bogus=1", "--output-dir", tmp]) == 2
        assert main(["scatter", "--panels", "2", "--output-dir", tmp]) == 2
        assert main(["sweep", "--case", "glass", "--output-dir", tmp]) == 2
    print("  PASS: error exit codes")


if __name__ == "__main__":
    print("=== Phase 8: Simulation ===")
    test_case_registry()
    test_scene_config()
    test_resolve_config()
    test_material_case()
    test_parse_config_text()
    test_overrides_and_validation()
    test_load_config_file()
    test_config_hash()
    test_build_scene_mesh()
    test_to_jsonable()
    test_sweep_csv_round_trip()
    test_matrix_file()
    test_selftest_subset()
    test_selftest_scene_checks_pass()
    test_cli_params()
    test_cli_selftest_report()
    test_cli_sweep()
    test_cli_scatter()
    test_cli_errors()
    print("All Phase 8 tests passed.\n")
