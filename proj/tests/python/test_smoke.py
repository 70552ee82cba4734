import math
import os
from pathlib import Path

import pytest

import ergoloop

CONFIGS = Path(os.environ.get("ERGOLOOP_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def config(name):
    return ergoloop.load(CONFIGS / name)


def test_simulate_deterministic_map():
    points = ergoloop.simulate(config("deterministic.yaml"), iterations=3)
    assert len(points) == 4
    assert points[0] == [0.0]
    assert points[1:] == [[0.9], [pytest.approx(0.81)], [pytest.approx(0.729)]]


def test_contraction_of_linear_ifs():
    est = ergoloop.estimate_contraction(config("linear_ifs.yaml"))
    assert abs(est["c_hat"] - 0.375) <= 3 * est["std_error"]
    assert est["certificate"] == "contractive"


def test_expanding_loop_is_not_contractive():
    est = ergoloop.estimate_contraction(config("expanding.yaml"))
    assert est["certificate"] == "non-contractive"


def test_kde_single_sample():
    grid, density, h = ergoloop.kde([0.0], bandwidth=1.0, grid_points=513)
    assert h == 1.0
    peak = max(density)
    assert abs(peak - 1 / math.sqrt(2 * math.pi)) < 1e-12


def test_export_dot_topology():
    dot = ergoloop.export_dot(config("worked_relu.yaml"))
    assert dot.startswith("digraph G {\n")
    assert dot.count(" -> ") == 9


def test_fairness_report_sections():
    report = ergoloop.fairness(config("worked_pi.yaml"), trials=10)
    assert report["equal_treatment"]["trials"] == 10
    assert report["equal_impact"] is not None
    assert report["robustness"] is not None


def test_errors_carry_code():
    with pytest.raises(ergoloop.Error, match="SemanticError"):
        ergoloop.normalize_config("nodes: []\nedges: []\nstart: x\ncheckpoint: x\n")


def test_run_cli_round_trip():
    code, out, err = ergoloop.run_cli(["export-dot", "--config", str(CONFIGS / "linear_ifs.yaml")])
    assert code == 0
    assert err == ""
    assert out == ergoloop.export_dot(config("linear_ifs.yaml"))
