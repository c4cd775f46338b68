import json
import math

import numpy as np
import pytest

from accretive_flows import (
    ExperimentConfig,
    check_accretive,
    check_full_modulus,
    evaluate_oracle,
    evaluate_semigroup,
    full_modulus_linear,
    make_quartic_well,
    make_spd_linear,
    norm,
    run_experiment,
    sample_graph_pairs,
    trajectory,
)
from accretive_flows.cli import parse_and_run, render_report
from accretive_flows.harness import _diameter


# ----------------------------------------------------------- diameter helper

def _brute_diameter(points):
    best = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = max(best, float(np.linalg.norm(points[i] - points[j])))
    return best


def test_diameter_exact_matches_brute_force(rng):
    for d in (1, 2, 3):
        pts = rng.normal(size=(60, d))
        got, mode = _diameter(pts)
        assert mode == "exact"
        assert got == pytest.approx(_brute_diameter(pts), abs=1e-12)


def test_diameter_upper_bound_mode_is_sound(rng):
    pts = rng.normal(size=(5000, 2))
    got, mode = _diameter(pts)
    assert mode == "centroid-upper-bound"
    assert got >= _brute_diameter(pts[::25]) - 1e-12  # bound dominates a subsample


def test_diameter_degenerate_cases():
    assert _diameter(np.zeros((1, 3))) == (0.0, "exact")
    assert _diameter(np.zeros((0, 2)))[0] == 0.0


# ------------------------------------------------- flow evaluation, multi-d

def test_evaluate_semigroup_spd_matches_oracle():
    op = make_spd_linear(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    x = np.array([1.0, -1.0])
    pt, err = evaluate_semigroup(op, x, 1.5, 0.05)
    assert err <= 0.05
    assert norm(pt - evaluate_oracle(op, x, 1.5)) <= err


def test_trajectory_quartic_matches_oracle_within_bounds():
    op = make_quartic_well()
    traj = trajectory(op, [3.0], [0.5, 1.0, 2.0], 0.1)
    for sample in traj.samples:
        exact = evaluate_oracle(op, [3.0], sample.t)
        assert norm(sample.point - exact) <= sample.err_bound


# ------------------------------------------------------------- sampling edge

def test_sampling_survives_heavy_rejection():
    # at bound 40 the slope cap confines x to |x| <= 1 + 10^(1/3): most draws
    # are rejected, the sampler keeps drawing
    op = make_quartic_well()
    pairs = sample_graph_pairs(op, seed=5, bound=40.0, count=100)
    assert len(pairs) == 100
    cap = 1.0 + (40.0 / 4.0) ** (1.0 / 3.0)
    for pair in pairs:
        assert abs(pair.x[0]) <= cap + 1e-9
        assert abs(pair.y[0]) <= 40.0 + 1e-12


def test_accretivity_report_truncates():
    class Anti:
        name = "anti"
        dim = 1

        def value_many(self, X):
            return -np.asarray(X, dtype=float)

    report = check_accretive(Anti(), n_samples=60, bound=2.0, tol=1e-9, seed=0,
                             max_reported=5)
    assert not report.passed
    assert len(report.violations) == 6  # 5 entries + truncation marker
    assert "truncated" in report.violations[-1]


def test_full_modulus_report_truncates():
    op = make_quartic_well()
    points = np.arange(-6.0, 6.0 + 5e-4, 1e-3)
    report = check_full_modulus(
        op, full_modulus_linear(), K=501, k_max=5, tol=1e-9, points=points,
        max_reported=3,
    )
    assert not report.passed
    markers = [v for v in report.violations if "truncated" in v]
    assert markers  # the grid produces far more than 3 violations per level


# ------------------------------------------------------------ config/report

def test_config_to_dict_round_trips_reports():
    raw = {
        "scenario": "nr",
        "operator": {"kind": "scaled-identity", "alpha": 1.0, "dim": 1},
        "initial_point": [2.0],
        "modulus": {"kind": "strongly-accretive", "a": 1},
        "k_range": [0, 2],
        "seed": 3,
    }
    cfg = ExperimentConfig.from_dict(raw)
    again = ExperimentConfig.from_dict(cfg.to_dict())
    a = render_report(run_experiment(cfg), "json")
    b = render_report(run_experiment(again), "json")
    assert a == b


def test_csv_for_metastability_rows(tmp_path):
    cfg = tmp_path / "meta.json"
    cfg.write_text(json.dumps({
        "scenario": "xu-meta",
        "operator": {"kind": "scaled-identity", "alpha": 1.0, "dim": 1},
        "initial_point": [2.0],
        "modulus": {"kind": "strongly-accretive", "a": 1},
        "almost_orbit": {"c": 1.0, "direction": [1.0]},
        "k_range": [0, 1],
        "counterfunctions": ["id", {"pow": 2}],
    }), encoding="utf-8")
    out = tmp_path / "meta.csv"
    assert parse_and_run(["certify-xu-meta", "--config", str(cfg),
                          "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 5  # header + 2 levels x 2 counterfunctions
    assert lines[1].split(",")[1] == "id"
    assert lines[2].split(",")[1] == "pow:2"


def test_unwritable_output_exits_two(tmp_path, capsys):
    cfg = tmp_path / "nr.json"
    cfg.write_text(json.dumps({
        "scenario": "nr",
        "operator": {"kind": "scaled-identity", "alpha": 1.0, "dim": 1},
        "initial_point": [2.0],
        "modulus": {"kind": "strongly-accretive", "a": 1},
        "k_range": [0, 1],
    }), encoding="utf-8")
    code = parse_and_run(["certify-nr", "--config", str(cfg),
                          "--out", str(tmp_path / "missing-dir" / "r.json")])
    assert code == 2
    assert "cannot write report" in capsys.readouterr().err


def test_scaled_identity_alpha_not_one_full_chain():
    # a = ceil(1/alpha) = 4 certifies alpha = 0.3
    from accretive_flows import (
        NRInputs, full_modulus_strongly_accretive, make_scaled_identity,
        orbit_cauchy_threshold, verify_cauchy_rate, weak_from_full,
    )

    op = make_scaled_identity(0.3, 2)
    weak = weak_from_full(full_modulus_strongly_accretive(4))
    report = check_full_modulus(
        op, full_modulus_strongly_accretive(4), K=6, k_max=6, tol=1e-9,
        n_samples=2000, seed=9,
    )
    assert report.passed
    x = [1.5, -0.5]
    inp = NRInputs.from_point(op, x, weak)
    cauchy = verify_cauchy_rate(op, x, orbit_cauchy_threshold(inp), k_range=range(3))
    assert cauchy.passed
