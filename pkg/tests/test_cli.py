"""End-to-end tests of the command line driver.

Each test invokes lagsol.cli.main with an argv list and checks the exit code,
the files written, and the captured output.  Mesh resolutions are kept small
here; the full-size runs live in the acceptance tests.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from lagsol import fileio
from lagsol.cli import main


def out_pairs(captured):
    """Parse the 'key = value' lines a subcommand prints to stdout."""
    pairs = {}
    for line in captured.splitlines():
        if " = " in line and not line.startswith(("wrote ", "t = ")):
            k, _, v = line.partition(" = ")
            pairs[k.strip()] = v.strip()
    return pairs


def run_expander(outdir, *extra):
    return main(["expander", "--alpha", "1.0", "--a", "1,2",
                 "--samples", "16", "--mesh-samples", "9", "--mesh-count", "8",
                 "--fd-checks", "2", "--outdir", str(outdir), *extra])


def test_expander_writes_expected_files(tmp_path, capsys):
    assert run_expander(tmp_path) == 0
    out = capsys.readouterr().out
    assert "verification: PASS" in out
    for suffix in ("profile.csv", "planes.csv", "mesh.csv", "record.txt",
                   "summary.txt"):
        assert (tmp_path / f"expander_{suffix}").is_file()
    summary = fileio.read_keyvalues(tmp_path / "expander_summary.txt")
    assert summary["kind"] == "centred"
    assert summary["points"] == str(9 * 8)
    assert summary["passed"] == "true"
    assert float(summary["max_lagrangian"]) < 1e-10
    assert float(summary["max_angle"]) < 1e-9


def test_expander_minimal_reports_constant_angle(tmp_path, capsys):
    rc = main(["expander", "--alpha", "0", "--a", "1,1",
               "--samples", "12", "--mesh-samples", "7", "--mesh-count", "6",
               "--fd-checks", "2", "--outdir", str(tmp_path)])
    assert rc == 0
    summary = fileio.read_keyvalues(tmp_path / "expander_summary.txt")
    assert summary["theta_constant"] == "true"
    assert float(summary["theta_span"]) < 1e-12
    assert float(summary["angle_sum"]) == pytest.approx(math.pi / 2, abs=1e-10)


def test_expander_ply_and_prefix(tmp_path, capsys):
    rc = main(["expander", "--alpha", "1.0", "--a", "1,3",
               "--samples", "8", "--mesh-samples", "5", "--mesh-count", "4",
               "--fd-checks", "2", "--ply", "--project3d",
               "--prefix", "run1", "--outdir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "run1_mesh.ply").is_file()
    assert (tmp_path / "run1_mesh.csv").is_file()
    assert not (tmp_path / "expander_mesh.csv").exists()
    header = (tmp_path / "run1_mesh.ply").read_text().splitlines()
    assert header[0] == "ply"
    assert "property double x" in header


def test_missing_required_option_exits_2(tmp_path, capsys):
    rc = main(["expander", "--alpha", "1.0", "--outdir", str(tmp_path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("lagsol:")
    assert "missing required option --a" in err


def test_bad_count_option_exits_2(tmp_path, capsys):
    rc = run_expander(tmp_path, "--mesh-count", "1")
    assert rc == 2
    assert "--mesh-count must be at least 2" in capsys.readouterr().err


def test_invert_angles_round_trip(capsys):
    rc = main(["invert-angles", "--alpha", "1.0", "--target", "0.5,0.6"])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    achieved = [float(v) for v in pairs["achieved"].split(",")]
    np.testing.assert_allclose(achieved, [0.5, 0.6], atol=1e-9)
    assert float(pairs["residual"]) < 1e-9
    a = [float(v) for v in pairs["a"].split(",")]
    assert all(v > 0 for v in a)


def test_invert_angles_rejects_unattainable_target(capsys):
    # the angle sum is capped by pi/2, so 0.9 + 0.9 is out of range
    rc = main(["invert-angles", "--alpha", "1.0", "--target", "0.9,0.9"])
    assert rc == 2
    assert "lagsol:" in capsys.readouterr().err


def test_outdir_env_variable(tmp_path, monkeypatch, capsys):
    envdir = tmp_path / "from_env"
    monkeypatch.setenv("LAGSOL_OUTDIR", str(envdir))
    rc = main(["invert-angles", "--alpha", "1.0", "--target", "0.3,0.4",
               "--write-report"])
    assert rc == 0
    assert (envdir / "invert_angles_report.txt").is_file()
    # an explicit --outdir must win over the environment
    rc = main(["invert-angles", "--alpha", "1.0", "--target", "0.3,0.4",
               "--write-report", "--outdir", str(tmp_path / "explicit")])
    assert rc == 0
    assert (tmp_path / "explicit" / "invert_angles_report.txt").is_file()


def test_periodic_quasi_periodic_report(tmp_path, capsys):
    rc = main(["periodic", "--lambdas", "1,-1", "--alphas", "1,3",
               "--A", "0.8", "--alpha", "0.6", "--outdir", str(tmp_path)])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    assert pairs["periodic"] == "false"
    assert "r" not in pairs
    # theta is strictly increasing along the orbit when alpha > 0
    assert float(pairs["gamma_sum"]) > 0
    assert float(pairs["u1"]) < 0 < float(pairs["u2"])
    assert (tmp_path / "periodic_orbit.csv").is_file()


def test_periodic_stationary_with_mesh(tmp_path, capsys):
    rc = main(["periodic", "--lambdas", "1,-1", "--alphas", "1,1",
               "--A", "1.0", "--alpha", "0", "--mesh",
               "--mesh-samples", "7", "--mesh-count", "6", "--fd-checks", "2",
               "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    pairs = out_pairs(out)
    assert pairs["case"] == "hamiltonian_stationary"
    assert pairs["periodic"] == "true"
    assert pairs["r"] == "1"
    assert pairs["p"] == "1,-1"
    assert float(pairs["T"]) == pytest.approx(2.0 * math.pi, abs=1e-9)
    assert pairs["topology"] == "S1 x S0 x R1"
    assert "verification: PASS" in out
    for suffix in ("orbit.csv", "mesh.csv", "record.txt", "summary.txt"):
        assert (tmp_path / f"periodic_{suffix}").is_file()


def test_shrinker_compact_orbit(tmp_path, capsys):
    rc = main(["shrinker", "--alphas", "1,1", "--A", "0.7", "--alpha", "-1",
               "--outdir", str(tmp_path)])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    assert float(pairs["gamma_sum"]) < 0
    assert (tmp_path / "shrinker_orbit.csv").is_file()


def test_periodic_search_hits_engineered_target(tmp_path, capsys):
    target = f"--gamma={-math.pi!r},{math.pi!r}"
    rc = main(["periodic-search", "--lambdas", "1,-1", "--alpha", "0",
               target, "--outdir", str(tmp_path)])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    assert float(pairs["residual"]) < 1e-8
    assert pairs["periodic"] == "true"
    assert pairs["r"] == "2"
    assert pairs["p"] == "-1,1"
    assert (tmp_path / "periodic_search_search.txt").is_file()
    assert (tmp_path / "periodic_search_orbit.csv").is_file()


def test_periodic_search_unattainable_exits_3(capsys):
    # alpha > 0 forces a positive holonomy sum; this target sums to -0.3
    rc = main(["periodic-search", "--lambdas", "1,-1", "--alpha", "1.0",
               "--gamma=-3.5,3.2", "--max-iter", "12"])
    assert rc == 3
    assert "lagsol:" in capsys.readouterr().err


def test_translator_expander_base(tmp_path, capsys):
    rc = main(["translator", "--alpha", "1.2", "--a", "1,2",
               "--t-max", "0.8", "--mesh-samples", "7", "--mesh-count", "6",
               "--fd-checks", "2", "--outdir", str(tmp_path)])
    assert rc == 0
    assert "verification: PASS" in capsys.readouterr().out
    for suffix in ("mesh.csv", "record.txt", "summary.txt"):
        assert (tmp_path / f"translator_{suffix}").is_file()
    summary = fileio.read_keyvalues(tmp_path / "translator_summary.txt")
    assert summary["passed"] == "true"
    assert summary["oscillating_base"] == "false"
    assert float(summary["maslov_constant"]) == 0.0
    expected = -math.pi / (2.0 * 1.2)
    assert float(summary["anchor_expected_im"]) == pytest.approx(expected)
    assert float(summary["anchor_im"]) == pytest.approx(expected, abs=1e-10)


def test_translator_orbit_base(tmp_path, capsys):
    rc = main(["translator", "--alpha", "0.7", "--lambdas", "1,-1",
               "--alphas", "1,3", "--A", "0.5", "--t-max", "0.6",
               "--mesh-samples", "6", "--mesh-count", "5", "--fd-checks", "2",
               "--outdir", str(tmp_path)])
    assert rc == 0
    summary = fileio.read_keyvalues(tmp_path / "translator_summary.txt")
    assert summary["passed"] == "true"
    assert summary["oscillating_base"] == "true"


def test_translator_without_base_exits_2(capsys):
    rc = main(["translator", "--alpha", "1.0"])
    assert rc == 2
    assert "specify the base" in capsys.readouterr().err


def test_verify_round_trip_with_residuals(tmp_path, capsys):
    assert run_expander(tmp_path) == 0
    capsys.readouterr()
    res = tmp_path / "residuals.csv"
    rc = main(["verify", "--mesh", str(tmp_path / "expander_mesh.csv"),
               "--record", str(tmp_path / "expander_record.txt"),
               "--fd-checks", "2", "--residuals", str(res)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "verification: PASS" in out
    assert out_pairs(out)["passed"] == "true"
    assert res.is_file()
    assert res.read_text().splitlines()[0].startswith("point_id,")


def test_verify_detects_tampered_angle(tmp_path, capsys):
    assert run_expander(tmp_path) == 0
    capsys.readouterr()
    mesh_path = tmp_path / "expander_mesh.csv"
    lines = mesh_path.read_text().splitlines()
    fields = lines[3].split(",")
    fields[-1] = repr(float(fields[-1]) + 1e-3)
    lines[3] = ",".join(fields)
    mesh_path.write_text("\n".join(lines) + "\n")

    rc = main(["verify", "--mesh", str(mesh_path),
               "--record", str(tmp_path / "expander_record.txt"),
               "--fd-checks", "2"])
    assert rc == 4
    captured = capsys.readouterr()
    assert "verification: FAIL" in captured.out
    assert "stored_angle residual" in captured.out
    assert "verification failed: stored_angle" in captured.err


def test_verify_detects_tampered_point(tmp_path, capsys):
    assert run_expander(tmp_path) == 0
    capsys.readouterr()
    mesh_path = tmp_path / "expander_mesh.csv"
    lines = mesh_path.read_text().splitlines()
    fields = lines[5].split(",")
    fields[0] = repr(float(fields[0]) * 1.001 + 1e-4)
    lines[5] = ",".join(fields)
    mesh_path.write_text("\n".join(lines) + "\n")

    rc = main(["verify", "--mesh", str(mesh_path),
               "--record", str(tmp_path / "expander_record.txt"),
               "--fd-checks", "2"])
    assert rc == 4
    captured = capsys.readouterr()
    assert "verification: FAIL" in captured.out
    assert "exceeds" in captured.err


def test_config_file_supplies_options(tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("# inversion job\nalpha = 1.0\ntarget = 0.4,0.4\n")
    rc = main(["invert-angles", "--config", str(cfg)])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    assert pairs["target"] == "0.4,0.4"


def test_explicit_flag_wins_over_config(tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("alpha = 1.0\ntarget = 0.4,0.4\n")
    rc = main(["invert-angles", "--config", str(cfg), "--target", "0.3,0.3"])
    assert rc == 0
    pairs = out_pairs(capsys.readouterr().out)
    assert pairs["target"] == "0.3,0.3"
    achieved = [float(v) for v in pairs["achieved"].split(",")]
    np.testing.assert_allclose(achieved, [0.3, 0.3], atol=1e-9)


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("alpha = 1.0\ntarget = 0.4,0.4\nbogus = 7\n")
    rc = main(["invert-angles", "--config", str(cfg)])
    assert rc == 2
    assert "unknown config key 'bogus'" in capsys.readouterr().err


def test_flow_family_slices(tmp_path, capsys):
    rc = main(["flow-family", "--lambdas", "1,-1", "--alphas", "1,3",
               "--A", "0.8", "--alpha", "0.6", "--t=-1,0,1",
               "--mesh-samples", "6", "--mesh-count", "5",
               "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    for i in range(3):
        assert (tmp_path / f"flow_family_slice{i}.csv").is_file()
    family = fileio.read_keyvalues(tmp_path / "flow_family_family.txt")
    assert family["singular_0"] == "false"
    assert family["singular_1"] == "true"
    assert family["singular_2"] == "false"
    assert family["topology_2"] == "S1 x S0 x R1"
    assert "cone" in family["topology_1"]
    assert "singular at the origin" in out


def test_flow_family_rejects_compact_case(capsys):
    rc = main(["flow-family", "--lambdas", "1,1", "--alphas", "1,1",
               "--A", "0.7", "--alpha", "-1", "--t", "0,1"])
    assert rc == 2
    assert "mixed signs" in capsys.readouterr().err


def test_reruns_are_byte_identical(tmp_path, capsys):
    d1, d2 = tmp_path / "one", tmp_path / "two"
    assert run_expander(d1) == 0
    assert run_expander(d2) == 0
    for suffix in ("profile.csv", "planes.csv", "mesh.csv", "record.txt",
                   "summary.txt"):
        b1 = (d1 / f"expander_{suffix}").read_bytes()
        b2 = (d2 / f"expander_{suffix}").read_bytes()
        assert b1 == b2, suffix
