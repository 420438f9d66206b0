"""End-to-end tests of the berryline command line."""

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from berryline.cli import (
    ConfigError,
    _to_bool,
    _to_interval,
    _to_range,
    csv_lines,
    emit_json,
    fmt,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# formatting helpers


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_floats(x):
    assert float(fmt(x)) == x


def test_fmt_is_plain():
    assert fmt(1.0) == "1"
    assert fmt(0.5) == "0.5"
    assert fmt(math.pi) == "3.1415926535897931"


def test_range_parsing():
    assert _to_range("2.5") == (2.5,)
    assert _to_range("1:2:0.5") == (1.0, 1.5, 2.0)
    assert len(_to_range("0.5:3.0:0.25")) == 11
    with pytest.raises(ValueError):
        _to_range("1:2")
    with pytest.raises(ValueError):
        _to_range("1:2:-0.5")


def test_interval_parsing():
    assert _to_interval("1.0:2.5") == (1.0, 2.5)
    with pytest.raises(ValueError):
        _to_interval("1.0")


def test_bool_parsing():
    assert _to_bool("yes") and _to_bool("1") and _to_bool("True")
    assert not _to_bool("off")
    with pytest.raises(ValueError):
        _to_bool("maybe")


def test_csv_lines_cells():
    text = csv_lines(["a", "b", "c"], [(1, None, 0.5), ("x", 2.0, None)])
    assert text == "a,b,c\n1,,0.5\nx,2,\n"


def test_emit_json_parses_and_round_trips():
    obj = {"x": math.pi, "items": [1.5, None, True], "name": "a\"b",
           "nested": {"k": 2}, "empty": {}}
    parsed = json.loads(emit_json(obj))
    assert parsed["x"] == math.pi
    assert parsed["items"] == [1.5, None, True]
    assert parsed["name"] == 'a"b'
    assert parsed["nested"] == {"k": 2}


# ---------------------------------------------------------------------------
# berry


def test_berry_nontrivial_loop(capsys):
    code, out, _ = run(capsys, "berry", "--k", "1", "--g", "1", "--r", "0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["format_version"] == 1
    assert doc["K"] == 1
    assert doc["holonomy_sign"] == -1
    assert doc["mab_class"] == "Nontrivial"
    assert doc["geometric_phase"] == math.pi


def test_berry_trivial_loop(capsys):
    code, out, _ = run(capsys, "berry", "--k", "1", "--g", "1", "--r", "3.0",
                       "--theta-samples", "1024")
    assert code == 0
    doc = json.loads(out)
    assert doc["K"] == 2
    assert doc["holonomy_sign"] == 1
    assert doc["mab_class"] == "Trivial"
    assert doc["geometric_phase"] == 0.0
    assert len(doc["node_angles"]) == 2


def test_berry_rerun_is_byte_identical(capsys):
    _, first, _ = run(capsys, "berry", "--k", "1", "--g", "1", "--r", "1.2",
                      "--theta-samples", "512")
    _, second, _ = run(capsys, "berry", "--k", "1", "--g", "1", "--r", "1.2",
                       "--theta-samples", "512")
    assert first == second


def test_berry_writes_file(tmp_path, capsys):
    target = tmp_path / "berry.json"
    code, out, _ = run(capsys, "berry", "--k", "1", "--g", "1", "--r", "0.5",
                       "--out", str(target))
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["K"] == 1


# ---------------------------------------------------------------------------
# nodal-map


def test_nodal_map_single_radius(capsys):
    code, out, _ = run(capsys, "nodal-map", "--k", "1", "--g", "1",
                       "--r", "1.0", "--theta-samples", "512")
    assert code == 0
    nodes_csv, deg_csv = out.split("\n\n")
    lines = nodes_csv.splitlines()
    assert lines[0] == "r,theta_node,source"
    assert len(lines) == 3  # one analytic and one numeric row
    r, theta, source = lines[1].split(",")
    assert source == "analytic" and float(theta) == math.pi
    assert abs(float(lines[2].split(",")[1]) - math.pi) < 1e-6
    deg_lines = deg_csv.splitlines()
    assert deg_lines[0] == "r,theta"
    assert len(deg_lines) == 5
    assert deg_lines[1] == "0,"  # origin has no angle


def test_nodal_map_sweep_skips_degeneracy_circle(capsys):
    code, out, err = run(capsys, "nodal-map", "--k", "1", "--g", "1",
                         "--r", "1.5:2.5:0.5", "--theta-samples", "512")
    assert code == 0
    assert "degeneracy circle" in err
    radii = {line.split(",")[0] for line in out.split("\n\n")[0].splitlines()[1:]}
    assert radii == {"1.5", "2.5"}


def test_nodal_map_on_circle_is_domain_error(capsys):
    code, out, err = run(capsys, "nodal-map", "--k", "1", "--g", "1",
                         "--r", "2.0", "--theta-samples", "512")
    assert code == 3
    assert "OnDegeneracyCircle" in err


def test_nodal_map_pure_linear(capsys):
    code, out, _ = run(capsys, "nodal-map", "--k", "1", "--g", "0",
                       "--r", "0.5:1.5:0.5", "--theta-samples", "512")
    assert code == 0
    for line in out.split("\n\n")[0].splitlines()[1:]:
        assert abs(float(line.split(",")[1]) - math.pi) < 1e-6


def test_nodal_map_file_outputs(tmp_path, capsys):
    nodes = tmp_path / "nodes.csv"
    degs = tmp_path / "degs.csv"
    code, out, _ = run(capsys, "nodal-map", "--k", "1", "--g", "1",
                       "--r", "1.0", "--theta-samples", "512",
                       "--nodes-out", str(nodes),
                       "--degeneracies-out", str(degs))
    assert code == 0 and out == ""
    assert nodes.read_text().startswith("r,theta_node,source\n")
    assert degs.read_text().startswith("r,theta\n")


# ---------------------------------------------------------------------------
# spectrum


def parse_spectrum(out):
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    assert lines[1] == "index,energy,degeneracy_flag,parity"
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


def test_spectrum_flat_odd(capsys):
    code, out, _ = run(capsys, "spectrum", "--flat", "--parity", "odd",
                       "--grid", "256", "--levels", "4")
    assert code == 0
    header, rows = parse_spectrum(out)
    assert header["kind"] == "flat"
    assert header["flux_parity"] == "odd"
    assert header["boundary"] == "antiperiodic"
    assert len(rows) == 4
    assert abs(float(rows[0][1]) - 0.125) < 1e-3
    assert rows[0][2] == "1" and rows[0][3] == "odd"


def test_spectrum_flat_requires_parity(capsys):
    code, _, err = run(capsys, "spectrum", "--flat", "--grid", "256")
    assert code == 2
    assert "parity" in err


def test_spectrum_model_requires_couplings(capsys):
    code, _, err = run(capsys, "spectrum", "--k", "1", "--grid", "256")
    assert code == 2


def test_spectrum_model_derives_parity(capsys):
    # g = 0 lower band: constant potential -1/2 on an antiperiodic ring
    code, out, _ = run(capsys, "spectrum", "--k", "1", "--g", "0",
                       "--grid", "256", "--levels", "4")
    assert code == 0
    header, rows = parse_spectrum(out)
    assert header["kind"] == "jahnteller"
    assert header["flux_parity"] == "odd"
    _, flat_out, _ = run(capsys, "spectrum", "--flat", "--parity", "odd",
                         "--grid", "256", "--levels", "4")
    _, flat_rows = parse_spectrum(flat_out)
    for row, flat_row in zip(rows, flat_rows):
        # the constant shift commutes only up to diagonalization roundoff
        assert float(row[1]) == pytest.approx(float(flat_row[1]) - 0.5,
                                              abs=1e-10)


def test_spectrum_grid_alias(capsys):
    _, a, _ = run(capsys, "spectrum", "--flat", "--parity", "even",
                  "--grid", "256")
    _, b, _ = run(capsys, "spectrum", "--flat", "--parity", "even",
                  "--M", "256")
    assert a == b


def test_spectrum_barrier_parity_invariance(capsys):
    outs = []
    for parity in ("even", "odd"):
        code, out, _ = run(capsys, "spectrum", "--flat", "--parity", parity,
                           "--grid", "512", "--levels", "6",
                           "--barrier", "1.0:2.0")
        assert code == 0
        header, rows = parse_spectrum(out)
        assert header["boundary"] == "dirichlet-barrier"
        outs.append([row[1] for row in rows])
    assert outs[0] == outs[1]  # energy text identical character for character


# ---------------------------------------------------------------------------
# locate-ci


LOCATE_ARGS = ("locate-ci", "--k", "1", "--g", "1",
               "--x-min", "-0.6", "--x-max", "0.5",
               "--y-min", "-0.55", "--y-max", "0.5",
               "--spatial-tol", "1e-2", "--samples-per-edge", "16",
               "--min-depth", "2")


def test_locate_ci_origin(capsys):
    code, out, _ = run(capsys, *LOCATE_ARGS)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["points"]) == 1
    x, y = doc["points"][0]
    assert math.hypot(x, y) < 1e-6
    assert doc["gaps"][0] <= 1e-8
    assert doc["cells_evaluated"] == sum(doc["depth_histogram"].values())
    assert all(isinstance(k, str) for k in doc["depth_histogram"])


def test_locate_ci_rerun_is_byte_identical(capsys):
    _, a, _ = run(capsys, *LOCATE_ARGS)
    _, b, _ = run(capsys, *LOCATE_ARGS)
    assert a == b


# ---------------------------------------------------------------------------
# spin


SPIN_ARGS = ("spin", "--k", "1", "--g", "1", "--r", "1", "--period", "200",
             "--steps", "16384", "--store-stride", "256")


def test_spin_outputs(capsys):
    code, out, _ = run(capsys, *SPIN_ARGS)
    assert code == 0
    series, summary_text = out.split("\n\n")
    lines = series.splitlines()
    assert lines[0] == "t,sigma_x,sigma_y,sigma_z,norm"
    assert len(lines) == 2 + 16384 // 256  # header + initial + recorded
    assert float(lines[1].split(",")[0]) == 0.0
    doc = json.loads(summary_text)
    for key in ("total_phase", "dynamical_phase", "geometric_phase",
                "adiabaticity_ratio", "final_norm", "ac_loop_phase"):
        assert key in doc
    assert doc["final_norm"] == pytest.approx(1.0, abs=1e-12)
    assert doc["ac_loop_phase"] == pytest.approx(math.pi, abs=1e-9)
    assert doc["frame"] == "comoving"


def test_spin_fractional_revolutions_has_no_loop_phase(capsys):
    code, out, _ = run(capsys, *SPIN_ARGS, "--revolutions", "0.5")
    assert code == 0
    doc = json.loads(out.split("\n\n")[1])
    assert doc["ac_loop_phase"] is None


def test_spin_frame_and_initial_validation(capsys):
    code, _, err = run(capsys, *SPIN_ARGS, "--frame", "rotating")
    assert code == 2
    code, _, err = run(capsys, *SPIN_ARGS, "--initial", "middle")
    assert code == 2


def test_spin_domain_error_exit_code(capsys):
    # 16 steps cannot resolve the gap frequency over this period
    code, _, err = run(capsys, "spin", "--k", "1", "--g", "1", "--r", "1",
                       "--period", "200", "--steps", "16",
                       "--store-stride", "1")
    assert code == 3
    assert "StepTooLarge" in err


# ---------------------------------------------------------------------------
# config files and environment


def test_config_file_provides_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# loop settings\nformat_version = 1\nk = 1\ng = 1\n"
                   "r = 0.5\ntheta-samples = 512\n")
    code, out, _ = run(capsys, "berry", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["K"] == 1


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 1\ng = 1\nr = 0.5\ntheta-samples = 512\n")
    code, out, _ = run(capsys, "berry", "--config", str(cfg), "--r", "3.0")
    assert code == 0
    assert json.loads(out)["K"] == 2


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 1\ng = 1\nr = 0.5\nwavelength = 3\n")
    code, _, err = run(capsys, "berry", "--config", str(cfg))
    assert code == 2
    assert "wavelength" in err


def test_config_bad_format_version(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("format_version = 2\nk = 1\ng = 1\nr = 0.5\n")
    code, _, err = run(capsys, "berry", "--config", str(cfg))
    assert code == 2
    assert "format_version" in err


def test_config_missing_file(capsys):
    code, _, err = run(capsys, "berry", "--config", "/nonexistent/x.cfg")
    assert code == 2


def test_config_malformed_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("k = 1\njust a line\n")
    code, _, err = run(capsys, "berry", "--config", str(cfg))
    assert code == 2


def test_missing_required_setting(capsys):
    code, _, err = run(capsys, "berry", "--k", "1", "--g", "1")
    assert code == 2
    assert "--r" in err


def test_bad_numeric_flag(capsys):
    code, _, err = run(capsys, "berry", "--k", "one", "--g", "1", "--r", "1")
    assert code == 2


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_thread_cap_does_not_change_output(monkeypatch, capsys):
    args = ("nodal-map", "--k", "1", "--g", "1", "--r", "0.5:3.0:0.5",
            "--theta-samples", "512")
    monkeypatch.setenv("BERRYLINE_THREADS", "4")
    code_a, a, err_a = run(capsys, *args)
    monkeypatch.setenv("BERRYLINE_THREADS", "1")
    code_b, b, err_b = run(capsys, *args)
    assert code_a == code_b == 0
    assert a == b
    assert err_a == err_b  # the skipped-radius note survives either way


def test_invalid_thread_cap(monkeypatch, capsys):
    monkeypatch.setenv("BERRYLINE_THREADS", "plenty")
    code, _, err = run(capsys, "nodal-map", "--k", "1", "--g", "1",
                       "--r", "0.5:1.0:0.5", "--theta-samples", "512")
    assert code == 2
    assert "BERRYLINE_THREADS" in err
