"""End-to-end command-line behaviour: output schemas and exit codes."""

import csv
import io
import json

import pytest

from dickepair.cli import EXIT_MISMATCH, EXIT_OK, EXIT_PHYSICS, EXIT_USAGE, main


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_no_command_is_a_usage_error(capsys):
    code, _, err = run(capsys, [])
    assert code == EXIT_USAGE


def test_unknown_flag_is_a_usage_error(capsys):
    code, _, _ = run(capsys, ["evolve", "--no-such-flag"])
    assert code == EXIT_USAGE


def test_unknown_family_is_a_usage_error(capsys):
    code, _, _ = run(capsys, ["evolve", "--family", "ghz"])
    assert code == EXIT_USAGE


def test_missing_family_parameter(capsys):
    code, _, err = run(capsys, ["evolve", "--family", "rho_tilde"])
    assert code == EXIT_USAGE
    assert "--a" in err


def test_out_of_range_parameter_is_a_physics_error(capsys):
    code, _, _ = run(capsys, ["evolve", "--family", "werner", "--F", "1.5"])
    assert code == EXIT_PHYSICS


def test_evolve_werner_csv(capsys):
    code, out, _ = run(capsys, [
        "evolve", "--family", "werner", "--F", "0.75",
        "--gamma-t-max", "5", "--steps", "11",
    ])
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == [
        "family", "param", "gamma_t",
        "rho11", "rho22", "rho33", "rho44", "rho23_re", "rho23_im",
        "concurrence", "xi",
    ]
    assert len(rows) == 11
    first = dict(zip(header, rows[0]))
    assert first["family"] == "werner"
    assert float(first["gamma_t"]) == 0.0
    assert float(first["concurrence"]) == pytest.approx(0.5, abs=1e-12)
    # rows are time-ordered and the concurrence grows toward F
    times = [float(r[2]) for r in rows]
    assert times == sorted(times)
    assert float(rows[-1][9]) > 0.7


def test_evolve_numeric_singlet_rows_are_constant(capsys):
    code, out, _ = run(capsys, [
        "evolve", "--family", "werner", "--F", "1", "--engine", "numeric",
        "--dt", "1e-3", "--gamma-t-max", "2", "--steps", "5",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    for row in rows:
        assert float(row[9]) == pytest.approx(1.0, abs=1e-12)
        assert float(row[10]) == pytest.approx(-0.25, abs=1e-12)


def test_evolve_sudden_death_column_hits_zero(capsys):
    code, out, _ = run(capsys, [
        "evolve", "--family", "rho_tilde", "--a", "0.5",
        "--gamma-t-max", "2", "--steps", "41",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    c = [float(r[9]) for r in rows]
    assert c[0] > 0.0
    assert c[-1] == 0.0  # exactly zero after the death, not merely small


def test_evolve_json_schema(capsys):
    code, out, _ = run(capsys, [
        "evolve", "--family", "werner", "--F", "0.5", "--format", "json",
        "--gamma-t-max", "1", "--steps", "3",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["schema"] == "dickepair/evolution-v1"
    assert payload["engine"] == "analytic"
    assert payload["basis_order"] == ["++", "+-", "-+", "--"]
    assert payload["model"]["gamma_decay"] == 1.0
    assert payload["columns"][0] == "family"
    assert len(payload["rows"]) == 3


def test_analytic_rejects_asymmetric_custom_state(capsys):
    code, _, err = run(capsys, [
        "evolve", "--family", "custom_x", "--rho11", "0.1", "--rho22", "0.5",
        "--rho33", "0.2", "--rho44", "0.2",
    ])
    assert code == EXIT_PHYSICS
    assert "numeric" in err  # the message points at the way out


def test_numeric_handles_asymmetric_custom_state(capsys):
    code, out, _ = run(capsys, [
        "evolve", "--family", "custom_x", "--rho11", "0.1", "--rho22", "0.5",
        "--rho33", "0.2", "--rho44", "0.2", "--engine", "numeric",
        "--gamma-t-max", "1", "--steps", "3", "--dt", "1e-2",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert len(rows) == 3


def test_output_files_are_byte_identical(tmp_path, capsys):
    argv = ["evolve", "--family", "werner", "--F", "0.6", "--steps", "20"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, argv + ["-o", str(a)])[0] == EXIT_OK
    assert run(capsys, argv + ["-o", str(b)])[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_curve_reports_saturation_in_json(capsys):
    code, out, _ = run(capsys, [
        "curve", "--family", "werner", "--F", "0.75", "--format", "json",
        "--gamma-t-max", "20", "--steps", "200",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["columns"] == ["family", "param", "gamma_t", "xi", "concurrence"]
    assert 0.0 < payload["saturation_gamma_t"] < 20.0


def test_scan_xi_f_list_rows(capsys):
    code, out, _ = run(capsys, [
        "scan-xi", "--f-list", "1.0", "--gamma-t-max", "5", "--steps", "50",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert len(rows) == 50
    assert all(float(r[3]) == pytest.approx(-0.25, abs=1e-12) for r in rows)


def test_scan_xi_finds_the_onset_sign_change(capsys):
    code, out, _ = run(capsys, [
        "scan-xi", "--f-list", "0.25", "--gamma-t-max", "10", "--steps", "200",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    values = [float(r[3]) for r in rows]
    assert values[0] > 0.0
    assert min(values) < 0.0


def test_scan_xi_grid_stays_negative_above_half(capsys):
    code, out, _ = run(capsys, [
        "scan-xi", "--f-min", "0.55", "--f-max", "1.0", "--f-count", "4",
        "--gamma-t-max", "10", "--steps", "120",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert len(rows) == 4 * 120
    assert all(float(r[3]) < 0.0 for r in rows)


def test_scan_xi_worker_pool_output_is_stable(capsys):
    argv = ["scan-xi", "--f-list", "0.25,0.5,0.75", "--steps", "60"]
    code1, out1, _ = run(capsys, argv + ["--jobs", "1"])
    code2, out2, _ = run(capsys, argv + ["--jobs", "2"])
    assert code1 == code2 == EXIT_OK
    assert out1 == out2


def test_event_sudden_death_json(capsys):
    code, out, _ = run(capsys, [
        "event", "--family", "rho_tilde", "--a", "0.5", "--format", "json",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["schema"] == "dickepair/event-v1"
    assert payload["kind"] == "sudden_death"
    assert 0.29 < payload["t_star"] < 0.31
    assert payload["bracket_width"] <= 1e-10


def test_event_asymptotic_decay_reports_none_found(capsys):
    code, out, _ = run(capsys, [
        "event", "--family", "rho_tilde", "--a", "0", "--format", "json",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["kind"] == "none_found"
    assert payload["t_star"] is None


def test_event_onset_kind(capsys):
    code, out, _ = run(capsys, [
        "event", "--family", "werner", "--F", "0.25", "--kind", "onset",
        "--format", "json",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["kind"] == "onset"
    assert payload["t_star"] > 0.0


def test_event_wrong_kind_for_state(capsys):
    # asking for the death of a separable state is a physics error
    code, _, _ = run(capsys, [
        "event", "--family", "werner", "--F", "0.25", "--kind", "death",
    ])
    assert code == EXIT_PHYSICS


def test_longtime_table(capsys):
    code, out, _ = run(capsys, [
        "longtime", "--state", "werner:0.75", "--state", "rho_tilde:0.5",
        "--state", "rho_tilde_eps:0.3:0.01",
    ])
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["state", "s_minus", "c_infinity"]
    table = {r[0]: float(r[2]) for r in rows}
    assert table["werner:0.75"] == pytest.approx(0.75, abs=1e-12)
    assert table["rho_tilde:0.5"] == 0.0
    assert table["rho_tilde_eps:0.3:0.01"] == pytest.approx(2.0 / 300.0, abs=1e-9)


def test_longtime_requires_at_least_one_state(capsys):
    code, _, _ = run(capsys, ["longtime"])
    assert code == EXIT_USAGE


def test_oracle_compare_passes_on_werner(capsys):
    code, out, _ = run(capsys, [
        "oracle-compare", "--family", "werner", "--F", "0.75",
        "--gamma-t-max", "10", "--dt", "1e-3",
    ])
    assert code == EXIT_OK
    assert "PASS" in out


def test_oracle_compare_singlet_is_tight(capsys):
    code, out, _ = run(capsys, [
        "oracle-compare", "--family", "werner", "--F", "1",
        "--gamma-t-max", "5", "--dt", "1e-3", "--format", "json",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["max_deviation"] <= 1e-12
    assert payload["passed"] is True


def test_oracle_compare_mismatch_exit_code(capsys):
    # a deliberately coarse step cannot meet an impossible threshold
    code, out, _ = run(capsys, [
        "oracle-compare", "--family", "werner", "--F", "0.75",
        "--gamma-t-max", "10", "--dt", "0.05", "--threshold", "1e-12",
    ])
    assert code == EXIT_MISMATCH
    assert "FAIL" in out


def test_validate_accepts_a_good_state(capsys):
    code, out, _ = run(capsys, [
        "validate", "--family", "werner", "--F", "0.5", "--format", "json",
    ])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["min_eigenvalue"] >= -1e-12


def test_validate_flags_a_bad_state(capsys):
    code, out, _ = run(capsys, [
        "validate", "--family", "custom_x", "--rho11", "0.9", "--rho22", "0.3",
        "--rho33", "-0.1", "--rho44", "-0.1", "--format", "json",
    ])
    assert code == EXIT_PHYSICS
    payload = json.loads(out)
    assert payload["passed"] is False
    assert payload["min_eigenvalue"] < 0.0


def test_custom_full_state_file_round_trip(tmp_path, capsys):
    from dickepair.qstate import density_matrix_to_dict, werner

    state_file = tmp_path / "state.json"
    state_file.write_text(json.dumps(density_matrix_to_dict(werner(0.8))))
    code, out, _ = run(capsys, [
        "evolve", "--family", "custom_full", "--state-file", str(state_file),
        "--gamma-t-max", "1", "--steps", "3", "--engine", "numeric", "--dt", "1e-2",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert float(rows[0][9]) == pytest.approx(0.6, abs=1e-9)  # C = 2F-1 at F=0.8


def test_config_file_supplies_defaults_flags_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"F": 0.25, "steps": 7, "gamma_t_max": 1.0}))
    code, out, _ = run(capsys, [
        "curve", "--family", "werner", "--config", str(cfg), "--F", "0.75",
    ])
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert len(rows) == 7  # from the config file
    assert float(rows[0][4]) == pytest.approx(0.5, abs=1e-12)  # F from the flag


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"no_such_option": 1}))
    code, _, _ = run(capsys, ["curve", "--family", "werner", "--F", "0.5",
                              "--config", str(cfg)])
    assert code == EXIT_USAGE
