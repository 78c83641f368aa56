from __future__ import annotations

import json

import pytest

from relcont.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_passing_check_exits_zero_with_json_report(capsys):
    code, out = run(capsys, "check", "--scene", "minkowski_dust", "--grid", "2", "--only", "continuity_mass")
    assert code == EXIT_PASS
    payload = json.loads(out)
    assert [record["name"] for record in payload["checks"]] == ["continuity_mass"]
    assert payload["environment"]["grid"] == 2


def test_negative_control_exits_one(capsys):
    code, out = run(capsys, "check", "--scene", "minkowski_dust", "--grid", "2", "--only", "continuity_mass",
                    "--set", "rho_drift=0.2")
    assert code == EXIT_FAIL
    assert json.loads(out)["checks"][0]["pass"] is False


def test_tolerance_override_can_accept_a_residual(capsys):
    code, _ = run(capsys, "check", "--scene", "minkowski_dust", "--grid", "2", "--only", "continuity_mass",
                  "--set", "rho_drift=0.2", "--tol", "continuity_mass=1.0")
    assert code == EXIT_PASS


@pytest.mark.parametrize("argv", [
    ["check", "--scene", "minkowski_dust", "--set", "bogus=1"],
    ["check", "--scene", "minkowski_dust", "--set", "rho=dense"],
    ["check", "--scene", "wormhole"],
    ["check", "--scene", "minkowski_dust", "--tol", "perpetual_motion=1e-3"],
    ["check", "--scene", "minkowski_dust", "--tol", "continuity_mass=-1"],
    ["check", "--scene", "minkowski_dust", "--format", "yaml"],
    ["check"],
    ["action", "--scene", "minkowski_dust"],
], ids=["unknown-key", "bad-value", "unknown-scene", "unknown-check", "negative-tol", "bad-format",
        "no-scene", "action-unmatched"])
def test_configuration_errors_exit_two(capsys, argv):
    assert main(argv) == EXIT_CONFIG


def test_list_scenes(capsys):
    code, out = run(capsys, "list-scenes")
    assert code == EXIT_PASS
    assert "constant_density_star" in out
    assert "random_smooth" in out


def test_list_checks_of_a_scene(capsys):
    code, out = run(capsys, "list-checks", "--scene", "minkowski_dust")
    names = [line.split()[0] for line in out.splitlines()]
    assert code == EXIT_PASS
    assert "eulerian_el_residual" in names
    assert "junction_metric" not in names


def test_scene_file_with_text_report_and_csv(capsys, tmp_path):
    scene_file = tmp_path / "drift.toml"
    scene_file.write_text(
        'name = "drifting_dust"\n'
        'base = "minkowski_dust"\n'
        'grid = 2\n'
        'checks = ["continuity_mass", "reference_advection"]\n'
        '\n'
        '[parameters]\n'
        'rho_drift = 0.2\n',
        encoding="utf-8",
    )
    csv_path = tmp_path / "rows.csv"
    code, out = run(capsys, "check", "--scene-file", str(scene_file), "--format", "text", "--csv", str(csv_path))
    assert code == EXIT_FAIL
    assert "1 passed, 1 failed" in out
    assert len(csv_path.read_text().splitlines()) == 3


def test_report_written_to_file(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out = run(capsys, "check", "--scene", "minkowski_dust", "--grid", "2", "--only", "reference_advection",
                    "--out", str(out_path))
    assert code == EXIT_PASS
    assert out == ""
    assert json.loads(out_path.read_text())["scene"] == "minkowski_dust"


def test_malformed_scene_file_exits_two(tmp_path):
    scene_file = tmp_path / "broken.toml"
    scene_file.write_text("name = [unclosed\n", encoding="utf-8")
    assert main(["check", "--scene-file", str(scene_file)]) == EXIT_CONFIG
