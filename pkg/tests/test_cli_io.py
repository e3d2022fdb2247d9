import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bolab import cli
from bolab.config import ConfigError, RunConfig, parse_config, serialize
from bolab.dynamics import EquationParams, SolverConfig, solve
from bolab.experiments import EnergyTrace, run_conservation
from bolab.fields import make_initial_data
from bolab.storage import (
    ChecksumError,
    emit,
    read_report,
    read_trace,
    read_trajectory,
    report_text,
    validate_report,
)

# -- configuration -------------------------------------------------------------------


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg.params == EquationParams() and cfg.solver == SolverConfig()
    assert (cfg.s, cfg.s0, cfg.workers) == (3.0, 2.6, 1)
    assert isinstance(cfg, RunConfig)


def test_config_sections_and_comments():
    text = """
    # comment
    subcommand = conservation
    ; also a comment
    [equation]
    gamma = 0.25
    cubic = false
    [solver]
    max_mode = 64
    [experiment]
    gammas = 0.5, 0.25
    """
    cfg = parse_config(text)
    assert cfg.subcommand == "conservation"
    assert cfg.params.gamma == 0.25 and cfg.params.cubic is False
    assert cfg.solver.max_mode == 64
    assert cfg.experiment.gammas == (0.5, 0.25)


@pytest.mark.parametrize(
    "text, line",
    [
        ("[equation]\ngamma = 1.5", 2),
        ("[equation]\nc3 = 1", 2),
        ("[nowhere]\nx = 1", 1),
        ("[solver]\ndt = 1e-3\ndt = 1e-4", 3),
        ("[solver]\nmax_mode = many", 2),
        ("\n\njust words", 3),
        ("[energy]\ns = 1.5", 2),
        ("[experiment]\ngammas = 0.5, 2", 2),
        ("[data]\nkind = fractal", 2),
    ],
)
def test_config_errors_name_the_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_overrides_take_precedence():
    cfg = parse_config("[solver]\ndt = 1e-3", {"solver.dt": "2e-3", "equation.gamma": "0.5"})
    assert cfg.solver.dt == 2e-3 and cfg.params.gamma == 0.5
    with pytest.raises(ConfigError):
        parse_config("", {"solver.nope": "1"})


@given(
    st.sampled_from(["simulate", "cont-dep", "gamma-sweep"]),
    st.floats(0, 0.99),
    st.integers(4, 512),
    st.floats(1e-6, 1e-2),
    st.booleans(),
    st.lists(st.floats(0.001, 0.999), min_size=1, max_size=4).map(tuple),
    st.one_of(st.none(), st.floats(0.1, 10)),
)
@settings(max_examples=40, deadline=None)
def test_serialize_round_trip(sub, gamma, K, dt, cubic, gammas, norm):
    cfg = parse_config("", {
        "run.subcommand": sub, "equation.gamma": repr(gamma), "solver.max_mode": str(K),
        "solver.dt": repr(dt), "equation.cubic": str(cubic), "experiment.gammas": ", ".join(map(repr, gammas)),
        "data.norm": "none" if norm is None else repr(norm),
    })
    text = serialize(cfg)
    again = parse_config(text)
    assert again == cfg
    assert serialize(again) == text


# -- storage -------------------------------------------------------------------------------


def small_trace():
    phi = make_initial_data("random-sobolev", 3.0, 0, 16)
    return run_conservation(phi, SolverConfig(max_mode=16, dt=1e-3, horizon=0.01, stride=2))


def test_trace_round_trip(tmp_path):
    tr = small_trace()
    path = emit(tr, tmp_path / "trace.csv")
    cols = read_trace(path)
    assert np.array_equal(cols["t"], tr.times)
    assert np.array_equal(cols["L2"], tr.l2)
    assert np.isnan(cols["Es_total"]).all()
    lines = path.read_text().splitlines()
    assert lines[0] == "# format_version=1" and lines[-1].startswith("# sha256=")


def test_empty_trace_has_header_and_checksum(tmp_path):
    path = emit(EnergyTrace.empty(), tmp_path / "empty.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert lines[1] == "t,L2,Hs,Es_total,Es_correction,Etilde,pairing_integral"
    assert all(len(v) == 0 for v in read_trace(path).values())


def test_tampered_trace_is_rejected(tmp_path):
    path = emit(small_trace(), tmp_path / "trace.csv")
    text = path.read_text().replace("0.0", "0.5", 1)
    path.write_text(text)
    with pytest.raises(ChecksumError):
        read_trace(path)


def test_trajectory_round_trip(tmp_path):
    phi = make_initial_data("random-sobolev", 3.0, 1, 8)
    p = EquationParams(gamma=0.125)
    traj = solve(phi, p, SolverConfig(max_mode=8, dt=1e-3, horizon=0.005, stride=2))
    back = read_trajectory(emit(traj, tmp_path / "traj.txt"))
    assert np.array_equal(back.times, traj.times)
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(back.snapshots, traj.snapshots))
    assert back.params == p and back.status == "completed"
    assert back.info["K"] == 8


def test_report_round_trip_and_checksum_last(tmp_path):
    rep = {"experiment": "x", "checks": {"ok": True}, "value": np.float64(1.5), "bad": math.nan,
           "arr": np.arange(3), "flag": np.bool_(True)}
    path = emit(rep, tmp_path / "summary.json")
    doc = json.loads(path.read_text())
    assert list(doc)[-1] == "checksum" and doc["checksum"].startswith("sha256:")
    back = read_report(path)
    assert back["value"] == 1.5 and back["bad"] is None and back["arr"] == [0, 1, 2] and back["flag"] is True
    assert back["format_version"] == 1
    path.write_text(path.read_text().replace("1.5", "2.5"))
    with pytest.raises(ChecksumError):
        read_report(path)


def test_report_schema():
    validate_report(json.loads(report_text({"experiment": "x", "checks": {}})))
    import jsonschema

    with pytest.raises(jsonschema.ValidationError):
        validate_report({"format_version": 1, "checks": {}})
    with pytest.raises(jsonschema.ValidationError):
        emit({"experiment": "x", "checks": {"a": "yes"}}, "/tmp/never-written.json")


def test_emit_rejects_unknown_objects(tmp_path):
    with pytest.raises(TypeError):
        emit(42, tmp_path / "x")


def test_write_to_unwritable_path_reports_os_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit({"experiment": "x", "checks": {}}, blocker / "sub" / "summary.json")


# -- command line ----------------------------------------------------------------------------

FAST = ["--max-mode", "16", "--dt", "1e-3", "--horizon", "0.01"]


def test_cli_conservation_writes_artifacts(tmp_path):
    rc = cli.main(["conservation", "--out", str(tmp_path), *FAST])
    assert rc == 0
    assert {p.name for p in tmp_path.iterdir()} == {"config.txt", "trace.csv", "summary.json"}
    rep = read_report(tmp_path / "summary.json")
    assert rep["checks"] == {"drift_within_tol": True}
    assert parse_config((tmp_path / "config.txt").read_text()).subcommand == "conservation"


def test_cli_simulate_uses_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT, str(tmp_path / "env"))
    assert cli.main(["simulate", *FAST]) == 0
    assert (tmp_path / "env" / "trajectory.txt").exists()


def test_cli_reads_config_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("[solver]\nmax_mode = 16\ndt = 1e-3\nhorizon = 0.01\n[equation]\ngamma = 0.125\n")
    assert cli.main(["diff-energy", "--config", str(conf), "--out", str(tmp_path / "o")]) == 0
    assert read_report(tmp_path / "o" / "summary.json")["checks"]["budget_finite"]


def test_cli_exit_codes(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("[equation]\ngamma = 1.5\n")
    assert cli.main(["simulate", "--config", str(conf), "--out", str(tmp_path)]) == cli.EXIT_PARSE
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.conf")]) == cli.EXIT_PARSE
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == cli.EXIT_PARSE
    # a file where the output directory should be is a runtime failure
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert cli.main(["simulate", "--out", str(blocker / "x"), *FAST]) == cli.EXIT_RUNTIME
    # a drift tolerance of zero cannot be met: criterion failure
    rc = cli.main(["conservation", "--out", str(tmp_path / "c"), "--drift-tol", "0", "--norm", "5", *FAST])
    assert rc == cli.EXIT_CRITERION


def test_cli_verify_lemmas_small(tmp_path):
    rc = cli.main(["verify-lemmas", "--out", str(tmp_path), "--corpus-size", "20", "--lab-max-mode", "16"])
    rep = read_report(tmp_path / "summary.json")
    assert rep["checks"]["identities"] and rep["checks"]["frequency_bound"]
    assert rc in (cli.EXIT_OK, cli.EXIT_CRITERION)
    assert len(rep["estimates"]) == 10
