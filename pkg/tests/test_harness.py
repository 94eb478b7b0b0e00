import json

import numpy as np
import pytest
import yaml

from factory import DESK, FULL
from virtmimo.errors import ConfigError, SolverError
from virtmimo.harness.cli import main
from virtmimo.harness.config import from_dict, load_config, parse_override
from virtmimo.harness.experiment import CSV_COLUMNS, run_experiment

P_MAX = 1.9952623149688795

TINY = ["monte_carlo.num_drops=2", "sweep.values=[4]", "topology.antennas=4"]


def _write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


def _desk_dict():
    return yaml.safe_load(DESK.read_text())


def test_shipped_configs_load():
    full = load_config(FULL)
    assert full.topology.num_cells == 7 and full.topology.antennas == 32
    assert full.physics.p_max_watt == pytest.approx(P_MAX, rel=1e-12)
    desk = load_config(DESK)
    assert desk.monte_carlo.num_drops == 200 and tuple(desk.sweep.values) == (8, 16)


def test_overrides_take_precedence():
    cfg = load_config(DESK, ["solver.theta=0.3", ("monte_carlo.num_drops", 5)])
    assert cfg.solver.theta == 0.3 and cfg.monte_carlo.num_drops == 5
    assert parse_override("sweep.values=[1, 2]") == ("sweep.values", [1, 2])
    with pytest.raises(ConfigError, match="key=value"):
        parse_override("solver.theta")


def test_missing_sweep_axis_names_field(tmp_path):
    data = _desk_dict()
    del data["sweep"]["axis"]
    with pytest.raises(ConfigError) as info:
        load_config(_write(tmp_path, data))
    assert info.value.field == "sweep.axis"


@pytest.mark.parametrize("theta", [1.0, 0.0, [0.5, 1.0]])
def test_theta_endpoint_rejected(theta):
    with pytest.raises(ConfigError, match="open interval"):
        load_config(DESK, [("solver.theta", theta)])


@pytest.mark.parametrize("key, value, field", [
    ("topology.num_cells", 4, "topology.num_cells"),
    ("monte_carlo.num_drops", 0, "monte_carlo.num_drops"),
    ("schemes", ["PROPOSED", "MAGIC"], "schemes"),
    ("solver.p_w", 40, "solver.p_w"),
    ("sweep.axis", "SPEED", "sweep.axis"),
    ("topology.bogus", 1, "topology.bogus"),
])
def test_invalid_fields_are_labelled(key, value, field):
    with pytest.raises(ConfigError) as info:
        load_config(DESK, [(key, value)])
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_yaml_syntax_error_reports_line(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("topology:\n  num_cells: 3\n  antennas: [8\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(p)


def test_round_trip_through_dict():
    cfg = load_config(DESK)
    assert from_dict(cfg.to_dict()) == cfg


def test_drop_seeds_are_stable():
    a = load_config(DESK).drop_seeds()
    b = load_config(DESK, ["schemes=[PROPOSED]"]).drop_seeds()
    assert a == b and len(a) == 200


def test_adding_schemes_keeps_rows_unchanged():
    small = load_config(DESK, TINY + ["schemes=[PROPOSED]"])
    full = load_config(DESK, TINY)
    a = run_experiment(small).select(scheme="PROPOSED")
    b = run_experiment(full).select(scheme="PROPOSED")
    assert a == b


def test_csv_schema_and_determinism():
    cfg = load_config(DESK, TINY)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.to_csv() == b.to_csv() and a.to_jsonl() == b.to_jsonl()
    header = a.to_csv().splitlines()[0].split(",")
    assert tuple(header) == CSV_COLUMNS
    schemes = [r["scheme"] for r in a.rows]
    assert schemes == ["PROPOSED", "VIRTUAL_ONLY", "COOP_ZF", "FD"]
    coop = a.select(scheme="COOP_ZF")[0]
    assert coop["theta"] is None and coop["p_w_mean"] is None
    diag = [json.loads(line) for line in a.to_jsonl().splitlines()]
    assert sum(diag[0]["branch_counts"].values()) == 2 * 3


def test_virtual_only_matches_proposed_with_isolation():
    cfg = load_config(DESK, ["monte_carlo.num_drops=3", "sweep.values=[16]",
                             "schemes=[PROPOSED, VIRTUAL_ONLY]"])
    res = run_experiment(cfg)
    p, v = res.select(scheme="PROPOSED")[0], res.select(scheme="VIRTUAL_ONLY")[0]
    assert p["r_bar"] == pytest.approx(v["r_bar"], rel=1e-6)


def test_solver_error_carries_context(monkeypatch):
    import virtmimo.harness.experiment as exp

    def boom(*a, **k):
        raise SolverError("bracket failure", cell=1)

    monkeypatch.setattr(exp, "solve_network", boom)
    with pytest.raises(SolverError) as info:
        run_experiment(load_config(DESK, TINY + ["schemes=[PROPOSED]"]))
    assert info.value.context["drop"] == 0
    assert info.value.context["scheme"] == "PROPOSED"
    assert info.value.context["cell"] == 1


def test_cli_validate_reports_resolved_values(capsys):
    assert main(["validate", str(FULL)]) == 0
    out = capsys.readouterr().out
    assert "33 dBm = 1.99526 W" in out
    assert "-122.24 dBm" in out
    assert "master seed 20160601" in out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["validate", str(DESK), "--set", "solver.theta=1.0"]) == 1
    assert "solver.theta" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.yaml")]) == 1
    # Cooperative ZF is undefined with fewer antennas than users.
    assert main(["validate", str(DESK), "--set", "sweep.values=[2]"]) == 1
    assert "COOP_ZF" in capsys.readouterr().err


def test_cli_solver_error_exit_code(monkeypatch, tmp_path):
    import virtmimo.harness.experiment as exp

    def boom(*a, **k):
        raise SolverError("bracket failure", cell=0)

    monkeypatch.setattr(exp, "solve_network", boom)
    out = tmp_path / "x.csv"
    assert main(["sweep", str(DESK), "--drops", "1", "--out", str(out)]) == 2


def test_cli_solve_dumps_json(capsys):
    assert main(["solve", str(DESK), "--drop", "1", "--value-index", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == 16 and len(out["cells"]) == 3
    assert all(c["power_w"] <= c["p_max_w"] * (1 + 1e-9) for c in out["cells"])


def test_cli_sweep_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "r" / "sweep.csv"
    args = ["sweep", str(DESK), "--drops", "2", "--out", str(out)]
    for item in TINY[1:]:
        args += ["--set", item]
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 5
    diag = out.with_suffix(".diag.jsonl").read_text().splitlines()
    assert len(diag) == 4
    assert np.isfinite(float(lines[1].split(",")[5]))
