import csv
import json
import xml.etree.ElementTree as ET

import pytest

from sievelab.cli import main
from sievelab.config import DEFAULTS, ConfigError, apply_env, config_from_dict, parse_config
from sievelab.geometry import plan_from_json
from sievelab.report import csv_columns, write_svg_plot

FAST = {"mesh": {"h0": 0.0625}, "heat": {"steps": 16, "samples": 4}}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, ""))
    assert cfg["dimension"] == 2 and cfg["eps"] == [0.25, 0.125, 0.0625]
    assert cfg["kernel"] == {"kind": "constant", "value": 1.0}
    assert cfg["d_law"] == {"c": 1.0, "p": 3.0}
    assert cfg.data == config_from_dict(DEFAULTS).data


def test_small_power_rejected_with_assumption_id(tmp_path):
    with pytest.raises(ConfigError, match="d-law-5\\+"):
        parse_config(write(tmp_path, {"d_law": {"p": 1}}))


def test_unknown_keys_named(tmp_path):
    with pytest.raises(ConfigError, match="'foo'"):
        parse_config(write(tmp_path, {"foo": 1}))
    with pytest.raises(ConfigError, match="'mesh.bar'"):
        parse_config(write(tmp_path, {"mesh": {"bar": 2}}))
    with pytest.raises(ConfigError, match="kernel.width"):
        parse_config(write(tmp_path, {"kernel": {"kind": "gaussian", "width": 2}}))


def test_malformed_and_constraints(tmp_path):
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(write(tmp_path, "{"))
    with pytest.raises(ConfigError):
        config_from_dict({"eps": [0.125, 0.25]})
    with pytest.raises(ConfigError, match="d-law-4"):
        config_from_dict({"dimension": 3, "d_law": {"p": 4.5}})
    assert config_from_dict({"dimension": 3})["d_law"]["p"] == 2.5
    assert config_from_dict({"topology": "boundary"})["source"] == "x1sq"


def test_env_overrides_and_hash():
    cfg = config_from_dict({})
    out = apply_env(cfg, {"SIEVELAB_THREADS": "3", "SIEVELAB_OUTPUT_DIR": "/tmp/x", "OTHER": "1"})
    assert out["threads"] == 3 and out["output_dir"] == "/tmp/x"
    assert out.hash == cfg.hash
    assert config_from_dict({"eps": [0.25]}).hash != cfg.hash
    with pytest.raises(ConfigError):
        apply_env(cfg, {"SIEVELAB_THREADS": "many"})


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_cli_audit_default(tmp_path, capsys):
    assert main(["audit", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "audit.csv")
    assert len(rows) == 3 * 13 and all(r["passed"] == "1" for r in rows if r["gating"] == "1")


def test_cli_converge_constant_source(tmp_path):
    cfg = write(tmp_path, dict(FAST, source="one"))
    assert main(["converge", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_rows(tmp_path / "o" / "converge.csv")
    assert list(rows[0]) == csv_columns(5)
    for r in rows:
        if r["experiment"] == "resolvent":
            assert float(r["err_l2"]) < 1e-12
        if r["experiment"] == "heat":
            assert float(r["heat_sup_err"]) < 1e-12
    assert len({r["config_hash"] for r in rows}) == 1 and rows[0]["wall_ms"] == ""
    ET.parse(tmp_path / "o" / "converge.svg")


def test_cli_enlarged_holes_stop_at_audit(tmp_path, capsys):
    cfg = write(tmp_path, dict(FAST, hole_scale=3.0))
    assert main(["converge", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "audit failed" in capsys.readouterr().err
    assert not (tmp_path / "converge.csv").exists()


def test_cli_trend_failure_exit_two(tmp_path):
    cfg = write(tmp_path, FAST)
    assert main(["converge", "--config", cfg, "--eps-list", "0.25,0.2",
                 "--out", str(tmp_path)]) == 2


def test_cli_hard_errors(tmp_path, capsys):
    assert main(["audit", "--config", write(tmp_path, {"foo": 1})]) == 1
    assert "foo" in capsys.readouterr().err
    assert main(["eigen", "--config", write(tmp_path, {"dimension": 3}, "c3.json"),
                 "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_cli_dump_plan_and_mesh(tmp_path):
    assert main(["dump-plan", "--eps-list", "0.25,0.125", "--out", str(tmp_path)]) == 0
    plan = plan_from_json(tmp_path / "plan_eps0.125.json")
    assert plan.n_passages == 49
    assert main(["dump-mesh", "--model", "full", "--eps-list", "0.25", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "mesh_eps0.25_passages.txt").exists()


def test_cli_three_dimensional_audit(tmp_path):
    cfg = write(tmp_path, {"dimension": 3, "eps": [0.125]})
    # d = eps^2.5 gives 2 d / rho = 4 eps^(1/2) > 1 at eps = 1/8
    assert main(["audit", "--config", cfg, "--out", str(tmp_path)]) == 1
    failed = {r["check"] for r in read_rows(tmp_path / "audit.csv") if r["passed"] == "0"}
    assert "2drho" in failed


def test_svg_without_positive_data(tmp_path):
    p = write_svg_plot(tmp_path / "x.svg", {"zero": ([0.25, 0.125], [0.0, 0.0])})
    assert "no positive data" in p.read_text()
    ET.parse(p)
