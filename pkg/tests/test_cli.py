import json

import numpy as np
import pytest
from click.testing import CliRunner

from vortexlab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_renorm_closed_form(runner, tmp_path):
    cfg = tmp_path / "v.json"
    cfg.write_text(json.dumps({
        "domain": "disk",
        "vortices": [{"a": [0.2, 0.0], "d": 1}],
    }))
    res = runner.invoke(main, ["renorm", "--config", str(cfg)])
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["W"] == pytest.approx(-np.pi * np.log(1 - 0.04), rel=1e-10)
    assert out["method"] == "closed-form"


def test_renorm_config_error_exit_code(runner, tmp_path):
    cfg = tmp_path / "v.json"
    cfg.write_text(json.dumps({"domain": "disk"}))
    res = runner.invoke(main, ["renorm", "--config", str(cfg)])
    assert res.exit_code == 2


def test_ode_and_compare(runner, tmp_path):
    cfg = tmp_path / "ode.json"
    cfg.write_text(json.dumps({
        "domain": "disk", "alpha0": 1.0, "t_end": 0.05,
        "vortices": [{"a": [0.35, 0.0], "d": 1}],
    }))
    res = runner.invoke(main, ["--out", str(tmp_path / "run"),
                               "ode", "--kind", "gl", "--config", str(cfg)])
    assert res.exit_code == 0, res.output
    csv = tmp_path / "run" / "ode.csv"
    assert csv.exists()
    res2 = runner.invoke(main, ["compare", str(csv), str(csv)])
    assert res2.exit_code == 0, res2.output
    out = json.loads(res2.output)
    assert out["sup_distance"] == 0.0


def test_scenario_list_names_bundled(runner):
    res = runner.invoke(main, ["scenario", "list"])
    assert res.exit_code == 0
    assert "gl-sweep-disk" in res.output
    assert "llg-gyro-sign" in res.output


def test_unknown_scenario_is_config_error(runner):
    res = runner.invoke(main, ["scenario", "run", "no-such-scenario"])
    assert res.exit_code == 2
