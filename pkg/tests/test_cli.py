import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from cylgrating.cli import main, parse_run_spec, parse_run_text, run, validate_spec
from cylgrating.errors import ConfigError

MINIMAL = """
[grating]
lambda0 = 1.0
theta_i = 60
phi_i = 30
eps_r = 2.25
a = 0.001
d = 0.02
"""

SWEEP = """
[grating]
theta_i = 60
phi_i = 30
eps_r = {eps}
krd = 0.1
a_over_d = 0.05

[sweep]
a_over_d = {ratios}

[run]
tasks = {tasks}
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_minimal_config_defaults():
    spec = parse_run_text(MINIMAL + "[run]\ntasks = solve_exact\n")
    (point,) = spec.points
    cfg = point.config
    assert cfg.mu_r == 1.0 and cfg.E0 == 1.0 and cfg.units_mode == "normalized"
    assert cfg.theta_i == pytest.approx(math.pi / 3)
    assert point.params["a_over_d"] == pytest.approx(0.05)
    assert spec.N == 8 and spec.order == 4


def test_fill_ratio_limit_is_reported():
    with pytest.raises(ConfigError, match="xi"):
        parse_run_text(MINIMAL.replace("d = 0.02", "d = 0.001666"))


def test_anomaly_config_is_rejected():
    text = "[grating]\nlambda0 = 1\ntheta_i = 90\nphi_i = 0\neps_r = 2\na = 0.1\nd = 1.0\n"
    with pytest.raises(ConfigError, match="AnomalyError"):
        parse_run_text(text)


def test_unknown_key_and_bad_values():
    with pytest.raises(ConfigError, match="grating.colour"):
        parse_run_text(MINIMAL + "colour = red\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_run_text(MINIMAL + "[extra]\nx = 1\n")
    with pytest.raises(ConfigError, match="grating.eps_r"):
        parse_run_text(MINIMAL.replace("eps_r = 2.25", "eps_r = glass"))
    with pytest.raises(ConfigError, match="task"):
        validate_spec(parse_run_text(MINIMAL + "[run]\ntasks = plot\n"))
    with pytest.raises(ConfigError, match="at least one task"):
        validate_spec(parse_run_text(MINIMAL))


def test_sweep_ranges():
    spec = parse_run_text(SWEEP.format(eps=2.25, ratios="logspace(0.01, 0.1, 4)", tasks="compare"))
    ratios = [p.params["a_over_d"] for p in spec.points]
    assert ratios == pytest.approx(np.geomspace(0.01, 0.1, 4))
    assert all(p.params["krd"] == pytest.approx(0.1) for p in spec.points)
    assert spec.sweep_axes == ("a_over_d",)


def test_vacuum_solve_gives_zero_csv(tmp_path):
    spec = validate_spec(parse_run_text(MINIMAL.replace("2.25", "1.0") + "[run]\ntasks = solve_exact\n"))
    run(spec, tmp_path)
    rows = read_csv(tmp_path / "coefficients_exact.csv")
    assert [int(r["n"]) for r in rows] == list(range(-8, 9))
    vals = np.array([[float(r[k]) for k in ("re_A", "im_A", "re_AH", "im_AH")] for r in rows])
    assert np.abs(vals).max() < 1e-14
    report = json.loads((tmp_path / "report.json").read_text())
    point = report["points"][0]
    assert point["solve_neumann"] is None and point["fields"] is None
    assert point["solve_exact"]["residual"] <= 1e-12


def test_compare_sweep_reports_remainder_exponent(tmp_path):
    spec = validate_spec(parse_run_text(SWEEP.format(eps=2.25, ratios="0.05, 0.1", tasks="compare")))
    run(spec, tmp_path)
    report = json.loads((tmp_path / "report.json").read_text())
    fits = report["fits"]["remainder_exponents"]
    for n in ("1", "-1"):
        assert isinstance(fits[n]["q"], float) and fits[n]["expected_min"] == 6
    for point in report["points"]:
        for mode in point["compare"]["modes"].values():
            assert mode["relative_error_A"] >= 0
    assert not (tmp_path / "coefficients_exact.csv").exists()


def test_lattice_check_table(tmp_path):
    spec = validate_spec(parse_run_text(SWEEP.format(eps=2.25, ratios="0.05", tasks="lattice_check")))
    run(spec, tmp_path)
    report = json.loads((tmp_path / "report.json").read_text())
    orders = report["points"][0]["lattice_check"]["orders"]
    assert sorted(orders, key=int) == [str(n) for n in range(6)]
    for n in ("2", "4"):
        assert orders[n]["deviation"] < 0.05


def test_fields_csv(tmp_path):
    text = SWEEP.format(eps=2.25, ratios="0.1", tasks="fields") + "[fields]\nnx = 5\nny = 4\n"
    run(validate_spec(parse_run_text(text)), tmp_path)
    rows = read_csv(tmp_path / "fields.csv")
    assert len(rows) == 20
    centre = [r for r in rows if float(r["x"]) == 0 and abs(float(r["y"])) < 1e-3]
    assert all(math.isnan(float(r["re_Ez"])) for r in centre)
    info = json.loads((tmp_path / "report.json").read_text())["points"][0]["fields"]
    assert info["truncation_estimate"] < 1e-12


def test_exit_codes(tmp_path, caplog):
    good = write(tmp_path, SWEEP.format(eps=2.25, ratios="0.05", tasks="solve_exact"))
    assert main(["--config", str(good), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    bad = write(tmp_path, MINIMAL + "colour = red\n", "bad.ini")
    assert main(["--config", str(bad), "--out", str(tmp_path / "o2")]) == 2
    assert "grating.colour" in caplog.text
    # Neumann iteration diverges for large cylinders near the first Rayleigh condition
    div = write(tmp_path, "[grating]\ntheta_i = 60\nphi_i = 30\neps_r = 2.25\nkrd = 4.105\n"
                "a_over_d = 0.45\n[run]\ntasks = solve_neumann\n", "div.ini")
    assert main(["--config", str(div), "--out", str(tmp_path / "o3"), "--quiet"]) == 3
    assert not (tmp_path / "o3" / "report.json").exists()
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--config", str(good), "--out", str(blocker / "sub"), "--quiet"]) == 4
    assert main(["--config", str(tmp_path / "missing.ini"), "--quiet"]) == 4


def test_cli_overrides(tmp_path):
    path = write(tmp_path, SWEEP.format(eps=2.25, ratios="0.05", tasks="solve_exact"))
    spec = parse_run_spec(path, tasks=["asymptotic"], tol=1e-10, max_order=2)
    assert spec.tasks == ("asymptotic",) and spec.tol == 1e-10 and spec.order == 2
    with pytest.raises(SystemExit):
        main(["--config", str(path), "--max-order", "3"])


def test_partial_outputs_removed(tmp_path):
    out = tmp_path / "out"
    (out / "report.json").mkdir(parents=True)
    path = write(tmp_path, SWEEP.format(eps=2.25, ratios="0.05", tasks="solve_exact, asymptotic"))
    assert main(["--config", str(path), "--out", str(out), "--quiet"]) == 4
    assert not (out / "coefficients_exact.csv").exists()
    assert not (out / "asymptotic.csv").exists()


def test_byte_identical_reruns(tmp_path):
    text = SWEEP.format(eps=2.25, ratios="0.025, 0.05", tasks="solve_exact, solve_neumann, asymptotic, compare")
    path = write(tmp_path, text + "[fields]\nnx = 3\nny = 3\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["--config", str(path), "--out", str(out), "--quiet", "--task", "compare",
                     "--task", "solve_exact", "--task", "fields"]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"coefficients_exact.csv", "fields.csv", "report.json"}
