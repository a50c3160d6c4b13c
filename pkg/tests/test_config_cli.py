import csv
import json

import pytest

from axongrowth import build_config
from axongrowth.cli import main
from axongrowth.config import config_fingerprint, load_config, with_override
from axongrowth.errors import ConfigError
from axongrowth.model import PhysicalParams
from axongrowth.triggering import dwell_time

SHORT = {"solver": {"t_final_s": 0.02, "output_stride": 10}}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_empty_file_gives_reference_defaults(tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("")
    cfg = load_config(f, echo_dir=tmp_path / "out")
    assert cfg.physical == PhysicalParams()
    assert cfg.physical.D == 1e-11 and cfg.physical.l_s == 12e-6 and cfg.physical.l_0 == 1e-6
    assert cfg.gains.k1 == -0.001 and cfg.gains.k2 == 3e13
    tp = cfg.trigger
    assert (tp.gamma, tp.eta, tp.sigma, tp.rho, tp.m0, tp.h) == (1.0, 2.0, 0.8, 1.5e-15, -0.5, 5e-4)
    assert tp.betas == (2.5e8, 8e9, 1e11, 4e11, 4.5e11)
    assert cfg.modes == ("continuous", "cetc", "petc")
    assert (tmp_path / "out" / "resolved_config.json").exists()


def test_sigma_violation_names_rule():
    with pytest.raises(ConfigError, match=r"trigger\.sigma ∈ \(0,1\)"):
        build_config({"trigger": {"sigma": 1.2}})


def test_h_above_dwell_time_rejected_unless_forced():
    tau = dwell_time(build_config({}).trigger).tau_min
    h = 0.3
    assert h > tau
    raw = {"trigger": {"h_s": h}, "solver": {"dt_s": 1e-4}, "experiment": {"modes": ["petc"]}}
    with pytest.raises(ConfigError, match="h <= tau"):
        build_config(raw)
    assert build_config(raw, force_h=True).trigger.h == h


def test_h_one_millisecond_rejected():
    # reference example: 1 ms is expected to exceed the dwell time
    with pytest.raises(ConfigError, match="h <= tau"):
        build_config({"trigger": {"h_s": 1e-3}})


@pytest.mark.parametrize(
    "raw, path",
    [
        ({"physical": {"D": 1e-11}}, "physical.D"),
        ({"bogus": {}}, "bogus"),
        ({"solver": {"n_grid": 4}}, "solver.n_grid"),
        ({"gains": {"k2": 1.0}}, "gains.k2"),
        ({"trigger": {"h_s": 1.5e-4}}, "trigger.h_s"),
        ({"experiment": {"modes": ["fast"]}}, "experiment.modes"),
    ],
)
def test_schema_errors_name_field(raw, path):
    with pytest.raises(ConfigError) as exc:
        build_config(raw)
    assert exc.value.path == path


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/config.json")


def test_fingerprint_reproducible_from_resolved_file(tmp_path):
    cfg = load_config(_write(tmp_path / "c.json", {"trigger": {"sigma": 0.5}}), echo_dir=tmp_path)
    resolved = json.loads((tmp_path / "resolved_config.json").read_text())
    assert config_fingerprint(resolved) == cfg.fingerprint()
    assert cfg.fingerprint() != build_config({}).fingerprint()


def test_with_override_revalidates():
    base = build_config({})
    assert with_override(base, "trigger.sigma", 0.5).trigger.sigma == 0.5
    with pytest.raises(ConfigError):
        with_override(base, "trigger.sigma", 2.0)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_cli_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path / "bad.json", {"trigger": {"sigma": 1.2}})
    assert main(["dwell", "--config", bad]) == 2
    assert "trigger.sigma" in capsys.readouterr().err
    good = _write(tmp_path / "good.json", {})
    assert main(["dwell", "--config", good]) == 0
    out = capsys.readouterr().out.splitlines()
    fields = dict(zip(out[0].split("\t"), out[1].split("\t")))
    assert float(fields["h_s"]) == 5e-4
    assert float(fields["tau_closed_s"]) > 0 and float(fields["tau_integral_s"]) > 0
    assert main(["kernels", "--config", good, "--check", "--out", str(tmp_path / "k")]) == 0
    assert (tmp_path / "k" / "kernel_report.json").exists()


def test_cli_verification_failure_exit_code(tmp_path, monkeypatch):
    import axongrowth.cli as cli

    monkeypatch.setattr(cli, "kernel_report", lambda cfg: {"passed": False, "checks": {
        "phi0": {"value": 1.0, "tol": 1e-12, "passed": False}}})
    good = _write(tmp_path / "good.json", {})
    assert main(["kernels", "--config", good, "--check"]) == 4


def test_simulate_aborted_run_exit_code(tmp_path):
    # the early transient overshoots 13 um, so this cap forces an abort
    cfg = _write(tmp_path / "c.json", {"solver": {"t_final_s": 5.0, "l_cap_m": 1.3e-5}})
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--mode", "continuous", "--out", str(out), "--no-plots"]) == 3
    assert (out / "ABORTED").exists()
    rows = _rows(out / "timeseries.csv")
    assert rows and float(rows[-1]["t_s"]) < 5.0
    assert json.loads((out / "metrics.json").read_text())["status"] != "ok"


def test_simulate_twice_byte_identical(tmp_path):
    cfg = _write(tmp_path / "c.json", SHORT)
    for name in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--mode", "cetc", "--out", str(tmp_path / name), "--no-plots"]) == 0
    for f in ("timeseries.csv", "events.jsonl", "metrics.json", "resolved_config.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_outputs(tmp_path):
    cfg = _write(tmp_path / "c.json", SHORT)
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--mode", "petc", "--out", str(out), "--lyapunov"]) == 0
    with open(out / "timeseries.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["t_s", "l_m", "c_c_mol_m3", "U_continuous", "U_applied", "d", "m", "gamma_p",
                      "event_flag", "err_l2_u", "V"]
    rows = _rows(out / "timeseries.csv")
    t = [float(r["t_s"]) for r in rows]
    assert all(b > a for a, b in zip(t, t[1:]))
    assert all(r["V"] != "" for r in rows)
    metrics = json.loads((out / "metrics.json").read_text())
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert metrics["config_fingerprint"] == config_fingerprint(resolved)
    assert (out / "run.png").exists()


def test_compare_structure(tmp_path):
    cfg = _write(tmp_path / "c.json", {"solver": {"t_final_s": 0.2, "output_stride": 10}})
    out = tmp_path / "cmp"
    assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
    table = {r["mode"]: r for r in _rows(out / "comparison.csv")}
    assert set(table) == {"continuous", "cetc", "petc"}
    assert int(table["continuous"]["event_count"]) == 0
    assert int(table["cetc"]["event_count"]) > 0
    metrics = json.loads((out / "petc" / "metrics.json").read_text())
    assert int(table["petc"]["event_count"]) <= metrics["monitors"]["petc_checks"]
    aligned = _rows(out / "inputs_aligned.csv")
    assert list(aligned[0]) == ["t_s", "U_continuous", "U_cetc", "U_petc"]
    for name in ("inputs.png", "lengths.png", "resolved_config.json"):
        assert (out / name).exists()


def test_sweep_permutation_invariance(tmp_path):
    cfg = _write(tmp_path / "c.json", SHORT)

    def sweep(values, name):
        out = tmp_path / name
        code = main(["sweep", "--config", cfg, "--param", "trigger.sigma", "--values", values,
                     "--mode", "cetc", "--out", str(out), "--workers", "2"])
        assert code == 0
        return {r["value"]: r for r in _rows(out / "summary.csv")}

    a = sweep("0.3,0.5,0.8", "a")
    b = sweep("0.8,0.3,0.5", "b")
    assert a == b
