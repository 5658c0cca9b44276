import json
import math

import numpy as np
import pytest

from knads.angular import eigenvalues_by_label
from knads.cli import main, parse_config
from knads.geometry import BlackHoleParams, extremal_mass, find_horizons
from knads.operators import ModeContext

BASE = {
    "m": 1.0,
    "a": 0.2,
    "q_e": 0.1,
    "q_m": 0.0,
    "l": 1.0,
    "mu": 1.0,
    "e": 0.1,
    "k": 0.5,
}


def write_config(tmp_path, name="cfg.json", **extra):
    cfg = dict(BASE)
    cfg.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def parse_csv(text):
    lines = [ln for ln in text.strip().split("\n") if ln]
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def test_horizons_csv(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["horizons", "--config", cfg])
    assert rc == 0
    header, rows = parse_csv(out)
    assert header[:3] == ["r_plus", "r_minus", "extremal"]
    assert len(rows) == 1
    hd = find_horizons(BlackHoleParams(**{k: BASE[k] for k in ("m", "a", "q_e", "q_m", "l")}))
    # 17 significant digits: the printed value round-trips exactly
    assert float(rows[0]["r_plus"]) == hd.r_plus
    assert rows[0]["extremal"] == "False"
    assert float(rows[0]["horizon_slope"]) > 0.0


def test_extremal_csv(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["extremal", "--config", cfg])
    assert rc == 0
    _, rows = parse_csv(out)
    row = rows[0]
    assert row["side"] == "above"
    m_ext = extremal_mass(0.2, 0.1**2, 1.0)
    assert float(row["extremal_mass"]) == m_ext
    assert float(row["margin"]) == pytest.approx(1.0 - m_ext)


def test_classify_json_and_gauge_flag(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["classify", "--config", cfg, "--format", "json"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["essentially_self_adjoint"] is True
    assert doc["d"] == 0.0
    assert len(doc["rows"]) == 4
    verdicts = {r["endpoint"]: r["verdict"] for r in doc["rows"]}
    assert set(verdicts.values()) == {"LimitPoint"}

    rc, out, _ = run(
        capsys,
        ["classify", "--config", cfg, "--format", "json", "--gauge-b", "1.0"],
    )
    assert json.loads(out)["joint_angular_code"] == "condirac"


def test_classify_csv_summary_line(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, err = run(capsys, ["classify", "--config", cfg])
    assert rc == 0
    header, rows = parse_csv(out)
    assert header == ["endpoint", "exponent", "verdict", "rationale_code"]
    assert len(rows) == 4
    assert "essentially_self_adjoint=True" in err


def test_angular_with_oracle(tmp_path, capsys):
    cfg = write_config(tmp_path, window=[-2.5, 2.5], oracle_n=600)
    rc, out, _ = run(capsys, ["angular", "--config", cfg, "--oracle"])
    assert rc == 0
    header, rows = parse_csv(out)
    assert header == ["label", "lambda", "residual", "oracle_lambda", "oracle_delta"]
    assert len(rows) >= 2
    for row in rows:
        assert abs(float(row["oracle_delta"])) < 1e-3
        assert float(row["residual"]) < 1e-8


def test_angular_plain_columns(tmp_path, capsys):
    cfg = write_config(tmp_path, window=[-2.5, 2.5])
    rc, out, _ = run(capsys, ["angular", "--config", cfg])
    assert rc == 0
    header, rows = parse_csv(out)
    assert header == ["label", "lambda", "residual"]
    labels = [int(r["label"]) for r in rows]
    assert labels == sorted(labels) and 0 not in labels


def test_radial_records(tmp_path, capsys):
    cfg = write_config(tmp_path, **{"lambda": 1.0})
    rc, out, _ = run(capsys, ["radial", "--config", cfg])
    assert rc == 0
    header, rows = parse_csv(out)
    assert header == ["record", "label", "value", "residual", "passed", "detail"]
    kinds = [r["label"] for r in rows if r["record"] == "certificate"]
    assert kinds == ["Hor_AC_L1", "Levinson_phi_plus", "Hinf_discrete"]
    assert all(r["passed"] == "True" for r in rows if r["record"] == "certificate")
    eig = [r for r in rows if r["record"] == "eigenvalue"]
    assert eig and all(float(r["residual"]) < 1e-8 for r in eig)


def test_radial_couples_to_angular_eigenvalue(tmp_path, capsys):
    cfg = write_config(tmp_path, window=[-5.0, 5.0])
    rc, out, _ = run(capsys, ["radial", "--config", cfg, "--format", "json"])
    assert rc == 0
    doc = json.loads(out)
    p = BlackHoleParams(**{k: BASE[k] for k in ("m", "a", "q_e", "q_m", "l")})
    ctx = ModeContext(mu=1.0, e=0.1, k=0.5)
    assert doc["lambda"] == pytest.approx(
        eigenvalues_by_label(p, ctx, [1])[1], abs=1e-10
    )


def test_scan_deterministic_output(tmp_path, capsys):
    cfg = write_config(
        tmp_path, omega_min=-0.3, omega_max=0.3, omega_step=0.15, j_window=1
    )
    out1 = tmp_path / "scan1.csv"
    out2 = tmp_path / "scan2.csv"
    rc, _, err = run(capsys, ["scan", "--config", cfg, "--out", str(out1)])
    assert rc == 0
    rc, _, _ = run(capsys, ["scan", "--config", cfg, "--out", str(out2)])
    assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = parse_csv(out1.read_text())
    assert header == [
        "omega", "j", "lambda", "phi_plus", "slope",
        "amplitude_ratio", "decay_exponent", "verdict_code",
    ]
    assert len(rows) == 5 * 2
    assert all(r["verdict_code"] != "amp_collapse" for r in rows)


def test_scan_verdict_line_on_stderr(tmp_path, capsys):
    cfg = write_config(
        tmp_path, omega_min=-0.2, omega_max=0.2, omega_step=0.2, j_window=1
    )
    rc, out, err = run(capsys, ["scan", "--config", cfg])
    assert rc == 0
    assert "verdict=NoBoundStateFound" in err
    assert "verdict_code" in out.split("\n")[0]


def test_tortoise_table(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["tortoise", "--config", cfg])
    assert rc == 0
    _, rows = parse_csv(out)
    assert len(rows) == 46
    ys = np.array([float(r["y"]) for r in rows])
    assert np.all(np.diff(ys) < 0)
    assert all(float(r["x"]) == -float(r["y"]) for r in rows)


def test_out_file_matches_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["horizons", "--config", cfg])
    dest = tmp_path / "h.csv"
    rc2, _, _ = run(capsys, ["horizons", "--config", cfg, "--out", str(dest)])
    assert rc == rc2 == 0
    assert dest.read_text() == out


def test_json_format(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc, out, _ = run(capsys, ["horizons", "--config", cfg, "--format", "json"])
    doc = json.loads(out)
    assert doc["columns"][0] == "r_plus"
    assert isinstance(doc["rows"][0]["r_plus"], float)


def test_exit_code_2_validation(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"m": 1.0}))
    rc, _, err = run(capsys, ["horizons", "--config", str(missing)])
    assert rc == 2 and "missing config fields" in err

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps(dict(BASE, bogus=1)))
    rc, _, err = run(capsys, ["horizons", "--config", str(unknown)])
    assert rc == 2 and "unknown config fields" in err

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    rc, _, err = run(capsys, ["horizons", "--config", str(broken)])
    assert rc == 2 and "not valid JSON" in err

    rc, _, err = run(capsys, ["horizons", "--config", str(tmp_path / "nope.json")])
    assert rc == 2 and "cannot read config" in err

    fast_spin = write_config(tmp_path, "fast.json", a=2.0)
    rc, _, err = run(capsys, ["horizons", "--config", fast_spin])
    assert rc == 2 and "a**2 < l**2" in err

    bad_k = write_config(tmp_path, "badk.json", k=1.0)
    rc, _, err = run(capsys, ["classify", "--config", bad_k])
    assert rc == 2 and "odd integer" in err

    bad_window = write_config(tmp_path, "badw.json", window=[1.0])
    rc, _, err = run(capsys, ["angular", "--config", bad_window])
    assert rc == 2 and "window" in err


def test_exit_code_3_solver(tmp_path, capsys):
    # mass below the extremal bound: no horizon
    light = write_config(tmp_path, "light.json", m=0.05, a=0.5, q_e=0.5)
    rc, _, err = run(capsys, ["horizons", "--config", light])
    assert rc == 3 and "NoHorizon" in err

    # limit circle at infinity: the confined solver refuses
    lc = write_config(tmp_path, "lc.json", mu=0.3, **{"lambda": 1.0})
    rc, _, err = run(capsys, ["radial", "--config", lc])
    assert rc == 3 and "NotLimitPoint" in err

    massless = write_config(tmp_path, "m0.json", mu=0.0, **{"lambda": 1.0})
    rc, _, err = run(capsys, ["radial", "--config", massless])
    assert rc == 3 and "NotConfining" in err


def test_config_round_trip(tmp_path):
    cfg = parse_config(json.dumps(dict(BASE, omega=0.7, window=[-2.0, 2.0])))
    again = parse_config(cfg.to_json())
    assert again == cfg
    # defaults are omitted from the serialized form
    bare = parse_config(json.dumps(BASE))
    keys = set(json.loads(bare.to_json()))
    assert keys == set(BASE)


def test_config_lambda_field_mapping(tmp_path):
    cfg = parse_config(json.dumps(dict(BASE, **{"lambda": 2.5})))
    assert cfg.lam == 2.5
    assert json.loads(cfg.to_json())["lambda"] == 2.5
