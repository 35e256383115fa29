import json

import pytest

from crn_clockwork import OscillatorConfig, PolynomialOde, subsystem_polynomials
from crn_clockwork.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "out.csv"
    code, text, _ = run(capsys, "simulate", "--scenario", "standard", "--t-end", "5", "-o", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x,y,u,v"
    assert lines[1].startswith("0,5,5,0,0")
    assert "max" in text


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "simulate", "--t-end", "3", "-o", str(a))
    run(capsys, "simulate", "--t-end", "3", "-o", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_simulate_json_output(tmp_path, capsys):
    out = tmp_path / "trace.json"
    code, *_ = run(capsys, "simulate", "--scenario", "subsystem", "--t-end", "2", "-o", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["species"] == ["x", "y"]


def test_vdp2d_relaxes_between_branches(tmp_path, capsys):
    out = tmp_path / "vdp.json"
    code, *_ = run(capsys, "simulate", "--scenario", "vdp2d", "--x0", "5", "--y0", "5", "--t-end", "20", "-o", str(out))
    assert code == 0
    x = json.loads(out.read_text())["values"]["x"]
    late = x[len(x) // 4 :]
    assert 0.9 < min(late) < 1.2 and 4.8 < max(late) < 5.1


def test_unstable_equilibrium_start_warns(capsys):
    code, _, err = run(capsys, "simulate", "--scenario", "standard", "--x0", "3", "--y0", "3", "--t-end", "1")
    assert code == 0
    assert "initial point is the unstable equilibrium" in err


def test_simulate_loop_and_terminate_scenarios(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, *_ = run(capsys, "simulate", "--scenario", "terminate", "--t-end", "2", "-o", str(out))
    assert code == 0
    assert out.read_text().splitlines()[0] == "t,x,y,u,v,s1,s2,s3,w,l"
    code, *_ = run(capsys, "simulate", "--scenario", "loop", "--t-end", "2", "-o", str(out))
    assert out.read_text().splitlines()[0] == "t,x,y,u,v,s1,s2,s3"


def test_input_errors_exit_2(capsys):
    assert run(capsys, "simulate", "--eps1", "2")[0] == 2
    assert run(capsys, "simulate", "--x0", "-1")[0] == 2
    assert run(capsys, "simulate", "--t-end", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", "nope"])
    assert exc.value.code == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"t_end": 2.0, "scenario": "subsystem", "x0": 1.0}))
    out = tmp_path / "o.csv"
    code, *_ = run(capsys, "simulate", "--config", str(cfg), "--x0", "4", "-o", str(out))
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "t,x,y"
    assert rows[1].startswith("0,4,")
    assert rows[-1].startswith("2,")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    assert run(capsys, "simulate", "--config", str(bad))[0] == 2


def test_analyze_standard_passes(capsys):
    code, out, _ = run(capsys, "analyze")
    assert code == 0
    rep = json.loads(out)
    assert rep["clock"]["passes"]
    assert rep["periods"]["T_l_predicted"] == pytest.approx(10.470, abs=1e-3)
    assert rep["periods"]["T1_measured"] == pytest.approx(10.47, rel=0.1)


def test_analyze_stable_regime_exits_1(capsys):
    code, _, err = run(capsys, "analyze", "--ell", "1.5")
    assert code == 1
    assert "no oscillation: stable equilibrium" in err


def test_analyze_faster_eta1_halves_predictions(capsys):
    code, out, _ = run(capsys, "analyze", "--eta1", "0.2", "--t-end", "60")
    assert code == 0
    periods = json.loads(out)["periods"]
    assert periods["T_l_predicted"] == pytest.approx(10.4697 / 2, abs=1e-4)
    assert periods["T_h_predicted"] == pytest.approx(9.1925 / 2, abs=1e-4)


@pytest.mark.parametrize("point, tag", [(("6", "6"), "A1"), (("4", "4"), "A2"), (("3", "3"), "Equilibrium")])
def test_classify(capsys, point, tag):
    code, out, _ = run(capsys, "classify", "--x0", point[0], "--y0", point[1])
    assert code == 0 and out.strip() == tag


def test_classify_needs_point(capsys):
    assert run(capsys, "classify", "--x0", "1")[0] == 2


def test_realize_round_trip(tmp_path, capsys):
    src = tmp_path / "xy.json"
    src.write_text(subsystem_polynomials(OscillatorConfig()).to_json())
    net = tmp_path / "net.json"
    back = tmp_path / "back.json"
    assert run(capsys, "realize", str(src), "-o", str(net))[0] == 0
    assert len(json.loads(net.read_text())["reactions"]) == 7
    assert run(capsys, "realize", "--invert", str(net), "-o", str(back))[0] == 0
    assert PolynomialOde.from_json(back.read_text()) == PolynomialOde.from_json(src.read_text())
    assert json.loads(back.read_text()) == json.loads(src.read_text())


def test_realize_kinetic_violation_exits_2(tmp_path, capsys):
    src = tmp_path / "bad.json"
    src.write_text(json.dumps({"species": ["a"], "equations": {"a": [{"coeff": -1.0, "exps": {}}]}}))
    code, _, err = run(capsys, "realize", str(src))
    assert code == 2 and "kinetic condition" in err
    assert run(capsys, "realize", str(tmp_path / "missing.json"))[0] == 2


def test_demo_loop_reaches_three(capsys):
    code, out, _ = run(capsys, "demo-loop", "--t-end", "65")
    assert code == 0
    steps = json.loads(out)["staircase"]
    assert steps[2]["cycle"] == 3
    assert steps[2]["s1"] == pytest.approx(3.0, rel=0.03)


def test_demo_terminate(capsys):
    code, out, _ = run(capsys, "demo-terminate")
    assert code == 0
    assert 3.96 <= json.loads(out)["final_s1"] <= 4.10
    code, out, _ = run(capsys, "demo-terminate", "--l", "0", "--t-end", "40")
    assert code == 0
    assert json.loads(out)["max_s1"] <= 0.05


def test_sweep(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CRN_CLOCKWORK_THREADS", "2")
    code, out, _ = run(capsys, "sweep", "--ells", "2.5", "3", "--eta1s", "0.1", "0.2", "--predict-only")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "ell,eta1,T_l_pred,T_h_pred,T1_meas,T2_meas"
    assert len(lines) == 5
    assert run(capsys, "sweep", "--ells", "1.5", "--predict-only")[0] == 2
    monkeypatch.setenv("CRN_CLOCKWORK_THREADS", "many")
    assert run(capsys, "sweep", "--predict-only")[0] == 2


def test_sweep_with_measurement(capsys):
    code, out, _ = run(capsys, "sweep", "--ells", "2.5", "3.5", "--t-end", "80")
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    for row in rows:
        assert float(row[4]) == pytest.approx(float(row[2]), rel=0.1)
        assert float(row[5]) == pytest.approx(float(row[3]), rel=0.1)


def test_numerical_failure_exits_3(capsys, monkeypatch):
    import crn_clockwork.cli as cli
    from crn_clockwork import IntegrationError

    def broken(*args, **kwargs):
        raise IntegrationError("step size underflow")

    monkeypatch.setattr(cli, "integrate", broken)
    code, _, err = run(capsys, "simulate", "--t-end", "1")
    assert code == 3 and "numerical failure" in err
