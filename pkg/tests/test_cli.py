import io
import json

import pytest

from chunknet import analysis as an
from chunknet import checks, cli
from chunknet.cli import ConfigError, execute, main, parse_config
from chunknet.kernel import ReplicationError


def run(cfg_dict, **overrides):
    out, err = io.StringIO(), io.StringIO()
    code = execute(parse_config(json.dumps(cfg_dict), overrides), out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, cfg_dict, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg_dict))
    return str(p)


SIM = {"command": "simulate", "model": "single_chunk", "params": {"lambda": 2, "mu": 1, "nu": 2}, "reps": 3, "horizon": 5}


def test_parse_happy_path():
    cfg = parse_config('{"command":"lambda-star","model":"single_chunk","params":{"mu":1,"nu":2,"delta":1}}')
    assert cfg.command == "lambda-star" and cfg.params == {"mu": 1, "nu": 2, "delta": 1}
    assert cfg.seed == 0 and cfg.format == "csv"


def test_parse_rejects_negative_rate_by_name():
    with pytest.raises(ConfigError, match="lambda"):
        parse_config('{"command":"simulate","model":"two_chunk","params":{"lambda":-1,"mu1":1,"mu2":1,"nu":2}}')


def test_parse_rejects_unknown_param_by_name():
    with pytest.raises(ConfigError, match="mu3"):
        parse_config('{"command":"simulate","model":"two_chunk","params":{"lambda":1,"mu1":1,"mu2":1,"nu":2,"mu3":1}}')
    with pytest.raises(ConfigError, match="colour"):
        parse_config('{"command":"validate","colour":"red"}')


def test_parse_reports_json_position():
    with pytest.raises(ConfigError, match=r"line 2, column \d+"):
        parse_config('{"command":\n "simulate",,}')


@pytest.mark.parametrize(
    "bad, key",
    [
        ({"params": {"lambda": 2, "mu": 1}}, "nu"),
        ({"reps": 0}, "reps"),
        ({"horizon": -1}, "horizon"),
        ({"seed": -3}, "seed"),
        ({"format": "xml"}, "format"),
        ({"model": "nope"}, "nope"),
        ({"params": {"lambda": 2, "mu": 1, "nu": 2, "rate_fn": "magic"}}, "rate_fn"),
        ({"params": {"lambda": 2, "mu": 1, "nu": 2, "delta": 1.5}}, "delta"),
    ],
)
def test_parse_validation_errors_name_the_key(bad, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(json.dumps(SIM | bad))


def test_flag_overrides_replace_config_values():
    cfg = parse_config(json.dumps(SIM), {"seed": 9, "reps": 7, "horizon": 2.5, "format": "json-lines"})
    assert (cfg.seed, cfg.reps, cfg.horizon, cfg.format) == (9, 7, 2.5, "json-lines")
    with pytest.raises(ConfigError, match="conflicts"):
        parse_config(json.dumps(SIM), {"command": "classify"})


def test_classify_stdout_line():
    code, out, _ = run({"command": "classify", "model": "single_chunk", "params": {"lambda": 2, "mu": 1, "nu": 2}})
    assert code == 0 and out.strip() == "Transient (λ=2 > λ*=1.181232) [Transience Prop.]"


def test_lambda_star_stdout_line():
    code, out, _ = run({"command": "lambda-star", "model": "FreePlusOne", "params": {"mu": 1, "nu": 2}})
    assert code == 0 and out.strip() == "2.0"


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["simulate", "--config", write(tmp_path, SIM | {"bogus": 1})]) == 1
    assert "bogus" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1


def test_simulation_failure_exit_code(monkeypatch):
    def boom(*a, **k):
        raise ReplicationError(4, FloatingPointError("overflow"))

    monkeypatch.setattr(an, "estimate_growth_slope", boom)
    code, _, err = run(SIM | {"command": "drift"})
    assert code == 2 and "stream_index=4" in err


def test_validate_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(checks, "run_validation", lambda seed: [checks.CheckResult("x", False, "forced")])
    code, out, _ = run({"command": "validate"})
    assert code == 3 and "FAIL x: forced" in capsys.readouterr().out
    assert "0/1" in out


def test_csv_trajectory_schema_and_header(tmp_path):
    path = tmp_path / "traj.csv"
    cfg = SIM | {"max_events": 20, "output": str(path)}
    code, _, _ = run(cfg)
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    header = json.loads(lines[0][2:])
    assert header["seed"] == 0 and header["params"] == SIM["params"]
    assert lines[1] == "rep,t,coord0,coord1"
    rep, t, x0, x1 = lines[2].split(",")
    assert rep == "0" and float(t) == 0.0


def test_csv_summary_schema(tmp_path):
    path = tmp_path / "s.csv"
    cfg = {"command": "survival", "model": "killed_yule", "params": {"mu": 1, "schedule": "linear"}, "reps": 20, "horizon": 5, "output": str(path)}
    assert run(cfg)[0] == 0
    lines = path.read_text().splitlines()
    assert lines[1] == "metric,mean,ci_half_width,std_error,reps,seed"
    row = lines[2].split(",")
    assert row[0] == "survival_probability" and row[4] == "20"
    assert float(row[1]) == float(repr(float(row[1])))


def test_json_lines_output(tmp_path):
    path = tmp_path / "traj.jsonl"
    assert run(SIM | {"max_events": 10, "output": str(path), "format": "json-lines"})[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    recs = [json.loads(l) for l in lines[1:]]
    assert recs and set(recs[0]) == {"rep", "t", "state"} and len(recs[0]["state"]) == 2


def test_rerun_is_byte_identical(tmp_path):
    cfg = write(tmp_path, SIM | {"max_events": 200})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", cfg, "--seed", "11", "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--seed", "11", "--out", str(b)]) == 0
    # the header records the output path; everything else must match
    ta, tb = a.read_bytes().split(b"\n", 1), b.read_bytes().split(b"\n", 1)
    assert ta[1] == tb[1]
    assert main(["simulate", "--config", cfg, "--seed", "11", "--out", str(a)]) == 0
    assert a.read_bytes() == b"\n".join(ta)


def test_seed_changes_output(tmp_path):
    cfg = write(tmp_path, SIM | {"max_events": 200})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "--config", cfg, "--seed", "1", "--out", str(a)])
    main(["simulate", "--config", cfg, "--seed", "2", "--out", str(b)])
    assert a.read_text().split("\n", 1)[1] != b.read_text().split("\n", 1)[1]


def test_every_command_has_a_handler():
    assert set(cli._DISPATCH) == set(cli.COMMANDS)
