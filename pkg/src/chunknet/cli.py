"""Batch front-end: JSON experiment configs in, CSV or JSON-lines results out.

    chunknet <command> --config cfg.json [--seed N] [--reps N] [--horizon T]
                       [--out path] [--format csv|json-lines]

Exit codes: 0 success, 1 configuration error, 2 simulation failure,
3 validation-suite failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import analysis as an
from . import checks
from .kernel import (
    EstimateSummary,
    InvalidParameterError,
    ModelError,
    ReplicationError,
    RngStream,
    StoppingRule,
)
from .processes import (
    Boundary,
    CappedRatio,
    Constant,
    DownloadShare,
    FreeParams,
    KillSchedule,
    ProcessSpec,
    RbhParams,
    SaturatedParams,
    SingleChunkParams,
    TwoChunkParams,
    VChainParams,
    YuleParams,
)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "execute", "main", "COMMANDS"]

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_VALIDATE = 0, 1, 2, 3

COMMANDS = ("simulate", "classify", "lambda-star", "survival", "series", "h0-scaling", "vchain", "lambda-s", "drift", "validate")
FORMATS = ("csv", "json-lines")
TOP_KEYS = {
    "command", "model", "params", "seed", "reps", "horizon", "output", "format",
    "init", "grid", "burn_in", "coordinate", "from_time", "max_events",
}

RATE, UNIT, PROB, COUNT, FLAG = "rate", "unit", "prob", "count", "flag"
_RATE_FN = ("constant", "download_share", "capped_ratio")
_NETWORK_OPT = {"rate_fn": _RATE_FN, "delta": UNIT, "alpha": RATE, "boundary": ("or_one", "plus_one")}

# model -> (required keys, optional keys with their kinds)
MODEL_PARAMS: dict[str, tuple[dict, dict]] = {
    "yule": ({"mu": RATE}, {}),
    "killed_yule": ({"mu": RATE}, {"schedule": ("none", "linear", "log"), "scale": RATE}),
    "rbh": ({"mu_z": RATE, "nu": RATE}, {"gamma": RATE}),
    "rbh_timechange": ({"mu_z": RATE, "nu": RATE}, {}),
    "single_chunk": ({"lambda": RATE, "mu": RATE, "nu": RATE}, dict(_NETWORK_OPT)),
    "free": ({"lambda": RATE, "mu": RATE, "nu": RATE}, {"delta": UNIT}),
    "two_chunk": ({"lambda": RATE, "mu1": RATE, "mu2": RATE, "nu": RATE}, {}),
    "saturated": ({"mu1": RATE, "mu2": RATE, "nu": RATE}, {"lumped": FLAG}),
    "coupled": ({"lambda": RATE, "mu": RATE, "nu": RATE}, {**_NETWORK_OPT, "mode": ("upper", "lower")}),
    "wz": ({"mu_w": RATE, "mu_z": RATE, "nu": RATE}, {}),
    "v_chain": ({"p": PROB, "mu_w": RATE, "mu_z": RATE, "nu": RATE}, {"thinning": ("bernoulli", "window"), "K": COUNT}),
}

# threshold names accepted by lambda-star in place of a model
THRESHOLD_MODELS = {"FreeOrOne", "FreePlusOne", "TwoChunk"}

COMMAND_MODELS = {
    "simulate": set(MODEL_PARAMS),
    "classify": {"single_chunk", "two_chunk"},
    "lambda-star": {"single_chunk", "free", "two_chunk"} | THRESHOLD_MODELS,
    "survival": {"killed_yule"},
    "series": {"rbh"},
    "h0-scaling": {"wz"},
    "vchain": {"v_chain"},
    "lambda-s": {"rbh", "saturated"},
    "drift": {"single_chunk", "free", "two_chunk", "saturated", "v_chain"},
    "validate": set(),
}

DEFAULT_INIT = {
    "yule": (1,), "killed_yule": (1,), "rbh": (0,), "rbh_timechange": (0,), "single_chunk": (0, 0),
    "free": (0, 0), "two_chunk": (0, 0, 0), "saturated": (0, 0), "coupled": (0, 0), "wz": (1, 0), "v_chain": (10,),
}
DEFAULT_GRID = {"h0-scaling": [1, 10, 100, 1000], "vchain": [10, 100, 1000, 10000]}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    command: str
    model: Optional[str] = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    reps: int = 100
    horizon: float = 1000.0
    output: Optional[str] = None
    format: str = "csv"
    init: Optional[list] = None
    grid: Optional[list] = None
    burn_in: Optional[float] = None
    coordinate: int = 0
    from_time: float = 0.0
    max_events: Optional[int] = None

    def resolved(self) -> dict:
        return asdict(self)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_value(key: str, kind, v) -> None:
    if isinstance(kind, tuple):
        if v not in kind:
            raise ConfigError(f"params.{key} must be one of {list(kind)}, got {v!r}")
        return
    if kind == FLAG:
        if not isinstance(v, bool):
            raise ConfigError(f"params.{key} must be true or false")
        return
    if not _is_number(v):
        raise ConfigError(f"params.{key} must be a number, got {v!r}")
    if kind == RATE and not v > 0:
        raise ConfigError(f"params.{key} must be strictly positive, got {v!r}")
    if kind == UNIT and not 0 < v <= 1:
        raise ConfigError(f"params.{key} must lie in (0, 1], got {v!r}")
    if kind == PROB and not 0 < v < 1:
        raise ConfigError(f"params.{key} must lie in (0, 1), got {v!r}")
    if kind == COUNT and not (isinstance(v, int) and v >= 0):
        raise ConfigError(f"params.{key} must be a nonnegative integer, got {v!r}")


def _param_schema(command: str, model: str) -> tuple[dict, dict]:
    if model in THRESHOLD_MODELS:
        req = {"mu2": RATE, "nu": RATE} if model == "TwoChunk" else {"mu": RATE, "nu": RATE}
        return req, {"delta": UNIT}
    req, opt = MODEL_PARAMS[model]
    req, opt = dict(req), dict(opt)
    if command == "lambda-star":
        # the threshold does not depend on lambda or the first-chunk rate
        for k in ("lambda", "mu1"):
            if k in req:
                opt[k] = req.pop(k)
    if command == "series":
        req["gamma"] = opt.pop("gamma")
    elif "gamma" in opt:
        del opt["gamma"]
    return req, opt


def parse_config(source: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse and validate a JSON config. Unknown keys are rejected by name;
    ``overrides`` (from command-line flags) replace top-level values."""
    try:
        raw = json.loads(source) if source.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for k in raw:
        if k not in TOP_KEYS:
            raise ConfigError(f"unknown config key {k!r}")
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "command" and "command" in raw and raw["command"] != v:
            raise ConfigError(f"command {v!r} on the command line conflicts with config command {raw['command']!r}")
        raw[k] = v

    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {command!r}")
    model = raw.get("model")
    if command != "validate":
        if model is None:
            raise ConfigError("missing required key 'model'")
        if model not in COMMAND_MODELS[command]:
            raise ConfigError(f"model {model!r} is not valid for {command}; choose from {sorted(COMMAND_MODELS[command])}")
    elif model is not None:
        raise ConfigError("validate takes no 'model'")

    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    if model is not None:
        req, opt = _param_schema(command, model)
        for k in params:
            if k not in req and k not in opt:
                raise ConfigError(f"unknown parameter {k!r} for model {model}")
        for k in req:
            if k not in params:
                raise ConfigError(f"missing required parameter {k!r} for model {model}")
        for k, v in params.items():
            _check_value(k, req.get(k, opt.get(k)), v)
    elif params:
        raise ConfigError(f"unknown parameter {next(iter(params))!r}: validate takes no params")

    cfg = ExperimentConfig(command=command, model=model, params=dict(params))
    if "seed" in raw:
        s = raw["seed"]
        if not (isinstance(s, int) and not isinstance(s, bool) and 0 <= s < 2**64):
            raise ConfigError(f"seed must be a 64-bit nonnegative integer, got {s!r}")
        cfg.seed = s
    elif command == "validate":
        cfg.seed = checks.DEFAULT_SEED
    for key, lo in (("reps", 1), ("max_events", 1)):
        if key in raw and raw[key] is not None:
            v = raw[key]
            if not (isinstance(v, int) and not isinstance(v, bool) and v >= lo):
                raise ConfigError(f"{key} must be an integer >= {lo}, got {v!r}")
            setattr(cfg, key, v)
    if "horizon" in raw:
        v = raw["horizon"]
        if not (_is_number(v) and v > 0):
            raise ConfigError(f"horizon must be strictly positive, got {v!r}")
        cfg.horizon = float(v)
    for key in ("burn_in", "from_time"):
        if key in raw and raw[key] is not None:
            v = raw[key]
            if not (_is_number(v) and 0 <= v < cfg.horizon):
                raise ConfigError(f"{key} must lie in [0, horizon), got {v!r}")
            setattr(cfg, key, float(v))
    if "format" in raw:
        if raw["format"] not in FORMATS:
            raise ConfigError(f"format must be one of {list(FORMATS)}, got {raw['format']!r}")
        cfg.format = raw["format"]
    if "output" in raw and raw["output"] is not None:
        if not isinstance(raw["output"], str):
            raise ConfigError("output must be a file path")
        cfg.output = raw["output"]
    if "coordinate" in raw:
        v = raw["coordinate"]
        if not (isinstance(v, int) and not isinstance(v, bool) and v >= 0):
            raise ConfigError(f"coordinate must be a nonnegative integer, got {v!r}")
        cfg.coordinate = v
    if "init" in raw and raw["init"] is not None:
        v = raw["init"]
        dim = len(DEFAULT_INIT.get(model, ()))
        if not (isinstance(v, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in v) and len(v) == dim):
            raise ConfigError(f"init must be a list of {dim} integers for model {model}")
        cfg.init = v
    if "grid" in raw and raw["grid"] is not None:
        v = raw["grid"]
        if not (isinstance(v, list) and v and all(_is_number(x) and x >= 0 for x in v)):
            raise ConfigError("grid must be a nonempty list of nonnegative numbers")
        if command in ("h0-scaling", "vchain") and not all(isinstance(x, int) and x >= (1 if command == "h0-scaling" else 0) for x in v):
            raise ConfigError(f"grid for {command} must hold integers")
        cfg.grid = v
    return cfg


# ---------------------------------------------------------------------------
# building model objects from a config


def _rate_fn(p: dict):
    name = p.get("rate_fn", "constant")
    if name == "constant":
        return Constant(p.get("delta", 1.0))
    if name == "download_share":
        return DownloadShare()
    return CappedRatio(p.get("alpha", 1.0))


def build_params(model: str, p: dict):
    if model == "yule" or model == "killed_yule":
        return YuleParams(p["mu"])
    if model in ("rbh", "rbh_timechange"):
        return RbhParams(p["mu_z"], p["nu"])
    if model in ("single_chunk", "coupled"):
        return SingleChunkParams(p["lambda"], p["mu"], p["nu"], _rate_fn(p), Boundary(p.get("boundary", "or_one")))
    if model == "free":
        return FreeParams(p.get("delta", 1.0), p["mu"], p["nu"], p["lambda"])
    if model == "two_chunk":
        return TwoChunkParams(p["lambda"], p["mu1"], p["mu2"], p["nu"])
    if model == "saturated":
        return SaturatedParams(p["mu1"], p["mu2"], p["nu"])
    if model == "wz":
        return (p["mu_w"], RbhParams(p["mu_z"], p["nu"]))
    if model == "v_chain":
        return VChainParams(p["p"], p["mu_w"], RbhParams(p["mu_z"], p["nu"]), p.get("thinning", "bernoulli"))
    raise ConfigError(f"unknown model {model!r}")


def _kills(p: dict) -> KillSchedule:
    kind = p.get("schedule", "none")
    if kind == "linear":
        return KillSchedule.linear(p.get("scale", 1.0))
    if kind == "log":
        return KillSchedule.logarithmic()
    return KillSchedule.empty()


def build_spec(cfg: ExperimentConfig) -> ProcessSpec:
    p = cfg.params
    options = {}
    if cfg.model == "killed_yule":
        options["kills"] = _kills(p)
    elif cfg.model == "saturated":
        options["lumped"] = p.get("lumped", False)
    elif cfg.model == "coupled":
        options["mode"] = p.get("mode", "upper")
        options["delta"] = p.get("delta", 1.0)
    elif cfg.model == "v_chain":
        options["steps"] = max(int(cfg.horizon), 1)
        options["K"] = p.get("K", 50)
    init = tuple(cfg.init) if cfg.init is not None else DEFAULT_INIT[cfg.model]
    return ProcessSpec(cfg.model, build_params(cfg.model, p), init, options)


# ---------------------------------------------------------------------------
# output


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


class _Writer:
    """Accumulates rows and renders them as CSV or JSON lines behind a
    ``#`` header line holding the resolved config."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.header: Optional[list] = None
        self.rows: list[list] = []
        self.failed = False

    def start(self, columns: list) -> None:
        self.header = columns

    def add(self, row: list) -> None:
        self.rows.append(row)

    def summary(self, metric: str, est: Optional[EstimateSummary] = None, value=None) -> None:
        if self.header is None:
            self.start(["metric", "mean", "ci_half_width", "std_error", "reps", "seed"])
        if est is not None:
            self.add([metric, est.mean, est.ci_half_width, est.std_error, est.replications, est.base_seed])
        else:
            self.add([metric, value, None, None, None, None])

    def render(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.cfg.resolved(), sort_keys=True, ensure_ascii=False) + "\n")
        cols = self.header or []
        if self.cfg.format == "csv":
            buf.write(",".join(cols) + "\n")
            for r in self.rows:
                buf.write(",".join(x if isinstance(x, str) else _num(x) for x in r) + "\n")
        else:
            for r in self.rows:
                buf.write(json.dumps(_record(cols, r), ensure_ascii=False) + "\n")
        return buf.getvalue()


def _record(cols: list, row: list) -> dict:
    out = {}
    for c, x in zip(cols, row):
        if isinstance(x, float) and not math.isfinite(x):
            x = repr(x)
        out[c] = x
    if "coord0" in cols:
        k = cols.index("coord0")
        out = {c: out[c] for c in cols[:k]} | {"state": list(row[k:])}
    return out


# ---------------------------------------------------------------------------
# commands


def _pm(est: EstimateSummary) -> str:
    return f"{est.mean:.6g} ± {est.ci_half_width:.3g} (reps={est.replications}, seed={est.base_seed})"


def _cmd_simulate(cfg, out: _Writer) -> str:
    spec = build_spec(cfg)
    dim = len(spec.init)
    out.start(["rep", "t"] + [f"coord{i}" for i in range(dim)])
    stop = StoppingRule(cfg.horizon, cfg.max_events)
    kw = {"grid": cfg.grid} if cfg.grid is not None else {}
    finals = []
    for rep in range(cfg.reps):
        rng = RngStream(cfg.seed, rep)
        try:
            traj = spec.simulate(stop, rng, **kw)
        except Exception as exc:
            raise ReplicationError(rep, exc) from exc
        out.add([rep, 0.0] + [int(v) for v in traj.states[0]])
        for t, s in zip(traj.times, traj.states[1:]):
            out.add([rep, float(t)] + [int(v) for v in s])
        finals.append(traj.final_state)
    mean = [sum(f[i] for f in finals) / len(finals) for i in range(dim)]
    return f"simulate {cfg.model}: {cfg.reps} paths, mean final state ({', '.join(f'{m:.6g}' for m in mean)})"


def _lambda_model(cfg):
    m, p = cfg.model, cfg.params
    if m in THRESHOLD_MODELS:
        return m, p.get("mu2", p.get("mu")), p["nu"], p.get("delta", 1.0)
    if m == "two_chunk":
        return "TwoChunk", p["mu2"], p["nu"], 1.0
    kind = "FreePlusOne" if p.get("boundary") == "plus_one" else "FreeOrOne"
    return kind, p["mu"], p["nu"], p.get("delta", 1.0)


def _cmd_lambda_star(cfg, out: _Writer) -> str:
    kind, mu, nu, delta = _lambda_model(cfg)
    try:
        v = an.lambda_star(kind, mu, nu, delta)
    except an.DomainError as exc:
        raise ConfigError(str(exc)) from None
    out.summary("lambda_star", value=v)
    return repr(v)


def _cmd_classify(cfg, out: _Writer) -> str:
    params = build_params(cfg.model, cfg.params)
    est = diag = None
    if isinstance(params, TwoChunkParams) and params.mu2 - params.nu > params.mu1:
        spec = ProcessSpec("saturated", params.saturated(), (0, 0), {"lumped": True})
        est, diag = an.estimate_stationary_departure_rate(spec, cfg.horizon, cfg.burn_in, cfg.reps, cfg.seed, cfg.max_events)
        out.summary("lambda_s", est)
        out.summary("lambda_s_stabilized", value=diag.stabilized)
    v = an.classify(cfg.model, params, est, diag)
    out.summary(f"verdict={v.verdict.value}", value=v.threshold)
    return str(v)


def _cmd_survival(cfg, out: _Writer) -> str:
    w0 = cfg.init[0] if cfg.init else 1
    surv, mw = an.estimate_survival(cfg.params["mu"], w0, _kills(cfg.params), cfg.horizon, cfg.reps, cfg.seed)
    out.summary("survival_probability", surv)
    out.summary("scaled_population_mean", mw)
    return f"survival_probability = {_pm(surv)}"


def _diag_rows(out: _Writer, diag: an.TailDiagnostic) -> None:
    out.summary("half_horizon_estimate", value=diag.half_estimate)
    out.summary("max_to_sum_ratio", value=diag.max_to_sum_ratio)
    out.summary("stabilized", value=diag.stabilized)


def _cmd_series(cfg, out: _Writer) -> str:
    z0 = cfg.init[0] if cfg.init else 0
    rbh = RbhParams(cfg.params["mu_z"], cfg.params["nu"])
    est, diag = an.estimate_series_sum(cfg.params["gamma"], rbh, z0, cfg.horizon, cfg.reps, cfg.seed)
    out.summary("series_sum", est)
    _diag_rows(out, diag)
    return f"series_sum = {_pm(est)}, stabilized={diag.stabilized}"


def _table_rows(out: _Writer, name: str, tab: an.ScalingTable) -> None:
    for r in tab.rows:
        out.summary(f"{name}[{r.x}]", r.estimate)
        if r.excluded:
            out.summary(f"excluded[{r.x}]", value=r.excluded)
    out.summary("fit_slope", value=tab.slope)
    out.summary("fit_intercept", value=tab.intercept)
    out.summary("fit_max_rel_residual", value=tab.max_rel_residual)


def _cmd_h0(cfg, out: _Writer) -> str:
    p = cfg.params
    tab = an.estimate_h0_scaling(p["mu_w"], RbhParams(p["mu_z"], p["nu"]), cfg.grid or DEFAULT_GRID["h0-scaling"], cfg.reps, cfg.seed)
    _table_rows(out, "mean_h0", tab)
    return f"H0 ~ {tab.intercept:.4g} + {tab.slope:.4g} log(w0), max relative residual {tab.max_rel_residual:.3g}"


def _cmd_vchain(cfg, out: _Writer) -> str:
    params = build_params("v_chain", cfg.params)
    tab = an.estimate_nk(params, cfg.params.get("K", 50), cfg.grid or DEFAULT_GRID["vchain"], cfg.reps, cfg.seed)
    _table_rows(out, "mean_nk", tab)
    return f"N_K ~ {tab.intercept:.4g} + {tab.slope:.4g} log(1+v), max relative residual {tab.max_rel_residual:.3g}"


def _cmd_lambda_s(cfg, out: _Writer) -> str:
    spec = build_spec(cfg)
    if cfg.model == "saturated" and "lumped" not in cfg.params:
        spec.options["lumped"] = True
    try:
        est, diag = an.estimate_stationary_departure_rate(spec, cfg.horizon, cfg.burn_in, cfg.reps, cfg.seed, cfg.max_events)
    except an.DomainError as exc:
        raise ConfigError(str(exc)) from None
    out.summary("departure_rate", est)
    _diag_rows(out, diag)
    return f"departure_rate = {_pm(est)}, stabilized={diag.stabilized}"


def _cmd_drift(cfg, out: _Writer) -> str:
    if cfg.model == "v_chain":
        k = cfg.params.get("K", 50)
        est = an.log_drift(build_params("v_chain", cfg.params), k, cfg.reps, cfg.seed)
        out.summary(f"log_drift[v={k}]", est)
        return f"log drift at v={k}: {_pm(est)}"
    spec = build_spec(cfg)
    if cfg.coordinate >= len(spec.init):
        raise ConfigError(f"coordinate {cfg.coordinate} out of range for model {cfg.model}")
    est = an.estimate_growth_slope(spec, cfg.coordinate, cfg.horizon, cfg.reps, cfg.seed, cfg.from_time, cfg.max_events)
    out.summary(f"growth_slope[coord{cfg.coordinate}]", est)
    return f"growth slope of coord{cfg.coordinate}: {_pm(est)}"


def _cmd_validate(cfg, out: _Writer) -> str:
    results = checks.run_validation(cfg.seed)
    for r in results:
        print(r.line())
        out.summary(r.name, value=r.passed)
    n = sum(r.passed for r in results)
    out.failed = n < len(results)
    return f"validate: {n}/{len(results)} checks passed"


_DISPATCH = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "lambda-star": _cmd_lambda_star,
    "survival": _cmd_survival,
    "series": _cmd_series,
    "h0-scaling": _cmd_h0,
    "vchain": _cmd_vchain,
    "lambda-s": _cmd_lambda_s,
    "drift": _cmd_drift,
    "validate": _cmd_validate,
}


def execute(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Run one command; write the output file if configured; return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out = _Writer(cfg)
    try:
        line = _DISPATCH[cfg.command](cfg, out)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except ReplicationError as exc:
        print(f"simulation failed on stream_index={exc.stream_index}: {exc.cause}", file=stderr)
        return EXIT_SIM
    except (ModelError, RuntimeError, ArithmeticError, AssertionError, ValueError) as exc:
        print(f"simulation failed: {exc}", file=stderr)
        return EXIT_SIM
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(out.render())
    print(line, file=stdout)
    if out.failed:
        return EXIT_VALIDATE
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chunknet", description="Simulate and analyse chunk-based file-sharing networks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON experiment config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--reps", type=int)
    ap.add_argument("--horizon", type=float)
    ap.add_argument("--out", dest="output")
    ap.add_argument("--format", choices=FORMATS)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
    overrides = {k: getattr(args, k) for k in ("command", "seed", "reps", "horizon", "output", "format")}
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
