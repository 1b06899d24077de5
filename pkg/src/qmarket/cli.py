"""Command-line front end.

    qmarket spectrum --levels 3
    qmarket thermal --beta 1 --format json -o thermal.json
    qmarket zeno --frequencies 0,0.25,0.5,0.75,1 --seed 7

Exit codes: 0 success, 1 computation error (grid, convergence, I/O),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from . import market, risk, strategies, wigner
from .errors import DomainError, IoError, QMarketError
from .phase import make_grid

FORMATS = ("csv", "json")

COMMON_DEFAULTS: dict[str, Any] = {
    "m": 1.0,
    "theta": 2.0 * math.pi,
    "hbar_e": 1.0,
    "big_theta": 0.0,
    "q0": 0.0,
    "p0": 0.0,
    "q_min": -10.0,
    "q_max": 10.0,
    "n_points": 1024,
    "format": "csv",
    "output": None,
}

SIM_DEFAULTS: dict[str, Any] = {
    "pairs": 2,
    "ticks": 10_000,
    "seed": 0,
    "crash_threshold": 0.05,
    "rw_mean": 0.0,
    "rw_std": 1.0,
    "spread": 1.0,
}

COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "spectrum": {"levels": 8, "kinetic": "spectral"},
    "coherent": {"r": 0.0, "eta": 1.0, "q_min": -20.0, "q_max": 20.0, "n_points": 2048},
    "wigner": {"level": 0, "phase_points": None},
    "thermal": {"beta": 1.0, "phase_points": None},
    "zeno": {**SIM_DEFAULTS, "frequencies": [0.0, 0.25, 0.5, 0.75, 1.0]},
    "monopolist": {**SIM_DEFAULTS, "pin_price": 0.0, "epsilon": 1e-4, "switch_probability": 1.0},
}


class UsageError(Exception):
    pass


@dataclass
class Report:
    """Tabular result: ``rows`` under ``columns``, plus metadata for JSON.

    A ``scalar`` report has exactly one row whose fields are merged into the
    top level of the JSON object.
    """

    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)
    scalar: bool = False


# ---------------------------------------------------------------- serialization


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v!r}")
    return format(v, ".17g")


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if v is None:
        return ""
    return str(v)


def _json_text(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_text(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_text(x) for x in v) + "]"
    if hasattr(v, "item"):
        return _json_text(v.item())
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _flatten(columns: list[str], row: list[Any]) -> tuple[list[str], list[Any]]:
    cols, vals = [], []
    for c, v in zip(columns, row):
        if isinstance(v, dict):
            for k, x in v.items():
                cols.append(f"{c}_{k}")
                vals.append(x)
        else:
            cols.append(c)
            vals.append(v)
    return cols, vals


def render(report: Report, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if report.rows:
            header = _flatten(report.columns, report.rows[0])[0]
        else:
            header = report.columns
        writer.writerow(header)
        for row in report.rows:
            writer.writerow([_csv_cell(v) for v in _flatten(report.columns, row)[1]])
        return buf.getvalue()
    if fmt == "json":
        obj = dict(report.meta)
        if report.scalar and len(report.rows) == 1:
            obj.update(zip(report.columns, report.rows[0]))
        else:
            obj["rows"] = [dict(zip(report.columns, row)) for row in report.rows]
        return _json_text(obj) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


def emit(report: Report, fmt: str, path: str | Path | None) -> None:
    """Write ``report`` to ``path`` (stdout when ``None``)."""
    text = render(report, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------- commands


def _risk_params(cfg: dict[str, Any]) -> risk.RiskParams:
    return risk.RiskParams(
        m=cfg["m"], theta=cfg["theta"], hbar_e=cfg["hbar_e"],
        big_theta=cfg["big_theta"], q0=cfg["q0"], p0=cfg["p0"],
    )


def _grid(cfg: dict[str, Any]):
    return make_grid(cfg["q_min"], cfg["q_max"], cfg["n_points"])


def _param_meta(params: risk.RiskParams) -> dict[str, float]:
    return {
        "m": params.m, "theta": params.theta, "hbar_e": params.hbar_e,
        "big_theta": params.big_theta, "q0": params.q0, "p0": params.p0,
    }


def _grid_meta(g) -> dict[str, Any]:
    return {"q_min": g.q_min, "q_max": g.q_max, "n_points": g.n_points}


def prepare_spectrum(cfg):
    params, grid = _risk_params(cfg), _grid(cfg)
    k = int(cfg["levels"])
    if not 1 <= k < grid.n_points / 4:
        raise DomainError(f"--levels must be in [1, n_points/4), got {k}")
    if cfg["kinetic"] not in ("spectral", "finite-difference"):
        raise DomainError(f"unknown kinetic scheme {cfg['kinetic']!r}")

    def run() -> Report:
        res = risk.spectrum(params, grid, k, cfg["kinetic"])
        rows = [[n, float(e)] for n, e in enumerate(res.eigenvalues)]
        meta = {
            "subcommand": "spectrum",
            "params": _param_meta(params),
            "grid": _grid_meta(grid),
            "minimal_risk_constant": 2.0 * params.theta * float(res.eigenvalues[0]),
        }
        return Report(["n", "eigenvalue"], rows, meta)

    return run


def prepare_coherent(cfg):
    cp = strategies.CoherentParams(cfg["r"], cfg["eta"], cfg["q0"], cfg["p0"])
    grid = _grid(cfg)
    hbar = risk.effective_planck(cfg["hbar_e"], cfg["big_theta"])

    def run() -> Report:
        psi = strategies.coherent_strategy(cp, grid, hbar)
        d = strategies.dispersions(psi)
        cols = ["r", "eta", "q0", "p0", "hbar_e", "delta_q", "delta_p", "covariance",
                "corr", "uncertainty_product", "eigen_residual"]
        row = [cp.r, cp.eta, cp.q0, cp.p0, hbar, d.delta_q, d.delta_p, d.covariance,
               d.corr, d.uncertainty_product, strategies.eigen_residual(cp, psi)]
        return Report(cols, [row], {"subcommand": "coherent", "grid": _grid_meta(grid)}, scalar=True)

    return run


def _phase_grid(params, cfg, **kw):
    pts = cfg["phase_points"]
    return wigner.auto_phase_grid(params, n_points=None if pts is None else int(pts), **kw)


def prepare_wigner(cfg):
    params = _risk_params(cfg)
    n = int(cfg["level"])
    if n < 0:
        raise DomainError(f"--level must be >= 0, got {n}")
    pgrid = _phase_grid(params, cfg, levels=(n,))

    def run() -> Report:
        w = wigner.wigner_excited(n, params, pgrid)
        qs, ps = pgrid.q.points, pgrid.p.points
        rows = [[float(q), float(p), float(w.values[i, j])]
                for i, q in enumerate(qs) for j, p in enumerate(ps)]
        meta = {
            "subcommand": "wigner", "level": n, "params": _param_meta(params),
            "grid": pgrid.as_dict(), "mass": w.mass,
        }
        return Report(["q", "p", "density"], rows, meta)

    return run


def prepare_thermal(cfg):
    params = _risk_params(cfg)
    tp = wigner.ThermalParams(cfg["beta"], params)
    pgrid = _phase_grid(params, cfg, betas=(tp.beta,))

    def run() -> Report:
        rho = wigner.thermal_density(tp.beta, params, pgrid)
        cols = ["beta", "x", "mean_risk", "entropy", "mass", "grid"]
        row = [tp.beta, tp.x, wigner.mean_risk(rho, params), wigner.entropy(rho),
               rho.mass, pgrid.as_dict()]
        return Report(cols, [row], {"subcommand": "thermal", "params": _param_meta(params)}, scalar=True)

    return run


def _sim_config(cfg, switch_probability: float) -> market.SimConfig:
    if int(cfg["pairs"]) < 0:
        raise DomainError("--pairs must be >= 0")
    if not cfg["rw_std"] > 0:
        raise DomainError("--rw-std must be positive")
    hbar = risk.effective_planck(cfg["hbar_e"], cfg["big_theta"])
    grid = _grid(cfg)
    players = market.symmetric_population(int(cfg["pairs"]), grid, spread=cfg["spread"], hbar_e=hbar)
    rw = market.RWStrategy.gaussian(cfg["rw_mean"], cfg["rw_std"])
    return market.SimConfig(
        players, rw, ticks=cfg["ticks"], switch_probability=switch_probability,
        crash_threshold=cfg["crash_threshold"], rng_seed=int(cfg["seed"]),
    )


def prepare_zeno(cfg):
    freqs = [float(f) for f in cfg["frequencies"]]
    for f in freqs:
        if not 0.0 <= f <= 1.0:
            raise DomainError(f"switch probability {f} outside [0, 1]")
    config = _sim_config(cfg, 1.0)

    def run() -> Report:
        reports = market.zeno_experiment(config, freqs)
        cols = ["switch_probability", "transaction_rate", "price_variance", "crashed", "ticks", "seed"]
        rows = [[r.switch_probability, r.transaction_rate, r.price_variance, r.crashed, r.ticks, r.rng_seed]
                for r in reports]
        return Report(cols, rows, {"subcommand": "zeno"})

    return run


def prepare_monopolist(cfg):
    if not cfg["epsilon"] > 0:
        raise DomainError("--epsilon must be positive")
    config = _sim_config(cfg, float(cfg["switch_probability"]))
    pin = float(cfg["pin_price"])

    def run() -> Report:
        base = market.simulate(config)
        pinned = market.monopolist_experiment(config, pin, cfg["epsilon"])
        cols = ["run", "pin_price", "transaction_rate", "price_variance", "crashed"]
        rows = [
            ["unpinned", None, base.transaction_rate, base.price_variance, base.crashed],
            ["pinned", pin, pinned.transaction_rate, pinned.price_variance, pinned.crashed],
        ]
        return Report(cols, rows, {"subcommand": "monopolist", "seed": config.rng_seed})

    return run


PREPARERS: dict[str, Callable[[dict[str, Any]], Callable[[], Report]]] = {
    "spectrum": prepare_spectrum,
    "coherent": prepare_coherent,
    "wigner": prepare_wigner,
    "thermal": prepare_thermal,
    "zeno": prepare_zeno,
    "monopolist": prepare_monopolist,
}


# ---------------------------------------------------------------- parsing


def _float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--m", type=float, default=S, help="risk asymmetry (mass analogue)")
    p.add_argument("--theta", type=float, default=S, help="characteristic transaction time")
    p.add_argument("--hbar-e", type=float, default=S)
    p.add_argument("--big-theta", type=float, default=S, help="noncommutativity parameter")
    p.add_argument("--q0", type=float, default=S)
    p.add_argument("--p0", type=float, default=S)
    p.add_argument("--q-min", type=float, default=S)
    p.add_argument("--q-max", type=float, default=S)
    p.add_argument("--n-points", type=int, default=S)
    p.add_argument("--format", choices=FORMATS, default=S)
    p.add_argument("-o", "--output", default=S, help="output file (default: stdout)")
    p.add_argument("--config", default=S, help="JSON document of parameter overrides")


def _add_sim(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--pairs", type=int, default=S, help="buyer/seller pairs")
    p.add_argument("--ticks", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--crash-threshold", type=float, default=S)
    p.add_argument("--rw-mean", type=float, default=S)
    p.add_argument("--rw-std", type=float, default=S)
    p.add_argument("--spread", type=float, default=S, help="std-dev of player strategies")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="qmarket", description="Quantum market-game toolkit")
    sub = parser.add_subparsers(dest="subcommand", metavar="{" + ",".join(PREPARERS) + "}")
    sub.required = True

    p = sub.add_parser("spectrum", help="eigenvalues of the risk operator")
    _add_common(p)
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--kinetic", choices=("spectral", "finite-difference"), default=S)

    p = sub.add_parser("coherent", help="correlated coherent strategy dispersions")
    _add_common(p)
    p.add_argument("--r", type=float, default=S)
    p.add_argument("--eta", type=float, default=S)

    p = sub.add_parser("wigner", help="Wigner density of level n on a phase grid")
    _add_common(p)
    p.add_argument("--level", type=int, default=S)
    p.add_argument("--phase-points", type=int, default=S)

    p = sub.add_parser("thermal", help="thermal strategy summary")
    _add_common(p)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--phase-points", type=int, default=S)

    p = sub.add_parser("zeno", help="transaction rate versus switch probability")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--frequencies", type=_float_list, default=S)

    p = sub.add_parser("monopolist", help="pinned versus free RW price law")
    _add_common(p)
    _add_sim(p)
    p.add_argument("--pin-price", type=float, default=S)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--switch-probability", type=float, default=S)
    return parser


def _load_config(path: str, allowed: dict[str, Any]) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    out = {}
    for key, value in doc.items():
        name = str(key).replace("-", "_")
        if name not in allowed:
            raise UsageError(f"unknown config key {key!r}")
        if name == "frequencies" and isinstance(value, str):
            value = _float_list(value)
        out[name] = value
    return out


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then config document, then explicit flags."""
    cmd = args.subcommand
    cfg = {**COMMON_DEFAULTS, **COMMAND_DEFAULTS[cmd]}
    flags = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
    if getattr(args, "config", None):
        cfg.update(_load_config(args.config, cfg))
    cfg.update(flags)
    return cfg


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = resolve(args)
        job = PREPARERS[args.subcommand](cfg)
    except (UsageError, DomainError, argparse.ArgumentTypeError, TypeError, ValueError) as exc:
        print(f"qmarket {args.subcommand}: {exc}", file=sys.stderr)
        return 2

    try:
        emit(job(), cfg["format"], cfg["output"])
    except UsageError as exc:
        print(f"qmarket {args.subcommand}: {exc}", file=sys.stderr)
        return 2
    except (QMarketError, ValueError, ArithmeticError) as exc:
        print(f"qmarket {args.subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
