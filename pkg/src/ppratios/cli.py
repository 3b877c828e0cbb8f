"""Experiment runner: declarative config in, deterministic CSV/JSON out.

Subcommands: ``simulate | laws | verify | estimate | classify``.  Flags win
over an optional flat ``key=value`` config file (a conflict warns on the
diagnostic stream).  Identical arguments and seed produce byte-identical
artifacts: floats are written with shortest round-trip precision, JSON keys
are sorted, and nothing wall-clock dependent enters the outputs.

Exit codes: 0 success, 1 a verify experiment failed its threshold,
2 config or domain errors.  Errors end with one machine-readable JSON line
on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import limit_laws as ll
from . import samplers as sp
from . import verify as vf
from .tail_models import TailModel
from .verify import SWEEP_TARGETS

#: Fixed default master seed; never wall-clock derived.
DEFAULT_SEED = 20240613

_DEFAULTS = {
    "epsilon": 1e-3,
    "seed": DEFAULT_SEED,
    "out_dir": "out",
    "cap": 1_000_000,
    "threads": 1,
    "probe_form": "indicator_step",
    "probe_amplitude": 1.0,
    "probe_a": 0.5,
    "probe_b": 1.0,
    "method": "limit_ratios",
    "half_width": 0.05,
    "grid": "0.01:0.99:99",
}

VERIFY_TARGETS = sorted(SWEEP_TARGETS) + [
    "independence", "identities", "nb_functional", "z_insensitivity",
    "conditional_gamma",
]

LAW_NAMES = ("w", "j", "l", "k_orderstat", "successive", "ratio_tail",
             "phi", "conditional_gamma")


class _CliError(Exception):
    """Config/validation failure destined for exit code 2."""


def _diag(reason: str, kind: str = "config"):
    print(json.dumps({"error": kind, "reason": reason}, sort_keys=True),
          file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _diag(message)
        raise SystemExit(2)


def _fmt(value) -> str:
    """Full round-trip text for one CSV cell."""
    if value is None or value == "":
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, meta: dict, header: list, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={_fmt(meta[key])}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _parse_grid(text: str, log_spaced: bool = False) -> np.ndarray:
    """``lo:hi:count`` (inclusive, optionally log-spaced) or comma list."""
    if ":" in text:
        lo_s, hi_s, count_s = text.split(":")
        lo, hi, count = float(lo_s), float(hi_s), int(count_s)
        if count < 1:
            raise _CliError(f"grid needs a positive count: {text!r}")
        if log_spaced:
            return np.geomspace(lo, hi, count)
        return np.linspace(lo, hi, count)
    return np.array([float(v) for v in text.split(",")])


def _build_parser() -> _Parser:
    parser = _Parser(prog="ppratios", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, blurb in (
        ("simulate", "dump per-trial ratio configurations to trials.csv"),
        ("laws", "tabulate a closed-form limit law to law_table.csv"),
        ("verify", "run a statistical check; report.json + sweep.csv"),
        ("estimate", "estimate the tail index from simulated ratios"),
        ("classify", "classify the variation regime at small t"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", type=str, help="flat key=value file; flags win")
        p.add_argument("--tail", type=str,
                       choices=sorted(("pareto", "pareto_log", "pareto_perturbed",
                                       "rapid_zero", "slow_zero")))
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--r", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--t", type=float)
        p.add_argument("--t-grid", dest="t_grid", type=str,
                       help="comma list or lo:hi:count (log-spaced)")
        p.add_argument("--trials", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir", type=str)
        p.add_argument("--threads", type=int)
        p.add_argument("--cap", type=int)
        p.add_argument("--target", type=str, choices=VERIFY_TARGETS)
        p.add_argument("--probe-form", dest="probe_form", type=str,
                       choices=("indicator_step", "linear_ramp"))
        p.add_argument("--probe-amplitude", dest="probe_amplitude", type=float)
        p.add_argument("--probe-a", dest="probe_a", type=float)
        p.add_argument("--probe-b", dest="probe_b", type=float)
        if name == "laws":
            p.add_argument("--law", type=str, choices=LAW_NAMES)
            p.add_argument("--grid", type=str, help="abscissa grid lo:hi:count")
            p.add_argument("--u", type=float)
            p.add_argument("--z", type=float)
            p.add_argument("--lam", type=float)
            p.add_argument("--w", type=float)
        if name == "verify":
            p.add_argument("--method", type=str,
                           choices=("limit_ratios", "mixed_poisson"))
            p.add_argument("--w", type=float)
            p.add_argument("--half-width", dest="half_width", type=float)
    return parser


def _load_config(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags; conflicts warn."""
    merged = dict(_DEFAULTS)
    flags = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.config:
        for key, text in _load_config(args.config).items():
            if key in flags and str(flags[key]) != text:
                _diag(f"config value {key}={text!r} overridden by flag "
                      f"{key}={flags[key]!r}", kind="warning")
                continue
            merged[key] = text
    merged.update(flags)
    return merged


def _need(cfg: dict, *names):
    for name in names:
        if cfg.get(name) is None:
            raise _CliError(f"missing field: {name}")


def _coerce(cfg: dict, name: str, kind):
    if cfg.get(name) is not None and isinstance(cfg[name], str):
        cfg[name] = kind(cfg[name])


def _tail_from(cfg: dict) -> TailModel:
    _need(cfg, "tail")
    record = {"kind": cfg["tail"]}
    for key in ("alpha", "beta", "c", "gamma"):
        if cfg.get(key) is not None:
            record[key] = float(cfg[key])
    return TailModel.from_record(record)


def _probe_from(cfg: dict) -> ll.LaplaceProbe:
    return ll.LaplaceProbe(
        amplitude=float(cfg["probe_amplitude"]),
        a=float(cfg["probe_a"]),
        b=float(cfg["probe_b"]),
        form=cfg["probe_form"],
    )


def _t_grid_from(cfg: dict) -> list:
    """t grid for sweeps; a single point t=1.0 when neither flag is given.

    Exact-law sweep targets are t-free for the pure power family, so a
    default single point keeps quick checks one-liner friendly; the value
    is echoed into every artifact.
    """
    if cfg.get("t_grid") is not None:
        grid = _parse_grid(str(cfg["t_grid"]), log_spaced=True)
        grid = np.sort(grid)[::-1]
        return [float(v) for v in grid]
    if cfg.get("t") is not None:
        return [float(cfg["t"])]
    return [1.0]


def _echo_meta(cfg: dict, model: TailModel | None, extra: dict) -> dict:
    meta = {"seed": int(cfg["seed"]), "trials": int(cfg["trials"]),
            "epsilon": float(cfg["epsilon"])}
    if model is not None:
        for key, value in model.to_record().items():
            meta[f"tail_{key}"] = value
    meta.update(extra)
    return meta


def _run_simulate(cfg: dict) -> int:
    model = _tail_from(cfg)
    _need(cfg, "t", "r", "n", "trials")
    r, n = int(cfg["r"]), int(cfg["n"])
    t, trials = float(cfg["t"]), int(cfg["trials"])
    epsilon, seed = float(cfg["epsilon"]), int(cfg["seed"])
    above, w, counts = sp.ratio_configuration_batch(
        model, t, r, n, epsilon, trials, seed, cap=int(cfg["cap"]))
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    header = ["trial_index", "t", "r", "n", "w_rn", "count_below"] + [
        f"above_{k}" for k in range(1, n)]
    rows = (
        [i, t, r, n, (w[i] if w is not None else ""), int(counts[i])]
        + list(above[i])
        for i in range(trials)
    )
    meta = _echo_meta(cfg, model, {"t": t, "r": r, "n": n, "cap": int(cfg["cap"])})
    _write_csv(out / "trials.csv", meta, header, rows)
    return 0


def _law_table(cfg: dict):
    """Rows of (law, alpha, r, n, u, z, lam, x, density, cdf) on the grid."""
    law = cfg["law"]
    if law in ("w", "k_orderstat", "conditional_gamma"):
        _need(cfg, "r", "n")
    elif law in ("successive", "ratio_tail"):
        _need(cfg, "r")
    alpha = float(cfg["alpha"]) if cfg.get("alpha") is not None else None
    r = int(cfg["r"]) if cfg.get("r") is not None else None
    n = int(cfg["n"]) if cfg.get("n") is not None else None
    u = float(cfg["u"]) if cfg.get("u") is not None else None
    z = float(cfg["z"]) if cfg.get("z") is not None else None
    lam = float(cfg["lam"]) if cfg.get("lam") is not None else None
    w = float(cfg["w"]) if cfg.get("w") is not None else None
    grid = _parse_grid(str(cfg["grid"]))
    rows = []

    def emit(x, density, cdf, **over):
        rows.append([law, over.get("alpha", alpha), r, n, u, z,
                     over.get("lam", lam), x, density, cdf])

    if law == "w":
        _need(cfg, "alpha")
        spec = ll.LawSpec(alpha=alpha, r=r, n=n)
        density, cdf = ll.w_law(spec, grid)
        for x, d, c in zip(grid, density, cdf):
            emit(x, d, c)
    elif law == "j":
        _need(cfg, "alpha", "u")
        spec = ll.LawSpec(alpha=alpha, u=u)
        density, cdf = ll.j_law(spec, grid)
        for x, d, c in zip(grid, density, cdf):
            emit(x, d, c)
    elif law == "l":
        _need(cfg, "alpha")
        density, cdf = ll.l_law(alpha, grid)
        for x, d, c in zip(grid, density, cdf):
            emit(x, d, c)
    elif law == "k_orderstat":
        _need(cfg, "alpha")
        cdf = ll.k_orderstat_cdf(r, n, alpha, grid)
        for x, c in zip(grid, cdf):
            emit(x, "", c)
    elif law == "successive":
        _need(cfg, "alpha")
        cdf = ll.successive_ratio_cdf(r, alpha, grid)
        for x, c in zip(grid, cdf):
            emit(x, "", c)
    elif law == "ratio_tail":
        _need(cfg, "alpha")
        tail = ll.ratio_tail_n1(r, alpha, grid)
        for x, tv in zip(grid, tail):
            emit(x, "", 1.0 - tv)
    elif law == "phi":
        _need(cfg, "alpha", "u")
        for lam_x in grid:
            emit(lam_x, "", ll.phi_conditional(float(lam_x), u, alpha), lam=lam_x)
    else:  # conditional_gamma over z
        _need(cfg, "alpha", "w")
        cdf = ll.conditional_gamma_cdf(r, n, alpha, w, grid)
        for x, c in zip(grid, cdf):
            emit(x, "", c)
    return rows


def _run_laws(cfg: dict) -> int:
    _need(cfg, "law")
    rows = _law_table(cfg)
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    meta = {"law": cfg["law"], "grid": cfg["grid"], "seed": int(cfg["seed"])}
    header = ["law", "alpha", "r", "n", "u", "z", "lam", "x", "density", "cdf"]
    _write_csv(out / "law_table.csv", meta, header, rows)
    return 0


def _run_verify(cfg: dict) -> int:
    _need(cfg, "target", "trials")
    target = cfg["target"]
    trials, seed = int(cfg["trials"]), int(cfg["seed"])
    threads = int(cfg["threads"])
    if target in SWEEP_TARGETS:
        _need(cfg, "r", "n")
        model = _tail_from(cfg)
        report = vf.convergence_sweep(model, int(cfg["r"]), int(cfg["n"]),
                                      _t_grid_from(cfg), trials, target, seed,
                                      threads=threads)
    elif target == "independence":
        _need(cfg, "t", "r", "n")
        model = _tail_from(cfg)
        report = vf.independence_check(model, float(cfg["t"]), int(cfg["r"]),
                                       int(cfg["n"]), trials, seed, threads=threads)
    elif target == "identities":
        _need(cfg, "alpha", "r", "n")
        report = vf.identity_checks(float(cfg["alpha"]), int(cfg["r"]),
                                    int(cfg["n"]), trials, seed)
    elif target == "nb_functional":
        _need(cfg, "alpha", "n")
        probe = _probe_from(cfg)
        report = vf.nb_functional_check(
            int(cfg["n"]), float(cfg["alpha"]), probe, float(cfg["epsilon"]),
            trials, cfg["method"], seed, threads=threads)
    elif target == "z_insensitivity":
        _need(cfg, "t", "r", "n")
        model = _tail_from(cfg)
        report = vf.z_insensitivity_check(model, float(cfg["t"]), int(cfg["r"]),
                                          int(cfg["n"]), trials, seed,
                                          threads=threads)
    else:  # conditional_gamma
        _need(cfg, "t", "w", "r", "n")
        model = _tail_from(cfg)
        report = vf.conditional_gamma_check(
            model, float(cfg["t"]), int(cfg["r"]), int(cfg["n"]),
            float(cfg["w"]), float(cfg["half_width"]), trials, seed,
            threads=threads)

    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_json_dict()
    payload["parameters"] = {k: _jsonable_param(v) for k, v in sorted(cfg.items())
                             if k not in ("out_dir", "config")}
    _write_json(out / "report.json", payload)
    keys, rows = report.csv_rows()
    meta = {"experiment_id": report.experiment_id, "seed": seed, "trials": trials,
            "epsilon": float(cfg["epsilon"]), "threshold": report.threshold,
            "pass": report.passed}
    _write_csv(out / "sweep.csv", meta, keys, rows)
    return 0 if report.passed else 1


def _jsonable_param(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def _run_estimate(cfg: dict) -> int:
    model = _tail_from(cfg)
    _need(cfg, "t", "r", "trials")
    r, trials, seed = int(cfg["r"]), int(cfg["trials"]), int(cfg["seed"])
    t = float(cfg["t"])
    ly = sp.log_trim_ratio_batch(model, t, r, trials, seed,
                                 threads=int(cfg["threads"]))
    alpha_hat, stderr = vf.estimate_alpha(np.exp(ly), r)
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "estimate.json", {
        "alpha_hat": alpha_hat, "stderr": stderr, "r": r, "t": t,
        "trials": trials, "seed": seed, "epsilon": float(cfg["epsilon"]),
        "tail": model.to_record(),
    })
    return 0


def _run_classify(cfg: dict) -> int:
    model = _tail_from(cfg)
    _need(cfg, "t", "r", "trials")
    r, trials, seed = int(cfg["r"]), int(cfg["trials"]), int(cfg["seed"])
    t = float(cfg["t"])
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    base = {"t": t, "r": r, "trials": trials, "seed": seed,
            "epsilon": float(cfg["epsilon"]), "tail": model.to_record()}
    try:
        result = vf.classify_tail(model, t, r, trials, seed,
                                  threads=int(cfg["threads"]))
    except vf.ClassificationError as exc:
        _write_json(out / "classification.json", {
            **base, "verdict": None, "alpha_hat": None,
            "error": str(exc), "evidence": vf._jsonable(exc.diagnostics),
        })
        _diag(str(exc), kind="classification")
        return 1
    _write_json(out / "classification.json", {**base, **result.to_json_dict()})
    return 0


_RUNNERS = {
    "simulate": _run_simulate,
    "laws": _run_laws,
    "verify": _run_verify,
    "estimate": _run_estimate,
    "classify": _run_classify,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        for name, kind in (("r", int), ("n", int), ("trials", int), ("seed", int),
                           ("cap", int), ("threads", int), ("epsilon", float),
                           ("t", float), ("alpha", float), ("beta", float),
                           ("c", float), ("gamma", float)):
            _coerce(cfg, name, kind)
        return _RUNNERS[args.experiment](cfg)
    except _CliError as exc:
        _diag(str(exc))
        return 2
    except (ValueError, sp.TruncationError) as exc:
        _diag(str(exc), kind="domain")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
