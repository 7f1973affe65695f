"""Command line front end.

Subcommands::

    pigmil gen   --kind {basic,rhombus,ring} --seed N --out FILE
    pigmil tpi   --data FILE --method {pigmil,kde-min,kde,kde-max} --seed N [--json]
                 [--graph-out FILE] [--model-out FILE]
    pigmil run   --data FILE --folds 10 --repeats 5 --seed N [--json]
    pigmil sweep --mode {noise,ws-size,d-ratio} --data FILE [--json] [--csv FILE]

``--config FILE`` reads ``key = value`` lines (``#`` comments) whose keys
are the long flag names with dashes or underscores; flags given on the
command line win.  Exit codes: 0 success, 1 usage error, 2 data error,
3 solver failure.
"""

import argparse
import configparser
import csv
import json
import sys
from dataclasses import fields

from ..classify import PigmilConfig, dump_model, run_pigmil
from ..core import DataError
from ..io import read_bags, write_bags
from ..svm import SolverError
from .experiments import METHODS, cross_validate, detect_tpis, sweep_d_ratio, sweep_noise, sweep_ws_size
from .synth import KINDS, SynthSpec, generate, tpi_accuracy

EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_CFG_FIELDS = {f.name: f for f in fields(PigmilConfig)}


def _coerce(name, text):
    f = _CFG_FIELDS[name]
    default = f.default
    if isinstance(default, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if name in ("alpha", "beta"):
        return None if text.strip().lower() in ("", "none") else float(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text.strip()


def build_parser():
    p = _Parser(prog="pigmil", description="True-positive-instance detection for multiple instance learning.")
    p.add_argument("--config", help="key = value file mirroring the flags")
    sub = p.add_subparsers(dest="command")

    def common(sp, data=True):
        if data:
            sp.add_argument("--data", help="bag-CSV input")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--json", action="store_true", default=None, help="print a JSON report")
        for name, f in _CFG_FIELDS.items():
            sp.add_argument("--" + name.replace("_", "-"), dest="cfg_" + name, default=None,
                            help=f"pipeline setting (default {f.default})")

    g = sub.add_parser("gen", help="write a synthetic dataset")
    g.add_argument("--kind", choices=KINDS)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")

    t = sub.add_parser("tpi", help="detect true positive instances")
    common(t)
    t.add_argument("--method", choices=METHODS)
    t.add_argument("--graph-out", dest="graph_out", help="pigmil only: write the final graph (i j weight lines)")
    t.add_argument("--model-out", dest="model_out", help="pigmil only: write a bag model fit on the whole dataset")

    r = sub.add_parser("run", help="repeated cross-validation")
    common(r)
    r.add_argument("--folds", type=int)
    r.add_argument("--repeats", type=int)

    s = sub.add_parser("sweep", help="sensitivity sweeps")
    common(s)
    s.add_argument("--mode", choices=("noise", "ws-size", "d-ratio"))
    s.add_argument("--values", help="comma-separated levels / fractions / ratios")
    s.add_argument("--csv", help="also write the table as CSV")
    return p


_DEFAULTS = {"seed": 0, "json": False, "method": "pigmil", "folds": 10, "repeats": 5, "kind": "basic"}


def _read_config(path):
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[pigmil]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in cp["pigmil"].items()}


def _resolve(args):
    """Merge config-file values under the command-line flags."""
    file_vals = _read_config(args.config) if args.config else {}
    opts = {}
    for key in ("data", "seed", "json", "method", "folds", "repeats", "mode", "values", "csv", "kind", "out",
                "graph_out", "model_out"):
        val = getattr(args, key, None)
        if val is None and key in file_vals:
            raw = file_vals[key]
            val = {"seed": int, "folds": int, "repeats": int}.get(key, str)(raw)
            if key == "json":
                val = raw.strip().lower() in ("1", "true", "yes", "on")
        if val is None:
            val = _DEFAULTS.get(key)
        opts[key] = val
    cfg_kw = {}
    for name in _CFG_FIELDS:
        raw = getattr(args, "cfg_" + name, None)
        if raw is None:
            raw = file_vals.get(name)
        if raw is not None:
            try:
                cfg_kw[name] = _coerce(name, raw)
            except ValueError:
                raise UsageError(f"bad value for {name}: {raw!r}") from None
    unknown = set(file_vals) - set(opts) - set(_CFG_FIELDS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        cfg = PigmilConfig(**cfg_kw)
        cfg.rank  # validates damping / normalization
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return opts, cfg


def _need(opts, *keys):
    for k in keys:
        if opts.get(k) is None:
            raise UsageError(f"--{k} is required")


def _emit(obj, as_json, text):
    if as_json:
        print(json.dumps(obj, indent=2, default=str))
    else:
        print(text)


def _cmd_gen(opts, cfg):
    _need(opts, "out")
    d = generate(SynthSpec(kind=opts["kind"], seed=opts["seed"]))
    write_bags(d, opts["out"])
    print(f"wrote {len(d)} bags to {opts['out']}")


def _cmd_tpi(opts, cfg):
    _need(opts, "data")
    d = read_bags(opts["data"])
    entries = detect_tpis(d, opts["method"], cfg, opts["seed"])
    acc = tpi_accuracy(entries, d) if d.has_truth else None
    if opts["graph_out"] or opts["model_out"]:
        if opts["method"] != "pigmil":
            raise UsageError("--graph-out and --model-out need --method pigmil")
        blind = d.without_truth()
        _, _, diag = run_pigmil(blind, blind, cfg, opts["seed"])
        if opts["graph_out"]:
            with open(opts["graph_out"], "w", encoding="utf-8") as fh:
                diag["detection"].graph.dump(fh)
        if opts["model_out"]:
            with open(opts["model_out"], "w", encoding="utf-8") as fh:
                dump_model(fh, diag["model"], diag["prototypes"], diag["scaler"])
    out = {"method": opts["method"], "seed": opts["seed"], "tpi_accuracy": acc,
           "entries": [{"bag_id": b, "instance": k} for b, k in entries], "config": cfg.as_dict()}
    text = f"{opts['method']}: {len(entries)} detected instances"
    if acc is not None:
        text += f", TPI accuracy {acc:.1f}%"
    _emit(out, opts["json"], text)


def _cmd_run(opts, cfg):
    _need(opts, "data")
    d = read_bags(opts["data"])
    rep = cross_validate(d, opts["folds"], opts["repeats"], cfg, opts["seed"])
    text = f"bag accuracy {rep.accuracy_mean:.1f} +- {rep.accuracy_std:.1f} over {len(rep.folds)} folds"
    if rep.tpi_mean is not None:
        text += f"; TPI accuracy {rep.tpi_mean:.1f}%"
    _emit(rep.to_dict(), opts["json"], text)


def _parse_values(text, cast):
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --values {text!r}") from None


def _cmd_sweep(opts, cfg):
    _need(opts, "data", "mode")
    d = read_bags(opts["data"])
    mode, seed = opts["mode"], opts["seed"]
    if mode == "noise":
        vals = _parse_values(opts["values"], int) if opts["values"] else [0, 1, 2, 3, 4, 5]
        rows = sweep_noise(d, vals, cfg, seed)
    elif mode == "ws-size":
        vals = _parse_values(opts["values"], float) if opts["values"] else [0.2, 0.4, 0.6, 0.8]
        rows = sweep_ws_size(d, vals, cfg, seed)
    else:
        vals = _parse_values(opts["values"], float) if opts["values"] else [0.0, 0.5, 1.0, 1.5, 2.0]
        rows = sweep_d_ratio(d, vals, cfg, seed)
    if opts["csv"]:
        with open(opts["csv"], "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    text = "\n".join(", ".join(f"{k}={v}" for k, v in row.items()) for row in rows)
    _emit({"mode": mode, "seed": seed, "rows": rows, "config": cfg.as_dict()}, opts["json"], text)


_COMMANDS = {"gen": _cmd_gen, "tpi": _cmd_tpi, "run": _cmd_run, "sweep": _cmd_sweep}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        opts, cfg = _resolve(args)
        _COMMANDS[args.command](opts, cfg)
    except UsageError as exc:
        print(f"pigmil: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"pigmil: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, OSError) as exc:
        print(f"pigmil: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
