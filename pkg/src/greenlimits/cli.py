"""Batch command-line front end.

Every command reads an optional JSON config, writes CSV datasets and a
JSON manifest into ``--out``. The manifest stores the fully resolved
config, so ``rerun MANIFEST`` regenerates byte-identical files.

Exit status: 0 success, 2 config error, 3 infeasible, 4 numerical or
internal failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import QAM, SER_KINDS, SerModel, continuous_se
from .efficiency import icpe_grid, icse_grid
from .errors import ConfigError, GreenLimitsError, InfeasibleError
from .extremal import (DEFAULT_M_SET, SearchDomain, constrained_icse_curve, maximize_spectral,
                       minimize_power, optimal_complexity_trend, power_infimum)
from .interference import (FIG5_COLUMNS, CellLayout, ErrorDistribution, InterferenceConfig,
                           asymptotic_sweep, fig5_surface, run)
from .mac_bounds import FIG6_COLUMNS, PacketLaw, fig6_rows, mac_bound
from .mac_sim import CURVE_COLUMNS, SimConfig, check_dominance, default_load_grid, sweep_load

SCHEMA_VERSION = 1
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


@dataclass
class Outcome:
    files: list                       # (name, columns, rows)
    resolved: dict
    seeds: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    exit_code: int = 0


def _resolve(cfg: dict, defaults: dict) -> dict:
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = dict(defaults)
    out.update(cfg)
    return out


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, columns, rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return sha256_file(path)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_digest(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _ser_model(kind):
    if kind not in SER_KINDS:
        raise ConfigError(f"unknown SER model {kind!r}; choose from {SER_KINDS}")
    return SerModel(kind)


def _sinr_grid(cfg):
    lo, hi, step = cfg["sinr_db"]
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


# figures ------------------------------------------------------------------

def fig2(cfg, opts):
    c = _resolve(cfg, {"m_set": [4, 16, 64], "B_s": 2.0, "sinr_db": [-10.0, 40.0, 1.0]})
    model = SerModel(QAM)
    db = _sinr_grid(c)
    g = 10 ** (db / 20)
    cols = ["sinr_db", "shannon_se"] + [f"icse_m{m}" for m in c["m_set"]]
    curves = [icse_grid(int(m), g, float(c["B_s"]), model) for m in c["m_set"]]
    rows = [(d, float(continuous_se(gg ** 2)), *(float(cv[i]) for cv in curves))
            for i, (d, gg) in enumerate(zip(db, g))]
    return Outcome([("fig2.csv", cols, rows)], c)


def fig3(cfg, opts):
    c = _resolve(cfg, {"m_set": [2, 4, 16, 64, 256, 1024], "g": [0.5, 1.0, 2.0],
                       "B_range": [0.25, 4096.0], "B_points": 49, "ser_model": "orthogonal-coherent"})
    model = _ser_model(c["ser_model"])
    B = np.geomspace(*c["B_range"], int(c["B_points"]))
    grid, optima = [], []
    dom = SearchDomain(m_set=tuple(c["m_set"]), B_range=tuple(c["B_range"]),
                       B_points=max(int(c["B_points"]), 16))
    for g in c["g"]:
        for m in c["m_set"]:
            C = icse_grid(int(m), float(g), B, model)
            W = icpe_grid(int(m), float(g), B, model)
            grid += [(float(g), int(m), b, cc, ww) for b, cc, ww in zip(B, C, W)]
            r = power_infimum(int(m), float(g), dom, model)
            optima.append((float(g), int(m), r.arg.B_s, r.value, r.icse))
    return Outcome([("fig3.csv", ("g", "m", "B_s", "icse", "icpe"), grid),
                    ("fig3_optima.csv", ("g", "m", "B_s_star", "w_min", "icse_at_min"), optima)], c)


def fig4(cfg, opts):
    c = _resolve(cfg, {"m_set": list(DEFAULT_M_SET), "g": [2.0, 1.0, 0.5],
                       "B_range": [2.0, 65536.0], "B_points": 129, "power_slack": 0.02,
                       "ser_model": "orthogonal-coherent"})
    model = _ser_model(c["ser_model"])
    g_series = sorted((float(g) for g in c["g"]), reverse=True)
    dom_kw = dict(m_set=tuple(c["m_set"]), B_range=tuple(c["B_range"]), B_points=int(c["B_points"]))
    rows = []
    B = SearchDomain(**dom_kw).B_grid()
    for g in g_series:
        dom = SearchDomain.fixed_g(g, **dom_kw)
        for m in c["m_set"]:
            w_inf = power_infimum(int(m), g, dom, model).value
            cv = constrained_icse_curve(int(m), g, B, model, float(c["power_slack"]), w_inf)
            rows += [(g, int(m), b, cc, ww, f) for b, cc, ww, f in
                     zip(cv["B_s"], cv["icse"], cv["icpe"], cv["feasible"])]
    trend = optimal_complexity_trend(g_series, c["m_set"], model, float(c["power_slack"]),
                                     tuple(c["B_range"]), int(c["B_points"]))
    return Outcome([("fig4.csv", ("g", "m", "B_s", "icse", "icpe", "feasible"), rows),
                    ("fig4_optima.csv", ("g", "m_star", "B_s_star", "icse_star"), trend.rows)],
                   c, notes={"trend": trend.trend})


def _errors(d):
    return ErrorDistribution(**d)


def _interference_config(c) -> InterferenceConfig:
    lay = c["layout"]
    layout = (CellLayout(attenuations=tuple(lay["attenuations"]), actives=int(lay["actives"]),
                         asynchronous=bool(lay["asynchronous"]))
              if lay.get("attenuations") else
              CellLayout.from_distances(lay["distances"], path_loss_exponent=lay["path_loss_exponent"],
                                        actives=int(lay["actives"]),
                                        asynchronous=bool(lay["asynchronous"])))
    return InterferenceConfig(kind=c["kind"], m=int(c["m"]), degree=int(c["degree"]),
                              oversampling=int(c["oversampling"]), layout=layout,
                              errors=_errors(c["errors"]), thermal_db=float(c["thermal_db"]),
                              trials=int(c["trials"]), seed=int(c["seed"]))


_DEFAULT_ERRORS = {"amplitude": 0.05, "delay": 0.05, "duration": 0.002, "frequency": 0.005,
                   "phase": 0.05}
_INTERFERENCE_DEFAULTS = {
    "kind": "walsh", "m": 8, "degree": 7, "oversampling": 8, "thermal_db": -113.101,
    "trials": 1000, "seed": 0, "errors": _DEFAULT_ERRORS,
    "layout": {"distances": [2.0] * 6, "path_loss_exponent": 3.5, "actives": 4,
               "asynchronous": True, "attenuations": []},
}


def _with_overrides(c, opts):
    if opts.seed is not None:
        c["seed"] = opts.seed
    if opts.trials is not None:
        c["trials"] = opts.trials
    return c


def fig5(cfg, opts):
    defaults = dict(_INTERFERENCE_DEFAULTS, trials=200,
                    sync_sigmas=[0.0, 0.05, 0.1, 0.2, 0.4], phase_sigmas=[0.0, 0.05, 0.1, 0.2, 0.4])
    c = _with_overrides(_resolve(cfg, defaults), opts)
    ic = _interference_config(c)
    rows = fig5_surface(ic, c["sync_sigmas"], c["phase_sigmas"])
    return Outcome([("fig5.csv", FIG5_COLUMNS, rows)], c, seeds=[c["seed"]])


def fig6(cfg, opts):
    c = _resolve(cfg, {"mean_slots": list(range(1, 65)), "buffer_sizes": [1, 4, 16, 64],
                       "slot_bits": 1.0})
    rows = fig6_rows(c["mean_slots"], c["buffer_sizes"], float(c["slot_bits"]))
    return Outcome([("fig6.csv", FIG6_COLUMNS, rows)], c)


FIGURE_HANDLERS = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6}


# commands -----------------------------------------------------------------

OPT_COLUMNS = ("kind", "m", "g", "B_s", "value", "icse", "icpe", "constraint_active")


def optimize(cfg, opts):
    c = _resolve(cfg, {"objective": "power", "m_set": list(DEFAULT_M_SET), "g_range": [0.1, 10.0],
                       "B_range": [2.0, 65536.0], "g_points": 64, "B_points": 129, "g": None,
                       "c_F_floor": 0.0, "power_slack": 0.02, "ser_model": "orthogonal-coherent"})
    model = _ser_model(c["ser_model"])
    kw = dict(m_set=tuple(c["m_set"]), B_range=tuple(c["B_range"]), B_points=int(c["B_points"]))
    if c["objective"] == "power":
        if c["g"] is None:
            dom = SearchDomain(g_range=tuple(c["g_range"]), g_points=int(c["g_points"]), **kw)
        else:
            dom = SearchDomain.fixed_g(float(c["g"]), **kw)
        res = minimize_power(dom, float(c["c_F_floor"]), model)
    elif c["objective"] == "spectral":
        if c["g"] is None:
            raise ConfigError("spectral objective needs a fixed g")
        res = maximize_spectral(SearchDomain.fixed_g(float(c["g"]), **kw), model,
                                float(c["power_slack"]))
    else:
        raise ConfigError(f"objective must be 'power' or 'spectral', got {c['objective']!r}")
    rows = [(r.kind, r.arg.m, r.arg.g, r.arg.B_s, r.value, r.icse, r.icpe, r.constraint_active)
            for r in (res,) + res.candidates]
    return Outcome([("optimum.csv", OPT_COLUMNS, rows)], c)


def interference(cfg, opts):
    c = _with_overrides(_resolve(cfg, dict(_INTERFERENCE_DEFAULTS, scales=[])), opts)
    ic = _interference_config(c)
    if c["scales"]:
        rows = asymptotic_sweep(c["scales"], ic)
        cols = ("scale", "intra", "inter", "g_squared", "intra_se", "inter_se")
        return Outcome([("interference_sweep.csv", cols, rows)], c, seeds=[c["seed"]])
    est = run(ic)
    cols = ("signal", "intra", "inter", "thermal", "g_squared", "std_err", "trials")
    row = (est.signal_power, est.intra_power, est.inter_power, est.thermal_power, est.g_squared,
           est.std_error, est.trials)
    return Outcome([("interference.csv", cols, [row])], c, seeds=[c["seed"]])


def macsim(cfg, opts):
    c = _with_overrides(_resolve(cfg, {
        "stations": 16, "packet_law": "geometric", "mean_slots": 2.0, "reservation_overhead": "infimum",
        "slot_size": 128, "ser": 0.0, "duration": 100000, "seed": 0, "seeds": 10, "G_grid": None,
        "trials": None}), opts)
    if c["trials"] is not None:
        c["seeds"] = int(c["trials"])
    law = PacketLaw(c["packet_law"], float(c["mean_slots"]))
    r = c["reservation_overhead"]
    if r == "infimum":
        r = math.ceil(mac_bound(law, float(c["mean_slots"]) * int(c["slot_size"])).overhead_infimum)
    sim = SimConfig(stations=int(c["stations"]), offered_load=1.0, packet_law=law,
                    reservation_overhead=int(r), slot_size=int(c["slot_size"]), ser=float(c["ser"]),
                    duration=int(c["duration"]))
    grid = c["G_grid"] or default_load_grid(sim)
    c["G_grid"] = [float(g) for g in grid]
    seeds = list(range(int(c["seed"]), int(c["seed"]) + int(c["seeds"])))
    curve = sweep_load(sim, c["G_grid"], seeds, workers=opts.workers)
    chk = check_dominance(sim, curve)
    rows = [(p.G, p.S, p.ci_low, p.ci_high, p.seed_count) for p in curve.points]
    summary = [(chk.measured_capacity, chk.std_error, chk.supremum, chk.overhead_infimum, int(r),
                chk.comparable, "pass" if chk.passed else "fail")]
    scols = ("measured_capacity", "std_err", "supremum", "overhead_infimum", "overhead_bits",
             "comparable", "dominance")
    return Outcome([("macsim_curve.csv", CURVE_COLUMNS, rows), ("macsim_bound.csv", scols, summary)],
                   c, seeds=seeds, notes={"dominance": "pass" if chk.passed else "fail"})


COMMANDS = {"optimize": optimize, "interference": interference, "macsim": macsim}


# driver -------------------------------------------------------------------

def execute(command: str, target, cfg: dict, opts, out_dir: Path) -> dict:
    """Run one command, write its CSVs and manifest, return the manifest."""
    handler = FIGURE_HANDLERS[target] if command == "figure" else COMMANDS[command]
    t0 = time.perf_counter()
    outcome = handler(cfg, opts)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name, cols, rows in outcome.files:
        digest = write_csv(out_dir / name, cols, rows)
        outputs.append({"file": name, "sha256": digest, "schema_version": SCHEMA_VERSION,
                        "columns": list(cols)})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "target": target,
        "config": outcome.resolved,
        "config_digest": config_digest(outcome.resolved),
        "seeds": outcome.seeds,
        "version": __version__,
        "outputs": outputs,
        "notes": outcome.notes,
        "wall_clock_s": time.perf_counter() - t0,
    }
    stem = target if command == "figure" else command
    with open(out_dir / f"{stem}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def rerun(manifest_path, opts, out_dir: Path) -> int:
    try:
        with open(manifest_path) as fh:
            old = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from exc
    opts.seed = opts.trials = None
    new = execute(old["command"], old["target"], old["config"], opts, out_dir)
    before = {o["file"]: o["sha256"] for o in old["outputs"]}
    ok = True
    for o in new["outputs"]:
        same = before.get(o["file"]) == o["sha256"]
        ok &= same
        print(f"{o['file']}: {'identical' if same else 'DIFFERS'}")
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--workers", type=int, default=1)
    p = argparse.ArgumentParser(prog="greenlimits", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    f = sub.add_parser("figure", parents=[common], help="emit the dataset behind a figure")
    f.add_argument("target", choices=FIGURES)
    sub.add_parser("optimize", parents=[common], help="extremal power/spectral optimization")
    sub.add_parser("interference", parents=[common], help="Monte-Carlo SINR or error-scale sweep")
    sub.add_parser("macsim", parents=[common], help="MAC load sweep checked against the bound")
    r = sub.add_parser("rerun", parents=[common], help="re-execute a manifest and compare outputs")
    r.add_argument("manifest")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        if args.command == "rerun":
            return rerun(args.manifest, args, Path(args.out))
        target = getattr(args, "target", None)
        man = execute(args.command, target, _load_config(args.config), args, Path(args.out))
        for o in man["outputs"]:
            print(os.path.join(args.out, o["file"]))
        if man["notes"]:
            print(json.dumps(man["notes"], sort_keys=True))
        return 0
    except InfeasibleError as exc:
        print(f"infeasible: {exc} [constraint: {exc.constraint}]", file=sys.stderr)
        return exc.exit_code
    except GreenLimitsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc!r}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
