"""Command-line front end.

Every subcommand reads one JSON experiment config, validates it against
``schemas/v1/<subcommand>.json``, runs the experiment and writes into the
output directory:

``report.json``
    The result with the config, its hash, the seed and the toolkit
    version, plus the list of assertion checks.
``<table>.csv``
    Row tables (RFC 4180).
``<name>.plot.csv``
    Two-column ``x,y`` files for log-log plots.
``error.json``
    Written instead of a report when the run fails before finishing.

Exit status: 0 when every check passes, 1 for a failed check or a
configuration error, 2 for a schema violation, 3 for a resolution guard.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy.fft

from . import __version__
from ._errors import FractimeError, SchemaError
from .dimension import assouad_characteristic, minkowski_estimate, spectrum_characteristic
from .exponents import ExponentConfig, inhom_exponents
from .fracmeasure import cantor_measure, lebesgue_proxy
from .fracset import export_points_csv, separated_subset, set_from_json
from .inhom import inhom_experiment
from .localsmooth import (PhaseFamily, kernel_order, localization_kernel_check, smoothing_experiment,
                          smoothing_set_experiment)
from .reports import config_hash, dumps, write_csv
from .sharpness import (necessity_conad, necessity_conreg, necessity_measure, necessity_smoothing,
                        tube_constant)
from .strichartz_hom import discrete_young_apply, homogeneous_experiment, kernel_matrix, kernel_norm_check

__all__ = ["main", "run", "validate", "SUBCOMMANDS", "SUITE"]

SUBCOMMANDS = ("dim", "set", "strichartz", "inhom", "smoothing", "sharpness", "kernel", "all")


@dataclass
class Outcome:
    result: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def check(self, name, value, op, threshold):
        if op == "in":
            ok = threshold[0] <= value <= threshold[1]
        else:
            ok = value <= threshold if op == "<=" else value >= threshold
        self.checks.append({"name": name, "value": value, "op": op, "threshold": threshold, "ok": bool(ok)})

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)


# schema handling ---------------------------------------------------------------

def _schema(name: str) -> dict:
    return json.loads(resources.files("fractime.schemas.v1").joinpath(f"{name}.json").read_text())


def validate(doc, name: str) -> None:
    """Raise :class:`SchemaError` with a JSON pointer to the first offending field."""
    validator = jsonschema.Draft202012Validator(_schema(name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        exc = SchemaError(f"{pointer}: {err.message}")
        exc.pointer = pointer
        raise exc


def _load(path, name) -> dict:
    if path is None:
        doc = {"kind": name}
    else:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            exc = SchemaError(f"config is not valid JSON: {e}")
            exc.pointer = ""
            raise exc from e
        except OSError as e:
            raise SchemaError(f"cannot read config {path}: {e}") from e
    validate(doc, name)
    return doc


# helpers -----------------------------------------------------------------------

def _ratio_outputs(out: Outcome, rep, x_name="j"):
    out.result["report"] = rep.to_json()
    header, rows = rep.csv_rows()
    out.tables["ratios"] = (header, rows)
    out.plots["ratios"] = ([r.j for r in rep.rows], [math.log2(r.ratio) for r in rep.rows])


def _slope_checks(out: Outcome, slope, cfg, default_max=0.1, default_fail=0.05):
    th = cfg.get("thresholds", {})
    if cfg.get("fail_expected", False):
        out.check("slope (expected failure)", slope, ">=", th.get("fail_slope", default_fail))
    elif "slope_range" in th:
        out.check("slope", slope, "in", list(th["slope_range"]))
    else:
        out.check("slope", slope, "<=", th.get("max_slope", default_max))


# runners -----------------------------------------------------------------------

def run_dim(cfg, seed):
    out = Outcome()
    E = set_from_json(cfg["set"])
    out.result["set"] = E.to_json()
    th = cfg.get("thresholds", {})
    if "minkowski" in cfg:
        rep = minkowski_estimate(E, cfg["minkowski"]["exponents"])
        out.result["minkowski"] = rep.to_json()
        out.plots["minkowski"] = (list(rep.exponents), [math.log2(c) for c in rep.counts])
        if "minkowski_range" in th:
            out.check("minkowski slope", rep.slope, "in", list(th["minkowski_range"]))
    if "assouad" in cfg:
        a = cfg["assouad"]
        wins = a["window_exps"]
        deltas = a.get("delta_exps")
        finest = max(deltas) if deltas else max(wins) + 2 * (max(wins) - min(wins)) + 2
        rep = assouad_characteristic(E.refine(2.0 ** -finest), a["alpha"], window_exps=wins,
                                     delta_exps=deltas, restrict_unit=a.get("restrict_unit", False))
        out.result["assouad"] = rep.to_json()
        out.tables["assouad"] = (["window", "delta", "count", "ratio"], list(rep.table))
        if "max_sup" in th:
            out.check("assouad sup", rep.sup_value, "<=", th["max_sup"])
    if "spectrum" in cfg:
        sp = cfg["spectrum"]
        finest = max(sp["window_exps"]) / sp["theta"]
        rep = spectrum_characteristic(E.refine(2.0 ** -finest), sp["alpha"], sp["theta"], sp["window_exps"])
        out.result["spectrum"] = rep.to_json()
        out.tables["spectrum"] = (["window", "delta", "count", "ratio"], list(rep.table))
        out.plots["spectrum"] = ([-math.log2(r[0]) for r in rep.table], [r[3] for r in rep.table])
    return out


def run_set(cfg, seed, out_dir):
    out = Outcome()
    E = set_from_json(cfg["set"])
    if "resolution" in cfg:
        E = E.refine(cfg["resolution"])
    export_points_csv(E, out_dir / "points.csv")
    out.result["set"] = E.to_json()
    out.result["points"] = len(E.points())
    out.result["resolution"] = E.resolution
    if "measure" in cfg:
        m = cfg["measure"]
        if m["kind"] == "cantor":
            mu = cantor_measure(m.get("alpha", 0.5), m.get("depth", 8))
        else:
            mu = lebesgue_proxy(m.get("spacing", 2.0 ** -10))
        mu.write_csv(out_dir / "measure.csv")
        out.result["measure"] = {"atoms": len(mu), "total_mass": mu.total_mass, "resolution": mu.resolution}
    return out


def run_strichartz(cfg, seed):
    out = Outcome()
    exps = ExponentConfig.from_json(cfg["exponents"])
    E = set_from_json(cfg["set"]) if "set" in cfg else None
    rep = homogeneous_experiment(exps, cfg["j_range"], trials=cfg.get("trials", 20), seed=seed,
                                 measure=cfg.get("measure", "cantor"), E=E, nodes=cfg.get("nodes", 8),
                                 characteristic=cfg.get("characteristic"))
    _ratio_outputs(out, rep)
    _slope_checks(out, rep.slope, cfg)
    return out


def run_inhom(cfg, seed):
    out = Outcome()
    e = cfg["exponents"]
    exps = inhom_exponents(e["d"], e["gamma"], e["alpha"], e["rt"], e["r"], e["qt"], e["q"])
    rep = inhom_experiment(exps, cfg["j_range"], trials=cfg.get("trials", 8), seed=seed,
                           measure=cfg.get("measure", "cantor"),
                           require_hypotheses=cfg.get("require_hypotheses", True))
    _ratio_outputs(out, rep)
    _slope_checks(out, rep.slope, cfg)
    return out


def run_smoothing(cfg, seed):
    out = Outcome()
    common = dict(trials=cfg.get("trials", 8), seed=seed, d=cfg.get("d", 1))
    if "set" in cfg:
        E = set_from_json(cfg["set"])
        rep = smoothing_set_experiment(E, cfg["gamma"], cfg["s"], cfg["j_range"], alpha=cfg["alpha"],
                                       nodes=cfg.get("nodes", 8), **common)
    else:
        rep = smoothing_experiment(cfg.get("measure", "cantor"), cfg["gamma"], cfg["s"], cfg["j_range"],
                                   alpha=cfg.get("alpha"), **common)
    _ratio_outputs(out, rep)
    _slope_checks(out, rep.slope, cfg)
    return out


def run_sharpness(cfg, seed):
    out = Outcome()
    test = cfg["test"]
    if test == "tube":
        gamma = cfg.get("gamma", 2.0)
        rows = [tube_constant(j, m, gamma, t0=2.0 ** (-1.0 / cfg.get("alpha", 0.5)))
                for j in cfg.get("j_range", [6, 7, 8]) for m in cfg.get("m_range", [2, 4, 6])]
        out.result["tube"] = rows
        out.tables["tube"] = (["j", "m", "constant", "peak_scaled"],
                              [[r["j"], r["m"], r["constant"], r["peak_scaled"]] for r in rows])
        out.check("tube constant", min(r["constant"] for r in rows), ">=", 0.1)
        return out
    if test == "smoothing":
        rep = necessity_smoothing(cfg.get("gamma", 2.0), cfg.get("j_range", [6, 8, 10, 12, 14]),
                                  cfg.get("s", -0.25), alpha=cfg.get("alpha", 0.5))
    else:
        exps = ExponentConfig.from_json(cfg["exponents"])
        if test in ("conreg", "conreg2"):
            rep = necessity_conreg(exps, cfg.get("j_range", [4, 5, 6, 7, 8]), measure=test == "conreg2")
        else:
            fn = necessity_conad if test == "conad" else necessity_measure
            rep = fn(exps, cfg.get("j", 10), cfg.get("m_range", [6, 8, 10, 12]),
                     sensitivity=tuple(cfg.get("sensitivity", [4, 12])))
    out.result["necessity"] = rep.to_json()
    header, rows = rep.report.csv_rows()
    out.tables["ratios"] = (header, rows)
    out.plots["ratios"] = ([r.j for r in rep.report.rows], [math.log2(r.ratio) for r in rep.report.rows])
    out.check("|measured - predicted|", abs(rep.measured - rep.predicted), "<=",
              0.3 * abs(rep.predicted) + 0.05)
    return out


def run_kernel(cfg, seed):
    out = Outcome()
    check = cfg["check"]
    th = cfg.get("thresholds", {})
    if check == "localization":
        d = cfg.get("d", 1)
        L = cfg.get("L_order", kernel_order(d, cfg.get("nu", 0.0)))
        rep = localization_kernel_check(PhaseFamily(cfg.get("gamma", 2.0), tuple(map(tuple, cfg.get("terms", [])))),
                                        cfg.get("j", 6), L, d=d, enforce=False)
        out.result["decay"] = rep.to_json()
        out.tables["decay"] = rep.csv_rows()
        out.plots["decay"] = ([math.log(1 + g) for g, m in zip(rep.gaps, rep.fit_mask) if m],
                              [math.log(v) for v, m in zip(rep.values, rep.fit_mask) if m])
        out.check("decay exponent", rep.exponent, ">=", L - 0.5)
        return out
    E = set_from_json(cfg["set"])
    d, gamma, alpha, r = cfg.get("d", 1), cfg.get("gamma", 2.0), cfg.get("alpha", 0.5), cfg.get("r", 4)
    if check == "norm":
        rep = kernel_norm_check(E, d, gamma, alpha, r, cfg.get("s_exp", 4), cfg["j_range"],
                                mode=cfg.get("mode", "strong"), branch=cfg.get("branch", "schrodinger"),
                                enforce=False)
        out.result["kernel_norms"] = rep.to_json()
        out.tables["column_norms"] = (["j", "norm", "normalized"],
                                      [[j, n, z] for j, n, z in zip(rep.js, rep.column_norms, rep.normalized)])
        out.plots["column_norms"] = (list(rep.js), [math.log2(z) for z in rep.normalized])
        out.check("normalized spread", rep.spread, "<=", th.get("max_spread", 2.0))
        return out
    j = cfg.get("j", 6)
    pts = separated_subset(E.refine(2.0 ** (-gamma * j)), gamma, j).points
    K = kernel_matrix(pts, gamma, j, r, d, cfg.get("branch", "schrodinger"))
    a = np.random.default_rng(np.random.SeedSequence([int(seed), int(j)])).standard_normal(pts.size)
    res = discrete_young_apply(K, a, cfg.get("p", 2), cfg.get("q", 2), weak=cfg.get("mode") == "weak")
    out.result["young"] = res.to_json()
    out.result["points"] = int(pts.size)
    out.check("young constant", res.constant, "<=", th.get("max_constant", 1.0))
    return out


RUNNERS = {"dim": run_dim, "strichartz": run_strichartz, "inhom": run_inhom,
           "smoothing": run_smoothing, "sharpness": run_sharpness, "kernel": run_kernel}

# curated suite: fast versions of the acceptance experiments
CANTOR = {"kind": "cantor", "alpha": 0.5, "depth": 10}
SUITE = [
    ("dim_cantor", "dim", {"set": CANTOR, "minkowski": {"exponents": [4, 6, 8, 10, 12, 14, 16, 18, 20]},
                           "assouad": {"alpha": 0.5, "window_exps": [0, 2, 4, 6, 8]},
                           "thresholds": {"max_sup": 16, "minkowski_range": [0.45, 0.55]}}),
    ("strichartz_cantor_44", "strichartz", {"exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "q": 4, "r": 4, "s": 0},
                                            "j_range": [4, 5, 6, 7, 8, 9], "trials": 20}),
    ("strichartz_below_threshold", "strichartz", {"exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "q": 4, "r": 4,
                                                                "s": "-1/4"},
                                                  "j_range": [4, 5, 6, 7, 8, 9], "trials": 20, "fail_expected": True}),
    ("inhom_sigma0", "inhom", {"exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "rt": 4, "r": 4, "qt": 4, "q": 4},
                               "j_range": [4, 5, 6, 7], "require_hypotheses": False}),
    ("inhom_sigma_half", "inhom", {"exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "rt": 4, "r": 4, "qt": "inf",
                                                 "q": "inf"},
                                   "j_range": [4, 5, 6, 7], "require_hypotheses": False,
                                   "thresholds": {"slope_range": [0.35, 0.65]}}),
    ("smoothing_cantor", "smoothing", {"measure": "cantor", "alpha": 0.5, "gamma": 2, "s": -0.25,
                                       "j_range": [4, 5, 6, 7, 8, 9]}),
    ("sharpness_conad_24", "sharpness", {"test": "conad", "exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "q": 2,
                                                                      "r": 4, "s": "-1/4"}}),
    ("sharpness_conad_44", "sharpness", {"test": "conad", "exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "q": 4,
                                                                      "r": 4, "s": "-1/4"}}),
    ("sharpness_tube", "sharpness", {"test": "tube", "j_range": [6, 7, 8], "m_range": [2, 4, 6]}),
    ("sharpness_smoothing", "sharpness", {"test": "smoothing", "s": -0.35}),
    ("kernel_strong", "kernel", {"check": "norm", "set": CANTOR, "r": 4, "s_exp": 4, "j_range": [4, 5, 6, 7, 8]}),
    ("kernel_localization", "kernel", {"check": "localization", "gamma": 2, "j": 6, "L_order": 2}),
]


def _write(out_dir: Path, name: str, cfg: dict, seed: int, out: Outcome) -> dict:
    report = {"subcommand": name, "config": cfg, "config_hash": config_hash(cfg), "seed": seed,
              "version": __version__, "result": out.result, "checks": out.checks,
              "status": "pass" if out.ok else "fail"}
    (out_dir / "report.json").write_text(dumps(report))
    # a stale error record from an earlier run would contradict the report
    (out_dir / "error.json").unlink(missing_ok=True)
    for tname, (header, rows) in out.tables.items():
        write_csv(out_dir / f"{tname}.csv", header, rows)
    for pname, (xs, ys) in out.plots.items():
        write_csv(out_dir / f"{pname}.plot.csv", ["x", "y"], list(zip(xs, ys)))
    return report


def _error_record(exc: BaseException) -> dict:
    code = exc.exit_code if isinstance(exc, FractimeError) else 1
    rec = {"status": code, "error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "pointer", None) is not None:
        rec["pointer"] = exc.pointer
    return rec


def _run_one(name: str, cfg: dict, seed: int, out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    if name == "set":
        out = run_set(cfg, seed, out_dir)
    else:
        out = RUNNERS[name](cfg, seed)
    _write(out_dir, name, cfg, seed, out)
    return 0 if out.ok else 1


def _run_all(cfg: dict, seed: int, out_dir: Path) -> int:
    only = cfg.get("only")
    summary = []
    status = 0
    for label, name, sub in SUITE:
        if only and label not in only:
            continue
        doc = dict(sub, kind=name)
        validate(doc, name)
        try:
            code = _run_one(name, doc, seed, out_dir / label)
            rec = {"name": label, "subcommand": name, "status": code}
        except FractimeError as exc:
            code = exc.exit_code
            rec = {"name": label, "subcommand": name, "status": code, "error": _error_record(exc)}
        summary.append(rec)
        status = max(status, 1 if code else 0)
    report = {"subcommand": "all", "config": cfg, "config_hash": config_hash(cfg), "seed": seed,
              "version": __version__, "runs": summary, "status": "pass" if status == 0 else "fail"}
    (out_dir / "report.json").write_text(dumps(report))
    return status


def run(subcommand: str, config_path=None, out_dir="fractime-out", seed: int | None = None,
        threads: int = 1) -> int:
    """Run one subcommand and return its exit status."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if subcommand not in SUBCOMMANDS:
            raise SchemaError(f"unknown subcommand {subcommand!r}")
        if config_path is None and subcommand != "all":
            raise SchemaError(f"subcommand {subcommand!r} needs a config file")
        cfg = _load(config_path, subcommand)
        seed = int(cfg.get("seed", 0) if seed is None else seed)
        with scipy.fft.set_workers(max(1, int(threads))):
            if subcommand == "all":
                code = _run_all(cfg, seed, out_dir)
            else:
                code = _run_one(subcommand, cfg, seed, out_dir)
    except FractimeError as exc:
        rec = _error_record(exc)
        (out_dir / "error.json").write_text(dumps(rec))
        print(json.dumps(rec, sort_keys=True), file=sys.stderr)
        return rec["status"]
    print(f"fractime {subcommand}: {'pass' if code == 0 else 'fail'} ({out_dir / 'report.json'})")
    return code


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="FFT worker threads")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p = argparse.ArgumentParser(prog="fractime", parents=[common],
                                description="Fractal-time Strichartz and local smoothing experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("config", nargs="?" if name == "all" else None, help="JSON experiment config")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return run(args.command, getattr(args, "config", None), getattr(args, "out", "fractime-out"),
               getattr(args, "seed", None), getattr(args, "threads", 1))


if __name__ == "__main__":
    sys.exit(main())
