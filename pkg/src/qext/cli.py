"""Command-line front end: ``qext <subcommand> [--config F] [--out DIR] [--tol X] [--threads N]``.

Exit codes: 0 ok, 1 numeric failure, 2 configuration error. Configuration
errors print a JSON diagnostic naming the offending field on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
SPECIES_ALIASES = {"scalar": "neutral_scalar", "fermion": "dirac_fermion"}
ALL_SPECIES = ("neutral_scalar", "charged_boson", "dirac_fermion", "majorana")
ALL_METHODS = ("closed_form", "feynman_parameter", "dispersion", "euclidean_branch")
# cross-method tolerances against the closed form
LOOP_TOL = {"feynman_parameter": 1e-8, "dispersion": 1e-4, "euclidean_branch": 1e-10}


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


class NumericFailure(Exception):
    pass


# ------------------------------------------------------------------ config


def _load_schema(name: str) -> dict:
    pkg = resources.files("qext") / "schemas"
    common = json.loads((pkg / "common.json").read_text())
    text = (pkg / f"{name}.json").read_text().replace("common.json#/$defs/", "#/$defs/")
    schema = json.loads(text)
    schema.setdefault("$defs", {}).update(common["$defs"])
    return schema


def validate_config(name: str, cfg: dict):
    schema = _load_schema(name)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path)
        if not path and err.validator == "required":
            path = err.message.split("'")[1]
        elif not path and err.validator == "additionalProperties":
            path = err.message.split("'")[1] if "'" in err.message else ""
        raise ConfigError(path or "<root>", err.message)


def parse_grid(text) -> list:
    """``"a:b:n"`` into ``[a, b, n]``."""
    if isinstance(text, (list, tuple)):
        return list(text)
    parts = str(text).split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError("grid", f"expected 'start:stop:count', got {text!r}") from None
    return [lo, hi, n]


def _grid_values(rng) -> np.ndarray:
    lo, hi, n = rng
    return np.linspace(float(lo), float(hi), int(n))


# ------------------------------------------------------------------ output


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    v = float(x)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ------------------------------------------------------------- subcommands


def cmd_propagator(cfg, out: Path, tol, threads):
    from .propagators import LightConeError, kg_position

    if "grid" in cfg:
        ts, rs = _grid_values(cfg["grid"]["t"]), _grid_values(cfg["grid"]["r"])
        pts = [[t, r, 0.0, 0.0] for t in ts for r in rs]
    else:
        pts = cfg["points"]
    kind, m = cfg["kind"], float(cfg["mass"])

    def one(x):
        try:
            v = kg_position(kind, np.asarray(x, dtype=float), m)
            return complex(v.value), float(v.delta_coefficient), "ok"
        except LightConeError:
            return complex(np.nan, np.nan), np.nan, "light_cone"

    vals = _pmap(one, pts, threads)
    rows = [[i, kind, *x, v.real, v.imag, d, s] for i, (x, (v, d, s)) in enumerate(zip(pts, vals))]
    write_csv(out / "propagator.csv",
              ["index", "kind", "t [1/m]", "x [1/m]", "y [1/m]", "z [1/m]", "re [m^2]", "im [m^2]",
               "delta_coefficient [1]", "status"], rows)
    n_bad = sum(1 for r in rows if r[-1] != "ok")
    write_json(out / "propagator.json", {"kind": kind, "mass": m, "points": len(rows),
                                         "light_cone_points": n_bad})
    return True


def cmd_evolve(cfg, out: Path, tol, threads):
    from .modes import (BoundaryDecayError, CauchyData, causal_shadow_leakage, evolve_kg_cauchy,
                        gaussian_cauchy_data, kg_energy, read_cauchy, symplectic_form, write_cauchy)

    tol = tol or 1e-10
    m = float(cfg["mass"])
    if "input" in cfg:
        try:
            d0 = read_cauchy(cfg["input"])
        except (OSError, ValueError) as exc:
            raise ConfigError("input", str(exc)) from None
        partner = CauchyData(-d0.vartheta, d0.varsigma, d0.spacing, d0.origin)
    else:
        g = cfg.get("grid", {})
        kw = dict(n=g.get("n", 96), half_width=g.get("half_width", 30.0), sigma=g.get("sigma", 1.5),
                  center=tuple(g.get("center", (0.0, 0.0, 0.0))),
                  amplitude=tuple(g.get("amplitude", (1.0, 0.0))))
        d0 = gaussian_cauchy_data(**kw)
        kw["amplitude"] = (0.0, 1.0)
        partner = gaussian_cauchy_data(**kw)
    e0 = kg_energy(d0, m)
    w0 = symplectic_form(d0, partner)
    rows, worst = [], 0.0
    final = d0
    for t in cfg["times"]:
        try:
            dt = evolve_kg_cauchy(d0, float(t), m)
            pt = evolve_kg_cauchy(partner, float(t), m)
        except BoundaryDecayError as exc:
            raise NumericFailure(str(exc)) from None
        de = abs(kg_energy(dt, m) - e0) / max(abs(e0), 1e-300)
        dw = abs(symplectic_form(dt, pt) - w0) / max(abs(w0), 1.0)
        try:
            leak = causal_shadow_leakage(d0, dt, float(t))
        except ValueError:
            leak = np.nan
        worst = max(worst, de, dw)
        rows.append([float(t), kg_energy(dt, m), de, dw, leak])
        final = dt
    write_csv(out / "evolve.csv", ["t [1/m]", "energy [m]", "energy_drift [rel]",
                                   "symplectic_drift [rel]", "shadow_leakage [rel]"], rows)
    if cfg.get("write_final", False):
        write_cauchy(out / "evolve_final.qcd", final)
    ok = worst <= tol
    write_json(out / "evolve.json", {"mass": m, "max_drift": worst, "tolerance": tol, "pass": ok})
    return ok


def cmd_scatter(cfg, out: Path, tol, threads):
    from .core import GaussianSum, GaussianTerm, OnShellMomentum, ProfileError
    from .scattering import cross_section_table, vacuum_persistence_exponent

    m = float(cfg["mass"])
    try:
        j = GaussianSum(tuple(GaussianTerm(t["weight"], t["center"], t["width"]) for t in cfg["source"]))
        configs = [([OnShellMomentum(m, k) for k in c.get("out", [])],
                    [OnShellMomentum(m, k) for k in c.get("in", [])]) for c in cfg["configs"]]
    except (ProfileError, ValueError) as exc:
        raise ConfigError("source", str(exc)) from None
    delta = cfg.get("soft_cutoff")
    if delta is not None:
        for c in configs:
            if any(np.linalg.norm(p.spatial) <= delta for p in c[0] + c[1]):
                raise ConfigError("soft_cutoff", "soft cutoff must lie below every listed momentum")
    tab = cross_section_table(j, m, configs, soft_cutoff=delta)
    rows = []
    for i, c in enumerate(cfg["configs"]):
        soft = tab.sigma_soft if tab.sigma_soft is not None else np.nan
        hard = tab.sigma_hard[i] if tab.sigma_hard is not None else np.nan
        rows.append([i, len(c.get("out", [])), len(c.get("in", [])), tab.sigma[i], soft, hard])
    write_csv(out / "scatter.csv", ["index", "n_out", "n_in", "sigma [m^(-3 n_legs)]", "sigma_soft [1]",
                                    "sigma_hard [m^(-3 n_legs)]"], rows)
    summary = {"mass": m, "total_strength": tab.total_strength,
               "persistence_probability": math.exp(-tab.total_strength)}
    if tab.delta is not None:
        summary.update(soft_cutoff=tab.delta, soft_strength=tab.soft_strength)
    if cfg.get("exponent", False):
        w = vacuum_persistence_exponent(j, m, threads=threads)
        summary["exponent"] = [w.real, w.imag]
    if not all(np.isfinite(tab.sigma)):
        raise NumericFailure("non-finite cross-section")
    write_json(out / "scatter.json", summary)
    return True


def loop_sweep(species: str, grid, m: float = 1.0, e: float = 1.0, methods=ALL_METHODS,
               threads: int = 1):
    """Rows ``[k2, (re, im) per method]`` plus the max deviation from the closed form per method."""
    from .vacuum_energy import loop_function

    k2s = _grid_values(grid)

    def one(k2):
        vals = []
        for meth in methods:
            if meth == "euclidean_branch" and k2 <= 0:
                vals.append(complex(np.nan, np.nan))
            else:
                vals.append(loop_function(species, meth, k2, m, e))
        return vals

    table = _pmap(one, list(k2s), threads)
    dev = {}
    if "closed_form" in methods:
        ref = np.array([r[methods.index("closed_form")] for r in table])
        for meth in methods:
            if meth == "closed_form":
                continue
            v = np.array([r[methods.index(meth)] for r in table])
            ok = np.isfinite(v)
            dev[meth] = float(np.max(np.abs(v[ok] - ref[ok]))) if ok.any() else float("nan")
    rows = [[k2] + [x for c in r for x in (c.real, c.imag)] for k2, r in zip(k2s, table)]
    return rows, dev


def cmd_loop(cfg, out: Path, tol, threads):
    species = SPECIES_ALIASES.get(cfg["species"], cfg["species"])
    methods = tuple(cfg.get("methods", ALL_METHODS))
    m, e = float(cfg.get("mass", 1.0)), float(cfg.get("coupling", 1.0))
    rows, dev = loop_sweep(species, cfg["grid"], m, e, methods, threads)
    header = ["k2 [m^2]"] + [f"{meth}_{p} [1]" for meth in methods for p in ("re", "im")]
    write_csv(out / f"loop_{species}.csv", header, rows)
    checks = {meth: {"max_deviation": d, "tolerance": tol or LOOP_TOL[meth],
                     "pass": bool(not d > (tol or LOOP_TOL[meth]))} for meth, d in dev.items()}
    ok = all(c["pass"] for c in checks.values())
    write_json(out / f"loop_{species}.json", {"species": species, "mass": m, "coupling": e,
                                               "grid": list(cfg["grid"]), "methods": checks,
                                               "pass": ok})
    return ok


def cmd_oracle(cfg, out: Path, tol, threads):
    from .fock_oracle import SUITES, run_oracle_suite

    names = list(SUITES) if cfg["suite"] == "all" else [cfg["suite"]]
    results = _pmap(lambda s: run_oracle_suite(s, tol), names, threads)
    for r in results:
        write_json(out / f"oracle_{r['suite']}.json", r)
    return all(r["pass"] for r in results)


def _plot_loops(out: Path, inputs: Path):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigError("plot", "plotting needs the optional 'plot' extra (matplotlib)") from None
    made = []
    for path in sorted(inputs.glob("loop_*.csv")):
        data = np.genfromtxt(path, delimiter=",", names=True)
        cols = data.dtype.names
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(data[cols[0]], data[cols[1]], label="Re")
        ax.plot(data[cols[0]], data[cols[2]], label="Im")
        ax.set_xlabel("k^2 / m^2")
        ax.set_title(path.stem.replace("loop_", ""))
        ax.legend()
        fig.tight_layout()
        target = out / f"{path.stem}.png"
        fig.savefig(target, dpi=120, metadata={"Software": None})
        plt.close(fig)
        made.append(target.name)
    return made


def cmd_report(cfg, out: Path, tol, threads):
    from .fock_oracle import SUITES, run_oracle_suite

    inputs = Path(cfg.get("inputs", out))
    loops, oracles = {}, {}
    for sp in ALL_SPECIES:
        f = inputs / f"loop_{sp}.json"
        if f.exists():
            loops[sp] = json.loads(f.read_text())
        else:
            cmd_loop({"species": sp, "grid": [-50.0, 50.0, 30]}, out, tol, threads)
            loops[sp] = json.loads((out / f"loop_{sp}.json").read_text())
    for s in SUITES:
        f = inputs / f"oracle_{s}.json"
        oracles[s] = json.loads(f.read_text()) if f.exists() else run_oracle_suite(s, tol)
    rows = []
    for sp, rep in loops.items():
        for meth, c in sorted(rep["methods"].items()):
            rows.append(["loop", f"{sp}/{meth}", c["max_deviation"], c["tolerance"], str(c["pass"]).lower()])
    for s, rep in oracles.items():
        for c in rep["checks"]:
            rows.append(["oracle", f"{s}/{c['name']}", c["deviation"], c["tolerance"], str(c["pass"]).lower()])
    write_csv(out / "report.csv", ["kind", "name", "deviation [1]", "tolerance [1]", "pass"], rows)
    ok = all(r["pass"] for r in loops.values()) and all(r["pass"] for r in oracles.values())
    report = {"pass": ok,
              "loop_deviations": {sp: {m: c["max_deviation"] for m, c in r["methods"].items()}
                                  for sp, r in loops.items()},
              "oracle_margins": {s: r["max_margin"] for s, r in oracles.items()},
              "version": __version__}
    if cfg.get("plot", False):
        report["figures"] = _plot_loops(out, out if not any(inputs.glob("loop_*.csv")) else inputs)
    write_json(out / "report.json", report)
    return ok


COMMANDS = {"propagator": cmd_propagator, "evolve": cmd_evolve, "scatter": cmd_scatter,
            "loop": cmd_loop, "oracle": cmd_oracle, "report": cmd_report}


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid rows")
    p = argparse.ArgumentParser(prog="qext", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("propagator", parents=[common], help="Klein-Gordon propagator table")
    sp.add_argument("--kind")
    sp.add_argument("--mass", type=float)
    sp = sub.add_parser("evolve", parents=[common], help="Cauchy evolution diagnostics")
    sp.add_argument("--mass", type=float)
    sp.add_argument("--input", help="binary Cauchy grid file")
    sp = sub.add_parser("scatter", parents=[common], help="cross-section table")
    sp.add_argument("--mass", type=float)
    sp = sub.add_parser("loop", parents=[common], help="loop-function sweep over methods")
    sp.add_argument("--species")
    sp.add_argument("--grid", help="start:stop:count in k^2")
    sp.add_argument("--mass", type=float)
    sp.add_argument("--coupling", type=float)
    sp = sub.add_parser("oracle", parents=[common], help="Fock-space verification suites")
    sp.add_argument("--suite")
    sp = sub.add_parser("report", parents=[common], help="aggregate loop deviations and oracle margins")
    sp.add_argument("--inputs", help="directory with earlier loop/oracle outputs")
    sp.add_argument("--plot", action="store_true", default=None, help="render PNG figures (needs matplotlib)")
    return p


def _diagnose(kind, field, message, code):
    print(json.dumps({"status": kind, "field": field, "message": str(message)}, sort_keys=True),
          file=sys.stderr)
    return code


def _glue_negative_values(argv):
    # let "--grid -50:50:30" through argparse, which would read it as a flag
    out, it = [], iter(argv)
    for a in it:
        if a == "--grid":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--grid={nxt}")
        else:
            out.append(a)
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            return _diagnose("config_error", "--config", exc, EXIT_CONFIG)
        if not isinstance(cfg, dict):
            return _diagnose("config_error", "--config", "top level must be an object", EXIT_CONFIG)
    skip = {"command", "config", "out", "tol", "threads"}
    for k, v in vars(args).items():
        if k not in skip and v is not None:
            cfg[k] = v
    if args.threads < 1:
        return _diagnose("config_error", "threads", "must be at least 1", EXIT_CONFIG)
    if args.tol is not None and not args.tol > 0:
        return _diagnose("config_error", "tol", "must be positive", EXIT_CONFIG)
    try:
        if "grid" in cfg and args.command == "loop":
            cfg["grid"] = parse_grid(cfg["grid"])
        validate_config(args.command, cfg)
        ok = COMMANDS[args.command](cfg, Path(args.out), args.tol, args.threads)
    except ConfigError as exc:
        return _diagnose("config_error", exc.field, exc, EXIT_CONFIG)
    except NumericFailure as exc:
        return _diagnose("numeric_failure", None, exc, EXIT_NUMERIC)
    except (ArithmeticError, RuntimeError) as exc:
        return _diagnose("numeric_failure", None, exc, EXIT_NUMERIC)
    except ValueError as exc:
        # library precondition violated by the configuration
        return _diagnose("config_error", "<unknown>", exc, EXIT_CONFIG)
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
