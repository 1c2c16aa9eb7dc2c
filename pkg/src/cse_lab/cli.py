"""Config-driven batch runner.

Each subcommand runs one reproducible job and writes a JSON report
(plus a CSV for scan data).  Outputs are written atomically: a failed
run leaves no partial files.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure.

Config files use ``key = value`` lines (``#`` comments); command-line
flags override file values.  The ``--f`` flag is the intensity overlap
of the two interfering modes (amplitudes carry its square root).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, fock, presets
from .decompose import Representation, phase_averaged_probes, solve_representation
from .errors import CseLabError
from .experiments import (
    DetectorModel,
    appendix,
    bell_experiment,
    g2_scan,
    hom_experiment,
    witness_experiment,
)
from .noon import compose_with_fock_representations, noon_decomposition

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL = 3

SCHEMA_VERSION = "cse-lab/1"

_DEFAULTS = {
    "eta": 0.8,
    "eps": 0.001,
    "f": 0.95,
    "n": 100_000,
    "seed": 1,
    "cutoff": None,   # resolved via fock.default_cutoff()
    "threads": 1,
}


class ConfigError(ValueError):
    pass


def load_config(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key.replace("-", "_")] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return values


def _resolve(args, key, cast, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    cfg = getattr(args, "_config_values", {})
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc
    return default


def _parse_grid(text: str):
    try:
        grid = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad probe grid {text!r}: {exc}") from exc
    if not grid:
        raise ConfigError("probe grid must not be empty")
    if any(a < 0 for a in grid):
        raise ConfigError("probe amplitudes must be nonnegative")
    return grid


def _atomic_write_all(files):
    """files: list of (path, text).  Commit all or nothing."""
    staged = []
    try:
        for path, text in files:
            directory = os.path.dirname(os.path.abspath(path)) or "."
            os.makedirs(directory, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            try:
                os.remove(tmp)
            except OSError:
                pass
        raise


def _report_text(command: str, config: dict, results: dict) -> str:
    doc = {
        "schema": SCHEMA_VERSION,
        "library_version": __version__,
        "command": command,
        "config": config,
        "results": results,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _common(args):
    cfg = {
        "eta": _resolve(args, "eta", float, _DEFAULTS["eta"]),
        "eps": _resolve(args, "eps", float, _DEFAULTS["eps"]),
        "f": _resolve(args, "f", float, _DEFAULTS["f"]),
        "n": _resolve(args, "n", int, _DEFAULTS["n"]),
        "seed": _resolve(args, "seed", int, _DEFAULTS["seed"]),
        "cutoff": _resolve(args, "cutoff", int, fock.default_cutoff()),
        "threads": _resolve(args, "threads", int, _DEFAULTS["threads"]),
    }
    if not 0.0 < cfg["eta"] <= 1.0:
        raise ConfigError(f"eta must be in (0, 1], got {cfg['eta']}")
    if not 0.0 <= cfg["eps"] < 1.0:
        raise ConfigError(f"eps must be in [0, 1), got {cfg['eps']}")
    if not 0.0 <= cfg["f"] <= 1.0:
        raise ConfigError(f"f must be in [0, 1], got {cfg['f']}")
    if cfg["n"] < 1:
        raise ConfigError("n must be >= 1")
    if cfg["cutoff"] < 2:
        raise ConfigError("cutoff must be >= 2")
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def _single_photon_rep(cfg) -> Representation:
    return presets.fock_representation(1, cfg["cutoff"])


# ---------------------------------------------------------------------------
# subcommand runners: each returns (config, results, extra_files)


def run_decompose(args):
    cfg = _common(args)
    target_n = _resolve(args, "target_photons", int, 1)
    if target_n < 0 or target_n >= cfg["cutoff"]:
        raise ConfigError(f"target photon number {target_n} outside cutoff")
    grid_text = getattr(args, "grid", None)
    if grid_text is None:
        grid_text = getattr(args, "_config_values", {}).get("grid")
    if grid_text is not None:
        grid = _parse_grid(grid_text)
    elif target_n <= 2:
        grid = None
    else:
        raise ConfigError(f"no default grid for n = {target_n}; pass --grid")
    zeta_cap = _resolve(args, "zeta_cap", float, None)
    cfg.update({"target_photons": target_n,
                "grid": grid if grid is None else list(grid),
                "zeta_cap": zeta_cap})
    rep = presets.fock_representation(target_n, cfg["cutoff"],
                                      amplitudes=grid, zeta_cap=zeta_cap)
    results = {"representation": rep.to_dict()}
    return cfg, results, []


def run_noon(args):
    cfg = _common(args)
    n_photons = _resolve(args, "N", int, 2)
    if n_photons < 1:
        raise ConfigError("N must be >= 1")
    cfg["N"] = n_photons
    dec = noon_decomposition(n_photons)
    results = {"decomposition": dec.to_dict()}
    needed = dec.fock_numbers_needed
    if max(needed) <= 2:
        reps = presets.noon_fock_representations(needed, cfg["cutoff"])
        comp = compose_with_fock_representations(dec, reps)
        results["composition"] = comp.to_dict()
        results["fock_representations"] = {
            str(k): v.to_dict() for k, v in reps.items()}
    else:
        results["composition"] = None
        results["composition_note"] = (
            f"needs Fock representations up to n = {max(needed)}; "
            "supply them via the library API")
    return cfg, results, []


def _witness_common(args, det):
    cfg = _common(args)
    rep = _single_photon_rep(cfg)
    report = witness_experiment(rep, cfg["n"], cfg["seed"], det=det,
                                threads=cfg["threads"])
    results = {
        "W0": report.classical_limit,
        "alpha0": report.maximizing_amplitude,
        "target": report.target_value,
        "mean": report.emulated_mean,
        "std_error": report.emulated_std_error,
        "excess_variance": report.excess_variance,
        "required_N": report.required_n,
        "representation_fidelity": rep.fidelity_achieved,
        "zeta": rep.zeta,
    }
    return cfg, results, []


def run_witness(args):
    return _witness_common(args, det=None)


def run_witness4(args):
    cfg = _common(args)
    det = DetectorModel(eta=cfg["eta"], epsilon=cfg["eps"])
    return _witness_common(args, det=det)


def run_hom(args):
    cfg = _common(args)
    det = DetectorModel(eta=cfg["eta"], epsilon=0.0)   # no dark counts here
    rep = _single_photon_rep(cfg)
    f_amp = float(np.sqrt(cfg["f"]))
    report = hom_experiment(rep, det, f_amp, cfg["n"], cfg["seed"],
                            threads=cfg["threads"])
    return cfg, {"hom": report.to_dict()}, []


def run_g2(args):
    cfg = _common(args)
    points = _resolve(args, "points", int, 12)
    if points < 1:
        raise ConfigError("points must be >= 1")
    protocol = _resolve(args, "protocol", str, "analytic")
    cfg.update({"points": points, "protocol": protocol})
    det = DetectorModel(eta=cfg["eta"], epsilon=cfg["eps"])
    rep = _single_photon_rep(cfg)
    thetas = np.linspace(0.0, np.pi, points)
    scan = g2_scan(rep, thetas, det, cfg["f"], cfg["n"], cfg["seed"],
                   threads=cfg["threads"], protocol=protocol)
    rows = [(p.theta, p.g2_true, p.g2_emulated, p.sigma) for p in scan]
    results = {"scan": [p.to_dict() for p in scan]}
    csv_text = _csv_text(["theta", "g2_true", "g2_emulated", "sigma"], rows)
    return cfg, results, [("csv", csv_text)]


def run_bell(args):
    cfg = _common(args)
    det = DetectorModel(eta=cfg["eta"], epsilon=0.0)
    rep = _single_photon_rep(cfg)
    report = bell_experiment(rep, det, cfg["n"], cfg["seed"],
                             threads=cfg["threads"])
    return cfg, {"bell": report.to_dict()}, []


def run_appendix_checks(args):
    cfg = _common(args)
    rep = _single_photon_rep(cfg)
    from .experiments.witness import ideal_witness
    from .sampler import MeasurementModel

    worst, _ = appendix.systematic_bound_suite(
        n_trials=200, dim=6, seed=cfg["seed"])
    model = MeasurementModel.from_diagonal_observable(
        ideal_witness(cfg["cutoff"]), rep.probe_set)
    slope, _ = appendix.convergence_slope(
        rep, model, (1_000, 10_000, 100_000), replicas=24, seed=cfg["seed"],
        threads=cfg["threads"])
    emp, general, _ = appendix.multinomial_mse_suite(
        rep, 1_000, replicas=200, seed=cfg["seed"])
    from .decompose import coherent_probes
    probes = coherent_probes([0.2, 0.6 + 0.1j, 1.1], cfg["cutoff"])
    target = fock.fock_state(1, cfg["cutoff"])
    rep_c = solve_representation(target, probes)
    _, _, dev = appendix.residual_fd_check(rep_c)
    report = appendix.AppendixReport(
        bound_max_violation=worst,
        convergence_slope=slope,
        mse_empirical=emp,
        mse_formula=general,
        mse_pure_extra_term=rep_c.zeta ** 2 - 1.0,
        residual_max_deviation=dev,
    )
    return cfg, {"appendix": report.to_dict()}, []


_RUNNERS = {
    "decompose": run_decompose,
    "noon": run_noon,
    "witness": run_witness,
    "witness4": run_witness4,
    "hom": run_hom,
    "g2": run_g2,
    "bell": run_bell,
    "appendix-checks": run_appendix_checks,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cse-lab",
        description="Signed coherent-state emulation of quantum measurements.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--eta", type=float, help="detector efficiency in (0, 1]")
        p.add_argument("--eps", type=float, help="dark-count probability in [0, 1)")
        p.add_argument("--f", type=float, help="mode intensity overlap in [0, 1]")
        p.add_argument("--n", type=int, help="number of Monte Carlo trials")
        p.add_argument("--seed", type=int, help="64-bit RNG seed")
        p.add_argument("--cutoff", type=int,
                       help="per-mode Fock cutoff (default 30 or "
                            "CSE_LAB_DEFAULT_CUTOFF)")
        p.add_argument("--threads", type=int,
                       help="worker threads (does not change results)")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--out", help="output JSON path")

    p = sub.add_parser("decompose", help="solve a Fock-state representation")
    add_common(p)
    p.add_argument("--target-photons", type=int, dest="target_photons")
    p.add_argument("--grid", help="comma-separated probe amplitudes")
    p.add_argument("--zeta-cap", type=float, dest="zeta_cap",
                   help="bound on the coefficient one-norm")

    p = sub.add_parser("noon", help="entangled-state decomposition + composition")
    add_common(p)
    p.add_argument("--N", type=int, help="photon number of the entangled state")

    for name, helptext in (("witness", "photon-number witness emulation"),
                           ("witness4", "four-detector witness emulation"),
                           ("hom", "two-photon interference dip"),
                           ("bell", "displaced-detection correlation test")):
        p = sub.add_parser(name, help=helptext)
        add_common(p)

    p = sub.add_parser("g2", help="phase-scan coincidence-rate emulation")
    add_common(p)
    p.add_argument("--points", type=int, help="number of theta points")
    p.add_argument("--protocol", choices=("analytic", "click"))

    p = sub.add_parser("appendix-checks", help="statistical self-check suite")
    add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config_values = load_config(args.config) if args.config else {}
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "exit_code": EXIT_INVALID_CONFIG}),
              file=sys.stderr)
        return EXIT_INVALID_CONFIG

    out_path = args.out or getattr(args, "_config_values", {}).get(
        "out", f"cse_lab_{args.command.replace('-', '_')}.json")
    runner = _RUNNERS[args.command]
    try:
        cfg, results, extras = runner(args)
    except (ConfigError, ValueError) as exc:
        print(json.dumps({"error": str(exc), "exit_code": EXIT_INVALID_CONFIG}),
              file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except (CseLabError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(json.dumps({"error": str(exc), "exit_code": EXIT_NUMERICAL}),
              file=sys.stderr)
        return EXIT_NUMERICAL

    files = [(out_path, _report_text(args.command, cfg, results))]
    for kind, text in extras:
        if kind == "csv":
            files.append((os.path.splitext(out_path)[0] + ".csv", text))
    _atomic_write_all(files)
    print(json.dumps({"written": [path for path, _ in files]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
