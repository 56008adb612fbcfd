"""Command-line entry point: config ingestion, subcommands, parallel sweeps.

Subcommands: decoherence | overlap | plateau | bounds | pfcast | sweep.
Outputs are deterministic functions of (config, seed): CSV numbers carry 17
significant digits, files are written atomically, and sweep results do not
depend on worker count or execution order. Exit codes: 0 success,
1 validation, 2 capacity, 3 bound violation.
"""

from __future__ import annotations

import argparse
import copy
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import asymptotics, bounds, config, oracle, output, pfcast, qmath, scatter
from .errors import CapacityError, ConfigError

log = logging.getLogger("sbslab")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CAPACITY = 2
EXIT_BOUND_VIOLATION = 3

SLACK_TOLERANCE = -1e-9

DECOHERENCE_HEADER = ("t", "gamma_finiteL", "gamma_thermo", "tau_D")
PLATEAU_HEADER = ("f", "I_bits", "H_S", "tail_norm", "B_macro", "broadcast_distance", "phase")
OVERLAP_HEADER = ("t", "B_macro_finiteL", "B_macro_thermo", "micro_overlap")
BOUNDS_HEADER = ("seed", "slack")


def run_decoherence(cfg: dict, out_dir: Path) -> int:
    geom = config.build_geometry(cfg)
    dist = config.build_distribution(cfg, geom)
    fractions = cfg.get("fractions", {})
    f = float(fractions.get("f", 0.0))
    tau_d = asymptotics.decoherence_time(dist, geom)
    rows = []
    for t in config.time_values(cfg):
        n_t = geom.photons_scattered(t)
        gamma_fin = asymptotics.decoherence_factor(dist, geom, f, n_t)
        gamma_thermo = (
            1.0 if math.isinf(tau_d) else math.exp(-(1.0 - f) * t / tau_d)
        )
        rows.append((t, gamma_fin, gamma_thermo, tau_d))
    output.write_csv(out_dir / "decoherence.csv", DECOHERENCE_HEADER, rows)
    log.info("decoherence: %d rows", len(rows))
    return EXIT_OK


def run_overlap(cfg: dict, out_dir: Path) -> int:
    geom = config.build_geometry(cfg)
    dist = config.build_distribution(cfg, geom)
    overlap_cfg = cfg.get("overlap", {})
    unitary = scatter.build_relative_unitary(
        dist.grid, geom, seed=overlap_cfg.get("unitary_seed", cfg["seed"])
    )
    report = asymptotics.eta_bars(unitary, dist)
    alpha_override = overlap_cfg.get("alpha_override")
    if alpha_override is not None:
        report = report.with_alpha(float(alpha_override))
    payload = {
        "eta_bar": report.eta_bar,
        "eta_prime": report.eta_prime,
        "alpha": report.alpha,
        "alpha_exact": report.alpha_exact,
        "tau_D": report.tau_d,
        "micro_overlap": report.micro_overlap_value,
        "micro_overlap_exact": report.micro_overlap_exact,
        "consistency_rel_dev": report.consistency_rel_dev,
        "degenerate": report.degenerate,
        "flags": list(report.flags),
        "timescales": {
            "decoherence": asymptotics.timescales(report)[0],
            "broadcast": asymptotics.timescales(report)[1],
        },
    }
    output.write_json(out_dir / "overlap.json", payload)
    m = float(cfg.get("fractions", {}).get("m", 1.0))
    rows = []
    if report.alpha is not None:
        for t in config.time_values(cfg):
            rows.append(
                (
                    t,
                    asymptotics.macro_overlap(t, m, report, thermodynamic=False),
                    asymptotics.macro_overlap(t, m, report, thermodynamic=True),
                    report.micro_overlap_value,
                )
            )
    output.write_csv(out_dir / "overlap.csv", OVERLAP_HEADER, rows)
    log.info("overlap: alpha=%s, %d rows", report.alpha, len(rows))
    return EXIT_OK


def run_plateau(cfg: dict, out_dir: Path) -> int:
    rho_s, rho_e, u1, u2, n_t, m, f_grid, cap = config.build_instance(cfg, cfg["seed"])
    thresholds = cfg.get("thresholds", {})
    eps_product = thresholds.get("phase_product", oracle.PHASE_PRODUCT_THRESHOLD)
    eps_plateau = thresholds.get("phase_plateau", oracle.PHASE_PLATEAU_THRESHOLD)
    curve = oracle.mutual_info_curve(rho_s, rho_e, u1, u2, n_t, f_grid, m, cap)
    rows = []
    for f, i_bits in zip(curve.f_values, curve.i_values):
        state = oracle.evolve_out_state(rho_s, rho_e, u1, u2, n_t, f, m, cap)
        tail = oracle.coherent_tail_norm(state)
        b_macro = oracle.macro_overlap_exact(state)
        distance = oracle.broadcast_distance(state)
        phase = oracle.classify_phase(i_bits, curve.h_s, eps_product, eps_plateau)
        rows.append((f, i_bits, curve.h_s, tail, b_macro, distance, phase))
    output.write_csv(out_dir / "plateau.csv", PLATEAU_HEADER, rows)
    output.write_json(
        out_dir / "plateau.json",
        {
            "f": list(curve.f_values),
            "I_bits": list(curve.i_values),
            "H_S": curve.h_s,
            "N_t": curve.n_t,
        },
    )
    log.info("plateau: %d fractions, H_S=%.6g bits", len(rows), curve.h_s)
    return EXIT_OK


def run_bounds(cfg: dict, out_dir: Path) -> int:
    block = config.require_block(cfg, "bounds")
    trials = block["trials"]
    d = block.get("photon_dim", 2)
    counts = tuple(block.get("environment_counts", (4, 8)))
    fracs = tuple(block.get("observed_fractions", (0.25, 0.5, 0.75)))
    include_saturation = block.get("include_saturation", True)
    seeds = np.random.SeedSequence(cfg["seed"]).spawn(trials)
    rows = []
    reports = []
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        if i == 0 and include_saturation:
            inst = bounds.saturation_instance(d=d, rng=rng)
        else:
            inst = bounds.random_instance(rng, d=d, count_choices=counts,
                                          fraction_choices=fracs)
        report = bounds.information_gap_bound(inst)
        reports.append(report)
        rows.append((i, report.slack))
    output.write_csv(out_dir / "bounds.csv", BOUNDS_HEADER, rows)
    violations = [i for i, r in enumerate(reports) if r.slack < SLACK_TOLERANCE]
    payload = {
        "trials": trials,
        "min_slack": min((r.slack for r in reports), default=None),
        "violations": violations,
        "out_of_regime": [i for i, r in enumerate(reports) if r.out_of_regime],
    }
    output.write_json(out_dir / "bounds.json", payload)
    if violations:
        log.error("bound violated on trials %s", violations)
        return EXIT_BOUND_VIOLATION
    log.info("bounds: %d trials, min slack %s", trials, payload["min_slack"])
    return EXIT_OK


def default_broadcast_channel():
    """Orthogonalizing oracle instance used as the end-to-end channel.

    Quarter-turn branch rotations of a pure environment make the two
    single-photon records exactly orthogonal, so the channel is an exact
    measure-and-broadcast map.
    """
    n_t, f, m = 8, 0.5, 0.125
    u1 = config.rotation_y(-math.pi / 2)
    u2 = config.rotation_y(math.pi / 2)
    rho_e = np.zeros((2, 2), dtype=complex)
    rho_e[0, 0] = 1.0

    def channel(rho_s):
        state = oracle.evolve_out_state(rho_s, rho_e, u1, u2, n_t, f, m)
        return oracle.cc_channel_apply(rho_s, state)

    return channel


def run_pfcast(cfg: dict, out_dir: Path) -> int:
    block = cfg.get("pfcast", {})
    dim = block.get("dim", 2)
    n_bases = block.get("bases", 20)
    rng = np.random.default_rng(cfg["seed"])
    channel = default_broadcast_channel() if dim == 2 else pfcast.pinch_channel(dim)
    entries = []
    worst = 0.0
    for _ in range(n_bases):
        phi = qmath.random_unitary(dim, rng)
        p = pfcast.unistochastic_from_bases(phi)
        stat = pfcast.stationary_distribution(p)
        report = pfcast.verify_pf_broadcast(phi, stat.values, channel)
        worst = max(worst, report.max_deviation)
        entries.append(
            {
                "P": p.entries,
                "stationary": stat.values,
                "unique": stat.unique,
                "pointer_probs": report.pointer_probs,
                "max_deviation": report.max_deviation,
            }
        )
    output.write_json(out_dir / "pfcast.json", {"bases": entries, "max_deviation": worst})
    log.info("pfcast: %d bases, worst deviation %.3e", n_bases, worst)
    return EXIT_OK


def _set_path(cfg: dict, dotted: str, value) -> None:
    node = cfg
    parts = dotted.split(".")
    for key in parts[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[parts[-1]] = value


def run_sweep(cfg: dict, out_dir: Path, workers: int) -> int:
    block = config.require_block(cfg, "sweep")
    command = block["command"]
    grid = block["grid"]
    runner = RUNNERS[command]
    keys = sorted(grid)
    cells = [()]
    for key in keys:
        cells = [prev + (v,) for prev in cells for v in grid[key]]

    def run_cell(idx_values):
        idx, values = idx_values
        cell_cfg = copy.deepcopy(cfg)
        cell_cfg.pop("sweep", None)
        for key, value in zip(keys, values):
            _set_path(cell_cfg, key, value)
        cell_dir = out_dir / f"cell_{idx:04d}"
        try:
            config.validate_config(cell_cfg)
            code = runner(cell_cfg, cell_dir)
            status = "ok" if code == EXIT_OK else f"exit_{code}"
        except Exception as exc:  # noqa: BLE001 - sweep must not abort on one cell
            return {
                "cell": idx,
                "overrides": dict(zip(keys, values)),
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
            }
        return {
            "cell": idx,
            "overrides": dict(zip(keys, values)),
            "status": status,
            "files": sorted(p.name for p in cell_dir.iterdir()),
        }

    jobs = list(enumerate(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, jobs))
    else:
        results = [run_cell(j) for j in jobs]
    results.sort(key=lambda r: r["cell"])
    output.write_json(out_dir / "manifest.json", {"command": command, "cells": results})
    failed = [r["cell"] for r in results if r["status"] != "ok"]
    if failed:
        log.warning("sweep finished with failed cells: %s", failed)
    else:
        log.info("sweep: %d cells ok", len(results))
    return EXIT_OK


RUNNERS = {
    "decoherence": run_decoherence,
    "overlap": run_overlap,
    "plateau": run_plateau,
    "bounds": run_bounds,
    "pfcast": run_pfcast,
}

LOG_LEVELS = {"error": "ERROR", "warn": "WARNING", "info": "INFO", "debug": "DEBUG"}


def _setup_logging() -> None:
    name = os.environ.get("SBS_LOG_LEVEL", "warn").lower()
    if name not in LOG_LEVELS:
        raise ConfigError(
            f"SBS_LOG_LEVEL must be one of {sorted(LOG_LEVELS)}, got {name!r}"
        )
    logging.basicConfig(level=LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbslab",
        description="Decoherence, record-overlap, plateau, bound, and broadcast runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*RUNNERS, "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="sweep worker count")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _setup_logging()
        cfg = config.load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        out_dir = Path(args.out or cfg.get("output_dir", "out"))
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            return run_sweep(cfg, out_dir, max(args.workers, 1))
        return RUNNERS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
