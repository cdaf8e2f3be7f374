"""Pipeline stages: build, simulate, analyze, sweep.

Every stage writes its artifacts into the configured output directory and
records them (with checksums) in ``manifest.json``.  Exit codes are the
machine-readable pass/fail channel; the CSV files carry the quantities.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .composer import (
    AnalyticField,
    FlowSpec,
    FlowSpecError,
    ImportedFlow,
    grid_rotation_residual,
    check_locally_radial,
    phi_jet,
    residual_rotating,
)
from .config import ConfigError, PipelineConfig, apply_overrides, config_from_dict
from .gridio import write_grid
from .rigidity import (
    AnalysisError,
    boundary_gradient_check,
    estimate_symmetry_set,
    functional_relation_test,
    imported_local_structure,
    regions_from_spec,
)
from .spectral import SolverError, SpectralGrid, run as run_solver

logger = logging.getLogger("rotflow")

RESIDUAL_GATE = 1e-8


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, out_dir: Path, cfg: PipelineConfig):
        self.path = out_dir / "manifest.json"
        if self.path.exists():
            with open(self.path) as fh:
                self.data = json.load(fh)
        else:
            self.data = {"stages": {}}
        self.data["toolkit_version"] = __version__
        self.data["config_hash"] = cfg.config_hash()
        self.data["config"] = cfg.data

    def record(self, stage: str, status: str, seconds: float, files, extra=None):
        entry = {
            "status": status,
            "seconds": seconds,
            "files": {f.name: _sha256(f) for f in files},
        }
        if extra:
            entry.update(extra)
        self.data["stages"][stage] = entry
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)


def _grid_axes(grid: SpectralGrid):
    return float(grid.x[0]), float(grid.x[0]), grid.spacing, grid.spacing


# ----------------------------------------------------------------------------
# build
# ----------------------------------------------------------------------------

def run_build(cfg: PipelineConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, cfg)
    t0 = time.perf_counter()
    files = []
    try:
        flow = cfg.flow()
        grid = cfg.spectral_grid()
        if isinstance(flow, FlowSpec):
            grid.require_fits(flow)
            jet = phi_jet(flow, grid.X, grid.Y, order=2)
            phi = jet.value
            om = flow.angular_velocity
            vx = -jet.gy - om * grid.Y
            vy = jet.gx + om * grid.X
            w = jet.laplacian + 2.0 * om
            residual = residual_rotating(flow, grid.X, grid.Y)
            spec_doc = flow.as_config()
        else:
            pts = grid.points()
            sample = flow.sample(pts)
            phi, w = sample.phi, sample.vorticity
            vx, vy = sample.velocity[..., 0], sample.velocity[..., 1]
            residual = grid_rotation_residual(phi, grid.spacing)
            spec_doc = {
                "angular_velocity": flow.angular_velocity,
                "gluing_radius": flow.gluing_radius,
                "imported_grid": cfg.data["flow"]["imported_grid"],
            }

        x0, y0, dx, dy = _grid_axes(grid)
        for name, values in (("phi", phi), ("velocity_x", vx),
                             ("velocity_y", vy), ("vorticity", w)):
            path = out / f"{name}.f64"
            write_grid(path, values, x0, y0, dx, dy, name)
            files.append(path)

        summary = residual.summary()
        summary["provenance"] = flow.provenance if not isinstance(flow, FlowSpec) else "analytic"
        res_path = out / "residual_summary.json"
        with open(res_path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        files.append(res_path)

        spec_path = out / "flow_spec.yaml"
        with open(spec_path, "w") as fh:
            yaml.safe_dump(spec_doc, fh, sort_keys=True)
        files.append(spec_path)

        ok = residual.normalized_max <= RESIDUAL_GATE
        manifest.record("build", "pass" if ok else "fail",
                        time.perf_counter() - t0, files,
                        {"normalized_residual_max": residual.normalized_max})
        if not ok:
            logger.error("build: normalized residual %.3e exceeds the %.0e gate",
                         residual.normalized_max, RESIDUAL_GATE)
            return 1
        logger.info("build: normalized residual %.3e (gate %.0e)",
                    residual.normalized_max, RESIDUAL_GATE)
        return 0
    except (FlowSpecError, ConfigError, ValueError) as exc:
        manifest.record("build", "error", time.perf_counter() - t0, files,
                        {"message": str(exc)})
        logger.error("build: invalid specification: %s", exc)
        return 2


# ----------------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------------

def run_simulate(cfg: PipelineConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, cfg)
    t0 = time.perf_counter()
    files = []
    try:
        flow = cfg.flow()
        if not isinstance(flow, FlowSpec):
            raise ConfigError("simulate requires an analytic flow specification")
        grid = cfg.spectral_grid()
        horizon = cfg.horizon()
        solver_cfg = cfg.solver()
        snap_every = int(cfg.data["solver"]["snapshot_every"])
        diag_every = int(cfg.data["solver"]["diagnostics_every"])
        x0, y0, dx, dy = _grid_axes(grid)

        def snapshot(state, step_index):
            path = out / f"snapshot_{step_index:06d}.f64"
            write_grid(path, state.omega, x0, y0, dx, dy, "vorticity")
            files.append(path)

        result = run_solver(flow, grid, solver_cfg, horizon,
                            diag_every=diag_every,
                            snapshot_callback=snapshot if snap_every > 0 else None,
                            snapshot_every=snap_every)

        n_bumps = len(flow.bumps)
        header = ["t", "energy", "enstrophy", "min_w", "max_w", "e_rot"]
        header += [f"angle_{k}" for k in range(n_bumps)]
        rows = [[r.time, r.energy, r.enstrophy, r.min_w, r.max_w,
                 r.rotation_error, *r.angles] for r in result.rows]
        diag_path = out / "diagnostics.csv"
        write_csv(diag_path, header, rows)
        files.append(diag_path)

        bound = float(cfg.data["solver"]["rotation_error_bound"])
        e_final = result.final_rotation_error
        ok = e_final <= bound
        manifest.record("simulate", "pass" if ok else "fail",
                        time.perf_counter() - t0, files,
                        {"rotation_error_final": e_final,
                         "rotation_error_bound": bound,
                         "dt": result.dt, "n_steps": result.n_steps})
        if not ok:
            logger.error("simulate: tolerance not met: e(T) = %.3e > %.3e",
                         e_final, bound)
            return 1
        logger.info("simulate: e(T) = %.3e within bound %.3e (%d steps)",
                    e_final, bound, result.n_steps)
        return 0
    except SolverError as exc:
        manifest.record("simulate", "error", time.perf_counter() - t0, files,
                        {"message": str(exc)})
        logger.error("simulate: %s", exc)
        return 3
    except (ConfigError, ValueError) as exc:
        manifest.record("simulate", "error", time.perf_counter() - t0, files,
                        {"message": str(exc)})
        logger.error("simulate: %s", exc)
        return 2


# ----------------------------------------------------------------------------
# analyze
# ----------------------------------------------------------------------------

def run_analyze(cfg: PipelineConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, cfg)
    t0 = time.perf_counter()
    files = []
    a = cfg.data["analysis"]
    try:
        flow = cfg.flow()
        analytic = isinstance(flow, FlowSpec)
        fieldv = AnalyticField(flow) if analytic else flow
        r_max = cfg.analysis_r_max()
        dr = float(a["dr"])
        n_angles = int(a["n_angles"])
        tau = float(a["circle_tolerance"])

        est = estimate_symmetry_set(fieldv, r_max, dr, n_angles, tau)
        sym_path = out / "symmetry_set.csv"
        write_csv(sym_path, ["radius", "sigma", "member"],
                  [[r, s, bool(m)] for r, s, m in zip(est.radii, est.sigma, est.member)])
        files.append(sym_path)

        rows = boundary_gradient_check(fieldv, est,
                                       tolerance=float(a["boundary_tolerance"]))
        bg_path = out / "boundary_gradient.csv"
        write_csv(bg_path, ["radius", "non_isolated", "max_gradient", "ratio", "flagged"],
                  [[r.radius, r.non_isolated, r.max_gradient, r.ratio, r.flagged]
                   for r in rows])
        files.append(bg_path)

        summary_lines = []
        if analytic:
            structure = check_locally_radial(flow)
            summary_lines.append(f"structure: {structure.verdict}")
            summary_lines.append(f"annuli verified: {structure.all_verified}")
            for ann in structure.annuli:
                summary_lines.append(
                    f"  annulus center=({ann.center[0]:g},{ann.center[1]:g}) "
                    f"r=({ann.r_inner:g},{ann.r_outer:g}) sigma_max={ann.sigma_max:.3e}"
                )
            verdict = structure.verdict
        else:
            structure = imported_local_structure(
                fieldv, r_max, dr, n_angles, tau,
                gradient_fraction=float(a["gradient_fraction"]))
            summary_lines.append(f"structure: {structure.verdict}")
            summary_lines.append(
                f"uncovered gradient fraction: {structure.uncovered_fraction:.3e}")
            verdict = structure.verdict

        summary_lines.append(f"symmetry set intervals: {est.intervals}")
        summary_lines.append(f"boundary radii: {est.boundary}")
        flags = [r for r in rows if r.flagged]
        summary_lines.append(
            f"boundary gradient: {'all clear' if not flags else f'{len(flags)} flagged'}")

        relation_reports = []
        if analytic and flow.bumps:
            regions = regions_from_spec(flow)
            bins = int(a["bins"])
            tau_f = float(a["relation_tolerance"])
            gfrac = float(a["gradient_fraction"])
            for region in regions[:len(flow.bumps)]:
                rep = functional_relation_test(
                    fieldv, [region], n_bins=bins, n_angles=n_angles,
                    gradient_fraction=gfrac, tau=tau_f)
                relation_reports.append((f"annulus at {region.center}", rep))
            glob = functional_relation_test(
                fieldv, regions, n_bins=bins, n_angles=n_angles,
                gradient_fraction=gfrac, tau=tau_f, r_cap=r_max)
            relation_reports.append(("global", glob))
            scatter_path = out / "relation_scatter.csv"
            write_csv(scatter_path, ["phi", "lap_phi"],
                      glob.scatter[:: max(1, glob.scatter.shape[0] // 100000)].tolist())
            files.append(scatter_path)
        for label, rep in relation_reports:
            summary_lines.append(
                f"functional relation [{label}]: {rep.verdict} "
                f"(W = {rep.width:.3e}, range = {rep.value_range:.3e}, "
                f"W/range = {rep.normalized_width:.3e})")

        sum_path = out / "analysis_summary.txt"
        with open(sum_path, "w") as fh:
            fh.write("\n".join(summary_lines) + "\n")
        files.append(sum_path)
        for line in summary_lines:
            logger.info("analyze: %s", line)

        manifest.record("analyze", "pass", time.perf_counter() - t0, files,
                        {"verdict": verdict})
        return 0
    except (AnalysisError, ConfigError, ValueError, FileNotFoundError) as exc:
        manifest.record("analyze", "error", time.perf_counter() - t0, files,
                        {"message": str(exc)})
        logger.error("analyze: %s", exc)
        return 2


# ----------------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------------

def _max_workers() -> int:
    env = os.environ.get("ROTFLOW_MAX_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_cell(payload):
    """Worker entry: run the requested stages for one parameter cell."""
    data, base_dir, cell_dir, stages, params = payload
    t0 = time.perf_counter()
    row = dict(params)
    row.update({"status": "pass", "message": ""})
    try:
        data = apply_overrides(data, [f"{k}={v}" for k, v in params.items()])
        data["output_dir"] = cell_dir
        cfg = config_from_dict(data, base_dir)
        for stage in stages:
            code = {"build": run_build, "simulate": run_simulate,
                    "analyze": run_analyze}[stage](cfg)
            if code != 0:
                row["status"] = "fail"
                row["message"] = f"{stage} exited {code}"
                break
        manifest_path = Path(cell_dir) / "manifest.json"
        if manifest_path.exists():
            with open(manifest_path) as fh:
                m = json.load(fh)
            build = m["stages"].get("build", {})
            sim = m["stages"].get("simulate", {})
            row["normalized_residual"] = build.get("normalized_residual_max", "")
            row["rotation_error"] = sim.get("rotation_error_final", "")
    except Exception as exc:  # cell failures must not kill the sweep
        row["status"] = "error"
        row["message"] = str(exc)
    row["seconds"] = time.perf_counter() - t0
    return row


def run_sweep(cfg: PipelineConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out, cfg)
    t0 = time.perf_counter()
    sweep = cfg.data["sweep"]
    params = sweep["parameters"] or {}
    stages = sweep["stages"]
    keys = sorted(params)
    grids = [params[k] if isinstance(params[k], list) else [params[k]] for k in keys]
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*grids)]

    agg_path = out / "sweep.csv"
    header = keys + ["status", "normalized_residual", "rotation_error",
                     "seconds", "message"]
    if not cells:
        write_csv(agg_path, header, [])
        manifest.record("sweep", "pass", time.perf_counter() - t0, [agg_path],
                        {"cells": 0})
        logger.info("sweep: empty parameter range, nothing to do")
        return 0

    payloads = []
    for i, cell in enumerate(cells):
        cell_dir = out / "cells" / f"cell_{i:04d}"
        cell_dir.mkdir(parents=True, exist_ok=True)
        payloads.append((cfg.data, str(cfg.base_dir), str(cell_dir), stages, cell))

    workers = min(_max_workers(), len(cells))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, payloads))
    else:
        rows = [_run_cell(p) for p in payloads]

    table = [[row.get(k, "") for k in keys]
             + [row["status"], row.get("normalized_residual", ""),
                row.get("rotation_error", ""), row["seconds"], row["message"]]
             for row in rows]
    write_csv(agg_path, header, table)
    failures = sum(1 for r in rows if r["status"] != "pass")
    manifest.record("sweep", "pass" if failures == 0 else "partial",
                    time.perf_counter() - t0, [agg_path],
                    {"cells": len(cells), "failures": failures})
    logger.info("sweep: %d cells, %d failures", len(cells), failures)
    return 0
