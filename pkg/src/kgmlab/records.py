"""Persistence: line-delimited JSON records, plot-column files, run manifests.

One record object per line; floats serialize through repr (shortest
round-trip), so load(persist(x)) equals x bit-for-bit and identical inputs
give identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from pathlib import Path

import numpy as np

from .branch import BranchRecord, SolutionRecord
from .diagnostics import DiagnosticsReport
from .errors import SchemaVersionError
from .ineq import RatioReport
from .radial import ModelParams, RadialField, make_grid

SCHEMA_VERSION = 1
ARTIFACT_VERSION = "0.1.0"


def _grid_to_obj(grid):
    obj = {"r_max": grid.r_max, "n": grid.n, "scheme": grid.scheme}
    if grid.ratio is not None:
        obj["ratio"] = grid.ratio
    return obj


def _grid_from_obj(obj):
    return make_grid(obj["r_max"], obj["n"], obj["scheme"],
                     obj.get("ratio", 2.0))


def _params_to_obj(p: ModelParams):
    return {"e": p.e, "omega": p.omega, "p": p.p, "epsilon": p.epsilon}


def _record_to_obj(rec: SolutionRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "solution_record",
        "params": _params_to_obj(rec.params),
        "grid": _grid_to_obj(rec.u.grid),
        "u": rec.u.values.tolist(),
        "phi": rec.phi.values.tolist(),
        "diagnostics": dataclasses.asdict(rec.diagnostics),
        "converged": rec.converged,
        "outer_iterations": rec.outer_iterations,
    }


def _record_from_obj(obj: dict) -> SolutionRecord:
    grid = _grid_from_obj(obj["grid"])
    d = dict(obj["diagnostics"])
    d["tail_envelope"] = tuple(d["tail_envelope"])
    return SolutionRecord(
        params=ModelParams(**obj["params"]),
        u=RadialField(grid, np.array(obj["u"])),
        phi=RadialField(grid, np.array(obj["phi"])),
        diagnostics=DiagnosticsReport(**d),
        converged=obj["converged"],
        outer_iterations=obj["outer_iterations"],
    )


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=True)


def persist_record(record, path) -> None:
    """Write a SolutionRecord, BranchRecord or list of RatioReports."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if isinstance(record, SolutionRecord):
        lines.append(_dumps(_record_to_obj(record)))
    elif isinstance(record, BranchRecord):
        head = {"schema_version": SCHEMA_VERSION, "kind": "branch_record",
                "schedule": list(record.schedule),
                "trends": record.trends, "truncated": record.truncated}
        lines.append(_dumps(head))
        lines.extend(_dumps(_record_to_obj(r)) for r in record.records)
    elif isinstance(record, (list, tuple)) and all(
            isinstance(r, RatioReport) for r in record):
        for r in record:
            obj = dataclasses.asdict(r)
            obj.update(schema_version=SCHEMA_VERSION, kind="ratio_report")
            lines.append(_dumps(obj))
    else:
        raise TypeError(f"cannot persist {type(record).__name__}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_record(path):
    """Inverse of persist_record; raises SchemaVersionError on future files."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    objs = [json.loads(s) for s in lines if s.strip()]
    if not objs:
        raise ValueError(f"{path} holds no records")
    for obj in objs:
        if obj.get("schema_version", 0) > SCHEMA_VERSION:
            raise SchemaVersionError(
                f"{path} uses schema {obj['schema_version']}; "
                f"this build reads up to {SCHEMA_VERSION}")
    head = objs[0]
    if head["kind"] == "solution_record":
        return _record_from_obj(head)
    if head["kind"] == "branch_record":
        records = tuple(_record_from_obj(o) for o in objs[1:])
        return BranchRecord(schedule=tuple(head["schedule"]), records=records,
                            trends=head["trends"], truncated=head["truncated"])
    if head["kind"] == "ratio_report":
        out = []
        for obj in objs:
            obj = {k: v for k, v in obj.items()
                   if k not in ("schema_version", "kind")}
            obj["lhs"] = tuple(obj["lhs"])
            obj["rhs"] = tuple(obj["rhs"])
            obj["ratio"] = tuple(obj["ratio"])
            out.append(RatioReport(**obj))
        return out
    raise ValueError(f"unknown record kind {head['kind']!r}")


def emit_plot_columns(record: SolutionRecord, path) -> None:
    """Comma-separated columns r, u, phi, log(r u), r phi with one header row."""
    r = record.u.grid.nodes
    u = record.u.values
    phi = record.phi.values
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ru = np.where((r > 0) & (u > 0), np.log(np.maximum(r * u, 1e-300)),
                          np.nan)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.column_stack([r, u, phi, log_ru, r * phi])
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("r,u,phi,log_ru,r_phi\n")
        for row in rows:
            # repr of the Python float is the shortest exact decimal
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def output_dir(config_output: str) -> Path:
    """Output directory, overridable with KGM_OUTPUT_DIR."""
    return Path(os.environ.get("KGM_OUTPUT_DIR", config_output))


def write_manifest(directory: Path, config_hash: str, files: dict) -> Path:
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash,
        "created_unix": time.time(),
        "files": files,
    }
    path = Path(directory) / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path
