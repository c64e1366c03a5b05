"""JSON/CSV reports shaped after the quality and speedup tables."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources

from . import __version__, kernels
from .netlist import Instance
from .router import RouterConfig, RoutingSolution, SpeedupRow

DELAY_PROXY_NOTE = "PROXY: max terminal-to-terminal path cost inside a net's tree, in w_e units; not a timing delay"


def load_schema() -> dict:
    return json.loads(resources.files("lagroute").joinpath("report_schema.json").read_text())


def solution_row(name: str, instance: Instance, sol: RoutingSolution, wall_time: float,
                 variant: str | None = None, history: bool = True) -> dict:
    row = {
        "name": name,
        "instance_hash": instance.digest(),
        "width": sol.width,
        "wirelength": sol.wirelength,
        "channel_width": sol.channel_width,
        "total_violation": sol.total_violation,
        "delay_proxy": sol.delay_proxy,
        "achieved_W": sol.achieved_W,
        "infeasible_at_w_init": sol.infeasible_at_w_init,
        "iterations": sol.iterations,
        "best_iteration": sol.best_iteration,
        "wall_time": wall_time,
    }
    if variant is not None:
        row["variant"] = variant
    if history:
        row["history"] = [r.to_dict() for r in sol.history]
    if sol.sweep:
        row["sweep"] = [
            {"width": s.width, "total_violation": s.total_violation, "channel_width": s.channel_width,
             "wirelength": s.wirelength, "iterations": s.iterations}
            for s in sol.sweep
        ]
    return row


def build_report(command: str, config: RouterConfig | None, rows: list[dict],
                 speedup: list[SpeedupRow] | None = None, extra: dict | None = None) -> dict:
    report = {
        "tool": "lagroute",
        "version": __version__,
        "backend": kernels.BACKEND,
        "command": command,
        "config": config.to_dict() if config is not None else None,
        "delay_proxy_note": DELAY_PROXY_NOTE,
        "instances": rows,
    }
    if speedup is not None:
        report["speedup"] = [{"threads": r.threads, "wall_time": r.wall_time, "speedup": r.speedup} for r in speedup]
    if extra:
        report.update(extra)
    return report


_CSV_SKIP = {"history", "sweep"}


def to_csv(report: dict) -> str:
    """Instance rows as CSV, followed by the speedup table when present."""
    buf = io.StringIO()
    rows = report.get("instances", [])
    if rows:
        fields = [k for k in rows[0] if k not in _CSV_SKIP]
        w = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    if report.get("speedup"):
        if rows:
            buf.write("\n")
        w = csv.DictWriter(buf, fieldnames=["threads", "wall_time", "speedup"], lineterminator="\n")
        w.writeheader()
        w.writerows(report["speedup"])
    return buf.getvalue()
