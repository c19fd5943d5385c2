"""CSV/JSON report files and figures for a completed run."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

from .consensus import CcpView, write_trace_rows
from .grid import Network, TimeGrid
from .milp import MilpConfig, Schedule
from .rolling import CcpRecord, ReportRow, Timeline
from .scenario.io import network_from_dict, network_to_dict

TIMELINE_HEADER = ("t_c", "sum_pg", "sum_pl1", "sum_pl2", "sum_pl3")
STEPS_HEADER = ("t", "sum_pg", "sum_pl1", "sum_pl2", "sum_pl3", "weighted_load")
COST_HEADER = ("t_c", "iterations", "ms")


def _num(x: float, digits: int = 9) -> str:
    return repr(round(float(x), digits) + 0.0)


def tlabel(t: float) -> str:
    """Minutes as a file-name fragment: ``30``, ``52.5``."""
    return str(int(t)) if float(t).is_integer() else repr(float(t)).replace(".", "p")


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
    return path


def _dump(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    return path


def row_values(r: ReportRow) -> list[str]:
    return [_num(r.t_c), _num(r.sum_pg), _num(r.sum_pl1), _num(r.sum_pl2), _num(r.sum_pl3)]


def row_dict(r: ReportRow) -> dict:
    return {"t_c": r.t_c, "sum_pg": round(r.sum_pg, 9), "sum_pl1": round(r.sum_pl1, 9),
            "sum_pl2": round(r.sum_pl2, 9), "sum_pl3": round(r.sum_pl3, 9),
            "total_load": round(r.total_load, 9)}


# ---- schedule context ------------------------------------------------------

def view_to_dict(view: CcpView) -> dict:
    return {"members": sorted(view.members), "agent_count": view.agent_count,
            "rounds_used": view.rounds_used, "elapsed_ms": view.elapsed_ms,
            "global_state": {f"{b}|{k}": v for (b, k), v in sorted(view.global_state.items())}}


def view_from_dict(d: dict) -> CcpView:
    gs = {}
    for key, v in d["global_state"].items():
        b, k = key.split("|", 1)
        gs[(int(b), k)] = float(v)
    return CcpView(frozenset(int(m) for m in d["members"]), int(d["agent_count"]), gs,
                   int(d["rounds_used"]), float(d["elapsed_ms"]))


def config_to_dict(cfg: MilpConfig) -> dict:
    d = asdict(cfg)
    d["weights"] = list(d["weights"])
    return d


def config_from_dict(d: dict) -> MilpConfig:
    d = dict(d)
    d["weights"] = tuple(d["weights"])
    return MilpConfig(**d)


def schedule_document(rec: CcpRecord) -> dict:
    assert rec.schedule is not None
    doc = {"ccp": {"id": rec.ccp_id, "members": rec.members, "scheduler": rec.scheduler,
                   "status": rec.status, "solution_status": rec.solution_status,
                   "message": rec.message},
           "schedule": rec.schedule.to_dict(), "digest": rec.schedule.digest()}
    if rec.view is not None:
        doc["context"] = {"view": view_to_dict(rec.view), "network": network_to_dict(rec.network),
                          "grid": asdict(rec.grid), "config": config_to_dict(rec.config)}
    return doc


def load_schedule_document(path: str | Path):
    """``(schedule, view, network, grid, config)``; context entries are None if absent."""
    doc = json.loads(Path(path).read_text())
    sched = Schedule.from_dict(doc["schedule"])
    ctx = doc.get("context")
    if ctx is None:
        return sched, None, None, None, None
    return (sched, view_from_dict(ctx["view"]), network_from_dict(ctx["network"]),
            TimeGrid(**ctx["grid"]), config_from_dict(ctx["config"]))


# ---- comparison ----------------------------------------------------------

def comparison_block(runs: Sequence[tuple[str, float, ReportRow]], at_min: float) -> dict:
    """Per-class and total restored load of several runs at one moment."""
    entries = [{"label": label, "control_gap": gap, **row_dict(r)} for label, gap, r in runs]
    out = {"at_min": at_min, "runs": entries}
    if len(entries) == 2:
        a, b = entries
        out["difference"] = {k: round(a[k] - b[k], 9)
                             for k in ("sum_pl1", "sum_pl2", "sum_pl3", "total_load")}
    return out


def read_step_rows(result_dir: str | Path) -> list[ReportRow]:
    with (Path(result_dir) / "steps.csv").open() as fh:
        return [ReportRow(float(r["t"]), float(r["sum_pg"]), float(r["sum_pl1"]), float(r["sum_pl2"]),
                          float(r["sum_pl3"])) for r in csv.DictReader(fh)]


def row_at(rows: Sequence[ReportRow], t: float) -> ReportRow:
    for r in rows:
        if abs(r.t_c - t) < 1e-9:
            return r
    raise KeyError(f"no realized step at t={t}")


# ---- emission -------------------------------------------------------------

def emit_reports(timeline: Timeline, out_dir: str | Path, scenario_name: str = "",
                 comparison: dict | None = None, figures: bool = True) -> list[Path]:
    """Write every report file for ``timeline`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [
        _write_csv(out / "timeline.csv", TIMELINE_HEADER, (row_values(r) for r in timeline.rows())),
        _write_csv(out / "steps.csv", STEPS_HEADER,
                   ([*row_values(ReportRow.of(t, st)), _num(timeline.weighted_load(st))]
                    for t, st in timeline.steps)),
        _write_csv(out / "consensus_cost.csv", COST_HEADER,
                   ((_num(t), k, _num(ms)) for t, k, ms in timeline.consensus_rows())),
    ]
    for m in timeline.moments:
        lab = tlabel(m.t_c)
        files.append(write_trace_rows(m.agents, m.trace, out / f"consensus_trace_{lab}.csv"))
        files.append(_dump(out / f"ccp_{lab}.json", {
            "t_c": m.t_c, "rounds": m.rounds, "elapsed_ms": m.elapsed_ms, "converged": m.converged,
            "agents": m.agents, "events": [e.to_dict() for e in m.events], "warnings": m.warnings,
            "ccps": [{"id": r.ccp_id, "members": r.members, "size": len(r.members),
                      "scheduler": r.scheduler, "status": r.status, "message": r.message,
                      "objective": None if r.schedule is None else r.schedule.objective}
                     for r in m.ccps]}))
        for r in m.ccps:
            if r.schedule is not None:
                files.append(_dump(out / f"schedule_{lab}_{r.ccp_id}.json", schedule_document(r)))
    summary = {
        "scenario": scenario_name, "t0": timeline.t0, "end_time": timeline.end_time,
        "step": timeline.step, "control_gap": timeline.control_gap, "horizon": timeline.horizon,
        "stop_reason": timeline.stop_reason,
        "moments": [{"t_c": m.t_c, "iterations": m.rounds, "ms": m.elapsed_ms,
                     "ccp_sizes": [len(r.members) for r in m.ccps],
                     "statuses": [r.status for r in m.ccps], "warnings": m.warnings}
                    for m in timeline.moments],
        "final": row_dict(ReportRow.of(timeline.end_time, timeline.steps[-1][1])) if timeline.steps else None,
    }
    if comparison is not None:
        summary["comparison"] = comparison
    files.append(_dump(out / "summary.json", summary))
    if figures:
        files.extend(plot_reports(timeline, out))
    return files


def plot_reports(timeline: Timeline, out: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    rows = timeline.step_rows()
    if rows:
        t = [r.t_c for r in rows]
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.stackplot(t, [r.sum_pl1 for r in rows], [r.sum_pl2 for r in rows], [r.sum_pl3 for r in rows],
                     labels=["class 1", "class 2", "class 3"], step="post", alpha=0.8)
        ax.step(t, [r.sum_pg for r in rows], where="post", color="k", label="generation")
        for m in timeline.moments:
            ax.axvline(m.t_c, color="grey", lw=0.5, ls=":")
        ax.set_xlabel("time (min)")
        ax.set_ylabel("kW")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        paths.append(out / "timeline.png")
        fig.savefig(paths[-1], dpi=100, metadata={"Software": None})
        plt.close(fig)
    for m in timeline.moments:
        if m.trace.size == 0:
            continue
        fig, ax = plt.subplots(figsize=(7, 4))
        stride = max(1, m.trace.shape[0] // 2000)
        ax.plot(range(0, m.trace.shape[0], stride), m.trace[::stride], lw=0.7)
        ax.set_xlabel("consensus round")
        ax.set_ylabel("1 / indicator")
        ax.set_title(f"t_c = {tlabel(m.t_c)} min")
        fig.tight_layout()
        paths.append(out / f"consensus_{tlabel(m.t_c)}.png")
        fig.savefig(paths[-1], dpi=100, metadata={"Software": None})
        plt.close(fig)
    return paths
