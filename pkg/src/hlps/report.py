"""Report documents and their JSON / CSV encodings.

A report is a plain dict of JSON-compatible values. Numbers are rounded at
build time (entropy 5 places, accuracy 2, energy in mJ 3, coordinates 3),
so both encodings carry identical values.

CSV reports use one long table ``section,index,field,value`` where every
value cell holds the JSON encoding of the value; :func:`read_csv` rebuilds
the same dict that ``json.loads`` returns for the JSON encoding.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Sequence

from . import __version__, kernels
from .config import RunConfig
from .metrics import MetricsReport
from .protocol import User
from .sim import SimulationResult, SweepRow


def _ent(x: float) -> float:
    return round(x, 5)


def _acc(x: float) -> float:
    return round(x, 2)


def _mj(joules: float) -> float:
    return round(joules * 1000.0, 3)


def _coord(x: float) -> float:
    return round(x, 3)


def _metadata(cfg: RunConfig, kind: str) -> dict[str, Any]:
    return {
        "tool": "hlps",
        "version": __version__,
        "report": kind,
        "seed": cfg.seed,
        "kernel_backend": kernels.BACKEND,
        "config": _config_echo(cfg),
    }


def _config_echo(cfg: RunConfig) -> dict[str, Any]:
    # the destination path is left out so a report does not depend on where it is written
    sections = cfg.sections()
    sections["output"] = {k: v for k, v in sections["output"].items() if k != "path"}
    return sections


def _summary(agg: MetricsReport, rounds: int, n_users: int) -> dict[str, Any]:
    per = rounds if rounds else 1
    return {
        "rounds": rounds,
        "n_users": n_users,
        "sends": agg.sends,
        "receives": agg.receives,
        "bytes": agg.bytes,
        "sends_per_round": agg.sends // per,
        "receives_per_round": agg.receives // per,
        "energy_mj": _mj(agg.energy),
        "entropy_from_peers": _ent(agg.entropy_from_peers),
        "entropy_from_provider": _ent(agg.entropy_from_provider),
        "mean_accuracy": _acc(agg.mean_accuracy),
        "min_accuracy": _acc(agg.min_accuracy),
    }


def build_run_report(
    cfg: RunConfig, users: Sequence[User], result: SimulationResult, trace: bool = False
) -> dict[str, Any]:
    rounds = len(result.per_round)
    doc: dict[str, Any] = {
        "metadata": _metadata(cfg, "run"),
        "aggregate": _summary(result.aggregate, rounds, len(users)),
        "per_round": [],
        "per_user": [],
    }
    for i, (outcome, rep) in enumerate(result.per_round):
        doc["per_round"].append({
            "round": i,
            "qu": outcome.elected_qu,
            "final_x": _coord(outcome.final_location.x),
            "final_y": _coord(outcome.final_location.y),
            "payload_size": len(outcome.response.payload),
            "sends": rep.sends,
            "receives": rep.receives,
            "bytes": rep.bytes,
            "energy_mj": _mj(rep.energy),
            "entropy_from_peers": _ent(rep.entropy_from_peers),
            "entropy_from_provider": _ent(rep.entropy_from_provider),
            "mean_accuracy": _acc(rep.mean_accuracy),
            "min_accuracy": _acc(rep.min_accuracy),
        })
    for u in users:
        doc["per_user"].append({
            "user": u.id,
            "x": _coord(u.true_position.x),
            "y": _coord(u.true_position.y),
            "privacy": round(u.privacy, 6),
            "mean_accuracy": _acc(result.aggregate.per_user_accuracy.get(u.id, 0.0)),
        })
    if trace:
        doc["trace"] = [
            {
                "round": i,
                "seq": j,
                "kind": m.kind,
                "sender": m.sender,
                "receivers": ";".join(str(r) for r in m.receivers),
                "bytes": m.size,
            }
            for i, (outcome, _) in enumerate(result.per_round)
            for j, m in enumerate(outcome.messages)
        ]
    return doc


def build_sweep_report(cfg: RunConfig, rows: Sequence[SweepRow]) -> dict[str, Any]:
    table = []
    for i, row in enumerate(rows):
        entry = {"point": i, "seed": row.seed}
        entry.update(row.point)
        entry.update(_summary(row.aggregate, row.rounds, row.n_users))
        table.append(entry)
    return {"metadata": _metadata(cfg, "sweep"), "rows": table}


def to_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _cell(v: Any) -> str:
    return json.dumps(v, separators=(",", ":"))


def to_csv(doc: dict[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["section", "index", "field", "value"])
    for section, body in doc.items():
        if isinstance(body, dict):
            for key, value in body.items():
                w.writerow([section, "", key, _cell(value)])
        elif not body:
            # keeps empty tables visible to read_csv
            w.writerow([section, "", "", "[]"])
        else:
            for i, row in enumerate(body):
                for key, value in row.items():
                    w.writerow([section, i, key, _cell(value)])
    return buf.getvalue()


def read_csv(text: str) -> dict[str, Any]:
    """Inverse of :func:`to_csv`."""
    rows = csv.reader(io.StringIO(text, newline=""))
    header = next(rows)
    if header != ["section", "index", "field", "value"]:
        raise ValueError(f"unexpected CSV header {header}")
    doc: dict[str, Any] = {}
    for section, index, key, value in rows:
        v = json.loads(value)
        if index == "" and key == "":
            doc[section] = v
        elif index == "":
            doc.setdefault(section, {})[key] = v
        else:
            table = doc.setdefault(section, [])
            i = int(index)
            while len(table) <= i:
                table.append({})
            table[i][key] = v
    return doc


def encode(doc: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    raise ValueError(f"unknown report format {fmt!r}")


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary sibling file and a
    rename, so readers never observe a partial file."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
