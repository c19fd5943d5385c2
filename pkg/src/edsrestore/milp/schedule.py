"""Per-interval values returned by a solve."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping

from .instance import BINARY, MilpInstance


def entity_key(entity) -> str:
    return "-".join(str(e) for e in entity)


@dataclass
class Schedule:
    t_c: float
    step: float
    n_intervals: int
    series: dict[str, dict[str, list[float]]]
    objective: float = 0.0
    status: str = "optimal"
    ccp_id: int = 0
    members: list[int] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_solution(cls, inst: MilpInstance, values: Mapping[str, float], objective: float,
                      status: str = "optimal", ccp_id: int = 0) -> "Schedule":
        N = int(inst.meta.get("n_intervals", 0))
        series: dict[str, dict[str, list[float]]] = {}
        for v in inst.variables:
            if v.n is None:
                continue
            val = float(values.get(v.name, 0.0))
            if v.kind == BINARY:
                val = float(round(val))
            val += 0.0  # no negative zeros in reports
            fam = series.setdefault(v.family, {})
            row = fam.setdefault(entity_key(v.entity), [0.0] * N)
            row[v.n] = val
        return cls(t_c=float(inst.meta.get("t_c", 0.0)), step=float(inst.meta.get("step", 0.0)),
                   n_intervals=N, series=series, objective=float(objective), status=status,
                   ccp_id=ccp_id, members=list(inst.meta.get("members", [])),
                   meta={k: inst.meta[k] for k in ("buses", "feeders", "dgs", "ess")
                         if k in inst.meta})

    def get(self, family: str, entity, n: int, default: float = 0.0) -> float:
        key = entity if isinstance(entity, str) else entity_key(entity if isinstance(entity, tuple)
                                                                else (entity,))
        row = self.series.get(family, {}).get(key)
        return default if row is None else row[n]

    def has(self, family: str, entity) -> bool:
        key = entity if isinstance(entity, str) else entity_key(entity if isinstance(entity, tuple)
                                                                else (entity,))
        return key in self.series.get(family, {})

    def moment(self, n: int) -> float:
        return self.t_c + n * self.step

    def to_dict(self) -> dict:
        return {
            "t_c": self.t_c, "step": self.step, "n_intervals": self.n_intervals,
            "ccp_id": self.ccp_id, "members": list(self.members), "status": self.status,
            "objective": self.objective, "meta": self.meta,
            "series": {fam: dict(sorted(rows.items())) for fam, rows in sorted(self.series.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Schedule":
        return cls(t_c=float(d["t_c"]), step=float(d["step"]), n_intervals=int(d["n_intervals"]),
                   series={f: {k: [float(x) for x in v] for k, v in rows.items()}
                           for f, rows in d["series"].items()},
                   objective=float(d.get("objective", 0.0)), status=d.get("status", "optimal"),
                   ccp_id=int(d.get("ccp_id", 0)), members=list(d.get("members", [])),
                   meta=dict(d.get("meta", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()
