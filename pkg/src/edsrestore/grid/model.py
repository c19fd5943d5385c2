"""Static grid data and its time-stamped dynamic state.

Quantities are physical throughout: kW, kVar, kWh, ohm, A, kV and minutes.
Per-unit values only appear in the ES reactive capability table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

N_CLASSES = 3

# (|P| lower, |P| upper, Q min, Q max), all in p.u. of ES rated power.
ES_Q_TABLE = (
    (0.0, 0.2, -1.1, 0.6),
    (0.2, 0.4, -1.0, 0.6),
    (0.4, 0.6, -0.9, 0.6),
    (0.6, 0.8, -0.75, 0.6),
    (0.8, 1.0, -0.5, 0.5),
)


def feeder_key(i: int, j: int) -> str:
    return f"{i}-{j}"


@dataclass(frozen=True)
class Bus:
    id: int
    load_p: tuple[float, float, float] = (0.0, 0.0, 0.0)
    load_q: tuple[float, float, float] = (0.0, 0.0, 0.0)
    lambda_min: float | None = None
    has_agent: bool = True
    priority_class: int = 1

    @property
    def total_p(self) -> float:
        return float(sum(self.load_p))


@dataclass(frozen=True)
class Feeder:
    i: int
    j: int
    r: float
    x: float
    i_max: float

    @property
    def key(self) -> str:
        return feeder_key(self.i, self.j)

    @property
    def pair(self) -> frozenset:
        return frozenset((self.i, self.j))


@dataclass(frozen=True)
class DgUnit:
    bus: int
    p_max: float
    p_min: float
    q_max: float
    q_min: float
    ramp_rate: float  # kW per minute
    t_syn: float
    t_start: float | None = None  # None: not started yet

    def ready_time(self) -> float:
        if self.t_start is None:
            return math.inf
        return self.t_start + self.t_syn


@dataclass(frozen=True)
class EsUnit:
    bus: int
    capacity: float
    p_ch_max: float
    p_dis_max: float
    eta_ch: float
    eta_dis: float
    soc_min: float
    soc_max: float
    q_capability: tuple[tuple[float, float, float, float], ...] = ES_Q_TABLE
    s_rated: float | None = None

    @property
    def rated(self) -> float:
        if self.s_rated is not None:
            return self.s_rated
        return max(self.p_ch_max, self.p_dis_max)

    def q_range(self, p_abs: float, tol: float = 1e-12) -> tuple[float, float]:
        """Reactive range in kVar for an active output magnitude in kW.

        On a shared band edge the more permissive neighbouring row wins.
        """
        pu = p_abs / self.rated if self.rated > 0 else 0.0
        best = None
        for lo, hi, qlo, qhi in self.q_capability:
            if lo - tol <= pu <= hi + tol:
                if best is None or (qhi - qlo) > (best[1] - best[0]):
                    best = (qlo, qhi)
        if best is None:
            raise ValueError(f"|P|={pu:.4f} p.u. outside ES capability table")
        return best[0] * self.rated, best[1] * self.rated


@dataclass(frozen=True)
class Network:
    buses: Mapping[int, Bus]
    feeders: tuple[Feeder, ...]
    dgs: Mapping[int, DgUnit] = field(default_factory=dict)
    ess: Mapping[int, EsUnit] = field(default_factory=dict)
    v_nom: float = 4.16
    v_min: float = 0.95 * 4.16
    v_max: float = 1.05 * 4.16

    def feeder(self, key: str) -> Feeder:
        for f in self.feeders:
            if f.key == key:
                return f
        raise KeyError(key)

    @property
    def source_buses(self) -> set[int]:
        return set(self.dgs) | set(self.ess)

    def with_dg(self, dg: DgUnit) -> "Network":
        dgs = dict(self.dgs)
        dgs[dg.bus] = dg
        return replace(self, dgs=dgs)

    def with_es(self, es: EsUnit) -> "Network":
        ess = dict(self.ess)
        ess[es.bus] = es
        return replace(self, ess=ess)

    def with_bus(self, bus: Bus) -> "Network":
        buses = dict(self.buses)
        buses[bus.id] = bus
        return replace(self, buses=buses)


@dataclass(frozen=True)
class NetworkState:
    """Observed dynamic state at ``time`` (minutes).

    Missing keys mean "zero / unavailable", so a fresh blackout state can be
    built from the availability maps alone.
    """

    time: float = 0.0
    avail_bus: Mapping[int, int] = field(default_factory=dict)
    avail_feeder: Mapping[str, int] = field(default_factory=dict)
    v: Mapping[int, int] = field(default_factory=dict)
    w: Mapping[str, int] = field(default_factory=dict)
    pl: Mapping[int, tuple[float, float, float]] = field(default_factory=dict)
    ql: Mapping[int, tuple[float, float, float]] = field(default_factory=dict)
    p_g: Mapping[int, float] = field(default_factory=dict)
    q_g: Mapping[int, float] = field(default_factory=dict)
    p_dg: Mapping[int, float] = field(default_factory=dict)
    soc: Mapping[int, float] = field(default_factory=dict)
    dg_ready: Mapping[int, float | None] = field(default_factory=dict)

    def restored(self, bus: int) -> tuple[float, float, float]:
        return tuple(self.pl.get(bus, (0.0, 0.0, 0.0)))  # type: ignore[return-value]

    def totals(self) -> dict[str, float]:
        pl = [0.0, 0.0, 0.0]
        for vals in self.pl.values():
            for c in range(N_CLASSES):
                pl[c] += vals[c]
        return {
            "sum_pg": float(sum(self.p_g.values())),
            "sum_pl1": pl[0],
            "sum_pl2": pl[1],
            "sum_pl3": pl[2],
        }


def blackout_state(network: Network, time: float = 0.0,
                   unavailable_buses=(), unavailable_feeders=(),
                   soc: Mapping[int, float] | None = None) -> NetworkState:
    """All-dark state with everything available except the listed entities."""
    bad_b = set(unavailable_buses)
    bad_f = set(unavailable_feeders)
    return NetworkState(
        time=time,
        avail_bus={b: int(b not in bad_b) for b in network.buses},
        avail_feeder={f.key: int(f.key not in bad_f) for f in network.feeders},
        soc=dict(soc or {}),
        dg_ready={b: dg.t_start for b, dg in network.dgs.items()},
    )


@dataclass(frozen=True)
class TimeGrid:
    t_c: float = 0.0
    horizon: float = 120.0
    step: float = 5.0
    control_gap: float = 30.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.step <= 0:
            out.append("step must be positive")
            return out
        if not _is_multiple(self.horizon, self.step):
            out.append(f"horizon {self.horizon} is not a multiple of step {self.step}")
        if not _is_multiple(self.control_gap, self.step):
            out.append(f"control gap {self.control_gap} is not a multiple of step {self.step}")
        if not 0 < self.control_gap < self.horizon:
            out.append("control gap must satisfy 0 < T_r < T")
        return out

    @property
    def n_intervals(self) -> int:
        return int(round(self.horizon / self.step))

    @property
    def n_control(self) -> int:
        return int(round(self.control_gap / self.step))

    @property
    def dt_hours(self) -> float:
        return self.step / 60.0

    def moment(self, n: int) -> float:
        return self.t_c + n * self.step

    def at(self, t_c: float) -> "TimeGrid":
        return replace(self, t_c=t_c)


def _is_multiple(a: float, b: float) -> bool:
    q = a / b
    return abs(q - round(q)) < 1e-9


def validate_network(network: Network) -> list[str]:
    """Return every invariant violation found; an empty list means valid."""
    out: list[str] = []
    for bid, bus in network.buses.items():
        if bid != bus.id:
            out.append(f"bus {bus.id}: stored under key {bid}")
        if len(bus.load_p) != N_CLASSES or len(bus.load_q) != N_CLASSES:
            out.append(f"bus {bus.id}: load parameters need {N_CLASSES} classes")
        if any(p < 0 for p in bus.load_p) or any(q < 0 for q in bus.load_q):
            out.append(f"bus {bus.id}: negative load parameter")
        if bus.lambda_min is not None and not 0.0 <= bus.lambda_min <= 1.0:
            out.append(f"bus {bus.id}: lambda_min {bus.lambda_min} outside [0, 1]")
        if bus.priority_class not in (1, 2, 3):
            out.append(f"bus {bus.id}: priority class {bus.priority_class} not in 1..3")

    seen_pairs: set[frozenset] = set()
    for f in network.feeders:
        for end in (f.i, f.j):
            if end not in network.buses:
                out.append(f"feeder {f.key}: endpoint bus {end} does not exist")
        if f.i == f.j:
            out.append(f"feeder {f.key}: endpoints must differ")
        if f.r < 0 or f.x < 0:
            out.append(f"feeder {f.key}: negative impedance")
        if not f.i_max > 0:
            out.append(f"feeder {f.key}: i_max must be positive")
        if f.pair in seen_pairs:
            out.append(f"feeder {f.key}: duplicate feeder between the same buses")
        seen_pairs.add(f.pair)

    for b, dg in network.dgs.items():
        if b != dg.bus or dg.bus not in network.buses:
            out.append(f"dg at {dg.bus}: bus missing or key mismatch")
        if dg.p_min > dg.p_max:
            out.append(f"dg at {dg.bus}: p_min > p_max")
        if dg.q_min > dg.q_max:
            out.append(f"dg at {dg.bus}: q_min > q_max")
        if not dg.ramp_rate > 0:
            out.append(f"dg at {dg.bus}: ramp rate must be positive")
        if dg.t_syn < 0:
            out.append(f"dg at {dg.bus}: negative synchronization time")

    for b, es in network.ess.items():
        if b != es.bus or es.bus not in network.buses:
            out.append(f"es at {es.bus}: bus missing or key mismatch")
        if not 0.0 <= es.soc_min < es.soc_max <= 1.0:
            out.append(f"es at {es.bus}: SoC bounds must satisfy 0 <= soc_min < soc_max <= 1")
        if es.eta_ch <= 0 or es.eta_dis <= 0:
            out.append(f"es at {es.bus}: efficiencies must be positive")
        if es.capacity <= 0:
            out.append(f"es at {es.bus}: capacity must be positive")
        out.extend(f"es at {es.bus}: {msg}" for msg in _table_problems(es.q_capability))

    if not network.v_min < network.v_nom < network.v_max:
        out.append("voltage bounds must satisfy v_min < v_nom < v_max")
    return out


def _table_problems(rows) -> list[str]:
    if not rows:
        return ["empty reactive capability table"]
    out = []
    edge = 0.0
    for lo, hi, qlo, qhi in rows:
        if abs(lo - edge) > 1e-12:
            out.append(f"capability rows leave a gap or overlap at {edge}")
        if hi <= lo:
            out.append(f"capability row ({lo}, {hi}] is empty")
        if qlo > qhi:
            out.append(f"capability row ({lo}, {hi}] has q_min > q_max")
        edge = hi
    if abs(edge - 1.0) > 1e-12:
        out.append("capability rows must end at 1.0 p.u.")
    return out
