"""Multi-interval restoration MILP for one communication-connected part.

Units: kW, kVar, kV, A, ohm, minutes.  Squared voltages are in kV**2 and
squared currents in A**2, so the DistFlow terms carry 1e-3 / 1e-6 factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..consensus import CcpView
from ..grid import DgUnit, EsUnit, Feeder, Network, NetworkState, TimeGrid, connected_components
from .instance import BINARY, MilpInstance
from .pwl import pwl_square
from .seed import observed_state

FAMILY_ORDER = (
    "v", "w", "P", "Q", "Isq", "Vsq",
    "PG", "QG", "PDG", "QDG", "PES", "Pch", "Pdis", "vch", "vdis", "QES", "qsel", "SoC",
    "PL1", "PL2", "PL3", "PL", "QL1", "QL2", "QL3", "QL",
    "vf", "wfd", "H",
    "pwlPlam", "pwlPseg", "pwlQlam", "pwlQseg",
)

KW_PER_OHM_A2 = 1e-3   # r * I**2 in ohm * A**2 -> kW
KV2_PER_OHM_KW = 1e-3  # r * P in ohm * kW -> kV**2
KV2_PER_OHM2_A2 = 1e-6  # r**2 * I**2 -> kV**2


@dataclass(frozen=True)
class MilpConfig:
    weights: tuple[float, float, float] = (1000.0, 100.0, 10.0)
    segments: int = 6
    pwl_selectors: bool = True
    big_m_policy: str = "tight"        # "tight" per feeder, or "uniform"
    lambda_min: float = 0.1
    es_q_mode: str = "table_binary"    # or "conservative_fixed"
    flow_bound: str = "dimensional"    # or "strict"
    seed_pg_band: float = 1e-3         # kW
    binary_parents: bool = False       # keep wfd binary (exactness does not need it)

    def __post_init__(self):
        w1, w2, w3 = self.weights
        if not w1 > w2 > w3 > 0:
            raise ValueError("weights must satisfy w1 > w2 > w3 > 0")
        if self.segments < 1:
            raise ValueError("PWL segment count must be >= 1")
        if self.big_m_policy not in ("tight", "uniform"):
            raise ValueError(f"unknown big-M policy {self.big_m_policy}")
        if self.es_q_mode not in ("table_binary", "conservative_fixed"):
            raise ValueError(f"unknown ES reactive mode {self.es_q_mode}")
        if self.flow_bound not in ("dimensional", "strict"):
            raise ValueError(f"unknown flow bound {self.flow_bound}")
        if not 0.0 <= self.lambda_min <= 1.0:
            raise ValueError("lambda_min must lie in [0, 1]")
        if self.seed_pg_band < 0:
            raise ValueError("seed_pg_band must be non-negative")

    def scaled(self, c: float) -> "MilpConfig":
        return replace(self, weights=tuple(c * w for w in self.weights))


@dataclass
class CcpSets:
    """Entities of one CCP that can take part in the horizon."""

    t_c: float
    buses: list[int]
    feeders: list[Feeder]
    dgs: dict[int, DgUnit]
    ess: dict[int, EsUnit]
    ready: dict[int, float]
    observed: NetworkState
    live: set[int] = field(default_factory=set)

    @property
    def sources(self) -> list[int]:
        return sorted(set(self.dgs) | set(self.ess))


def ccp_sets(view: CcpView, network: Network, grid: TimeGrid) -> CcpSets:
    obs = observed_state(view, network, grid.t_c)
    buses = sorted(b for b, a in obs.avail_bus.items() if a)
    bset = set(buses)
    feeders = [f for f in network.feeders
               if f.i in bset and f.j in bset and obs.avail_feeder.get(f.key, 0)]
    dgs = {b: network.dgs[b] for b in buses if b in network.dgs}
    ess = {b: network.ess[b] for b in buses if b in network.ess}
    ready = {}
    for b, dg in dgs.items():
        ts = obs.dg_ready.get(b)
        if ts is None:
            ts = dg.t_start if dg.t_start is not None else grid.t_c
        ready[b] = ts + dg.t_syn
    last = grid.moment(grid.n_intervals - 1)
    capable = {b for b in ess} | {b for b, r in ready.items() if r <= last + 1e-9}
    live = set()
    for comp in connected_components(buses, [(f.i, f.j) for f in feeders]):
        if capable & set(comp):
            live.update(comp)
    return CcpSets(grid.t_c, buses, feeders, dgs, ess, ready, obs, live)


def flow_limits(f: Feeder, network: Network, config: MilpConfig) -> tuple[float, float]:
    if config.flow_bound == "strict":
        return f.r * f.i_max**2 * KW_PER_OHM_A2, f.x * f.i_max**2 * KW_PER_OHM_A2
    s = network.v_nom * f.i_max
    return s, s


def big_m(f: Feeder, network: Network, config: MilpConfig) -> float:
    pbar, qbar = flow_limits(f, network, config)
    return (network.v_max**2 - network.v_min**2
            + 2 * KV2_PER_OHM_KW * (f.r * pbar + f.x * qbar)
            + KV2_PER_OHM2_A2 * (f.r**2 + f.x**2) * f.i_max**2)


def vname(fam: str, entity: tuple, n: int | None = None) -> str:
    ent = "_".join(str(e) for e in entity)
    return f"{fam}_{ent}" if n is None else f"{fam}_{ent}_n{n}"


@dataclass
class FictitiousNetwork:
    """bus0 plus one fictitious feeder to every DG/ES bus."""

    buses: list[int]                # excludes bus0
    feeders: list[tuple[int, int]]  # original (i, j) plus (0, g)
    sources: list[int]

    @classmethod
    def build(cls, buses, feeders, sources) -> "FictitiousNetwork":
        fe = [(f.i, f.j) for f in feeders] + [(0, g) for g in sorted(sources)]
        return cls(sorted(buses), fe, sorted(sources))

    @property
    def size(self) -> int:
        return len(self.buses) + 1

    def directed(self) -> list[tuple[int, int]]:
        out = []
        for i, j in self.feeders:
            out += [(i, j), (j, i)]
        return out


def radiality_rows(inst: MilpInstance, fnet: FictitiousNetwork, n_intervals: int,
                   binary_parents: bool = False) -> None:
    """Single-commodity flow from bus0 plus one parent per energized bus.

    Expects ``v_<b>_n<n>`` and ``w_<i>_<j>_n<n>`` to exist already.
    """
    kind = BINARY if binary_parents else "continuous"
    cap = float(fnet.size)
    arcs = fnet.directed()
    for n in range(n_intervals):
        inst.add_var(vname("vf", (0,), n), lb=1.0, ub=1.0, family="vf", entity=(0,), n=n)
        inst.add_row({vname("vf", (0,), n): 1.0}, "=", 1.0, eq="18", entity=(0,), n=n)
        for b in fnet.buses:
            vf = inst.add_var(vname("vf", (b,), n), lb=0.0, ub=1.0, family="vf", entity=(b,), n=n)
            inst.add_row({vf: 1.0, vname("v", (b,), n): -1.0}, "=", 0.0, eq="16", entity=(b,), n=n)
        for a in arcs:
            inst.add_var(vname("wfd", a, n), kind=kind, lb=0.0, ub=1.0, family="wfd", entity=a, n=n)
            h = inst.add_var(vname("H", a, n), lb=0.0, ub=cap, family="H", entity=a, n=n)
            inst.add_row({h: 1.0, vname("wfd", a, n): -cap}, "<=", 0.0, eq="14", entity=a, n=n)
        for i, j in fnet.feeders:
            inst.add_row({vname("vf", (i,), n): 1.0, vname("vf", (j,), n): 1.0,
                          vname("wfd", (i, j), n): -2.0, vname("wfd", (j, i), n): -2.0},
                         ">=", 0.0, eq="15", entity=(i, j), n=n)
            if i == 0:
                inst.add_row({vname("wfd", (j, 0), n): 1.0}, "=", 0.0, eq="19", entity=(j, 0), n=n)
                inst.var(vname("wfd", (j, 0), n)).ub = 0.0
            else:
                inst.add_row({vname("wfd", (i, j), n): 1.0, vname("wfd", (j, i), n): 1.0,
                              vname("w", (i, j), n): -1.0}, "=", 0.0, eq="17", entity=(i, j), n=n)
        into: dict[int, list] = {b: [] for b in fnet.buses}
        out: dict[int, list] = {b: [] for b in fnet.buses}
        for a in arcs:
            if a[1] in into:
                into[a[1]].append(a)
            if a[0] in out:
                out[a[0]].append(a)
        for b in fnet.buses:
            row = {vname("H", a, n): 1.0 for a in into[b]}
            for a in out[b]:
                row[vname("H", a, n)] = row.get(vname("H", a, n), 0.0) - 1.0
            row[vname("vf", (b,), n)] = -1.0
            inst.add_row(row, "=", 0.0, eq="13", entity=(b,), n=n)
            par = {vname("wfd", a, n): 1.0 for a in into[b]}
            par[vname("vf", (b,), n)] = -1.0
            inst.add_row(par, "=", 0.0, eq="20", entity=(b,), n=n)


def es_reactive_rows(inst: MilpInstance, es: EsUnit, n_intervals: int, mode: str) -> None:
    """Reactive range of an ES from its capability table.

    ``table_binary`` picks one band per interval (sum of selectors = v) and
    bounds |P| = Pch + Pdis and Q by the chosen row; ``conservative_fixed``
    uses the last row for every output level.
    """
    b = es.bus
    s = es.rated
    for n in range(n_intervals):
        v = vname("v", (b,), n)
        q = vname("QES", (b,), n)
        pabs = {vname("Pch", (b,), n): 1.0, vname("Pdis", (b,), n): 1.0}
        if mode == "conservative_fixed":
            _, _, qlo, qhi = es.q_capability[-1]
            inst.add_row({q: 1.0, v: -qhi * s}, "<=", 0.0, eq="35.hi", entity=(b,), n=n)
            inst.add_row({q: 1.0, v: -qlo * s}, ">=", 0.0, eq="35.lo", entity=(b,), n=n)
            continue
        sel = []
        for k in range(len(es.q_capability)):
            sel.append(inst.add_var(vname("qsel", (b, k), n), kind=BINARY,
                                    family="qsel", entity=(b, k), n=n))
        inst.add_row({**{z: 1.0 for z in sel}, v: -1.0}, "=", 0.0, eq="35.sel", entity=(b,), n=n)
        up = dict(pabs)
        lo = dict(pabs)
        qup = {q: 1.0}
        qlo_row = {q: 1.0}
        for z, (plo, phi, qmin, qmax) in zip(sel, es.q_capability):
            up[z] = -phi * s
            lo[z] = -plo * s
            qup[z] = -qmax * s
            qlo_row[z] = -qmin * s
        inst.add_row(up, "<=", 0.0, eq="35.band", entity=(b, 1), n=n)
        inst.add_row(lo, ">=", 0.0, eq="35.band", entity=(b, 0), n=n)
        inst.add_row(qup, "<=", 0.0, eq="35.hi", entity=(b,), n=n)
        inst.add_row(qlo_row, ">=", 0.0, eq="35.lo", entity=(b,), n=n)


def build_model(view: CcpView, network: Network, grid: TimeGrid,
                config: MilpConfig = MilpConfig()) -> MilpInstance:
    problems = grid.problems()
    if problems:
        raise ValueError("; ".join(problems))
    sets = ccp_sets(view, network, grid)
    obs = sets.observed
    N = grid.n_intervals
    dt_h = grid.dt_hours
    inst = MilpInstance(family_order=FAMILY_ORDER)
    inst.flags["degenerate"] = not sets.sources
    inst.meta.update(t_c=grid.t_c, step=grid.step, horizon=grid.horizon, n_intervals=N,
                     buses=list(sets.buses), feeders=[f.key for f in sets.feeders],
                     dgs=sorted(sets.dgs), ess=sorted(sets.ess), ready=dict(sets.ready),
                     live=sorted(sets.live), members=sorted(view.members))

    def add(fam, ent, n, lb=0.0, ub=math.inf, kind="continuous"):
        return inst.add_var(vname(fam, ent, n), kind=kind, lb=lb, ub=ub, family=fam, entity=ent, n=n)

    vmin2, vmax2 = network.v_min**2, network.v_max**2

    # ---- bus state, voltages, generation and load -----------------------
    for b in sets.buses:
        bus = network.buses[b]
        for n in range(N):
            add("v", (b,), n, kind=BINARY)
            add("Vsq", (b,), n, lb=vmin2, ub=vmax2)
            add("PG", (b,), n, lb=-math.inf)
            add("QG", (b,), n, lb=-math.inf)
            for c in range(3):
                add(f"PL{c + 1}", (b,), n, ub=bus.load_p[c])
                add(f"QL{c + 1}", (b,), n, lb=-math.inf)
            add("PL", (b,), n)
            add("QL", (b,), n, lb=-math.inf)
    for f in sets.feeders:
        pbar, qbar = flow_limits(f, network, config)
        for n in range(N):
            add("w", (f.i, f.j), n, kind=BINARY)
            add("P", (f.i, f.j), n, lb=-pbar, ub=pbar)
            add("Q", (f.i, f.j), n, lb=-qbar, ub=qbar)
            add("Isq", (f.i, f.j), n, ub=f.i_max**2)

    # ---- objective ------------------------------------------------------
    for b in sets.buses:
        for n in range(N):
            for c, wgt in enumerate(config.weights):
                inst.objective[vname(f"PL{c + 1}", (b,), n)] = wgt * dt_h

    # ---- power balance and DistFlow -------------------------------------
    m_uniform = max((big_m(f, network, config) for f in sets.feeders), default=0.0)
    for n in range(N):
        prow = {b: {vname("PG", (b,), n): 1.0, vname("PL", (b,), n): -1.0} for b in sets.buses}
        qrow = {b: {vname("QG", (b,), n): 1.0, vname("QL", (b,), n): -1.0} for b in sets.buses}
        for f in sets.feeders:
            e = (f.i, f.j)
            P, Q, I = vname("P", e, n), vname("Q", e, n), vname("Isq", e, n)
            prow[f.j][P] = prow[f.j].get(P, 0.0) + 1.0
            qrow[f.j][Q] = qrow[f.j].get(Q, 0.0) + 1.0
            prow[f.i][P] = prow[f.i].get(P, 0.0) - 1.0
            prow[f.i][I] = prow[f.i].get(I, 0.0) - f.r * KW_PER_OHM_A2
            qrow[f.i][Q] = qrow[f.i].get(Q, 0.0) - 1.0
            qrow[f.i][I] = qrow[f.i].get(I, 0.0) - f.x * KW_PER_OHM_A2
        for b in sets.buses:
            inst.add_row(prow[b], "=", 0.0, eq="2", entity=(b,), n=n)
            inst.add_row(qrow[b], "=", 0.0, eq="3", entity=(b,), n=n)

        for f in sets.feeders:
            e = (f.i, f.j)
            P, Q, I, w = vname("P", e, n), vname("Q", e, n), vname("Isq", e, n), vname("w", e, n)
            M = big_m(f, network, config) if config.big_m_policy == "tight" else m_uniform
            drop = {vname("Vsq", (f.i,), n): 1.0, vname("Vsq", (f.j,), n): -1.0,
                    P: -2 * KV2_PER_OHM_KW * f.r, Q: -2 * KV2_PER_OHM_KW * f.x,
                    I: -KV2_PER_OHM2_A2 * (f.r**2 + f.x**2)}
            inst.add_row({**drop, w: M}, "<=", M, eq="4.up", entity=e, n=n)
            inst.add_row({**drop, w: -M}, ">=", -M, eq="4.lo", entity=e, n=n)

            pbar, qbar = flow_limits(f, network, config)
            fp = pwl_square(inst, P, pbar, config.segments, prefix="pwlP", entity=e, n=n,
                            eq="5P", gate=w, selectors=config.pwl_selectors)
            fq = pwl_square(inst, Q, qbar, config.segments, prefix="pwlQ", entity=e, n=n,
                            eq="5Q", gate=w, selectors=config.pwl_selectors)
            row = {I: network.v_nom**2}
            for k, c in {**fp, **fq}.items():
                row[k] = row.get(k, 0.0) - c
            inst.add_row(row, "=", 0.0, eq="5", entity=e, n=n)

            inst.add_row({P: 1.0, w: -pbar}, "<=", 0.0, eq="6.hi", entity=e, n=n)
            inst.add_row({P: 1.0, w: pbar}, ">=", 0.0, eq="6.lo", entity=e, n=n)
            inst.add_row({Q: 1.0, w: -qbar}, "<=", 0.0, eq="7.hi", entity=e, n=n)
            inst.add_row({Q: 1.0, w: qbar}, ">=", 0.0, eq="7.lo", entity=e, n=n)
            inst.add_row({I: 1.0, w: -f.i_max**2}, "<=", 0.0, eq="9", entity=e, n=n)
        for b in sets.buses:
            inst.add_row({vname("Vsq", (b,), n): 1.0, vname("v", (b,), n): -vmin2}, ">=", 0.0,
                         eq="8", entity=(b,), n=n)

    # ---- radiality ------------------------------------------------------
    fnet = FictitiousNetwork.build(sets.buses, sets.feeders, sets.sources)
    radiality_rows(inst, fnet, N, binary_parents=config.binary_parents)

    # ---- generation -----------------------------------------------------
    for b in sets.buses:
        dg, es = sets.dgs.get(b), sets.ess.get(b)
        for n in range(N):
            pg, qg, v = vname("PG", (b,), n), vname("QG", (b,), n), vname("v", (b,), n)
            if dg is None and es is None:
                inst.add_row({pg: 1.0}, "=", 0.0, eq="21", entity=(b,), n=n)
                inst.add_row({qg: 1.0}, "=", 0.0, eq="22", entity=(b,), n=n)
                continue
            prow, qrow = {pg: 1.0}, {qg: 1.0}
            if dg is not None:
                pdg = add("PDG", (b,), n, lb=-math.inf)
                qdg = add("QDG", (b,), n, lb=-math.inf)
                prow[pdg] = -1.0
                qrow[qdg] = -1.0
            if es is not None:
                pes = add("PES", (b,), n, lb=-math.inf)
                qes = add("QES", (b,), n, lb=-math.inf)
                prow[pes] = -1.0
                qrow[qes] = -1.0
            eq_p = "23" if es is None else ("29" if dg is None else "23+29")
            eq_q = "24" if es is None else ("30" if dg is None else "24+30")
            inst.add_row(prow, "=", 0.0, eq=eq_p, entity=(b,), n=n)
            inst.add_row(qrow, "=", 0.0, eq=eq_q, entity=(b,), n=n)

    for b, dg in sets.dgs.items():
        ready = sets.ready[b]
        ramp = dg.ramp_rate * grid.step
        for n in range(N):
            pdg, qdg, v = vname("PDG", (b,), n), vname("QDG", (b,), n), vname("v", (b,), n)
            inst.add_row({pdg: 1.0, v: -dg.p_max}, "<=", 0.0, eq="25.hi", entity=(b,), n=n)
            if grid.moment(n) < ready - 1e-9:
                inst.add_row({pdg: 1.0}, "=", 0.0, eq="26", entity=(b,), n=n)
            else:
                inst.add_row({pdg: 1.0, v: -dg.p_min}, ">=", 0.0, eq="25.lo", entity=(b,), n=n)
            if dg.p_max > 0:
                inst.add_row({qdg: 1.0, pdg: -dg.q_max / dg.p_max}, "<=", 0.0, eq="28.hi",
                             entity=(b,), n=n)
                inst.add_row({qdg: 1.0, pdg: -dg.q_min / dg.p_max}, ">=", 0.0, eq="28.lo",
                             entity=(b,), n=n)
            else:
                inst.add_row({qdg: 1.0}, "=", 0.0, eq="28", entity=(b,), n=n)
            if n < N - 1 and grid.moment(n) >= ready - 1e-9:
                nxt = vname("PDG", (b,), n + 1)
                inst.add_row({nxt: 1.0, pdg: -1.0, v: dg.p_max}, "<=", ramp + dg.p_max,
                             eq="27.up", entity=(b,), n=n)
                inst.add_row({nxt: 1.0, pdg: -1.0, v: -dg.p_max}, ">=", -ramp - dg.p_max,
                             eq="27.dn", entity=(b,), n=n)

    for b, es in sets.ess.items():
        for n in range(N):
            v = vname("v", (b,), n)
            pch = add("Pch", (b,), n, ub=es.p_ch_max)
            pdis = add("Pdis", (b,), n, ub=es.p_dis_max)
            vch = add("vch", (b,), n, kind=BINARY)
            vdis = add("vdis", (b,), n, kind=BINARY)
            add("SoC", (b,), n, lb=es.soc_min, ub=es.soc_max)
            inst.add_row({vname("PES", (b,), n): 1.0, pdis: -1.0, pch: 1.0}, "=", 0.0,
                         eq="31", entity=(b,), n=n)
            inst.add_row({pch: 1.0, vch: -es.p_ch_max}, "<=", 0.0, eq="32", entity=(b,), n=n)
            inst.add_row({pdis: 1.0, vdis: -es.p_dis_max}, "<=", 0.0, eq="33", entity=(b,), n=n)
            inst.add_row({vch: 1.0, vdis: 1.0, v: -1.0}, "<=", 0.0, eq="34", entity=(b,), n=n)
        es_reactive_rows(inst, es, N, config.es_q_mode)
        for n in range(N - 1):
            inst.add_row({vname("SoC", (b,), n + 1): 1.0, vname("SoC", (b,), n): -1.0,
                          vname("Pch", (b,), n): -es.eta_ch * dt_h / es.capacity,
                          vname("Pdis", (b,), n): es.eta_dis * dt_h / es.capacity},
                         "=", 0.0, eq="36", entity=(b,), n=n)

    # ---- loads ----------------------------------------------------------
    for b in sets.buses:
        bus = network.buses[b]
        lam = config.lambda_min if bus.lambda_min is None else bus.lambda_min
        for n in range(N):
            v = vname("v", (b,), n)
            pl = {vname("PL", (b,), n): 1.0}
            ql = {vname("QL", (b,), n): 1.0}
            for c in range(3):
                p, q = vname(f"PL{c + 1}", (b,), n), vname(f"QL{c + 1}", (b,), n)
                pl[p] = -1.0
                ql[q] = -1.0
                inst.add_row({p: 1.0, v: -bus.load_p[c]}, "<=", 0.0, eq=str(39 + c), entity=(b,), n=n)
                ratio = bus.load_q[c] / bus.load_p[c] if bus.load_p[c] > 0 else 0.0
                inst.add_row({q: 1.0, p: -ratio}, "=", 0.0, eq=str(43 + c), entity=(b,), n=n)
            inst.add_row(pl, "=", 0.0, eq="38", entity=(b,), n=n)
            inst.add_row(ql, "=", 0.0, eq="42", entity=(b,), n=n)
            inst.add_row({vname("PL", (b,), n): 1.0, v: -lam * bus.total_p}, ">=", 0.0,
                         eq="46", entity=(b,), n=n)

    # ---- continuity -----------------------------------------------------
    for n in range(N - 1):
        for b in sets.buses:
            for c, eq in ((1, "47"), (2, "48")):
                inst.add_row({vname(f"PL{c}", (b,), n): 1.0, vname(f"PL{c}", (b,), n + 1): -1.0},
                             "<=", 0.0, eq=eq, entity=(b,), n=n)
            inst.add_row({vname("v", (b,), n): 1.0, vname("v", (b,), n + 1): -1.0}, "<=", 0.0,
                         eq="49", entity=(b,), n=n)
        for f in sets.feeders:
            e = (f.i, f.j)
            inst.add_row({vname("w", e, n): 1.0, vname("w", e, n + 1): -1.0}, "<=", 0.0,
                         eq="50", entity=e, n=n)

    # ---- boundary seeding -----------------------------------------------
    for b in sets.buses:
        inst.add_row({vname("v", (b,), 0): 1.0}, "=", float(obs.v.get(b, 0)), eq="51", entity=(b,), n=0)
        pl = obs.restored(b)
        for c in range(3):
            inst.add_row({vname(f"PL{c + 1}", (b,), 0): 1.0}, "=", float(pl[c]), eq="52",
                         entity=(b, c + 1), n=0)
        pg = float(obs.p_g.get(b, 0.0))
        if b in sets.dgs or b in sets.ess:
            band = config.seed_pg_band
            inst.add_row({vname("PG", (b,), 0): 1.0}, "<=", pg + band, eq="52", entity=(b, 0), n=0)
            inst.add_row({vname("PG", (b,), 0): 1.0}, ">=", pg - band, eq="52", entity=(b, 0), n=0)
        if b in sets.ess:
            es = sets.ess[b]
            soc = min(max(float(obs.soc.get(b, es.soc_min)), es.soc_min), es.soc_max)
            inst.add_row({vname("SoC", (b,), 0): 1.0}, "=", soc, eq="52", entity=(b, 4), n=0)
    for f in sets.feeders:
        inst.add_row({vname("w", (f.i, f.j), 0): 1.0}, "=", float(obs.w.get(f.key, 0)), eq="51",
                     entity=(f.i, f.j), n=0)

    _fix_structure(inst, sets, network, grid)
    return inst.canonicalize()


def _fix_structure(inst: MilpInstance, sets: CcpSets, network: Network, grid: TimeGrid) -> None:
    """Pin binaries whose value is forced by observations or topology."""
    N = grid.n_intervals
    obs = sets.observed
    dark = set()
    for b in sets.buses:
        on = obs.v.get(b, 0)
        for n in range(N):
            if n == 0 or on:
                inst.fix(vname("v", (b,), n), float(on) if n == 0 else 1.0)
            elif b not in sets.live:
                inst.fix(vname("v", (b,), n), 0.0)
        if not on and b not in sets.live:
            dark.add(b)
    for f in sets.feeders:
        on = obs.w.get(f.key, 0)
        for n in range(N):
            e = (f.i, f.j)
            if n == 0 or on:
                inst.fix(vname("w", e, n), float(on) if n == 0 else 1.0)
            elif f.i in dark or f.j in dark:
                inst.fix(vname("w", e, n), 0.0)
    # Segment selectors of feeders that stay open.
    for var in inst.variables:
        if var.family in ("pwlPseg", "pwlQseg"):
            e = var.entity[:2]
            if inst.var(vname("w", e, var.n)).ub == 0.0:
                var.lb = var.ub = 0.0
    # Binaries gated by a bus that is off at interval n.
    for b in sets.buses:
        for n in range(N):
            v = inst.var(vname("v", (b,), n))
            if v.ub > 0:
                continue
            for fam in ("vch", "vdis"):
                if inst.has_var(vname(fam, (b,), n)):
                    inst.fix(vname(fam, (b,), n), 0.0)
            if b in sets.ess:
                for k in range(len(sets.ess[b].q_capability)):
                    name = vname("qsel", (b, k), n)
                    if inst.has_var(name):
                        inst.fix(name, 0.0)
            name = vname("wfd", (0, b), n)
            if inst.has_var(name):
                inst.var(name).ub = 0.0
    # An unready DG without storage cannot root an island.
    for b, ready in sets.ready.items():
        if b in sets.ess:
            continue
        for n in range(N):
            if grid.moment(n) < ready - 1e-9:
                inst.var(vname("wfd", (0, b), n)).ub = 0.0
