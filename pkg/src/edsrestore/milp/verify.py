"""Independent numeric and structural re-check of a schedule.

Works from the schedule's per-interval series only; it never looks at the
MILP rows, so a builder bug and a solver bug cannot cancel out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..consensus import CcpView
from ..grid import Network, TimeGrid, check_islands
from .builder import (KV2_PER_OHM2_A2, KV2_PER_OHM_KW, KW_PER_OHM_A2, MilpConfig, ccp_sets,
                      flow_limits)
from .pwl import pwl_value
from .schedule import Schedule


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-6
    integrality: float = 1e-6


@dataclass(frozen=True)
class Violation:
    tag: str
    entity: str
    n: int | None
    residual: float
    detail: str = ""

    def __str__(self) -> str:
        where = f" n={self.n}" if self.n is not None else ""
        return f"eq{self.tag} entity={self.entity}{where}: residual {self.residual:.3g} {self.detail}".rstrip()


@dataclass
class VerificationReport:
    violations: list[Violation] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def tags(self) -> set[str]:
        return {v.tag for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return f"ok ({self.checked} checks)"
        return "\n".join(str(v) for v in self.violations)


class _Checker:
    def __init__(self, tol: float):
        self.tol = tol
        self.report = VerificationReport()

    def rel(self, tag, entity, n, terms, sense, rhs=0.0, detail=""):
        """Check sum(terms) <sense> rhs with the solver's scaled tolerance."""
        lhs = float(sum(terms))
        scale = max([1.0, abs(rhs)] + [abs(t) for t in terms])
        res = lhs - rhs
        self.report.checked += 1
        lim = self.tol * scale
        bad = (sense == "<=" and res > lim) or (sense == ">=" and res < -lim) or \
              (sense == "=" and abs(res) > lim)
        if bad:
            self.report.violations.append(Violation(tag, str(entity), n, res, detail))

    def flag(self, tag, entity, n, ok, detail=""):
        self.report.checked += 1
        if not ok:
            self.report.violations.append(Violation(tag, str(entity), n, 1.0, detail))


def verify_schedule(schedule: Schedule, view: CcpView, network: Network, grid: TimeGrid,
                    tolerances: Tolerances = Tolerances(),
                    config: MilpConfig = MilpConfig()) -> VerificationReport:
    sets = ccp_sets(view, network, grid)
    obs = sets.observed
    N = grid.n_intervals
    chk = _Checker(tolerances.feas)
    if schedule.n_intervals != N or abs(schedule.t_c - grid.t_c) > 1e-9 \
            or abs(schedule.step - grid.step) > 1e-9:
        chk.flag("grid", "schedule", None, False,
                 f"schedule covers {schedule.n_intervals} x {schedule.step} min from {schedule.t_c}")
        return chk.report
    S = schedule.get
    dt_h = grid.dt_hours
    vmin2, vmax2 = network.v_min**2, network.v_max**2

    for fam in ("v", "w", "vch", "vdis", "qsel"):
        for ent, row in schedule.series.get(fam, {}).items():
            for n, x in enumerate(row):
                chk.flag("int", f"{fam}:{ent}", n, abs(x - round(x)) <= tolerances.integrality)

    for n in range(N):
        v = {b: int(round(S("v", b, n))) for b in sets.buses}
        w = {f.key: int(round(S("w", f.key, n))) for f in sets.feeders}

        # power balance
        pin = {b: [S("PG", b, n), -S("PL", b, n)] for b in sets.buses}
        qin = {b: [S("QG", b, n), -S("QL", b, n)] for b in sets.buses}
        for f in sets.feeders:
            P, Q, I = S("P", f.key, n), S("Q", f.key, n), S("Isq", f.key, n)
            pin[f.j].append(P)
            qin[f.j].append(Q)
            pin[f.i] += [-P, -f.r * KW_PER_OHM_A2 * I]
            qin[f.i] += [-Q, -f.x * KW_PER_OHM_A2 * I]
        for b in sets.buses:
            chk.rel("2", b, n, pin[b], "=")
            chk.rel("3", b, n, qin[b], "=")

        for f in sets.feeders:
            P, Q, I = S("P", f.key, n), S("Q", f.key, n), S("Isq", f.key, n)
            pbar, qbar = flow_limits(f, network, config)
            wf = w[f.key]
            chk.rel("6", f.key, n, [abs(P)], "<=", wf * pbar)
            chk.rel("7", f.key, n, [abs(Q)], "<=", wf * qbar)
            chk.rel("9", f.key, n, [I], "<=", wf * f.i_max**2)
            chk.rel("9", f.key, n, [I], ">=", 0.0)
            if wf:
                chk.flag("15", f.key, n, v[f.i] == 1 and v[f.j] == 1, "energized feeder with dark end")
                chk.rel("4", f.key, n,
                        [S("Vsq", f.i, n), -S("Vsq", f.j, n), -2 * KV2_PER_OHM_KW * f.r * P,
                         -2 * KV2_PER_OHM_KW * f.x * Q, -KV2_PER_OHM2_A2 * (f.r**2 + f.x**2) * I],
                        "=")
            chord = float(pwl_value(P, pbar, config.segments) + pwl_value(Q, qbar, config.segments))
            sense = "=" if config.pwl_selectors else ">="
            chk.rel("5", f.key, n, [network.v_nom**2 * I, -chord], sense)

        for b in sets.buses:
            if v[b]:
                chk.rel("8", b, n, [S("Vsq", b, n)], ">=", vmin2)
                chk.rel("8", b, n, [S("Vsq", b, n)], "<=", vmax2)

        on_b = [b for b in sets.buses if v[b]]
        on_e = [(f.i, f.j) for f in sets.feeders if w[f.key]]
        rep = check_islands(on_b, on_e, [b for b in sets.sources if v[b]])
        chk.flag("13-20", "radiality", n, rep.ok, f"clause {rep.clause}: {rep.detail}")

        # generation
        for b in sets.buses:
            dg, es = sets.dgs.get(b), sets.ess.get(b)
            pg, qg = S("PG", b, n), S("QG", b, n)
            if dg is None and es is None:
                chk.rel("21", b, n, [pg], "=")
                chk.rel("22", b, n, [qg], "=")
                continue
            ps = [pg] + ([-S("PDG", b, n)] if dg else []) + ([-S("PES", b, n)] if es else [])
            qs = [qg] + ([-S("QDG", b, n)] if dg else []) + ([-S("QES", b, n)] if es else [])
            chk.rel("23/29", b, n, ps, "=")
            chk.rel("24/30", b, n, qs, "=")
        for b, dg in sets.dgs.items():
            p, q = S("PDG", b, n), S("QDG", b, n)
            chk.rel("25", b, n, [p], "<=", v[b] * dg.p_max)
            t = grid.moment(n)
            if t < sets.ready[b] - 1e-9:
                chk.rel("26", b, n, [p], "=", 0.0, f"DG ready at {sets.ready[b]}")
            else:
                chk.rel("25", b, n, [p], ">=", v[b] * dg.p_min)
            if dg.p_max > 0:
                chk.rel("28", b, n, [q, -dg.q_max / dg.p_max * p], "<=")
                chk.rel("28", b, n, [q, -dg.q_min / dg.p_max * p], ">=")
            if n < N - 1 and t >= sets.ready[b] - 1e-9 and v[b]:
                ramp = dg.ramp_rate * grid.step
                chk.rel("27", b, n, [abs(S("PDG", b, n + 1) - p)], "<=", ramp)
        for b, es in sets.ess.items():
            pch, pdis = S("Pch", b, n), S("Pdis", b, n)
            vch, vdis = round(S("vch", b, n)), round(S("vdis", b, n))
            chk.rel("31", b, n, [S("PES", b, n), -pdis, pch], "=")
            chk.rel("32", b, n, [pch], "<=", vch * es.p_ch_max)
            chk.rel("32", b, n, [pch], ">=", 0.0)
            chk.rel("33", b, n, [pdis], "<=", vdis * es.p_dis_max)
            chk.rel("33", b, n, [pdis], ">=", 0.0)
            chk.flag("34", b, n, vch + vdis <= v[b])
            q = S("QES", b, n)
            if not v[b]:
                chk.rel("35", b, n, [q], "=")
            elif config.es_q_mode == "conservative_fixed":
                _, _, qlo, qhi = es.q_capability[-1]
                chk.rel("35", b, n, [q], "<=", qhi * es.rated)
                chk.rel("35", b, n, [q], ">=", qlo * es.rated)
            else:
                pabs = min(pch + pdis, es.rated)
                qlo, qhi = es.q_range(pabs, tol=tolerances.feas)
                chk.rel("35", b, n, [q], "<=", qhi)
                chk.rel("35", b, n, [q], ">=", qlo)
            soc = S("SoC", b, n)
            chk.rel("37", b, n, [soc], ">=", es.soc_min)
            chk.rel("37", b, n, [soc], "<=", es.soc_max)
            if n < N - 1:
                delta = (pch * es.eta_ch - pdis * es.eta_dis) * dt_h / es.capacity
                chk.rel("36", b, n, [S("SoC", b, n + 1), -soc, -delta], "=")

        # loads
        for b in sets.buses:
            bus = network.buses[b]
            lam = config.lambda_min if bus.lambda_min is None else bus.lambda_min
            pls = [S(f"PL{c + 1}", b, n) for c in range(3)]
            qls = [S(f"QL{c + 1}", b, n) for c in range(3)]
            chk.rel("38", b, n, [S("PL", b, n)] + [-x for x in pls], "=")
            chk.rel("42", b, n, [S("QL", b, n)] + [-x for x in qls], "=")
            for c in range(3):
                chk.rel(str(39 + c), b, n, [pls[c]], "<=", v[b] * bus.load_p[c])
                chk.rel(str(39 + c), b, n, [pls[c]], ">=", 0.0)
                ratio = bus.load_q[c] / bus.load_p[c] if bus.load_p[c] > 0 else 0.0
                chk.rel(str(43 + c), b, n, [qls[c], -ratio * pls[c]], "=")
            chk.rel("46", b, n, [S("PL", b, n)], ">=", v[b] * lam * bus.total_p)

        # continuity
        if n < N - 1:
            for b in sets.buses:
                chk.rel("47", b, n, [S("PL1", b, n), -S("PL1", b, n + 1)], "<=")
                chk.rel("48", b, n, [S("PL2", b, n), -S("PL2", b, n + 1)], "<=")
                chk.flag("49", b, n, v[b] <= round(S("v", b, n + 1)))
            for f in sets.feeders:
                chk.flag("50", f.key, n, w[f.key] <= round(S("w", f.key, n + 1)))

    # boundary seeding
    for b in sets.buses:
        chk.flag("51", b, 0, round(S("v", b, 0)) == obs.v.get(b, 0), "bus state differs from observation")
        for c, x in enumerate(obs.restored(b)):
            chk.rel("52", f"{b}:PL{c + 1}", 0, [S(f"PL{c + 1}", b, 0)], "=", float(x))
        if b in sets.dgs or b in sets.ess:
            pg = float(obs.p_g.get(b, 0.0))
            chk.rel("52", f"{b}:PG", 0, [abs(S("PG", b, 0) - pg)], "<=", config.seed_pg_band)
        if b in sets.ess:
            chk.rel("52", f"{b}:SoC", 0, [S("SoC", b, 0)], "=", float(obs.soc.get(b, 0.0)))
    for f in sets.feeders:
        chk.flag("51", f.key, 0, round(S("w", f.key, 0)) == obs.w.get(f.key, 0),
                 "feeder state differs from observation")
    return chk.report


def replay_soc(soc0: float, p_ch, p_dis, eta_ch: float, eta_dis: float, capacity: float,
               step_min: float) -> np.ndarray:
    """SoC trajectory from per-interval charge/discharge powers (kW)."""
    p_ch = np.asarray(p_ch, dtype=float)
    p_dis = np.asarray(p_dis, dtype=float)
    delta = (p_ch * eta_ch - p_dis * eta_dis) * (step_min / 60.0) / capacity
    return soc0 + np.concatenate([[0.0], np.cumsum(delta)])
