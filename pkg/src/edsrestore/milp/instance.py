"""Solver-neutral MILP container with provenance on every row."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

CONTINUOUS = "continuous"
BINARY = "binary"
SENSES = ("<=", "=", ">=")


@dataclass
class Var:
    name: str
    kind: str = CONTINUOUS
    lb: float = 0.0
    ub: float = math.inf
    family: str = ""
    entity: tuple = ()
    n: int | None = None


@dataclass
class Row:
    name: str
    coefs: dict[str, float]
    sense: str
    rhs: float
    eq: str = ""
    entity: tuple = ()
    n: int | None = None

    @property
    def tag(self) -> str:
        ent = ",".join(str(e) for e in self.entity)
        parts = [f"eq{self.eq}"]
        if ent:
            parts.append(f"entity={ent}")
        if self.n is not None:
            parts.append(f"n={self.n}")
        return " ".join(parts)


_EQ_RE = re.compile(r"(\d*)(.*)")


def _eq_key(eq: str) -> tuple:
    m = _EQ_RE.fullmatch(eq)
    num, rest = m.group(1), m.group(2)
    return (int(num) if num else 10**6, rest)


@dataclass
class MilpInstance:
    """Variables, rows and a maximization objective.

    ``family_order`` fixes the canonical variable ordering; unknown families
    sort after the listed ones, alphabetically.
    """

    variables: list[Var] = field(default_factory=list)
    constraints: list[Row] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    sense: str = "max"
    family_order: tuple[str, ...] = ()
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    # ---- construction -------------------------------------------------
    def add_var(self, name: str, kind: str = CONTINUOUS, lb: float = 0.0, ub: float = math.inf,
                family: str = "", entity: tuple = (), n: int | None = None) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if kind == BINARY:
            lb, ub = max(0.0, float(lb)), min(1.0, float(ub))
        self._index[name] = len(self.variables)
        self.variables.append(Var(name, kind, float(lb), float(ub), family, tuple(entity), n))
        return name

    def add_row(self, coefs, sense: str, rhs: float, eq: str, entity: tuple = (),
                n: int | None = None, name: str | None = None) -> Row:
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense}")
        merged: dict[str, float] = {}
        items = coefs.items() if isinstance(coefs, dict) else coefs
        for var, c in items:
            if var not in self._index:
                raise ValueError(f"row eq{eq} references undeclared variable {var}")
            merged[var] = merged.get(var, 0.0) + float(c)
        merged = {k: v for k, v in merged.items() if v != 0.0}
        if name is None:
            name = f"c{len(self.constraints)}"
        row = Row(name, merged, sense, float(rhs), eq, tuple(entity), n)
        self.constraints.append(row)
        return row

    def var(self, name: str) -> Var:
        return self.variables[self._index[name]]

    def has_var(self, name: str) -> bool:
        return name in self._index

    def fix(self, name: str, value: float) -> None:
        v = self.var(name)
        v.lb = v.ub = float(value)

    # ---- canonical ordering -------------------------------------------
    def _family_rank(self, fam: str) -> tuple:
        if fam in self.family_order:
            return (self.family_order.index(fam), "")
        return (len(self.family_order), fam)

    def canonicalize(self) -> "MilpInstance":
        """Sort variables by (family, entity, interval) and rows by
        (tag, entity, interval); rename rows to their final position."""
        self.variables.sort(key=lambda v: (self._family_rank(v.family), v.entity,
                                           -1 if v.n is None else v.n, v.name))
        self._index = {v.name: k for k, v in enumerate(self.variables)}
        self.constraints.sort(key=lambda r: (_eq_key(r.eq), r.entity,
                                             -1 if r.n is None else r.n, r.name))
        for k, row in enumerate(self.constraints):
            row.name = f"c{k}"
            row.coefs = dict(sorted(row.coefs.items(), key=lambda kv: self._index[kv[0]]))
        self.objective = dict(sorted(self.objective.items(), key=lambda kv: self._index[kv[0]]))
        return self

    # ---- queries ------------------------------------------------------
    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def binaries(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.kind == BINARY]

    def free_binaries(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.kind == BINARY and v.lb != v.ub]

    def problems(self) -> list[str]:
        out = []
        for v in self.variables:
            if v.kind == BINARY and not ({v.lb, v.ub} <= {0.0, 1.0}):
                out.append(f"binary {v.name} has bounds [{v.lb}, {v.ub}]")
            if v.lb > v.ub:
                out.append(f"variable {v.name} has lb > ub")
        for r in self.constraints:
            if not r.eq:
                out.append(f"row {r.name} has no provenance tag")
            for k in r.coefs:
                if k not in self._index:
                    out.append(f"row {r.name} references undeclared {k}")
        for k in self.objective:
            if k not in self._index:
                out.append(f"objective references undeclared {k}")
        return out

    def evaluate(self, x: dict[str, float]) -> float:
        return self.objective_constant + sum(c * x.get(k, 0.0) for k, c in self.objective.items())

    def violations(self, x: dict[str, float], tol: float = 1e-6) -> list[tuple[str, float]]:
        """Rows and bounds violated by ``x`` beyond ``tol`` scaled by row size."""
        out = []
        for v in self.variables:
            val = x.get(v.name, 0.0)
            if val < v.lb - tol * max(1.0, abs(v.lb)) or val > v.ub + tol * max(1.0, abs(v.ub)):
                out.append((f"bound {v.name}", val))
            if v.kind == BINARY and abs(val - round(val)) > tol:
                out.append((f"integrality {v.name}", val))
        for r in self.constraints:
            terms = [c * x.get(k, 0.0) for k, c in r.coefs.items()]
            lhs = sum(terms)
            scale = max([1.0, abs(r.rhs)] + [abs(t) for t in terms])
            res = lhs - r.rhs
            bad = (r.sense == "<=" and res > tol * scale) or \
                  (r.sense == ">=" and res < -tol * scale) or \
                  (r.sense == "=" and abs(res) > tol * scale)
            if bad:
                out.append((f"{r.name} [{r.tag}]", res))
        return out

    # ---- array form (minimization) ------------------------------------
    def to_arrays(self):
        """Return ``(c, A, row_lb, row_ub, lb, ub, integrality)`` for
        *minimizing* ``c @ x`` (the max objective is negated)."""
        nv = len(self.variables)
        sign = -1.0 if self.sense == "max" else 1.0
        c = np.zeros(nv)
        for k, coef in self.objective.items():
            c[self._index[k]] = sign * coef
        rows, cols, vals = [], [], []
        rlb = np.empty(len(self.constraints))
        rub = np.empty(len(self.constraints))
        for i, r in enumerate(self.constraints):
            for k, coef in r.coefs.items():
                rows.append(i)
                cols.append(self._index[k])
                vals.append(coef)
            rlb[i] = r.rhs if r.sense in ("=", ">=") else -np.inf
            rub[i] = r.rhs if r.sense in ("=", "<=") else np.inf
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(self.constraints), nv))
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        integrality = np.array([1 if v.kind == BINARY else 0 for v in self.variables])
        return c, A, rlb, rub, lb, ub, integrality

    def structurally_equal(self, other: "MilpInstance", rel: float = 0.0) -> bool:
        if self.sense != other.sense or len(self.variables) != len(other.variables):
            return False
        for a, b in zip(self.variables, other.variables):
            if (a.name, a.kind, a.lb, a.ub) != (b.name, b.kind, b.lb, b.ub):
                return False
        if self.objective != other.objective or len(self.constraints) != len(other.constraints):
            return False
        for a, b in zip(self.constraints, other.constraints):
            if (a.name, a.sense, a.rhs, a.coefs, a.tag) != (b.name, b.sense, b.rhs, b.coefs, b.tag):
                return False
        return True
