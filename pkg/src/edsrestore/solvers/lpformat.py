"""CPLEX-style LP text writer and the matching parser.

Every variable appears in the Bounds section in canonical order, so parsing
restores the variable order exactly.  Row provenance rides in a comment line
directly above each row.  Floats are written with ``repr`` for exact
round-trips.
"""

from __future__ import annotations

import math
import re

from ..milp.instance import BINARY, CONTINUOUS, MilpInstance

TERMS_PER_LINE = 6
_SENSE_OUT = {"<=": "<=", ">=": ">=", "=": "="}


def _num(x: float) -> str:
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def _terms(coefs: dict[str, float]) -> list[str]:
    out = []
    for k, (name, c) in enumerate(coefs.items()):
        sign = "-" if c < 0 else "+"
        if k == 0 and sign == "+":
            out.append(f"{_num(abs(c))} {name}")
        else:
            out.append(f"{sign} {_num(abs(c))} {name}")
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    for k in range(0, max(len(terms), 1), TERMS_PER_LINE):
        chunk = " ".join(terms[k:k + TERMS_PER_LINE])
        lines.append((head if k == 0 else "   ") + chunk)
    if tail:
        lines[-1] = (lines[-1] + " " + tail) if lines[-1].strip() else lines[-1] + tail
    return lines


def export_lp(inst: MilpInstance) -> str:
    lines = ["\\ edsrestore MILP", f"\\ objective_constant {_num(inst.objective_constant)}"]
    lines.append("Maximize" if inst.sense == "max" else "Minimize")
    lines += _wrap(" obj: ", _terms(inst.objective))
    lines.append("Subject To")
    first = inst.variables[0].name if inst.variables else None
    for r in inst.constraints:
        coefs = r.coefs
        if not coefs:
            if first is None:
                raise ValueError(f"row {r.name} has no terms and the instance has no variables")
            coefs = {first: 0.0}
        lines.append(f"\\ {r.tag}")
        lines += _wrap(f" {r.name}: ", _terms(coefs), f"{_SENSE_OUT[r.sense]} {_num(r.rhs)}")
    lines.append("Bounds")
    for v in inst.variables:
        if v.lb == v.ub:
            lines.append(f" {v.name} = {_num(v.lb)}")
        elif v.lb == -math.inf and v.ub == math.inf:
            lines.append(f" {v.name} free")
        else:
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    lines.append("Binaries")
    bins = [v.name for v in inst.variables if v.kind == BINARY]
    for k in range(0, len(bins), TERMS_PER_LINE):
        lines.append(" " + " ".join(bins[k:k + TERMS_PER_LINE]))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TAG_RE = re.compile(r"eq(\S+)(?: entity=(\S+))?(?: n=(\d+))?$")


def _parse_float(tok: str) -> float:
    t = tok.lower()
    if t in ("+inf", "inf", "+infinity", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _entity(text: str | None) -> tuple:
    if not text:
        return ()
    out = []
    for part in text.split(","):
        try:
            out.append(int(part))
        except ValueError:
            out.append(part)
    return tuple(out)


def _linear(tokens: list[str]) -> dict[str, float]:
    coefs: dict[str, float] = {}
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in ("+", "-"):
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            coef = _parse_float(tok)
            continue
        except ValueError:
            pass
        c = sign * (1.0 if coef is None else coef)
        coefs[tok] = coefs.get(tok, 0.0) + c
        sign, coef = 1.0, None
    return coefs


def parse_lp(text: str) -> MilpInstance:
    sections: dict[str, list[str]] = {}
    current = None
    const = 0.0
    sense = "max"
    heads = {"maximize": "obj", "maximise": "obj", "minimize": "obj", "minimise": "obj",
             "subject to": "rows", "st": "rows", "s.t.": "rows", "bounds": "bounds",
             "binaries": "bin", "binary": "bin", "end": "end"}
    for raw in text.splitlines():
        line = raw.rstrip()
        low = line.strip().lower()
        if low.startswith("\\ objective_constant"):
            const = _parse_float(low.split()[-1])
            continue
        if low in heads:
            current = heads[low]
            if low.startswith("min"):
                sense = "min"
            sections.setdefault(current, [])
            continue
        if current is None or not line.strip():
            continue
        sections[current].append(line)

    inst = MilpInstance(sense=sense, objective_constant=const)
    bins = set()
    for line in sections.get("bin", []):
        bins.update(line.split())
    for line in sections.get("bounds", []):
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            name, lb, ub = toks[0], -math.inf, math.inf
        elif len(toks) == 3 and toks[1] == "=":
            name, lb, ub = toks[0], _parse_float(toks[2]), _parse_float(toks[2])
        elif len(toks) == 5:
            name, lb, ub = toks[2], _parse_float(toks[0]), _parse_float(toks[4])
        else:
            raise ValueError(f"unsupported bound line: {line.strip()}")
        inst.add_var(name, BINARY if name in bins else CONTINUOUS, lb, ub,
                     family=name.split("_")[0])
    for name in sorted(bins - set(inst._index)):
        inst.add_var(name, BINARY, 0.0, 1.0, family=name.split("_")[0])

    obj_text = " ".join(l.strip() for l in sections.get("obj", []))
    obj_text = obj_text.split(":", 1)[1] if ":" in obj_text else obj_text
    for name, c in _linear(obj_text.split()).items():
        if c != 0.0:
            if name not in inst._index:
                inst.add_var(name, family=name.split("_")[0])
            inst.objective[name] = c

    rows: list[tuple[str | None, str, list[str]]] = []
    tag = None
    for line in sections.get("rows", []):
        s = line.strip()
        if s.startswith("\\"):
            tag = s[1:].strip()
            continue
        m = re.match(r"^([^\s:]+):\s*(.*)$", s)
        if m:
            rows.append((tag, m.group(1), m.group(2).split()))
            tag = None
        elif rows:
            rows[-1][2].extend(s.split())
    for tag, name, toks in rows:
        idx = next(k for k, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>"))
        op = {"=<": "<=", "=>": ">="}.get(toks[idx], toks[idx])
        rhs = _parse_float(toks[idx + 1])
        coefs = _linear(toks[:idx])
        for k in coefs:
            if k not in inst._index:
                inst.add_var(k, family=k.split("_")[0])
        eq, ent, n = "lp", (), None
        if tag:
            m = _TAG_RE.match(tag)
            if m:
                eq, ent = m.group(1), _entity(m.group(2))
                n = int(m.group(3)) if m.group(3) is not None else None
        inst.add_row(coefs, op, rhs, eq=eq, entity=ent, n=n, name=name)
    return inst
