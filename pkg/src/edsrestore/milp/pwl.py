"""Piecewise-linear over-approximation of y**2 on uniform breakpoints."""

from __future__ import annotations

import numpy as np

from .instance import BINARY, MilpInstance


def breakpoints(ybar: float, segments: int) -> np.ndarray:
    """The 2*segments + 1 uniform nodes -ybar, ..., 0, ..., ybar."""
    if not ybar > 0:
        raise ValueError(f"PWL bound must be positive, got {ybar}")
    if segments < 1:
        raise ValueError("need at least one segment per side")
    return np.linspace(-ybar, ybar, 2 * segments + 1)


def pwl_value(y, ybar: float, segments: int):
    """Chord interpolation of y**2 through the uniform nodes (vectorized)."""
    nodes = breakpoints(ybar, segments)
    return np.interp(y, nodes, nodes**2)


def max_error(ybar: float, segments: int) -> float:
    h = ybar / segments
    return h * h / 4.0


def pwl_square(inst: MilpInstance, y: str, ybar: float, segments: int, *,
               prefix: str, entity: tuple, n: int | None = None, eq: str = "5",
               gate: str | None = None, selectors: bool = True) -> dict[str, float]:
    """Add convex-combination rows making the returned expression equal the
    chord interpolation of ``y**2``.

    With ``selectors`` each segment gets a binary and only the two nodes of
    the chosen segment may carry weight (SOS2 by binaries).  Without them the
    weights may spread over any nodes, which still bounds the expression from
    below by the chord.  ``gate`` (a 0/1 variable) scales the weight sum, so a
    gated-off instance forces ``y = 0`` and the expression to 0.

    Returns ``{var: coef}`` for the linear expression of the square.
    """
    nodes = breakpoints(ybar, segments)
    lam = []
    for k in range(len(nodes)):
        lam.append(inst.add_var(_name(prefix, "lam", entity, k, n), lb=0.0, ub=1.0,
                                family=f"{prefix}lam", entity=entity + (k,), n=n))
    total = {v: 1.0 for v in lam}
    if gate is None:
        inst.add_row(total, "=", 1.0, eq=f"{eq}.sum", entity=entity, n=n)
    else:
        inst.add_row({**total, gate: -1.0}, "=", 0.0, eq=f"{eq}.sum", entity=entity, n=n)
    link = {v: float(b) for v, b in zip(lam, nodes)}
    link[y] = link.get(y, 0.0) - 1.0
    inst.add_row(link, "=", 0.0, eq=f"{eq}.y", entity=entity, n=n)

    if selectors:
        z = [inst.add_var(_name(prefix, "seg", entity, s, n), kind=BINARY,
                          family=f"{prefix}seg", entity=entity + (s,), n=n)
             for s in range(len(nodes) - 1)]
        ztot = {v: 1.0 for v in z}
        if gate is None:
            inst.add_row(ztot, "=", 1.0, eq=f"{eq}.seg", entity=entity, n=n)
        else:
            inst.add_row({**ztot, gate: -1.0}, "=", 0.0, eq=f"{eq}.seg", entity=entity, n=n)
        last = len(nodes) - 1
        for k, lv in enumerate(lam):
            row = {lv: 1.0}
            if k > 0:
                row[z[k - 1]] = -1.0
            if k < last:
                row[z[k]] = -1.0
            inst.add_row(row, "<=", 0.0, eq=f"{eq}.adj", entity=entity + (k,), n=n)

    return {v: float(b * b) for v, b in zip(lam, nodes)}


def _name(prefix: str, kind: str, entity: tuple, k: int, n: int | None) -> str:
    ent = "_".join(str(e) for e in entity)
    tail = "" if n is None else f"_n{n}"
    return f"{prefix}{kind}_{ent}_{k}{tail}"


def sampled_gap(ybar: float, segments: int, samples: int = 1000) -> tuple[float, float]:
    """(min, max) of chord - y**2 over a uniform sample grid."""
    ys = np.linspace(-ybar, ybar, samples)
    gap = pwl_value(ys, ybar, segments) - ys**2
    return float(gap.min()), float(gap.max())


