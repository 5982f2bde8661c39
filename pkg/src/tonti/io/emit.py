"""Text serializations of compiled systems and trajectories."""

from __future__ import annotations

import io
import json
from fractions import Fraction

import numpy as np

__all__ = ["emit_equations", "emit_trajectory", "format_number"]


def format_number(x) -> str:
    """Stable text for a matrix entry.

    Rationals print as ``p`` or ``p/q``; floats use the shortest text that
    reads back to the same double, and integral floats drop the decimal
    point.
    """
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    try:
        value = float(x)
    except TypeError:
        return str(x)
    if value == 0:
        return "0"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _labels(ids):
    return " ".join(ids) if len(ids) else "-"


def _matrix_block(out, name, mat, row_ids, col_ids):
    mat = np.asarray(mat, dtype=object).reshape(len(row_ids), len(col_ids))
    out.write(f"{name} [{len(row_ids)}x{len(col_ids)}] cols: {_labels(col_ids)}\n")
    width = max((len(r) for r in row_ids), default=0)
    for i, r in enumerate(row_ids):
        entries = " ".join(format_number(v) for v in mat[i])
        out.write(f"  {r.ljust(width)} : {entries}\n".rstrip() + "\n")


def _vector_block(out, name, vec, row_ids):
    out.write(f"{name} [{len(row_ids)}]\n")
    width = max((len(r) for r in row_ids), default=0)
    for r, v in zip(row_ids, vec):
        out.write(f"  {r.ljust(width)} : {format_number(v)}\n")


def _constraint_ids(system):
    return tuple(f"c{k + 1}" for k in range(system.n_constraints))


def emit_equations(system, format: str = "matrix", t0: float = 0.0) -> str:
    """Serialize a compiled system.

    ``matrix`` gives a labeled dense dump of ``M``, ``D``, ``K``, ``B``,
    the constraint rows and both right-hand sides at ``t0``.  ``json``
    serializes the same data plus every source coupling matrix.
    """
    f0 = system.forcing(t0)
    g0 = system.constraint_forcing(t0)
    states, aux = tuple(system.state_ids), tuple(system.aux_ids)
    cons = _constraint_ids(system)
    if format == "matrix":
        out = io.StringIO()
        out.write(f"path: {system.path}\n")
        out.write(f"state: {system.state_kind.name} ({system.state_kind.symbol})\n")
        out.write(f"unknowns: {system.n_states} states + {system.aux_count} aux = "
                  f"{system.n_unknowns}\n")
        out.write(f"equations: {system.n_states} dynamic + {system.n_constraints} constraint = "
                  f"{system.n_equations}\n")
        out.write("system: M x'' + D x' + K x + B aux = f(t); A_state x' + A_aux aux = g(t)\n")
        for name in ("M", "D", "K"):
            _matrix_block(out, name, getattr(system, name), states, states)
        _matrix_block(out, "B", system.B, states, aux)
        _matrix_block(out, "A_state", system.A_state, cons, states)
        _matrix_block(out, "A_aux", system.A_aux, cons, aux)
        _vector_block(out, f"f({format_number(t0)})", f0, states)
        _vector_block(out, f"g({format_number(t0)})", g0, cons)
        return out.getvalue()
    if format == "json":
        def conv(mat):
            return [[_json_number(v) for v in row] for row in np.asarray(mat, dtype=object)]

        cs = system.constitutive
        doc = {
            "path": system.path,
            "state_kind": system.state_kind.name,
            "states": list(states),
            "aux": list(aux),
            "constraints": list(cons),
            "branches": list(cs.branch_ids),
            "M": conv(system.M),
            "D": conv(system.D),
            "K": conv(system.K),
            "B": conv(system.B),
            "A_state": conv(system.A_state),
            "A_aux": conv(system.A_aux),
            "forcing_couplings": {k: conv(v) for k, v in sorted(system.forcing_couplings.items())},
            "constraint_couplings": {
                k: conv(v) for k, v in sorted(system.constraint_couplings.items())
            },
            "sources": {
                "effort": {cs.branch_ids[i]: s.spec() for i, s in sorted(cs.effort_sources.items())},
                "flow": {cs.branch_ids[i]: s.spec() for i, s in sorted(cs.flow_sources.items())},
            },
            "t0": t0,
            "f_t0": [float(v) for v in f0],
            "g_t0": [float(v) for v in g0],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {format!r}; use 'matrix' or 'json'")


def _json_number(v):
    try:
        value = float(v)
    except TypeError:
        return str(v)
    return 0.0 if value == 0 else value


def emit_trajectory(trajectory, model=None, branches: bool = False) -> str:
    """CSV of a trajectory.

    Columns are ``t``, one ``<symbol>_<cell>`` column per retained state,
    one column per transformer unknown and, with ``branches=True``, one
    ``v_<branch>`` and one ``j_<branch>`` column per branch.  Values use
    17 significant digits; lines end with LF.
    """
    s = trajectory.system
    sym = s.state_kind.symbol
    header = ["t"] + [f"{sym}_{c}" for c in s.state_ids] + list(s.aux_ids)
    cols = [trajectory.times[:, None], trajectory.states, trajectory.aux]
    if branches:
        if not trajectory.branch_quantities:
            from ..solver import recover_branch_quantities

            recover_branch_quantities(trajectory, model, s)
        bq = trajectory.branch_quantities
        ids = s.constitutive.branch_ids
        header += [f"v_{b}" for b in ids] + [f"j_{b}" for b in ids]
        cols += [bq["v"], bq["j"]]
    data = np.hstack([np.asarray(c, dtype=float) for c in cols])
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in data:
        out.write(",".join("%.17g" % (0.0 if v == 0 else v) for v in row) + "\n")
    return out.getvalue()
