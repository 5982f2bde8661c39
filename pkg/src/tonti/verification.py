"""Model verification against the independent references."""

from __future__ import annotations

import numpy as np

from .compiler import (
    compile_psi_state,
    compile_q_state,
    compile_static_node_potential,
    pencil_eigenvalues,
)
from .complex import boundary_1, boundary_2
from .errors import TontiError
from .oracle import OracleReport, duality_audit, mna_solve
from .quantities import TimeGrid
from .solver import (
    conservation_residual,
    constraint_residual,
    integrate,
    recover_branch_quantities,
    solve_static,
    static_branch_quantities,
    transformer_power_residual,
)

__all__ = ["verify_model"]


def verify_model(model, tolerance=1e-9, t_end=None, n_steps=2000) -> OracleReport:
    """Cross-check a model against the independent references.

    Resistive models are compared with nodal analysis and audited for
    node/mesh duality.  Dynamic models get a pencil comparison between
    the two dynamic paths (when transducer-free) and a short transient on
    each path whose balance, constraint and power residuals are checked.
    """
    cx = model.complex
    report = OracleReport()
    d1 = boundary_1(cx).toarray()
    if cx.has_meshes:
        d2 = boundary_2(cx).toarray()
        report.add("boundary of boundary", np.abs(d1 @ d2).max(initial=0), 0.0)
    resistive = not model.transducers and not model.has_reactive
    if resistive:
        ref = mna_solve(model)
        system = compile_static_node_potential(model)
        sol = solve_static(system)
        bq = static_branch_quantities(system, sol)
        report.add("potentials vs nodal analysis",
                   np.abs(sol.values - ref.potentials).max(initial=0.0), tolerance)
        report.add("currents vs nodal analysis",
                   np.abs(bq["j"] - ref.currents).max(initial=0.0), tolerance)
        if cx.has_meshes:
            for c in duality_audit(model).checks:
                report.add(f"duality {c.name}", c.deviation, c.tolerance)
        return report

    systems = {}
    for name, fn in (("psi", compile_psi_state), ("q", compile_q_state)):
        try:
            systems[name] = fn(model)
        except TontiError:
            continue
    if len(systems) == 2 and not model.transducers:
        a = pencil_eigenvalues(systems["psi"])
        b = pencil_eigenvalues(systems["q"])
        if a.shape == b.shape:
            dev = _multiset_distance(a, b)
        else:
            dev = np.inf
        report.add("pencil eigenvalues psi vs q", dev, 1e-6)
    for name, system in systems.items():
        span = t_end if t_end is not None else _default_span(system)
        grid = TimeGrid(0.0, span / n_steps, n_steps + 1)
        traj = recover_branch_quantities(integrate(system, grid))
        label = "node balance" if name == "psi" else "mesh balance"
        report.add(f"{name} {label}", conservation_residual(traj).max(initial=0.0), 1e-8)
        if system.n_constraints:
            report.add(f"{name} transformer constraints",
                       constraint_residual(traj).max(initial=0.0), tolerance)
            report.add(f"{name} transformer power",
                       transformer_power_residual(traj).max(initial=0.0), 1e-8)
    return report


def _multiset_distance(a, b):
    """Largest relative gap after greedy nearest matching."""
    b = list(b)
    worst = 0.0
    for x in a:
        k = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b[k]) / max(1.0, abs(x)))
        b.pop(k)
    return worst


def _default_span(system):
    lam = pencil_eigenvalues(system)
    if lam.size:
        return 10.0 / float(np.abs(lam).min())
    return 1.0
