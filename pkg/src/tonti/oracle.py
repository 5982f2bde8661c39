"""Independent reference computations for cross-checking the compiler.

Nothing here uses the compiler's assembly code.  Static models are solved
by modified nodal analysis from element stamps, the series RLC circuit
has a closed form, and the node/mesh duality audit rebuilds its own
incidence matrices from the raw endpoint and mesh data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .elements import ElementKind
from .errors import ReactiveElementPresent, SingularSystem, TransducerPresent

__all__ = [
    "Check",
    "MNASolution",
    "OracleReport",
    "analytic_series_rlc",
    "duality_audit",
    "mna_solve",
    "rk4_series_rlc",
]


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.deviation <= self.tolerance)


@dataclass
class OracleReport:
    checks: list = field(default_factory=list)

    def add(self, name, deviation, tolerance):
        if any(c.name == name for c in self.checks):
            raise ValueError(f"check {name!r} registered twice")
        self.checks.append(Check(name, float(deviation), float(tolerance)))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark} {c.name}: deviation {c.deviation:.3e} (tolerance {c.tolerance:.1e})")
        return "\n".join(lines)


# modified nodal analysis --------------------------------------------------------------


@dataclass
class MNASolution:
    node_ids: tuple
    potentials: np.ndarray
    currents: np.ndarray


def _branch_table(model, t=0.0):
    """Per branch: [R or None, effort value, flow value, has effort source]."""
    table = {b: [None, 0.0, 0.0, False] for b in model.complex.branch_ids}
    for el in model.elements:
        if el.kind.is_reactive:
            raise ReactiveElementPresent(f"{el.kind.value} on {el.branch!r}", subject=el.branch)
        if el.kind is ElementKind.RESISTOR:
            table[el.branch][0] = float(el.value)
        elif el.kind is ElementKind.EFFORT_SOURCE:
            table[el.branch][1] = float(np.ravel(el.value.value(t))[0])
            table[el.branch][3] = True
        else:
            table[el.branch][2] = float(np.ravel(el.value.value(t))[0])
    if model.transducers:
        raise TransducerPresent("the nodal oracle handles resistive models only")
    return table


def mna_solve(model, t: float = 0.0) -> MNASolution:
    """Static resistive solve by modified nodal analysis.

    Unknowns are the potentials of non-reference nodes plus one current
    for every branch that holds an effort source and no resistor.  A branch with drop
    ``v = e_tail - e_head`` obeys ``j = (v - v_s)/R + j_s``.

    Raises
    ------
    SingularSystem
    """
    cx = model.complex
    nodes = list(cx.node_ids)
    refs = set(model.reference_nodes)
    free = [n for n in nodes if n not in refs]
    pos = {n: k for k, n in enumerate(free)}
    table = _branch_table(model, t)
    bare = [b for b in cx.branch_ids if table[b][0] is None and table[b][3]]
    extra = {b: len(free) + k for k, b in enumerate(bare)}
    size = len(free) + len(bare)
    Y = np.zeros((size, size))
    rhs = np.zeros(size)

    def stamp(r, c, val):
        if r is not None and c is not None:
            Y[r, c] += val

    for b, (tail, head) in zip(cx.branch_ids, cx.endpoints):
        R, vs, js, _ = table[b]
        t_, h_ = pos.get(tail), pos.get(head)
        if R is not None:
            g = 1.0 / R
            stamp(t_, t_, g)
            stamp(h_, h_, g)
            stamp(t_, h_, -g)
            stamp(h_, t_, -g)
            c = js - g * vs  # constant part of the branch current
        elif b in extra:
            k = extra[b]
            stamp(t_, k, 1.0)
            stamp(h_, k, -1.0)
            stamp(k, t_, 1.0)
            stamp(k, h_, -1.0)
            rhs[k] = vs
            c = 0.0  # the extra unknown is the whole branch current
        else:
            c = js
        # current leaves the tail and enters the head
        if t_ is not None:
            rhs[t_] -= c
        if h_ is not None:
            rhs[h_] += c

    sol = np.zeros(size)
    if size:
        if np.linalg.cond(Y) > 1e13:
            raise SingularSystem("the nodal matrix is singular; is a reference node missing?")
        sol = sla.solve(Y, rhs)
    e = np.zeros(len(nodes))
    for n, k in pos.items():
        e[nodes.index(n)] = sol[k]
    index = {n: i for i, n in enumerate(nodes)}
    j = np.zeros(cx.n_branches)
    for i, (b, (tail, head)) in enumerate(zip(cx.branch_ids, cx.endpoints)):
        R, vs, js, _ = table[b]
        v = e[index[tail]] - e[index[head]]
        if R is not None:
            j[i] = (v - vs) / R + js
        elif b in extra:
            j[i] = sol[extra[b]]
        else:
            j[i] = js
    return MNASolution(tuple(nodes), e, j)


# series RLC ----------------------------------------------------------------------------------


def analytic_series_rlc(R, L, C, Vs, t):
    """Charge and current of a series RLC loop driven by a step ``Vs``.

    Solves ``L q'' + R q' + q / C = Vs`` with ``q(0) = q'(0) = 0``.

    Returns
    -------
    q, q_dot : float or ndarray
    """
    t = np.asarray(t, dtype=float)
    alpha = R / (2.0 * L)
    w0 = 1.0 / math.sqrt(L * C)
    qinf = C * Vs
    disc = alpha * alpha - w0 * w0
    if abs(disc) <= 1e-12 * w0 * w0:
        decay = np.exp(-alpha * t)
        q = qinf * (1.0 - decay * (1.0 + alpha * t))
        qd = qinf * alpha * alpha * t * decay
    elif disc < 0:
        wd = math.sqrt(-disc)
        decay = np.exp(-alpha * t)
        q = qinf * (1.0 - decay * (np.cos(wd * t) + (alpha / wd) * np.sin(wd * t)))
        qd = qinf * decay * (w0 * w0 / wd) * np.sin(wd * t)
    else:
        beta = math.sqrt(disc)
        s1, s2 = -alpha + beta, -alpha - beta
        e1, e2 = np.exp(s1 * t), np.exp(s2 * t)
        q = qinf * (1.0 + (s2 * e1 - s1 * e2) / (s1 - s2))
        qd = qinf * s1 * s2 * (e1 - e2) / (s1 - s2)
    return q, qd


def rk4_series_rlc(R, L, C, Vs, t_end, dt):
    """Classical Runge-Kutta integration of the series RLC step response."""
    n = int(round(t_end / dt))
    q, p = 0.0, 0.0

    def rhs(q, p):
        return p, (Vs - R * p - q / C) / L

    for _ in range(n):
        k1 = rhs(q, p)
        k2 = rhs(q + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1])
        k3 = rhs(q + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1])
        k4 = rhs(q + dt * k3[0], p + dt * k3[1])
        q += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return q, p


# duality audit --------------------------------------------------------------------------------


def duality_audit(model, delta1=None, tolerance=1e-10) -> OracleReport:
    """Compare branch drops and flows from the node and the mesh solve.

    Both solves are assembled here from the endpoint list and the mesh
    walks.  ``delta1`` overrides the mesh-by-branch matrix, which lets a
    test feed a corrupted orientation as a negative control.
    """
    cx = model.complex
    n0, n1 = cx.n_nodes, cx.n_branches
    nidx = {n: i for i, n in enumerate(cx.node_ids)}
    bidx = {b: i for i, b in enumerate(cx.branch_ids)}
    inc = np.zeros((n0, n1))
    for j, (tail, head) in enumerate(cx.endpoints):
        inc[nidx[head], j] += 1.0
        inc[nidx[tail], j] -= 1.0
    if delta1 is None:
        delta1 = np.zeros((len(cx.meshes or ()), n1))
        for k, (_, walk) in enumerate(cx.meshes or ()):
            for b, s in walk:
                delta1[k, bidx[b]] += s
    delta1 = np.asarray(delta1, dtype=float)

    table = _branch_table(model)
    R = np.array([table[b][0] or 0.0 for b in cx.branch_ids])
    G = np.array([1.0 / r if r else 0.0 for r in R])
    vs = np.array([table[b][1] for b in cx.branch_ids])
    js = np.array([table[b][2] for b in cx.branch_ids])

    keep = [i for i, n in enumerate(cx.node_ids) if n not in set(model.reference_nodes)]
    A = inc[keep]
    e = np.zeros(n0)
    e[keep] = np.linalg.solve(A @ np.diag(G) @ A.T, A @ (js - G * vs))
    v_node = -inc.T @ e
    j_node = js + G * (v_node - vs)

    report = OracleReport()
    Km = delta1 @ np.diag(R) @ delta1.T
    try:
        i = np.linalg.solve(Km, delta1 @ (-vs + R * js))
    except np.linalg.LinAlgError:
        report.add("voltage", np.inf, tolerance)
        report.add("current", np.inf, tolerance)
        return report
    j_mesh = delta1.T @ i
    v_mesh = vs + R * (j_mesh - js)
    report.add("voltage", np.abs(v_node - v_mesh).max(initial=0.0), tolerance)
    report.add("current", np.abs(j_node - j_mesh).max(initial=0.0), tolerance)
    report.add("node balance", np.abs(inc[keep] @ j_mesh).max(initial=0.0), tolerance)
    report.add("mesh balance", np.abs(delta1 @ v_node).max(initial=0.0), tolerance)
    return report
