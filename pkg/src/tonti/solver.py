"""Static solves, time integration and recovery of branch quantities.

Dynamic systems ``M x'' + D x' + K x + B lam = f`` with constraint rows
``A_state x' + A_aux lam = g`` are advanced with the trapezoidal rule
applied to the first-order form in ``(x, x')``.  Written for the
acceleration ``a = x''`` this is the average-acceleration scheme

    x_{n+1} = x_n + h w_n + h^2/4 (a_n + a_{n+1})
    w_{n+1} = w_n + h/2 (a_n + a_{n+1})

with the dynamic rows and the constraint rows imposed exactly at every
step, so each step solves one bordered linear system for
``(a_{n+1}, lam_{n+1})``.  The bordered matrix is factored once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import cumulative_trapezoid

from .compiler import StateSystem
from .elements import CHANNELS, ElementKind
from .errors import InconsistentIC, InvalidValue, SingularSystem, StepSingular
from .quantities import Cochain, TimeGrid

__all__ = [
    "Trajectory",
    "conservation_residual",
    "dense_limit",
    "integrate",
    "recover_branch_quantities",
    "solve_static",
    "source_channels",
    "static_branch_quantities",
    "stored_energy",
    "transformer_power_residual",
]

IC_TOLERANCE = 1e-9
_COND_LIMIT = 1e13

# derivative of each source channel, in channel terms
_DERIVED = {
    "j": "j_dot", "j_dot": "j_ddot", "j_int": "j",
    "v": "v_dot", "v_dot": "v_ddot", "v_int": "v",
}


def dense_limit() -> int:
    """Largest state count factored densely (env ``TONTI_DENSE_LIMIT``)."""
    return int(os.environ.get("TONTI_DENSE_LIMIT", "512"))


# static ----------------------------------------------------------------------


def solve_static(system: StateSystem) -> Cochain:
    """Solve ``K x = f(0)`` of a static system by LU decomposition.

    Returns the state cochain over every cell of the state dimension, with
    reference entries set to zero.

    Raises
    ------
    SingularSystem
    """
    s = system.as_float()
    n = s.n_states
    x = np.zeros(0)
    if n:
        K = s.K
        rhs = s.forcing(0.0)
        cond = np.linalg.cond(K) if np.all(np.isfinite(K)) else np.inf
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            hint = (
                "; check that every connected component has a reference node"
                if s.is_node_based
                else "; check that every mesh holds a resistor"
            )
            raise SingularSystem(f"the {s.path} system is singular{hint}")
        x = sla.lu_solve(sla.lu_factor(K), rhs)
    full = np.zeros(len(s.full_ids))
    full[s.reduced_index_map] = x
    return Cochain(s.state_kind, full)


def static_branch_quantities(system: StateSystem, solution: Cochain) -> dict:
    """Branch drops ``v`` and flows ``j`` of a static solution."""
    s = system.as_float()
    cs = s.constitutive
    vf, jf = cs.channel("v", 0.0), cs.channel("j", 0.0)
    x = np.asarray(solution.values, dtype=float)
    if s.is_node_based:
        v = -s.incidence.T @ x
        j = jf + cs.Rg_inv @ (v - vf)
    else:
        j = s.incidence @ x
        v = vf + cs.Rg @ (j - jf)
    return {"v": v, "j": j}


# sources on a grid ----------------------------------------------------------------


def source_channels(system: StateSystem, times: np.ndarray) -> dict:
    """Every source channel sampled at ``times``, shape ``(n_t, n1)``.

    Integrals of sources without a closed form are accumulated with the
    trapezoidal rule on ``times``, starting from their quadrature value at
    ``times[0]``.
    """
    cs = system.constitutive
    out = {name: cs.channel(name, times) for name in CHANNELS}
    out["j_ddot"] = cs.channel("j_ddot", times)
    out["v_ddot"] = cs.channel("v_ddot", times)
    for family, sources in (("j", cs.flow_sources), ("v", cs.effort_sources)):
        for i, src in sources.items():
            if src.exact_integral or len(times) < 2:
                continue
            start = float(np.ravel(src.integral(times[0]))[0])
            out[f"{family}_int"][:, i] = start + cumulative_trapezoid(
                src.value(times), times, initial=0.0
            )
    return out


def _channels_at(channels, k):
    return {name: values[k] for name, values in channels.items()}


# trajectory ------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Time-sampled solution of a compiled system.

    Attributes
    ----------
    grid : TimeGrid
    states, rates, accels : ndarray
        ``x``, ``x'`` and ``x''`` per step, shape ``(n_steps, N)``.
    aux : ndarray
        Transformer unknowns per step, shape ``(n_steps, 2M)``.
    branch_quantities : dict
        Filled by :func:`recover_branch_quantities`: ``v`` and ``j`` always,
        ``Phi`` on the flux-potential path and ``Q`` on the charge path.
    """

    grid: TimeGrid
    states: np.ndarray
    rates: np.ndarray
    accels: np.ndarray
    aux: np.ndarray
    system: StateSystem = field(repr=False)
    branch_quantities: dict = field(default_factory=dict)
    channels: dict = field(default_factory=dict, repr=False)

    @property
    def times(self):
        return self.grid.times

    def full_states(self, which="states"):
        """State samples over the full cell list, references pinned to 0."""
        data = getattr(self, which)
        out = np.zeros((data.shape[0], len(self.system.full_ids)))
        out[:, self.system.reduced_index_map] = data
        return out


# consistent initialization -------------------------------------------------------------


def _storage_map(s: StateSystem):
    cs = s.constitutive
    caps = {i for i in range(cs.n1) if cs.Cg[i, i] != 0}
    inds = {i for i in range(cs.n1) if cs.Lg[i, i] != 0}
    return caps, inds


def _branch_map(s: StateSystem):
    """Map from retained states to branch drops (node path) or flows."""
    if s.is_node_based:
        return -s.incidence.T[:, s.reduced_index_map]
    return s.incidence


def _initial_state(s: StateSystem, t0: float, ch0: dict, ch0_dot: dict, ic: dict):
    n, na = s.n_states, s.aux_count
    cs = s.constitutive
    width = 3 * n + 2 * na
    X, W, A = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
    L, LD = slice(3 * n, 3 * n + na), slice(3 * n + na, width)

    hard_rows, hard_rhs, soft_rows, soft_rhs = [], [], [], []

    def row():
        return np.zeros(width)

    # dynamic rows and constraint rows at t0
    f0 = s.forcing(t0, ch0)
    g0 = s.constraint_forcing(t0, ch0)
    for i in range(n):
        r = row()
        r[X], r[W], r[A] = s.K[i], s.D[i], s.M[i]
        r[L] = s.B[i]
        hard_rows.append(r)
        hard_rhs.append(f0[i])
    for i in range(s.n_constraints):
        r = row()
        r[W], r[L] = s.A_state[i], s.A_aux[i]
        hard_rows.append(r)
        hard_rhs.append(g0[i])
    # time derivatives of the rows without inertia (hidden constraints)
    f0_dot = s.forcing(t0, ch0_dot)
    g0_dot = s.constraint_forcing(t0, ch0_dot)
    for i in range(n):
        if np.any(s.M[i]):
            continue
        r = row()
        r[W], r[A] = s.K[i], s.D[i]
        r[LD] = s.B[i]
        hard_rows.append(r)
        hard_rhs.append(f0_dot[i])
    for i in range(s.n_constraints):
        r = row()
        r[A], r[LD] = s.A_state[i], s.A_aux[i]
        hard_rows.append(r)
        hard_rhs.append(g0_dot[i])

    # storage element initial values
    caps, inds = _storage_map(s)
    ic = dict(ic or {})
    bidx = {b: i for i, b in enumerate(cs.branch_ids)}
    for b in ic:
        i = bidx.get(b)
        if i is None or (i not in caps and i not in inds):
            raise InvalidValue(f"initial value for {b!r}, which holds no capacitor or inductor",
                               subject=b)
    T = _branch_map(s)
    vf, vf_int = ch0["v"], ch0["v_int"]
    jf, jf_int = ch0["j"], ch0["j_int"]
    for i in sorted(caps | inds):
        b = cs.branch_ids[i]
        value = float(ic.get(b, 0.0))
        r = row()
        if s.is_node_based:
            if i in caps:  # capacitor voltage from the drop rate
                r[W] = T[i]
                rhs = value + vf[i]
            else:  # inductor current from the flux
                r[X] = T[i]
                rhs = cs.Lg[i, i] * value + vf_int[i]
        else:
            if i in caps:  # capacitor voltage from the charge
                r[X] = T[i]
                rhs = cs.Cg[i, i] * value + jf_int[i]
            else:  # inductor current from the flow
                r[W] = T[i]
                rhs = value + jf[i]
        if b in ic:
            hard_rows.append(r)
            hard_rhs.append(rhs)
        else:
            soft_rows.append(r)
            soft_rhs.append(rhs)

    Ah = np.array(hard_rows).reshape(-1, width)
    bh = np.array(hard_rhs)
    u, *_ = np.linalg.lstsq(Ah, bh, rcond=None)
    resid = np.linalg.norm(Ah @ u - bh) if len(bh) else 0.0
    if resid > IC_TOLERANCE * max(1.0, np.linalg.norm(bh)):
        raise InconsistentIC(
            f"initial values violate the network equations (residual {resid:.3g})"
        )
    if soft_rows:
        As = np.array(soft_rows)
        bs = np.array(soft_rhs)
        null = sla.null_space(Ah) if Ah.size else np.eye(width)
        if null.size:
            z, *_ = np.linalg.lstsq(As @ null, bs - As @ u, rcond=None)
            u = u + null @ z
    return u[X], u[W], u[A], u[L]


# integration ----------------------------------------------------------------------------


def integrate(
    system: StateSystem,
    grid: TimeGrid,
    ic: Optional[dict] = None,
    *,
    dense_threshold: Optional[int] = None,
) -> Trajectory:
    """Integrate a compiled dynamic system over ``grid``.

    Parameters
    ----------
    system : StateSystem
        Output of the flux-potential or the charge path.
    grid : TimeGrid
    ic : dict, optional
        Capacitor voltages and inductor currents keyed by branch id.
        Storage elements not listed start as close to zero as the
        network equations allow.
    dense_threshold : int, optional
        Overrides :func:`dense_limit`.

    Raises
    ------
    InconsistentIC
        If the given values contradict the network equations by more
        than ``1e-9`` (relative).
    StepSingular
        If the bordered step matrix is singular.
    """
    s = system.as_float()
    n, na = s.n_states, s.aux_count
    times = grid.times
    h = grid.dt
    channels = source_channels(s, times)
    ch0 = _channels_at(channels, 0)
    ch0_dot = {name: ch0[_DERIVED[name]] for name in _DERIVED}
    x0, w0, a0, lam0 = _initial_state(s, grid.t0, ch0, ch0_dot, ic)

    steps = grid.n_steps
    X = np.zeros((steps, n))
    W = np.zeros((steps, n))
    A = np.zeros((steps, n))
    LAM = np.zeros((steps, na))
    X[0], W[0], A[0], LAM[0] = x0, w0, a0, lam0
    if steps == 1 or n + na == 0:
        return Trajectory(grid, X, W, A, LAM, s, channels=channels)

    F = np.hstack([s.forcing(times, channels), s.constraint_forcing(times, channels)])
    S = s.M + 0.5 * h * s.D + 0.25 * h * h * s.K
    Z = np.block([[S, s.B], [0.5 * h * s.A_state, s.A_aux]])
    scale = np.abs(Z).max(axis=1)
    if np.any(scale == 0):
        raise StepSingular("the step matrix has an empty row; the model is under-determined")
    Z = Z / scale[:, None]
    F = F / scale[None, :]
    # right-hand side map from (x_n, w_n, a_n)
    Ry = np.block([
        [-s.K, -(s.D + h * s.K), -(0.5 * h * s.D + 0.25 * h * h * s.K)],
        [np.zeros((na, n)), -s.A_state, -0.5 * h * s.A_state],
    ]) / scale[:, None]

    limit = dense_limit() if dense_threshold is None else dense_threshold
    if n <= limit:
        _march_dense(Z, Ry, F, X, W, A, LAM, h, n)
    else:
        _march_sparse(Z, Ry, F, X, W, A, LAM, h, n)
    return Trajectory(grid, X, W, A, LAM, s, channels=channels)


def _march_dense(Z, Ry, F, X, W, A, LAM, h, n):
    cond = np.linalg.cond(Z)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise StepSingular(f"the step matrix is singular (condition {cond:.3g}); "
                           "the model may be over-constrained")
    lu = sla.lu_factor(Z)
    P = sla.lu_solve(lu, Ry)          # (n + na, 3n)
    C = sla.lu_solve(lu, F.T).T       # (steps, n + na)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    T = np.block([[eye, h * eye, 0.25 * h * h * eye],
                  [zero, eye, 0.5 * h * eye],
                  [zero, zero, zero]])
    E = np.vstack([0.25 * h * h * eye, 0.5 * h * eye, eye])
    Phi = T + E @ P[:n]
    G = C[:, :n] @ E.T
    y = np.concatenate([X[0], W[0], A[0]])
    Y = np.empty((X.shape[0], 3 * n))
    Y[0] = y
    for k in range(1, X.shape[0]):
        y = Phi @ y + G[k]
        Y[k] = y
    X[1:], W[1:], A[1:] = Y[1:, :n], Y[1:, n:2 * n], Y[1:, 2 * n:]
    LAM[1:] = Y[:-1] @ P[n:].T + C[1:, n:]


def _march_sparse(Z, Ry, F, X, W, A, LAM, h, n):
    try:
        lu = spla.splu(sp.csc_matrix(Z))
    except RuntimeError as exc:
        raise StepSingular(f"the step matrix is singular: {exc}") from None
    Ry = sp.csr_matrix(Ry)
    y = np.concatenate([X[0], W[0], A[0]])
    for k in range(1, X.shape[0]):
        x, w, a = y[:n], y[n:2 * n], y[2 * n:]
        u = lu.solve(Ry @ y + F[k])
        if not np.all(np.isfinite(u)):
            raise StepSingular("the step matrix is singular")
        a_new = u[:n]
        x = x + h * w + 0.25 * h * h * (a + a_new)
        w = w + 0.5 * h * (a + a_new)
        y = np.concatenate([x, w, a_new])
        X[k], W[k], A[k], LAM[k] = x, w, a_new, u[n:]


# recovery and checks ------------------------------------------------------------------------


def recover_branch_quantities(trajectory: Trajectory, model=None, system=None) -> Trajectory:
    """Fill ``trajectory.branch_quantities`` with per-step branch values.

    On the flux-potential path the drops follow from the node rates and
    the flows from the constitutive sum; transformer branch flows are the
    negated auxiliary unknowns.  On the charge path the flows follow from
    the mesh rates and the drops from the constitutive sum; transformer
    branch drops are the auxiliary unknowns.
    """
    s = (system or trajectory.system).as_float()
    cs = s.constitutive
    ch = trajectory.channels or source_channels(s, trajectory.times)
    x = trajectory.full_states("states")
    w = trajectory.full_states("rates")
    a = trajectory.full_states("accels")
    aux = cs.aux_branch_indices()
    if s.is_node_based:
        d0 = -s.incidence.T
        v = w @ d0.T
        phi = x @ d0.T
        v_dot = a @ d0.T
        dv = v - ch["v"]
        j = (ch["j"] + dv @ (cs.Rg_inv + cs.Kg_inv).T + (v_dot - ch["v_dot"]) @ cs.Cg.T
             + (phi - ch["v_int"]) @ cs.Lg_inv.T)
        if aux:
            j[:, aux] = -trajectory.aux
        trajectory.branch_quantities = {"v": v, "j": j, "Phi": phi}
    else:
        d2 = s.incidence
        j = w @ d2.T
        Q = x @ d2.T
        j_dot = a @ d2.T
        dj = j - ch["j"]
        v = (ch["v"] + dj @ (cs.Rg + cs.Kg).T + (j_dot - ch["j_dot"]) @ cs.Lg.T
             + (Q - ch["j_int"]) @ cs.Cg_inv.T)
        if aux:
            v[:, aux] = trajectory.aux
        trajectory.branch_quantities = {"v": v, "j": j, "Q": Q}
    return trajectory


def conservation_residual(trajectory: Trajectory) -> np.ndarray:
    """Per-step max |node balance| (node path) or |mesh balance| (mesh path).

    Node balances are taken over the retained (non-reference) nodes.
    """
    s = trajectory.system
    if not trajectory.branch_quantities:
        recover_branch_quantities(trajectory)
    bq = trajectory.branch_quantities
    if s.is_node_based:
        rows = s.incidence[s.reduced_index_map]
        res = bq["j"] @ rows.T
    else:
        res = bq["v"] @ s.incidence
    if res.shape[1] == 0:
        return np.zeros(res.shape[0])
    return np.abs(res).max(axis=1)


def transformer_power_residual(trajectory: Trajectory) -> np.ndarray:
    """Per-step ``|v_L j_L - v_R j_R|`` maximized over transformers.

    Returned relative to ``max(1, |v_L j_L|)``.
    """
    if not trajectory.branch_quantities:
        recover_branch_quantities(trajectory)
    pairs = trajectory.system.constitutive.transformer_branches
    out = np.zeros(trajectory.grid.n_steps)
    v, j = trajectory.branch_quantities["v"], trajectory.branch_quantities["j"]
    for il, ir in pairs:
        left = v[:, il] * j[:, il]
        right = v[:, ir] * j[:, ir]
        out = np.maximum(out, np.abs(left - right) / np.maximum(1.0, np.abs(left)))
    return out


def constraint_residual(trajectory: Trajectory) -> np.ndarray:
    """Per-step max |A_state x' + A_aux lam - g|."""
    s = trajectory.system
    if s.n_constraints == 0:
        return np.zeros(trajectory.grid.n_steps)
    g = s.constraint_forcing(trajectory.times, trajectory.channels)
    res = trajectory.rates @ s.A_state.T + trajectory.aux @ s.A_aux.T - g
    return np.abs(res).max(axis=1)


def stored_energy(trajectory: Trajectory) -> np.ndarray:
    """``x'^T M x' / 2 + x^T K x / 2`` per step."""
    s = trajectory.system
    x, w = trajectory.states, trajectory.rates
    return 0.5 * np.einsum("ki,ij,kj->k", w, s.M, w) + 0.5 * np.einsum("ki,ij,kj->k", x, s.K, x)
