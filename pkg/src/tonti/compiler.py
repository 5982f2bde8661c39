"""Equation generation along the paths of the network's cochain diagram.

Sign conventions (shared by every path):

=============================  ==========================================
branch drop                    ``v = -delta0 e`` (tail minus head)
branch law                     ``v - v_f = R (j - j_f)``, ``j - j_f = G (v - v_f)``
node balance                   ``d1 j = 0`` (``d1`` is +1 at the head)
mesh balance                   ``delta1 v = 0``
=============================  ==========================================

With these, the static node system is ``d1 G delta0 e = d1 (j_f - G v_f)``
and the static mesh system is ``delta1 R d2 i = delta1 (-v_f + R j_f)``.
The dynamic paths use the time integrals of the static unknowns:
flux potentials ``psi`` with ``e = d psi / dt`` and mesh charges ``q``
with ``i = dq / dt``.

Every compiled system is stored with its source couplings kept apart, so
the forcing is ``f(t) = sum_c F_c s_c(t)`` where ``s_c`` is a branch
source channel (``j``, ``j_dot``, ``j_int``, ``v``, ``v_dot``, ``v_int``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .complex import boundary_1, boundary_2, cycle_rank
from .elements import ConstitutiveSet, ElementKind, assemble_constitutive
from .errors import (
    MissingMeshes,
    NoReferenceNode,
    ReactiveElementPresent,
    TransducerPresent,
    UnsupportedPath,
    UnsupportedSource,
)
from .model import Model, check_model
from .quantities import QuantityKind

__all__ = [
    "PATHS",
    "StateSystem",
    "compile_model",
    "compile_psi_state",
    "compile_q_state",
    "compile_static_mesh_current",
    "compile_static_node_potential",
    "pencil_eigenvalues",
    "reduce_reference",
]

PATHS = ("static-node", "static-mesh", "psi", "q")

# diagram paths that have no generated equations
_UNCOMPILED = {
    "e-dynamic": QuantityKind.POTENTIAL,
    "i-dynamic": QuantityKind.MESH_CURRENT,
    "u": QuantityKind.MESH_VOLTAGE,
    "m": None,
    "a": None,
    "t": None,
}

NODE_PATHS = ("static-node", "psi")


@dataclass
class StateSystem:
    """Compiled linear system ``M x'' + D x' + K x + B lam = f(t)``.

    Constraint rows read ``A_state x' + A_aux lam = g(t)``.  Static
    systems have ``M = D = 0`` and no constraint rows; their solution
    satisfies ``K x = f``.

    Attributes
    ----------
    incidence : ndarray
        Full branch boundary ``d1`` for node paths, mesh boundary ``d2``
        for mesh paths; used for recovery of branch quantities.
    path : str
        One of :data:`PATHS`.
    state_kind : QuantityKind
    state_ids : tuple of str
        Labels of the retained state cells.
    aux_ids : tuple of str
        Labels of the transformer unknowns, two per transformer.
    reduced_index_map : ndarray of int
        Index of every retained state in the full cell list.
    full_ids : tuple of str
        State labels before reference elimination.
    forcing_couplings, constraint_couplings : dict
        Channel name to matrix of shape ``(rows, n1)``.
    """

    path: str
    state_kind: QuantityKind
    state_ids: tuple
    M: np.ndarray
    D: np.ndarray
    K: np.ndarray
    B: np.ndarray
    A_state: np.ndarray
    A_aux: np.ndarray
    forcing_couplings: dict
    constraint_couplings: dict
    constitutive: ConstitutiveSet = field(repr=False)
    aux_ids: tuple = ()
    full_ids: tuple = ()
    reduced_index_map: Optional[np.ndarray] = None
    exact: bool = False
    incidence: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_states(self):
        return len(self.state_ids)

    @property
    def aux_count(self):
        return len(self.aux_ids)

    @property
    def n_constraints(self):
        return self.A_state.shape[0]

    @property
    def n_unknowns(self):
        return self.n_states + self.aux_count

    @property
    def n_equations(self):
        return self.n_states + self.n_constraints

    @property
    def is_static(self):
        return self.path.startswith("static")

    @property
    def is_node_based(self):
        return self.path in NODE_PATHS

    def as_float(self) -> "StateSystem":
        """Copy with every matrix converted to float64."""
        if not self.exact:
            return self
        f = _to_float
        return replace(
            self,
            M=f(self.M), D=f(self.D), K=f(self.K), B=f(self.B),
            A_state=f(self.A_state), A_aux=f(self.A_aux),
            forcing_couplings={k: f(v) for k, v in self.forcing_couplings.items()},
            constraint_couplings={k: f(v) for k, v in self.constraint_couplings.items()},
            constitutive=assemble_like(self.constitutive),
            exact=False,
        )

    def forcing(self, t, channels=None):
        """Dynamic right-hand side ``f(t)``.

        ``channels`` may supply precomputed channel samples (as returned by
        :meth:`ConstitutiveSet.channel`) keyed by channel name.
        """
        return self._combine(self.forcing_couplings, t, channels, self.n_states)

    def constraint_forcing(self, t, channels=None):
        """Constraint right-hand side ``g(t)``."""
        return self._combine(self.constraint_couplings, t, channels, self.n_constraints)

    def _combine(self, couplings, t, channels, rows):
        scalar = np.ndim(t) == 0
        nt = 1 if scalar else len(t)
        out = np.zeros((nt, rows))
        for name, mat in couplings.items():
            values = channels[name] if channels is not None else self.constitutive.channel(name, t)
            values = np.atleast_2d(values)
            out += values @ _to_float(mat).T
        return out[0] if scalar else out


def _to_float(a):
    return np.asarray(a, dtype=float) if getattr(a, "dtype", None) == object else np.asarray(a)


def assemble_like(cs: ConstitutiveSet) -> ConstitutiveSet:
    if not cs.exact:
        return cs
    mats = {
        k: _to_float(getattr(cs, k))
        for k in ("Rg", "Rg_inv", "Cg", "Cg_inv", "Lg", "Lg_inv", "Kg", "Kg_inv",
                  "kt_rows", "kt_prime_rows")
    }
    return replace(cs, exact=False, **mats)


# helpers ---------------------------------------------------------------------


def _incidences(model, exact, meshes=False):
    d1 = boundary_1(model.complex).toarray()
    d2 = boundary_2(model.complex).toarray() if meshes else None
    if exact:
        d1 = d1.astype(object)
        d2 = d2.astype(object) if d2 is not None else None
    else:
        d1 = d1.astype(float)
        d2 = d2.astype(float) if d2 is not None else None
    return d1, d2


def _congruence(left, mid, right, exact):
    """``left @ mid @ right``, sparse in float mode."""
    if exact:
        return left @ mid @ right
    out = sp.csr_array(left) @ sp.csr_array(mid) @ sp.csr_array(right)
    return np.asarray(out.toarray(), dtype=float)


def _product(left, mid, exact):
    if exact:
        return left @ mid
    return np.asarray((sp.csr_array(left) @ sp.csr_array(mid)).toarray(), dtype=float)


def _zeros(shape, exact):
    out = np.zeros(shape, dtype=object if exact else float)
    if exact:
        out[...] = 0
    return out


def _require_static(model):
    for el in model.elements:
        if el.kind.is_reactive:
            raise ReactiveElementPresent(
                f"branch {el.branch!r} holds a {el.kind.value}; static paths need a resistive model",
                subject=el.branch, span=el.span,
            )
    if model.transducers:
        tr = model.transducers[0]
        raise TransducerPresent(
            f"{tr.kind.value} on {tr.left_branch!r}; static paths do not take transducers",
            subject=tr.left_branch, span=tr.span,
        )


def _require_sources(model, node_based):
    """Reject sources that the chosen path cannot express."""
    passive = {el.branch for el in model.elements if el.kind.is_passive}
    bad = ElementKind.EFFORT_SOURCE if node_based else ElementKind.FLOW_SOURCE
    for el in model.elements:
        if el.kind is bad and el.branch not in passive:
            what = "effort" if node_based else "flow"
            others = "mesh" if node_based else "node"
            raise UnsupportedSource(
                f"branch {el.branch!r} holds a bare {what} source; use the {others}-based path "
                "or add a series element",
                subject=el.branch, span=el.span,
            )


def _require_meshes(model):
    cx = model.complex
    if not cx.has_meshes:
        raise MissingMeshes("the model has no meshes; declare them or run find_meshes")
    beta = cycle_rank(cx)
    d2 = boundary_2(cx).toarray().astype(float)
    rank = np.linalg.matrix_rank(d2) if cx.n_meshes else 0
    if rank < beta or rank < cx.n_meshes:
        raise MissingMeshes(
            f"declared meshes span {rank} independent cycles; the complex has {beta}"
        )


def _aux_labels(model, prefix):
    cx = model.complex
    out = []
    for tr in model.transducers:
        if tr.kind.value == "transformer":
            out.append(f"{prefix}_{tr.left_branch}")
            out.append(f"{prefix}_{tr.right_branch}")
    return tuple(out)


# static paths ------------------------------------------------------------------


def compile_static_node_potential(model: Model, reduce: bool = True, exact: bool = False) -> StateSystem:
    """Node-potential system ``d1 G delta0 e = d1 (j_f - G v_f)``.

    Raises
    ------
    ReactiveElementPresent, TransducerPresent, UnsupportedSource
    """
    check_model(model)
    _require_static(model)
    _require_sources(model, node_based=True)
    cs = assemble_constitutive(model, exact)
    d1, _ = _incidences(model, exact)
    n0 = d1.shape[0]
    K = _congruence(d1, cs.Rg_inv, d1.T, exact)
    forcing = {"j": d1, "v": -_product(d1, cs.Rg_inv, exact)}
    system = StateSystem(
        path="static-node",
        state_kind=QuantityKind.POTENTIAL,
        state_ids=model.complex.node_ids,
        M=_zeros((n0, n0), exact), D=_zeros((n0, n0), exact), K=K,
        B=_zeros((n0, 0), exact), A_state=_zeros((0, n0), exact), A_aux=_zeros((0, 0), exact),
        forcing_couplings=forcing, constraint_couplings={},
        constitutive=cs, full_ids=model.complex.node_ids,
        reduced_index_map=np.arange(n0), exact=exact, incidence=_to_float(d1),
    )
    return reduce_reference(system, model) if reduce else system


def compile_static_mesh_current(model: Model, exact: bool = False) -> StateSystem:
    """Mesh-current system ``delta1 R d2 i = delta1 (-v_f + R j_f)``.

    Raises
    ------
    MissingMeshes, ReactiveElementPresent, TransducerPresent, UnsupportedSource
    """
    check_model(model)
    _require_static(model)
    _require_meshes(model)
    _require_sources(model, node_based=False)
    cs = assemble_constitutive(model, exact)
    _, d2 = _incidences(model, exact, meshes=True)
    n2 = d2.shape[1]
    K = _congruence(d2.T, cs.Rg, d2, exact)
    forcing = {"v": -d2.T.copy(), "j": _product(d2.T, cs.Rg, exact)}
    mesh_ids = model.complex.mesh_ids
    return StateSystem(
        path="static-mesh",
        state_kind=QuantityKind.MESH_CURRENT,
        state_ids=mesh_ids,
        M=_zeros((n2, n2), exact), D=_zeros((n2, n2), exact), K=K,
        B=_zeros((n2, 0), exact), A_state=_zeros((0, n2), exact), A_aux=_zeros((0, 0), exact),
        forcing_couplings=forcing, constraint_couplings={},
        constitutive=cs, full_ids=mesh_ids, reduced_index_map=np.arange(n2), exact=exact,
        incidence=_to_float(d2),
    )


# dynamic paths --------------------------------------------------------------------


def compile_psi_state(model: Model, reduce: bool = True, exact: bool = False) -> StateSystem:
    """Flux-potential pencil.

    ``M = d1 C delta0``, ``D = d1 (G + Kg^-1) delta0``, ``K = d1 L^-1 delta0``.
    Each transformer adds two branch-flow unknowns ``t`` entering the node
    rows through ``d1`` (the physical branch current is ``-t``) and the
    constraint rows ``k_t (delta0 psi' + v_f) = 0`` and ``k_t' (t + j_f) = 0``.

    Raises
    ------
    NoReferenceNode, UnsupportedSource
    """
    check_model(model)
    _require_sources(model, node_based=True)
    cs = assemble_constitutive(model, exact)
    d1, _ = _incidences(model, exact)
    n0 = d1.shape[0]
    d0 = d1.T
    M = _congruence(d1, cs.Cg, d0, exact)
    D = _congruence(d1, cs.Rg_inv + cs.Kg_inv, d0, exact)
    K = _congruence(d1, cs.Lg_inv, d0, exact)
    aux = cs.aux_branch_indices()
    B = d1[:, aux] if aux else _zeros((n0, 0), exact)
    forcing = {
        "j": d1,
        "v_dot": -_product(d1, cs.Cg, exact),
        "v": -_product(d1, cs.Rg_inv + cs.Kg_inv, exact),
        "v_int": -_product(d1, cs.Lg_inv, exact),
    }
    m = cs.n_transformers
    n_aux = len(aux)
    A_state = _zeros((2 * m, n0), exact)
    A_aux = _zeros((2 * m, n_aux), exact)
    cv = _zeros((2 * m, cs.n1), exact)
    cj = _zeros((2 * m, cs.n1), exact)
    if m:
        # rows 0..m-1: transformer drop ratio, rows m..2m-1: flow ratio
        A_state[:m] = _product(cs.kt_rows, d0, exact)
        cv[:m] = -cs.kt_rows
        A_aux[m:] = cs.kt_prime_rows[:, aux]
        cj[m:] = -cs.kt_prime_rows
    system = StateSystem(
        path="psi",
        state_kind=QuantityKind.FLUX_POTENTIAL,
        state_ids=model.complex.node_ids,
        M=M, D=D, K=K, B=B, A_state=A_state, A_aux=A_aux,
        forcing_couplings=forcing,
        constraint_couplings={"v": cv, "j": cj} if m else {},
        constitutive=cs,
        aux_ids=_aux_labels(model, "t"),
        full_ids=model.complex.node_ids,
        reduced_index_map=np.arange(n0),
        exact=exact,
        incidence=_to_float(d1),
    )
    return reduce_reference(system, model) if reduce else system


def compile_q_state(model: Model, exact: bool = False) -> StateSystem:
    """Mesh-charge pencil.

    ``M = delta1 L d2``, ``D = delta1 (R + Kg) d2``, ``K = delta1 C^-1 d2``.
    Each transformer adds two branch-drop unknowns ``a`` entering the
    mesh rows through ``delta1`` and the constraint rows
    ``k_t' (d2 q' - j_f) = 0`` and ``k_t (a - v_f) = 0``.

    Raises
    ------
    MissingMeshes, UnsupportedSource
    """
    check_model(model)
    _require_meshes(model)
    _require_sources(model, node_based=False)
    cs = assemble_constitutive(model, exact)
    _, d2 = _incidences(model, exact, meshes=True)
    n2 = d2.shape[1]
    dl = d2.T
    M = _congruence(dl, cs.Lg, d2, exact)
    D = _congruence(dl, cs.Rg + cs.Kg, d2, exact)
    K = _congruence(dl, cs.Cg_inv, d2, exact)
    aux = cs.aux_branch_indices()
    B = dl[:, aux] if aux else _zeros((n2, 0), exact)
    forcing = {
        "v": -dl.copy(),
        "j_dot": _product(dl, cs.Lg, exact),
        "j": _product(dl, cs.Rg + cs.Kg, exact),
        "j_int": _product(dl, cs.Cg_inv, exact),
    }
    m = cs.n_transformers
    n_aux = len(aux)
    A_state = _zeros((2 * m, n2), exact)
    A_aux = _zeros((2 * m, n_aux), exact)
    cv = _zeros((2 * m, cs.n1), exact)
    cj = _zeros((2 * m, cs.n1), exact)
    if m:
        # rows 0..m-1: flow ratio, rows m..2m-1: drop ratio
        A_state[:m] = _product(cs.kt_prime_rows, d2, exact)
        cj[:m] = cs.kt_prime_rows
        A_aux[m:] = cs.kt_rows[:, aux]
        cv[m:] = cs.kt_rows
    mesh_ids = model.complex.mesh_ids
    return StateSystem(
        path="q",
        state_kind=QuantityKind.MESH_CHARGE,
        state_ids=mesh_ids,
        M=M, D=D, K=K, B=B, A_state=A_state, A_aux=A_aux,
        forcing_couplings=forcing,
        constraint_couplings={"j": cj, "v": cv} if m else {},
        constitutive=cs,
        aux_ids=_aux_labels(model, "a"),
        full_ids=mesh_ids,
        reduced_index_map=np.arange(n2),
        exact=exact,
        incidence=_to_float(d2),
    )


def reduce_reference(system: StateSystem, model: Model) -> StateSystem:
    """Delete the rows and columns of reference nodes.

    Mesh-based systems and systems that are already reduced are returned
    unchanged.

    Raises
    ------
    NoReferenceNode
    """
    if not system.is_node_based:
        return system
    if not model.reference_nodes:
        raise NoReferenceNode("the model declares no reference node")
    if len(system.state_ids) != len(system.full_ids):
        return system
    refs = set(model.reference_nodes)
    keep = np.array([i for i, n in enumerate(system.full_ids) if n not in refs], dtype=int)
    ix = np.ix_(keep, keep)
    return replace(
        system,
        state_ids=tuple(system.full_ids[i] for i in keep),
        M=system.M[ix], D=system.D[ix], K=system.K[ix],
        B=system.B[keep, :],
        A_state=system.A_state[:, keep],
        forcing_couplings={k: v[keep, :] for k, v in system.forcing_couplings.items()},
        reduced_index_map=keep,
    )


def compile_model(model: Model, path: str, exact: bool = False) -> StateSystem:
    """Compile ``model`` along a named path.

    Raises
    ------
    UnsupportedPath
        For diagram paths without generated equations, or unknown names.
    """
    if path == "static-node":
        return compile_static_node_potential(model, exact=exact)
    if path == "static-mesh":
        return compile_static_mesh_current(model, exact=exact)
    if path == "psi":
        return compile_psi_state(model, exact=exact)
    if path == "q":
        return compile_q_state(model, exact=exact)
    if path in _UNCOMPILED:
        raise UnsupportedPath(
            f"path {path!r} appears only in the diagram; no equations are generated for it. "
            f"Choose one of {', '.join(PATHS)}",
            subject=path,
        )
    raise UnsupportedPath(f"unknown path {path!r}; choose one of {', '.join(PATHS)}", subject=path)


def pencil_eigenvalues(system: StateSystem, zero_tol: float = 1e-6) -> np.ndarray:
    """Finite nonzero eigenvalues of ``lam^2 M + lam D + K``.

    Computed from the companion linearization.  Zero eigenvalues are gauge
    modes of the integral state (a constant flux potential, for instance)
    and are dropped, as are infinite ones from a singular ``M``.  A
    defective zero eigenvalue splits into values of order ``sqrt(eps)``,
    hence the default ``zero_tol`` (relative to the largest entry).
    """
    s = system.as_float()
    n = s.n_states
    if n == 0:
        return np.zeros(0, dtype=complex)
    eye, zero = np.eye(n), np.zeros((n, n))
    A = np.block([[zero, eye], [-s.K, -s.D]])
    Bm = np.block([[eye, zero], [zero, s.M]])
    alpha, beta = sla.eig(A, Bm, right=False, homogeneous_eigvals=True)
    scale = max(1.0, np.abs(A).max(), np.abs(Bm).max())
    finite = np.abs(beta) > 1e-12 * scale
    lam = alpha[finite] / beta[finite]
    big = np.abs(lam) < 1e12 * scale
    lam = lam[big]
    return np.sort_complex(lam[np.abs(lam) > zero_tol * scale])
