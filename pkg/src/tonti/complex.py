"""Oriented cell complexes and their incidence operators.

A complex has nodes (0-cells), branches (1-cells, oriented tail to head)
and meshes (2-cells, given as signed walks over branches).  The boundary
matrix of branches assigns ``+1`` to the head and ``-1`` to the tail, so a
branch flow counts as entering its head.  Coboundaries are transposes of
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DanglingEndpoint,
    DuplicateId,
    MissingMeshes,
    OpenMeshWalk,
    SelfLoop,
    UnknownEntity,
)

__all__ = [
    "CellComplex",
    "Finding",
    "IncidenceMatrix",
    "ValidationReport",
    "boundary_1",
    "boundary_2",
    "build_complex",
    "coboundary_0",
    "coboundary_1",
    "cycle_rank",
    "find_meshes",
    "validate",
]


@dataclass(frozen=True)
class CellComplex:
    """Oriented 2-complex of a lumped network.

    Parameters
    ----------
    node_ids : tuple of str
    branch_ids : tuple of str
    endpoints : tuple of (str, str)
        ``(tail, head)`` per branch, in branch order.
    meshes : tuple of (str, tuple of (str, int)), optional
        Mesh identifier and its signed branch walk.  ``None`` means the
        meshes have not been declared yet (see :func:`find_meshes`).

    Notes
    -----
    The constructor does not check anything; use :func:`build_complex`
    to obtain a validated complex.
    """

    node_ids: tuple
    branch_ids: tuple
    endpoints: tuple
    meshes: Optional[tuple] = None

    @cached_property
    def node_index(self):
        return {n: i for i, n in enumerate(self.node_ids)}

    @cached_property
    def branch_index(self):
        return {b: i for i, b in enumerate(self.branch_ids)}

    @property
    def mesh_ids(self):
        return tuple(m for m, _ in (self.meshes or ()))

    @cached_property
    def mesh_index(self):
        return {m: i for i, m in enumerate(self.mesh_ids)}

    @property
    def n_nodes(self):
        return len(self.node_ids)

    @property
    def n_branches(self):
        return len(self.branch_ids)

    @property
    def n_meshes(self):
        return len(self.meshes or ())

    @property
    def has_meshes(self):
        return self.meshes is not None

    def with_meshes(self, meshes):
        """Return a copy of the complex with the given mesh set."""
        return replace(self, meshes=_freeze_meshes(meshes))

    def components(self):
        """Connected components as lists of node indices, in node order."""
        parent = list(range(self.n_nodes))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        idx = self.node_index
        for tail, head in self.endpoints:
            a, b = find(idx[tail]), find(idx[head])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups = {}
        for i in range(self.n_nodes):
            groups.setdefault(find(i), []).append(i)
        return list(groups.values())


@dataclass(frozen=True)
class IncidenceMatrix:
    """Sparse integer incidence matrix between two cell dimensions.

    Attributes
    ----------
    row_dim, col_dim : int
        Cell dimensions indexing rows and columns.
    data : scipy.sparse.csr_array
        Entries in {-1, 0, +1}.
    """

    row_dim: int
    col_dim: int
    data: sp.csr_array = field(repr=False)

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self):
        return IncidenceMatrix(self.col_dim, self.row_dim, sp.csr_array(self.data.T))

    def toarray(self, dtype=np.int64):
        return self.data.toarray().astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, IncidenceMatrix):
            return IncidenceMatrix(self.row_dim, other.col_dim, sp.csr_array(self.data @ other.data))
        return self.data @ other

    def __eq__(self, other):
        if not isinstance(other, IncidenceMatrix):
            return NotImplemented
        return (
            self.row_dim == other.row_dim
            and self.col_dim == other.col_dim
            and self.shape == other.shape
            and (self.data != other.data).nnz == 0
        )

    __hash__ = None


def _freeze_meshes(meshes):
    if meshes is None:
        return None
    out = []
    for mid, walk in meshes:
        out.append((str(mid), tuple((str(b), int(s)) for b, s in walk)))
    return tuple(out)


def build_complex(
    nodes: Sequence[str],
    branches: Iterable,
    meshes: Optional[Iterable] = None,
) -> CellComplex:
    """Build and check a cell complex.

    Parameters
    ----------
    nodes : sequence of str
    branches : iterable of (id, tail, head)
    meshes : iterable of (id, [(branch_id, sign), ...]), optional
        Signed walks.  Each must be closed, i.e. its boundary must vanish.

    Raises
    ------
    DuplicateId, DanglingEndpoint, SelfLoop, UnknownEntity, OpenMeshWalk
    """
    node_ids = tuple(str(n) for n in nodes)
    seen = set()
    for n in node_ids:
        if n in seen:
            raise DuplicateId(f"duplicate node id {n!r}", subject=n)
        seen.add(n)
    bids, ends = [], []
    for bid, tail, head in branches:
        bid, tail, head = str(bid), str(tail), str(head)
        if bid in seen:
            raise DuplicateId(f"duplicate id {bid!r}", subject=bid)
        seen.add(bid)
        for end in (tail, head):
            if end not in node_ids:
                raise DanglingEndpoint(
                    f"branch {bid!r} refers to unknown node {end!r}", subject=bid
                )
        if tail == head:
            raise SelfLoop(f"branch {bid!r} starts and ends at {tail!r}", subject=bid)
        bids.append(bid)
        ends.append((tail, head))
    cx = CellComplex(tuple(node_ids), tuple(bids), tuple(ends), _freeze_meshes(meshes))
    for mid, walk in cx.meshes or ():
        if mid in seen:
            raise DuplicateId(f"duplicate id {mid!r}", subject=mid)
        seen.add(mid)
        for b, s in walk:
            if b not in cx.branch_index:
                raise UnknownEntity(f"mesh {mid!r} refers to unknown branch {b!r}", subject=mid)
            if s not in (1, -1):
                raise OpenMeshWalk(f"mesh {mid!r} has orientation {s} on {b!r}", subject=mid)
    if cx.meshes:
        d1, d2 = boundary_1(cx), boundary_2(cx)
        bad = np.flatnonzero(np.abs((d1 @ d2).data).sum(axis=0))
        if bad.size:
            mid = cx.mesh_ids[bad[0]]
            raise OpenMeshWalk(f"mesh {mid!r} is not a closed walk", subject=mid)
    return cx


def boundary_1(cx: CellComplex) -> IncidenceMatrix:
    """Boundary of branches, shape ``(n_nodes, n_branches)``."""
    rows, cols, vals = [], [], []
    idx = cx.node_index
    for j, (tail, head) in enumerate(cx.endpoints):
        rows += [idx[head], idx[tail]]
        cols += [j, j]
        vals += [1, -1]
    data = sp.csr_array(
        (np.array(vals, dtype=np.int64), (rows, cols)), shape=(cx.n_nodes, cx.n_branches)
    )
    return IncidenceMatrix(0, 1, data)


def boundary_2(cx: CellComplex) -> IncidenceMatrix:
    """Boundary of meshes, shape ``(n_branches, n_meshes)``.

    Raises
    ------
    MissingMeshes
        If the complex has no declared meshes.
    """
    if cx.meshes is None:
        raise MissingMeshes("the complex has no declared meshes; run find_meshes first")
    mat = np.zeros((cx.n_branches, cx.n_meshes), dtype=np.int64)
    bidx = cx.branch_index
    for k, (_, walk) in enumerate(cx.meshes):
        for b, s in walk:
            mat[bidx[b], k] += s
    return IncidenceMatrix(1, 2, sp.csr_array(mat))


def coboundary_0(cx: CellComplex) -> IncidenceMatrix:
    """Coboundary of node cochains, the transpose of :func:`boundary_1`."""
    return boundary_1(cx).T


def coboundary_1(cx: CellComplex) -> IncidenceMatrix:
    """Coboundary of branch cochains, the transpose of :func:`boundary_2`."""
    return boundary_2(cx).T


def cycle_rank(cx: CellComplex) -> int:
    """Dimension of the cycle space, ``E - V + C``."""
    return cx.n_branches - cx.n_nodes + len(cx.components())


def find_meshes(cx: CellComplex, prefix: str = "M") -> tuple:
    """Fundamental cycle basis of a spanning forest.

    Branches are scanned in declaration order; a branch joining two nodes
    that are already connected is a chord and yields one mesh.  Each mesh
    follows its chord from tail to head and returns through the forest.

    Returns
    -------
    tuple of (str, tuple of (str, int))
        ``E - V + C`` meshes named ``prefix1, prefix2, ...``.
    """
    n = cx.n_nodes
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    idx = cx.node_index
    adj = [[] for _ in range(n)]
    chords = []
    for j, (tail, head) in enumerate(cx.endpoints):
        t, h = idx[tail], idx[head]
        rt, rh = find(t), find(h)
        if rt == rh:
            chords.append(j)
        else:
            parent[max(rt, rh)] = min(rt, rh)
            adj[t].append((h, j, 1))
            adj[h].append((t, j, -1))

    taken = set(cx.node_ids) | set(cx.branch_ids)
    meshes = []
    counter = 0
    for j in chords:
        tail, head = cx.endpoints[j]
        path = _tree_path(adj, idx[head], idx[tail])
        walk = [(cx.branch_ids[j], 1)] + [(cx.branch_ids[b], s) for b, s in path]
        counter += 1
        while f"{prefix}{counter}" in taken:
            counter += 1
        name = f"{prefix}{counter}"
        taken.add(name)
        meshes.append((name, tuple(walk)))
    return tuple(meshes)


def _tree_path(adj, start, goal):
    # breadth-first search restricted to forest edges
    prev = {start: None}
    queue = [start]
    for u in queue:
        if u == goal:
            break
        for v, b, s in adj[u]:
            if v not in prev:
                prev[v] = (u, b, s)
                queue.append(v)
    path = []
    u = goal
    while prev[u] is not None:
        p, b, s = prev[u]
        path.append((b, s))
        u = p
    return path[::-1]


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    subject: Optional[str] = None


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.findings

    def codes(self):
        return [f.code for f in self.findings]

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(
            f"{f.code}: {f.message}" + (f" [{f.subject}]" if f.subject else "")
            for f in self.findings
        )


def validate(cx: CellComplex) -> ValidationReport:
    """Check a (possibly unvalidated) complex and list every problem found.

    Checks cover identifier uniqueness, endpoint resolution, isolated
    nodes, closure of every mesh walk, and whether declared meshes form
    a basis of the cycle space.
    """
    report = ValidationReport()
    add = report.findings.append
    seen = set()
    for cid in list(cx.node_ids) + list(cx.branch_ids) + list(cx.mesh_ids):
        if cid in seen:
            add(Finding("DuplicateId", f"identifier {cid!r} is used twice", cid))
        seen.add(cid)
    nodes = set(cx.node_ids)
    ends_ok = True
    touched = set()
    for bid, (tail, head) in zip(cx.branch_ids, cx.endpoints):
        for end in (tail, head):
            if end not in nodes:
                ends_ok = False
                add(Finding("DanglingEndpoint", f"branch {bid!r} refers to unknown node {end!r}", bid))
        if tail == head:
            add(Finding("SelfLoop", f"branch {bid!r} is a self-loop", bid))
        touched.update((tail, head))
    for n in cx.node_ids:
        if n not in touched:
            add(Finding("ConnectivityWarning", f"node {n!r} is isolated", n))
    if not ends_ok or cx.meshes is None:
        return report
    bidx = cx.branch_index
    walks_ok = True
    for mid, walk in cx.meshes:
        for b, s in walk:
            if b not in bidx:
                walks_ok = False
                add(Finding("UnknownEntity", f"mesh {mid!r} refers to unknown branch {b!r}", mid))
    if not walks_ok:
        return report
    d1 = boundary_1(cx).toarray()
    d2 = boundary_2(cx).toarray()
    prod = d1 @ d2
    for k, mid in enumerate(cx.mesh_ids):
        if np.any(prod[:, k]):
            add(Finding("OpenMeshWalk", f"mesh {mid!r} is not a closed walk", mid))
    if cx.n_meshes and not np.any(prod):
        rank = np.linalg.matrix_rank(d2.astype(float))
        if rank < cx.n_meshes:
            add(Finding("DependentMeshes", "declared meshes are linearly dependent"))
    beta = cycle_rank(cx)
    if not np.any(prod):
        rank = np.linalg.matrix_rank(d2.astype(float)) if cx.n_meshes else 0
        if rank < beta:
            add(
                Finding(
                    "IncompleteMeshBasis",
                    f"meshes span {rank} of {beta} independent cycles",
                )
            )
    return report
