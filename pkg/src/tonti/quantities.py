"""Physical quantity kinds, cochains and staggered time grids.

Every quantity is attached to cells of one dimension of either the primal
complex (node potentials, branch voltages, electric flux) or its dual
(mesh currents, branch currents, charges).  Time quantities live on a
primal grid (instants ``t0 + k dt``) or a dual grid (half-step instants).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .complex import CellComplex, boundary_1, boundary_2
from .errors import DimensionMismatch, TooFewSamples

__all__ = [
    "Cochain",
    "Family",
    "QuantityKind",
    "TimeGrid",
    "apply_boundary",
    "apply_coboundary",
    "time_derivative",
    "time_integral",
]


class Family(str, enum.Enum):
    PRIMAL = "primal"
    DUAL = "dual"


class QuantityKind(enum.Enum):
    """Network quantities with their cell dimension and family.

    The value is ``(symbol, cell_dim, family)``.  ``cell_dim`` counts cells
    of the complex that carries the quantity: nodes are 0, branches 1 and
    meshes 2 for primal kinds; for dual kinds the same labels are used but
    the quantity is read on the dual cells (mesh kinds sit at dimension 2).
    """

    POTENTIAL = ("e", 0, Family.PRIMAL)
    FLUX_POTENTIAL = ("psi", 0, Family.PRIMAL)
    VOLTAGE = ("v", 1, Family.PRIMAL)
    FLUX = ("phi", 1, Family.PRIMAL)
    MESH_VOLTAGE = ("u", 2, Family.PRIMAL)
    MESH_CURRENT = ("i", 2, Family.DUAL)
    MESH_CHARGE = ("q", 2, Family.DUAL)
    CURRENT = ("j", 1, Family.DUAL)
    CHARGE = ("Q", 1, Family.DUAL)
    NODE_CURRENT = ("s", 0, Family.DUAL)

    def __init__(self, symbol, cell_dim, family):
        self.symbol = symbol
        self.cell_dim = cell_dim
        self.family = family

    @property
    def is_primal(self):
        return self.family is Family.PRIMAL


# primal kinds advance 0 -> 1 -> 2 under the coboundary, dual kinds
# descend 2 -> 1 -> 0 under the boundary
_COBOUNDARY = {
    QuantityKind.POTENTIAL: QuantityKind.VOLTAGE,
    QuantityKind.FLUX_POTENTIAL: QuantityKind.FLUX,
    QuantityKind.VOLTAGE: QuantityKind.MESH_VOLTAGE,
}
_BOUNDARY = {
    QuantityKind.MESH_CURRENT: QuantityKind.CURRENT,
    QuantityKind.MESH_CHARGE: QuantityKind.CHARGE,
    QuantityKind.CURRENT: QuantityKind.NODE_CURRENT,
}

# display names per physical domain for the generalized quantities
DISPLAY_NAMES = {
    "electrical": {
        QuantityKind.POTENTIAL: "node potential",
        QuantityKind.FLUX_POTENTIAL: "node flux potential",
        QuantityKind.VOLTAGE: "voltage",
        QuantityKind.FLUX: "flux linkage",
        QuantityKind.MESH_VOLTAGE: "mesh voltage",
        QuantityKind.MESH_CURRENT: "mesh current",
        QuantityKind.MESH_CHARGE: "mesh charge",
        QuantityKind.CURRENT: "current",
        QuantityKind.CHARGE: "charge",
        QuantityKind.NODE_CURRENT: "injected current",
    },
    "mech_translation": {
        QuantityKind.POTENTIAL: "node velocity",
        QuantityKind.FLUX_POTENTIAL: "node displacement",
        QuantityKind.VOLTAGE: "relative velocity",
        QuantityKind.FLUX: "relative displacement",
        QuantityKind.MESH_VOLTAGE: "mesh velocity",
        QuantityKind.MESH_CURRENT: "mesh force",
        QuantityKind.MESH_CHARGE: "mesh impulse",
        QuantityKind.CURRENT: "force",
        QuantityKind.CHARGE: "impulse",
        QuantityKind.NODE_CURRENT: "applied force",
    },
    "mech_rotation": {
        QuantityKind.POTENTIAL: "node angular velocity",
        QuantityKind.FLUX_POTENTIAL: "node angle",
        QuantityKind.VOLTAGE: "relative angular velocity",
        QuantityKind.FLUX: "relative angle",
        QuantityKind.MESH_VOLTAGE: "mesh angular velocity",
        QuantityKind.MESH_CURRENT: "mesh torque",
        QuantityKind.MESH_CHARGE: "mesh angular impulse",
        QuantityKind.CURRENT: "torque",
        QuantityKind.CHARGE: "angular impulse",
        QuantityKind.NODE_CURRENT: "applied torque",
    },
    "hydraulic": {
        QuantityKind.POTENTIAL: "node pressure",
        QuantityKind.FLUX_POTENTIAL: "node pressure momentum",
        QuantityKind.VOLTAGE: "pressure difference",
        QuantityKind.FLUX: "pressure momentum",
        QuantityKind.MESH_VOLTAGE: "mesh pressure",
        QuantityKind.MESH_CURRENT: "mesh flow rate",
        QuantityKind.MESH_CHARGE: "mesh volume",
        QuantityKind.CURRENT: "volume flow rate",
        QuantityKind.CHARGE: "volume",
        QuantityKind.NODE_CURRENT: "injected flow rate",
    },
}


def display_name(kind: QuantityKind, domain: str = "electrical") -> str:
    return DISPLAY_NAMES[domain][kind]


@dataclass(frozen=True)
class Cochain:
    """Values of one quantity on every cell of a given dimension.

    Parameters
    ----------
    kind : QuantityKind
    values : ndarray
        One entry per cell, or shape ``(n_times, n_cells)`` for a
        time series.
    units : str, optional
    """

    kind: QuantityKind
    values: np.ndarray
    units: str = ""

    @property
    def dim(self):
        return self.kind.cell_dim

    @property
    def family(self):
        return self.kind.family


def _n_cells(cx: CellComplex, dim: int) -> int:
    return (cx.n_nodes, cx.n_branches, cx.n_meshes)[dim]


def _check_length(cochain, cx):
    values = np.asarray(cochain.values)
    n = _n_cells(cx, cochain.dim)
    if values.shape[-1] != n:
        raise DimensionMismatch(
            f"{cochain.kind.name} cochain has {values.shape[-1]} entries, "
            f"the complex has {n} cells of dimension {cochain.dim}"
        )
    return values


def apply_coboundary(cochain: Cochain, cx: CellComplex) -> Cochain:
    """Coboundary of a primal cochain, raising its dimension by one.

    The result is the plain coboundary ``delta c``.  The physical branch
    voltage of a potential ``e`` is its negative, see the compiler.
    """
    if cochain.kind not in _COBOUNDARY:
        raise DimensionMismatch(
            f"the coboundary is not defined for {cochain.kind.name} cochains"
        )
    values = _check_length(cochain, cx)
    op = boundary_1(cx) if cochain.dim == 0 else boundary_2(cx)
    out = (op.T @ values.T).T
    return Cochain(_COBOUNDARY[cochain.kind], np.asarray(out), cochain.units)


def apply_boundary(cochain: Cochain, cx: CellComplex) -> Cochain:
    """Boundary of a dual cochain, lowering its dimension by one."""
    if cochain.kind not in _BOUNDARY:
        raise DimensionMismatch(
            f"the boundary is not defined for {cochain.kind.name} cochains"
        )
    values = _check_length(cochain, cx)
    op = boundary_2(cx) if cochain.dim == 2 else boundary_1(cx)
    out = (op @ values.T).T
    return Cochain(_BOUNDARY[cochain.kind], np.asarray(out), cochain.units)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t0 + k dt`` for ``k = 0 .. n_steps - 1``.

    A dual grid is conventionally the half-step shift of a primal one; the
    ``t0`` stored here is always the first instant actually sampled.
    """

    t0: float
    dt: float
    n_steps: int
    family: Family = Family.PRIMAL

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("a grid needs at least one instant")

    @classmethod
    def span(cls, t0: float, t_end: float, dt: float) -> "TimeGrid":
        """Grid covering ``[t0, t_end]`` with step ``dt``."""
        n = int(round((t_end - t0) / dt)) + 1
        return cls(float(t0), float(dt), n)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.n_steps - 1)

    def shifted(self, n_steps: int) -> "TimeGrid":
        other = Family.DUAL if self.family is Family.PRIMAL else Family.PRIMAL
        return TimeGrid(self.t0 + 0.5 * self.dt, self.dt, n_steps, other)


def time_derivative(samples, grid: TimeGrid):
    """Forward differences, placed on the opposite-family grid.

    Returns
    -------
    values : ndarray
        ``(s[k+1] - s[k]) / dt``, one fewer sample than the input.
    grid : TimeGrid
        Instants ``t0 + (k + 1/2) dt``.
    """
    s = np.asarray(samples)
    if s.shape[0] != grid.n_steps:
        raise DimensionMismatch(f"{s.shape[0]} samples on a grid of {grid.n_steps} instants")
    if s.shape[0] < 2:
        raise TooFewSamples("a time derivative needs at least two samples")
    return np.diff(s, axis=0) / grid.dt, grid.shifted(s.shape[0] - 1)


def time_integral(samples, grid: TimeGrid):
    """Running rectangle-rule integral, placed on the opposite-family grid.

    Sample ``k`` of the result is ``dt * sum(s[:k+1])``, the integral up to
    ``t0 + (k + 1/2) dt`` when each input sample stands for its cell.
    Differentiating the result gives back ``s[1:]`` on the original
    instants.
    """
    s = np.asarray(samples)
    if s.shape[0] != grid.n_steps:
        raise DimensionMismatch(f"{s.shape[0]} samples on a grid of {grid.n_steps} instants")
    if s.shape[0] < 1:
        raise TooFewSamples("a time integral needs at least one sample")
    return grid.dt * np.cumsum(s, axis=0), grid.shifted(s.shape[0])
