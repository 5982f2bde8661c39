"""Equation generation for lumped multi-domain networks on cell complexes.

Quantities are cochains on an oriented complex of nodes, branches and
meshes.  Composing boundary, coboundary and constitutive operators along
one of four paths yields a static linear system (node potentials or mesh
currents) or a second-order pencil (flux potentials or mesh charges) with
ideal transformer constraints.
"""

from .compiler import (
    StateSystem,
    compile_model,
    compile_psi_state,
    compile_q_state,
    compile_static_mesh_current,
    compile_static_node_potential,
    pencil_eigenvalues,
    reduce_reference,
)
from .complex import (
    CellComplex,
    IncidenceMatrix,
    boundary_1,
    boundary_2,
    build_complex,
    coboundary_0,
    coboundary_1,
    find_meshes,
    validate,
)
from .elements import (
    Constant,
    Element,
    FunctionSource,
    Sine,
    Step,
    Transducer,
    assemble_constitutive,
)
from .model import Model, build_model
from .quantities import Cochain, QuantityKind, TimeGrid
from .solver import (
    Trajectory,
    integrate,
    recover_branch_quantities,
    solve_static,
    static_branch_quantities,
)

__version__ = "0.1.0"

__all__ = [
    "CellComplex",
    "Cochain",
    "Constant",
    "Element",
    "FunctionSource",
    "IncidenceMatrix",
    "Model",
    "QuantityKind",
    "Sine",
    "StateSystem",
    "Step",
    "TimeGrid",
    "Trajectory",
    "Transducer",
    "assemble_constitutive",
    "boundary_1",
    "boundary_2",
    "build_complex",
    "build_model",
    "coboundary_0",
    "coboundary_1",
    "compile_model",
    "compile_psi_state",
    "compile_q_state",
    "compile_static_mesh_current",
    "compile_static_node_potential",
    "find_meshes",
    "integrate",
    "pencil_eigenvalues",
    "recover_branch_quantities",
    "reduce_reference",
    "solve_static",
    "static_branch_quantities",
    "validate",
]
