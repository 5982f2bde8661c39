import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tonti.complex import (
    CellComplex,
    IncidenceMatrix,
    boundary_1,
    boundary_2,
    build_complex,
    coboundary_0,
    coboundary_1,
    cycle_rank,
    find_meshes,
    validate,
)
from tonti.errors import DanglingEndpoint, DuplicateId, MissingMeshes, OpenMeshWalk, SelfLoop

from helpers import random_graph

EX1_BRANCHES = [("l1", "A", "G"), ("l2", "A", "G"), ("l3", "A", "B"), ("l4", "B", "G")]
EX1_MESHES = [("M1", [("l1", -1), ("l2", 1)]), ("M2", [("l2", -1), ("l3", 1), ("l4", 1)])]


def example1():
    return build_complex(["A", "B", "G"], EX1_BRANCHES, EX1_MESHES)


def test_boundary_1_of_example():
    expected = np.array([[-1, -1, -1, 0], [0, 0, 1, -1], [1, 1, 0, 1]])
    np.testing.assert_array_equal(boundary_1(example1()).toarray(), expected)


def test_boundary_2_of_example():
    expected = np.array([[-1, 0], [1, -1], [0, 1], [0, 1]])
    np.testing.assert_array_equal(boundary_2(example1()).toarray(), expected)


def test_coboundaries_are_transposes():
    cx = example1()
    assert coboundary_0(cx) == boundary_1(cx).T
    assert coboundary_1(cx) == boundary_2(cx).T
    assert coboundary_0(cx).row_dim == 1 and coboundary_0(cx).col_dim == 0


def test_boundary_of_boundary_vanishes_on_example():
    cx = example1()
    assert not np.any((boundary_1(cx) @ boundary_2(cx)).toarray())


def test_single_branch_complex():
    cx = build_complex(["a", "b"], [("e", "a", "b")])
    np.testing.assert_array_equal(boundary_1(cx).toarray(), [[-1], [1]])
    assert find_meshes(cx) == ()


def test_build_errors():
    with pytest.raises(DuplicateId):
        build_complex(["a", "a"], [])
    with pytest.raises(DuplicateId):
        build_complex(["a", "b"], [("a", "a", "b")])
    with pytest.raises(DanglingEndpoint):
        build_complex(["a"], [("e", "a", "z")])
    with pytest.raises(SelfLoop):
        build_complex(["a"], [("e", "a", "a")])
    with pytest.raises(OpenMeshWalk):
        build_complex(["A", "B", "G"], EX1_BRANCHES, [("M1", [("l1", 1), ("l2", 1)])])


def test_undeclared_meshes_raise():
    cx = build_complex(["A", "B", "G"], EX1_BRANCHES)
    with pytest.raises(MissingMeshes):
        boundary_2(cx)


def test_find_meshes_on_example():
    cx = build_complex(["A", "B", "G"], EX1_BRANCHES)
    meshes = find_meshes(cx)
    assert len(meshes) == 2 == cycle_rank(cx)
    # the first fundamental cycle coincides with the hand-drawn one
    assert meshes[0] == ("M1", (("l2", 1), ("l1", -1)))
    full = cx.with_meshes(meshes)
    assert not np.any((boundary_1(full) @ boundary_2(full)).toarray())
    assert validate(full).ok


def test_find_meshes_is_deterministic():
    cx = build_complex(["A", "B", "G"], EX1_BRANCHES)
    assert find_meshes(cx) == find_meshes(cx)


def test_validate_reports_without_raising():
    bad = CellComplex(("a", "b", "c"), ("e",), (("a", "b"),), (("M", (("e", 1),)),))
    codes = validate(bad).codes()
    assert "ConnectivityWarning" in codes
    assert "OpenMeshWalk" in codes


def test_validate_flags_incomplete_basis():
    cx = build_complex(["A", "B", "G"], EX1_BRANCHES, EX1_MESHES[:1])
    assert validate(cx).codes() == ["IncompleteMeshBasis"]


def test_validate_empty_complex():
    assert validate(CellComplex((), (), (), ())).ok


def test_incidence_matmul_vector():
    d1 = boundary_1(example1())
    np.testing.assert_allclose(d1 @ np.ones(4), [-3, 0, 3])
    assert isinstance(d1, IncidenceMatrix)


def test_multiple_components():
    nodes = ["a", "b", "c", "d"]
    cx = build_complex(nodes, [("x", "a", "b"), ("y", "b", "a"), ("z", "c", "d")])
    assert len(cx.components()) == 2
    assert cycle_rank(cx) == 1


@st.composite
def complexes(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 15))
    extra = draw(st.integers(0, 20))
    comps = draw(st.integers(1, max(1, n // 2)))
    nodes, branches, _ = random_graph(rng, n, extra, comps)
    cx = build_complex(nodes, branches)
    return cx.with_meshes(find_meshes(cx))


@settings(max_examples=200, deadline=None, derandomize=True)
@given(complexes())
def test_random_complex_structure(cx):
    d1 = boundary_1(cx).toarray()
    d2 = boundary_2(cx).toarray()
    assert not np.any(d1 @ d2)
    assert not np.any(coboundary_1(cx).toarray() @ coboundary_0(cx).toarray())
    np.testing.assert_array_equal(coboundary_0(cx).toarray(), d1.T)
    np.testing.assert_array_equal(coboundary_1(cx).toarray(), d2.T)
    assert cx.n_meshes == cycle_rank(cx)
    if cx.n_meshes:
        assert np.linalg.matrix_rank(d2) == cx.n_meshes
    # every column of the branch boundary has one head and one tail
    np.testing.assert_array_equal(d1.sum(axis=0), 0)
    assert validate(cx).ok or set(validate(cx).codes()) == {"ConnectivityWarning"}
