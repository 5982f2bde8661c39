import pytest

from tonti.complex import build_complex
from tonti.elements import Element, Transducer
from tonti.errors import (
    ConflictingElement,
    EmptyBranch,
    InvalidValue,
    NoReferenceNode,
    TransducerOnPassiveBranch,
    UnknownEntity,
)
from tonti.model import build_model, validate_model

from helpers import fixture

CX = build_complex(["a", "b", "g"], [("x", "a", "g"), ("y", "a", "b"), ("z", "b", "g")])


def resistors(*branches):
    return [Element(b, "resistor", 1.0) for b in branches]


def test_valid_model():
    model = build_model(CX, resistors("x", "y", "z"), (), ["g"])
    assert model.elements_on("x")[0].kind.value == "resistor"
    assert not model.has_reactive
    assert validate_model(model).ok


def test_unknown_branch():
    with pytest.raises(UnknownEntity):
        build_model(CX, resistors("x", "y", "z", "w"), (), ["g"])


def test_unknown_reference():
    with pytest.raises(UnknownEntity):
        build_model(CX, resistors("x", "y", "z"), (), ["nope"])


def test_two_passive_elements_conflict():
    els = resistors("x", "y", "z") + [Element("x", "capacitor", 1.0)]
    with pytest.raises(ConflictingElement):
        build_model(CX, els, (), ["g"])
    with pytest.raises(ConflictingElement):
        build_model(CX, els[:3] + [Element("x", "resistor", 2.0)], (), ["g"])


def test_sources_may_share_a_branch():
    els = resistors("x", "y", "z") + [
        Element("x", "effort_source", 1.0),
        Element("x", "flow_source", 2.0),
    ]
    build_model(CX, els, (), ["g"])


def test_empty_branch():
    with pytest.raises(EmptyBranch):
        build_model(CX, resistors("x", "y"), (), ["g"])


def test_missing_reference():
    with pytest.raises(NoReferenceNode):
        build_model(CX, resistors("x", "y", "z"), (), [])


def test_every_component_needs_a_reference():
    cx = build_complex(["a", "b", "c", "d"], [("x", "a", "b"), ("y", "c", "d")])
    with pytest.raises(NoReferenceNode) as info:
        build_model(cx, resistors("x", "y"), (), ["a"])
    assert info.value.subject == "c"


def test_transducer_rules():
    cx = build_complex(["a", "b", "c", "d"], [("x", "a", "b"), ("y", "c", "d"), ("z", "c", "d")])
    with pytest.raises(TransducerOnPassiveBranch):
        build_model(cx, resistors("x", "y", "z"), [Transducer("transformer", "x", "y", 2.0)], ["a", "c"])
    with pytest.raises(InvalidValue):
        build_model(cx, resistors("y", "z"), [Transducer("gyrator", "x", "x", 2.0)], ["a", "c"])
    with pytest.raises(ConflictingElement):
        build_model(
            cx,
            resistors("z"),
            [Transducer("transformer", "x", "y", 2.0), Transducer("gyrator", "y", "x", 1.0)],
            ["a", "c"],
        )


def test_unknown_domain():
    with pytest.raises(InvalidValue):
        build_model(CX, resistors("x", "y", "z"), (), ["g"], domains={"x": "thermal"})


def test_multiple_references_warn():
    model = build_model(CX, resistors("x", "y", "z"), (), ["g", "b"])
    assert validate_model(model).codes() == ["MultipleReferences"]


def test_fixture_counts():
    model = fixture("electromech.net")
    assert model.n_transformers == 1 and model.n_gyrators == 1
    assert model.domain_of("LJ") == "mech_rotation"
    assert model.domain_of("LC1") == "electrical"
