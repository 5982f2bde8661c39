"""Network models: a complex, branch elements, transducers and references."""

from __future__ import annotations

from dataclasses import dataclass, field

from .complex import CellComplex, Finding, ValidationReport, validate
from .elements import (
    DOMAINS,
    Element,
    ElementKind,
    Transducer,
    TransducerKind,
    sign_convention_check,
)
from .errors import (
    ConflictingElement,
    EmptyBranch,
    InvalidValue,
    NoReferenceNode,
    TransducerOnPassiveBranch,
    UnknownEntity,
)

__all__ = ["Model", "build_model", "check_model", "validate_model"]


@dataclass(frozen=True)
class Model:
    """A lumped network ready for compilation.

    The constructor stores its arguments unchecked; :func:`build_model`
    returns a checked model.

    Parameters
    ----------
    complex : CellComplex
    elements : tuple of Element
    transducers : tuple of Transducer
    reference_nodes : tuple of str
        At least one per connected component.  Several references in one
        component are tied to the same zero potential.
    domains : dict, optional
        Branch id to domain name; missing branches default to the domain
        of their elements, else ``"electrical"``.
    """

    complex: CellComplex
    elements: tuple = ()
    transducers: tuple = ()
    reference_nodes: tuple = ()
    domains: dict = field(default_factory=dict, compare=False)

    def elements_on(self, branch):
        return [el for el in self.elements if el.branch == branch]

    def domain_of(self, branch) -> str:
        if branch in self.domains:
            return self.domains[branch]
        for el in self.elements:
            if el.branch == branch:
                return el.domain
        return "electrical"

    @property
    def has_reactive(self):
        return any(el.kind.is_reactive for el in self.elements)

    @property
    def n_transformers(self):
        return sum(t.kind is TransducerKind.TRANSFORMER for t in self.transducers)

    @property
    def n_gyrators(self):
        return sum(t.kind is TransducerKind.GYRATOR for t in self.transducers)


def build_model(complex, elements=(), transducers=(), reference_nodes=(), domains=None) -> Model:
    """Assemble and check a :class:`Model`."""
    model = Model(
        complex,
        tuple(elements),
        tuple(transducers),
        tuple(str(r) for r in reference_nodes),
        dict(domains or {}),
    )
    check_model(model)
    return model


def check_model(model: Model) -> None:
    """Raise the first structural problem of ``model``.

    Raises
    ------
    UnknownEntity, ConflictingElement, TransducerOnPassiveBranch,
    EmptyBranch, NoReferenceNode, InvalidValue
    """
    cx = model.complex
    bidx = cx.branch_index
    kinds = {}
    for el in model.elements:
        if el.branch not in bidx:
            raise UnknownEntity(f"{el.kind.value} on unknown branch {el.branch!r}",
                                subject=el.branch, span=el.span)
        seen = kinds.setdefault(el.branch, [])
        if el.kind in seen:
            raise ConflictingElement(f"branch {el.branch!r} has two {el.kind.value}s",
                                     subject=el.branch, span=el.span)
        if el.kind.is_passive and any(k.is_passive for k in seen):
            raise ConflictingElement(
                f"branch {el.branch!r} already holds a passive element", subject=el.branch,
                span=el.span,
            )
        seen.append(el.kind)
    used = set()
    for tr in model.transducers:
        if tr.left_branch == tr.right_branch:
            raise InvalidValue(f"{tr.kind.value} needs two distinct branches",
                               subject=tr.left_branch, span=tr.span)
        for b in (tr.left_branch, tr.right_branch):
            if b not in bidx:
                raise UnknownEntity(f"{tr.kind.value} on unknown branch {b!r}", subject=b,
                                    span=tr.span)
            if b in kinds:
                raise TransducerOnPassiveBranch(
                    f"{tr.kind.value} branch {b!r} also carries elements", subject=b, span=tr.span
                )
            if b in used:
                raise ConflictingElement(f"branch {b!r} belongs to two transducers", subject=b,
                                         span=tr.span)
            used.add(b)
    for b in cx.branch_ids:
        if b not in kinds and b not in used:
            raise EmptyBranch(f"branch {b!r} carries no element", subject=b)
    for b, d in model.domains.items():
        if d not in DOMAINS:
            raise InvalidValue(f"unknown domain {d!r}", subject=b)
    nidx = cx.node_index
    for r in model.reference_nodes:
        if r not in nidx:
            raise UnknownEntity(f"reference {r!r} is not a node", subject=r)
    refs = {nidx[r] for r in model.reference_nodes}
    for comp in cx.components():
        if not refs.intersection(comp):
            node = cx.node_ids[comp[0]]
            raise NoReferenceNode(
                f"component containing {node!r} has no reference node", subject=node
            )


def validate_model(model: Model) -> ValidationReport:
    """Collect complex findings, placement findings and a model check."""
    report = validate(model.complex)
    report.findings.extend(sign_convention_check(model).findings)
    if report.ok:
        try:
            check_model(model)
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            report.findings.append(Finding(type(exc).__name__, str(exc), getattr(exc, "subject", None)))
    cx = model.complex
    nidx = cx.node_index
    refs = {nidx[r] for r in model.reference_nodes if r in nidx}
    for comp in cx.components():
        tied = [cx.node_ids[i] for i in comp if i in refs]
        if len(tied) > 1:
            report.findings.append(
                Finding("MultipleReferences", f"references {', '.join(tied)} share a component")
            )
    return report
