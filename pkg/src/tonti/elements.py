"""Physical domains, branch elements, transducers and sources.

The generalized network uses one "voltage-like" across quantity and one
"current-like" through quantity per domain.  Every branch law therefore
has the form ``v - v_f = R (j - j_f)`` (and its reactive counterparts),
where ``v`` is the drop from tail to head and ``j`` the flow from tail to
head.  :func:`assemble_constitutive` collects the laws of a whole model
into branch-indexed matrices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate

from .complex import Finding, ValidationReport
from .errors import InvalidValue

__all__ = [
    "Constant",
    "ConstitutiveSet",
    "DOMAINS",
    "Domain",
    "Element",
    "ElementKind",
    "FunctionSource",
    "Sine",
    "Source",
    "Step",
    "Transducer",
    "TransducerKind",
    "assemble_constitutive",
    "parse_source",
    "sign_convention_check",
]


@dataclass(frozen=True)
class Domain:
    """Variables of one physical domain.

    ``effort`` and ``flow`` are the conjugate power variables,
    ``momentum`` and ``displacement`` their time integrals.
    """

    name: str
    effort: str
    flow: str
    momentum: str
    displacement: str


DOMAINS = {
    "electrical": Domain("electrical", "voltage", "current", "flux linkage", "charge"),
    "mech_translation": Domain(
        "mech_translation", "force", "velocity", "momentum", "displacement"
    ),
    "mech_rotation": Domain(
        "mech_rotation", "torque", "angular velocity", "angular momentum", "angle"
    ),
    "hydraulic": Domain(
        "hydraulic", "pressure", "volume flow rate", "pressure momentum", "volume"
    ),
}


# sources ---------------------------------------------------------------


class Source:
    """Time-dependent source value with its derivative and integral.

    All methods accept scalars or arrays of instants.  ``integral(t)``
    is taken from ``t = 0``.  When ``exact_integral`` is false the
    integrator accumulates the integral on its own grid instead.
    """

    exact_integral = True

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def second_derivative(self, t):
        raise NotImplementedError

    def integral(self, t):
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    def scaled(self, factor) -> "Source":
        return _Scaled(self, factor)


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, int) else str(x)


@dataclass(frozen=True)
class Constant(Source):
    level: float

    def value(self, t):
        return float(self.level) + 0.0 * np.asarray(t, dtype=float)

    def derivative(self, t):
        return 0.0 * np.asarray(t, dtype=float)

    second_derivative = derivative

    def integral(self, t):
        return float(self.level) * np.asarray(t, dtype=float)

    def spec(self):
        return f"const:{_fmt(self.level)}"


@dataclass(frozen=True)
class Step(Source):
    """``level`` for ``t >= at``, zero before.

    The jump itself is not resolved as an impulse: the derivative is zero
    everywhere.
    """

    level: float
    at: float = 0.0

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.at, float(self.level), 0.0)

    def derivative(self, t):
        return 0.0 * np.asarray(t, dtype=float)

    second_derivative = derivative

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        start = max(float(self.at), 0.0)
        return float(self.level) * np.maximum(t - start, 0.0)

    def spec(self):
        return f"step:{_fmt(self.level)}@{_fmt(self.at)}"


@dataclass(frozen=True)
class Sine(Source):
    """``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    @property
    def omega(self):
        return 2.0 * math.pi * float(self.frequency)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return float(self.amplitude) * np.sin(self.omega * t + self.phase)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return float(self.amplitude) * self.omega * np.cos(self.omega * t + self.phase)

    def second_derivative(self, t):
        return -(self.omega**2) * self.value(t)

    def integral(self, t):
        t = np.asarray(t, dtype=float)
        if self.omega == 0.0:
            return float(self.amplitude) * math.sin(self.phase) * t
        return (float(self.amplitude) / self.omega) * (
            math.cos(self.phase) - np.cos(self.omega * t + self.phase)
        )

    def spec(self):
        text = f"sin:{_fmt(self.amplitude)},{_fmt(self.frequency)}"
        if self.phase:
            text += f",{_fmt(self.phase)}"
        return text


@dataclass(frozen=True)
class FunctionSource(Source):
    """Arbitrary callable ``f(t)``.

    Derivatives use central differences unless ``df`` is supplied; the
    integral is evaluated by quadrature here and by trapezoidal
    accumulation inside the integrator.
    """

    f: Callable
    df: Optional[Callable] = None
    exact_integral = False

    def value(self, t):
        return np.vectorize(lambda s: float(self.f(s)), otypes=[float])(t)

    def derivative(self, t):
        if self.df is not None:
            return np.vectorize(lambda s: float(self.df(s)), otypes=[float])(t)
        return self._diff(self.value, t)

    def second_derivative(self, t):
        return self._diff(self.derivative, t)

    @staticmethod
    def _diff(fn, t):
        t = np.asarray(t, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(t))
        return (fn(t + h) - fn(t - h)) / (2.0 * h)

    def integral(self, t):
        def one(s):
            return _integrate.quad(lambda u: float(self.f(u)), 0.0, s, limit=200)[0]

        return np.vectorize(one, otypes=[float])(t)

    def spec(self):
        return "function"


@dataclass(frozen=True)
class _Scaled(Source):
    base: Source
    factor: float

    @property
    def exact_integral(self):
        return self.base.exact_integral

    def value(self, t):
        return self.factor * self.base.value(t)

    def derivative(self, t):
        return self.factor * self.base.derivative(t)

    def second_derivative(self, t):
        return self.factor * self.base.second_derivative(t)

    def integral(self, t):
        return self.factor * self.base.integral(t)

    def spec(self):
        return f"{self.factor}*{self.base.spec()}"


def parse_source(text: str) -> Source:
    """Parse ``const:<v>``, ``step:<v>@<t>`` or ``sin:<amp>,<hz>[,<phase>]``.

    Raises
    ------
    ValueError
        With a short description of what was expected.
    """
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError("source of the form const:, step: or sin:")
    if kind == "const":
        return Constant(_number(rest))
    if kind == "step":
        level, sep, at = rest.partition("@")
        if not sep:
            raise ValueError("step:<value>@<time>")
        return Step(_number(level), _number(at))
    if kind == "sin":
        parts = rest.split(",")
        if len(parts) not in (2, 3):
            raise ValueError("sin:<amplitude>,<frequency>[,<phase>]")
        return Sine(*[_number(p) for p in parts])
    raise ValueError("source kind const, step or sin")


def _number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("a finite number")
    return value


# elements ----------------------------------------------------------------


class ElementKind(str, enum.Enum):
    RESISTOR = "resistor"
    CAPACITOR = "capacitor"
    INDUCTOR = "inductor"
    EFFORT_SOURCE = "effort_source"
    FLOW_SOURCE = "flow_source"

    @property
    def is_passive(self):
        return self in (ElementKind.RESISTOR, ElementKind.CAPACITOR, ElementKind.INDUCTOR)

    @property
    def is_reactive(self):
        return self in (ElementKind.CAPACITOR, ElementKind.INDUCTOR)


@dataclass(frozen=True)
class Element:
    """One constitutive contribution on a branch.

    ``value`` is a positive number for passive kinds and a :class:`Source`
    (or a number, read as a constant) for source kinds.  A branch may hold
    at most one element of each kind.
    """

    branch: str
    kind: ElementKind
    value: object
    domain: str = "electrical"
    span: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ElementKind(self.kind))
        if self.domain not in DOMAINS:
            raise InvalidValue(f"unknown domain {self.domain!r}", subject=self.branch)
        if self.kind.is_passive:
            _check_positive(self.value, self.branch)
        elif not isinstance(self.value, Source):
            if not isinstance(self.value, Number):
                raise InvalidValue("a source value must be a Source or a number", subject=self.branch)
            object.__setattr__(self, "value", Constant(self.value))

    @property
    def source(self) -> Optional[Source]:
        return self.value if isinstance(self.value, Source) else None


def _check_positive(value, subject):
    try:
        number = float(value)
    except TypeError:
        # symbolic values are accepted as they are
        return
    if not math.isfinite(number) or number <= 0:
        raise InvalidValue(f"value {value!r} must be positive and finite", subject=subject)


class TransducerKind(str, enum.Enum):
    TRANSFORMER = "transformer"
    GYRATOR = "gyrator"


@dataclass(frozen=True)
class Transducer:
    """Ideal two-branch transformer or gyrator.

    A transformer imposes ``v_L = k_t v_R`` and ``j_L = j_R / k_t``; a
    gyrator couples each branch's flow to the other branch's drop through
    ``k_g``.
    """

    kind: TransducerKind
    left_branch: str
    right_branch: str
    modulus: object
    span: Optional[tuple] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", TransducerKind(self.kind))
        try:
            number = float(self.modulus)
        except TypeError:
            return
        if not math.isfinite(number) or number == 0:
            raise InvalidValue(f"modulus {self.modulus!r} must be nonzero and finite",
                               subject=self.left_branch)


# constitutive set ----------------------------------------------------------

CHANNELS = ("j", "j_dot", "j_int", "v", "v_dot", "v_int")


@dataclass
class ConstitutiveSet:
    """Branch-indexed constitutive matrices of a model.

    Passive matrices are diagonal, ``n1 x n1``, and zero on branches that
    lack that element; the gyrator matrices hold each modulus at the two
    cross positions of its branch pair.  Transformer rows are ``M x n1``.
    """

    branch_ids: tuple
    Rg: np.ndarray
    Rg_inv: np.ndarray
    Cg: np.ndarray
    Cg_inv: np.ndarray
    Lg: np.ndarray
    Lg_inv: np.ndarray
    Kg: np.ndarray
    Kg_inv: np.ndarray
    kt_rows: np.ndarray
    kt_prime_rows: np.ndarray
    transformer_branches: list
    effort_sources: dict
    flow_sources: dict
    exact: bool = False

    @property
    def n1(self):
        return len(self.branch_ids)

    @property
    def n_transformers(self):
        return len(self.transformer_branches)

    def aux_branch_indices(self):
        return [i for pair in self.transformer_branches for i in pair]

    def channel(self, name: str, t):
        """Source channel evaluated at ``t``.

        Returns shape ``(n1,)`` for scalar ``t`` and ``(len(t), n1)``
        otherwise.  Channel names are ``j``, ``j_dot``, ``j_int``, ``v``,
        ``v_dot`` and ``v_int``; an optional ``_ddot`` suffix on a value
        channel gives the second derivative.
        """
        family, _, what = name.partition("_")
        sources = self.flow_sources if family == "j" else self.effort_sources
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((tt.size, self.n1))
        for i, src in sources.items():
            if what == "":
                out[:, i] = src.value(tt)
            elif what == "dot":
                out[:, i] = src.derivative(tt)
            elif what == "ddot":
                out[:, i] = src.second_derivative(tt)
            elif what == "int":
                out[:, i] = src.integral(tt)
            else:
                raise KeyError(name)
        return out[0] if scalar else out

    def v_f(self, t):
        return self.channel("v", t)

    def j_f(self, t):
        return self.channel("j", t)


def _exact_scalar(value):
    if isinstance(value, bool):
        raise InvalidValue("boolean is not a value")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return value


def _inverse(value, exact):
    if exact:
        return 1 / _exact_scalar(value) if isinstance(value, (int, float, Fraction)) else 1 / value
    return 1.0 / float(value)


def assemble_constitutive(model, exact: bool = False) -> ConstitutiveSet:
    """Collect the branch laws of ``model`` into a :class:`ConstitutiveSet`.

    With ``exact=True`` the matrices have object dtype and hold rationals
    (or whatever symbolic values the model carries); otherwise float64.
    """
    cx = model.complex
    n1 = cx.n_branches
    bidx = cx.branch_index
    dtype = object if exact else float

    def zeros(shape):
        out = np.zeros(shape, dtype=dtype)
        if exact:
            out[...] = Fraction(0)
        return out

    def conv(value):
        return _exact_scalar(value) if exact else float(value)

    mats = {k: zeros((n1, n1)) for k in ("Rg", "Rg_inv", "Cg", "Cg_inv", "Lg", "Lg_inv", "Kg", "Kg_inv")}
    effort, flow = {}, {}
    names = {
        ElementKind.RESISTOR: "Rg",
        ElementKind.CAPACITOR: "Cg",
        ElementKind.INDUCTOR: "Lg",
    }
    for el in model.elements:
        i = bidx[el.branch]
        if el.kind.is_passive:
            key = names[el.kind]
            mats[key][i, i] = conv(el.value)
            mats[key + "_inv"][i, i] = _inverse(el.value, exact)
        elif el.kind is ElementKind.EFFORT_SOURCE:
            effort[i] = el.source
        else:
            flow[i] = el.source

    trafos = [t for t in model.transducers if t.kind is TransducerKind.TRANSFORMER]
    kt = zeros((len(trafos), n1))
    ktp = zeros((len(trafos), n1))
    pairs = []
    for r, tr in enumerate(trafos):
        il, ir = bidx[tr.left_branch], bidx[tr.right_branch]
        pairs.append((il, ir))
        one = Fraction(1) if exact else 1.0
        kt[r, il] = one
        kt[r, ir] = -conv(tr.modulus)
        ktp[r, il] = one
        ktp[r, ir] = -_inverse(tr.modulus, exact)
    for g in model.transducers:
        if g.kind is not TransducerKind.GYRATOR:
            continue
        il, ir = bidx[g.left_branch], bidx[g.right_branch]
        k = conv(g.modulus)
        kinv = _inverse(g.modulus, exact)
        mats["Kg"][il, ir] = mats["Kg"][ir, il] = k
        mats["Kg_inv"][il, ir] = mats["Kg_inv"][ir, il] = kinv

    return ConstitutiveSet(
        branch_ids=cx.branch_ids,
        kt_rows=kt,
        kt_prime_rows=ktp,
        transformer_branches=pairs,
        effort_sources=effort,
        flow_sources=flow,
        exact=exact,
        **mats,
    )


def sign_convention_check(model) -> ValidationReport:
    """Report source and transducer placements that cannot be honoured.

    Works on unchecked models too.  Findings include sources or elements on
    unknown branches, transducers sharing a branch with other elements,
    and transducers whose two branches coincide.
    """
    report = ValidationReport()
    add = report.findings.append
    branches = set(model.complex.branch_ids)
    busy = {}
    for el in model.elements:
        if el.branch not in branches:
            code = "DanglingSource" if not el.kind.is_passive else "DanglingElement"
            add(Finding(code, f"{el.kind.value} on unknown branch {el.branch!r}", el.branch))
            continue
        busy.setdefault(el.branch, []).append(el.kind)
    used = {}
    for tr in model.transducers:
        for b in (tr.left_branch, tr.right_branch):
            if b not in branches:
                add(Finding("DanglingTransducer", f"{tr.kind.value} on unknown branch {b!r}", b))
            elif b in busy:
                add(Finding("TransducerOnPassiveBranch",
                            f"{tr.kind.value} branch {b!r} also carries elements", b))
            if b in used:
                add(Finding("SharedTransducerBranch", f"branch {b!r} belongs to two transducers", b))
            used[b] = tr
        if tr.left_branch == tr.right_branch:
            add(Finding("DegenerateTransducer", "left and right branch coincide", tr.left_branch))
    for b, kinds in busy.items():
        if ElementKind.EFFORT_SOURCE in kinds and ElementKind.FLOW_SOURCE in kinds and not any(
            k.is_passive for k in kinds
        ):
            add(Finding("SourceLoop",
                        f"branch {b!r} holds an effort and a flow source and nothing else", b))
    return report
