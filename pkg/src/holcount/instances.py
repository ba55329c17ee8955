"""Symmetric log-concave signatures and Holant instances.

An instance pairs a graph with one symmetric signature per vertex; the
signature's arity must equal the vertex degree.  The validity condition used
throughout is: every signature value nonnegative, f(0) > 0, log-concavity
f(k)^2 >= f(k-1) f(k+1) for interior k, and contiguous positive support.

The derived quantities r_max (largest first-ratio f(1)/f(0) over vertices)
and B (worst-case local polynomial ratio P(0)/P(r_max)) drive the truncation
depth of the coupling tree and the error analysis of the estimator; both are
exact rationals here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Union

from .errors import NotANormalEdge, PreconditionViolated, UnknownEdge, UnknownVertex
from .graphs import HALF, NORMAL, EdgeRef, Graph, incident_edges, remove_edge, split_edge

RationalLike = Union[Fraction, int]


@dataclass(frozen=True)
class Signature:
    """A symmetric signature [f(0), ..., f(d)] of arity d over exact rationals."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("signature needs at least the f(0) entry")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @property
    def arity(self) -> int:
        return len(self.values) - 1

    def __call__(self, k: int) -> Fraction:
        """f(k), with f(k) = 0 outside the stored range."""
        if 0 <= k < len(self.values):
            return self.values[k]
        return Fraction(0)


def signature(values: Iterable[RationalLike]) -> Signature:
    return Signature(tuple(Fraction(v) for v in values))


def atmost_signature(b: int, arity: int) -> Signature:
    """Indicator of Hamming weight <= b, truncated at the given arity."""
    ones = min(b, arity) + 1
    return Signature(tuple(Fraction(1) for _ in range(ones)) + tuple(Fraction(0) for _ in range(arity + 1 - ones)))


def atleast_signature(b: int, arity: int) -> Signature:
    """Indicator of Hamming weight >= b (complement of atmost)."""
    zeros = min(b, arity + 1)
    return Signature(tuple(Fraction(0) for _ in range(zeros)) + tuple(Fraction(1) for _ in range(arity + 1 - zeros)))


class PartialAssignment:
    """Immutable map from a subset of edges to {0, 1}.

    Edges are keyed by their global index; EdgeRef keys are accepted and
    unwrapped.  The canonical representation is a tuple of (index, value)
    pairs sorted by index, which makes assignments hashable and cheap to
    compare — tree node labels use them directly.
    """

    __slots__ = ("_items",)

    def __init__(self, bindings: Union[Mapping, Iterable[tuple]] = ()) -> None:
        pairs = bindings.items() if isinstance(bindings, Mapping) else bindings
        norm: dict[int, int] = {}
        for edge, value in pairs:
            index = edge.index if isinstance(edge, EdgeRef) else int(edge)
            if value not in (0, 1):
                raise ValueError(f"assignment value must be 0 or 1, got {value!r}")
            if index in norm and norm[index] != value:
                raise ValueError(f"edge {index} bound twice with different values")
            norm[index] = value
        object.__setattr__(self, "_items", tuple(sorted(norm.items())))

    @property
    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(i for i, _ in self._items)

    def value(self, edge: Union[EdgeRef, int]) -> int | None:
        index = edge.index if isinstance(edge, EdgeRef) else int(edge)
        for i, v in self._items:
            if i == index:
                return v
        return None

    def assign(self, edge: Union[EdgeRef, int], value: int) -> "PartialAssignment":
        """Extension by one new binding; rebinding an edge is an error."""
        index = edge.index if isinstance(edge, EdgeRef) else int(edge)
        if self.value(index) is not None:
            raise ValueError(f"edge {index} already assigned")
        return PartialAssignment(self._items + ((index, value),))

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, edge: object) -> bool:
        index = edge.index if isinstance(edge, EdgeRef) else edge
        return any(i == index for i, _ in self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PartialAssignment) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{i}<-{v}" for i, v in self._items)
        return f"PartialAssignment({inner})"


@dataclass(frozen=True)
class HolantInstance:
    """A graph plus one signature per vertex (arity = degree)."""

    graph: Graph
    signatures: Mapping[str, Signature]

    def signature_of(self, v: str) -> Signature:
        try:
            return self.signatures[v]
        except KeyError:
            raise UnknownVertex(f"no signature for vertex {v!r}") from None


@dataclass(frozen=True)
class Violation:
    vertex: str
    rule: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None


def validate_instance(instance: HolantInstance) -> ValidationReport:
    """Check every instance invariant; violations are returned, not raised.

    Rules checked per vertex, in order: a signature exists, its arity equals
    the degree, all values are nonnegative, f(0) > 0, log-concavity at all
    interior positions, and contiguous positive support.
    """
    violations: list[Violation] = []
    g = instance.graph
    for v in g.vertices:
        try:
            f = instance.signature_of(v)
        except UnknownVertex:
            violations.append(Violation(v, "missing-signature", "no signature supplied"))
            continue
        deg = g.degree(v)
        if f.arity != deg:
            violations.append(Violation(v, "arity-mismatch", f"arity {f.arity} != degree {deg}"))
            continue
        if any(x < 0 for x in f.values):
            violations.append(Violation(v, "negative-value", f"values {f.values}"))
            continue
        if f.values[0] == 0:
            violations.append(Violation(v, "zero-at-origin", "f(0) = 0"))
            continue
        bad_k = next(
            (k for k in range(1, f.arity) if f.values[k] ** 2 < f.values[k - 1] * f.values[k + 1]),
            None,
        )
        if bad_k is not None:
            violations.append(Violation(v, "log-concavity", f"f({bad_k})^2 < f({bad_k - 1})*f({bad_k + 1})"))
            continue
        support = [k for k, x in enumerate(f.values) if x > 0]
        if support and support != list(range(support[0], support[-1] + 1)):
            violations.append(Violation(v, "support-gap", f"positive support {support} not contiguous"))
    extra = set(instance.signatures) - set(g.vertices)
    for v in sorted(extra):
        violations.append(Violation(v, "unknown-vertex", "signature for undeclared vertex"))
    return ValidationReport(not violations, tuple(violations))


def pin(instance: HolantInstance, e: Union[EdgeRef, int], c: int) -> HolantInstance:
    """The pinning of the instance with edge e assigned c.

    The edge is removed; each endpoint's signature is shifted to
    [f(c), ..., f(deg-1+c)].  Signatures of other vertices are untouched.
    Pinning where f_v(c) = 0 at an endpoint is permitted structurally but the
    result has f(0) = 0 there and fails validate_instance.
    """
    g = instance.graph
    index = e.index if isinstance(e, EdgeRef) else int(e)
    if not (0 <= index < g.num_edges):
        raise UnknownEdge(f"edge index {index} out of range")
    if c not in (0, 1):
        raise ValueError(f"pin value must be 0 or 1, got {c!r}")
    touched = g.endpoints(index)
    new_sigs = dict(instance.signatures)
    for v in touched:
        f = instance.signature_of(v)
        # Degree >= 1 at an endpoint, so the shifted window is never empty.
        new_sigs[v] = Signature(f.values[c : f.arity + c])
    return HolantInstance(remove_edge(g, index), new_sigs)


def local_polynomial_eval(f: Signature, x: RationalLike) -> Fraction:
    """P_f(x) = sum_i C(d, i) f(i) x^i with exact arithmetic."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("local polynomial is only evaluated at x >= 0")
    d = f.arity
    return sum((comb(d, i) * f.values[i] * x**i for i in range(d + 1)), Fraction(0))


def r_max(instance: HolantInstance) -> Fraction:
    """max_v f_v(1)/f_v(0), with f_v(1) = 0 for isolated vertices."""
    best = Fraction(0)
    for v in instance.graph.vertices:
        f = instance.signature_of(v)
        first = f(1) if f.arity >= 1 else Fraction(0)
        best = max(best, first / f.values[0])
    return best


def compute_B(instance: HolantInstance) -> Fraction:
    """min_v P_{f_v}(0) / P_{f_v}(r_max); lies in (0, 1] for valid instances."""
    r = r_max(instance)
    best: Fraction | None = None
    for v in instance.graph.vertices:
        f = instance.signature_of(v)
        ratio = f.values[0] / local_polynomial_eval(f, r)
        best = ratio if best is None or ratio < best else best
    return best if best is not None else Fraction(1)


def hamming_at(instance: HolantInstance, sigma: PartialAssignment, v: str) -> int:
    """Ham(sigma, E_v): number of incident edges assigned 1."""
    return sum(1 for e in incident_edges(instance.graph, v) if sigma.value(e) == 1)


def is_feasible_partial(instance: HolantInstance, sigma: PartialAssignment) -> bool:
    """True iff extending sigma by all-zeros has positive weight.

    Equivalent to f_v(Ham(sigma, E_v)) > 0 for every vertex touched by the
    assignment; runs in time linear in the assignment size (times degree).
    """
    g = instance.graph
    for i in sigma.domain:
        if not (0 <= i < g.num_edges):
            raise UnknownEdge(f"edge index {i} out of range")
    touched: set[str] = set()
    for i, _ in sigma.items:
        touched.update(g.endpoints(i))
    for v in touched:
        f = instance.signature_of(v)
        if f(hamming_at(instance, sigma, v)) == 0:
            return False
    return True


def unassigned_incident(instance: HolantInstance, sigma: PartialAssignment, v: str) -> list[EdgeRef]:
    """E_v^sigma: incident edges of v not in the domain of sigma, global order."""
    return [e for e in incident_edges(instance.graph, v) if e.index not in sigma.domain]


def split_instance(
    instance: HolantInstance, e: Union[EdgeRef, int]
) -> tuple[HolantInstance, HolantInstance, HolantInstance]:
    """Split normal edge e = {u, v} into half-edges and derive the two pinnings.

    Returns (Phi0, Phi1, Phi2) where Phi0 lives on the split graph with
    unchanged signatures, Phi1 = Phi0 with u's stub pinned to 1, and Phi2 =
    Phi0 with v's stub pinned to 0.  Requires f_u(1) > 0 and f_v(1) > 0;
    callers must take the R = 0 shortcut instead when that fails.

    Raises:
        PreconditionViolated: f_u(1) = 0 or f_v(1) = 0.
        NotANormalEdge: e is not a normal edge.
    """
    g = instance.graph
    index = e.index if isinstance(e, EdgeRef) else int(e)
    ref = g.edge_ref(index)
    if ref.kind != NORMAL:
        raise NotANormalEdge(f"edge {index} is a half-edge; only normal edges split")
    u, v = g.endpoints(ref)
    if instance.signature_of(u)(1) == 0 or instance.signature_of(v)(1) == 0:
        raise PreconditionViolated(
            f"split of edge {index} requires f(1) > 0 at both endpoints ({u!r}, {v!r})"
        )
    g0 = split_edge(g, ref)
    phi0 = HolantInstance(g0, dict(instance.signatures))
    # The split appends u's stub then v's stub at the end of the order.
    e_u = g0.num_edges - 2
    e_v = g0.num_edges - 1
    phi1 = pin(phi0, e_u, 1)
    phi2 = pin(phi0, e_v, 0)
    return phi0, phi1, phi2
